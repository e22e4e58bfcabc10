//! Pointwise exponents, the predicted spectrum `D(h) = d + rζ(h)`, the
//! dimension upper bound and a histogram estimate of the spectrum from
//! leaders.

use serde::{Serialize, Serializer};

use crate::admissible::{AdmissibleFamily, LogSequence, RatioFunction, DEFAULT_BRACKET_HI};
use crate::error::{Error, Result};
use crate::leaders::{local_leaders, LeaderPyramid};
use crate::regression::{ols, LinearFit};
use crate::spaces::verdict::{flush_to_zero, serialize_real};

/// Half-width of an exponent bin in the histogram estimator.
pub const DEFAULT_HALF_BIN: f64 = 0.05;
/// Endpoints closer than this to a grid point are snapped onto it.
const ENDPOINT_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentConfig {
    /// Coarsest scales left out of the regression.
    pub coarse_skip: u32,
    /// Usable scales required.
    pub min_scales: u32,
    /// Upper end of the exponent bracket.
    pub bracket_hi: f64,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        ExponentConfig {
            coarse_skip: 2,
            min_scales: 6,
            bracket_hi: DEFAULT_BRACKET_HI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Exponent {
    Value(f64),
    /// The estimate exceeds the bracket (e.g. vanishing leaders).
    AtLeast(f64),
    /// The estimate falls below the family's domain.
    AtMost(f64),
}

impl Exponent {
    /// The number carried by the variant.
    pub fn bound(&self) -> f64 {
        match *self {
            Exponent::Value(v) | Exponent::AtLeast(v) | Exponent::AtMost(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub exponent: Exponent,
    /// Scales whose leaders entered the regression.
    pub scales: Vec<u32>,
    pub fit: Option<LinearFit>,
    pub residuals: Vec<f64>,
}

/// `sup{h : (γ^{(h)}_j d^p_j(x₀))_j` shows no growth`}`.
///
/// Members of the family are `2^{jh} m_j`, so the slope of
/// `log₂(γ^{(h)}_j d^p_j(x₀))` against `j` is `h` plus the slope `b` of
/// `log₂(m_j d^p_j(x₀))`; the supremum is `−b`, found without iteration.
/// For the canonical family this is minus the slope of `log₂ d^p_j(x₀)`.
pub fn pointwise_exponent(
    lp: &LeaderPyramid,
    x0: &[f64],
    family: &AdmissibleFamily,
    cfg: &ExponentConfig,
) -> Result<ExponentEstimate> {
    let usable = (lp.j_max() + 1).saturating_sub(cfg.coarse_skip);
    if usable < cfg.min_scales {
        return Err(Error::ResolutionError(format!(
            "{usable} usable leader scales, at least {} needed",
            cfg.min_scales
        )));
    }
    let magnitude = lp.magnitude();
    let leaders: Vec<f64> = local_leaders(lp, x0)?
        .into_iter()
        .map(|v| flush_to_zero(v, magnitude))
        .collect();
    let points: Vec<(u32, f64)> = (cfg.coarse_skip..=lp.j_max())
        .filter(|&j| leaders[j as usize] > 0.0)
        .map(|j| (j, leaders[j as usize].log2() + family.modulation.log2_at(j as usize)))
        .collect();
    let lo = family.domain_floor(lp.d) + 1e-6;
    let scales: Vec<u32> = points.iter().map(|(j, _)| *j).collect();
    if points.is_empty() {
        return Ok(ExponentEstimate {
            exponent: Exponent::AtLeast(cfg.bracket_hi),
            scales,
            fit: None,
            residuals: Vec::new(),
        });
    }
    if points.len() < 3 {
        return Err(Error::ResolutionError(format!("only {} nonzero leaders", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|(j, _)| *j as f64).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
    let fit = ols(&xs, &ys).expect("distinct scales");
    let h = -fit.slope;
    let exponent = if h > cfg.bracket_hi {
        Exponent::AtLeast(cfg.bracket_hi)
    } else if h < lo {
        Exponent::AtMost(lo)
    } else {
        Exponent::Value(h)
    };
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - fit.predict(*x)).collect();
    Ok(ExponentEstimate {
        exponent,
        scales,
        fit: Some(fit),
        residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Predicted,
    Empirical,
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub kind: SpectrumKind,
    pub h_grid: Vec<f64>,
    /// `None` where the spectrum is absent (`−∞`).
    #[serde(rename = "D")]
    pub d_values: Vec<Option<f64>>,
    /// `[ζ^{-1}(−d/r), ζ^{-1}(0)]` for predictions; the span of present
    /// values for histogram estimates.
    pub interval: Option<(f64, f64)>,
    /// Scales regressed over, for histogram estimates.
    pub scales: Vec<u32>,
}

/// `I = [ζ^{-1}(−d/r), ζ^{-1}(0)]`.
pub fn spectrum_interval(rf: &RatioFunction) -> Result<(f64, f64)> {
    Ok((rf.h_min()?, rf.zeta_inverse(0.0)?))
}

/// `D(h) = d + rζ(h)` on `I`, absent elsewhere. The endpoints evaluate to
/// exactly 0 and `d`.
pub fn predicted_spectrum(rf: &RatioFunction, h_grid: &[f64]) -> Result<SpectrumEstimate> {
    let (lo, hi) = spectrum_interval(rf)?;
    let d = rf.d as f64;
    let d_values = h_grid
        .iter()
        .map(|&h| {
            if (h - hi).abs() <= ENDPOINT_SNAP {
                Ok(Some(d))
            } else if (h - lo).abs() <= ENDPOINT_SNAP {
                Ok(Some(0.0))
            } else if h < lo || h > hi {
                Ok(None)
            } else {
                let z = rf.zeta(h)?;
                Ok(Some((d + rf.r.value() * z).clamp(0.0, d)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumEstimate {
        kind: SpectrumKind::Predicted,
        h_grid: h_grid.to_vec(),
        d_values,
        interval: Some((lo, hi)),
        scales: Vec::new(),
    })
}

/// Upper bound on `dim{x : h_{p,q}(x) < h}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimensionBound {
    /// The set is empty.
    NegInfinity,
    Value(f64),
}

impl Serialize for DimensionBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DimensionBound::NegInfinity => s.serialize_str("-inf"),
            DimensionBound::Value(v) => serialize_real(v, s),
        }
    }
}

/// `d + r ζ(h)`; for `r = ∞` this is `−∞` when `ζ(h) < 0` and `d` otherwise.
pub fn dimension_upper_bound(rf: &RatioFunction, h: f64) -> Result<DimensionBound> {
    let z = rf.zeta(h)?;
    let d = rf.d as f64;
    if rf.r.is_infinite() {
        return Ok(if z < 0.0 {
            DimensionBound::NegInfinity
        } else {
            DimensionBound::Value(d)
        });
    }
    Ok(DimensionBound::Value(d + rf.r.value() * z))
}

/// Histogram estimate: `N_j(h) = #{λ ∈ Λ_j : γ_j^{(h+δ)−1} ≤ d^p_λ < γ_j^{(h−δ)−1}}`
/// and `D̂(h)` is the slope of `log₂ N_j(h)` over the scales with `N_j > 0`
/// (at least three are required).
pub fn empirical_spectrum(
    lp: &LeaderPyramid,
    family: &AdmissibleFamily,
    h_grid: &[f64],
    scales: std::ops::RangeInclusive<u32>,
    half_bin: f64,
) -> Result<SpectrumEstimate> {
    let (first, last) = (*scales.start(), *scales.end());
    if last > lp.j_max() || last < first || last + 1 - first < 6 {
        return Err(Error::ResolutionError(format!(
            "scale range {first}..={last} must hold 6 scales within 0..={}",
            lp.j_max()
        )));
    }
    if half_bin.is_nan() || half_bin <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "half bin must be positive, got {half_bin}"
        )));
    }
    let logs: Vec<Vec<f64>> = (first..=last)
        .map(|j| {
            lp.values[j as usize]
                .iter()
                .filter(|v| **v > 0.0)
                .map(|v| v.log2())
                .collect()
        })
        .collect();
    let mut d_values = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (j, level) in (first..=last).zip(&logs) {
            let m = family.modulation.log2_at(j as usize);
            let jf = j as f64;
            let lower = -jf * (h + half_bin) - m;
            let upper = -jf * (h - half_bin) - m;
            let count = level.iter().filter(|&&v| lower <= v && v < upper).count();
            if count > 0 {
                xs.push(jf);
                ys.push((count as f64).log2());
            }
        }
        d_values.push(if xs.len() >= 3 {
            ols(&xs, &ys).map(|f| f.slope)
        } else {
            None
        });
    }
    let present: Vec<f64> = h_grid
        .iter()
        .zip(&d_values)
        .filter(|(_, v)| v.is_some())
        .map(|(h, _)| *h)
        .collect();
    let interval = present.first().zip(present.last()).map(|(a, b)| (*a, *b));
    Ok(SpectrumEstimate {
        kind: SpectrumKind::Empirical,
        h_grid: h_grid.to_vec(),
        d_values,
        interval,
        scales: (first..=last).collect(),
    })
}

/// `S_j(m) = 2^{-jd} Σ_λ (d^p_λ)^m` over nonzero leaders, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureFunctions {
    pub moments: Vec<f64>,
    pub scales: Vec<u32>,
    /// `log2_s[m][j − first]`.
    pub log2_s: Vec<Vec<f64>>,
    /// Regression slope of `log₂ S_j(m)` against `j`.
    pub slopes: Vec<Option<f64>>,
}

pub fn structure_functions(
    lp: &LeaderPyramid,
    moments: &[f64],
    scales: std::ops::RangeInclusive<u32>,
) -> Result<StructureFunctions> {
    if *scales.end() > lp.j_max() {
        return Err(Error::ResolutionError(format!("scale {} not reported", scales.end())));
    }
    let used: Vec<u32> = scales.collect();
    let d = lp.d as f64;
    let mut log2_s = Vec::new();
    let mut slopes = Vec::new();
    for &m in moments {
        let row: Vec<f64> = used
            .iter()
            .map(|&j| {
                let s: f64 = lp.values[j as usize]
                    .iter()
                    .filter(|v| **v > 0.0)
                    .map(|v| v.powf(m))
                    .sum();
                s.log2() - j as f64 * d
            })
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = used
            .iter()
            .zip(&row)
            .filter(|(_, y)| y.is_finite())
            .map(|(j, y)| (*j as f64, *y))
            .unzip();
        slopes.push(ols(&xs, &ys).map(|f| f.slope));
        log2_s.push(row);
    }
    Ok(StructureFunctions {
        moments: moments.to_vec(),
        scales: used,
        log2_s,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::AdmissibleSequence;
    use crate::index::Index;
    use crate::leaders::leader_pyramid;
    use crate::wavelet::CoefficientPyramid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_rf(s0: f64, r: Index) -> RatioFunction {
        let fam = AdmissibleFamily::canonical(Index::INFINITY, Index::INFINITY);
        RatioFunction::new(AdmissibleSequence::power(s0).unwrap(), fam, 1, r).unwrap()
    }

    #[test]
    fn predicted_linear_segment() {
        let s0 = 1.2;
        let rf = linear_rf(s0, Index::TWO);
        let (lo, hi) = spectrum_interval(&rf).unwrap();
        assert!((lo - (s0 - 0.5)).abs() < 1e-8 && (hi - s0).abs() < 1e-8);
        let grid = vec![lo - 0.1, lo, s0 - 0.25, hi, hi + 0.1];
        let sp = predicted_spectrum(&rf, &grid).unwrap();
        assert_eq!(sp.d_values[0], None);
        assert_eq!(sp.d_values[1], Some(0.0));
        assert!((sp.d_values[2].unwrap() - 0.5).abs() < 1e-8);
        assert_eq!(sp.d_values[3], Some(1.0));
        assert_eq!(sp.d_values[4], None);
    }

    #[test]
    fn dimension_bounds() {
        let rf = linear_rf(1.0, Index::TWO);
        match dimension_upper_bound(&rf, 0.75).unwrap() {
            DimensionBound::Value(v) => assert!((v - 0.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let rf_inf = linear_rf(1.0, Index::INFINITY);
        assert_eq!(
            dimension_upper_bound(&rf_inf, 0.5).unwrap(),
            DimensionBound::NegInfinity
        );
        assert_eq!(dimension_upper_bound(&rf_inf, 1.5).unwrap(), DimensionBound::Value(1.0));
        assert!(matches!(dimension_upper_bound(&rf, -0.5), Err(Error::OutOfDomain(_))));
        assert_eq!(serde_json::to_string(&DimensionBound::NegInfinity).unwrap(), "\"-inf\"");
        let mut prev = f64::NEG_INFINITY;
        for t in 0..20 {
            if let DimensionBound::Value(v) = dimension_upper_bound(&rf, 0.1 * t as f64 + 0.05).unwrap() {
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    fn monofractal(u: f64, big_j: u32, seed: u64) -> CoefficientPyramid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pyr = CoefficientPyramid::zeros(1, big_j, "db4").unwrap();
        for (j, level) in pyr.detail.iter_mut().enumerate() {
            let c = (-u * j as f64).exp2();
            level
                .iter_mut()
                .for_each(|v| *v = if rng.random::<bool>() { c } else { -c });
        }
        pyr
    }

    #[test]
    fn exponent_of_monofractal_and_zero() {
        let fam = AdmissibleFamily::canonical(Index::INFINITY, Index::INFINITY);
        let lp = leader_pyramid(&monofractal(0.6, 12, 1), Index::INFINITY, 2).unwrap();
        let e = pointwise_exponent(&lp, &[0.37], &fam, &ExponentConfig::default()).unwrap();
        assert!((e.exponent.bound() - 0.6).abs() < 1e-9, "{e:?}");
        let zero = leader_pyramid(&CoefficientPyramid::zeros(1, 12, "db4").unwrap(), Index::INFINITY, 2).unwrap();
        let z = pointwise_exponent(&zero, &[0.37], &fam, &ExponentConfig::default()).unwrap();
        assert_eq!(z.exponent, Exponent::AtLeast(DEFAULT_BRACKET_HI));
        let short = leader_pyramid(&CoefficientPyramid::zeros(1, 8, "db4").unwrap(), Index::INFINITY, 2).unwrap();
        assert!(matches!(
            pointwise_exponent(&short, &[0.37], &fam, &ExponentConfig::default()),
            Err(Error::ResolutionError(_))
        ));
    }

    #[test]
    fn bounded_modulation_barely_moves_the_exponent() {
        let lp = leader_pyramid(&monofractal(0.6, 14, 2), Index::INFINITY, 2).unwrap();
        let flat = AdmissibleFamily::canonical(Index::INFINITY, Index::INFINITY);
        let table: Vec<f64> = (0..12)
            .map(|j| 1.0 + 0.5 * ((j % 3) as f64))
            .chain(std::iter::once(1.0))
            .collect();
        let wobble = AdmissibleFamily::new(
            AdmissibleSequence::tabulated(table).unwrap(),
            Index::INFINITY,
            Index::INFINITY,
        );
        let cfg = ExponentConfig::default();
        let a = pointwise_exponent(&lp, &[0.2], &flat, &cfg).unwrap().exponent.bound();
        let b = pointwise_exponent(&lp, &[0.2], &wobble, &cfg).unwrap().exponent.bound();
        assert!((a - b).abs() <= 0.05, "{a} vs {b}");
    }

    #[test]
    fn histogram_of_monofractal() {
        let u = 0.6;
        let lp = leader_pyramid(&monofractal(u, 14, 3), Index::INFINITY, 2).unwrap();
        let fam = AdmissibleFamily::canonical(Index::INFINITY, Index::INFINITY);
        let grid: Vec<f64> = (0..9).map(|t| 0.4 + 0.05 * t as f64).collect();
        let sp = empirical_spectrum(&lp, &fam, &grid, 3..=11, DEFAULT_HALF_BIN).unwrap();
        let at_u = sp.d_values[4].expect("bin at u is populated");
        assert!((at_u - 1.0).abs() < 0.15, "{at_u}");
        assert!(sp.d_values[0].is_none() && sp.d_values[8].is_none());
        let zero = leader_pyramid(&CoefficientPyramid::zeros(1, 14, "db4").unwrap(), Index::INFINITY, 2).unwrap();
        let empty = empirical_spectrum(&zero, &fam, &grid, 3..=11, DEFAULT_HALF_BIN).unwrap();
        assert!(empty.d_values.iter().all(Option::is_none));
        assert_eq!(empty.interval, None);
    }

    #[test]
    fn structure_functions_of_monofractal() {
        let u = 0.6;
        let lp = leader_pyramid(&monofractal(u, 12, 4), Index::INFINITY, 2).unwrap();
        let sf = structure_functions(&lp, &[1.0, 2.0], 2..=9).unwrap();
        assert!((sf.slopes[0].unwrap() + u).abs() < 1e-9);
        assert!((sf.slopes[1].unwrap() + 2.0 * u).abs() < 1e-9);
    }
}
