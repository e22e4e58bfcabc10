//! Direct (signal-side) pointwise criteria: finite differences, local
//! polynomial approximation and the log-corrected difference test.
//!
//! Balls are sets of grid points within periodic Euclidean distance `R` of
//! `x₀`; `L^p` norms are Riemann sums with cell volume `2^{-Jd}`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::verdict::{
    flush_to_zero, lq_verdict, Interpretation, MembershipVerdict, RegularitySequence, SurrogateConfig,
};
use crate::admissible::{boyd_indices, AdmissibleSequence, LogSequence, DEFAULT_BOYD_SCALE};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::wavelet::Signal;

/// Finest scale `j` usable on a grid of `2^J` points per axis.
pub const RESOLUTION_MARGIN: u32 = 3;
const IRLS_ITERATIONS: usize = 20;
const IRLS_STAGNATION: f64 = 1e-10;

/// Grid points of the ball: offsets from the grid point nearest `x₀`, the
/// displacement `x − x₀` and the sample index.
struct Ball {
    offsets: Vec<Vec<i64>>,
    displacement: Vec<Vec<f64>>,
    index: Vec<usize>,
}

fn nearest_grid(x0: &[f64], side: usize) -> Vec<i64> {
    x0.iter().map(|&x| (x * side as f64).round() as i64).collect()
}

fn sample_index(point: &[i64], side: usize) -> usize {
    point
        .iter()
        .fold(0usize, |acc, &c| acc * side + c.rem_euclid(side as i64) as usize)
}

fn ball(signal: &Signal, x0: &[f64], radius: f64) -> Ball {
    let side = signal.side();
    let d = signal.d;
    let centre = nearest_grid(x0, side);
    let reach = ((radius * side as f64).ceil() as i64 + 1).min(side as i64 / 2);
    let lo = -reach;
    let hi = if reach == side as i64 / 2 { reach - 1 } else { reach };
    let width = (hi - lo + 1) as usize;
    let mut out = Ball {
        offsets: Vec::new(),
        displacement: Vec::new(),
        index: Vec::new(),
    };
    for flat in 0..width.pow(d as u32) {
        let mut rest = flat;
        let mut off = vec![0i64; d];
        for slot in off.iter_mut().rev() {
            *slot = lo + (rest % width) as i64;
            rest /= width;
        }
        let disp: Vec<f64> = off
            .iter()
            .zip(&centre)
            .zip(x0)
            .map(|((o, c), x)| (c + o) as f64 / side as f64 - x)
            .collect();
        if disp.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius {
            let point: Vec<i64> = off.iter().zip(&centre).map(|(o, c)| o + c).collect();
            out.index.push(sample_index(&point, side));
            out.offsets.push(off);
            out.displacement.push(disp);
        }
    }
    out
}

fn check_point(signal: &Signal, x0: &[f64]) -> Result<()> {
    if x0.len() != signal.d {
        return Err(Error::InvalidShape(format!(
            "point has {} coordinates, signal is {}-dimensional",
            x0.len(),
            signal.d
        )));
    }
    Ok(())
}

fn check_resolution(signal: &Signal, j: u32) -> Result<()> {
    if j + RESOLUTION_MARGIN > signal.j {
        return Err(Error::ResolutionError(format!(
            "scale {j} needs at least 2^{} samples per axis, signal has 2^{}",
            j + RESOLUTION_MARGIN,
            signal.j
        )));
    }
    Ok(())
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `sup_{0<|h|≤2^{-j}} ‖Δ_h^{order} f‖_{L^p(B_h(x₀, 2^{-j}))}` over grid-aligned
/// steps. Steps `h` and `−h` give the same norm, so only one of each pair is
/// visited.
pub fn difference_sup(signal: &Signal, x0: &[f64], p: Index, order: u32, j: u32) -> Result<f64> {
    check_point(signal, x0)?;
    check_resolution(signal, j)?;
    let side = signal.side();
    let d = signal.d;
    let radius = (-(j as f64)).exp2();
    let b = ball(signal, x0, radius);
    let centre = nearest_grid(x0, side);
    let max_step = 1i64 << (signal.j - j);
    let inside = |off: &[i64]| -> bool {
        off.iter()
            .zip(&centre)
            .zip(x0)
            .map(|((o, c), x)| {
                let t = (c + o) as f64 / side as f64 - x;
                t * t
            })
            .sum::<f64>()
            .sqrt()
            <= radius
    };
    let steps: Vec<Vec<i64>> = if d == 1 {
        (1..=max_step).map(|s| vec![s]).collect()
    } else {
        let mut v = Vec::new();
        for a in 0..=max_step {
            for c in -max_step..=max_step {
                if (a > 0 || c > 0) && a * a + c * c <= max_step * max_step {
                    v.push(vec![a, c]);
                }
            }
        }
        v
    };
    let weights: Vec<f64> = (0..=order)
        .map(|t| {
            let sign = if (order - t).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(order, t)
        })
        .collect();
    let cell = (-((signal.j as usize * d) as f64)).exp2();
    let samples = &signal.samples;
    let norm_for = |s: &Vec<i64>| -> f64 {
        let mut acc = 0.0f64;
        let mut any = false;
        for off in &b.offsets {
            let end: Vec<i64> = off.iter().zip(s).map(|(o, st)| o + order as i64 * st).collect();
            if !inside(&end) {
                continue;
            }
            any = true;
            let mut delta = 0.0;
            for (t, w) in weights.iter().enumerate() {
                let point: Vec<i64> = off
                    .iter()
                    .zip(s)
                    .zip(&centre)
                    .map(|((o, st), c)| c + o + t as i64 * st)
                    .collect();
                delta += w * samples[sample_index(&point, side)];
            }
            if p.is_infinite() {
                acc = acc.max(delta.abs());
            } else {
                acc += delta.abs().powf(p.value()) * cell;
            }
        }
        if !any {
            0.0
        } else if p.is_infinite() {
            acc
        } else {
            acc.powf(1.0 / p.value())
        }
    };
    Ok(steps.par_iter().map(norm_for).reduce(|| 0.0, f64::max))
}

/// `σ_j 2^{jd/p} sup_h ‖Δ_h^{order} f‖_{L^p(B_h(x₀,2^{-j}))}` for `j ∈ scales`.
pub fn finite_difference_norms(
    signal: &Signal,
    x0: &[f64],
    sigma: &AdmissibleSequence,
    p: Index,
    order: u32,
    scales: std::ops::RangeInclusive<u32>,
    q: Index,
) -> Result<RegularitySequence> {
    let first = *scales.start();
    let d = signal.d as f64;
    let values = scales
        .map(|j| {
            let sup = flush_to_zero(difference_sup(signal, x0, p, order, j)?, signal.max_abs());
            Ok(sigma.value_at(j as usize) * (j as f64 * d * p.recip()).exp2() * sup)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RegularitySequence::new(first, values, q, Interpretation::Direct))
}

/// `floor(s̄(σ))`, the polynomial degree and difference order minus one.
pub fn sigma_degree(sigma: &AdmissibleSequence) -> Result<u32> {
    let bi = boyd_indices(sigma, DEFAULT_BOYD_SCALE)?;
    if bi.lower <= 0.0 {
        return Err(Error::IndexConditionViolated(format!(
            "need s_(σ) > 0, estimated {:.6}",
            bi.lower
        )));
    }
    Ok(bi.upper.floor() as u32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyTerm {
    pub alpha: Vec<u32>,
    /// Coefficient of `(x − x₀)^α`.
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalPolynomial {
    pub center: Vec<f64>,
    pub degree: u32,
    pub terms: Vec<PolyTerm>,
    /// Discrete `‖f − P‖_{L^p(B)}` of the fit, when it came from data.
    pub residual: f64,
    pub notes: Vec<String>,
}

impl LocalPolynomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.alpha
                        .iter()
                        .zip(x.iter().zip(&self.center))
                        .map(|(a, (xi, ci))| (xi - ci).powi(*a as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// `D^α P(x₀) = α! c_α`.
    pub fn derivative(&self, alpha: &[u32]) -> f64 {
        self.terms
            .iter()
            .find(|t| t.alpha == alpha)
            .map_or(0.0, |t| t.coeff * alpha.iter().map(|&a| factorial(a)).product::<f64>())
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Multi-indices with `|α| ≤ n`, graded then lexicographic.
pub fn multi_indices(d: usize, n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=n {
        if d == 1 {
            out.push(vec![total]);
        } else {
            for a in (0..=total).rev() {
                out.push(vec![a, total - a]);
            }
        }
    }
    out
}

fn weighted_lstsq(design: &DMatrix<f64>, rhs: &DVector<f64>, weights: &[f64]) -> Result<DVector<f64>> {
    let mut a = design.clone();
    let mut b = rhs.clone();
    for (row, w) in weights.iter().enumerate() {
        let s = w.sqrt();
        a.row_mut(row).scale_mut(s);
        b[row] *= s;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(Error::ResolutionError(
            "polynomial fit is underdetermined on this ball".into(),
        ));
    }
    svd.solve(&b, 0.0).map_err(|e| Error::ResolutionError(e.to_string()))
}

/// Best `L^p` polynomial of degree `≤ n` on `B(x₀, 2^{-j})`: exact least
/// squares for `p = 2`, IRLS for `1 < p < ∞`, and the `p = 2` fit in place of
/// `p ∈ {1, ∞}` (noted in `notes`).
pub fn best_polynomial(signal: &Signal, x0: &[f64], j: u32, n: u32, p: Index) -> Result<LocalPolynomial> {
    check_point(signal, x0)?;
    let radius = (-(j as f64)).exp2();
    let b = ball(signal, x0, radius);
    let alphas = multi_indices(signal.d, n);
    let needed = (n as usize + 1) * 8;
    if b.index.len() < needed.max(alphas.len()) {
        return Err(Error::ResolutionError(format!(
            "ball at scale {j} holds {} samples, degree {n} needs {needed}",
            b.index.len()
        )));
    }
    // Displacements are rescaled by 2^j to keep the design well conditioned.
    let scale = (j as f64).exp2();
    let design = DMatrix::from_fn(b.index.len(), alphas.len(), |row, col| {
        alphas[col]
            .iter()
            .zip(&b.displacement[row])
            .map(|(a, y)| (y * scale).powi(*a as i32))
            .product()
    });
    let rhs = DVector::from_iterator(b.index.len(), b.index.iter().map(|&i| signal.samples[i]));
    let mut notes = Vec::new();
    let ones = vec![1.0; b.index.len()];
    let mut coef = weighted_lstsq(&design, &rhs, &ones)?;
    let pv = p.value();
    if p.is_infinite() || pv == 1.0 {
        notes.push(format!(
            "p = {p}: least-squares fit used in place of the L^p-optimal polynomial"
        ));
    } else if pv != 2.0 {
        let floor = 1e-12 * rhs.amax().max(1e-300);
        for _ in 0..IRLS_ITERATIONS {
            let resid = &rhs - &design * &coef;
            let w: Vec<f64> = resid.iter().map(|r| r.abs().max(floor).powf(pv - 2.0)).collect();
            let next = weighted_lstsq(&design, &rhs, &w)?;
            let change = (&next - &coef).amax() / coef.amax().max(1e-300);
            coef = next;
            if change < IRLS_STAGNATION {
                break;
            }
        }
    }
    let resid = &rhs - &design * &coef;
    let cell = (-((signal.j as usize * signal.d) as f64)).exp2();
    let residual = if p.is_infinite() {
        resid.amax()
    } else {
        (resid.iter().map(|r| r.abs().powf(pv)).sum::<f64>() * cell).powf(1.0 / pv)
    };
    let terms = alphas
        .into_iter()
        .zip(coef.iter())
        .map(|(alpha, c)| {
            let total: u32 = alpha.iter().sum();
            PolyTerm {
                coeff: c * scale.powi(total as i32),
                alpha,
            }
        })
        .collect();
    Ok(LocalPolynomial {
        center: x0.to_vec(),
        degree: n,
        terms,
        residual,
        notes,
    })
}

/// Finest scale at which a degree-`n` fit is resolvable.
pub fn finest_polynomial_scale(signal: &Signal, n: u32) -> u32 {
    let needed = ((n as f64 + 1.0) * 8.0).log2().ceil() as u32;
    signal.j.saturating_sub(needed.max(RESOLUTION_MARGIN))
}

/// Verdict on `(σ_j 2^{jd/p} ‖f − P_{j,x₀}‖_{L^p(B(x₀,2^{-j}))})_j`.
pub fn direct_membership(
    signal: &Signal,
    x0: &[f64],
    sigma: &AdmissibleSequence,
    p: Index,
    q: Index,
    cfg: &SurrogateConfig,
) -> Result<MembershipVerdict> {
    let n = sigma_degree(sigma)?;
    let (seq, notes) = polynomial_errors(signal, x0, sigma, p, q, n, cfg)?;
    let mut v = lq_verdict(&seq, cfg);
    v.diagnostics.notes.extend(notes);
    Ok(v)
}

/// The sequence behind [`direct_membership`].
pub fn polynomial_errors(
    signal: &Signal,
    x0: &[f64],
    sigma: &AdmissibleSequence,
    p: Index,
    q: Index,
    n: u32,
    cfg: &SurrogateConfig,
) -> Result<(RegularitySequence, Vec<String>)> {
    check_point(signal, x0)?;
    let first = cfg.coarse_skip;
    let last = finest_polynomial_scale(signal, n);
    if last < first {
        return Err(Error::ResolutionError(format!(
            "no resolvable scale for degree {n} on a 2^{} grid",
            signal.j
        )));
    }
    let d = signal.d as f64;
    let mut notes = Vec::new();
    let values = (first..=last)
        .map(|j| {
            let poly = best_polynomial(signal, x0, j, n, p)?;
            if notes.is_empty() {
                notes.extend(poly.notes.iter().cloned());
            }
            let residual = flush_to_zero(poly.residual, signal.max_abs());
            Ok(sigma.value_at(j as usize) * (j as f64 * d * p.recip()).exp2() * residual)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((RegularitySequence::new(first, values, q, Interpretation::Direct), notes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquePolynomial {
    pub polynomial: LocalPolynomial,
    /// Largest spread of `D^α P_{j,x₀}(x₀)` over the scales used.
    pub drift: f64,
    /// Set when the per-scale derivatives fail to contract.
    pub inconclusive: bool,
    pub scales: Vec<u32>,
}

/// The scale-independent polynomial `P_{x₀}` with coefficients
/// `lim_j D^α P_{j,x₀}(x₀) / α!`, extrapolated from the four finest scales of
/// `scales` by Aitken's Δ² process on the three finest.
pub fn unique_polynomial(
    signal: &Signal,
    x0: &[f64],
    sigma: &AdmissibleSequence,
    p: Index,
    scales: std::ops::RangeInclusive<u32>,
) -> Result<UniquePolynomial> {
    let bi = boyd_indices(sigma, DEFAULT_BOYD_SCALE)?;
    let n = bi.upper.floor();
    if !(n >= 0.0 && n < bi.lower) {
        return Err(Error::IndexConditionViolated(format!(
            "need 0 <= floor(s̄(σ)) < s_(σ); estimated s_ = {:.6}, s̄ = {:.6}",
            bi.lower, bi.upper
        )));
    }
    let n = n as u32;
    let top = (*scales.end()).min(finest_polynomial_scale(signal, n));
    if top < *scales.start() + 3 {
        return Err(Error::ResolutionError("need four resolvable scales".into()));
    }
    let used: Vec<u32> = (top - 3..=top).collect();
    let fits = used
        .iter()
        .map(|&j| best_polynomial(signal, x0, j, n, p))
        .collect::<Result<Vec<_>>>()?;
    let alphas = multi_indices(signal.d, n);
    let mut drift = 0.0f64;
    let mut inconclusive = false;
    let mut terms = Vec::new();
    for alpha in alphas {
        let v: Vec<f64> = fits.iter().map(|f| f.derivative(&alpha)).collect();
        let spread = v.iter().fold(0.0f64, |m, x| m.max((x - v[3]).abs()));
        drift = drift.max(spread);
        let (d1, d2) = (v[2] - v[1], v[3] - v[2]);
        if (v[1] - v[0]).abs() < d2.abs() && d2.abs() > 1e-12 * (1.0 + v[3].abs()) {
            inconclusive = true;
        }
        let rho = if d1 != 0.0 { d2 / d1 } else { 0.0 };
        let limit = if rho > 0.0 && rho < 1.0 {
            v[3] + d2 * rho / (1.0 - rho)
        } else {
            v[3]
        };
        let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        terms.push(PolyTerm {
            alpha,
            coeff: limit / fact,
        });
    }
    let mut notes = fits[0].notes.clone();
    if inconclusive {
        notes.push("derivatives at x0 do not contract across scales".into());
    }
    Ok(UniquePolynomial {
        polynomial: LocalPolynomial {
            center: x0.to_vec(),
            degree: n,
            terms,
            residual: f64::NAN,
            notes,
        },
        drift,
        inconclusive,
        scales: used,
    })
}

/// `2^{jd/p} σ_j / |log₂(2^{-jd/p} σ_j^{-1})|`.
pub fn log_weight(sigma: &AdmissibleSequence, j: u32, d: usize, p: Index) -> f64 {
    let e = j as f64 * d as f64 * p.recip() + sigma.log2_at(j as usize);
    e.exp2() / e.abs()
}

/// Verdict on the log-corrected difference sequence
/// `(2^{jd/p} σ_j / |log₂(2^{-jd/p} σ_j^{-1})| · sup_h ‖Δ_h^{n+1} f‖)_j` with
/// `n = floor(s̄(σ))`. Requires `σ̲_1 > 2^{-d/p}` and `2^{-jd/p} σ_j^{-1} → 0`.
pub fn log_corrected_criterion(
    signal: &Signal,
    x0: &[f64],
    sigma: &AdmissibleSequence,
    p: Index,
    q: Index,
    cfg: &SurrogateConfig,
) -> Result<MembershipVerdict> {
    check_point(signal, x0)?;
    let d = signal.d;
    let floor = -(d as f64) * p.recip();
    if sigma.underline(1, 4 * DEFAULT_BOYD_SCALE).log2() <= floor {
        return Err(Error::IndexConditionViolated("need underline σ_1 > 2^(-d/p)".into()));
    }
    let bi = boyd_indices(sigma, DEFAULT_BOYD_SCALE)?;
    if bi.lower <= floor {
        return Err(Error::IndexConditionViolated(format!(
            "2^(-jd/p) σ_j^(-1) must tend to 0; s_(σ) = {:.6} <= -d/p",
            bi.lower
        )));
    }
    let order = bi.upper.max(0.0).floor() as u32 + 1;
    let first = cfg.coarse_skip.max(1);
    let last = signal.j.saturating_sub(RESOLUTION_MARGIN);
    if last < first {
        return Err(Error::ResolutionError("no resolvable scale".into()));
    }
    let values = (first..=last)
        .map(|j| {
            Ok(log_weight(sigma, j, d, p) * flush_to_zero(difference_sup(signal, x0, p, order, j)?, signal.max_abs()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let seq = RegularitySequence::new(first, values, q, Interpretation::LogCorrected);
    Ok(lq_verdict(&seq, cfg))
}
