//! Admissible sequences, their Boyd indices, admissible families and the
//! ratio function `ζ(h)`.
//!
//! Every sequence is evaluated in the log domain (`log₂ σ_j`) so that
//! quotients such as `σ_{J+k} / σ_k` never overflow, even for steep models
//! evaluated at a few hundred scales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Index;

/// Scale at which Boyd indices are estimated unless a caller asks otherwise.
pub const DEFAULT_BOYD_SCALE: usize = 64;
/// Default upper end of the bisection bracket used to invert `ζ`.
pub const DEFAULT_BRACKET_HI: f64 = 16.0;
/// Offset added to `-d/p` for the lower end of the bisection bracket.
const BRACKET_LO_OFFSET: f64 = 1e-6;
const BISECTION_TOL: f64 = 1e-9;

/// Anything that can report `log₂` of its `j`-th term.
pub trait LogSequence {
    fn log2_at(&self, j: usize) -> f64;

    fn value_at(&self, j: usize) -> f64 {
        self.log2_at(j).exp2()
    }
}

impl<T: LogSequence + ?Sized> LogSequence for &T {
    fn log2_at(&self, j: usize) -> f64 {
        (**self).log2_at(j)
    }
}

/// Term-wise quotient `a_j / b_j`.
#[derive(Debug, Clone, Copy)]
pub struct Quotient<A, B>(pub A, pub B);

impl<A: LogSequence, B: LogSequence> LogSequence for Quotient<A, B> {
    fn log2_at(&self, j: usize) -> f64 {
        self.0.log2_at(j) - self.1.log2_at(j)
    }
}

/// Closed-form descriptor of an admissible sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SequenceModel {
    /// `σ_j = 2^{js} (1 + j)^b`.
    #[serde(rename = "powerlog")]
    PowerLog {
        s: f64,
        #[serde(default)]
        b: f64,
    },
    /// Explicit positive values; past the end the last consecutive ratio is
    /// repeated.
    #[serde(rename = "table")]
    Tabulated { values: Vec<f64> },
}

/// A positive sequence `(σ_j)_j` with bounded consecutive ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceModel", into = "SequenceModel")]
pub struct AdmissibleSequence {
    model: SequenceModel,
    /// Cached `log₂` of the tabulated values.
    log_table: Vec<f64>,
    j_max: usize,
}

impl TryFrom<SequenceModel> for AdmissibleSequence {
    type Error = Error;

    fn try_from(model: SequenceModel) -> Result<Self> {
        match model {
            SequenceModel::PowerLog { s, b } => AdmissibleSequence::power_log(s, b),
            SequenceModel::Tabulated { values } => AdmissibleSequence::tabulated(values),
        }
    }
}

impl From<AdmissibleSequence> for SequenceModel {
    fn from(seq: AdmissibleSequence) -> Self {
        seq.model
    }
}

impl AdmissibleSequence {
    pub fn power_log(s: f64, b: f64) -> Result<Self> {
        if !s.is_finite() || !b.is_finite() {
            return Err(Error::InvalidSequence(format!(
                "powerlog parameters must be finite (s = {s}, b = {b})"
            )));
        }
        Ok(AdmissibleSequence {
            model: SequenceModel::PowerLog { s, b },
            log_table: Vec::new(),
            j_max: usize::MAX,
        })
    }

    /// The pure power sequence `2^{js}`.
    pub fn power(s: f64) -> Result<Self> {
        Self::power_log(s, 0.0)
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSequence("table is empty".into()));
        }
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidSequence(format!(
                "values[{j}] = {v} is not a positive finite number"
            )));
        }
        let log_table: Vec<f64> = values.iter().map(|v| v.log2()).collect();
        let j_max = values.len() - 1;
        Ok(AdmissibleSequence {
            model: SequenceModel::Tabulated { values },
            log_table,
            j_max,
        })
    }

    pub fn model(&self) -> &SequenceModel {
        &self.model
    }

    /// Largest scale with explicitly defined data. Closed forms are defined
    /// everywhere; tables are extended past this index.
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// The term-wise reciprocal `σ⁻¹`.
    pub fn inverse(&self) -> AdmissibleSequence {
        match &self.model {
            SequenceModel::PowerLog { s, b } => {
                AdmissibleSequence::power_log(-s, -b).expect("negated finite parameters stay finite")
            }
            SequenceModel::Tabulated { values } => {
                AdmissibleSequence::tabulated(values.iter().map(|v| 1.0 / v).collect())
                    .expect("reciprocals of positive values are positive")
            }
        }
    }

    /// The sequence `2^{jh} σ_j`.
    pub fn shifted(&self, h: f64) -> AdmissibleSequence {
        match &self.model {
            SequenceModel::PowerLog { s, b } => {
                AdmissibleSequence::power_log(s + h, *b).expect("shifted finite parameters stay finite")
            }
            SequenceModel::Tabulated { values } => AdmissibleSequence::tabulated(
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (j as f64 * h).exp2())
                    .collect(),
            )
            .expect("positive values stay positive"),
        }
    }

    /// Exponent of the logarithmic factor when the model has one. Tables
    /// report `None`.
    pub fn log_power(&self) -> Option<f64> {
        match self.model {
            SequenceModel::PowerLog { b, .. } => Some(b),
            SequenceModel::Tabulated { .. } => None,
        }
    }

    /// Smallest and largest consecutive ratio `σ_{j+1}/σ_j` over `j < n`.
    pub fn consecutive_ratio_bounds(&self, n: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 0..n.max(1) {
            let r = (self.log2_at(j + 1) - self.log2_at(j)).exp2();
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }

    /// `σ̲_j = inf_k σ_{j+k}/σ_k` restricted to `k ∈ [0, window]`.
    pub fn underline(&self, j: usize, window: usize) -> f64 {
        window_extremum(self, j, window).0.exp2()
    }

    /// `σ̄_j = sup_k σ_{j+k}/σ_k` restricted to `k ∈ [0, window]`.
    pub fn overline(&self, j: usize, window: usize) -> f64 {
        window_extremum(self, j, window).1.exp2()
    }
}

impl LogSequence for AdmissibleSequence {
    fn log2_at(&self, j: usize) -> f64 {
        match &self.model {
            SequenceModel::PowerLog { s, b } => {
                let jf = j as f64;
                let log_part = if *b == 0.0 { 0.0 } else { b * (1.0 + jf).log2() };
                jf * s + log_part
            }
            SequenceModel::Tabulated { .. } => {
                let t = &self.log_table;
                if j < t.len() {
                    t[j]
                } else {
                    let last = t.len() - 1;
                    let step = if last == 0 { 0.0 } else { t[last] - t[last - 1] };
                    t[last] + step * (j - last) as f64
                }
            }
        }
    }
}

/// `(min, max)` over `k ∈ [0, window]` of `log₂(σ_{j+k}/σ_k)`.
fn window_extremum<S: LogSequence>(seq: &S, j: usize, window: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=window {
        let v = seq.log2_at(j + k) - seq.log2_at(k);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoydIndices {
    pub lower: f64,
    pub upper: f64,
    /// Scale the estimate was taken at.
    pub scale: usize,
}

/// Finite-scale estimate of the lower and upper Boyd indices.
///
/// With `U(m) = log₂ σ̲_m` and `V(m) = log₂ σ̄_m` (extrema over the window
/// `k ∈ [0, m]`), the estimates are the increments `(U(2J) − U(J)) / J` and
/// `(V(2J) − V(J)) / J`. The increment cancels the constant part of the
/// sub-linear remainder, so `PowerLog(s, b)` converges like `|b| / J` instead
/// of the `|b| log₂(J) / J` of the plain quotient `V(J) / J`. The pair is
/// returned ordered. Uses terms up to index `4J`.
pub fn boyd_indices<S: LogSequence>(seq: &S, scale: usize) -> Result<BoydIndices> {
    if scale < 2 {
        return Err(Error::InvalidArgument(format!(
            "Boyd estimation needs J >= 2, got {scale}"
        )));
    }
    for j in 0..=4 * scale {
        let v = seq.log2_at(j);
        if !v.is_finite() {
            return Err(Error::InvalidSequence(format!(
                "term {j} is not a positive finite number"
            )));
        }
    }
    let (u1, v1) = window_extremum(seq, scale, scale);
    let (u2, v2) = window_extremum(seq, 2 * scale, 2 * scale);
    let jf = scale as f64;
    let a = (u2 - u1) / jf;
    let b = (v2 - v1) / jf;
    Ok(BoydIndices {
        lower: a.min(b),
        upper: a.max(b),
        scale,
    })
}

/// Convergence envelope `4|b| log₂(1+J)/J` of the Boyd estimate for a model
/// with log-power `b`; tables are treated as `|b| = 1`.
pub fn boyd_envelope(log_power: Option<f64>, scale: usize) -> f64 {
    let b = log_power.map(f64::abs).unwrap_or(1.0);
    let jf = scale as f64;
    4.0 * b * (1.0 + jf).log2() / jf
}

/// Output of the tail/head sum constructions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub xi: Vec<f64>,
    /// `‖ξ‖_{ℓ^q}` over the computed range.
    pub norm: f64,
}

fn check_eps(eps: &[f64], j_max: usize) -> Result<()> {
    if eps.len() <= j_max {
        return Err(Error::InvalidArgument(format!(
            "eps has {} terms, need at least {}",
            eps.len(),
            j_max + 1
        )));
    }
    if let Some((j, e)) = eps[..=j_max]
        .iter()
        .enumerate()
        .find(|(_, e)| !(e.is_finite() && **e >= 0.0))
    {
        return Err(Error::InvalidArgument(format!(
            "eps[{j}] = {e} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// `ξ_J = σ_J⁻¹ 2^{−Jm} Σ_{j=J}^{J_max} ε_j 2^{jm} σ_j`, so that the tail sum
/// is dominated by `ξ_J 2^{Jm} σ_J`. Requires `s̲(σ⁻¹) > m`.
pub fn tail_sum_witness(eps: &[f64], seq: &AdmissibleSequence, m: u32, q: Index, j_max: usize) -> Result<Witness> {
    check_eps(eps, j_max)?;
    let inv = boyd_indices(&seq.inverse(), DEFAULT_BOYD_SCALE)?;
    if inv.lower <= m as f64 {
        return Err(Error::IndexConditionViolated(format!(
            "tail sums need s_(σ⁻¹) > m; estimated {:.6} <= {m}",
            inv.lower
        )));
    }
    let mut xi = vec![0.0; j_max + 1];
    xi[j_max] = eps[j_max];
    for jj in (0..j_max).rev() {
        let growth = (m as f64 + seq.log2_at(jj + 1) - seq.log2_at(jj)).exp2();
        xi[jj] = eps[jj] + growth * xi[jj + 1];
    }
    let norm = q.norm(xi.iter().copied());
    Ok(Witness { xi, norm })
}

/// `ξ_J = σ_J⁻¹ 2^{−Jm} Σ_{j=0}^{J} ε_j 2^{jm} σ_j`. Requires `s̲(σ⁻¹) < m`.
pub fn head_sum_witness(eps: &[f64], seq: &AdmissibleSequence, m: u32, q: Index, j_max: usize) -> Result<Witness> {
    check_eps(eps, j_max)?;
    let inv = boyd_indices(&seq.inverse(), DEFAULT_BOYD_SCALE)?;
    if inv.lower >= m as f64 {
        return Err(Error::IndexConditionViolated(format!(
            "head sums need s_(σ⁻¹) < m; estimated {:.6} >= {m}",
            inv.lower
        )));
    }
    let mut xi = vec![0.0; j_max + 1];
    xi[0] = eps[0];
    for jj in 1..=j_max {
        let decay = (seq.log2_at(jj - 1) - seq.log2_at(jj) - m as f64).exp2();
        xi[jj] = eps[jj] + decay * xi[jj - 1];
    }
    let norm = q.norm(xi.iter().copied());
    Ok(Witness { xi, norm })
}

/// A family `h ↦ γ^{(h)}` with `γ^{(h)}_j = 2^{jh} m_j` for a shared
/// modulation `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleFamily {
    pub modulation: AdmissibleSequence,
    pub p: Index,
    pub q: Index,
}

impl AdmissibleFamily {
    pub fn new(modulation: AdmissibleSequence, p: Index, q: Index) -> Self {
        AdmissibleFamily { modulation, p, q }
    }

    /// The canonical family `γ^{(h)}_j = 2^{jh}`.
    pub fn canonical(p: Index, q: Index) -> Self {
        let flat = AdmissibleSequence::power(0.0).expect("zero exponent is valid");
        AdmissibleFamily::new(flat, p, q)
    }

    pub fn member(&self, h: f64) -> AdmissibleSequence {
        self.modulation.shifted(h)
    }

    /// Left end of the family's domain, `-d/p`.
    pub fn domain_floor(&self, d: usize) -> f64 {
        -(d as f64) * self.p.recip()
    }

    /// Surrogate for the `(p,q)`-decreasing property on a grid of exponents:
    /// each member satisfies `s̲(γ^{(h)}) > −d/p` and `γ̲_1 > 2^{−d/p}`, and for
    /// consecutive `h < h'` the deficit `log₂(γ^{(h')}_j / γ^{(h)}_j) − j(h'−h)`
    /// does not drift downward over `j ≤ scale`.
    pub fn check_decreasing(&self, h_grid: &[f64], d: usize, scale: usize) -> Result<()> {
        let floor = self.domain_floor(d);
        for &h in h_grid {
            if h <= floor {
                return Err(Error::OutOfDomain(format!("h = {h} <= -d/p = {floor}")));
            }
            let g = self.member(h);
            let bi = boyd_indices(&g, scale)?;
            if bi.lower <= floor {
                return Err(Error::CompatibilityViolated(format!(
                    "s_(γ^({h})) = {:.4} <= -d/p",
                    bi.lower
                )));
            }
            if g.underline(1, scale).log2() <= floor {
                return Err(Error::CompatibilityViolated(format!("underline γ^({h})_1 <= 2^(-d/p)")));
            }
        }
        let tol = boyd_envelope(self.modulation.log_power(), scale) + 1e-9;
        for w in h_grid.windows(2) {
            let (h, h2) = (w[0], w[1]);
            if h2 <= h {
                return Err(Error::InvalidArgument("h grid must be increasing".into()));
            }
            let a = self.member(h);
            let b = self.member(h2);
            let deficit: Vec<f64> = (0..=scale)
                .map(|j| b.log2_at(j) - a.log2_at(j) - j as f64 * (h2 - h))
                .collect();
            let xs: Vec<f64> = (0..=scale).map(|j| j as f64).collect();
            if let Some(fit) = crate::regression::ols(&xs, &deficit) {
                if fit.slope < -tol {
                    return Err(Error::CompatibilityViolated(format!(
                        "γ^({h2})/γ^({h}) falls below 2^(j(h'-h)) at rate {:.4}",
                        fit.slope
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The ratio function `ζ(h) = s̄(γ^{(h)}/σ)` for a compatible pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioFunction {
    pub sigma: AdmissibleSequence,
    pub family: AdmissibleFamily,
    pub d: usize,
    pub r: Index,
    pub boyd_scale: usize,
    pub bracket_hi: f64,
}

impl RatioFunction {
    pub fn new(sigma: AdmissibleSequence, family: AdmissibleFamily, d: usize, r: Index) -> Result<Self> {
        Self::with_settings(sigma, family, d, r, DEFAULT_BOYD_SCALE, DEFAULT_BRACKET_HI)
    }

    /// Builds the ratio function and checks compatibility: `s̲(σ) > 0`,
    /// `s̲(σ) − d/r > −d/p`, agreement of the two Boyd estimates of the ratio,
    /// monotonicity on a 16-point grid and `ζ < −d/r` somewhere.
    pub fn with_settings(
        sigma: AdmissibleSequence,
        family: AdmissibleFamily,
        d: usize,
        r: Index,
        boyd_scale: usize,
        bracket_hi: f64,
    ) -> Result<Self> {
        let rf = RatioFunction {
            sigma,
            family,
            d,
            r,
            boyd_scale,
            bracket_hi,
        };
        let df = d as f64;
        let sb = boyd_indices(&rf.sigma, boyd_scale)?;
        if sb.lower <= 0.0 {
            return Err(Error::CompatibilityViolated(format!(
                "need s_(σ) > 0, estimated {:.6}",
                sb.lower
            )));
        }
        if sb.lower - df * r.recip() <= rf.domain_floor() {
            return Err(Error::CompatibilityViolated(format!(
                "need s_(σ) - d/r > -d/p, estimated {:.6} - {:.6}",
                sb.lower,
                df * r.recip()
            )));
        }
        let (lo, hi) = rf.bracket();
        if hi <= lo {
            return Err(Error::CompatibilityViolated(format!(
                "empty bisection bracket [{lo}, {hi}]"
            )));
        }
        let mut prev = f64::NEG_INFINITY;
        for t in 0..16 {
            let h = lo + (hi - lo) * t as f64 / 15.0;
            let (l, u) = rf.ratio_indices(h)?;
            if (u - l).abs() > rf.agreement_tolerance() {
                return Err(Error::CompatibilityViolated(format!(
                    "lower and upper indices of γ^({h})/σ disagree: {l:.6} vs {u:.6}"
                )));
            }
            if u < prev - 1e-9 {
                return Err(Error::CompatibilityViolated(format!("ζ decreases near h = {h}")));
            }
            prev = u;
        }
        if rf.zeta_unchecked(lo)? >= rf.target_min() {
            return Err(Error::CompatibilityViolated("ζ(h) >= -d/r on the whole bracket".into()));
        }
        Ok(rf)
    }

    pub fn domain_floor(&self) -> f64 {
        self.family.domain_floor(self.d)
    }

    /// Bisection bracket `[−d/p + 1e-6, bracket_hi]`.
    pub fn bracket(&self) -> (f64, f64) {
        (self.domain_floor() + BRACKET_LO_OFFSET, self.bracket_hi)
    }

    fn target_min(&self) -> f64 {
        -(self.d as f64) * self.r.recip()
    }

    fn agreement_tolerance(&self) -> f64 {
        let b = match (self.family.modulation.log_power(), self.sigma.log_power()) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        2.0 * boyd_envelope(b, self.boyd_scale) + 1e-9
    }

    fn ratio_indices(&self, h: f64) -> Result<(f64, f64)> {
        let g = self.family.member(h);
        let bi = boyd_indices(&Quotient(&g, &self.sigma), self.boyd_scale)?;
        Ok((bi.lower, bi.upper))
    }

    fn zeta_unchecked(&self, h: f64) -> Result<f64> {
        Ok(self.ratio_indices(h)?.1)
    }

    /// `ζ(h)`, defined for `h > −d/p`.
    pub fn zeta(&self, h: f64) -> Result<f64> {
        if h <= self.domain_floor() {
            return Err(Error::OutOfDomain(format!(
                "ζ is defined for h > -d/p = {}, got {h}",
                self.domain_floor()
            )));
        }
        self.zeta_unchecked(h)
    }

    /// Solves `ζ(h) = target` by bisection on the bracket. When `ζ` stays
    /// below the target on the whole bracket the upper end is returned.
    pub fn zeta_inverse(&self, target: f64) -> Result<f64> {
        let (mut lo, mut hi) = self.bracket();
        if self.zeta_unchecked(lo)? >= target {
            return Err(Error::CompatibilityViolated(format!(
                "ζ >= {target} on the whole bracket"
            )));
        }
        if self.zeta_unchecked(hi)? < target {
            return Ok(hi);
        }
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.zeta_unchecked(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `h_min(r) = sup{h : ζ(h) < −d/r}`.
    pub fn h_min(&self) -> Result<f64> {
        self.zeta_inverse(self.target_min())
    }

    /// `h_*(α) = ζ⁻¹(d/(αr) − d/r)`; `α = ∞` gives `h_min`.
    pub fn h_star(&self, alpha: f64) -> Result<f64> {
        if alpha.is_nan() || alpha < 1.0 {
            return Err(Error::OutOfDomain(format!("α must be >= 1, got {alpha}")));
        }
        let df = self.d as f64;
        let target = df / alpha * self.r.recip() - df * self.r.recip();
        self.zeta_inverse(target)
    }
}
