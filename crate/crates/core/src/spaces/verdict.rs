//! Finite-scale surrogate for "the sequence `(a_j)_j` lies in `ℓ^q`".
//!
//! `log₂ a_j` is regressed on `j` over the usable scales. For `q = ∞` the
//! sequence is accepted when the slope stays below `tol_slope`; for `q < ∞`
//! the regressed quantity is `log₂(a_j (1+j)^{1/q})` and the threshold is 0,
//! so a sequence only just failing to be `q`-summable (`a_j ~ j^{-1/q}`)
//! sits on the threshold. A decision is issued only when the band
//! `slope ± z·stderr` lies on one side of the threshold.

use serde::{Serialize, Serializer};

use crate::index::Index;
use crate::regression::ols;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurrogateConfig {
    /// Slope tolerance for `q = ∞`.
    pub tol_slope: f64,
    /// Width of the confidence band in standard errors.
    pub z: f64,
    /// Nonzero entries needed for a decision.
    pub min_points: usize,
    /// Coarsest scales left out of every regression.
    pub coarse_skip: u32,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            tol_slope: 0.05,
            z: 2.0,
            min_points: 4,
            coarse_skip: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    Direct,
    Leader,
    Cone,
    LogCorrected,
    Xu,
}

/// Per-scale non-negative values `a_j` for `j = first_scale, first_scale+1, …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularitySequence {
    pub first_scale: u32,
    pub values: Vec<f64>,
    pub q: Index,
    pub interpretation: Interpretation,
}

impl RegularitySequence {
    pub fn new(first_scale: u32, values: Vec<f64>, q: Index, interpretation: Interpretation) -> Self {
        debug_assert!(values.iter().all(|v| *v >= 0.0 && v.is_finite()), "{values:?}");
        RegularitySequence {
            first_scale,
            values,
            q,
            interpretation,
        }
    }

    pub fn scales(&self) -> impl Iterator<Item = u32> + '_ {
        (self.first_scale..).take(self.values.len())
    }

    pub fn last_scale(&self) -> Option<u32> {
        self.scales().last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Member,
    NonMember,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Scales that entered the regression.
    pub scales: Vec<u32>,
    /// Regressed values (after the `q` adjustment).
    pub log_values: Vec<f64>,
    pub residuals: Vec<f64>,
    #[serde(serialize_with = "serialize_real")]
    pub slope: f64,
    pub slope_stderr: f64,
    pub threshold: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipVerdict {
    /// `slope − threshold`; `−∞` for an identically zero sequence and NaN
    /// when too few scales were available.
    #[serde(serialize_with = "serialize_real")]
    pub score: f64,
    pub decision: Decision,
    pub diagnostics: Diagnostics,
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        self.decision == Decision::Member
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.diagnostics.notes.push(note.into());
        self
    }
}

/// Finite values as numbers, infinities as `"inf"`/`"-inf"`, NaN as `null`.
pub fn serialize_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_none()
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Raw per-scale quantities at or below this fraction of the input's
/// magnitude are round-off and count as zero.
pub const NUMERICAL_ZERO: f64 = 1e-12;

pub fn flush_to_zero(v: f64, reference: f64) -> f64 {
    if v <= NUMERICAL_ZERO * reference {
        0.0
    } else {
        v
    }
}

pub fn lq_verdict(seq: &RegularitySequence, cfg: &SurrogateConfig) -> MembershipVerdict {
    let threshold = if seq.q.is_infinite() { cfg.tol_slope } else { 0.0 };
    let mut notes = Vec::new();
    let usable: Vec<(u32, f64)> = seq
        .scales()
        .zip(seq.values.iter().copied())
        .filter(|(j, _)| *j >= cfg.coarse_skip)
        .collect();
    let nonzero: Vec<(u32, f64)> = usable.iter().copied().filter(|(_, v)| *v > 0.0).collect();
    let empty = |score: f64, decision: Decision, notes: Vec<String>| MembershipVerdict {
        score,
        decision,
        diagnostics: Diagnostics {
            scales: nonzero.iter().map(|(j, _)| *j).collect(),
            log_values: Vec::new(),
            residuals: Vec::new(),
            slope: f64::NAN,
            slope_stderr: f64::NAN,
            threshold,
            notes,
        },
    };
    if !usable.is_empty() && nonzero.is_empty() {
        notes.push("sequence vanishes on every usable scale".into());
        return empty(f64::NEG_INFINITY, Decision::Member, notes);
    }
    let tail = cfg.min_points.max(2);
    if usable.len() >= tail && usable[usable.len() - tail..].iter().all(|(_, v)| *v == 0.0) {
        notes.push(format!("sequence vanishes on the {tail} finest usable scales"));
        return empty(f64::NEG_INFINITY, Decision::Member, notes);
    }
    if nonzero.len() < cfg.min_points.max(2) {
        notes.push(format!(
            "{} nonzero scales, at least {} needed",
            nonzero.len(),
            cfg.min_points.max(2)
        ));
        return empty(f64::NAN, Decision::Inconclusive, notes);
    }
    if nonzero.len() < usable.len() {
        notes.push(format!("{} zero entries dropped", usable.len() - nonzero.len()));
    }
    let xs: Vec<f64> = nonzero.iter().map(|(j, _)| *j as f64).collect();
    let ys: Vec<f64> = nonzero
        .iter()
        .map(|(j, v)| {
            let adjust = if seq.q.is_infinite() {
                0.0
            } else {
                (1.0 + *j as f64).log2() / seq.q.value()
            };
            v.log2() + adjust
        })
        .collect();
    let fit = ols(&xs, &ys).expect("at least two distinct scales");
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - fit.predict(*x)).collect();
    let band = cfg.z * fit.slope_stderr;
    let decision = if fit.slope + band <= threshold {
        Decision::Member
    } else if fit.slope - band > threshold {
        Decision::NonMember
    } else {
        Decision::Inconclusive
    };
    MembershipVerdict {
        score: fit.slope - threshold,
        decision,
        diagnostics: Diagnostics {
            scales: nonzero.iter().map(|(j, _)| *j).collect(),
            log_values: ys,
            residuals,
            slope: fit.slope,
            slope_stderr: fit.slope_stderr,
            threshold,
            notes,
        },
    }
}
