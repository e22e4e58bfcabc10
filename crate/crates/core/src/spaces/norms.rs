//! Generalized Besov and oscillation norms from wavelet coefficients.

use crate::admissible::{AdmissibleSequence, LogSequence};
use crate::error::Result;
use crate::index::Index;
use crate::leaders::{leader_pyramid, LeaderPyramid};
use crate::wavelet::CoefficientPyramid;

/// `(Σ_{λ ∈ Λ_j} (σ_j 2^{-jd/r} |c_λ|)^r)^{1/r}` for every detail scale, all
/// orientations included.
pub fn besov_scale_terms(pyr: &CoefficientPyramid, sigma: &AdmissibleSequence, r: Index) -> Vec<f64> {
    let d = pyr.d as f64;
    pyr.detail
        .iter()
        .enumerate()
        .map(|(j, level)| {
            let w = (sigma.log2_at(j) - j as f64 * d * r.recip()).exp2();
            w * r.norm(level.iter().copied())
        })
        .collect()
}

/// `|C_0| + ‖(besov_scale_terms)_j‖_{ℓ^q}`.
pub fn besov_norm(pyr: &CoefficientPyramid, sigma: &AdmissibleSequence, r: Index, q: Index) -> f64 {
    pyr.coarse.abs() + q.norm(besov_scale_terms(pyr, sigma, r))
}

/// `(Σ_{λ ∈ Λ_j} (σ_j 2^{-jd/r} d^p_λ)^r)^{1/r}` for every reported scale.
pub fn oscillation_scale_terms(lp: &LeaderPyramid, sigma: &AdmissibleSequence, r: Index) -> Vec<f64> {
    let d = lp.d as f64;
    lp.values
        .iter()
        .enumerate()
        .map(|(j, level)| {
            let w = (sigma.log2_at(j) - j as f64 * d * r.recip()).exp2();
            w * r.norm(level.iter().copied())
        })
        .collect()
}

/// `|C_0| + ‖(oscillation_scale_terms)_j‖_{ℓ^q}` over the scales left after
/// the guard band.
pub fn oscillation_norm(
    pyr: &CoefficientPyramid,
    sigma: &AdmissibleSequence,
    p: Index,
    r: Index,
    q: Index,
    guard: u32,
) -> Result<f64> {
    let lp = leader_pyramid(pyr, p, guard)?;
    Ok(pyr.coarse.abs() + q.norm(oscillation_scale_terms(&lp, sigma, r)))
}
