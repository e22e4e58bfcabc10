//! Synthetic test functions: saturating series `g^{(n)}`, single-chain cone
//! functions `θ^{(n)}`, windowed cusps and random Besov probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::admissible::{boyd_indices, AdmissibleSequence, LogSequence, RatioFunction, DEFAULT_BOYD_SCALE};
use crate::dyadic::{check_dim, cube_containing, irreducible, periodic_distance};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::wavelet::{CoefficientPyramid, Signal, DEFAULT_FILTER};

/// Margin added to `1/s` in the random probes' scale decay.
pub const RANDOM_PROBE_EPS: f64 = 0.01;
const M0_SCAN_LIMIT: u32 = 62;

/// Smallest `m₀ ≥ 0` with `d + X 2^{d m₀} α < 0`, where
/// `X = d/(αr) − d/r − ζ(h) + ε₀` must be negative. `α = ∞` gives `m₀ = 0`.
pub fn m0_minimal(alpha: f64, r: Index, zeta_h: f64, eps0: f64, d: usize) -> Result<u32> {
    check_dim(d)?;
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::OutOfDomain(format!("α must be >= 1, got {alpha}")));
    }
    let df = d as f64;
    let x = df / alpha * r.recip() - df * r.recip() - zeta_h + eps0;
    if x.is_nan() || x >= 0.0 {
        return Err(Error::NoValidM0(format!(
            "need ζ(h) − ε₀ > d/(αr) − d/r; ζ(h) = {zeta_h}, ε₀ = {eps0}"
        )));
    }
    if alpha.is_infinite() {
        return Ok(0);
    }
    (0..=M0_SCAN_LIMIT)
        .find(|&m0| df + x * (df * m0 as f64).exp2() * alpha < 0.0)
        .ok_or_else(|| Error::NoValidM0(format!("no m₀ <= {M0_SCAN_LIMIT} satisfies the inequality")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturatingSpec {
    pub sigma: AdmissibleSequence,
    pub d: usize,
    pub r: Index,
    pub s: Index,
    pub m0: u32,
    /// Subcube selector in `[1, 2^{d m₀}]`.
    pub n: u64,
    /// Finest scale of the pyramid; detail scales are `0..J`.
    pub j: u32,
}

impl SaturatingSpec {
    pub fn new(sigma: AdmissibleSequence, d: usize, r: Index, s: Index, m0: u32, n: u64, j: u32) -> Result<Self> {
        check_dim(d)?;
        let slots = 1u64
            .checked_shl(d as u32 * m0)
            .filter(|v| *v > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("m₀ = {m0} is too large")))?;
        if n == 0 || n > slots {
            return Err(Error::InvalidArgument(format!(
                "subcube selector {n} outside [1, {slots}]"
            )));
        }
        if j < m0 + 2 {
            return Err(Error::ResolutionError(format!(
                "J = {j} leaves no parent scale for m₀ = {m0}"
            )));
        }
        Ok(SaturatingSpec {
            sigma,
            d,
            r,
            s,
            m0,
            n,
            j,
        })
    }

    /// `a₀ = 1 + 1/r + 1/s`.
    pub fn a0(&self) -> f64 {
        1.0 + self.r.recip() + self.s.recip()
    }

    /// Parent scales `1..=J−1−m₀`, so the children stay inside the pyramid.
    pub fn parent_scales(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.j - 1 - self.m0
    }

    /// Offset of the `n`-th subcube, lexicographic with axis 0 slowest.
    pub fn subcube_offset(&self) -> Vec<u64> {
        let span = 1u64 << self.m0;
        let mut rest = self.n - 1;
        let mut off = vec![0; self.d];
        for slot in off.iter_mut().rev() {
            *slot = rest % span;
            rest /= span;
        }
        off
    }

    /// `log₂` of `j^{-a₀} 2^{jd/r} 2^{-j(λ)d/r} σ_j^{-1}`.
    pub fn log2_coefficient(&self, j: u32, irreducible_scale: u32) -> f64 {
        let dr = self.d as f64 * self.r.recip();
        -self.a0() * (j as f64).log2() + (j - irreducible_scale) as f64 * dr - self.sigma.log2_at(j as usize)
    }
}

/// `g^{(n)}`: each `λ ∈ Λ_j`, `j ≥ 1`, puts the coefficient
/// `j^{-a₀} 2^{jd/r} 2^{-j(λ)d/r} σ_j^{-1}` on its `n`-th subcube at scale
/// `j + m₀`, orientation 1.
pub fn gen_saturating(spec: &SaturatingSpec) -> Result<CoefficientPyramid> {
    let mut pyr = CoefficientPyramid::zeros(spec.d, spec.j, DEFAULT_FILTER)?;
    let offset = spec.subcube_offset();
    let d = spec.d;
    for j in spec.parent_scales() {
        let side = 1u64 << j;
        for flat in 0..side.pow(d as u32) {
            let mut rest = flat;
            let mut k = vec![0u64; d];
            for slot in k.iter_mut().rev() {
                *slot = rest % side;
                rest /= side;
            }
            let (l, _) = irreducible(j, &k);
            let c = spec.log2_coefficient(j, l).exp2();
            let child: Vec<u64> = k.iter().zip(&offset).map(|(kc, o)| (kc << spec.m0) + o).collect();
            pyr.set(1, j + spec.m0, &child, c);
        }
    }
    Ok(pyr)
}

/// Single-chain cone function `θ^{(n)}` and its per-scale coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeFunction {
    pub pyramid: CoefficientPyramid,
    /// `θ^{(n)}_j` for `j ∈ 0..J`.
    pub theta: Vec<f64>,
    /// `ζ^{-1}(−d/r) + 1/n`.
    pub exponent: f64,
}

impl ConeFunction {
    /// `sup_{j ≤ j' ≤ j_trunc} θ_{j'}`, the `p = ∞` local leader at `x₀`.
    pub fn closed_form_leader(&self, j: u32, j_trunc: u32) -> f64 {
        self.theta[j as usize..=j_trunc as usize]
            .iter()
            .fold(0.0, |m, v| m.max(*v))
    }
}

/// `θ^{(n)}_j = 1 / (γ_j^{(h_n)} (1+j)^{1+1/s})` on `λ_j(x₀)`, orientation 1,
/// with `h_n = ζ^{-1}(−d/r) + 1/n`; every other coefficient is 0.
pub fn gen_cone(x0: &[f64], n: u32, rf: &RatioFunction, s: Index, j: u32) -> Result<ConeFunction> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if x0.len() != rf.d {
        return Err(Error::InvalidShape(format!(
            "point has {} coordinates, expected {}",
            x0.len(),
            rf.d
        )));
    }
    let exponent = rf.h_min()? + 1.0 / n as f64;
    let gamma = rf.family.member(exponent);
    let mut pyr = CoefficientPyramid::zeros(rf.d, j, DEFAULT_FILTER)?;
    let theta: Vec<f64> = (0..j)
        .map(|jj| (-gamma.log2_at(jj as usize) - (1.0 + s.recip()) * (1.0 + jj as f64).log2()).exp2())
        .collect();
    for (jj, t) in theta.iter().enumerate() {
        let cube = cube_containing(x0, jj as u32);
        pyr.set(1, jj as u32, &cube.k, *t);
    }
    Ok(ConeFunction {
        pyramid: pyr,
        theta,
        exponent,
    })
}

fn smooth_step(t: f64) -> f64 {
    let bump = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        bump(t) / (bump(t) + bump(1.0 - t))
    }
}

/// Samples of `w |x − x₀|^u + (1 − w) 4^{-u}` on a `2^J` grid per axis, where
/// `w` is a `C^∞` window equal to 1 for periodic distance `≤ 1/4` and 0 from
/// `1/2` on. `u = 0` gives the constant 1.
pub fn gen_cusp(x0: &[f64], u: f64, j: u32) -> Result<Signal> {
    let d = x0.len();
    check_dim(d)?;
    let far = 0.25f64.powf(u);
    Signal::from_fn(d, j, |x| {
        let dist = x
            .iter()
            .zip(x0)
            .map(|(a, b)| periodic_distance(*a, *b).powi(2))
            .sum::<f64>()
            .sqrt();
        let w = 1.0 - smooth_step((dist - 0.25) * 4.0);
        w * dist.powf(u) + (1.0 - w) * far
    })
}

/// Random element of `B^σ_{r,s}`:
/// `c_λ = σ_j^{-1} 2^{jd/r} count_j^{-1/r} (1+j)^{-(1/s + ε)} ξ_λ` with
/// `count_j = (2^d − 1) 2^{jd}` and `ξ_λ` a uniform sign times a uniform
/// magnitude in `[1/2, 1]`. Deterministic in `seed`.
pub fn gen_random_besov(
    sigma: &AdmissibleSequence,
    d: usize,
    r: Index,
    s: Index,
    j: u32,
    seed: u64,
) -> Result<CoefficientPyramid> {
    let bi = boyd_indices(sigma, DEFAULT_BOYD_SCALE)?;
    if bi.lower <= 0.0 {
        return Err(Error::IndexConditionViolated(format!(
            "random probes need s_(σ) > 0, estimated {:.6}",
            bi.lower
        )));
    }
    let mut pyr = CoefficientPyramid::zeros(d, j, DEFAULT_FILTER)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = pyr.orientations() as f64;
    for (jj, level) in pyr.detail.iter_mut().enumerate() {
        let count = per * ((jj * d) as f64).exp2();
        let log_scale = -sigma.log2_at(jj) + (jj * d) as f64 * r.recip()
            - count.log2() * r.recip()
            - (s.recip() + RANDOM_PROBE_EPS) * (1.0 + jj as f64).log2();
        let scale = log_scale.exp2();
        for c in level.iter_mut() {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let mag: f64 = rng.random_range(0.5..=1.0);
            *c = scale * sign * mag;
        }
    }
    Ok(pyr)
}
