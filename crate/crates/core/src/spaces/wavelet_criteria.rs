//! Coefficient-side pointwise criteria: the leader test and the Xu-space check.

use super::verdict::{
    flush_to_zero, lq_verdict, Interpretation, MembershipVerdict, RegularitySequence, SurrogateConfig,
};
use crate::admissible::{AdmissibleSequence, LogSequence};
use crate::dyadic::{cone_positions, ConeSpec};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::leaders::{local_leaders, LeaderPyramid};
use crate::wavelet::CoefficientPyramid;

/// Reported leader scales required by the leader-based tests.
pub const MIN_LEADER_SCALES: u32 = 6;

pub fn check_leader_scales(lp: &LeaderPyramid) -> Result<()> {
    if lp.j_max() + 1 < MIN_LEADER_SCALES {
        return Err(Error::ResolutionError(format!(
            "leader pyramid reports {} scales, at least {MIN_LEADER_SCALES} needed",
            lp.j_max() + 1
        )));
    }
    Ok(())
}

/// `(σ_j d^p_j(x₀))_j` over every reported scale.
pub fn leader_sequence(
    lp: &LeaderPyramid,
    x0: &[f64],
    sigma: &AdmissibleSequence,
    q: Index,
) -> Result<RegularitySequence> {
    let magnitude = lp.magnitude();
    let values = local_leaders(lp, x0)?
        .into_iter()
        .enumerate()
        .map(|(j, v)| flush_to_zero(v, magnitude) * sigma.value_at(j))
        .collect();
    Ok(RegularitySequence::new(0, values, q, Interpretation::Leader))
}

/// Necessary-side test: members of `T^σ_{p,q}(x₀)` have
/// `(σ_j d^p_j(x₀))_j ∈ ℓ^q`.
pub fn leader_criterion(
    lp: &LeaderPyramid,
    x0: &[f64],
    sigma: &AdmissibleSequence,
    q: Index,
    cfg: &SurrogateConfig,
) -> Result<MembershipVerdict> {
    check_leader_scales(lp)?;
    Ok(lq_verdict(&leader_sequence(lp, x0, sigma, q)?, cfg))
}

/// `(Σ_{‖k − 2^j x₀‖_∞ < C* 2^j} Σ_i (2^{(η−d/p)j} |c_{j,k}^{(i)}|)^p)^{1/p}` per scale.
pub fn xu_sequence(
    pyr: &CoefficientPyramid,
    x0: &[f64],
    eta: f64,
    p: Index,
    c_star: f64,
    q: Index,
) -> Result<RegularitySequence> {
    if eta.is_nan() || c_star.is_nan() || eta <= 0.0 || c_star <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "η and C* must be positive, got {eta} and {c_star}"
        )));
    }
    if x0.len() != pyr.d {
        return Err(Error::InvalidShape(format!(
            "point has {} coordinates, expected {}",
            x0.len(),
            pyr.d
        )));
    }
    let d = pyr.d as f64;
    let values = (0..pyr.j)
        .map(|j| {
            let side = (j as f64).exp2();
            let spec = ConeSpec::new(x0.to_vec(), c_star * side)?;
            let w = ((eta - d * p.recip()) * j as f64).exp2();
            let coeffs = cone_positions(&spec, j).into_iter().flat_map(|k| {
                let flat = k.iter().fold(0u64, |acc, &c| (acc << j) + c);
                pyr.node(j, flat as usize).to_vec()
            });
            Ok(w * p.norm(coeffs))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RegularitySequence::new(0, values, q, Interpretation::Xu))
}

pub fn xu_check(
    pyr: &CoefficientPyramid,
    x0: &[f64],
    eta: f64,
    p: Index,
    q: Index,
    c_star: f64,
    cfg: &SurrogateConfig,
) -> Result<MembershipVerdict> {
    Ok(lq_verdict(&xu_sequence(pyr, x0, eta, p, c_star, q)?, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leaders::leader_pyramid;
    use crate::spaces::verdict::Decision;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_pyramid_is_member() {
        let pyr = CoefficientPyramid::zeros(1, 10, "db4").unwrap();
        let lp = leader_pyramid(&pyr, Index::TWO, 2).unwrap();
        let cfg = SurrogateConfig::default();
        for s in [0.1, 3.0] {
            let sigma = AdmissibleSequence::power(s).unwrap();
            assert!(leader_criterion(&lp, &[0.2], &sigma, Index::ONE, &cfg)
                .unwrap()
                .is_member());
        }
        assert!(xu_check(&pyr, &[0.2], 0.5, Index::TWO, Index::TWO, 0.1, &cfg)
            .unwrap()
            .is_member());
    }

    #[test]
    fn too_few_scales() {
        let pyr = CoefficientPyramid::zeros(1, 6, "db4").unwrap();
        let lp = leader_pyramid(&pyr, Index::TWO, 2).unwrap();
        let sigma = AdmissibleSequence::power(0.5).unwrap();
        let err = leader_criterion(&lp, &[0.2], &sigma, Index::ONE, &SurrogateConfig::default()).unwrap_err();
        assert!(matches!(err, Error::ResolutionError(_)));
    }

    #[test]
    fn xu_constant_sequence() {
        let eta = 0.7;
        let mut pyr = CoefficientPyramid::zeros(1, 12, "db4").unwrap();
        for j in 0..12u32 {
            for k in 0..1u64 << j {
                pyr.set(1, j, &[k], (-eta * j as f64).exp2());
            }
        }
        let cfg = SurrogateConfig::default();
        let seq = xu_sequence(&pyr, &[0.4], eta, Index::INFINITY, 0.2, Index::INFINITY).unwrap();
        assert!(seq.values[2..].iter().all(|v| (v - 1.0).abs() < 1e-12));
        let inf = xu_check(&pyr, &[0.4], eta, Index::INFINITY, Index::INFINITY, 0.2, &cfg).unwrap();
        assert_eq!(inf.decision, Decision::Member);
        let two = xu_check(&pyr, &[0.4], eta, Index::INFINITY, Index::TWO, 0.2, &cfg).unwrap();
        assert_eq!(two.decision, Decision::NonMember, "{two:?}");
    }

    #[test]
    fn xu_matches_bruteforce_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pyr = CoefficientPyramid::zeros(2, 6, "db4").unwrap();
        pyr.detail
            .iter_mut()
            .flatten()
            .for_each(|c| *c = rng.random_range(-1.0..1.0));
        let (x0, eta, c_star, p) = ([0.3, 0.85], 0.4, 0.15, 2.0);
        let seq = xu_sequence(&pyr, &x0, eta, Index::TWO, c_star, Index::TWO).unwrap();
        for j in 0..6u32 {
            let n = 1u64 << j;
            let mut acc = 0.0;
            for k0 in 0..n {
                for k1 in 0..n {
                    let dist = [k0, k1].iter().zip(&x0).fold(0.0f64, |m, (&k, &x)| {
                        let t = (k as f64 - n as f64 * x).rem_euclid(n as f64);
                        m.max(t.min(n as f64 - t))
                    });
                    if dist < c_star * n as f64 {
                        for i in 1..=3u8 {
                            let c = pyr.get(i, j, &[k0, k1]);
                            acc += (((eta - 2.0 / p) * j as f64).exp2() * c.abs()).powf(p);
                        }
                    }
                }
            }
            let expected = acc.powf(1.0 / p);
            assert!(
                (seq.values[j as usize] - expected).abs() <= 1e-12 * expected.max(1e-300),
                "j={j}"
            );
        }
    }
}
