//! Acceptance gate: one line per criterion, non-zero exit on any failure.

use std::time::Instant;

use leaderscope::admissible::{boyd_indices, head_sum_witness, tail_sum_witness, LogSequence};
use leaderscope::leaders::{local_leader, p_leader_bruteforce};
use leaderscope::spaces::{
    besov_norm, besov_scale_terms, direct_membership, leader_criterion, log_corrected_criterion, oscillation_norm,
};
use leaderscope::spectrum::{
    empirical_spectrum, pointwise_exponent, predicted_spectrum, spectrum_interval, ExponentConfig,
};
use leaderscope::synth::{gen_cone, gen_cusp, gen_random_besov, gen_saturating};
use leaderscope::{
    decompose, leader_pyramid, reconstruct, AdmissibleFamily, AdmissibleSequence, CoefficientPyramid, Decision,
    DyadicCube, Index, RatioFunction, SaturatingSpec, Signal, SurrogateConfig, WaveletFilter,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn inf() -> Index {
    Index::INFINITY
}

fn canonical() -> AdmissibleFamily {
    AdmissibleFamily::canonical(inf(), inf())
}

fn leader_oracle() -> Outcome {
    let ps = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for t in 0..100 {
        let d = 1 + t % 2;
        let big_j = if d == 1 {
            3 + (t / 2) as u32 % 6
        } else {
            2 + (t / 2) as u32 % 7
        };
        let p = Index::new(ps[t % 5]).unwrap();
        let mut pyr = CoefficientPyramid::zeros(d, big_j, "db4").unwrap();
        pyr.detail.iter_mut().flatten().for_each(|c| {
            *c = if rng.random_range(0.0..1.0) < 0.2 {
                0.0
            } else {
                rng.random_range(-1.0..1.0)
            }
        });
        let guard = (t as u32 / 10) % 2;
        let lp = leader_pyramid(&pyr, p, guard).map_err(|e| e.to_string())?;
        for j in 0..=lp.j_max() {
            let side = 1u64 << j;
            for flat in 0..side.pow(d as u32) {
                let k = if d == 1 {
                    vec![flat]
                } else {
                    vec![flat / side, flat % side]
                };
                let cube = DyadicCube::new(0, j, k.clone()).unwrap();
                let brute = p_leader_bruteforce(&pyr, &cube, p, lp.j_trunc);
                let fast = lp.get(j, &k);
                let rel = (fast - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
                if brute != fast {
                    worst = worst.max(rel);
                }
            }
        }
    }
    check(worst <= 1e-12, format!("100 pyramids, worst relative gap {worst:.2e}"))
}

fn cusp_recovery() -> Outcome {
    let filter = WaveletFilter::by_name("db4").unwrap();
    let x0 = [0.3];
    let mut parts = Vec::new();
    let mut ok = true;
    for u in [0.3, 0.5, 0.7] {
        let sig = gen_cusp(&x0, u, 15).unwrap();
        let pyr = decompose(&sig, &filter).unwrap();
        let lp = leader_pyramid(&pyr, inf(), 2).unwrap();
        let est = pointwise_exponent(&lp, &x0, &canonical(), &ExponentConfig::default()).unwrap();
        let h = est.exponent.bound();
        ok &= (h - u).abs() <= 0.1;
        parts.push(format!("u={u}: {h:.3}"));
    }
    check(ok, parts.join(", "))
}

fn boyd_estimation() -> Outcome {
    let bi = boyd_indices(&AdmissibleSequence::power_log(0.4, 2.0).unwrap(), 64).unwrap();
    let mut ok = (bi.lower - 0.4).abs() <= 0.05 && (bi.upper - 0.4).abs() <= 0.05;
    let mut worst = 0.0f64;
    for s in [-1.5, -0.3, 0.0, 0.25, 0.4, 1.0, 2.7] {
        let e = boyd_indices(&AdmissibleSequence::power(s).unwrap(), 64).unwrap();
        worst = worst.max((e.lower - s).abs()).max((e.upper - s).abs());
    }
    ok &= worst <= 1e-9;
    check(
        ok,
        format!(
            "PowerLog(0.4,2): [{:.4}, {:.4}]; pure powers off by {worst:.1e}",
            bi.lower, bi.upper
        ),
    )
}

fn random_eps(rng: &mut ChaCha8Rng, q: Index, n: usize) -> Vec<f64> {
    // Entries of a random ℓ^q element: uniform weights times a decay summable in ℓ^q.
    let decay = if q.is_infinite() { 0.0 } else { 1.1 / q.value() };
    (0..n)
        .map(|j| rng.random_range(0.0..1.0) * (1.0 + j as f64).powf(-decay))
        .collect()
}

fn tail_head_lemmas() -> Outcome {
    let j_max = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut dominated = 0;
    let mut bounded = 0;
    let mut runs = 0;
    for t in 0..100 {
        let q = [Index::ONE, Index::TWO, inf()][t % 3];
        let eps = random_eps(&mut rng, q, j_max + 1);
        let eps_norm = q.norm(eps.iter().copied());
        let m = rng.random_range(0..3u32);
        let tail = t % 2 == 0;
        // Gap between s_(σ⁻¹) and m, drawn away from zero.
        let gap = rng.random_range(0.3..1.5);
        let s = if tail { -(m as f64 + gap) } else { gap - m as f64 };
        let seq = AdmissibleSequence::power(s).unwrap();
        let w = if tail {
            tail_sum_witness(&eps, &seq, m, q, j_max)
        } else {
            head_sum_witness(&eps, &seq, m, q, j_max)
        }
        .map_err(|e| e.to_string())?;
        runs += 1;
        let mut ok = true;
        for big_j in 0..=j_max {
            let range: Vec<usize> = if tail {
                (big_j..=j_max).collect()
            } else {
                (0..=big_j).collect()
            };
            let sum: f64 = range
                .iter()
                .map(|&j| eps[j] * (j as f64 * m as f64 + seq.log2_at(j)).exp2())
                .sum();
            let brute = sum * (-(big_j as f64) * m as f64 - seq.log2_at(big_j)).exp2();
            ok &= w.xi[big_j] >= brute * (1.0 - 1e-12) && w.xi[big_j] >= eps[big_j];
        }
        dominated += ok as usize;
        // Young's inequality for a geometric kernel of ratio 2^{-gap}.
        let young = eps_norm / (1.0 - (-gap).exp2());
        bounded += (w.norm.is_finite() && w.norm <= young * (1.0 + 1e-12)) as usize;
    }
    check(
        dominated == runs && bounded == runs,
        format!("{runs} witnesses: {dominated} dominate the partial sums, {bounded} within the ℓ^q bound"),
    )
}

/// `j^{-a₀} (Σ_{l=0}^{j} N_l 2^{-ld})^{1/r}` where `N_0 = 1` and
/// `N_l = (2^d − 1) 2^{(l−1)d}` cubes of scale `j` have irreducible scale `l`,
/// so the inner sum is `1 + j (1 − 2^{-d})`.
fn saturating_summand(j: u64, d: usize, r: f64, a0: f64) -> f64 {
    let mass = 1.0 + j as f64 * (1.0 - (-(d as f64)).exp2());
    (j as f64).powf(-a0) * mass.powf(1.0 / r)
}

fn saturating_bound() -> Outcome {
    let sigma = AdmissibleSequence::power(0.6).unwrap();
    let (d, r, s) = (1usize, Index::TWO, Index::new(4.0).unwrap());
    let mut constants = Vec::new();
    let mut matches = true;
    let mut a0 = 0.0;
    for big_j in [10u32, 12, 14] {
        let spec = SaturatingSpec::new(sigma.clone(), d, r, s, 0, 1, big_j).unwrap();
        a0 = spec.a0();
        let pyr = gen_saturating(&spec).unwrap();
        let terms = besov_scale_terms(&pyr, &sigma, r);
        let mut c = 0.0f64;
        for j in spec.parent_scales() {
            let summand = terms[(j + spec.m0) as usize];
            let expected = saturating_summand(j as u64, d, r.value(), a0);
            matches &= (summand - expected).abs() <= 1e-12 * expected;
            c = c.max(summand / (j as f64).powf(-a0 + r.recip()));
        }
        constants.push(c);
    }
    let spread =
        constants.iter().cloned().fold(0.0, f64::max) / constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let qv = s.value();
    let head: f64 = (1..14).map(|j| saturating_summand(j, d, r.value(), a0).powf(qv)).sum();
    let tail: f64 = (14..10_000_000u64)
        .map(|j| saturating_summand(j, d, r.value(), a0).powf(qv))
        .sum();
    // Gap between the full norm and its partial sum over scales below 14.
    let rel_tail = 1.0 - (head / (head + tail)).powf(1.0 / qv);
    check(
        matches && spread < 2.0 && rel_tail < 1e-3,
        format!("C over J=10,12,14: {constants:.4?} (spread {spread:.3}), relative tail {rel_tail:.2e}, summands match closed form: {matches}"),
    )
}

fn oscillation_besov() -> Outcome {
    let sigma = AdmissibleSequence::power(0.5).unwrap();
    let two = Index::TWO;
    let mut bands = Vec::new();
    for big_j in [6u32, 8, 10] {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for seed in 0..50 {
            let pyr = gen_random_besov(&sigma, 1, two, two, big_j, 1000 * big_j as u64 + seed).unwrap();
            let b = besov_norm(&pyr, &sigma, two, two);
            let o = oscillation_norm(&pyr, &sigma, two, two, two, 0).unwrap();
            lo = lo.min(o / b);
            hi = hi.max(o / b);
        }
        bands.push((lo, hi));
    }
    let drift = |f: fn(&(f64, f64)) -> f64| {
        let v: Vec<f64> = bands.iter().map(f).collect();
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (dl, du) = (drift(|b| b.0), drift(|b| b.1));
    let above_one = bands.iter().all(|b| b.0 >= 1.0 - 1e-12);
    check(
        dl < 2.0 && du < 2.0 && above_one,
        format!("O/B bands {bands:.3?}, lower drift {dl:.3}, upper drift {du:.3}"),
    )
}

struct Case {
    name: String,
    signal: Signal,
    points: Vec<f64>,
    exponents: Vec<f64>,
}

/// Wavelet used to synthesise and analyse the suite. Its Hölder regularity
/// (about 2.6) exceeds every tested `s̄(σ)`, as the wavelet criteria require.
const SUITE_FILTER: &str = "db8";

fn synthesise(mut pyr: CoefficientPyramid, filter: &WaveletFilter) -> Signal {
    pyr.filter = filter.name.clone();
    reconstruct(&pyr, filter).unwrap()
}

fn synthetic_suite() -> Vec<Case> {
    let big_j = 12;
    let filter = WaveletFilter::by_name(SUITE_FILTER).unwrap();
    let mut cases = Vec::new();
    for u in [0.3, 0.5, 0.7, 1.3] {
        cases.push(Case {
            name: format!("cusp u={u}"),
            signal: gen_cusp(&[0.3], u, big_j).unwrap(),
            points: vec![0.3, 0.71],
            exponents: vec![u],
        });
    }
    let sigma = AdmissibleSequence::power(1.0).unwrap();
    let spec = SaturatingSpec::new(sigma.clone(), 1, Index::TWO, Index::TWO, 0, 1, big_j).unwrap();
    let g = gen_saturating(&spec).unwrap();
    cases.push(Case {
        name: "saturating".into(),
        signal: synthesise(g, &filter),
        points: vec![0.5, 1.0 / 3.0],
        exponents: vec![0.5, 1.0],
    });
    let rf = RatioFunction::new(sigma.clone(), canonical(), 1, Index::TWO).unwrap();
    for n in [1u32, 4] {
        let cone = gen_cone(&[0.4], n, &rf, Index::TWO, big_j).unwrap();
        cases.push(Case {
            name: format!("cone n={n}"),
            signal: synthesise(cone.pyramid, &filter),
            points: vec![0.4, 0.8],
            exponents: vec![cone.exponent],
        });
    }
    for seed in 0..2 {
        let pyr = gen_random_besov(
            &AdmissibleSequence::power(0.8).unwrap(),
            1,
            Index::TWO,
            Index::TWO,
            big_j,
            seed,
        )
        .unwrap();
        cases.push(Case {
            name: format!("random seed={seed}"),
            signal: synthesise(pyr, &filter),
            points: vec![0.25, 0.6],
            exponents: vec![0.8],
        });
    }
    cases
}

fn cross_consistency() -> Outcome {
    let filter = WaveletFilter::by_name(SUITE_FILTER).unwrap();
    let cfg = SurrogateConfig::default();
    let mut checks = 0;
    let mut violations = Vec::new();
    let mut conclusive = 0;
    for case in synthetic_suite() {
        let pyr = decompose(&case.signal, &filter).unwrap();
        for p in [Index::TWO, inf()] {
            let lp = leader_pyramid(&pyr, p, 2).unwrap();
            for s in [0.1, 0.5, 0.9, 1.2, 1.5] {
                if case.exponents.iter().any(|e| (e - s).abs() < 0.2) {
                    continue;
                }
                let sigma = AdmissibleSequence::power(s).unwrap();
                for &x in &case.points {
                    let x0 = [x];
                    let direct = direct_membership(&case.signal, &x0, &sigma, p, inf(), &cfg).unwrap();
                    let leader = leader_criterion(&lp, &x0, &sigma, inf(), &cfg).unwrap();
                    let log = log_corrected_criterion(&case.signal, &x0, &sigma, p, inf(), &cfg).unwrap();
                    checks += 1;
                    conclusive += (direct.decision != Decision::Inconclusive) as usize;
                    if direct.decision == Decision::Member && leader.decision == Decision::NonMember {
                        violations.push(format!(
                            "{} x0={x} s={s} p={p}: direct member, leader non-member",
                            case.name
                        ));
                    }
                    if leader.decision == Decision::Member && log.decision == Decision::NonMember {
                        violations.push(format!(
                            "{} x0={x} s={s} p={p}: leader member, log non-member",
                            case.name
                        ));
                    }
                }
            }
        }
    }
    let detail = format!(
        "{checks} checks ({conclusive} conclusive direct verdicts), {} violations",
        violations.len()
    );
    if violations.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}: {}", violations.join("; ")))
    }
}

fn cone_closed_form() -> Outcome {
    let rf = RatioFunction::new(AdmissibleSequence::power(1.0).unwrap(), canonical(), 1, Index::TWO).unwrap();
    let x0 = [0.4];
    let mut worst = 0.0f64;
    let mut estimates = Vec::new();
    for n in [1u32, 2, 4, 8] {
        let cone = gen_cone(&x0, n, &rf, Index::TWO, 14).unwrap();
        let lp = leader_pyramid(&cone.pyramid, inf(), 2).unwrap();
        for j in 0..=lp.j_max() {
            let got = local_leader(&lp, &x0, j).unwrap();
            let want = cone.closed_form_leader(j, lp.j_trunc);
            worst = worst.max((got - want).abs() / want);
        }
        let est = pointwise_exponent(&lp, &x0, &canonical(), &ExponentConfig::default()).unwrap();
        estimates.push((n, cone.exponent, est.exponent.bound()));
    }
    let monotone = estimates.windows(2).all(|w| w[1].2 < w[0].2);
    let h_min = rf.h_min().unwrap();
    let above_floor = estimates.iter().all(|e| e.2 > h_min);
    let shown: Vec<String> = estimates
        .iter()
        .map(|(n, t, e)| format!("n={n}: {e:.3} (target {t:.3})"))
        .collect();
    check(
        worst <= 1e-12 && monotone && above_floor,
        format!("leader gap {worst:.1e}; {}", shown.join(", ")),
    )
}

fn spectrum_formalism() -> Outcome {
    let (s0, r, s) = (1.0, Index::TWO, Index::TWO);
    let sigma = AdmissibleSequence::power(s0).unwrap();
    let spec = SaturatingSpec::new(sigma.clone(), 1, r, s, 0, 1, 14).unwrap();
    // Leaders of g carry the factor j^{-a₀}; the family absorbs it without
    // changing exponents.
    let family = AdmissibleFamily::new(AdmissibleSequence::power_log(0.0, spec.a0()).unwrap(), inf(), inf());
    let rf = RatioFunction::new(sigma, family.clone(), 1, r).map_err(|e| e.to_string())?;
    let (lo, hi) = spectrum_interval(&rf).unwrap();
    let ends = predicted_spectrum(&rf, &[lo, hi]).unwrap();
    let exact = ends.d_values == vec![Some(0.0), Some(1.0)];
    let grid: Vec<f64> = (1..10).map(|t| lo + (hi - lo) * t as f64 / 10.0).collect();
    let predicted = predicted_spectrum(&rf, &grid).unwrap();
    let lp = leader_pyramid(&gen_saturating(&spec).unwrap(), inf(), 2).unwrap();
    let empirical = empirical_spectrum(&lp, &family, &grid, 3..=lp.j_max(), 0.05).unwrap();
    let mut sup = 0.0f64;
    let mut missing = 0;
    for (p, e) in predicted.d_values.iter().zip(&empirical.d_values) {
        match (p, e) {
            (Some(p), Some(e)) => sup = sup.max((p - e).abs()),
            _ => missing += 1,
        }
    }
    check(
        exact && missing == 0 && sup <= 0.2,
        format!("I = [{lo:.4}, {hi:.4}], endpoints exact: {exact}, interior sup gap {sup:.3}, missing {missing}"),
    )
}

fn h_min_floor() -> Outcome {
    let (s0, r) = (0.8, Index::TWO);
    let sigma = AdmissibleSequence::power(s0).unwrap();
    let rf = RatioFunction::new(sigma.clone(), canonical(), 1, r).unwrap();
    let floor = rf.h_min().unwrap() - 0.1;
    let mut lowest = f64::INFINITY;
    for seed in 0..20 {
        let pyr = gen_random_besov(&sigma, 1, r, Index::TWO, 13, 77 + seed).unwrap();
        let lp = leader_pyramid(&pyr, inf(), 2).unwrap();
        for t in 0..33 {
            let x0 = [t as f64 / 33.0 + 0.004];
            let est = pointwise_exponent(&lp, &x0, &canonical(), &ExponentConfig::default()).unwrap();
            lowest = lowest.min(est.exponent.bound());
        }
    }
    check(
        lowest >= floor,
        format!("lowest exponent {lowest:.3}, floor h_min - 0.1 = {floor:.3}"),
    )
}

/// Name, check and time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, f64);

fn main() {
    let criteria: [Criterion; 10] = [
        ("leader oracle equivalence", leader_oracle, 30.0),
        ("cusp exponent recovery", cusp_recovery, 30.0),
        ("Boyd estimation", boyd_estimation, f64::INFINITY),
        ("tail and head sums", tail_head_lemmas, f64::INFINITY),
        ("saturating Besov bound", saturating_bound, f64::INFINITY),
        ("oscillation/Besov equivalence", oscillation_besov, f64::INFINITY),
        ("criteria cross-consistency", cross_consistency, f64::INFINITY),
        ("cone closed form", cone_closed_form, f64::INFINITY),
        ("spectrum formalism", spectrum_formalism, 60.0),
        ("h_min floor", h_min_floor, f64::INFINITY),
    ];
    let mut failed = 0;
    for (n, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(d) if secs <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {budget} s budget")),
            Err(d) => ("FAIL", d),
        };
        failed += (status == "FAIL") as usize;
        println!("criterion {:>2} {status} {name} [{secs:.2} s]: {detail}", n + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
