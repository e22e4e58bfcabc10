//! p-wavelet leaders.
//!
//! For `λ ∈ Λ_j` and `p < ∞`,
//! `d^p_λ = max_{j ≤ j' ≤ J_trunc} (2^{(j−j')d} Σ_{λ' ⊂ λ, λ' ∈ Λ_{j'}} |c_{λ'}|^p)^{1/p}`,
//! where the inner sum runs over every orientation of every descendant
//! position. For `p = ∞` the leader is the maximum of `|c|` over the
//! truncated subtree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{adjacent_cubes, cone_positions, cube_containing, ConeSpec, DyadicCube};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::wavelet::CoefficientPyramid;

/// Number of finest scales left out of reported leaders by default.
pub const DEFAULT_GUARD: u32 = 2;

const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderPyramid {
    pub d: usize,
    pub p: Index,
    /// Finest scale entering the sup.
    pub j_trunc: u32,
    /// Finest scales excluded from `values`.
    pub guard: u32,
    /// `values[j]` for `j ∈ [0, j_trunc − guard]`, flat row-major positions.
    pub values: Vec<Vec<f64>>,
}

impl LeaderPyramid {
    /// Largest reported leader.
    pub fn magnitude(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(*v))
    }

    /// Finest reported scale `j_trunc − guard`.
    pub fn j_max(&self) -> u32 {
        self.j_trunc - self.guard
    }

    pub fn get(&self, j: u32, k: &[u64]) -> f64 {
        let side = 1usize << j;
        let flat = k.iter().fold(0usize, |acc, &c| acc * side + c as usize);
        self.values[j as usize][flat]
    }

    pub fn check_scale(&self, j: u32) -> Result<()> {
        if j > self.j_max() {
            return Err(Error::OutOfDomain(format!(
                "scale {j} beyond the finest reported scale {}",
                self.j_max()
            )));
        }
        Ok(())
    }
}

/// Direct evaluation of the definition at one cube, truncated at `j_trunc`.
pub fn p_leader_bruteforce(pyr: &CoefficientPyramid, lam: &DyadicCube, p: Index, j_trunc: u32) -> f64 {
    let d = pyr.d;
    let mut best = 0.0f64;
    for jp in lam.j..=j_trunc.min(pyr.j - 1) {
        let shift = jp - lam.j;
        let span = 1u64 << shift;
        let side = 1u64 << jp;
        let count = span.pow(d as u32);
        let depth = ((lam.j as f64 - jp as f64) * d as f64 / p.value()).exp2();
        let mut acc = 0.0f64;
        for offset in 0..count {
            let mut rest = offset;
            let mut flat = 0u64;
            for a in 0..d {
                let o = rest % span;
                rest /= span;
                flat = flat * side + (lam.k[a] << shift) + o;
            }
            for c in pyr.node(jp, flat as usize) {
                if p.is_infinite() {
                    acc = acc.max(c.abs());
                } else {
                    acc += (depth * c.abs()).powf(p.value());
                }
            }
        }
        let level = if p.is_infinite() {
            acc
        } else {
            acc.powf(1.0 / p.value())
        };
        best = best.max(level);
    }
    best
}

/// Sums (or maxima, for `combine = max`) of each group of `2^d` children.
fn coarsen(child: &[f64], d: usize, child_side: usize, max: bool) -> Vec<f64> {
    let side = child_side / 2;
    let parents = side.pow(d as u32);
    let fold = |flat: usize| -> f64 {
        if d == 1 {
            let (a, b) = (child[2 * flat], child[2 * flat + 1]);
            if max {
                a.max(b)
            } else {
                a + b
            }
        } else {
            let (r, c) = (flat / side, flat % side);
            let at = |dr: usize, dc: usize| child[(2 * r + dr) * child_side + 2 * c + dc];
            let v = [at(0, 0), at(0, 1), at(1, 0), at(1, 1)];
            if max {
                v.iter().fold(0.0f64, |m, x| m.max(*x))
            } else {
                ((v[0] + v[1]) + v[2]) + v[3]
            }
        }
    };
    if parents >= PAR_THRESHOLD {
        (0..parents).into_par_iter().map(fold).collect()
    } else {
        (0..parents).map(fold).collect()
    }
}

fn node_mass(pyr: &CoefficientPyramid, j: u32, p: Index) -> Vec<f64> {
    let per = pyr.orientations();
    let level = &pyr.detail[j as usize];
    let mass = |node: &[f64]| -> f64 {
        if p.is_infinite() {
            node.iter().fold(0.0f64, |m, c| m.max(c.abs()))
        } else {
            node.iter().map(|c| c.abs().powf(p.value())).sum()
        }
    };
    if level.len() >= PAR_THRESHOLD {
        level.par_chunks(per).map(mass).collect()
    } else {
        level.chunks(per).map(mass).collect()
    }
}

/// Leaders at every cube of scales `0..=J−1−guard`, with `J_trunc = J − 1`.
///
/// For each finest scale `j'` the node masses `Σ_i |c|^p` are block-summed up
/// the tree; at every coarser scale `j` the running maximum of
/// `2^{(j−j')d} A_{j'}` is kept. Each `j'` costs `O(2^{j'd})`, so the whole
/// pyramid is linear in the number of coefficients.
pub fn leader_pyramid(pyr: &CoefficientPyramid, p: Index, guard: u32) -> Result<LeaderPyramid> {
    if guard >= pyr.j {
        return Err(Error::InvalidArgument(format!(
            "guard {guard} must be smaller than J = {}",
            pyr.j
        )));
    }
    let d = pyr.d;
    let j_trunc = pyr.j - 1;
    let mut best: Vec<Vec<f64>> = (0..=j_trunc).map(|j| vec![0.0; 1 << (j as usize * d)]).collect();
    if p.is_infinite() {
        let mut acc = node_mass(pyr, j_trunc, p);
        best[j_trunc as usize].clone_from(&acc);
        for j in (0..j_trunc).rev() {
            let up = coarsen(&acc, d, 1 << (j + 1), true);
            acc = node_mass(pyr, j, p).iter().zip(&up).map(|(a, b)| a.max(*b)).collect();
            best[j as usize].clone_from(&acc);
        }
    } else {
        for jp in (0..=j_trunc).rev() {
            let mut acc = node_mass(pyr, jp, p);
            for (m, a) in best[jp as usize].iter_mut().zip(&acc) {
                *m = m.max(*a);
            }
            for j in (0..jp).rev() {
                acc = coarsen(&acc, d, 1 << (j + 1), false);
                let w = ((j as f64 - jp as f64) * d as f64).exp2();
                for (m, a) in best[j as usize].iter_mut().zip(&acc) {
                    *m = m.max(w * a);
                }
            }
        }
        let inv = 1.0 / p.value();
        for level in best.iter_mut() {
            level.iter_mut().for_each(|v| *v = v.powf(inv));
        }
    }
    best.truncate((j_trunc - guard + 1) as usize);
    Ok(LeaderPyramid {
        d,
        p,
        j_trunc,
        guard,
        values: best,
    })
}

/// `d^p_j(x₀)`: the largest leader over the cubes adjacent to `λ_j(x₀)`.
pub fn local_leader(lp: &LeaderPyramid, x0: &[f64], j: u32) -> Result<f64> {
    lp.check_scale(j)?;
    if x0.len() != lp.d {
        return Err(Error::InvalidShape(format!(
            "point has {} coordinates, expected {}",
            x0.len(),
            lp.d
        )));
    }
    let centre = cube_containing(x0, j);
    Ok(adjacent_cubes(&centre)
        .iter()
        .fold(0.0f64, |m, c| m.max(lp.get(j, &c.k))))
}

/// `(d^p_j(x₀))_j` over every reported scale.
pub fn local_leaders(lp: &LeaderPyramid, x0: &[f64]) -> Result<Vec<f64>> {
    (0..=lp.j_max()).map(|j| local_leader(lp, x0, j)).collect()
}

/// `(Σ_{λ ∈ Λ_j ∩ K_{x₀}(r)} |c_λ|^p)^{1/p}` for every detail scale.
pub fn cone_coefficient_norms(pyr: &CoefficientPyramid, x0: &[f64], r: f64, p: Index) -> Result<Vec<f64>> {
    let spec = ConeSpec::new(x0.to_vec(), r)?;
    if x0.len() != pyr.d {
        return Err(Error::InvalidShape(format!(
            "point has {} coordinates, expected {}",
            x0.len(),
            pyr.d
        )));
    }
    Ok((0..pyr.j)
        .map(|j| {
            let side = 1u64 << j;
            let coeffs = cone_positions(&spec, j).into_iter().flat_map(|k| {
                let flat = k.iter().fold(0u64, |acc, &c| acc * side + c);
                pyr.node(j, flat as usize).to_vec()
            });
            p.norm(coeffs)
        })
        .collect())
}
