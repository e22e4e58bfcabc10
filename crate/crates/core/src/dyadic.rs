//! Dyadic cubes on the periodized unit cube `[0,1)^d`, `d ∈ {1, 2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 2;

pub fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidShape(format!("dimension must be 1 or 2, got {d}")));
    }
    Ok(())
}

/// The cube `k/2^j + [0, 2^{-j})^d` tagged with a wavelet orientation `i`.
/// Orientation `0` marks leader-tree nodes; geometry ignores `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub i: u8,
    pub j: u32,
    pub k: Vec<u64>,
}

impl DyadicCube {
    pub fn new(i: u8, j: u32, k: Vec<u64>) -> Result<Self> {
        check_dim(k.len())?;
        if i as usize >= 1 << k.len() {
            return Err(Error::InvalidArgument(format!(
                "orientation {i} out of range for d = {}",
                k.len()
            )));
        }
        let side = 1u64 << j;
        if k.iter().any(|&c| c >= side) {
            return Err(Error::InvalidArgument(format!(
                "position {k:?} out of range at scale {j}"
            )));
        }
        Ok(DyadicCube { i, j, k })
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// Lower corner `k/2^j`.
    pub fn corner(&self) -> Vec<f64> {
        let scale = (-(self.j as f64)).exp2();
        self.k.iter().map(|&c| c as f64 * scale).collect()
    }

    /// `self ⊂ other` as sets, ignoring orientation.
    pub fn is_within(&self, other: &DyadicCube) -> bool {
        if self.j < other.j || self.dim() != other.dim() {
            return false;
        }
        let shift = self.j - other.j;
        self.k.iter().zip(&other.k).all(|(a, b)| a >> shift == *b)
    }

    /// The ancestor at scale `j ≤ self.j`, orientation 0.
    pub fn ancestor(&self, j: u32) -> DyadicCube {
        assert!(j <= self.j, "ancestor scale {j} exceeds {}", self.j);
        let shift = self.j - j;
        DyadicCube {
            i: 0,
            j,
            k: self.k.iter().map(|c| c >> shift).collect(),
        }
    }
}

/// Maps `x` into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Distance between `a` and `b` on the unit circle.
pub fn periodic_distance(a: f64, b: f64) -> f64 {
    let t = wrap_unit(a - b);
    t.min(1.0 - t)
}

/// `λ_j(x₀)`: the cube of side `2^{-j}` containing `x0`, orientation 0.
pub fn cube_containing(x0: &[f64], j: u32) -> DyadicCube {
    let side = (j as f64).exp2();
    let n = 1u64 << j;
    let k = x0
        .iter()
        .map(|&x| ((wrap_unit(x) * side).floor() as u64).min(n - 1))
        .collect();
    DyadicCube { i: 0, j, k }
}

/// `3λ`: the same-scale cubes with offsets in `{-1,0,1}^d`, wrapped and
/// deduplicated (at scales 0 and 1 several offsets coincide).
pub fn adjacent_cubes(lam: &DyadicCube) -> Vec<DyadicCube> {
    let n = 1i64 << lam.j;
    let d = lam.dim();
    let mut out = Vec::with_capacity(3usize.pow(d as u32));
    for code in 0..3usize.pow(d as u32) {
        let mut c = code;
        let k = lam
            .k
            .iter()
            .map(|&kc| {
                let off = (c % 3) as i64 - 1;
                c /= 3;
                (kc as i64 + off).rem_euclid(n) as u64
            })
            .collect();
        out.push(DyadicCube { i: lam.i, j: lam.j, k });
    }
    out.sort();
    out.dedup();
    out
}

/// Dyadic irreducible form of `k/2^j`: strips the trailing zero bits shared
/// by all components. `k = 0` reduces to scale 0.
pub fn irreducible(j: u32, k: &[u64]) -> (u32, Vec<u64>) {
    let shared = k
        .iter()
        .filter(|&&c| c != 0)
        .map(|c| c.trailing_zeros())
        .min()
        .map_or(j, |tz| tz.min(j));
    (j - shared, k.iter().map(|c| c >> shared).collect())
}

/// Center and width of the strict cone of influence `C_{x₀}(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub x0: Vec<f64>,
    pub r: f64,
}

impl ConeSpec {
    pub fn new(x0: Vec<f64>, r: f64) -> Result<Self> {
        check_dim(x0.len())?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("cone width must be positive, got {r}")));
        }
        Ok(ConeSpec { x0, r })
    }
}

/// `‖k/2^j − x₀‖_∞ < r/2^j` with periodic distance.
pub fn in_cone(spec: &ConeSpec, j: u32, k: &[u64]) -> bool {
    let scale = (-(j as f64)).exp2();
    let bound = spec.r * scale;
    k.iter()
        .zip(&spec.x0)
        .all(|(&c, &x)| periodic_distance(c as f64 * scale, x) < bound)
}

/// Positions of `Λ_j ∩ C_{x₀}(r)`, in lexicographic order, no duplicates.
pub fn cone_positions(spec: &ConeSpec, j: u32) -> Vec<Vec<u64>> {
    let n = 1i64 << j;
    let side = n as f64;
    let reach = spec.r.ceil() as i64 + 1;
    let per_axis: Vec<Vec<u64>> = spec
        .x0
        .iter()
        .map(|&x| {
            let centre = (wrap_unit(x) * side).floor() as i64;
            let mut ks: Vec<u64> = (centre - reach..=centre + reach)
                .map(|c| c.rem_euclid(n) as u64)
                .filter(|&c| periodic_distance(c as f64 / side, x) < spec.r / side)
                .collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        })
        .collect();
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for axis in &per_axis {
        out = out
            .iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    if per_axis.iter().any(Vec::is_empty) {
        out.clear();
    }
    out
}

/// The balls `E^α_{j,k}`: closed `∞`-norm balls of radius `2^{-αj}` centred at
/// every `k/2^j`, `k ∈ {0..2^j−1}^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxBalls {
    pub d: usize,
    pub j: u32,
    pub radius: f64,
}

impl ApproxBalls {
    pub fn len(&self) -> usize {
        1usize << (self.j as usize * self.d)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ball centres `k` in lexicographic order.
    pub fn centers(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let n = 1u64 << self.j;
        (0..self.len() as u64).map(move |flat| {
            let mut rest = flat;
            let mut k = vec![0; self.d];
            for slot in k.iter_mut().rev() {
                *slot = rest % n;
                rest /= n;
            }
            k
        })
    }
}

pub fn alpha_approx_cubes(alpha: f64, j: u32, d: usize) -> Result<ApproxBalls> {
    check_dim(d)?;
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::OutOfDomain(format!("α must be >= 1, got {alpha}")));
    }
    Ok(ApproxBalls {
        d,
        j,
        radius: (-alpha * j as f64).exp2(),
    })
}

/// `x₀ ∈ E^α_j`: some `k/2^j`, `k ∈ {0..2^j−1}^d`, lies within the closed
/// `∞`-ball of radius `2^{-αj}` around `x0`.
pub fn point_in_e(x0: &[f64], alpha: f64, j: u32) -> bool {
    let side = (j as f64).exp2();
    let max_k = side - 1.0;
    let radius = (-alpha * j as f64).exp2();
    x0.iter().all(|&x| {
        let k = (x * side).round().clamp(0.0, max_k);
        (x - k / side).abs() <= radius
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(j: u32, k: &[u64]) -> DyadicCube {
        DyadicCube::new(0, j, k.to_vec()).unwrap()
    }

    #[test]
    fn containing_cube() {
        assert_eq!(cube_containing(&[0.0], 5).k, vec![0]);
        assert_eq!(cube_containing(&[0.7], 3).k, vec![5]);
        assert_eq!(cube_containing(&[0.3, 0.9], 2).k, vec![1, 3]);
        assert_eq!(cube_containing(&[1.0], 3).k, vec![0]);
    }

    #[test]
    fn adjacency() {
        let ks: Vec<u64> = adjacent_cubes(&cube(4, &[7])).iter().map(|c| c.k[0]).collect();
        assert_eq!(ks, vec![6, 7, 8]);
        assert_eq!(adjacent_cubes(&cube(3, &[2, 5])).len(), 9);
        let ks: Vec<u64> = adjacent_cubes(&cube(3, &[0])).iter().map(|c| c.k[0]).collect();
        assert_eq!(ks, vec![0, 1, 7]);
        assert_eq!(adjacent_cubes(&cube(0, &[0])).len(), 1);
    }

    #[test]
    fn irreducible_examples() {
        assert_eq!(irreducible(5, &[16]), (1, vec![1]));
        assert_eq!(irreducible(5, &[0]), (0, vec![0]));
        assert_eq!(irreducible(4, &[4, 6]), (3, vec![2, 3]));
        assert_eq!(irreducible(4, &[0, 8]), (1, vec![0, 1]));
    }

    #[test]
    fn cone_examples() {
        let s = ConeSpec::new(vec![0.0], 1.0).unwrap();
        assert!(!in_cone(&s, 3, &[1]));
        assert!(in_cone(&s, 3, &[0]));
        let s = ConeSpec::new(vec![0.5], 2.0).unwrap();
        let ks: Vec<u64> = (0..16).filter(|&k| in_cone(&s, 4, &[k])).collect();
        assert_eq!(ks, vec![7, 8, 9]);
        assert_eq!(cone_positions(&s, 4), vec![vec![7], vec![8], vec![9]]);
        assert!(ConeSpec::new(vec![0.5], 0.0).is_err());
    }

    #[test]
    fn approximable_points() {
        assert!(!point_in_e(&[1.0 / 3.0], 2.0, 4));
        assert!(point_in_e(&[0.375], 7.0, 3));
        assert!(point_in_e(&[1.0], 1.0, 5));
        let balls = alpha_approx_cubes(2.0, 2, 2).unwrap();
        assert_eq!(balls.len(), 16);
        assert_eq!(balls.centers().nth(5), Some(vec![1, 1]));
        assert_eq!(balls.radius, 1.0 / 16.0);
        assert!(alpha_approx_cubes(0.5, 2, 1).is_err());
    }

    fn brute_reduce(j: u32, k: &[u64]) -> (u32, Vec<u64>) {
        let (mut j, mut k) = (j, k.to_vec());
        while j > 0 && k.iter().all(|c| c % 2 == 0) {
            j -= 1;
            k.iter_mut().for_each(|c| *c /= 2);
        }
        (j, k)
    }

    proptest! {
        #[test]
        fn irreducible_matches_bruteforce(j in 0u32..20, a in any::<u64>(), b in any::<u64>()) {
            let n = 1u64 << j;
            let k = [a % n, b % n];
            let red = irreducible(j, &k);
            prop_assert_eq!(&red, &brute_reduce(j, &k));
            prop_assert_eq!(irreducible(red.0, &red.1), red);
        }

        #[test]
        fn adjacency_is_symmetric(j in 0u32..8, a in any::<u64>(), b in any::<u64>(), pick in 0usize..9) {
            let n = 1u64 << j;
            let lam = cube(j, &[a % n, b % n]);
            let adj = adjacent_cubes(&lam);
            let other = &adj[pick % adj.len()];
            prop_assert!(adjacent_cubes(other).contains(&lam));
        }

        #[test]
        fn containing_point_is_in_unit_cone(x in 0.0f64..1.0, y in 0.0f64..1.0, j in 0u32..30) {
            let lam = cube_containing(&[x, y], j);
            let spec = ConeSpec::new(vec![x, y], 1.0).unwrap();
            prop_assert!(in_cone(&spec, j, &lam.k));
        }

        #[test]
        fn approximation_sets_are_nested(x in 0.0f64..1.0, a in 1.0f64..6.0, extra in 0.0f64..4.0, j in 0u32..20) {
            if point_in_e(&[x], a + extra, j) {
                prop_assert!(point_in_e(&[x], a, j));
            }
            prop_assert!(point_in_e(&[x], 1.0, j));
        }

        #[test]
        fn cone_positions_match_scan(x in 0.0f64..1.0, r in 0.1f64..3.0, j in 0u32..7) {
            let spec = ConeSpec::new(vec![x], r).unwrap();
            let scan: Vec<Vec<u64>> = (0..1u64 << j).filter(|&k| in_cone(&spec, j, &[k])).map(|k| vec![k]).collect();
            prop_assert_eq!(cone_positions(&spec, j), scan);
        }
    }
}
