//! Periodic orthogonal wavelet transform in the `L∞` normalization.
//!
//! A signal on `[0,1)^d` is a row-major grid of `2^{Jd}` samples `f(m/2^J)`.
//! The finest approximation is `a_J[m] = 2^{-Jd/2} f(m/2^J)`; after the
//! orthonormal cascade each detail coefficient is rescaled by `2^{jd/2}`, so
//! `c_λ ≈ 2^{jd} ∫ f ψ(2^j x − k)`. Coefficients of filter index `n` are stored
//! at cube `k = n + N − 1 (mod 2^j)` per axis for `dbN`, which places the cube
//! under the centre of the wavelet's support.

pub mod filters;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::check_dim;
use crate::error::{Error, Result};
pub use filters::{WaveletFilter, DEFAULT_FILTER};

/// Normalization tag carried by every pyramid.
pub const NORMALIZATION: &str = "Linf";

/// Grids at least this long are filtered in parallel.
const PAR_THRESHOLD: usize = 1 << 12;

/// Samples of a function on the dyadic grid of `[0,1)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub d: usize,
    pub j: u32,
    pub samples: Vec<f64>,
}

impl Signal {
    /// Infers `J` from the sample count, which must be a power of `2^d`.
    pub fn new(d: usize, samples: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        let n = samples.len();
        if n < 2 || !n.is_power_of_two() || !(n.trailing_zeros() as usize).is_multiple_of(d) {
            return Err(Error::InvalidShape(format!(
                "{n} samples is not 2^(J·{d}) for some J >= 1"
            )));
        }
        let j = n.trailing_zeros() / d as u32;
        Ok(Signal { d, j, samples })
    }

    /// Samples `f` at the grid points `m / 2^J`.
    pub fn from_fn(d: usize, j: u32, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_dim(d)?;
        let side = 1usize << j;
        let h = 1.0 / side as f64;
        let samples = (0..side.pow(d as u32))
            .map(|flat| {
                let x: Vec<f64> = unflatten(flat, side, d).iter().map(|&m| m as f64 * h).collect();
                f(&x)
            })
            .collect();
        Signal::new(d, samples)
    }

    pub fn side(&self) -> usize {
        1 << self.j
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Row-major flat index → per-axis position (axis 0 slowest).
pub fn unflatten(flat: usize, side: usize, d: usize) -> Vec<usize> {
    let mut k = vec![0; d];
    let mut rest = flat;
    for slot in k.iter_mut().rev() {
        *slot = rest % side;
        rest /= side;
    }
    k
}

pub fn flatten(k: &[usize], side: usize) -> usize {
    k.iter().fold(0, |acc, &c| acc * side + c)
}

/// Detail coefficients per scale and the single coarse coefficient `C_0`.
///
/// `detail[j]` holds `2^{jd}` nodes, node-major: the coefficient of
/// orientation `i ∈ [1, 2^d − 1]` at flat position `f` sits at
/// `f · (2^d − 1) + i − 1`. Bit `a` of `i` marks the wavelet (rather than the
/// scaling function) along axis `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPyramid {
    pub d: usize,
    pub j: u32,
    pub filter: String,
    pub coarse: f64,
    pub detail: Vec<Vec<f64>>,
}

impl CoefficientPyramid {
    pub fn zeros(d: usize, j: u32, filter: &str) -> Result<Self> {
        check_dim(d)?;
        if j == 0 {
            return Err(Error::InvalidShape("pyramid needs J >= 1".into()));
        }
        let per = orientations(d);
        let detail = (0..j).map(|s| vec![0.0; per << (s as usize * d)]).collect();
        Ok(CoefficientPyramid {
            d,
            j,
            filter: filter.to_string(),
            coarse: 0.0,
            detail,
        })
    }

    pub fn orientations(&self) -> usize {
        orientations(self.d)
    }

    pub fn side(&self, j: u32) -> usize {
        1 << j
    }

    fn slot(&self, i: u8, j: u32, k: &[u64]) -> usize {
        debug_assert!(i >= 1 && (i as usize) <= self.orientations());
        let side = self.side(j);
        let flat = k.iter().fold(0usize, |acc, &c| acc * side + c as usize);
        flat * self.orientations() + i as usize - 1
    }

    pub fn get(&self, i: u8, j: u32, k: &[u64]) -> f64 {
        self.detail[j as usize][self.slot(i, j, k)]
    }

    pub fn set(&mut self, i: u8, j: u32, k: &[u64], c: f64) {
        let s = self.slot(i, j, k);
        self.detail[j as usize][s] = c;
    }

    /// Orientation-wise coefficients of the node at flat position `flat`.
    pub fn node(&self, j: u32, flat: usize) -> &[f64] {
        let per = self.orientations();
        &self.detail[j as usize][flat * per..(flat + 1) * per]
    }

    pub fn is_finite(&self) -> bool {
        self.coarse.is_finite() && self.detail.iter().flatten().all(|c| c.is_finite())
    }

    /// `Σ c²` in the unit-energy convention (`c_orth = 2^{-jd/2} c`).
    pub fn energy(&self) -> f64 {
        let details: f64 = self
            .detail
            .iter()
            .enumerate()
            .map(|(s, level)| {
                let w = (-((s * self.d) as f64)).exp2();
                level.iter().map(|c| c * c).sum::<f64>() * w
            })
            .sum();
        self.coarse * self.coarse + details
    }
}

pub fn orientations(d: usize) -> usize {
    (1 << d) - 1
}

/// One periodic analysis step along a contiguous line of even length.
fn analyze_line(input: &[f64], f: &WaveletFilter, lo: &mut [f64], hi: &mut [f64]) {
    let n = input.len();
    for (idx, (l, h)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
        let mut a = 0.0;
        let mut b = 0.0;
        for (m, (hm, gm)) in f.low.iter().zip(&f.high).enumerate() {
            let x = input[(2 * idx + m) % n];
            a += hm * x;
            b += gm * x;
        }
        *l = a;
        *h = b;
    }
}

/// Inverse of [`analyze_line`]. Each output sample gathers its terms in a
/// fixed order, so the result does not depend on how lines are scheduled.
fn synthesize_line(lo: &[f64], hi: &[f64], f: &WaveletFilter, out: &mut [f64]) {
    let n = out.len();
    let half = lo.len();
    let len = f.len();
    for (t, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        // t = 2·idx + m (mod n)
        for m in (0..len).filter(|m| (t + n * len - m).is_multiple_of(2)) {
            let idx = ((t + n * len - m) / 2) % half;
            acc += f.low[m] * lo[idx] + f.high[m] * hi[idx];
        }
        *o = acc;
    }
}

/// Analysis of every line along `axis` of a `side^d` block; returns the low
/// and high halves laid out as `side^d` arrays with the transformed axis
/// halved.
fn analyze_axis(data: &[f64], side: usize, d: usize, axis: usize, f: &WaveletFilter) -> (Vec<f64>, Vec<f64>) {
    let half = side / 2;
    if d == 1 {
        let mut lo = vec![0.0; half];
        let mut hi = vec![0.0; half];
        analyze_line(data, f, &mut lo, &mut hi);
        return (lo, hi);
    }
    // d == 2: the block has `rows × cols` with the transformed axis halved.
    let (rows, cols) = (side, side);
    let lines = if axis == 1 { rows } else { cols };
    let process = |line: usize| {
        let input: Vec<f64> = if axis == 1 {
            data[line * cols..(line + 1) * cols].to_vec()
        } else {
            (0..rows).map(|r| data[r * cols + line]).collect()
        };
        let mut lo = vec![0.0; half];
        let mut hi = vec![0.0; half];
        analyze_line(&input, f, &mut lo, &mut hi);
        (lo, hi)
    };
    let results: Vec<(Vec<f64>, Vec<f64>)> = if data.len() >= PAR_THRESHOLD {
        (0..lines).into_par_iter().map(process).collect()
    } else {
        (0..lines).map(process).collect()
    };
    scatter_halves(&results, side, axis)
}

fn scatter_halves(results: &[(Vec<f64>, Vec<f64>)], side: usize, axis: usize) -> (Vec<f64>, Vec<f64>) {
    let half = side / 2;
    let mut lo = vec![0.0; side * half];
    let mut hi = vec![0.0; side * half];
    for (line, (l, h)) in results.iter().enumerate() {
        for t in 0..half {
            let at = if axis == 1 { line * half + t } else { t * side + line };
            lo[at] = l[t];
            hi[at] = h[t];
        }
    }
    (lo, hi)
}

/// Inverse of [`analyze_axis`] for a block whose axis `axis` is halved.
fn synthesize_axis(lo: &[f64], hi: &[f64], side: usize, d: usize, axis: usize, f: &WaveletFilter) -> Vec<f64> {
    let half = side / 2;
    if d == 1 {
        let mut out = vec![0.0; side];
        synthesize_line(lo, hi, f, &mut out);
        return out;
    }
    let process = |line: usize| {
        let pick = |src: &[f64]| -> Vec<f64> {
            if axis == 1 {
                src[line * half..(line + 1) * half].to_vec()
            } else {
                (0..half).map(|t| src[t * side + line]).collect()
            }
        };
        let mut out = vec![0.0; side];
        synthesize_line(&pick(lo), &pick(hi), f, &mut out);
        out
    };
    let lines: Vec<Vec<f64>> = if lo.len() * 2 >= PAR_THRESHOLD {
        (0..side).into_par_iter().map(process).collect()
    } else {
        (0..side).map(process).collect()
    };
    let mut out = vec![0.0; side * side];
    for (line, vals) in lines.iter().enumerate() {
        for (t, v) in vals.iter().enumerate() {
            let at = if axis == 1 { line * side + t } else { t * side + line };
            out[at] = *v;
        }
    }
    out
}

/// Cyclic shift by `shift` along every axis of a `side^d` block:
/// `out[(n + shift) mod side] = data[n]` componentwise.
fn rotate(data: &[f64], side: usize, d: usize, shift: usize, forward: bool) -> Vec<f64> {
    let s = shift % side;
    if s == 0 {
        return data.to_vec();
    }
    let mut out = vec![0.0; data.len()];
    for (flat, v) in data.iter().enumerate() {
        let k: Vec<usize> = unflatten(flat, side, d)
            .into_iter()
            .map(|c| if forward { (c + s) % side } else { (c + side - s) % side })
            .collect();
        out[flatten(&k, side)] = *v;
    }
    out
}

/// Forward transform of `signal` down to scale 0.
pub fn decompose(signal: &Signal, filter: &WaveletFilter) -> Result<CoefficientPyramid> {
    let d = signal.d;
    let big_j = signal.j;
    let expected = 1usize << (big_j as usize * d);
    if signal.samples.len() != expected {
        return Err(Error::InvalidShape(format!(
            "signal has {} samples, expected {expected}",
            signal.samples.len()
        )));
    }
    let mut pyr = CoefficientPyramid::zeros(d, big_j, &filter.name)?;
    let init = (-((big_j as usize * d) as f64) / 2.0).exp2();
    let mut approx: Vec<f64> = signal.samples.iter().map(|v| v * init).collect();
    let per = orientations(d);
    let shift = filter.center_shift();
    for j in (0..big_j).rev() {
        let side = 1usize << (j + 1);
        let half = side / 2;
        let bands: Vec<Vec<f64>> = if d == 1 {
            let (lo, hi) = analyze_axis(&approx, side, 1, 0, filter);
            vec![lo, hi]
        } else {
            // Axis 1 first, then axis 0 on each half.
            let (l1, h1) = analyze_axis(&approx, side, 2, 1, filter);
            let (ll, hl) = analyze_axis_rect(&l1, side, half, filter);
            let (lh, hh) = analyze_axis_rect(&h1, side, half, filter);
            // Orientation bit 0 = axis 0, bit 1 = axis 1.
            vec![ll, hl, lh, hh]
        };
        let scale = ((j as usize * d) as f64 / 2.0).exp2();
        let level = &mut pyr.detail[j as usize];
        for (i, band) in bands.iter().enumerate().skip(1) {
            let placed = rotate(band, half, d, shift, true);
            for (flat, v) in placed.iter().enumerate() {
                level[flat * per + i - 1] = v * scale;
            }
        }
        approx = bands.into_iter().next().expect("low band present");
    }
    pyr.coarse = approx[0];
    Ok(pyr)
}

/// Axis-0 analysis of a `rows × cols` block (rows = side, cols = half).
fn analyze_axis_rect(data: &[f64], rows: usize, cols: usize, f: &WaveletFilter) -> (Vec<f64>, Vec<f64>) {
    let half = rows / 2;
    let process = |c: usize| {
        let input: Vec<f64> = (0..rows).map(|r| data[r * cols + c]).collect();
        let mut lo = vec![0.0; half];
        let mut hi = vec![0.0; half];
        analyze_line(&input, f, &mut lo, &mut hi);
        (lo, hi)
    };
    let results: Vec<(Vec<f64>, Vec<f64>)> = if data.len() >= PAR_THRESHOLD {
        (0..cols).into_par_iter().map(process).collect()
    } else {
        (0..cols).map(process).collect()
    };
    let mut lo = vec![0.0; half * cols];
    let mut hi = vec![0.0; half * cols];
    for (c, (l, h)) in results.iter().enumerate() {
        for t in 0..half {
            lo[t * cols + c] = l[t];
            hi[t * cols + c] = h[t];
        }
    }
    (lo, hi)
}

/// Axis-0 synthesis of a `half × cols` pair into `rows × cols`.
fn synthesize_axis_rect(lo: &[f64], hi: &[f64], rows: usize, cols: usize, f: &WaveletFilter) -> Vec<f64> {
    let half = rows / 2;
    let process = |c: usize| {
        let l: Vec<f64> = (0..half).map(|t| lo[t * cols + c]).collect();
        let h: Vec<f64> = (0..half).map(|t| hi[t * cols + c]).collect();
        let mut out = vec![0.0; rows];
        synthesize_line(&l, &h, f, &mut out);
        out
    };
    let results: Vec<Vec<f64>> = if rows * cols >= PAR_THRESHOLD {
        (0..cols).into_par_iter().map(process).collect()
    } else {
        (0..cols).map(process).collect()
    };
    let mut out = vec![0.0; rows * cols];
    for (c, col) in results.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            out[r * cols + c] = *v;
        }
    }
    out
}

/// Inverse transform; returns the samples `f(m/2^J)`.
pub fn reconstruct(pyr: &CoefficientPyramid, filter: &WaveletFilter) -> Result<Signal> {
    if pyr.filter != filter.name {
        return Err(Error::FilterMismatch {
            expected: pyr.filter.clone(),
            found: filter.name.clone(),
        });
    }
    let d = pyr.d;
    let per = orientations(d);
    let shift = filter.center_shift();
    let mut approx = vec![pyr.coarse];
    for j in 0..pyr.j {
        let half = 1usize << j;
        let side = 2 * half;
        let scale = (-((j as usize * d) as f64) / 2.0).exp2();
        let level = &pyr.detail[j as usize];
        let band = |i: usize| -> Vec<f64> {
            let placed: Vec<f64> = (0..half.pow(d as u32))
                .map(|flat| level[flat * per + i - 1] * scale)
                .collect();
            rotate(&placed, half, d, shift, false)
        };
        approx = if d == 1 {
            synthesize_axis(&approx, &band(1), side, 1, 0, filter)
        } else {
            let l1 = synthesize_axis_rect(&approx, &band(1), side, half, filter);
            let h1 = synthesize_axis_rect(&band(2), &band(3), side, half, filter);
            synthesize_axis(&l1, &h1, side, 2, 1, filter)
        };
    }
    let out_scale = ((pyr.j as usize * d) as f64 / 2.0).exp2();
    let samples = approx.into_iter().map(|v| v * out_scale).collect();
    Signal::new(d, samples)
}
