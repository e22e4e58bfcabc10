//! Daubechies extremal-phase orthogonal filters `db1` to `db8`.
//!
//! Low-pass taps are normalized to `Σ h = √2`, `Σ h² = 1`; the high-pass
//! filter is the alternating flip `g[n] = (-1)^n h[L-1-n]`. Taps are kept at
//! the published 20-digit precision.

#![allow(clippy::excessive_precision)]

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};

const DB1: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];

const DB2: [f64; 4] = [
    4.8296291314453414337e-1,
    8.3651630373780790558e-1,
    2.2414386804201338103e-1,
    -1.2940952255126038117e-1,
];

const DB3: [f64; 6] = [
    3.32670552950082616e-1,
    8.0689150931109257649e-1,
    4.598775021184915701e-1,
    -1.350110200102545887e-1,
    -8.5441273882026661693e-2,
    3.5226291885709536603e-2,
];

const DB4: [f64; 8] = [
    2.3037781330889650086e-1,
    7.1484657055291564709e-1,
    6.3088076792985890788e-1,
    -2.7983769416859854211e-2,
    -1.8703481171909308408e-1,
    3.0841381835560763627e-2,
    3.2883011666885199735e-2,
    -1.0597401785069032105e-2,
];

const DB5: [f64; 10] = [
    1.6010239797419291448e-1,
    6.0382926979718967054e-1,
    7.2430852843777292773e-1,
    1.3842814590132073151e-1,
    -2.4229488706638203186e-1,
    -3.2244869584638374648e-2,
    7.7571493840045713523e-2,
    -6.2414902127982742742e-3,
    -1.2580751999081999469e-2,
    3.335725285473771278e-3,
];

const DB6: [f64; 12] = [
    1.1154074335010946362e-1,
    4.9462389039845308568e-1,
    7.5113390802109535068e-1,
    3.1525035170919762909e-1,
    -2.2626469396543982008e-1,
    -1.2976686756726193556e-1,
    9.7501605587323049102e-2,
    2.7522865530305728626e-2,
    -3.1582039317486029565e-2,
    5.5384220116149613925e-4,
    4.7772575109455106396e-3,
    -1.0773010853084795649e-3,
];

const DB7: [f64; 14] = [
    7.785205408500917902e-2,
    3.9653931948191730654e-1,
    7.2913209084623511992e-1,
    4.6978228740519312247e-1,
    -1.4390600392856497541e-1,
    -2.2403618499387498264e-1,
    7.1309219266830264751e-2,
    8.0612609151083071913e-2,
    -3.802993693501441358e-2,
    -1.6574541630666880654e-2,
    1.2550998556099840613e-2,
    4.2957797292136652113e-4,
    -1.8016407040474909153e-3,
    3.5371379997452024845e-4,
];

const DB8: [f64; 16] = [
    5.4415842243104009955e-2,
    3.1287159091429997066e-1,
    6.7563073629728980681e-1,
    5.8535468365420671277e-1,
    -1.5829105256349305667e-2,
    -2.8401554296154692652e-1,
    4.7248457391328277036e-4,
    1.2874742662047845886e-1,
    -1.736930100180754617e-2,
    -4.4088253930794751507e-2,
    1.3981027917398281649e-2,
    8.7460940474057767164e-3,
    -4.8703529934515743104e-3,
    -3.917403733769470463e-4,
    6.7544940645056936637e-4,
    -1.1747678412476953373e-4,
];

/// Name of the filter used when none is requested.
pub const DEFAULT_FILTER: &str = "db4";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveletFilter {
    pub name: String,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub vanishing_moments: u32,
    /// Smallest `j0` with the centred support of `ψ` inside `B(0, 2^{j0})`.
    pub support_radius_log2: u32,
}

impl WaveletFilter {
    /// `db1`..`db8`; `haar` is an alias of `db1`.
    pub fn by_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let moments = match lower.as_str() {
            "haar" => 1,
            other => other
                .strip_prefix("db")
                .and_then(|n| n.parse::<u32>().ok())
                .filter(|n| (1..=8).contains(n))
                .ok_or_else(|| Error::InvalidArgument(format!("unknown wavelet filter `{name}`")))?,
        };
        Ok(Self::daubechies(moments))
    }

    /// The Daubechies filter with `n ∈ [1, 8]` vanishing moments.
    pub fn daubechies(n: u32) -> Self {
        let low: Vec<f64> = match n {
            1 => DB1.to_vec(),
            2 => DB2.to_vec(),
            3 => DB3.to_vec(),
            4 => DB4.to_vec(),
            5 => DB5.to_vec(),
            6 => DB6.to_vec(),
            7 => DB7.to_vec(),
            8 => DB8.to_vec(),
            _ => panic!("Daubechies filters are shipped for 1..=8 moments, got {n}"),
        };
        let len = low.len();
        let high = (0..len)
            .map(|i| {
                if i % 2 == 0 {
                    low[len - 1 - i]
                } else {
                    -low[len - 1 - i]
                }
            })
            .collect();
        let radius = (2 * n - 1) as f64 / 2.0;
        WaveletFilter {
            name: format!("db{n}"),
            low,
            high,
            vanishing_moments: n,
            support_radius_log2: radius.log2().ceil().max(0.0) as u32,
        }
    }

    pub fn len(&self) -> usize {
        self.low.len()
    }

    pub fn is_empty(&self) -> bool {
        self.low.is_empty()
    }

    /// Offset between the filter index `n` of a detail coefficient and the
    /// cube `k` holding the centre of its support.
    pub fn center_shift(&self) -> usize {
        self.len() / 2 - 1
    }
}
