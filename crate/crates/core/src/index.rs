//! Integrability / summability indices in `[1, ∞]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exponent `p ∈ [1, ∞]`. Infinity is stored as `f64::INFINITY`, so
/// expressions such as `d / p` evaluate to `0` without special-casing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Index(f64);

impl Index {
    pub const ONE: Index = Index(1.0);
    pub const TWO: Index = Index(2.0);
    pub const INFINITY: Index = Index(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 1.0 {
            return Err(Error::OutOfDomain(format!("index must lie in [1, inf], got {value}")));
        }
        Ok(Index(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1 / p`, zero for `p = ∞`.
    pub fn recip(self) -> f64 {
        1.0 / self.0
    }

    /// ℓ^p norm of the absolute values in `values`.
    pub fn norm<I: IntoIterator<Item = f64>>(self, values: I) -> f64 {
        if self.is_infinite() {
            values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
        } else {
            let p = self.0;
            let sum: f64 = values.into_iter().map(|v| v.abs().powf(p)).sum();
            sum.powf(1.0 / p)
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Index {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "inf" | "infinity" | "∞" => Ok(Index::INFINITY),
            _ => {
                let v: f64 = t.parse().map_err(|_| Error::Parse {
                    location: "index".into(),
                    message: format!("cannot parse `{s}` as an index"),
                })?;
                Index::new(v)
            }
        }
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Index::new(v),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}
