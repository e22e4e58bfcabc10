//! Analysis configuration: a TOML file merged with command-line flags, flags
//! taking precedence, then resolved against defaults and validated.

use std::path::{Path, PathBuf};

use leaderscope::admissible::DEFAULT_BOYD_SCALE;
use leaderscope::leaders::DEFAULT_GUARD;
use leaderscope::wavelet::DEFAULT_FILTER;
use leaderscope::{AdmissibleFamily, AdmissibleSequence, Index, SequenceModel, SurrogateConfig, WaveletFilter};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol_slope: Option<f64>,
    pub z: Option<f64>,
    pub min_points: Option<usize>,
    pub coarse_skip: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleRange {
    pub first: u32,
    pub last: u32,
}

/// Every field is optional so that file and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub sigma: Option<SequenceModel>,
    /// Modulation `m` of the family `γ^{(h)}_j = 2^{jh} m_j`.
    pub family: Option<SequenceModel>,
    pub p: Option<Index>,
    pub q: Option<Index>,
    pub r: Option<Index>,
    pub s: Option<Index>,
    pub filter: Option<String>,
    pub guard: Option<u32>,
    pub scales: Option<ScaleRange>,
    #[serde(default)]
    pub tolerance: Tolerances,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| {
            let location = e
                .span()
                .map(|span| {
                    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}: ")
                })
                .unwrap_or_default();
            CliError::config(format!("{location}{}", e.message()))
        })
    }

    /// Field-wise overlay: values present in `flags` win.
    pub fn overlay(self, flags: AnalysisConfig) -> AnalysisConfig {
        let t = flags.tolerance;
        AnalysisConfig {
            sigma: flags.sigma.or(self.sigma),
            family: flags.family.or(self.family),
            p: flags.p.or(self.p),
            q: flags.q.or(self.q),
            r: flags.r.or(self.r),
            s: flags.s.or(self.s),
            filter: flags.filter.or(self.filter),
            guard: flags.guard.or(self.guard),
            scales: flags.scales.or(self.scales),
            tolerance: Tolerances {
                tol_slope: t.tol_slope.or(self.tolerance.tol_slope),
                z: t.z.or(self.tolerance.z),
                min_points: t.min_points.or(self.tolerance.min_points),
                coarse_skip: t.coarse_skip.or(self.tolerance.coarse_skip),
            },
            seed: flags.seed.or(self.seed),
            output: flags.output.or(self.output),
            csv: flags.csv.or(self.csv),
        }
    }

    pub fn resolve(&self) -> CliResult<Settings> {
        let sigma = self
            .sigma
            .clone()
            .map(|m| AdmissibleSequence::try_from(m).map_err(|e| CliError::field("sigma", e)))
            .transpose()?;
        let modulation = match self.family.clone() {
            Some(m) => AdmissibleSequence::try_from(m).map_err(|e| CliError::field("family", e))?,
            None => AdmissibleSequence::power(0.0).expect("constant sequence"),
        };
        let filter_name = self.filter.clone().unwrap_or_else(|| DEFAULT_FILTER.to_string());
        let filter = WaveletFilter::by_name(&filter_name).map_err(|e| CliError::field("filter", e))?;
        let defaults = SurrogateConfig::default();
        let t = self.tolerance;
        let surrogate = SurrogateConfig {
            tol_slope: t.tol_slope.unwrap_or(defaults.tol_slope),
            z: t.z.unwrap_or(defaults.z),
            min_points: t.min_points.unwrap_or(defaults.min_points),
            coarse_skip: t.coarse_skip.unwrap_or(defaults.coarse_skip),
        };
        if !(surrogate.tol_slope.is_finite() && surrogate.z.is_finite() && surrogate.z >= 0.0) {
            return Err(CliError::config(
                "invalid `tolerance`: tol_slope must be finite and z non-negative",
            ));
        }
        if surrogate.min_points < 2 {
            return Err(CliError::config(
                "invalid `tolerance.min_points`: at least 2 points are needed",
            ));
        }
        if let Some(range) = self.scales {
            if range.first > range.last {
                return Err(CliError::config(format!(
                    "invalid `scales`: first = {} exceeds last = {}",
                    range.first, range.last
                )));
            }
        }
        let p = self.p.unwrap_or(Index::INFINITY);
        let q = self.q.unwrap_or(Index::INFINITY);
        Ok(Settings {
            sigma,
            family: AdmissibleFamily::new(modulation, p, q),
            p,
            q,
            r: self.r.unwrap_or(Index::TWO),
            s: self.s.unwrap_or(Index::TWO),
            filter,
            guard: self.guard.unwrap_or(DEFAULT_GUARD),
            scales: self.scales,
            surrogate,
            seed: self.seed.unwrap_or(0),
        })
    }
}

/// Validated configuration with defaults filled in.
#[derive(Debug, Clone)]
pub struct Settings {
    pub sigma: Option<AdmissibleSequence>,
    pub family: AdmissibleFamily,
    pub p: Index,
    pub q: Index,
    pub r: Index,
    pub s: Index,
    pub filter: WaveletFilter,
    pub guard: u32,
    pub scales: Option<ScaleRange>,
    pub surrogate: SurrogateConfig,
    pub seed: u64,
}

impl Settings {
    pub fn require_sigma(&self) -> CliResult<&AdmissibleSequence> {
        self.sigma
            .as_ref()
            .ok_or_else(|| CliError::config("missing `sigma` (flag --sigma or config key)"))
    }

    /// Refuses filters whose vanishing moments do not exceed `ceil(s̄(σ))`.
    pub fn check_filter_for(&self, sigma: &AdmissibleSequence) -> CliResult<()> {
        let bi = leaderscope::admissible::boyd_indices(sigma, DEFAULT_BOYD_SCALE)?;
        let needed = bi.upper.ceil().max(0.0) as u32;
        if self.filter.vanishing_moments <= needed {
            return Err(CliError::precondition(format!(
                "filter {} has {} vanishing moments, more than {needed} are needed for s̄(σ) = {:.4}",
                self.filter.name, self.filter.vanishing_moments, bi.upper
            )));
        }
        Ok(())
    }
}

/// A sequence descriptor: JSON (`{"kind":"powerlog","s":0.5,"b":1}`) or the
/// shorthands `powerlog:s[,b]`, `power:s` and `table:v0,v1,...`.
pub fn parse_sequence(field: &str, text: &str) -> CliResult<SequenceModel> {
    let text = text.trim();
    let bad = |msg: String| CliError::config(format!("invalid `{field}`: {msg}"));
    let model = if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))?
    } else {
        let (kind, args) = text
            .split_once(':')
            .ok_or_else(|| bad(format!("expected kind:args, got {text:?}")))?;
        let numbers = args
            .split(',')
            .enumerate()
            .map(|(i, a)| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("argument {i} ({a:?}): {e}")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        match (kind.trim(), numbers.as_slice()) {
            ("powerlog", [s]) | ("power", [s]) => SequenceModel::PowerLog { s: *s, b: 0.0 },
            ("powerlog", [s, b]) => SequenceModel::PowerLog { s: *s, b: *b },
            ("table", values) => SequenceModel::Tabulated {
                values: values.to_vec(),
            },
            (k, n) => return Err(bad(format!("unknown form {k} with {} arguments", n.len()))),
        }
    };
    AdmissibleSequence::try_from(model.clone()).map_err(|e| CliError::field(field, e))?;
    Ok(model)
}

pub fn parse_index(field: &str, text: &str) -> CliResult<Index> {
    text.parse::<Index>()
        .map_err(|e| CliError::config(format!("invalid `{field}`: {e}")))
}

/// `a:b` or `a..=b`.
pub fn parse_scales(text: &str) -> CliResult<ScaleRange> {
    let (a, b) = text
        .split_once("..=")
        .or_else(|| text.split_once(':'))
        .ok_or_else(|| CliError::config(format!("invalid `scales`: expected first:last, got {text:?}")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<u32>()
            .map_err(|e| CliError::config(format!("invalid `scales`: {v:?}: {e}")))
    };
    Ok(ScaleRange {
        first: parse(a)?,
        last: parse(b)?,
    })
}

/// Comma-separated coordinates.
pub fn parse_point(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|c| {
            let v: f64 = c
                .trim()
                .parse()
                .map_err(|e| CliError::config(format!("invalid `x0` coordinate {c:?}: {e}")))?;
            if !v.is_finite() {
                return Err(CliError::config(format!("invalid `x0` coordinate {c:?}")));
            }
            Ok(v)
        })
        .collect()
}
