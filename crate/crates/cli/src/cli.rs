//! Command-line grammar. Analysis flags mirror the config keys and override
//! them.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_index, parse_scales, parse_sequence, AnalysisConfig, Tolerances};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "leaderscope",
    version,
    about = "Wavelet-leader regularity analysis with generalized smoothness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the Boyd indices of a sequence.
    Boyd(BoydArgs),
    /// Generate a synthetic test function.
    Synth(SynthArgs),
    /// Wavelet-decompose a signal into a pyramid file.
    Decompose(DecomposeArgs),
    /// Compute p-leaders of a pyramid.
    Leaders(LeadersArgs),
    /// Pointwise membership verdicts and exponents.
    Analyze(AnalyzeArgs),
    /// Predicted or histogram multifractal spectrum.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sequence σ: JSON or `powerlog:s,b`, `power:s`, `table:v0,v1,...`.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Family modulation m in γ^(h)_j = 2^{jh} m_j, same syntax as --sigma.
    #[arg(long)]
    pub family: Option<String>,
    /// Leader exponent p in [1, ∞] (`inf` for ∞); default ∞.
    #[arg(long)]
    pub p: Option<String>,
    /// Sequence-space exponent q in [1, ∞]; default ∞.
    #[arg(long)]
    pub q: Option<String>,
    /// Besov integrability r, also the spectrum scaling; default 2.
    #[arg(long)]
    pub r: Option<String>,
    /// Besov summability s; default 2.
    #[arg(long)]
    pub s: Option<String>,
    /// Wavelet filter (`haar`, `db1` to `db8`).
    #[arg(long)]
    pub filter: Option<String>,
    /// Finest scales excluded from leaders; default 2.
    #[arg(long)]
    pub guard: Option<u32>,
    /// Scale range `first:last`.
    #[arg(long)]
    pub scales: Option<String>,
    /// Slope threshold of the q = ∞ membership test; default 0.05.
    #[arg(long)]
    pub tol_slope: Option<f64>,
    /// Width of the inconclusive band in standard errors; default 2.
    #[arg(long)]
    pub z: Option<f64>,
    /// Seed for random synthesis; default 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the JSON result (stdout by default).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write plot-ready CSV, when the command produces it.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl CommonArgs {
    /// The config file overlaid with the flags given on the command line.
    pub fn config(&self) -> CliResult<AnalysisConfig> {
        let file = match &self.config {
            Some(path) => AnalysisConfig::load(path)?,
            None => AnalysisConfig::default(),
        };
        let index = |field: &str, v: &Option<String>| v.as_deref().map(|t| parse_index(field, t)).transpose();
        let flags = AnalysisConfig {
            sigma: self.sigma.as_deref().map(|t| parse_sequence("sigma", t)).transpose()?,
            family: self
                .family
                .as_deref()
                .map(|t| parse_sequence("family", t))
                .transpose()?,
            p: index("p", &self.p)?,
            q: index("q", &self.q)?,
            r: index("r", &self.r)?,
            s: index("s", &self.s)?,
            filter: self.filter.clone(),
            guard: self.guard,
            scales: self.scales.as_deref().map(parse_scales).transpose()?,
            tolerance: Tolerances {
                tol_slope: self.tol_slope,
                z: self.z,
                ..Default::default()
            },
            seed: self.seed,
            output: self.output.clone(),
            csv: self.csv.clone(),
        };
        Ok(file.overlay(flags))
    }
}

#[derive(Debug, Args)]
pub struct BoydArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Estimation scale J; terms up to 4J are evaluated.
    #[arg(long, default_value_t = leaderscope::admissible::DEFAULT_BOYD_SCALE)]
    pub scale: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Saturating,
    Cone,
    Cusp,
    Random,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Output file: pyramid NDJSON, or a binary signal for cusps.
    #[arg(long)]
    pub out: PathBuf,
    /// Finest scale: the output has 2^J samples (or detail scales 0..J) per axis.
    #[arg(long = "J", default_value_t = 12)]
    pub j: u32,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Singular point for cusps and cone functions.
    #[arg(long)]
    pub x0: Option<String>,
    /// Cusp exponent.
    #[arg(long, default_value_t = 0.5)]
    pub u: f64,
    /// Subcube depth for saturating functions.
    #[arg(long, default_value_t = 0)]
    pub m0: u32,
    /// Subcube selector for saturating functions, or the index n of a cone function.
    #[arg(long, default_value_t = 1)]
    pub n: u64,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Signal file: binary `MFSG` or CSV with one sample per line.
    pub input: PathBuf,
    /// Dimension of CSV input.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Pyramid output (stdout by default).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LeadersArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Pyramid NDJSON file.
    pub input: PathBuf,
    /// Leader output (stdout by default).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    Direct,
    Leader,
    Log,
    Xu,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Signal or pyramid file.
    pub input: PathBuf,
    /// Point to analyse, comma-separated coordinates; repeatable.
    #[arg(long = "x0", required = true)]
    pub x0: Vec<String>,
    #[arg(long, value_enum, default_value_t = Criterion::Leader)]
    pub criterion: Criterion,
    /// Dimension of CSV input.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Exponent η of the Xu-space check.
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Radius factor C* of the Xu-space check.
    #[arg(long, default_value_t = 0.25)]
    pub c_star: f64,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Pyramid file; required with --empirical, otherwise only its dimension is used.
    pub input: Option<PathBuf>,
    /// Histogram estimate from the pyramid's leaders instead of the prediction.
    #[arg(long)]
    pub empirical: bool,
    /// Exponent grid `lo:hi:n`; defaults to n = 21 points spanning the predicted interval.
    #[arg(long)]
    pub h_grid: Option<String>,
    /// Half-width of a histogram bin.
    #[arg(long, default_value_t = leaderscope::spectrum::DEFAULT_HALF_BIN)]
    pub half_bin: f64,
    /// Dimension when no pyramid is given.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
}
