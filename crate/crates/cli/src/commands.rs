//! Subcommand implementations. Each returns the JSON result document, or
//! writes its file output directly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use leaderscope::admissible::{boyd_envelope, boyd_indices};
use leaderscope::io::{
    read_pyramid_ndjson, read_signal, write_leaders_ndjson, write_pyramid_ndjson, write_signal_binary,
};
use leaderscope::spaces::{
    besov_norm, direct_membership, leader_criterion, log_corrected_criterion, oscillation_norm, xu_check,
    MembershipVerdict,
};
use leaderscope::spectrum::{
    empirical_spectrum, pointwise_exponent, predicted_spectrum, spectrum_interval, ExponentConfig, ExponentEstimate,
    SpectrumEstimate,
};
use leaderscope::synth::{gen_cone, gen_cusp, gen_random_besov, gen_saturating};
use leaderscope::wavelet::NORMALIZATION;
use leaderscope::{
    decompose, leader_pyramid, reconstruct, CoefficientPyramid, RatioFunction, SaturatingSpec, Signal, WaveletFilter,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{AnalyzeArgs, BoydArgs, Criterion, DecomposeArgs, LeadersArgs, SpectrumArgs, SynthArgs, SynthKind};
use crate::config::{parse_point, AnalysisConfig, Settings};
use crate::error::{CliError, CliResult};

const SIGNAL_MAGIC: &[u8] = b"MFSG";
const DEFAULT_GRID_POINTS: usize = 21;

/// Echo of the effective configuration. Contains no timestamps, so equal
/// inputs give byte-identical documents.
fn provenance(cfg: &AnalysisConfig, settings: &Settings) -> Value {
    json!({
        "tool": "leaderscope",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "filter": settings.filter.name,
        "normalization": NORMALIZATION,
        "guard": settings.guard,
    })
}

fn create(path: &Path) -> CliResult<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn with_path(path: &Path, e: leaderscope::Error) -> CliError {
    let mut err = CliError::from(e);
    err.message = format!("{}: {}", path.display(), err.message);
    err
}

/// Writes to `out`, or stdout when absent.
fn emit(out: Option<&PathBuf>, write: impl FnOnce(&mut dyn Write) -> leaderscope::Result<()>) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write(&mut w)?;
            w.flush()
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            Ok(())
        }
    }
}

pub enum Input {
    Signal(Signal),
    Pyramid(CoefficientPyramid),
}

/// Binary signals by magic, pyramids by a leading JSON object, CSV otherwise.
pub fn read_input(path: &Path, dim: usize) -> CliResult<Input> {
    let bytes = read_bytes(path)?;
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace()).copied();
    if bytes.starts_with(SIGNAL_MAGIC) || first != Some(b'{') {
        return read_signal(&bytes, dim)
            .map(Input::Signal)
            .map_err(|e| with_path(path, e));
    }
    read_pyramid_ndjson(bytes.as_slice())
        .map(Input::Pyramid)
        .map_err(|e| with_path(path, e))
}

fn read_pyramid(path: &Path) -> CliResult<CoefficientPyramid> {
    let bytes = read_bytes(path)?;
    read_pyramid_ndjson(bytes.as_slice()).map_err(|e| with_path(path, e))
}

pub fn boyd(args: &BoydArgs) -> CliResult<Value> {
    let cfg = args.common.config()?;
    let settings = cfg.resolve()?;
    let sigma = settings.require_sigma()?;
    let bi = boyd_indices(sigma, args.scale)?;
    Ok(json!({
        "command": "boyd",
        "sigma": sigma,
        "lower": bi.lower,
        "upper": bi.upper,
        "scale": bi.scale,
        "envelope": boyd_envelope(sigma.log_power(), args.scale),
        "provenance": provenance(&cfg, &settings),
    }))
}

pub fn synth(args: &SynthArgs) -> CliResult<Value> {
    let cfg = args.common.config()?;
    let settings = cfg.resolve()?;
    let x0 = match &args.x0 {
        Some(t) => parse_point(t)?,
        None => vec![0.5; args.dim],
    };
    if x0.len() != args.dim {
        return Err(CliError::config(format!(
            "`x0` has {} coordinates, --dim is {}",
            x0.len(),
            args.dim
        )));
    }
    let mut summary = json!({
        "command": "synth",
        "kind": format!("{:?}", args.kind).to_lowercase(),
        "out": args.out,
        "d": args.dim,
        "J": args.j,
    });
    let pyramid = match args.kind {
        SynthKind::Cusp => {
            let signal = gen_cusp(&x0, args.u, args.j)?;
            emit(Some(&args.out), |w| write_signal_binary(&signal, w))?;
            summary["x0"] = json!(x0);
            summary["u"] = json!(args.u);
            None
        }
        SynthKind::Saturating => {
            let sigma = settings.require_sigma()?.clone();
            let spec = SaturatingSpec::new(sigma, args.dim, settings.r, settings.s, args.m0, args.n, args.j)?;
            summary["a0"] = json!(spec.a0());
            Some(gen_saturating(&spec)?)
        }
        SynthKind::Cone => {
            let sigma = settings.require_sigma()?.clone();
            let rf = RatioFunction::new(sigma, settings.family.clone(), args.dim, settings.r)?;
            let n = u32::try_from(args.n).map_err(|_| CliError::config("`n` is too large"))?;
            let cone = gen_cone(&x0, n, &rf, settings.s, args.j)?;
            summary["x0"] = json!(x0);
            summary["exponent"] = json!(cone.exponent);
            Some(cone.pyramid)
        }
        SynthKind::Random => {
            let sigma = settings.require_sigma()?;
            summary["seed"] = json!(settings.seed);
            Some(gen_random_besov(
                sigma,
                args.dim,
                settings.r,
                settings.s,
                args.j,
                settings.seed,
            )?)
        }
    };
    if let Some(mut pyr) = pyramid {
        pyr.filter = settings.filter.name.clone();
        if let Some(sigma) = &settings.sigma {
            summary["besov_norm"] = json!(besov_norm(&pyr, sigma, settings.r, settings.s));
            summary["scales"] = json!([0, args.j - 1]);
        }
        emit(Some(&args.out), |w| write_pyramid_ndjson(&pyr, w))?;
    }
    summary["provenance"] = provenance(&cfg, &settings);
    Ok(summary)
}

pub fn decompose_cmd(args: &DecomposeArgs) -> CliResult<()> {
    let settings = args.common.config()?.resolve()?;
    let signal = match read_input(&args.input, args.dim)? {
        Input::Signal(s) => s,
        Input::Pyramid(_) => {
            return Err(CliError::input(format!(
                "{}: expected a signal file",
                args.input.display()
            )))
        }
    };
    let pyr = decompose(&signal, &settings.filter)?;
    emit(args.out.as_ref(), |w| write_pyramid_ndjson(&pyr, w))
}

pub fn leaders(args: &LeadersArgs) -> CliResult<()> {
    let settings = args.common.config()?.resolve()?;
    let pyr = read_pyramid(&args.input)?;
    let lp = leader_pyramid(&pyr, settings.p, settings.guard)?;
    emit(args.out.as_ref(), |w| write_leaders_ndjson(&lp, w))
}

#[derive(Serialize)]
struct PointResult {
    x0: Vec<f64>,
    verdict: MembershipVerdict,
    exponent: ExponentEstimate,
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult<Value> {
    let cfg = args.common.config()?;
    let settings = cfg.resolve()?;
    let sigma = settings.require_sigma()?;
    let points = args.x0.iter().map(|t| parse_point(t)).collect::<CliResult<Vec<_>>>()?;
    let input = read_input(&args.input, args.dim)?;
    let (input_kind, pyr, signal) = match input {
        Input::Signal(s) => {
            settings.check_filter_for(sigma)?;
            ("signal", decompose(&s, &settings.filter)?, Some(s))
        }
        Input::Pyramid(p) => ("pyramid", p, None),
    };
    let filter = WaveletFilter::by_name(&pyr.filter).map_err(|e| with_path(&args.input, e))?;
    let needs_signal = matches!(args.criterion, Criterion::Direct | Criterion::Log);
    let signal = match signal {
        Some(s) => Some(s),
        None if needs_signal => Some(reconstruct(&pyr, &filter)?),
        None => None,
    };
    for x0 in &points {
        if x0.len() != pyr.d {
            return Err(CliError::config(format!(
                "`x0` {x0:?} has {} coordinates, input is {}-dimensional",
                x0.len(),
                pyr.d
            )));
        }
    }
    let lp = leader_pyramid(&pyr, settings.p, settings.guard)?;
    let exp_cfg = ExponentConfig {
        coarse_skip: settings.surrogate.coarse_skip,
        ..ExponentConfig::default()
    };
    let results = points
        .par_iter()
        .map(|x0| {
            let cfg = &settings.surrogate;
            let verdict = match args.criterion {
                Criterion::Leader => leader_criterion(&lp, x0, sigma, settings.q, cfg)?,
                Criterion::Xu => xu_check(&pyr, x0, args.eta, settings.p, settings.q, args.c_star, cfg)?,
                Criterion::Direct => {
                    direct_membership(signal.as_ref().expect("signal"), x0, sigma, settings.p, settings.q, cfg)?
                }
                Criterion::Log => {
                    log_corrected_criterion(signal.as_ref().expect("signal"), x0, sigma, settings.p, settings.q, cfg)?
                }
            };
            let exponent = pointwise_exponent(&lp, x0, &settings.family, &exp_cfg)?;
            Ok(PointResult {
                x0: x0.clone(),
                verdict,
                exponent,
            })
        })
        .collect::<leaderscope::Result<Vec<_>>>()?;
    let norms = json!({
        "besov": besov_norm(&pyr, sigma, settings.r, settings.q),
        "oscillation": oscillation_norm(&pyr, sigma, settings.p, settings.r, settings.q, settings.guard)?,
        "besov_scales": [0, pyr.j - 1],
        "oscillation_scales": [0, lp.j_max()],
    });
    Ok(json!({
        "command": "analyze",
        "criterion": format!("{:?}", args.criterion).to_lowercase(),
        "input": {"kind": input_kind, "d": pyr.d, "J": pyr.j, "filter": pyr.filter},
        "points": results,
        "norms": norms,
        "provenance": provenance(&cfg, &settings),
    }))
}

fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::config(format!("invalid `h_grid`: expected lo:hi:n, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n < 2 {
        return Err(bad());
    }
    Ok(linspace(lo, hi, n))
}

/// `n` points from `lo` to `hi`, both hit exactly.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|t| {
            if t + 1 == n {
                hi
            } else {
                lo + (hi - lo) * t as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn spectrum_csv(estimate: &SpectrumEstimate, predicted: &SpectrumEstimate) -> String {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("h,D,predicted_D\n");
    for ((h, d), p) in estimate.h_grid.iter().zip(&estimate.d_values).zip(&predicted.d_values) {
        out.push_str(&format!("{h},{},{}\n", cell(*d), cell(*p)));
    }
    out
}

pub fn spectrum(args: &SpectrumArgs) -> CliResult<Value> {
    let cfg = args.common.config()?;
    let settings = cfg.resolve()?;
    let sigma = settings.require_sigma()?.clone();
    let pyr = args.input.as_ref().map(|p| read_pyramid(p)).transpose()?;
    let d = pyr.as_ref().map_or(args.dim, |p| p.d);
    let rf = RatioFunction::new(sigma, settings.family.clone(), d, settings.r)?;
    let grid = match &args.h_grid {
        Some(t) => parse_grid(t)?,
        None => {
            let (lo, hi) = spectrum_interval(&rf)?;
            linspace(lo, hi, DEFAULT_GRID_POINTS)
        }
    };
    let predicted = predicted_spectrum(&rf, &grid)?;
    let estimate = if args.empirical {
        let pyr = pyr
            .as_ref()
            .ok_or_else(|| CliError::config("--empirical needs a pyramid file"))?;
        let lp = leader_pyramid(pyr, settings.p, settings.guard)?;
        let (first, last) = match settings.scales {
            Some(range) => (range.first, range.last),
            None => (settings.surrogate.coarse_skip, lp.j_max()),
        };
        if last > lp.j_max() {
            return Err(CliError::config(format!(
                "invalid `scales`: last = {last} exceeds the finest leader scale {} after the guard",
                lp.j_max()
            )));
        }
        empirical_spectrum(&lp, &settings.family, &grid, first..=last, args.half_bin)?
    } else {
        predicted.clone()
    };
    if let Some(path) = &cfg.csv {
        fs::write(path, spectrum_csv(&estimate, &predicted))
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut doc = serde_json::to_value(&estimate).expect("serializable estimate");
    doc["command"] = json!("spectrum");
    doc["predicted_D"] = json!(predicted.d_values);
    doc["predicted_interval"] = json!(predicted.interval);
    doc["provenance"] = provenance(&cfg, &settings);
    Ok(doc)
}
