//! File formats: signals as CSV or `MFSG` binary, coefficient and leader
//! pyramids and dyadic cubes as NDJSON.
//!
//! Pyramid NDJSON is a header line, one coarse record `{"k":[..],"C":_}` and
//! detail records `{"i":_,"j":_,"k":[..],"c":_}`. Detail records that are
//! absent read as zero. Leader files use `"dp"` in place of `"c"` and `i = 0`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::error::{Error, Result};
use crate::index::Index;
use crate::leaders::LeaderPyramid;
use crate::wavelet::{unflatten, CoefficientPyramid, Signal, NORMALIZATION};

/// Magic bytes opening a binary signal.
pub const SIGNAL_MAGIC: &[u8; 4] = b"MFSG";
/// Magic, `d`, `J` and a reserved word, all little-endian.
pub const SIGNAL_HEADER_LEN: usize = 16;

fn parse_err(location: impl Into<String>, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.to_string(),
    }
}

fn io_err(e: std::io::Error) -> Error {
    parse_err("stream", e)
}

/// Binary signals are recognised by their magic; anything else is read as
/// CSV with one sample per line in dimension `d`.
pub fn read_signal(bytes: &[u8], d: usize) -> Result<Signal> {
    if bytes.starts_with(SIGNAL_MAGIC) {
        read_signal_binary(bytes)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|e| parse_err("signal", e))?;
        read_signal_csv(text, d)
    }
}

/// Blank lines and lines starting with `#` are skipped.
pub fn read_signal_csv(text: &str, d: usize) -> Result<Signal> {
    let mut samples = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() || field.starts_with('#') {
            continue;
        }
        let v: f64 = field.parse().map_err(|e| parse_err(format!("line {}", n + 1), e))?;
        if !v.is_finite() {
            return Err(parse_err(format!("line {}", n + 1), "sample is not finite"));
        }
        samples.push(v);
    }
    Signal::new(d, samples)
}

pub fn write_signal_csv<W: Write>(signal: &Signal, mut w: W) -> Result<()> {
    for v in &signal.samples {
        writeln!(w, "{v}").map_err(io_err)?;
    }
    Ok(())
}

pub fn read_signal_binary(bytes: &[u8]) -> Result<Signal> {
    if bytes.len() < SIGNAL_HEADER_LEN || !bytes.starts_with(SIGNAL_MAGIC) {
        return Err(parse_err("header", "missing MFSG header"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let (d, j) = (word(4) as usize, word(8));
    let body = &bytes[SIGNAL_HEADER_LEN..];
    if !body.len().is_multiple_of(8) {
        return Err(parse_err(
            "body",
            format!("{} bytes is not a whole number of f64", body.len()),
        ));
    }
    let samples: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let signal = Signal::new(d, samples)?;
    if signal.j != j {
        return Err(parse_err(
            "header",
            format!("header J = {j}, body holds J = {}", signal.j),
        ));
    }
    Ok(signal)
}

pub fn write_signal_binary<W: Write>(signal: &Signal, mut w: W) -> Result<()> {
    w.write_all(SIGNAL_MAGIC).map_err(io_err)?;
    for word in [signal.d as u32, signal.j, 0] {
        w.write_all(&word.to_le_bytes()).map_err(io_err)?;
    }
    for v in &signal.samples {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PyramidHeader {
    kind: String,
    d: usize,
    #[serde(rename = "J")]
    j: u32,
    filter: String,
    normalization: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CoarseRecord {
    k: Vec<u64>,
    #[serde(rename = "C")]
    c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DetailRecord {
    i: u8,
    j: u32,
    k: Vec<u64>,
    c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LeaderHeader {
    kind: String,
    d: usize,
    p: Index,
    #[serde(rename = "J_trunc")]
    j_trunc: u32,
    guard: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LeaderRecord {
    i: u8,
    j: u32,
    k: Vec<u64>,
    dp: f64,
}

fn write_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(|e| parse_err("output", e))?;
    w.write_all(b"\n").map_err(io_err)
}

fn position(flat: usize, j: u32, d: usize) -> Vec<u64> {
    unflatten(flat, 1 << j, d).into_iter().map(|c| c as u64).collect()
}

/// Every coefficient is written, zeros included, in scale then node order.
pub fn write_pyramid_ndjson<W: Write>(pyr: &CoefficientPyramid, mut w: W) -> Result<()> {
    let header = PyramidHeader {
        kind: "pyramid".into(),
        d: pyr.d,
        j: pyr.j,
        filter: pyr.filter.clone(),
        normalization: NORMALIZATION.into(),
    };
    write_line(&mut w, &header)?;
    write_line(
        &mut w,
        &CoarseRecord {
            k: vec![0; pyr.d],
            c: pyr.coarse,
        },
    )?;
    let per = pyr.orientations();
    for (j, level) in pyr.detail.iter().enumerate() {
        for (slot, &c) in level.iter().enumerate() {
            let rec = DetailRecord {
                i: (slot % per + 1) as u8,
                j: j as u32,
                k: position(slot / per, j as u32, pyr.d),
                c,
            };
            write_line(&mut w, &rec)?;
        }
    }
    Ok(())
}

/// Yields `(line number, text)` for non-blank lines.
fn records<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().filter_map(|(n, line)| match line {
        Ok(t) if t.trim().is_empty() => None,
        Ok(t) => Some(Ok((n + 1, t))),
        Err(e) => Some(Err(parse_err(format!("line {}", n + 1), e))),
    })
}

fn parse_line<T: for<'de> Deserialize<'de>>(n: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("line {n}"), e))
}

fn check_position(n: usize, j: u32, k: &[u64], d: usize, levels: u32) -> Result<()> {
    if j >= levels {
        return Err(parse_err(format!("line {n}"), format!("scale {j} outside 0..{levels}")));
    }
    if k.len() != d || k.iter().any(|&c| c >> j != 0) {
        return Err(parse_err(
            format!("line {n}"),
            format!("position {k:?} invalid at scale {j}"),
        ));
    }
    Ok(())
}

pub fn read_pyramid_ndjson<R: BufRead>(r: R) -> Result<CoefficientPyramid> {
    let mut lines = records(r);
    let (n, text) = lines
        .next()
        .ok_or_else(|| parse_err("line 1", "empty pyramid file"))??;
    let header: PyramidHeader = parse_line(n, &text)?;
    if header.kind != "pyramid" {
        return Err(parse_err(
            format!("line {n}"),
            format!("expected kind \"pyramid\", found {:?}", header.kind),
        ));
    }
    if header.normalization != NORMALIZATION {
        return Err(parse_err(
            format!("line {n}"),
            format!("unsupported normalization {:?}", header.normalization),
        ));
    }
    let mut pyr = CoefficientPyramid::zeros(header.d, header.j, &header.filter)?;
    for line in lines {
        let (n, text) = line?;
        let value: serde_json::Value = parse_line(n, &text)?;
        if value.get("C").is_some() {
            let rec: CoarseRecord = parse_line(n, &text)?;
            pyr.coarse = rec.c;
        } else {
            let rec: DetailRecord = parse_line(n, &text)?;
            check_position(n, rec.j, &rec.k, pyr.d, pyr.j)?;
            if rec.i == 0 || rec.i as usize > pyr.orientations() {
                return Err(parse_err(format!("line {n}"), format!("orientation {} invalid", rec.i)));
            }
            pyr.set(rec.i, rec.j, &rec.k, rec.c);
        }
    }
    Ok(pyr)
}

pub fn write_leaders_ndjson<W: Write>(lp: &LeaderPyramid, mut w: W) -> Result<()> {
    let header = LeaderHeader {
        kind: "leaders".into(),
        d: lp.d,
        p: lp.p,
        j_trunc: lp.j_trunc,
        guard: lp.guard,
    };
    write_line(&mut w, &header)?;
    for (j, level) in lp.values.iter().enumerate() {
        for (flat, &dp) in level.iter().enumerate() {
            write_line(
                &mut w,
                &LeaderRecord {
                    i: 0,
                    j: j as u32,
                    k: position(flat, j as u32, lp.d),
                    dp,
                },
            )?;
        }
    }
    Ok(())
}

pub fn read_leaders_ndjson<R: BufRead>(r: R) -> Result<LeaderPyramid> {
    let mut lines = records(r);
    let (n, text) = lines.next().ok_or_else(|| parse_err("line 1", "empty leader file"))??;
    let header: LeaderHeader = parse_line(n, &text)?;
    if header.kind != "leaders" || header.guard > header.j_trunc {
        return Err(parse_err(format!("line {n}"), "not a leader header"));
    }
    let levels = header.j_trunc - header.guard + 1;
    let values = (0..levels).map(|j| vec![0.0; 1 << (j as usize * header.d)]).collect();
    let mut lp = LeaderPyramid {
        d: header.d,
        p: header.p,
        j_trunc: header.j_trunc,
        guard: header.guard,
        values,
    };
    for line in lines {
        let (n, text) = line?;
        let rec: LeaderRecord = parse_line(n, &text)?;
        check_position(n, rec.j, &rec.k, lp.d, levels)?;
        let side = 1u64 << rec.j;
        let flat = rec.k.iter().fold(0u64, |acc, &c| acc * side + c);
        lp.values[rec.j as usize][flat as usize] = rec.dp;
    }
    Ok(lp)
}

pub fn write_cubes_ndjson<'a, W: Write>(cubes: impl IntoIterator<Item = &'a DyadicCube>, mut w: W) -> Result<()> {
    cubes.into_iter().try_for_each(|c| write_line(&mut w, c))
}

pub fn read_cubes_ndjson<R: BufRead>(r: R) -> Result<Vec<DyadicCube>> {
    records(r)
        .map(|line| {
            let (n, text) = line?;
            let raw: DyadicCube = parse_line(n, &text)?;
            DyadicCube::new(raw.i, raw.j, raw.k).map_err(|e| parse_err(format!("line {n}"), e))
        })
        .collect()
}
