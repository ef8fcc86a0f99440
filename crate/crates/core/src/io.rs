//! CSV and JSON output.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::field::{DistributionField, PhaseGrid};
use crate::params::ModelParams;

pub const PROFILE_HEADER: [&str; 7] = [
    "p",
    "f_inf",
    "mu_inf",
    "eta_inf",
    "sqrt_mu_inf",
    "log_weight_convex",
    "log_weight_bounded",
];

/// Shortest-roundtrip formatting would also be lossless; the fixed exponent form keeps columns aligned.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_profile_csv<W: Write>(prof: &EquilibriumProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_HEADER)?;
    for j in 0..prof.len() {
        w.write_record([
            fmt(prof.p_grid[j]),
            fmt(prof.f_inf[j]),
            fmt(prof.mu_inf[j]),
            fmt(prof.eta_inf[j]),
            fmt(prof.sqrt_mu_inf[j]),
            fmt(prof.log_weight_convex[j]),
            fmt(prof.log_weight_bounded[j]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns of a profile CSV, in [`PROFILE_HEADER`] order.
pub fn read_profile_csv<R: Read>(input: R) -> Result<[Vec<f64>; 7]> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != PROFILE_HEADER {
        return Err(Error::Parse(format!("unexpected profile header {header:?}")));
    }
    let mut cols: [Vec<f64>; 7] = Default::default();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        for (c, field) in rec.iter().enumerate() {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: bad number {field:?}", n + 1)))?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

/// Snapshot file: `#` header lines with the run metadata, then one row of
/// `f(x_i, p_j)` per spatial node.
pub fn write_snapshot<W: Write>(f: &DistributionField, grid: &PhaseGrid, params: &ModelParams, out: W) -> Result<()> {
    grid.check_shape(&f.values)?;
    let mut out = BufWriter::new(out);
    let (n_x, n_p) = grid.shape();
    writeln!(out, "# t = {}", fmt(f.time))?;
    writeln!(out, "# n_x = {n_x}")?;
    writeln!(out, "# n_p = {n_p}")?;
    writeln!(out, "# p_max = {}", fmt(params.p_max))?;
    writeln!(out, "# kappa = {}", params.kappa())?;
    writeln!(out, "# sigma = {}", params.sigma())?;
    writeln!(out, "# theta = {}", fmt(params.theta))?;
    for row in f.values.rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a snapshot back as `(t, values)`.
pub fn read_snapshot<R: Read>(input: R) -> Result<(f64, Array2<f64>)> {
    let mut t = None;
    let mut n_x = None;
    let mut n_p = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for line in BufReader::new(input).lines() {
        let line = line?;
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                let v = v.trim();
                let bad = || Error::Parse(format!("bad snapshot header line {line:?}"));
                match k.trim() {
                    "t" => t = Some(v.parse::<f64>().map_err(|_| bad())?),
                    "n_x" => n_x = Some(v.parse::<usize>().map_err(|_| bad())?),
                    "n_p" => n_p = Some(v.parse::<usize>().map_err(|_| bad())?),
                    _ => {}
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        for field in line.split(',') {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {field:?} in snapshot")))?,
            );
        }
        rows += 1;
    }
    let (t, n_x, n_p) = match (t, n_x, n_p) {
        (Some(t), Some(a), Some(b)) => (t, a, b),
        _ => return Err(Error::Parse("snapshot header is missing t, n_x or n_p".into())),
    };
    if rows != n_x || data.len() != n_x * n_p {
        return Err(Error::Parse(format!(
            "snapshot has {rows} rows and {} values, expected {n_x} x {n_p}",
            data.len()
        )));
    }
    let values = Array2::from_shape_vec((n_x, n_p), data).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((t, values))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
