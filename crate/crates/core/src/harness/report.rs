//! CSV and JSON outputs.
//!
//! Column orders are fixed:
//!
//! * `rates.csv`: `level,scale,err_u,err_v,stderr`
//! * `rate_fit.csv`: `quantity,slope,intercept,half_width`
//! * `trace.csv`: `t,mean_J,stderr,reference`
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! yields exactly the values that were written.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::config::ExperimentConfig;
use super::rate::RateFit;
use super::studies::{LevelError, RateReport, TraceReport, TraceRow};

pub const RATES_FILE: &str = "rates.csv";
pub const RATE_FIT_FILE: &str = "rate_fit.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub level: usize,
    pub scale: f64,
    pub err_u: f64,
    pub err_v: f64,
    pub stderr: f64,
}

impl From<&LevelError> for RateRow {
    fn from(l: &LevelError) -> Self {
        RateRow {
            level: l.level,
            scale: l.scale,
            err_u: l.err_u,
            err_v: l.err_v,
            stderr: l.stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub half_width: f64,
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{other:?}"),
        )),
    }
}

pub fn write_rates<W: Write>(out: W, report: &RateReport) -> Result<()> {
    write_rows(out, report.levels.iter().map(RateRow::from))
}

pub fn read_rates<R: Read>(input: R) -> Result<Vec<RateRow>> {
    read_rows(input)
}

pub fn write_fit<W: Write>(out: W, quantity: &str, fit: &RateFit) -> Result<()> {
    write_rows(
        out,
        [FitRow {
            quantity: quantity.to_string(),
            slope: fit.slope,
            intercept: fit.intercept,
            half_width: fit.half_width,
        }],
    )
}

pub fn read_fit<R: Read>(input: R) -> Result<Vec<FitRow>> {
    read_rows(input)
}

pub fn write_trace<W: Write>(out: W, report: &TraceReport) -> Result<()> {
    write_rows(out, report.rows.iter())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    read_rows(input)
}

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub build: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Manifest {
            command: command.to_string(),
            build: build_id(),
            seed: config.seed,
            config: config.clone(),
            summary: None,
        }
    }
}

/// `name-version`, with `+rev` appended when `STOCHWAVE_BUILD_REV` was set at compile time.
pub fn build_id() -> String {
    let base = concat!(env!("CARGO_PKG_NAME"), "-", env!("CARGO_PKG_VERSION"));
    match option_env!("STOCHWAVE_BUILD_REV") {
        Some(rev) if !rev.is_empty() => format!("{base}+{rev}"),
        _ => base.to_string(),
    }
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let mut f = std::fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    f.write_all(b"\n")?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    Ok(serde_json::from_reader(std::fs::File::open(path)?)?)
}

/// Writes `rates.csv` and `rate_fit.csv` into `dir`.
pub fn save_rate_report(dir: &Path, report: &RateReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_rates(std::fs::File::create(dir.join(RATES_FILE))?, report)?;
    write_fit(
        std::fs::File::create(dir.join(RATE_FIT_FILE))?,
        "err_u+err_v",
        &report.fit,
    )
}

pub fn save_trace_report(dir: &Path, report: &TraceReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_trace(std::fs::File::create(dir.join(TRACE_FILE))?, report)
}

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const FINAL_STATE_FILE: &str = "final_state.csv";

/// `step,t,energy,u_l2,v_l2`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub u_l2: f64,
    pub v_l2: f64,
}

/// `index,u,v`: Galerkin coordinates of the final state, `index` from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub index: usize,
    pub u: f64,
    pub v: f64,
}

pub fn trajectory_rows(
    space: &super::Space,
    states: &[crate::field::State],
    tau: f64,
    drift: &crate::nonlinearity::CubicDrift,
) -> Result<Vec<TrajectoryRow>> {
    states
        .iter()
        .enumerate()
        .map(|(n, x)| {
            Ok(TrajectoryRow {
                step: n,
                t: n as f64 * tau,
                energy: space.energy(x, drift)?,
                u_l2: x.u.l2(),
                v_l2: x.v.l2(),
            })
        })
        .collect()
}

pub fn coefficient_rows(x: &crate::field::State) -> Vec<CoefficientRow> {
    x.u.coeffs()
        .iter()
        .zip(x.v.coeffs())
        .enumerate()
        .map(|(i, (&u, &v))| CoefficientRow { index: i + 1, u, v })
        .collect()
}

pub fn write_trajectory<W: Write>(out: W, rows: &[TrajectoryRow]) -> Result<()> {
    write_rows(out, rows)
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    read_rows(input)
}

pub fn write_coefficients<W: Write>(out: W, rows: &[CoefficientRow]) -> Result<()> {
    write_rows(out, rows)
}

pub fn read_coefficients<R: Read>(input: R) -> Result<Vec<CoefficientRow>> {
    read_rows(input)
}
