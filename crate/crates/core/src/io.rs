//! CSV and JSON file formats.
//!
//! * trajectories: header `t,x,y`, one row per sample;
//! * moment curves: header `t_s,m2,m4,n_pairs`;
//! * reports: pretty-printed JSON.
//!
//! Numbers are written in plain decimal notation with the shortest digits
//! that round-trip exactly. Files are written only after validation succeeds.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{LagGrid, MomentCurve};
use crate::trajectory::{validate_columns, Trajectory};

pub const TRAJECTORY_HEADER: [&str; 3] = ["t", "x", "y"];
pub const MOMENTS_HEADER: [&str; 4] = ["t_s", "m2", "m4", "n_pairs"];

/// Relative tolerance on the spacing of the time column.
pub const TIME_GRID_TOLERANCE: f64 = 1e-9;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let found = reader
        .headers()
        .map_err(|e| format_error(path, format!("unreadable header: {e}")))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(format_error(
            path,
            format!("malformed header: expected `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| format_error(path, format!("row {}: {e}", i + 1))))
        .collect()
}

fn parse_cell(path: &Path, row: usize, column: &str, cell: &str) -> Result<f64> {
    let value: f64 = cell
        .parse()
        .map_err(|_| format_error(path, format!("row {row}, column {column}: `{cell}` is not a number")))?;
    if !value.is_finite() {
        return Err(format_error(path, format!("row {row}, column {column}: non-finite value `{cell}`")));
    }
    Ok(value)
}

/// Reads a trajectory, inferring `dt` from the spacing of the `t` column.
pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let rows = read_rows(path, &TRAJECTORY_HEADER)?;
    let mut ts = Vec::with_capacity(rows.len());
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        ts.push(parse_cell(path, i + 1, "t", &row[0])?);
        xs.push(parse_cell(path, i + 1, "x", &row[1])?);
        ys.push(parse_cell(path, i + 1, "y", &row[2])?);
    }
    if ts.len() < 2 {
        return Err(format_error(path, format!("need at least 2 samples, found {}", ts.len())));
    }
    let dt = ts[1] - ts[0];
    if dt <= 0.0 {
        return Err(format_error(path, "time column is not strictly increasing"));
    }
    for (i, w) in ts.windows(2).enumerate() {
        let step = w[1] - w[0];
        if step <= 0.0 {
            return Err(format_error(path, format!("time column is not strictly increasing at row {}", i + 2)));
        }
        if (step - dt).abs() > TIME_GRID_TOLERANCE * dt {
            return Err(format_error(
                path,
                format!("non-uniform time grid at row {}: step {step} differs from {dt}", i + 2),
            ));
        }
    }
    Trajectory::new(dt, xs, ys).map_err(|e| format_error(path, e.to_string()))
}

/// Writes raw columns after validating them as a trajectory.
pub fn write_trajectory_columns(path: impl AsRef<Path>, dt: f64, xs: &[f64], ys: &[f64]) -> Result<()> {
    validate_columns(dt, xs, ys)?;
    let mut text = String::with_capacity(xs.len() * 48);
    text.push_str(&TRAJECTORY_HEADER.join(","));
    text.push('\n');
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        let _ = writeln!(text, "{},{},{}", i as f64 * dt, x, y);
    }
    write_text(path.as_ref(), &text)
}

pub fn write_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    write_trajectory_columns(path, traj.dt(), traj.xs(), traj.ys())
}

pub fn write_moments(curve: &MomentCurve, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::new();
    text.push_str(&MOMENTS_HEADER.join(","));
    text.push('\n');
    for (j, t_s) in curve.lags.times().iter().enumerate() {
        let _ = writeln!(text, "{},{},{},{}", t_s, curve.m2[j], curve.m4[j], curve.n_pairs[j]);
    }
    write_text(path.as_ref(), &text)
}

/// Reads a moments CSV; `dt` is needed to rebuild the lag grid.
pub fn read_moments(path: impl AsRef<Path>, dt: f64) -> Result<MomentCurve> {
    let path = path.as_ref();
    let rows = read_rows(path, &MOMENTS_HEADER)?;
    let mut times = Vec::new();
    let mut m2 = Vec::new();
    let mut m4 = Vec::new();
    let mut n_pairs = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        times.push(parse_cell(path, i + 1, "t_s", &row[0])?);
        m2.push(parse_cell(path, i + 1, "m2", &row[1])?);
        m4.push(parse_cell(path, i + 1, "m4", &row[2])?);
        n_pairs.push(
            row[3]
                .parse::<u64>()
                .map_err(|_| format_error(path, format!("row {}: n_pairs `{}` is not a count", i + 1, &row[3])))?,
        );
    }
    let grid = LagGrid::from_times(dt, &times).map_err(|e| format_error(path, e.to_string()))?;
    MomentCurve::new(grid, m2, m4, n_pairs).map_err(|e| format_error(path, e.to_string()))
}

pub fn write_report<T: Serialize>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::validation(format!("cannot encode report: {e}")))?;
    text.push('\n');
    write_text(path.as_ref(), &text)
}

pub fn read_report<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| format_error(path, e.to_string()))
}
