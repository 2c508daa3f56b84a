//! Trajectory CSV output.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::flow::TrajectorySample;

pub const CSV_HEADER: [&str; 10] = [
    "t",
    "norm2_mud",
    "gen_scalar",
    "scal",
    "norm2_H",
    "jacobi_res",
    "dH_res",
    "dstarH_norm",
    "ell",
    "step_size",
];

// `Display` for f64 is the shortest string that parses back to the same bits,
// always with '.' and never locale-dependent.
fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn write_trajectory_csv<W: Write>(trajectory: &[TrajectorySample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for s in trajectory {
        w.write_record([
            fmt(s.t),
            fmt(s.norm2_mud),
            fmt(s.gen_scalar),
            fmt(s.scal),
            fmt(s.norm2_h),
            fmt(s.jacobi_residual),
            fmt(s.dh_residual),
            fmt(s.dstar_h_norm),
            s.ell.map(fmt).unwrap_or_default(),
            fmt(s.step_size),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_trajectory_csv(trajectory: &[TrajectorySample], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trajectory_csv(trajectory, std::io::BufWriter::new(file))
}

/// Parsed CSV row; `ell` is `None` for unnormalized runs.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub values: [f64; 9],
    pub ell: Option<f64>,
}

impl CsvRow {
    pub fn t(&self) -> f64 {
        self.values[0]
    }

    pub fn norm2_mud(&self) -> f64 {
        self.values[1]
    }
}

/// Reads back a file written by [`emit_trajectory_csv`].
pub fn read_trajectory_csv(path: &Path) -> Result<(Vec<String>, Vec<CsvRow>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| {
                crate::Error::Domain(format!("column {i}: '{}' is not a number", &rec[i]))
            })
        };
        let mut values = [0.0; 9];
        for (slot, col) in [0, 1, 2, 3, 4, 5, 6, 7, 9].into_iter().enumerate() {
            values[slot] = parse(col)?;
        }
        let ell = if rec[8].is_empty() { None } else { Some(parse(8)?) };
        rows.push(CsvRow { values, ell });
    }
    Ok((header, rows))
}
