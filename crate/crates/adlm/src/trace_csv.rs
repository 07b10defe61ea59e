//! Iteration traces as CSV. Columns are append-only: `t, rho, r,
//! stationarity, objective, dual_step`, then `x0.., z0.., y0..`, then for
//! localization runs `max_node_residual, rmse, consensus_gradient`.

use std::io::Write;
use std::path::Path;

use adlm_core::algorithms::IterationTrace;
use adlm_core::localization::LocalizationRecord;

use crate::error::{Error, Result};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(x_dim: usize, z_dim: usize, y_dim: usize, localization: bool) -> Vec<String> {
    let mut h: Vec<String> = ["t", "rho", "r", "stationarity", "objective", "dual_step"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for (name, n) in [("x", x_dim), ("z", z_dim), ("y", y_dim)] {
        h.extend((0..n).map(|k| format!("{name}{k}")));
    }
    if localization {
        h.extend(["max_node_residual", "rmse", "consensus_gradient"].map(String::from));
    }
    h
}

pub fn write_trace<W: Write>(out: W, trace: &IterationTrace, extras: Option<&[LocalizationRecord]>) -> Result<()> {
    let first = &trace.records[0];
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(first.x.len(), first.z.len(), first.y.len(), extras.is_some()))?;
    let mut row = Vec::new();
    for (k, rec) in trace.records.iter().enumerate() {
        row.clear();
        row.push(rec.t.to_string());
        for v in [rec.rho, rec.primal_residual, rec.stationarity_norm, rec.objective, rec.dual_step_norm] {
            row.push(format_f64(v));
        }
        row.extend(rec.x.iter().chain(rec.z.iter()).chain(rec.y.iter()).map(|v| format_f64(*v)));
        if let Some(extras) = extras {
            let e = &extras[k];
            row.extend([e.max_node_residual, e.rmse, e.consensus_gradient_norm].map(format_f64));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("trace", e))?;
    Ok(())
}

pub fn write_trace_file(path: &Path, trace: &IterationTrace, extras: Option<&[LocalizationRecord]>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(std::io::BufWriter::new(file), trace, extras)
}

/// Header and numeric rows of a trace file.
pub fn read_trace_file(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::spec(path, format!("line {}", rows.len() + 2), e))?;
        rows.push(row);
    }
    Ok((header, rows))
}
