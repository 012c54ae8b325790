//! CSV traces and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use fixpoint_core::IterationTrace;

use crate::{Error, Result};

pub const CSV_HEADER: &str = "iter,residual_sq,dist_sq,bound,lyapunov,wall_ns";

/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn cell(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        out.push_str(&fmt_f64(v));
    }
}

/// Renders a trace. `bound_override` replaces the trace's own bound column when set;
/// `wall_ns[k]` fills the timing column for row k.
pub fn trace_csv(trace: &IterationTrace, bound_override: Option<&dyn Fn(usize) -> Option<f64>>, wall_ns: Option<&[u64]>) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (row, rec) in trace.records.iter().enumerate() {
        write!(out, "{}", rec.k).unwrap();
        cell(&mut out, rec.residual_sq);
        cell(&mut out, rec.dist_sq);
        let bound = match bound_override {
            Some(f) => f(rec.k),
            None => rec.bound,
        };
        cell(&mut out, bound);
        cell(&mut out, rec.lyapunov);
        out.push(',');
        if let Some(t) = wall_ns.and_then(|w| w.get(row)) {
            write!(out, "{t}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Parsed CSV row; empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub iter: usize,
    pub residual_sq: Option<f64>,
    pub dist_sq: Option<f64>,
    pub bound: Option<f64>,
    pub lyapunov: Option<f64>,
    pub wall_ns: Option<u64>,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Instance("CSV header does not match".into()));
    }
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| Error::Instance(format!("bad number `{s}`")))
        }
    };
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Instance(format!("CSV row has {} fields", f.len())));
            }
            Ok(CsvRow {
                iter: f[0].parse().map_err(|_| Error::Instance(format!("bad index `{}`", f[0])))?,
                residual_sq: opt(f[1])?,
                dist_sq: opt(f[2])?,
                bound: opt(f[3])?,
                lyapunov: opt(f[4])?,
                wall_ns: if f[5].is_empty() {
                    None
                } else {
                    Some(f[5].parse().map_err(|_| Error::Instance(format!("bad time `{}`", f[5])))?)
                },
            })
        })
        .collect()
}
