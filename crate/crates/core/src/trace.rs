//! Per-iteration records produced by every solver.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::operator::{metric_norm_sq, MetricMatrix};
use crate::point::Point;

/// One iteration of a solve.
///
/// For fixed-point methods `y` is the iterate y_k and `residual` is y_k - T y_k.
/// For proximal methods `x` is x_k = J_A y_{k-1}, `y` is the next query point and
/// `residual` is the resolvent residual y_{k-1} - x_k; record 0 has no residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub k: usize,
    pub y: Point,
    pub x: Option<Point>,
    pub residual: Option<Point>,
    pub residual_sq: Option<f64>,
    pub dist_sq: Option<f64>,
    pub lyapunov: Option<f64>,
    pub bound: Option<f64>,
}

impl Record {
    pub fn new(k: usize, y: Point) -> Self {
        Record {
            k,
            y,
            x: None,
            residual: None,
            residual_sq: None,
            dist_sq: None,
            lyapunov: None,
            bound: None,
        }
    }
}

/// Which norm the squared columns are measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Euclidean,
    Metric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub solver: &'static str,
    pub norm: NormKind,
    pub records: Vec<Record>,
    /// Iteration indices at which a restart segment begins.
    pub restarts: Vec<usize>,
}

impl IterationTrace {
    pub fn new(solver: &'static str, norm: NormKind) -> Self {
        IterationTrace {
            solver,
            norm,
            records: Vec::new(),
            restarts: Vec::new(),
        }
    }

    /// Appends a record; indices must run 0, 1, 2, ...
    pub fn push(&mut self, rec: Record) -> Result<()> {
        match self.records.last() {
            None if rec.k != 0 => {
                return Err(Error::NonIncreasingIndex {
                    previous: 0,
                    found: rec.k,
                })
            }
            Some(last) if rec.k <= last.k => {
                return Err(Error::NonIncreasingIndex {
                    previous: last.k,
                    found: rec.k,
                })
            }
            _ => {}
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn final_residual_sq(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.residual_sq)
    }

    pub fn residual_sq_series(&self) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.residual_sq.map(|v| (r.k, v)))
            .collect()
    }

    pub fn iterates(&self) -> impl Iterator<Item = &Point> {
        self.records.iter().map(|r| &r.y)
    }
}

/// Optional instrumentation for a solve: a known solution enables the distance and
/// bound columns, a metric switches the squared columns to the M-norm.
#[derive(Clone, Copy, Default)]
pub struct Probe<'a> {
    pub solution: Option<&'a Point>,
    pub metric: Option<&'a dyn MetricMatrix>,
}

impl<'a> Probe<'a> {
    pub fn none() -> Self {
        Probe::default()
    }

    pub fn with_solution(solution: &'a Point) -> Self {
        Probe {
            solution: Some(solution),
            metric: None,
        }
    }

    pub fn metric(mut self, m: &'a dyn MetricMatrix) -> Self {
        self.metric = Some(m);
        self
    }

    pub(crate) fn norm_kind(&self) -> NormKind {
        if self.metric.is_some() {
            NormKind::Metric
        } else {
            NormKind::Euclidean
        }
    }

    pub(crate) fn sq(&self, v: &Point) -> Result<f64> {
        match self.metric {
            Some(m) => metric_norm_sq(m, v),
            None => Ok(v.norm_sq()),
        }
    }

    pub(crate) fn dist_sq(&self, p: &Point) -> Result<Option<f64>> {
        match self.solution {
            Some(s) => {
                s.check_dim(p.dim())?;
                Ok(Some(self.sq(&(p - s))?))
            }
            None => Ok(None),
        }
    }
}
