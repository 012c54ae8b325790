//! Problem instances as plain JSON documents.

use std::path::Path;

use fixpoint_core::lowerbound::{build_worst_case, WorstCaseInstance};
use fixpoint_core::problems::{power_monotone, PowerMonotone};
use fixpoint_core::{DenseMatrix, LinearMap, LinearResolvent, Point};
use serde::{Deserialize, Serialize};

use crate::apps::ct::CtProblem;
use crate::apps::emd::{emd_pdhg, EmdPdhg, GridMeasurePair};
use crate::apps::network::NetworkProblem;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmdInstance {
    pub measures: GridMeasurePair,
    pub mu: f64,
    pub epsilon: f64,
    pub tau: f64,
}

impl EmdInstance {
    pub fn build(&self) -> Result<EmdPdhg> {
        emd_pdhg(self.measures.clone(), self.mu, self.epsilon, self.tau)
    }
}

/// Every instance kind the runner can load. The `kind` field selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Instance {
    /// y -> M y, declared 1/gamma-Lipschitz.
    Linear {
        matrix: Vec<Vec<f64>>,
        gamma: f64,
        #[serde(default)]
        y0: Option<Vec<f64>>,
    },
    /// A x = M x with strong monotonicity modulus mu; solvers use (I + M)^{-1}.
    Monotone {
        matrix: Vec<Vec<f64>>,
        mu: f64,
        #[serde(default)]
        y0: Option<Vec<f64>>,
    },
    /// A x = mu ||x||^{alpha-1} x.
    Power {
        mu: f64,
        alpha: f64,
        dim: usize,
        #[serde(default)]
        y0: Option<Vec<f64>>,
    },
    WorstCase {
        horizon: usize,
        gamma: f64,
        radius: f64,
        y0: Vec<f64>,
    },
    Ct(CtProblem),
    Emd(EmdInstance),
    Network(NetworkProblem),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Linear { .. } => "linear",
            Instance::Monotone { .. } => "monotone",
            Instance::Power { .. } => "power",
            Instance::WorstCase { .. } => "worst-case",
            Instance::Ct(_) => "ct",
            Instance::Emd(_) => "emd",
            Instance::Network(_) => "network",
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: format!("line {} column {}: {}", e.line(), e.column(), e),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Instance(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DenseMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Instance("matrix must be square and non-empty".into()));
    }
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DenseMatrix::from_row_major(n, n, data)?)
}

pub fn matrix_to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn start(y0: &Option<Vec<f64>>, dim: usize) -> Result<Point> {
    match y0 {
        Some(v) => {
            let p = Point::new(v.clone())?;
            p.check_dim(dim)?;
            Ok(p)
        }
        None => Ok(Point::basis(dim, 0)),
    }
}

pub fn linear_map(matrix: &[Vec<f64>], gamma: f64, y0: &Option<Vec<f64>>) -> Result<(LinearMap, Point)> {
    let m = matrix_from_rows(matrix)?;
    let n = m.rows();
    Ok((LinearMap::new(m, gamma)?, start(y0, n)?))
}

pub fn monotone(matrix: &[Vec<f64>], mu: f64, y0: &Option<Vec<f64>>) -> Result<(LinearResolvent, Point)> {
    let m = matrix_from_rows(matrix)?;
    let n = m.rows();
    Ok((LinearResolvent::new(m, mu)?, start(y0, n)?))
}

pub fn power(mu: f64, alpha: f64, dim: usize, y0: &Option<Vec<f64>>) -> Result<(PowerMonotone, Point)> {
    Ok((power_monotone(mu, alpha, dim)?, start(y0, dim)?))
}

pub fn worst_case(horizon: usize, gamma: f64, radius: f64, y0: &[f64]) -> Result<WorstCaseInstance> {
    Ok(build_worst_case(horizon, gamma, radius, Point::new(y0.to_vec())?)?)
}
