//! Flat JSON experiment configuration.
//!
//! Every field except `experiment` is optional; defaults depend on the experiment and
//! are resolved by the runner. Unknown fields are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "FIXPOINT_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Toy2d,
    Worstcase,
    RestartPower,
    Ct,
    Emd,
    Pgextra,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Toy2d => "toy2d",
            Experiment::Worstcase => "worstcase",
            Experiment::RestartPower => "restart-power",
            Experiment::Ct => "ct",
            Experiment::Emd => "emd",
            Experiment::Pgextra => "pgextra",
            Experiment::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Picard,
    Km,
    Halpern,
    Ohm,
    OcHalpern,
    RestartedOcHalpern,
    OsPpm,
    OsPpmAnchored,
    Appm,
    Ppm,
    RestartedOsPpm,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Picard => "picard",
            SolverKind::Km => "km",
            SolverKind::Halpern => "halpern",
            SolverKind::Ohm => "ohm",
            SolverKind::OcHalpern => "oc_halpern",
            SolverKind::RestartedOcHalpern => "restarted_oc_halpern",
            SolverKind::OsPpm => "os_ppm",
            SolverKind::OsPpmAnchored => "os_ppm_anchored",
            SolverKind::Appm => "appm",
            SolverKind::Ppm => "ppm",
            SolverKind::RestartedOsPpm => "restarted_os_ppm",
        }
    }

    /// Solvers driven by a fixed-point map rather than a resolvent.
    pub fn is_fixed_point(self) -> bool {
        matches!(
            self,
            SolverKind::Picard
                | SolverKind::Km
                | SolverKind::Halpern
                | SolverKind::Ohm
                | SolverKind::OcHalpern
                | SolverKind::RestartedOcHalpern
        )
    }
}

/// Norm used for residuals of the application experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormChoice {
    Euclidean,
    Metric,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<Experiment>,
    pub solvers: Option<Vec<SolverKind>>,
    #[serde(alias = "N")]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub record_timing: bool,

    pub theta_deg: Option<f64>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub dim: Option<usize>,
    pub radius: Option<f64>,
    pub km_lambda: Option<f64>,
    pub restart_lambda: Option<f64>,
    pub restart_beta: Option<f64>,

    pub image_size: Option<usize>,
    pub n_angles: Option<usize>,
    pub pdhg_alpha: Option<f64>,
    pub pdhg_beta: Option<f64>,
    pub lambda_reg: Option<f64>,

    pub grid_size: Option<usize>,
    pub emd_mu: Option<f64>,
    pub epsilon: Option<f64>,
    pub tau: Option<f64>,

    pub nodes: Option<usize>,
    pub edges: Option<usize>,
    pub signal_dim: Option<usize>,
    pub sparsity: Option<usize>,
    pub sensors_per_node: Option<usize>,
    pub step_size: Option<f64>,
    pub noise: Option<f64>,
    pub norm: Option<NormChoice>,

    pub instance: Option<PathBuf>,

    pub properties: Option<Vec<String>>,
    pub fault: Option<String>,
}

/// Parsed configuration together with its source text for diagnostics.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub text: String,
    pub config: Config,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, text)
    }

    pub fn parse(path: &Path, text: String) -> Result<Self> {
        let config: Config = serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: format!("line {} column {}: {}", e.line(), e.column(), strip_position(&e.to_string())),
        })?;
        Ok(LoadedConfig {
            path: path.to_path_buf(),
            text,
            config,
        })
    }

    /// A config error pointing at the line where `field` is set, if it is.
    pub fn error(&self, field: &str, message: impl std::fmt::Display) -> Error {
        let message = match locate(&self.text, field) {
            Some((line, col)) => format!("line {line} column {col}: `{field}`: {message}"),
            None => format!("`{field}`: {message}"),
        };
        Error::Config {
            path: self.path.clone(),
            message,
        }
    }

    /// `output_dir` after the environment override; defaults to `output`.
    pub fn output_dir(&self) -> PathBuf {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(dir);
        }
        self.config.output_dir.clone().unwrap_or_else(|| PathBuf::from("output"))
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// 1-based line and column of the first `"field"` key in a JSON text.
pub fn locate(text: &str, field: &str) -> Option<(usize, usize)> {
    let needle = format!("\"{field}\"");
    let pos = text.find(&needle)?;
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let col = pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, col))
}
