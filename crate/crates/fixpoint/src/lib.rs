//! Experiment runner and application operators on top of `fixpoint-core`.
pub mod apps;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod instance;
pub mod output;
pub mod runner;
pub mod verify;

pub use error::{Error, Result};
