//! Accelerated fixed-point iterations with exact worst-case guarantees.
//!
//! Anchored (Halpern-type) methods for contractive operators and their proximal
//! counterparts for strongly monotone operators, restarted variants for
//! uniformly monotone operators, and the worst-case instances that show the
//! rates cannot be improved.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod lowerbound;
pub mod operator;
pub mod phi;
pub mod point;
pub mod problems;
pub mod restart;
pub mod solvers;
pub mod trace;
pub mod transforms;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use operator::{
    fixed_point_residual, metric_norm_sq, resolvent_residual, FixedPointMap, FnMap, FnResolvent, IdentityMetric,
    LinearMap, LinearResolvent, MetricMatrix, ResolventOracle,
};
pub use point::Point;
pub use trace::{IterationTrace, NormKind, Probe, Record};
