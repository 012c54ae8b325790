//! The anchoring weights phi_k = sum_{i<=k} gamma^{2i}.

use alloc::vec::Vec;

use crate::error::{require, Error, Result};
use crate::math;

/// phi_k for k = -1..=horizon, computed by phi_k = gamma^2 phi_{k-1} + 1 from phi_{-1} = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSequence {
    gamma: f64,
    values: Vec<f64>,
}

/// gamma^{2N} must stay below this.
pub const PHI_CAP: f64 = 1e300;

impl PhiSequence {
    pub fn new(gamma: f64, horizon: usize) -> Result<Self> {
        Self::with_increment(gamma, horizon, 1.0)
    }

    /// A sequence with the wrong recurrence phi_k = gamma^2 phi_{k-1} + increment.
    /// Exists so verification suites can check that they notice a broken build.
    #[doc(hidden)]
    pub fn with_increment(gamma: f64, horizon: usize, increment: f64) -> Result<Self> {
        require(gamma >= 1.0 && gamma.is_finite(), "gamma", gamma, "must be finite and >= 1")?;
        check_horizon(gamma, horizon)?;
        let g2 = gamma * gamma;
        let mut values = Vec::with_capacity(horizon + 2);
        values.push(0.0);
        let mut prev = 0.0;
        for _ in 0..=horizon {
            prev = g2 * prev + increment;
            values.push(prev);
        }
        Ok(PhiSequence { gamma, values })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 2
    }

    /// phi_k for k >= -1.
    pub fn value(&self, k: isize) -> f64 {
        debug_assert!(k >= -1);
        self.values[(k + 1) as usize]
    }

    /// phi_{k-j} / phi_k, zero when k - j < 0.
    pub fn ratio(&self, k: isize, j: isize) -> f64 {
        if k - j < 0 {
            0.0
        } else {
            self.value(k - j) / self.value(k)
        }
    }
}

/// Errors if gamma^{2N} reaches the overflow cap.
pub fn check_horizon(gamma: f64, horizon: usize) -> Result<()> {
    if gamma > 1.0 && 2.0 * (horizon as f64) * math::ln(gamma) >= math::ln(PHI_CAP) {
        return Err(Error::ScheduleOverflow { gamma, horizon });
    }
    Ok(())
}
