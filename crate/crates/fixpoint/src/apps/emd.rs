//! Earth mover's distance (L1 transport) by a primal-dual iteration on a square grid.
//!
//! The state is (m~_x, m~_y, Phi), three row-major n x n blocks. The flux m_x lives on
//! the first n-1 rows of m~_x and m_y on the first n-1 columns of m~_y; the padding
//! entries never enter the divergence.

use fixpoint_core::{Error as CoreError, FixedPointMap, MetricMatrix, Point};
use serde::{Deserialize, Serialize};

use crate::Result;

/// Two probability measures on an n x n grid, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMeasurePair {
    pub n: usize,
    pub rho0: Vec<f64>,
    pub rho1: Vec<f64>,
}

const MASS_TOL: f64 = 1e-12;

impl GridMeasurePair {
    pub fn new(n: usize, rho0: Vec<f64>, rho1: Vec<f64>) -> Result<Self> {
        let p = GridMeasurePair { n, rho0, rho1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(CoreError::InvalidParameter {
                name: "grid_size",
                value: n as f64,
                reason: "must be >= 2",
            }
            .into());
        }
        for rho in [&self.rho0, &self.rho1] {
            if rho.len() != n * n {
                return Err(CoreError::DimensionMismatch {
                    expected: n * n,
                    found: rho.len(),
                }
                .into());
            }
            if let Some(i) = rho.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(crate::Error::Instance(format!("measure entry {i} is negative or non-finite")));
            }
            let mass: f64 = rho.iter().sum();
            if (mass - 1.0).abs() > MASS_TOL {
                return Err(crate::Error::Instance(format!("measure has total mass {mass}, expected 1")));
            }
        }
        Ok(())
    }

    /// Uniform disc of radius 0.3 at the origin against four discs of radius 0.2
    /// centred at (+-1, +-1), on [-1.5, 1.5]^2 sampled at cell centres.
    pub fn two_circles(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::InvalidParameter {
                name: "grid_size",
                value: n as f64,
                reason: "must be >= 2",
            }
            .into());
        }
        let coord = |k: usize| -1.5 + 3.0 * (k as f64 + 0.5) / n as f64;
        let mut rho0 = vec![0.0; n * n];
        let mut rho1 = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (coord(j), coord(i));
                if x * x + y * y <= 0.09 {
                    rho0[i * n + j] = 1.0;
                }
                for (cx, cy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    if (x - cx) * (x - cx) + (y - cy) * (y - cy) <= 0.04 {
                        rho1[i * n + j] = 1.0;
                    }
                }
            }
        }
        for rho in [&mut rho0, &mut rho1] {
            let mass: f64 = rho.iter().sum();
            if mass == 0.0 {
                return Err(CoreError::InvalidParameter {
                    name: "grid_size",
                    value: n as f64,
                    reason: "too coarse to resolve the discs",
                }
                .into());
            }
            rho.iter_mut().for_each(|v| *v /= mass);
        }
        GridMeasurePair::new(n, rho0, rho1)
    }
}

/// Soft threshold: sign(v) max(|v| - t, 0).
pub fn shrink1(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Forward differences (Phi_{i+1,j} - Phi_ij, Phi_{i,j+1} - Phi_ij), zero on the padding.
pub fn grad(phi: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; n * n];
    let mut gy = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let p = i * n + j;
            if i + 1 < n {
                gx[p] = phi[p + n] - phi[p];
            }
            if j + 1 < n {
                gy[p] = phi[p + 1] - phi[p];
            }
        }
    }
    (gx, gy)
}

/// Discrete divergence, the negative adjoint of `grad`. Padding entries are ignored.
pub fn div(mx: &[f64], my: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let p = i * n + j;
            if i + 1 < n {
                out[p] += mx[p];
                out[p + n] -= mx[p];
            }
            if j + 1 < n {
                out[p] += my[p];
                out[p + 1] -= my[p];
            }
        }
    }
    out
}

/// The primal-dual map with flux step `mu`, dual step `tau` and quadratic
/// regularization weight `epsilon`.
#[derive(Debug, Clone)]
pub struct EmdPdhg {
    measures: GridMeasurePair,
    mu: f64,
    epsilon: f64,
    tau: f64,
}

/// Largest squared norm of the unit-spacing divergence, used for the default step.
pub const DIV_NORM_SQ_BOUND: f64 = 8.0;

/// Dual step that keeps mu * tau * ||div||^2 at one half.
pub fn default_tau(mu: f64) -> f64 {
    0.5 / (DIV_NORM_SQ_BOUND * mu)
}

pub fn emd_pdhg(measures: GridMeasurePair, mu: f64, epsilon: f64, tau: f64) -> Result<EmdPdhg> {
    measures.validate()?;
    for (name, v) in [("mu", mu), ("tau", tau)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name,
                value: v,
                reason: "must be finite and > 0",
            }
            .into());
        }
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(CoreError::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must be finite and >= 0",
        }
        .into());
    }
    if mu * tau * DIV_NORM_SQ_BOUND > 1.0 {
        return Err(CoreError::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "mu * tau * 8 must not exceed 1",
        }
        .into());
    }
    Ok(EmdPdhg {
        measures,
        mu,
        epsilon,
        tau,
    })
}

impl EmdPdhg {
    pub fn n(&self) -> usize {
        self.measures.n
    }

    pub fn measures(&self) -> &GridMeasurePair {
        &self.measures
    }

    pub fn params(&self) -> (f64, f64, f64) {
        (self.mu, self.epsilon, self.tau)
    }

    pub fn split<'a>(&self, z: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let nn = self.n() * self.n();
        (&z[..nn], &z[nn..2 * nn], &z[2 * nn..])
    }

    /// ||m||_{1,1} over the unpadded flux entries.
    pub fn transport_cost(&self, z: &Point) -> f64 {
        let n = self.n();
        let (mx, my, _) = self.split(z.as_slice());
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i + 1 < n {
                    s += mx[i * n + j].abs();
                }
                if j + 1 < n {
                    s += my[i * n + j].abs();
                }
            }
        }
        s
    }

    pub fn metric(&self) -> EmdMetric {
        EmdMetric { op: self.clone() }
    }
}

impl FixedPointMap for EmdPdhg {
    fn dim(&self) -> usize {
        3 * self.n() * self.n()
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn apply(&self, z: &Point) -> fixpoint_core::Result<Point> {
        z.check_dim(self.dim())?;
        let n = self.n();
        let (mx, my, phi) = self.split(z.as_slice());
        let (gx, gy) = grad(phi, n);
        let damp = 1.0 / (1.0 + self.epsilon * self.mu);
        let mx1: Vec<f64> = (0..n * n).map(|p| damp * shrink1(mx[p] + self.mu * gx[p], self.mu)).collect();
        let my1: Vec<f64> = (0..n * n).map(|p| damp * shrink1(my[p] + self.mu * gy[p], self.mu)).collect();
        let bx: Vec<f64> = (0..n * n).map(|p| 2.0 * mx1[p] - mx[p]).collect();
        let by: Vec<f64> = (0..n * n).map(|p| 2.0 * my1[p] - my[p]).collect();
        let d = div(&bx, &by, n);
        let (r0, r1) = (&self.measures.rho0, &self.measures.rho1);
        let phi1 = (0..n * n).map(|p| phi[p] + self.tau * (d[p] + r1[p] - r0[p]));
        let mut out = mx1;
        out.extend(my1);
        out.extend(phi1);
        Ok(Point::from(out))
    }
}

/// [ I/mu   -div^T ]
/// [ -div    I/tau ]
#[derive(Debug, Clone)]
pub struct EmdMetric {
    op: EmdPdhg,
}

impl MetricMatrix for EmdMetric {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, z: &Point) -> fixpoint_core::Result<Point> {
        z.check_dim(self.dim())?;
        let n = self.op.n();
        let (mx, my, phi) = self.op.split(z.as_slice());
        let (mu, _, tau) = self.op.params();
        // div^T = -grad
        let (gx, gy) = grad(phi, n);
        let d = div(mx, my, n);
        let mut out: Vec<f64> = (0..n * n).map(|p| mx[p] / mu + gx[p]).collect();
        out.extend((0..n * n).map(|p| my[p] / mu + gy[p]));
        out.extend((0..n * n).map(|p| phi[p] / tau - d[p]));
        Ok(Point::from(out))
    }
}
