//! Small analytic operators: the planar rotation contraction, the planar
//! strongly monotone linear operator and the radial power operator.

use alloc::vec;

use crate::error::{require, Error, Result};
use crate::linalg::DenseMatrix;
use crate::math;
use crate::operator::{FixedPointMap, ResolventOracle};
use crate::point::Point;

/// T = (1/gamma) R_theta on R^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationContraction {
    pub theta: f64,
    gamma: f64,
    cos: f64,
    sin: f64,
}

pub fn rotation_contraction(theta: f64, gamma: f64) -> Result<RotationContraction> {
    require(gamma >= 1.0 && gamma.is_finite(), "gamma", gamma, "must be finite and >= 1")?;
    require(theta.is_finite(), "theta", theta, "must be finite")?;
    Ok(RotationContraction {
        theta,
        gamma,
        cos: math::cos(theta),
        sin: math::sin(theta),
    })
}

impl RotationContraction {
    pub fn matrix(&self) -> DenseMatrix {
        let s = 1.0 / self.gamma;
        DenseMatrix::from_rows(&[&[s * self.cos, -s * self.sin], &[s * self.sin, s * self.cos]])
            .expect("2x2")
    }
}

impl FixedPointMap for RotationContraction {
    fn dim(&self) -> usize {
        2
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn apply(&self, y: &Point) -> Result<Point> {
        y.check_dim(2)?;
        let s = 1.0 / self.gamma;
        Ok(Point::from(vec![
            s * (self.cos * y[0] - self.sin * y[1]),
            s * (self.sin * y[0] + self.cos * y[1]),
        ]))
    }
}

/// M = (1/(N-1)) [[0, 1], [-1, 0]] + mu I on R^2, zero at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyMonotone {
    mu: f64,
    skew: f64,
}

pub fn toy_monotone(mu: f64, total_iterations: usize) -> Result<ToyMonotone> {
    require(mu >= 0.0 && mu.is_finite(), "mu", mu, "must be finite and >= 0")?;
    require(total_iterations > 1, "N_total", total_iterations as f64, "must exceed 1")?;
    Ok(ToyMonotone {
        mu,
        skew: 1.0 / (total_iterations as f64 - 1.0),
    })
}

impl ToyMonotone {
    pub fn matrix(&self) -> DenseMatrix {
        DenseMatrix::from_rows(&[&[self.mu, self.skew], &[-self.skew, self.mu]]).expect("2x2")
    }

    pub fn forward(&self, x: &Point) -> Result<Point> {
        x.check_dim(2)?;
        Ok(Point::from(vec![
            self.mu * x[0] + self.skew * x[1],
            -self.skew * x[0] + self.mu * x[1],
        ]))
    }
}

impl ResolventOracle for ToyMonotone {
    fn dim(&self) -> usize {
        2
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn resolve(&self, y: &Point) -> Result<Point> {
        y.check_dim(2)?;
        // (I + M) = [[a, s], [-s, a]], inverse = [[a, -s], [s, a]] / (a^2 + s^2)
        let a = 1.0 + self.mu;
        let s = self.skew;
        let det = a * a + s * s;
        Ok(Point::from(vec![
            (a * y[0] - s * y[1]) / det,
            (s * y[0] + a * y[1]) / det,
        ]))
    }
}

/// A x = mu |x|^{alpha-1} x, uniformly monotone with parameters (mu, alpha) about 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMonotone {
    pub mu: f64,
    pub alpha: f64,
    dim: usize,
}

pub fn power_monotone(mu: f64, alpha: f64, dim: usize) -> Result<PowerMonotone> {
    require(mu > 0.0 && mu.is_finite(), "mu", mu, "must be finite and > 0")?;
    require(alpha > 1.0 && alpha.is_finite(), "alpha", alpha, "must be finite and > 1")?;
    require(dim > 0, "n", dim as f64, "must be positive")?;
    Ok(PowerMonotone { mu, alpha, dim })
}

/// Root-finding iteration cap.
const MAX_ROOT_ITERS: usize = 200;

impl PowerMonotone {
    pub fn forward(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim)?;
        let n = x.norm();
        if n == 0.0 {
            return Ok(Point::zeros(self.dim));
        }
        Ok((self.mu * math::powf(n, self.alpha - 1.0)) * x)
    }

    /// The t >= 0 with t + mu t^alpha = s, by Newton steps safeguarded with bisection.
    pub fn radial_root(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let (mu, a) = (self.mu, self.alpha);
        let f = |t: f64| t + mu * math::powf(t, a) - s;
        let (mut lo, mut hi) = (0.0, s);
        // Power-law guess t ~ (s/mu)^{1/alpha} is better when the nonlinearity dominates.
        let mut t = s.min(math::powf(s / mu, 1.0 / a));
        for _ in 0..MAX_ROOT_ITERS {
            let ft = f(t);
            if ft == 0.0 {
                return Ok(t);
            }
            if ft > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let df = 1.0 + mu * a * math::powf(t, a - 1.0);
            let mut next = t - ft / df;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * next || hi - lo <= 1e-15 * hi {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::RootFinding {
            lo,
            hi,
            iterations: MAX_ROOT_ITERS,
        })
    }
}

impl ResolventOracle for PowerMonotone {
    fn dim(&self) -> usize {
        self.dim
    }
    fn mu(&self) -> f64 {
        0.0
    }
    fn resolve(&self, y: &Point) -> Result<Point> {
        y.check_dim(self.dim)?;
        let s = y.norm();
        if s == 0.0 {
            return Ok(Point::zeros(self.dim));
        }
        let t = self.radial_root(s)?;
        Ok((t / s) * y)
    }
}
