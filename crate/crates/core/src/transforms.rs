//! Maps between 1/gamma-contractions, (gamma-1)/2-strongly monotone operators
//! (through their resolvents) and averaged operators.
//!
//! With gamma = 1 + 2 mu the three views share their fixed points / zeros, and
//! y - T y = (1 + 1/gamma)(y - J_A y).

use crate::error::{require, Result};
use crate::operator::{FixedPointMap, ResolventOracle};
use crate::point::Point;

/// Resolvent of the strongly monotone operator induced by a contraction:
/// J_A y = (gamma T y + y) / (1 + gamma), with mu = (gamma - 1)/2.
#[derive(Debug, Clone)]
pub struct ContractionResolvent<T> {
    inner: T,
    gamma: f64,
}

impl<T> ContractionResolvent<T> {
    pub fn inner(&self) -> &T {
        &self.inner
    }
}

pub fn resolvent_from_contraction<T: FixedPointMap>(t: T, gamma: f64) -> Result<ContractionResolvent<T>> {
    require(gamma >= 1.0 && gamma.is_finite(), "gamma", gamma, "must be finite and >= 1")?;
    Ok(ContractionResolvent { inner: t, gamma })
}

impl<T: FixedPointMap> ResolventOracle for ContractionResolvent<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn mu(&self) -> f64 {
        (self.gamma - 1.0) / 2.0
    }
    fn resolve(&self, y: &Point) -> Result<Point> {
        y.check_dim(self.inner.dim())?;
        let ty = self.inner.apply(y)?;
        let g = self.gamma;
        Ok(Point::lincomb(g / (1.0 + g), &ty, 1.0 / (1.0 + g), y))
    }
}

/// T = (1 + 1/gamma) J_A - (1/gamma) I with gamma = 1 + 2 mu.
#[derive(Debug, Clone)]
pub struct ResolventContraction<A> {
    inner: A,
    mu: f64,
}

impl<A> ResolventContraction<A> {
    pub fn inner(&self) -> &A {
        &self.inner
    }
}

pub fn contraction_from_resolvent<A: ResolventOracle>(a: A, mu: f64) -> Result<ResolventContraction<A>> {
    require(mu >= 0.0 && mu.is_finite(), "mu", mu, "must be finite and >= 0")?;
    Ok(ResolventContraction { inner: a, mu })
}

impl<A: ResolventOracle> FixedPointMap for ResolventContraction<A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn gamma(&self) -> f64 {
        1.0 + 2.0 * self.mu
    }
    fn apply(&self, y: &Point) -> Result<Point> {
        y.check_dim(self.inner.dim())?;
        let x = self.inner.resolve(y)?;
        let g = self.gamma();
        Ok(Point::lincomb(1.0 + 1.0 / g, &x, -1.0 / g, y))
    }
}

/// G = (gamma / (1 + gamma)) (I - T), a 1/(1+gamma)-averaged operator with Zer G = Fix T.
///
/// The reported modulus is 1 since G itself is only nonexpansive in general.
#[derive(Debug, Clone)]
pub struct AveragedMap<T> {
    inner: T,
    gamma: f64,
}

pub fn averaged_from_contraction<T: FixedPointMap>(t: T, gamma: f64) -> Result<AveragedMap<T>> {
    require(gamma >= 1.0 && gamma.is_finite(), "gamma", gamma, "must be finite and >= 1")?;
    Ok(AveragedMap { inner: t, gamma })
}

impl<T> AveragedMap<T> {
    pub fn averaging(&self) -> f64 {
        1.0 / (1.0 + self.gamma)
    }
}

impl<T: FixedPointMap> FixedPointMap for AveragedMap<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn gamma(&self) -> f64 {
        1.0
    }
    fn apply(&self, y: &Point) -> Result<Point> {
        y.check_dim(self.inner.dim())?;
        let ty = self.inner.apply(y)?;
        let c = self.gamma / (1.0 + self.gamma);
        Ok(Point::lincomb(c, y, -c, &ty))
    }
}
