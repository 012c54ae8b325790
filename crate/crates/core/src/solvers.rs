//! Fixed-point and proximal iterations.
//!
//! Fixed-point solvers record y_0..y_N together with y_k - T y_k, so a run of N steps
//! makes N + 1 evaluations of T (the last one only measures the final residual).
//! Proximal solvers make exactly N resolvent calls and record x_k = J_A y_{k-1}
//! together with the resolvent residual y_{k-1} - x_k.

use crate::analysis::{lyapunov_value, upper_bound_contraction, upper_bound_monotone, LyapunovForm, LyapunovInputs};
use crate::error::{require, Error, Result};
use crate::math;
use crate::operator::{FixedPointMap, ResolventOracle};
use crate::phi::PhiSequence;
use crate::point::Point;
use crate::trace::{IterationTrace, Probe, Record};

fn check_start(y0: &Point, dim: usize) -> Result<()> {
    y0.check_dim(dim)?;
    if let Some(index) = y0.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    Ok(())
}

fn finite(p: Point, solver: &'static str, iteration: usize) -> Result<Point> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::NonFinite { solver, iteration })
    }
}

fn check_weight(l: f64) -> Result<()> {
    require(l > 0.0 && l < 1.0, "lambda", l, "schedule values must lie in (0, 1)")
}

/// Evaluates T at y_k, records y_k with its residual and returns T y_k.
fn record_fixed<T: FixedPointMap + ?Sized>(
    trace: &mut IterationTrace,
    t: &T,
    probe: &Probe<'_>,
    k: usize,
    y: &Point,
    bound: Option<f64>,
) -> Result<Point> {
    let ty = finite(t.apply(y)?, trace.solver, k)?;
    let residual = y - &ty;
    let mut rec = Record::new(k, y.clone());
    rec.residual_sq = Some(probe.sq(&residual)?);
    rec.residual = Some(residual);
    rec.dist_sq = probe.dist_sq(y)?;
    rec.bound = bound;
    trace.push(rec)?;
    Ok(ty)
}

/// y_{k+1} = T y_k
pub fn picard<T: FixedPointMap + ?Sized>(t: &T, y0: &Point, n: usize, probe: &Probe<'_>) -> Result<IterationTrace> {
    check_start(y0, t.dim())?;
    let mut trace = IterationTrace::new("picard", probe.norm_kind());
    let mut y = y0.clone();
    for k in 0..=n {
        let ty = record_fixed(&mut trace, t, probe, k, &y, None)?;
        y = ty;
    }
    Ok(trace)
}

/// y_{k+1} = lambda(k) y_k + (1 - lambda(k)) T y_k
pub fn km<T, L>(t: &T, y0: &Point, lambda: L, n: usize, probe: &Probe<'_>) -> Result<IterationTrace>
where
    T: FixedPointMap + ?Sized,
    L: Fn(usize) -> f64,
{
    check_start(y0, t.dim())?;
    let mut trace = IterationTrace::new("km", probe.norm_kind());
    let mut y = y0.clone();
    for k in 0..=n {
        let ty = record_fixed(&mut trace, t, probe, k, &y, None)?;
        if k == n {
            break;
        }
        let l = lambda(k);
        check_weight(l)?;
        y = finite(Point::lincomb(l, &y, 1.0 - l, &ty), "km", k + 1)?;
    }
    Ok(trace)
}

/// y_{k+1} = lambda(k) y_0 + (1 - lambda(k)) T y_k
///
/// `lambda(k)` is the anchor weight used to form y_{k+1}; `|k| 1.0 / (k + 2) as f64`
/// is the classical choice 1/(k+1) in one-based numbering.
pub fn halpern<T, L>(t: &T, y0: &Point, lambda: L, n: usize, probe: &Probe<'_>) -> Result<IterationTrace>
where
    T: FixedPointMap + ?Sized,
    L: Fn(usize) -> f64,
{
    check_start(y0, t.dim())?;
    let mut trace = IterationTrace::new("halpern", probe.norm_kind());
    let mut y = y0.clone();
    for k in 0..=n {
        let ty = record_fixed(&mut trace, t, probe, k, &y, None)?;
        if k == n {
            break;
        }
        let l = lambda(k);
        check_weight(l)?;
        y = finite(Point::lincomb(l, y0, 1.0 - l, &ty), "halpern", k + 1)?;
    }
    Ok(trace)
}

/// Halpern with anchor weight 1/(k+1) (the gamma = 1 case of `oc_halpern`).
pub fn ohm<T: FixedPointMap + ?Sized>(t: &T, y0: &Point, n: usize, probe: &Probe<'_>) -> Result<IterationTrace> {
    let mut trace = halpern(t, y0, |k| 1.0 / (k as f64 + 2.0), n, probe)?;
    trace.solver = "ohm";
    Ok(trace)
}

/// y_k = (1 - 1/phi_k) T y_{k-1} + (1/phi_k) y_0
///
/// With a known solution the trace carries the matching upper bound on
/// ||y_k - T y_k||^2 at every k.
pub fn oc_halpern<T: FixedPointMap + ?Sized>(
    t: &T,
    gamma: f64,
    y0: &Point,
    n: usize,
    probe: &Probe<'_>,
) -> Result<IterationTrace> {
    let phi = PhiSequence::new(gamma, n)?;
    oc_halpern_with_phi(t, &phi, y0, n, probe)
}

/// `oc_halpern` with a caller-supplied weight sequence.
pub fn oc_halpern_with_phi<T: FixedPointMap + ?Sized>(
    t: &T,
    phi: &PhiSequence,
    y0: &Point,
    n: usize,
    probe: &Probe<'_>,
) -> Result<IterationTrace> {
    check_start(y0, t.dim())?;
    require(phi.horizon() >= n, "N", n as f64, "exceeds the weight sequence horizon")?;
    let gamma = phi.gamma();
    let d0 = probe.dist_sq(y0)?.map(math::sqrt);
    let mut trace = IterationTrace::new("oc_halpern", probe.norm_kind());
    let mut y = y0.clone();
    for k in 0..=n {
        let bound = d0.map(|d| upper_bound_contraction(k, gamma, d));
        let ty = record_fixed(&mut trace, t, probe, k, &y, bound)?;
        if k == n {
            break;
        }
        let w = 1.0 / phi.value(k as isize + 1);
        y = finite(Point::lincomb(1.0 - w, &ty, w, y0), "oc_halpern", k + 1)?;
    }
    Ok(trace)
}

/// Internal state of the OS-PPM recurrence, shared with the restarted variant.
pub(crate) struct OsPpmState {
    phi: PhiSequence,
    mu: f64,
    k: usize,
    x_prev: Point,
    y_prev: Point,
    y_prev2: Point,
}

pub(crate) struct OsPpmStep {
    pub x: Point,
    pub residual: Point,
    pub y: Point,
}

impl OsPpmState {
    pub(crate) fn new(mu: f64, y0: &Point, horizon: usize) -> Result<Self> {
        require(mu >= 0.0 && mu.is_finite(), "mu", mu, "must be finite and >= 0")?;
        let phi = PhiSequence::new(1.0 + 2.0 * mu, horizon)?;
        Ok(OsPpmState {
            phi,
            mu,
            k: 0,
            x_prev: y0.clone(),
            y_prev: y0.clone(),
            y_prev2: y0.clone(),
        })
    }

    pub(crate) fn step<A: ResolventOracle + ?Sized>(&mut self, a: &A, solver: &'static str) -> Result<OsPpmStep> {
        let k = self.k as isize + 1;
        let x = finite(a.resolve(&self.y_prev)?, solver, k as usize)?;
        let residual = &self.y_prev - &x;
        let p = &self.phi;
        let c1 = (p.value(k - 1) - 1.0) / p.value(k);
        let c2 = 2.0 * self.mu * p.ratio(k, 1);
        let c3 = (1.0 + 2.0 * self.mu) * p.ratio(k, 2);
        let mut y = x.clone();
        y.axpy(c1, &(&x - &self.x_prev));
        y.axpy(-c2, &residual);
        if c3 != 0.0 {
            y.axpy(c3, &(&self.y_prev2 - &self.x_prev));
        }
        let y = finite(y, solver, k as usize)?;
        self.y_prev2 = core::mem::replace(&mut self.y_prev, y.clone());
        self.x_prev = x.clone();
        self.k += 1;
        Ok(OsPpmStep { x, residual, y })
    }
}

fn proximal_start(y0: &Point, probe: &Probe<'_>, solver: &'static str) -> Result<IterationTrace> {
    let mut trace = IterationTrace::new(solver, probe.norm_kind());
    let mut rec = Record::new(0, y0.clone());
    rec.x = Some(y0.clone());
    rec.dist_sq = probe.dist_sq(y0)?;
    trace.push(rec)?;
    Ok(trace)
}

#[allow(clippy::too_many_arguments)]
fn record_proximal(
    trace: &mut IterationTrace,
    probe: &Probe<'_>,
    k: usize,
    x: Point,
    residual: Point,
    y: Point,
    bound: Option<f64>,
    lyap: Option<(&Point, f64)>,
) -> Result<()> {
    let mut rec = Record::new(k, y);
    rec.residual_sq = Some(probe.sq(&residual)?);
    rec.dist_sq = probe.dist_sq(&x)?;
    rec.bound = bound;
    if let (Some((y0, mu)), Some(xs)) = (lyap, probe.solution) {
        if probe.metric.is_none() {
            let inp = LyapunovInputs {
                k,
                x_k: &x,
                residual: &residual,
                y0,
                x_star: xs,
                mu,
            };
            rec.lyapunov = Some(lyapunov_value(&inp, LyapunovForm::Primary)?);
        }
    }
    rec.x = Some(x);
    rec.residual = Some(residual);
    trace.push(rec)
}

fn proximal_preamble<A: ResolventOracle + ?Sized>(
    a: &A,
    mu: f64,
    y0: &Point,
    n: usize,
    probe: &Probe<'_>,
) -> Result<Option<f64>> {
    check_start(y0, a.dim())?;
    require(mu >= 0.0 && mu.is_finite(), "mu", mu, "must be finite and >= 0")?;
    require(n >= 1, "N", n as f64, "must be >= 1")?;
    Ok(probe.dist_sq(y0)?.map(math::sqrt))
}

/// The OS-PPM recurrence in its momentum form.
///
/// With a known solution the trace also carries the rate bound on ||A~ x_k||^2 and,
/// in the Euclidean norm, the Lyapunov value at each k.
pub fn os_ppm<A: ResolventOracle + ?Sized>(
    a: &A,
    mu: f64,
    y0: &Point,
    n: usize,
    probe: &Probe<'_>,
) -> Result<IterationTrace> {
    let d0 = proximal_preamble(a, mu, y0, n, probe)?;
    let mut trace = proximal_start(y0, probe, "os_ppm")?;
    if let (Some(xs), None) = (probe.solution, probe.metric) {
        trace.records[0].lyapunov = Some(2.0 * y0.dist_sq(xs));
    }
    let mut state = OsPpmState::new(mu, y0, n)?;
    for k in 1..=n {
        let s = state.step(a, "os_ppm")?;
        let bound = d0.map(|d| upper_bound_monotone(k, mu, d));
        record_proximal(&mut trace, probe, k, s.x, s.residual, s.y, bound, Some((y0, mu)))?;
    }
    Ok(trace)
}

/// The same iterates as `os_ppm`, computed through the anchored update
/// y_k = (1 - 1/phi_k)((1 + 1/gamma) x_k - (1/gamma) y_{k-1}) + (1/phi_k) y_0.
pub fn os_ppm_anchored<A: ResolventOracle + ?Sized>(
    a: &A,
    mu: f64,
    y0: &Point,
    n: usize,
    probe: &Probe<'_>,
) -> Result<IterationTrace> {
    let d0 = proximal_preamble(a, mu, y0, n, probe)?;
    let gamma = 1.0 + 2.0 * mu;
    let phi = PhiSequence::new(gamma, n)?;
    let mut trace = proximal_start(y0, probe, "os_ppm_anchored")?;
    if let (Some(xs), None) = (probe.solution, probe.metric) {
        trace.records[0].lyapunov = Some(2.0 * y0.dist_sq(xs));
    }
    let mut y_prev = y0.clone();
    for k in 1..=n {
        let x = finite(a.resolve(&y_prev)?, "os_ppm_anchored", k)?;
        let residual = &y_prev - &x;
        let w = 1.0 / phi.value(k as isize);
        let reflected = Point::lincomb(1.0 + 1.0 / gamma, &x, -1.0 / gamma, &y_prev);
        let y = finite(Point::lincomb(1.0 - w, &reflected, w, y0), "os_ppm_anchored", k)?;
        let bound = d0.map(|d| upper_bound_monotone(k, mu, d));
        y_prev = y.clone();
        record_proximal(&mut trace, probe, k, x, residual, y, bound, Some((y0, mu)))?;
    }
    Ok(trace)
}

/// The proximal point method x_{k+1} = J_A x_k.
pub fn ppm<A: ResolventOracle + ?Sized>(a: &A, y0: &Point, n: usize, probe: &Probe<'_>) -> Result<IterationTrace> {
    proximal_preamble(a, 0.0, y0, n, probe)?;
    let mut trace = proximal_start(y0, probe, "ppm")?;
    let mut x_prev = y0.clone();
    for k in 1..=n {
        let x = finite(a.resolve(&x_prev)?, "ppm", k)?;
        let residual = &x_prev - &x;
        x_prev = x.clone();
        record_proximal(&mut trace, probe, k, x.clone(), residual, x, None, None)?;
    }
    Ok(trace)
}
