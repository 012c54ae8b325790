//! Restarted OS-PPM (mu = 0 inner runs) with exponentially growing segments.

use alloc::vec::Vec;

use crate::error::{require, Error, Result};
use crate::math;
use crate::operator::{FixedPointMap, ResolventOracle};
use crate::phi::PhiSequence;
use crate::point::Point;
use crate::solvers::OsPpmState;
use crate::trace::{IterationTrace, Probe, Record};

/// Segment lengths t_1..t_R for a budget of N resolvent calls.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartSchedule {
    pub lambda: f64,
    pub beta: f64,
    pub inner_counts: Vec<usize>,
    pub budget: usize,
}

impl RestartSchedule {
    pub fn outer_count(&self) -> usize {
        self.inner_counts.len()
    }

    /// Record indices whose `y` is the anchor of a new segment.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.inner_counts.len());
        let mut at = 1;
        for t in &self.inner_counts {
            out.push(at);
            at += t;
        }
        out
    }

    fn check_budget(&self) -> Result<()> {
        let total: usize = self.inner_counts.iter().sum();
        if self.budget == 0 || total != self.budget - 1 || self.inner_counts.contains(&0) {
            return Err(Error::Contract(alloc::format!(
                "segment lengths sum to {total} but the budget {} leaves {}",
                self.budget,
                self.budget.saturating_sub(1)
            )));
        }
        Ok(())
    }
}

/// The scale lambda = (e/mu)^{1/alpha} d0^{-(1-1/alpha)} and exponent beta = 1 - 1/alpha.
pub fn schedule_scale(mu: f64, alpha: f64, dist0: f64) -> Result<(f64, f64)> {
    require(mu > 0.0 && mu.is_finite(), "mu", mu, "must be finite and > 0")?;
    require(alpha > 1.0, "alpha", alpha, "must be > 1")?;
    require(dist0 > 0.0 && dist0.is_finite(), "dist0", dist0, "must be finite and > 0")?;
    let beta = 1.0 - 1.0 / alpha;
    let lambda = math::powf(core::f64::consts::E / mu, 1.0 / alpha) * math::powf(dist0, -beta);
    Ok((lambda, beta))
}

/// The schedule t_k = ceil(lambda e^{beta k}) for k < R, with the remainder in t_R.
pub fn schedule_from_scale(lambda: f64, beta: f64, budget: usize) -> Result<RestartSchedule> {
    require(lambda > 0.0 && lambda.is_finite(), "lambda", lambda, "must be finite and > 0")?;
    require(beta > 0.0 && beta < 1.0, "beta", beta, "must lie in (0, 1)")?;
    let avail = budget.saturating_sub(1);
    let count = |k: usize| math::ceil(lambda * math::exp(beta * k as f64));
    let first = count(1);
    if first > avail as f64 {
        let minimum = if first.is_finite() && first < 1e18 {
            first as usize + 1
        } else {
            usize::MAX
        };
        return Err(Error::InsufficientBudget { budget, minimum });
    }
    let mut counts = Vec::new();
    let mut used = 0usize;
    let mut k = 1;
    loop {
        let c = count(k);
        if used as f64 + c > avail as f64 {
            break;
        }
        let c = c as usize;
        counts.push(c);
        used += c;
        k += 1;
    }
    let last = counts.last_mut().expect("first segment fits");
    *last += avail - used;
    Ok(RestartSchedule {
        lambda,
        beta,
        inner_counts: counts,
        budget,
    })
}

/// The schedule for a (mu, alpha)-uniformly monotone operator with ||x0 - x_star|| = dist0.
pub fn make_schedule(mu: f64, alpha: f64, dist0: f64, budget: usize) -> Result<RestartSchedule> {
    let (lambda, beta) = schedule_scale(mu, alpha, dist0)?;
    schedule_from_scale(lambda, beta, budget)
}

/// lambda in {2^j : 2^j <= N}, beta in {1/2, 3/4, 7/8, 15/16}.
pub fn default_grid(budget: usize) -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    let mut lambda = 1.0;
    while lambda <= budget.max(1) as f64 {
        for i in 1..=4 {
            grid.push((lambda, 1.0 - math::powi(0.5, i)));
        }
        lambda *= 2.0;
    }
    grid
}

/// One schedule per grid point. A grid point whose first segment does not fit the
/// budget degrades to a single segment of N - 1 steps.
pub fn grid_search_schedules(budget: usize, grid: &[(f64, f64)]) -> Vec<RestartSchedule> {
    grid.iter()
        .map(|&(lambda, beta)| {
            schedule_from_scale(lambda, beta, budget).unwrap_or_else(|_| RestartSchedule {
                lambda,
                beta,
                inner_counts: if budget >= 2 { alloc::vec![budget - 1] } else { Vec::new() },
                budget,
            })
        })
        .collect()
}

fn push_proximal(
    trace: &mut IterationTrace,
    probe: &Probe<'_>,
    k: usize,
    x: Point,
    residual: Point,
    y: Point,
) -> Result<()> {
    let mut rec = Record::new(k, y);
    rec.residual_sq = Some(probe.sq(&residual)?);
    rec.dist_sq = probe.dist_sq(&x)?;
    rec.x = Some(x);
    rec.residual = Some(residual);
    trace.push(rec)
}

/// x~_0 = J_A y0, then x~_k = t_k steps of OS-PPM with mu = 0 started at x~_{k-1}.
///
/// Exactly `schedule.budget` resolvent calls; record i holds the i-th call.
pub fn restarted_os_ppm<A: ResolventOracle + ?Sized>(
    a: &A,
    y0: &Point,
    schedule: &RestartSchedule,
    probe: &Probe<'_>,
) -> Result<IterationTrace> {
    schedule.check_budget()?;
    y0.check_dim(a.dim())?;
    if !y0.is_finite() {
        return Err(Error::NonFiniteInput { index: 0 });
    }
    let solver = "restarted_os_ppm";
    let mut trace = IterationTrace::new(solver, probe.norm_kind());
    let mut rec = Record::new(0, y0.clone());
    rec.dist_sq = probe.dist_sq(y0)?;
    trace.push(rec)?;

    let x0 = a.resolve(y0)?;
    if !x0.is_finite() {
        return Err(Error::NonFinite { solver, iteration: 1 });
    }
    let mut anchor = x0.clone();
    push_proximal(&mut trace, probe, 1, x0.clone(), y0 - &x0, x0)?;
    trace.restarts = schedule.boundaries();

    let mut k = 1;
    for &t in &schedule.inner_counts {
        let mut state = OsPpmState::new(0.0, &anchor, t)?;
        for j in 1..=t {
            k += 1;
            let s = state.step(a, solver).map_err(|e| match e {
                Error::NonFinite { solver, .. } => Error::NonFinite { solver, iteration: k },
                e => e,
            })?;
            let y = if j == t { s.x.clone() } else { s.y };
            if j == t {
                anchor = s.x.clone();
            }
            push_proximal(&mut trace, probe, k, s.x, s.residual, y)?;
        }
    }
    Ok(trace)
}

/// The nonexpansive-operator form of `restarted_os_ppm`: each segment is an OHM run
/// from the current anchor followed by one averaged step (y + T y)/2.
///
/// Record i (i < N) is the i-th query point with its fixed-point residual; the last
/// record is the final anchor, whose residual costs one extra evaluation of T.
pub fn restarted_oc_halpern<T: FixedPointMap + ?Sized>(
    t: &T,
    y0: &Point,
    schedule: &RestartSchedule,
    probe: &Probe<'_>,
) -> Result<IterationTrace> {
    schedule.check_budget()?;
    y0.check_dim(t.dim())?;
    if !y0.is_finite() {
        return Err(Error::NonFiniteInput { index: 0 });
    }
    let solver = "restarted_oc_halpern";
    let mut trace = IterationTrace::new(solver, probe.norm_kind());
    let mut k = 0;
    let eval = |trace: &mut IterationTrace, k: usize, y: &Point| -> Result<Point> {
        let ty = t.apply(y)?;
        if !ty.is_finite() {
            return Err(Error::NonFinite { solver, iteration: k });
        }
        let residual = y - &ty;
        let mut rec = Record::new(k, y.clone());
        rec.residual_sq = Some(probe.sq(&residual)?);
        rec.dist_sq = probe.dist_sq(y)?;
        rec.residual = Some(residual);
        trace.push(rec)?;
        Ok(ty)
    };
    let ty0 = eval(&mut trace, k, y0)?;
    let mut anchor = Point::lincomb(0.5, y0, 0.5, &ty0);
    for &seg in &schedule.inner_counts {
        let phi = PhiSequence::new(1.0, seg)?;
        let mut y = anchor.clone();
        for j in 0..seg {
            k += 1;
            let ty = eval(&mut trace, k, &y)?;
            if j + 1 == seg {
                anchor = Point::lincomb(0.5, &y, 0.5, &ty);
            } else {
                let w = 1.0 / phi.value(j as isize + 1);
                y = Point::lincomb(1.0 - w, &ty, w, &anchor);
            }
        }
    }
    k += 1;
    eval(&mut trace, k, &anchor)?;
    trace.restarts = schedule.boundaries();
    Ok(trace)
}
