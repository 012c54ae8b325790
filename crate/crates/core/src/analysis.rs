//! Lyapunov certificates, theoretical rate curves and empirical rate fitting.

use crate::error::{require, Error, Result};
use crate::math;
use crate::point::Point;
use crate::restart::schedule_scale;
use crate::trace::IterationTrace;

/// The quantities the OS-PPM potential is evaluated on at step `k`.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovInputs<'a> {
    pub k: usize,
    pub x_k: &'a Point,
    /// The resolvent residual y_{k-1} - x_k.
    pub residual: &'a Point,
    pub y0: &'a Point,
    pub x_star: &'a Point,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovForm {
    /// The three-bracket definition.
    Primary,
    /// The expanded form anchored at y0 instead of x_star.
    Alternate,
}

/// Returns (gamma^{-k}, sum_{n<k} gamma^n, gamma^{k/2}) for gamma = 1 + 2 mu.
fn lyapunov_scales(k: usize, mu: f64) -> (f64, f64, f64) {
    if mu == 0.0 {
        return (1.0, k as f64, 1.0);
    }
    let lg = math::log1p(2.0 * mu);
    let kl = k as f64 * lg;
    let s = math::expm1(kl) / (2.0 * mu);
    (math::exp(-kl), s, math::exp(0.5 * kl))
}

pub fn lyapunov_value(inp: &LyapunovInputs<'_>, form: LyapunovForm) -> Result<f64> {
    require(inp.mu >= 0.0, "mu", inp.mu, "must be >= 0")?;
    let n = inp.y0.dim();
    for p in [inp.x_k, inp.residual, inp.x_star] {
        p.check_dim(n)?;
    }
    let anchor = 2.0 * inp.y0.dist_sq(inp.x_star);
    if inp.k == 0 {
        return Ok(anchor);
    }
    let mu = inp.mu;
    let r = inp.residual;
    let (g, s, half) = lyapunov_scales(inp.k, mu);
    match form {
        LyapunovForm::Primary => {
            let d = inp.x_k - inp.x_star;
            let e = inp.x_k - inp.y0;
            let rn = s * r.norm();
            let cross = 2.0 * s * (r.dot(&d) - mu * d.norm_sq());
            // gamma^{-k} ||S r - gamma^k d + e||^2 with gamma^{k/2} split out
            let mut w = Point::lincomb(s / half, r, -half, &d);
            w.axpy(1.0 / half, &e);
            let inner = rn * rn + cross + w.norm_sq();
            Ok((1.0 + g) * inner + (1.0 - g) * inp.y0.dist_sq(inp.x_star))
        }
        LyapunovForm::Alternate => {
            // gamma^{-k}(1+gamma) phi_{k-1} = (1 + gamma^{-k}) S
            let a = (1.0 + g) * s;
            let e = inp.x_k - inp.y0;
            let an = a * r.norm();
            let cross = 2.0 * g * a * (r.dot(&e) - mu * e.norm_sq());
            Ok(an * an + cross + anchor)
        }
    }
}

fn geometric(r: f64, n: usize) -> f64 {
    math::geometric_sum(r, n)
}

/// (1 + 1/gamma)^2 (1 / sum_{k=0}^{N} gamma^k)^2 dist0^2
pub fn upper_bound_contraction(n: usize, gamma: f64, dist0: f64) -> f64 {
    let c = 1.0 + 1.0 / gamma;
    let s = geometric(gamma, n);
    let q = c * dist0 / s;
    q * q
}

/// (1 / sum_{k=0}^{N-1} (1+2mu)^k)^2 dist0^2; infinite for N = 0.
pub fn upper_bound_monotone(n: usize, mu: f64, dist0: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let s = geometric(1.0 + 2.0 * mu, n - 1);
    let q = dist0 / s;
    q * q
}

/// The constant C shared by both proximal-point bounds.
fn ppm_constant(mu: f64, alpha: f64, dist0: f64) -> f64 {
    let base = (math::powf(2.0, alpha / (alpha - 1.0)) - 2.0) / mu;
    let first = math::powf(base, 2.0 / (alpha - 1.0));
    first.max(dist0 * dist0)
}

/// Bounds for the proximal point method on a (mu, alpha)-uniformly monotone operator
/// after N steps: (||x_N - x_star||^2 bound, ||A x_N||^2 bound).
pub fn ppm_uniform_bounds(n: usize, mu: f64, alpha: f64, dist0: f64) -> Result<(f64, f64)> {
    require(mu > 0.0, "mu", mu, "must be > 0")?;
    require(alpha > 1.0, "alpha", alpha, "must be > 1")?;
    require(n >= 1, "N", n as f64, "must be >= 1")?;
    let c = ppm_constant(mu, alpha, dist0);
    let nf = n as f64;
    let dist = c / math::powf(nf, 2.0 / (alpha - 1.0));
    let res = math::powf(2.0, (alpha + 3.0) / (alpha - 1.0)) * c
        / math::powf(nf, (alpha + 1.0) / (alpha - 1.0));
    Ok((dist, res))
}

/// The restarted OS-PPM guarantee on ||A x_N||^2 for budget N.
pub fn restarted_bound(n: usize, mu: f64, alpha: f64, dist0: f64) -> Result<f64> {
    let (lambda, beta) = schedule_scale(mu, alpha, dist0)?;
    let eb = math::exp(beta);
    let nf = n as f64;
    let log_term = math::ln((eb - 1.0) / (lambda * eb) * (nf - 1.0) + 1.0) / beta;
    let inner = (eb - 1.0) / (lambda * eb * eb) * (nf - 2.0 - log_term) + 1.0 / eb;
    if inner.is_nan() || inner <= 0.0 || nf < 2.0 {
        return Err(Error::BelowAsymptoticRegime { budget: n });
    }
    Ok(math::powf(inner, -2.0 * alpha / (alpha - 1.0)) * dist0 * dist0)
}

/// Least-squares slope of log(residual_sq) against log(k).
///
/// `window` is an inclusive k-range; `None` drops the first 20% of iterations.
/// Records with k = 0 or without a residual are skipped.
pub fn rate_fit(trace: &IterationTrace, window: Option<(usize, usize)>) -> Result<f64> {
    let kmax = trace.records.last().map_or(0, |r| r.k);
    let (lo, hi) = window.unwrap_or((math::ceil(kmax as f64 * 0.2) as usize, kmax));
    let mut n = 0.0;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for rec in &trace.records {
        if rec.k == 0 || rec.k < lo || rec.k > hi {
            continue;
        }
        let Some(v) = rec.residual_sq else { continue };
        if v <= 0.0 {
            return Err(Error::ZeroResidual { iteration: rec.k });
        }
        let x = math::ln(rec.k as f64);
        let y = math::ln(v);
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    if n < 2.0 {
        return Err(Error::WindowTooSmall { found: n as usize });
    }
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::WindowTooSmall { found: n as usize });
    }
    Ok((n * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{NormKind, Record};
    use alloc::vec;

    fn synthetic(f: impl Fn(usize) -> f64, n: usize) -> IterationTrace {
        let mut t = IterationTrace::new("synthetic", NormKind::Euclidean);
        for k in 0..=n {
            let mut r = Record::new(k, Point::zeros(1));
            r.residual_sq = Some(f(k));
            t.push(r).unwrap();
        }
        t
    }

    #[test]
    fn rate_fit_power_law_and_constant() {
        let t = synthetic(|k| (k as f64).powi(-4), 500);
        assert!((rate_fit(&t, None).unwrap() + 4.0).abs() < 1e-6);
        let c = synthetic(|_| 0.3, 100);
        assert!(rate_fit(&c, None).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rate_fit_rejects_zero_and_tiny_windows() {
        let t = synthetic(|k| if k > 50 { 0.0 } else { 1.0 / k as f64 }, 100);
        assert_eq!(rate_fit(&t, None), Err(Error::ZeroResidual { iteration: 51 }));
        let t = synthetic(|k| 1.0 / (k as f64 + 1.0), 10);
        assert!(matches!(
            rate_fit(&t, Some((5, 5))),
            Err(Error::WindowTooSmall { found: 1 })
        ));
    }

    #[test]
    fn contraction_bound_values() {
        assert_eq!(upper_bound_contraction(0, 2.0, 1.0), 2.25);
        for n in 0..20 {
            let expect = 4.0 / ((n + 1) as f64).powi(2);
            assert!((upper_bound_contraction(n, 1.0, 1.0) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn monotone_bound_values() {
        assert_eq!(upper_bound_monotone(1, 0.3, 2.0), 4.0);
        assert!((upper_bound_monotone(10, 0.0, 1.0) - 0.01).abs() < 1e-17);
        assert!(upper_bound_monotone(0, 0.0, 1.0).is_infinite());
    }

    #[test]
    fn ppm_bounds_example() {
        let (d, r) = ppm_uniform_bounds(1, 1.0, 2.0, 1.0).unwrap();
        assert!((d - 4.0).abs() < 1e-12);
        assert!((r - 32.0 * 4.0).abs() < 1e-10);
        let (d10, _) = ppm_uniform_bounds(10, 1.0, 2.0, 1.0).unwrap();
        assert!((d10 - 0.04).abs() < 1e-14);
        assert!(ppm_uniform_bounds(1, 0.0, 2.0, 1.0).is_err());
        assert!(ppm_uniform_bounds(1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn restarted_bound_regimes() {
        assert!(matches!(
            restarted_bound(1, 100.0, 2.0, 1.0),
            Err(Error::BelowAsymptoticRegime { .. })
        ));
        let b = restarted_bound(100, 1.0, 2.0, 1.0).unwrap();
        assert!(b.is_finite() && b > 0.0);
    }

    #[test]
    fn lyapunov_at_zero_and_solution() {
        let y0 = Point::from(vec![1.0, 2.0]);
        let xs = Point::from(vec![0.0, 1.0]);
        let inp = LyapunovInputs {
            k: 0,
            x_k: &y0,
            residual: &y0,
            y0: &y0,
            x_star: &xs,
            mu: 0.2,
        };
        assert_eq!(lyapunov_value(&inp, LyapunovForm::Primary).unwrap(), 4.0);
        let z = Point::zeros(2);
        for k in [1, 5, 40] {
            let inp = LyapunovInputs {
                k,
                x_k: &z,
                residual: &z,
                y0: &z,
                x_star: &z,
                mu: 0.5,
            };
            assert_eq!(lyapunov_value(&inp, LyapunovForm::Primary).unwrap(), 0.0);
            assert_eq!(lyapunov_value(&inp, LyapunovForm::Alternate).unwrap(), 0.0);
        }
    }
}
