//! Worst-case operators, the span condition and the resisting oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::upper_bound_contraction;
use crate::error::{require, Error, Result};
use crate::linalg::DenseMatrix;
use crate::math;
use crate::operator::FixedPointMap;
use crate::phi::{check_horizon, PhiSequence};
use crate::point::Point;
use crate::trace::IterationTrace;

/// Largest N + 1 for which `dense_h` will materialize H.
pub const DENSE_LIMIT: usize = 64;

/// The worst-case 1/gamma-contraction on R^{N+1}, shifted to base point y0:
/// T y = T0(y - y0) + y0 with T0 z = z - ((1+gamma)/gamma)(H z - b).
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseInstance {
    pub horizon: usize,
    pub gamma: f64,
    pub radius: f64,
    pub y0: Point,
    pub b: Point,
    pub y_star: Point,
}

pub fn build_worst_case(horizon: usize, gamma: f64, radius: f64, y0: Point) -> Result<WorstCaseInstance> {
    require(horizon >= 1, "N", horizon as f64, "must be >= 1")?;
    require(gamma >= 1.0 && gamma.is_finite(), "gamma", gamma, "must be finite and >= 1")?;
    require(radius > 0.0 && radius.is_finite(), "R", radius, "must be finite and > 0")?;
    check_horizon(gamma, horizon)?;
    let dim = horizon + 1;
    y0.check_dim(dim)?;
    let phi = PhiSequence::new(gamma, horizon)?;
    let root = math::sqrt(phi.value(horizon as isize));
    let mut b = Point::zeros(dim);
    b[0] = (1.0 + math::powi(gamma, horizon + 1)) / root * radius / (1.0 + gamma);
    let mut y_star = y0.clone();
    for i in 0..dim {
        y_star[i] += radius / root * math::powi(gamma, horizon - i);
    }
    Ok(WorstCaseInstance {
        horizon,
        gamma,
        radius,
        y0,
        b,
        y_star,
    })
}

/// (1 + 1/gamma)^2 (1 / sum_{k=0}^{N} gamma^k)^2 R^2
pub fn lower_bound_value(horizon: usize, gamma: f64, radius: f64) -> f64 {
    upper_bound_contraction(horizon, gamma, radius)
}

impl WorstCaseInstance {
    pub fn dim(&self) -> usize {
        self.horizon + 1
    }

    /// Entry (i, j) of H.
    pub fn h_entry(&self, i: usize, j: usize) -> f64 {
        let n = self.horizon;
        let s = 1.0 / (1.0 + self.gamma);
        if i == j {
            self.gamma * s
        } else if i == j + 1 {
            -s
        } else if i == 0 && j == n {
            s
        } else {
            0.0
        }
    }

    /// H as a dense matrix, only for N + 1 <= `DENSE_LIMIT`.
    pub fn dense_h(&self) -> Option<DenseMatrix> {
        let d = self.dim();
        if d > DENSE_LIMIT {
            return None;
        }
        let mut m = DenseMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, self.h_entry(i, j));
            }
        }
        Some(m)
    }

    pub fn h_apply(&self, z: &[f64]) -> Vec<f64> {
        let n = self.horizon;
        let g = self.gamma;
        let s = 1.0 / (1.0 + g);
        let mut out = vec![0.0; n + 1];
        out[0] = s * (g * z[0] + z[n]);
        for i in 1..=n {
            out[i] = s * (g * z[i] - z[i - 1]);
        }
        out
    }

    /// G z = H z - b
    pub fn g_apply(&self, z: &Point) -> Result<Point> {
        z.check_dim(self.dim())?;
        let mut out = Point::from(self.h_apply(z.as_slice()));
        out.axpy(-1.0, &self.b);
        Ok(out)
    }

    /// The unshifted operator T0 z = z - ((1+gamma)/gamma) G z.
    pub fn t0_apply(&self, z: &Point) -> Result<Point> {
        let g = self.g_apply(z)?;
        Ok(Point::lincomb(1.0, z, -(1.0 + self.gamma) / self.gamma, &g))
    }

    /// v = (1, gamma, ..., gamma^N)
    pub fn v(&self) -> Point {
        Point::from((0..self.dim()).map(|i| math::powi(self.gamma, i)).collect::<Vec<_>>())
    }

    /// The fixed point of the unshifted operator.
    pub fn z_star(&self) -> Point {
        &self.y_star - &self.y0
    }
}

impl FixedPointMap for WorstCaseInstance {
    fn dim(&self) -> usize {
        self.horizon + 1
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn apply(&self, y: &Point) -> Result<Point> {
        y.check_dim(self.dim())?;
        let z = y - &self.y0;
        let mut out = self.t0_apply(&z)?;
        out.axpy(1.0, &self.y0);
        Ok(out)
    }
}

/// Incrementally built orthonormal basis with one re-orthogonalization pass.
#[derive(Debug, Clone, Default)]
pub struct OrthoBasis {
    vectors: Vec<Point>,
}

impl OrthoBasis {
    pub fn new() -> Self {
        OrthoBasis::default()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Point] {
        &self.vectors
    }

    /// The component of `v` orthogonal to the span.
    pub fn residual(&self, v: &Point) -> Point {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.vectors {
                let c = q.dot(&r);
                r.axpy(-c, q);
            }
        }
        r
    }

    /// Adds `v` if it has a component outside the span larger than `rel_tol * |v|`.
    pub fn push(&mut self, v: &Point, rel_tol: f64) -> bool {
        let nv = v.norm();
        if nv == 0.0 {
            return false;
        }
        let r = self.residual(v);
        let nr = r.norm();
        if nr <= rel_tol * nv {
            return false;
        }
        self.vectors.push((1.0 / nr) * &r);
        true
    }
}

/// Relative size below which a new direction counts as already in the span.
const SPAN_DROP: f64 = 1e-12;

fn span_check<'a>(
    trace: &'a IterationTrace,
    tol: f64,
    generators: impl Fn(usize) -> Result<Option<&'a Point>>,
    include_current: bool,
) -> Result<bool> {
    let Some(first) = trace.records.first() else {
        return Ok(true);
    };
    let y0 = &first.y;
    let mut basis = OrthoBasis::new();
    for (i, rec) in trace.records.iter().enumerate() {
        if i > 0 && !include_current {
            if let Some(g) = generators(i - 1)? {
                basis.push(g, SPAN_DROP);
            }
        }
        if include_current {
            if let Some(g) = generators(i)? {
                basis.push(g, SPAN_DROP);
            }
        }
        if i == 0 {
            continue;
        }
        let d = &rec.y - y0;
        let nd = d.norm();
        if basis.residual(&d).norm() > tol * nd {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff every y_k - y_0 lies in span{y_0 - T y_0, ..., y_{k-1} - T y_{k-1}}, up to
/// a distance of `tol * |y_k - y_0|`.
pub fn verify_span_condition(trace: &IterationTrace, tol: f64) -> Result<bool> {
    span_check(
        trace,
        tol,
        |i| {
            trace.records[i]
                .residual
                .as_ref()
                .map(Some)
                .ok_or(Error::MissingResidual { index: i })
        },
        false,
    )
}

/// The proximal analogue: the query point after x_k lies in
/// y_0 + span{A~ x_1, ..., A~ x_k}.
pub fn verify_span_condition_proximal(trace: &IterationTrace, tol: f64) -> Result<bool> {
    span_check(
        trace,
        tol,
        |i| {
            if i == 0 {
                return Ok(None);
            }
            trace.records[i]
                .residual
                .as_ref()
                .map(Some)
                .ok_or(Error::MissingResidual { index: i })
        },
        true,
    )
}

/// A deterministic fixed-point iteration seen through its queries: given y0 and the
/// history of (y_s, y_s - T y_s) for s < t, produce the next query y_t.
pub trait QueryAlgorithm {
    fn query(&self, t: usize, y0: &Point, history: &[(Point, Point)]) -> Result<Point>;
}

impl<F> QueryAlgorithm for F
where
    F: Fn(usize, &Point, &[(Point, Point)]) -> Result<Point>,
{
    fn query(&self, t: usize, y0: &Point, history: &[(Point, Point)]) -> Result<Point> {
        self(t, y0, history)
    }
}

fn previous_image(history: &[(Point, Point)]) -> Point {
    let (y, r) = history.last().expect("query index starts at 1");
    y - r
}

/// y_t = (1 - 1/phi_t) T y_{t-1} + (1/phi_t) y_0
pub fn oc_halpern_victim(gamma: f64) -> impl QueryAlgorithm {
    move |t: usize, y0: &Point, h: &[(Point, Point)]| -> Result<Point> {
        let phi = PhiSequence::new(gamma, t)?;
        let w = 1.0 / phi.value(t as isize);
        Ok(Point::lincomb(1.0 - w, &previous_image(h), w, y0))
    }
}

/// y_t = lambda(t-1) y_0 + (1 - lambda(t-1)) T y_{t-1}, the same indexing as `solvers::halpern`.
pub fn halpern_victim<L: Fn(usize) -> f64>(lambda: L) -> impl QueryAlgorithm {
    move |t: usize, y0: &Point, h: &[(Point, Point)]| -> Result<Point> {
        let l = lambda(t - 1);
        Ok(Point::lincomb(l, y0, 1.0 - l, &previous_image(h)))
    }
}

/// y_t = T y_{t-1}
pub fn picard_victim() -> impl QueryAlgorithm {
    |_t: usize, _y0: &Point, h: &[(Point, Point)]| -> Result<Point> { Ok(previous_image(h)) }
}

/// y_t = lambda y_{t-1} + (1 - lambda) T y_{t-1}
pub fn km_victim(lambda: f64) -> impl QueryAlgorithm {
    move |_t: usize, _y0: &Point, h: &[(Point, Point)]| -> Result<Point> {
        let (y, _) = h.last().expect("query index starts at 1");
        Ok(Point::lincomb(lambda, y, 1.0 - lambda, &previous_image(h)))
    }
}

/// Result of a run against the resisting oracle.
#[derive(Debug, Clone)]
pub struct ResistingOutcome {
    pub final_residual_sq: f64,
    /// ||y0 - y_star|| for the embedded operator (equal to R).
    pub radius: f64,
    pub lower_bound: f64,
    /// Query points y_0..y_N.
    pub queries: Vec<Point>,
    /// Oracle answers y_t - T_U y_t.
    pub answers: Vec<Point>,
    /// z^{(t)} = U^T (y_t - y_0).
    pub projected: Vec<Point>,
    /// Columns u_0..u_N of U.
    pub columns: Vec<Point>,
    pub instance: WorstCaseInstance,
    pub y_star: Point,
}

impl ResistingOutcome {
    /// U^T U, which is the identity by construction.
    pub fn gram(&self) -> DenseMatrix {
        let m = self.columns.len();
        let mut g = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                g.set(i, j, self.columns[i].dot(&self.columns[j]));
            }
        }
        g
    }

    /// The embedded operator T_U y = y0 + U T0(U^T (y - y0)).
    pub fn apply_embedded(&self, y: &Point) -> Result<Point> {
        let y0 = &self.queries[0];
        let d = y - y0;
        let z = Point::from(self.columns.iter().map(|u| u.dot(&d)).collect::<Vec<_>>());
        let w = self.instance.t0_apply(&z)?;
        let mut out = y0.clone();
        for (u, wi) in self.columns.iter().zip(w.iter()) {
            out.axpy(*wi, u);
        }
        Ok(out)
    }
}

/// Support threshold for deciding which coordinates of z - T0 z are nonzero.
pub const SUPPORT_TOL: f64 = 1e-13;

struct Adversary {
    dim: usize,
    columns: Vec<Option<Point>>,
    /// Orthonormal basis of span{queries so far} + chosen columns.
    span: OrthoBasis,
}

impl Adversary {
    fn choose_column(&mut self) -> Option<Point> {
        let mut best: Option<(f64, Point)> = None;
        for i in 0..self.dim {
            let r = self.span.residual(&Point::basis(self.dim, i));
            let n = r.norm();
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, r));
            }
        }
        let (n, r) = best?;
        if n < 1e-8 {
            return None;
        }
        let u = self.span.residual(&((1.0 / n) * &r));
        let u = (1.0 / u.norm()) * &u;
        self.span.push(&u, 0.0);
        Some(u)
    }
}

/// Runs `algorithm` for N steps against an adversary that embeds the worst-case
/// operator of `build_worst_case(N, gamma, R, 0)` into R^n through columns chosen
/// orthogonally to everything the algorithm has seen.
pub fn resisting_oracle<Alg: QueryAlgorithm + ?Sized>(
    algorithm: &Alg,
    horizon: usize,
    y0: &Point,
    gamma: f64,
    radius: f64,
) -> Result<ResistingOutcome> {
    let n = y0.dim();
    if n < 2 * horizon {
        return Err(Error::DimensionTooSmall {
            dim: n,
            required: 2 * horizon,
        });
    }
    if !y0.is_finite() {
        return Err(Error::NonFiniteInput { index: 0 });
    }
    let instance = build_worst_case(horizon, gamma, radius, Point::zeros(horizon + 1))?;
    let m = horizon + 1;
    let mut adv = Adversary {
        dim: n,
        columns: vec![None; m],
        span: OrthoBasis::new(),
    };
    let mut history: Vec<(Point, Point)> = Vec::with_capacity(m);
    let mut projected = Vec::with_capacity(m);
    let too_small = || Error::DimensionTooSmall {
        dim: n,
        required: 2 * horizon + 1,
    };

    for t in 0..=horizon {
        let y = if t == 0 {
            y0.clone()
        } else {
            let a = algorithm.query(t, y0, &history)?;
            let b = algorithm.query(t, y0, &history)?;
            if a != b {
                return Err(Error::Nondeterministic { step: t });
            }
            a.check_dim(n)?;
            if !a.is_finite() {
                return Err(Error::NonFinite {
                    solver: "resisting_oracle",
                    iteration: t,
                });
            }
            a
        };
        let d = &y - y0;
        adv.span.push(&d, SPAN_DROP);
        let z = Point::from(
            adv.columns
                .iter()
                .map(|c| c.as_ref().map_or(0.0, |u| u.dot(&d)))
                .collect::<Vec<_>>(),
        );
        let tz = instance.t0_apply(&z)?;
        let w = &z - &tz;
        for i in 0..m {
            if adv.columns[i].is_none() && w[i].abs() > SUPPORT_TOL {
                adv.columns[i] = Some(adv.choose_column().ok_or_else(too_small)?);
            }
        }
        let mut answer = d.clone();
        for (i, c) in adv.columns.iter().enumerate() {
            if let Some(u) = c {
                answer.axpy(-tz[i], u);
            }
        }
        projected.push(z);
        history.push((y, answer));
    }
    for i in 0..m {
        if adv.columns[i].is_none() {
            adv.columns[i] = Some(adv.choose_column().ok_or_else(too_small)?);
        }
    }
    let columns: Vec<Point> = adv.columns.into_iter().map(|c| c.expect("completed")).collect();
    let mut y_star = y0.clone();
    let zs = instance.z_star();
    for (u, zi) in columns.iter().zip(zs.iter()) {
        y_star.axpy(*zi, u);
    }
    let (queries, answers): (Vec<Point>, Vec<Point>) = history.into_iter().unzip();
    let final_residual_sq = answers.last().expect("N >= 1").norm_sq();
    let radius_out = math::sqrt(y0.dist_sq(&y_star));
    Ok(ResistingOutcome {
        final_residual_sq,
        radius: radius_out,
        lower_bound: lower_bound_value(horizon, gamma, radius_out),
        queries,
        answers,
        projected,
        columns,
        instance,
        y_star,
    })
}
