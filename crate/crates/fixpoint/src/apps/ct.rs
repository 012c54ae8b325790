//! Total-variation CT reconstruction by PDHG.
//!
//! The state is the stack (x, u, v) of image, data-fit dual and gradient dual.

use fixpoint_core::{Error as CoreError, FixedPointMap, MetricMatrix, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::phantom::shepp_logan;
use super::radon::parallel_beam;
use super::sparse::SparseMatrix;
use crate::Result;

/// A serializable CT instance: geometry, ground-truth image and stepsizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtProblem {
    pub image_size: usize,
    pub n_angles: usize,
    pub image: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl CtProblem {
    pub fn shepp_logan(image_size: usize, n_angles: usize, alpha: f64, beta: f64, lambda: f64) -> Self {
        CtProblem {
            image_size,
            n_angles,
            image: shepp_logan(image_size),
            alpha,
            beta,
            lambda,
        }
    }

    pub fn build(&self) -> Result<(CtPdhg, CtMetric)> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CoreError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite and > 0",
                }
                .into());
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                reason: "must be finite and >= 0",
            }
            .into());
        }
        let n = self.image_size;
        if self.image.len() != n * n {
            return Err(CoreError::DimensionMismatch {
                expected: n * n,
                found: self.image.len(),
            }
            .into());
        }
        let radon = parallel_beam(n, self.n_angles)?;
        let b = radon.mul(&self.image);
        let op = CtPdhg {
            side: n,
            radon,
            b,
            alpha: self.alpha,
            beta: self.beta,
            lambda: self.lambda,
        };
        let metric = CtMetric { op: op.clone() };
        metric.check_psd()?;
        Ok((op, metric))
    }
}

/// One PDHG step for min 1/2 ||E x - b||^2 + lambda ||D x||_1.
#[derive(Debug, Clone)]
pub struct CtPdhg {
    side: usize,
    radon: SparseMatrix,
    b: Vec<f64>,
    alpha: f64,
    beta: f64,
    lambda: f64,
}

/// Shepp-Logan instance at the given size.
pub fn ct_pdhg(image_size: usize, n_angles: usize, alpha: f64, beta: f64, lambda_reg: f64) -> Result<(CtPdhg, CtMetric)> {
    CtProblem::shepp_logan(image_size, n_angles, alpha, beta, lambda_reg).build()
}

/// Componentwise clamp onto [-bound, bound].
pub fn project_box(v: f64, bound: f64) -> f64 {
    v.clamp(-bound, bound)
}

/// Forward differences along rows then columns, zero in the last column / row.
pub fn grad(x: &[f64], side: usize) -> Vec<f64> {
    let mut out = vec![0.0; 2 * side * side];
    let (h, v) = out.split_at_mut(side * side);
    for i in 0..side {
        for j in 0..side {
            let p = i * side + j;
            if j + 1 < side {
                h[p] = x[p + 1] - x[p];
            }
            if i + 1 < side {
                v[p] = x[p + side] - x[p];
            }
        }
    }
    out
}

/// Adjoint of `grad`.
pub fn grad_adjoint(g: &[f64], side: usize) -> Vec<f64> {
    let nn = side * side;
    let (h, v) = g.split_at(nn);
    let mut out = vec![0.0; nn];
    for i in 0..side {
        for j in 0..side {
            let p = i * side + j;
            if j + 1 < side {
                out[p + 1] += h[p];
                out[p] -= h[p];
            }
            if i + 1 < side {
                out[p + side] += v[p];
                out[p] -= v[p];
            }
        }
    }
    out
}

impl CtPdhg {
    pub fn image_len(&self) -> usize {
        self.side * self.side
    }

    pub fn data_len(&self) -> usize {
        self.radon.rows()
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn radon(&self) -> &SparseMatrix {
        &self.radon
    }

    pub fn measurements(&self) -> &[f64] {
        &self.b
    }

    pub fn stepsizes(&self) -> (f64, f64, f64) {
        (self.alpha, self.beta, self.lambda)
    }

    /// Splits a state into (x, u, v) views.
    pub fn split<'a>(&self, z: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let (x, rest) = z.split_at(self.image_len());
        let (u, v) = rest.split_at(self.data_len());
        (x, u, v)
    }

    /// The objective 1/2 ||E x - b||^2 + lambda ||D x||_1 at the image part of z.
    pub fn objective(&self, z: &Point) -> f64 {
        let (x, _, _) = self.split(z.as_slice());
        let ex = self.radon.mul(x);
        let fit: f64 = ex.iter().zip(&self.b).map(|(a, b)| (a - b) * (a - b)).sum();
        let tv: f64 = grad(x, self.side).iter().map(|g| g.abs()).sum();
        0.5 * fit + self.lambda * tv
    }
}

impl FixedPointMap for CtPdhg {
    fn dim(&self) -> usize {
        3 * self.image_len() + self.data_len()
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn apply(&self, z: &Point) -> fixpoint_core::Result<Point> {
        z.check_dim(self.dim())?;
        let (x, u, v) = self.split(z.as_slice());
        let (a, b) = (self.alpha, self.beta);
        let etu = self.radon.tr_mul(u);
        let dtv = grad_adjoint(v, self.side);
        let x1: Vec<f64> = (0..x.len()).map(|i| x[i] - a * etu[i] - b * dtv[i]).collect();
        let bar: Vec<f64> = x1.iter().zip(x).map(|(p, q)| 2.0 * p - q).collect();
        let ebar = self.radon.mul(&bar);
        let u1 = (0..u.len()).map(|i| (u[i] + a * ebar[i] - a * self.b[i]) / (1.0 + a));
        let dbar = grad(&bar, self.side);
        let bound = self.lambda * a / b;
        let v1 = (0..v.len()).map(|i| project_box(v[i] + b * dbar[i], bound));
        let mut out = x1;
        out.extend(u1);
        out.extend(v1);
        Ok(Point::from(out))
    }
}

/// The PDHG metric for the stacked state:
///
/// [ I/a     -E^T    -(b/a) D^T ]
/// [ -E       I/a        0      ]
/// [ -(b/a) D  0        I/a     ]
#[derive(Debug, Clone)]
pub struct CtMetric {
    op: CtPdhg,
}

impl CtMetric {
    fn quad(&self, z: &[f64]) -> f64 {
        let mz = self.apply_slice(z);
        mz.iter().zip(z).map(|(a, b)| a * b).sum()
    }

    fn apply_slice(&self, z: &[f64]) -> Vec<f64> {
        let op = &self.op;
        let (x, u, v) = op.split(z);
        let (a, b) = (op.alpha, op.beta);
        let c = b / a;
        let etu = op.radon.tr_mul(u);
        let dtv = grad_adjoint(v, op.side);
        let ex = op.radon.mul(x);
        let dx = grad(x, op.side);
        let mut out: Vec<f64> = (0..x.len()).map(|i| x[i] / a - etu[i] - c * dtv[i]).collect();
        out.extend((0..u.len()).map(|i| u[i] / a - ex[i]));
        out.extend((0..v.len()).map(|i| v[i] / a - c * dx[i]));
        out
    }

    /// Sampled quadratic-form test. The samples include the extremal direction
    /// (top singular pair of the coupling block, found by power iteration) and
    /// seeded Gaussian vectors.
    fn check_psd(&self) -> Result<()> {
        let op = &self.op;
        let (nx, nu) = (op.image_len(), op.data_len());
        let c = op.beta / op.alpha;
        let couple = |x: &[f64]| -> Vec<f64> {
            let mut k = op.radon.mul(x);
            k.extend(grad(x, op.side).iter().map(|g| c * g));
            k
        };
        let couple_t = |y: &[f64]| -> Vec<f64> {
            let (u, v) = y.split_at(nu);
            let etu = op.radon.tr_mul(u);
            let dtv = grad_adjoint(v, op.side);
            (0..nx).map(|i| etu[i] + c * dtv[i]).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x: Vec<f64> = (0..nx).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..200 {
            let y = couple_t(&couple(&x));
            let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 {
                break;
            }
            x = y.iter().map(|v| v / nrm).collect();
        }
        let kx = couple(&x);
        let knorm = kx.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut samples = Vec::new();
        if knorm > 0.0 {
            let mut z = x.clone();
            z.extend(kx.iter().map(|v| v / knorm));
            samples.push(z);
        }
        for _ in 0..8 {
            samples.push((0..self.dim()).map(|_| StandardNormal.sample(&mut rng)).collect());
        }
        for z in &samples {
            let q = self.quad(z);
            let scale: f64 = z.iter().map(|v| v * v).sum::<f64>() / op.alpha;
            if q < -1e-10 * scale {
                return Err(CoreError::NonPsdMetric { value: q }.into());
            }
        }
        Ok(())
    }
}

impl MetricMatrix for CtMetric {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, z: &Point) -> fixpoint_core::Result<Point> {
        z.check_dim(self.dim())?;
        Ok(Point::from(self.apply_slice(z.as_slice())))
    }
}
