//! Operator interfaces and the residual oracles built on them.

use alloc::boxed::Box;
use alloc::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::point::Point;

/// An operator T: R^n -> R^n that is declared 1/gamma-Lipschitz.
///
/// The modulus is trusted metadata; it is checked by sampling in tests, not here.
pub trait FixedPointMap: Send + Sync {
    fn dim(&self) -> usize;
    fn gamma(&self) -> f64;
    fn apply(&self, y: &Point) -> Result<Point>;
}

/// The resolvent y -> (I + A)^{-1} y of a maximal mu-strongly monotone A.
pub trait ResolventOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn mu(&self) -> f64;
    fn resolve(&self, y: &Point) -> Result<Point>;
}

/// A symmetric positive semidefinite linear map used to measure residuals.
pub trait MetricMatrix: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &Point) -> Result<Point>;
}

macro_rules! forward_impls {
    ($tr:ident { $($m:ident($($a:ident: $t:ty),*) -> $r:ty;)* }) => {
        impl<T: $tr + ?Sized> $tr for &T {
            $(fn $m(&self $(, $a: $t)*) -> $r { (**self).$m($($a),*) })*
        }
        impl<T: $tr + ?Sized> $tr for Box<T> {
            $(fn $m(&self $(, $a: $t)*) -> $r { (**self).$m($($a),*) })*
        }
        impl<T: $tr + ?Sized> $tr for Arc<T> {
            $(fn $m(&self $(, $a: $t)*) -> $r { (**self).$m($($a),*) })*
        }
    };
}

forward_impls!(FixedPointMap {
    dim() -> usize;
    gamma() -> f64;
    apply(y: &Point) -> Result<Point>;
});
forward_impls!(ResolventOracle {
    dim() -> usize;
    mu() -> f64;
    resolve(y: &Point) -> Result<Point>;
});
forward_impls!(MetricMatrix {
    dim() -> usize;
    apply(v: &Point) -> Result<Point>;
});

/// `y - T(y)`
pub fn fixed_point_residual<T: FixedPointMap + ?Sized>(t: &T, y: &Point) -> Result<Point> {
    y.check_dim(t.dim())?;
    let ty = t.apply(y)?;
    ty.check_dim(t.dim())?;
    Ok(y - &ty)
}

/// `(J_A y, y - J_A y)`; the second component lies in `A(J_A y)`.
pub fn resolvent_residual<A: ResolventOracle + ?Sized>(a: &A, y: &Point) -> Result<(Point, Point)> {
    y.check_dim(a.dim())?;
    let x = a.resolve(y)?;
    x.check_dim(a.dim())?;
    let r = y - &x;
    Ok((x, r))
}

/// Relative tolerance below zero that `metric_norm_sq` treats as rounding.
pub const METRIC_TOL: f64 = 1e-10;

/// `<Mv, v>`, clamped at zero when it is negative only by rounding.
pub fn metric_norm_sq<M: MetricMatrix + ?Sized>(m: &M, v: &Point) -> Result<f64> {
    v.check_dim(m.dim())?;
    let mv = m.apply(v)?;
    let value = mv.dot(v);
    let scale = mv.norm() * v.norm();
    if value >= 0.0 {
        Ok(value)
    } else if value >= -METRIC_TOL * scale {
        Ok(0.0)
    } else {
        Err(Error::NonPsdMetric { value })
    }
}

/// A map given by a closure.
pub struct FnMap<F> {
    dim: usize,
    gamma: f64,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&Point) -> Point + Send + Sync,
{
    pub fn new(dim: usize, gamma: f64, f: F) -> Self {
        FnMap { dim, gamma, f }
    }
}

impl<F> FixedPointMap for FnMap<F>
where
    F: Fn(&Point) -> Point + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn apply(&self, y: &Point) -> Result<Point> {
        y.check_dim(self.dim)?;
        Ok((self.f)(y))
    }
}

/// A resolvent given by a closure.
pub struct FnResolvent<F> {
    dim: usize,
    mu: f64,
    f: F,
}

impl<F> FnResolvent<F>
where
    F: Fn(&Point) -> Point + Send + Sync,
{
    pub fn new(dim: usize, mu: f64, f: F) -> Self {
        FnResolvent { dim, mu, f }
    }
}

impl<F> ResolventOracle for FnResolvent<F>
where
    F: Fn(&Point) -> Point + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn resolve(&self, y: &Point) -> Result<Point> {
        y.check_dim(self.dim)?;
        Ok((self.f)(y))
    }
}

/// `T(y) = L y + c`.
#[derive(Debug, Clone)]
pub struct LinearMap {
    matrix: DenseMatrix,
    offset: Option<Point>,
    gamma: f64,
}

impl LinearMap {
    pub fn new(matrix: DenseMatrix, gamma: f64) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        Ok(LinearMap {
            matrix,
            offset: None,
            gamma,
        })
    }

    pub fn scaled_identity(dim: usize, scale: f64, gamma: f64) -> Self {
        let mut m = DenseMatrix::identity(dim);
        for i in 0..dim {
            m.set(i, i, scale);
        }
        LinearMap {
            matrix: m,
            offset: None,
            gamma,
        }
    }

    pub fn with_offset(mut self, offset: Point) -> Result<Self> {
        offset.check_dim(self.matrix.rows())?;
        self.offset = Some(offset);
        Ok(self)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl FixedPointMap for LinearMap {
    fn dim(&self) -> usize {
        self.matrix.rows()
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn apply(&self, y: &Point) -> Result<Point> {
        let mut out = self.matrix.apply(y)?;
        if let Some(c) = &self.offset {
            out.axpy(1.0, c);
        }
        Ok(out)
    }
}

/// Resolvent of the affine operator `A x = M x - c`, i.e. `x = (I + M)^{-1}(y + c)`.
#[derive(Debug, Clone)]
pub struct LinearResolvent {
    operator: DenseMatrix,
    inverse: DenseMatrix,
    shift: Option<Point>,
    mu: f64,
}

impl LinearResolvent {
    /// `mu` is the declared strong monotonicity of `operator`.
    pub fn new(operator: DenseMatrix, mu: f64) -> Result<Self> {
        let n = operator.rows();
        let i_plus = DenseMatrix::identity(n).lincomb(1.0, &operator, 1.0)?;
        let inverse = i_plus.inverse()?;
        Ok(LinearResolvent {
            operator,
            inverse,
            shift: None,
            mu,
        })
    }

    /// Shift so that `A x = M (x - x_star)`, whose unique zero is `x_star`.
    pub fn with_zero_at(mut self, x_star: &Point) -> Result<Self> {
        let c = self.operator.apply(x_star)?;
        self.shift = Some(c);
        Ok(self)
    }

    pub fn operator(&self) -> &DenseMatrix {
        &self.operator
    }

    /// Evaluates `A x`.
    pub fn forward(&self, x: &Point) -> Result<Point> {
        let mut out = self.operator.apply(x)?;
        if let Some(c) = &self.shift {
            out.axpy(-1.0, c);
        }
        Ok(out)
    }
}

impl ResolventOracle for LinearResolvent {
    fn dim(&self) -> usize {
        self.operator.rows()
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn resolve(&self, y: &Point) -> Result<Point> {
        match &self.shift {
            Some(c) => self.inverse.apply(&(y + c)),
            None => self.inverse.apply(y),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMetric(pub usize);

impl MetricMatrix for IdentityMetric {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, v: &Point) -> Result<Point> {
        v.check_dim(self.0)?;
        Ok(v.clone())
    }
}

impl MetricMatrix for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, v: &Point) -> Result<Point> {
        DenseMatrix::apply(self, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_residual_is_zero() {
        let t = LinearMap::scaled_identity(3, 1.0, 1.0);
        let y = Point::from(vec![1.0, -2.0, 5.0]);
        assert_eq!(fixed_point_residual(&t, &y).unwrap(), Point::zeros(3));
    }

    #[test]
    fn half_identity_residual() {
        let t = LinearMap::scaled_identity(2, 0.5, 2.0);
        let r = fixed_point_residual(&t, &Point::from(vec![2.0, 0.0])).unwrap();
        assert_eq!(r.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn residual_dimension_mismatch() {
        let t = LinearMap::scaled_identity(2, 0.5, 2.0);
        assert!(matches!(
            fixed_point_residual(&t, &Point::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_operator_and_scalar_resolvent() {
        let zero = LinearResolvent::new(DenseMatrix::zeros(2, 2), 0.0).unwrap();
        let (x, r) = resolvent_residual(&zero, &Point::from(vec![1.0, 1.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0]);
        assert_eq!(r.as_slice(), &[0.0, 0.0]);

        let a = LinearResolvent::new(DenseMatrix::identity(2), 1.0).unwrap();
        let (x, r) = resolvent_residual(&a, &Point::from(vec![2.0, 0.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 0.0]);
        assert_eq!(r.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn metric_norm_identity_and_zero() {
        let m = IdentityMetric(2);
        assert_eq!(metric_norm_sq(&m, &Point::from(vec![3.0, 4.0])).unwrap(), 25.0);
        assert_eq!(metric_norm_sq(&m, &Point::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn metric_norm_rejects_indefinite() {
        let m = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(matches!(
            metric_norm_sq(&m, &Point::from(vec![0.0, 1.0])),
            Err(Error::NonPsdMetric { .. })
        ));
    }

    #[test]
    fn shifted_resolvent_fixes_its_zero() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[-2.0, 1.0]]).unwrap();
        let xs = Point::from(vec![0.3, -0.7]);
        let a = LinearResolvent::new(m, 1.0).unwrap().with_zero_at(&xs).unwrap();
        let x = a.resolve(&xs).unwrap();
        assert!(x.max_abs_diff(&xs) < 1e-14);
        assert!(a.forward(&xs).unwrap().norm() < 1e-15);
    }
}
