//! Pointwise Finsler-norm algebra: the norm, its fundamental and Cartan
//! tensors, the Legendre transform and its inverse, the dual norm, and the
//! uniformity constants.

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::field::{CovectorField, MatrixField};
use crate::linalg::Matrix;
use crate::sampling;
use crate::scalar::{self, dot, Real, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T> {
    pub base_point: Vector<T>,
    pub components: Vector<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CotangentVector<T> {
    pub base_point: Vector<T>,
    pub components: Vector<T>,
}

impl<T: Real> TangentVector<T> {
    pub fn new(base_point: &[T], components: &[T]) -> Self {
        Self {
            base_point: base_point.iter().copied().collect(),
            components: components.iter().copied().collect(),
        }
    }
}

impl<T: Real> CotangentVector<T> {
    pub fn new(base_point: &[T], components: &[T]) -> Self {
        Self {
            base_point: base_point.iter().copied().collect(),
            components: components.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricVariant<T> {
    Euclidean,
    Riemannian { a: MatrixField<T> },
    Randers { a: MatrixField<T>, b: CovectorField<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricDescriptor<T> {
    pub dimension: usize,
    pub variant: MetricVariant<T>,
}

impl<T: Real> MetricDescriptor<T> {
    pub fn euclidean(n: usize) -> Self {
        Self {
            dimension: n,
            variant: MetricVariant::Euclidean,
        }
    }

    pub fn riemannian(a: MatrixField<T>) -> Result<Self> {
        let m = Self {
            dimension: a.dim(),
            variant: MetricVariant::Riemannian { a },
        };
        m.validate_static()?;
        Ok(m)
    }

    pub fn randers(a: MatrixField<T>, b: CovectorField<T>) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(FinslerError::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        let m = Self {
            dimension: a.dim(),
            variant: MetricVariant::Randers { a, b },
        };
        m.validate_static()?;
        Ok(m)
    }

    /// Constant-coefficient Randers norm with `a = I`.
    pub fn randers_constant(b: &[T]) -> Result<Self> {
        Self::randers(
            MatrixField::Identity { n: b.len() },
            CovectorField::Constant(b.iter().copied().collect()),
        )
    }

    // Constant fields can be checked once; varying fields are checked where
    // they are evaluated.
    fn validate_static(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(FinslerError::InvalidMetric(format!(
                "dimension {} < 2",
                self.dimension
            )));
        }
        let origin = scalar::zeros::<T>(self.dimension);
        match &self.variant {
            MetricVariant::Euclidean => Ok(()),
            MetricVariant::Riemannian { a } if a.is_constant() => self.at(&origin).map(|_| ()),
            MetricVariant::Randers { a, b } if a.is_constant() && b.is_constant() => {
                self.at(&origin).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    pub fn is_riemannian(&self) -> bool {
        !matches!(self.variant, MetricVariant::Randers { .. })
    }

    /// True when the norm does not depend on the base point.
    pub fn is_constant_coefficient(&self) -> bool {
        match &self.variant {
            MetricVariant::Euclidean => true,
            MetricVariant::Riemannian { a } => a.is_constant(),
            MetricVariant::Randers { a, b } => a.is_constant() && b.is_constant(),
        }
    }

    /// Radius of the coordinate ball on which the coefficients are defined.
    pub fn domain_radius(&self) -> Option<T> {
        match &self.variant {
            MetricVariant::Euclidean => None,
            MetricVariant::Riemannian { a } => a.domain_radius(),
            MetricVariant::Randers { a, b } => match (a.domain_radius(), b.domain_radius()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// The reverse metric `F(x, -y)`.
    pub fn reverse(&self) -> Self {
        match &self.variant {
            MetricVariant::Randers { a, b } => Self {
                dimension: self.dimension,
                variant: MetricVariant::Randers {
                    a: a.clone(),
                    b: b.negated(),
                },
            },
            _ => self.clone(),
        }
    }

    /// Freezes the metric at `x`, validating it there.
    pub fn at(&self, x: &[T]) -> Result<Minkowski<T>> {
        if x.len() != self.dimension {
            return Err(FinslerError::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        match &self.variant {
            MetricVariant::Euclidean => Ok(Minkowski::Euclidean { n: self.dimension }),
            MetricVariant::Riemannian { a } => {
                let a = checked_spd(a.value(x)?)?;
                let a_inv = a.inverse()?;
                Ok(Minkowski::Riemannian { a, a_inv })
            }
            MetricVariant::Randers { a, b } => {
                let a = checked_spd(a.value(x)?)?;
                let a_inv = a.inverse()?;
                let b = b.value(x)?;
                let bn = a_inv.quad(&b).sqrt();
                if !(bn < T::one()) {
                    return Err(FinslerError::InvalidMetric(format!(
                        "Randers drift has a-norm {bn} >= 1"
                    )));
                }
                Ok(Minkowski::Randers { a, a_inv, b })
            }
        }
    }
}

fn checked_spd<T: Real>(a: Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_symmetric(T::tol(1e-12)) {
        return Err(FinslerError::InvalidMetric("matrix is not symmetric".into()));
    }
    if !a.is_positive_definite() {
        return Err(FinslerError::InvalidMetric(
            "matrix is not positive definite".into(),
        ));
    }
    Ok(a)
}

/// Totally symmetric 3-tensor, dense storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[(i * self.n + j) * self.n + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        let n = self.n;
        self.data[(i * n + j) * n + k] = v;
    }

    /// `C_ijk v^k`
    pub fn contract(&self, v: &[T]) -> Matrix<T> {
        let mut m = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = (0..self.n).map(|k| self.get(i, j, k) * v[k]).sum();
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}

/// A Minkowski norm: the metric frozen at one base point.
#[derive(Debug, Clone, PartialEq)]
pub enum Minkowski<T> {
    Euclidean { n: usize },
    Riemannian { a: Matrix<T>, a_inv: Matrix<T> },
    Randers { a: Matrix<T>, a_inv: Matrix<T>, b: Vector<T> },
}

const LEGENDRE_TOL: f64 = 1e-10;
const LEGENDRE_MAX_ITERS: usize = 50;

impl<T: Real> Minkowski<T> {
    pub fn dim(&self) -> usize {
        match self {
            Minkowski::Euclidean { n } => *n,
            Minkowski::Riemannian { a, .. } | Minkowski::Randers { a, .. } => a.dim(),
        }
    }

    pub fn is_riemannian(&self) -> bool {
        !matches!(self, Minkowski::Randers { .. })
    }

    /// `a`-norm of the drift (0 for quadratic norms).
    pub fn drift_norm(&self) -> T {
        match self {
            Minkowski::Randers { a_inv, b, .. } => a_inv.quad(b).sqrt(),
            _ => T::zero(),
        }
    }

    pub fn f(&self, y: &[T]) -> T {
        match self {
            Minkowski::Euclidean { .. } => scalar::norm2(y),
            Minkowski::Riemannian { a, .. } => a.quad(y).max(T::zero()).sqrt(),
            Minkowski::Randers { a, b, .. } => a.quad(y).max(T::zero()).sqrt() + dot(b, y),
        }
    }

    /// `dF/dy`; `None` at `y = 0`.
    pub fn f_y(&self, y: &[T]) -> Option<Vector<T>> {
        let f = self.f(y);
        if f == T::zero() {
            return None;
        }
        Some(match self {
            Minkowski::Euclidean { .. } => scalar::scale(T::one() / f, y),
            Minkowski::Riemannian { a, .. } => scalar::scale(T::one() / f, &a.mul_vec(y)),
            Minkowski::Randers { a, b, .. } => {
                let alpha = a.quad(y).sqrt();
                scalar::axpy(T::one() / alpha, &a.mul_vec(y), b)
            }
        })
    }

    pub fn fundamental_tensor(&self, y: &[T]) -> Result<Matrix<T>> {
        if scalar::max_abs(y) == T::zero() {
            return Err(FinslerError::ZeroVector);
        }
        match self {
            Minkowski::Euclidean { n } => Ok(Matrix::identity(*n)),
            Minkowski::Riemannian { a, .. } => Ok(a.clone()),
            Minkowski::Randers { a, b, .. } => {
                let ay = a.mul_vec(y);
                let alpha = a.quad(y).sqrt();
                let f = alpha + dot(b, y);
                let ai = scalar::scale(T::one() / alpha, &ay);
                let fi = scalar::add(&ai, b);
                Ok(a
                    .rank_one_update(-T::one(), &ai, &ai)
                    .scaled(f / alpha)
                    .rank_one_update(T::one(), &fi, &fi))
            }
        }
    }

    pub fn cartan_tensor(&self, y: &[T]) -> Result<Tensor3<T>> {
        if scalar::max_abs(y) == T::zero() {
            return Err(FinslerError::ZeroVector);
        }
        let n = self.dim();
        match self {
            Minkowski::Euclidean { .. } | Minkowski::Riemannian { .. } => Ok(Tensor3::zeros(n)),
            Minkowski::Randers { a, b, .. } => {
                let ay = a.mul_vec(y);
                let alpha = a.quad(y).sqrt();
                let beta = dot(b, y);
                let ai = scalar::scale(T::one() / alpha, &ay);
                let h = a.rank_one_update(-T::one(), &ai, &ai).scaled(T::one() / alpha);
                let d: Vector<T> = b
                    .iter()
                    .zip(&ai)
                    .map(|(&bk, &ak)| bk - beta / alpha * ak)
                    .collect();
                let half = T::lit(0.5);
                let mut c = Tensor3::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let v = half * (h[(i, j)] * d[k] + h[(j, k)] * d[i] + h[(k, i)] * d[j]);
                            c.set(i, j, k, v);
                        }
                    }
                }
                Ok(c)
            }
        }
    }

    /// `y -> g_y(y, .) = F F_y`, with `0 -> 0`.
    pub fn legendre(&self, y: &[T]) -> Vector<T> {
        match self {
            Minkowski::Euclidean { .. } => y.iter().copied().collect(),
            Minkowski::Riemannian { a, .. } => a.mul_vec(y),
            Minkowski::Randers { .. } => match self.f_y(y) {
                Some(fy) => scalar::scale(self.f(y), &fy),
                None => scalar::zeros(y.len()),
            },
        }
    }

    pub fn legendre_inverse(&self, xi: &[T]) -> Result<Vector<T>> {
        match self {
            Minkowski::Euclidean { .. } => Ok(xi.iter().copied().collect()),
            Minkowski::Riemannian { a_inv, .. } => Ok(a_inv.mul_vec(xi)),
            Minkowski::Randers { a_inv, .. } => {
                if scalar::max_abs(xi) == T::zero() {
                    return Ok(scalar::zeros(xi.len()));
                }
                let y0 = a_inv.mul_vec(xi);
                match self.newton_legendre(xi, y0.clone()) {
                    Ok(y) => Ok(y),
                    Err(_) => {
                        // restart from the minimiser of the objective on the ray through y0
                        let s = dot(xi, &y0) / self.f(&y0).powi(2);
                        let start = if s > T::zero() {
                            scalar::scale(s, &y0)
                        } else {
                            y0
                        };
                        self.newton_legendre(xi, start)
                    }
                }
            }
        }
    }

    // Damped Newton on the strictly convex objective F^2/2 - xi(y), whose
    // gradient is L(y) - xi and Hessian g_y.
    fn newton_legendre(&self, xi: &[T], mut y: Vector<T>) -> Result<Vector<T>> {
        let tol = T::tol(LEGENDRE_TOL) * scalar::norm2(xi);
        let obj = |y: &[T]| T::lit(0.5) * self.f(y).powi(2) - dot(xi, y);
        for _ in 0..LEGENDRE_MAX_ITERS {
            let r = scalar::sub(&self.legendre(&y), xi);
            if scalar::norm2(&r) <= tol {
                return Ok(y);
            }
            let g = self.fundamental_tensor(&y)?;
            let d = scalar::scale(-T::one(), &g.solve(&r)?);
            let slope = dot(&r, &d);
            if slope >= T::zero() {
                return Err(FinslerError::NoConvergence("non-descent Newton step".into()));
            }
            let f0 = obj(&y);
            let r0 = scalar::norm2(&r);
            let mut t = T::one();
            let mut accepted = false;
            for _ in 0..40 {
                let cand = scalar::axpy(t, &d, &y);
                // near the solution objective differences drown in rounding,
                // so a residual decrease is also accepted
                let rc = scalar::norm2(&scalar::sub(&self.legendre(&cand), xi));
                if obj(&cand) <= f0 + T::lit(1e-4) * t * slope
                    || rc <= (T::one() - T::lit(1e-4) * t) * r0
                {
                    y = cand;
                    accepted = true;
                    break;
                }
                t *= T::lit(0.5);
            }
            if !accepted {
                // already at rounding level when the line search stalls
                let r = scalar::sub(&self.legendre(&y), xi);
                if scalar::norm2(&r) <= tol * T::lit(100.0) {
                    return Ok(y);
                }
                return Err(FinslerError::NoConvergence("line search stalled".into()));
            }
        }
        let r = scalar::sub(&self.legendre(&y), xi);
        if scalar::norm2(&r) <= tol {
            Ok(y)
        } else {
            Err(FinslerError::NoConvergence(format!(
                "Legendre inverse residual {} after {LEGENDRE_MAX_ITERS} iterations",
                scalar::norm2(&r)
            )))
        }
    }

    pub fn dual_norm(&self, xi: &[T]) -> Result<T> {
        match self {
            Minkowski::Euclidean { .. } => Ok(scalar::norm2(xi)),
            Minkowski::Riemannian { a_inv, .. } => Ok(a_inv.quad(xi).max(T::zero()).sqrt()),
            Minkowski::Randers { .. } => Ok(self.f(&self.legendre_inverse(xi)?)),
        }
    }

    pub fn dual_tensor(&self, xi: &[T]) -> Result<Matrix<T>> {
        if scalar::max_abs(xi) == T::zero() {
            return Err(FinslerError::ZeroCovector);
        }
        match self {
            Minkowski::Euclidean { n } => Ok(Matrix::identity(*n)),
            Minkowski::Riemannian { a_inv, .. } => Ok(a_inv.clone()),
            Minkowski::Randers { .. } => {
                let y = self.legendre_inverse(xi)?;
                self.fundamental_tensor(&y)?.inverse()
            }
        }
    }
}

pub fn eval_f<T: Real>(metric: &MetricDescriptor<T>, v: &TangentVector<T>) -> Result<T> {
    Ok(metric.at(&v.base_point)?.f(&v.components))
}

pub fn fundamental_tensor<T: Real>(
    metric: &MetricDescriptor<T>,
    v: &TangentVector<T>,
) -> Result<Matrix<T>> {
    metric.at(&v.base_point)?.fundamental_tensor(&v.components)
}

pub fn cartan_tensor<T: Real>(
    metric: &MetricDescriptor<T>,
    v: &TangentVector<T>,
) -> Result<Tensor3<T>> {
    metric.at(&v.base_point)?.cartan_tensor(&v.components)
}

pub fn dual_norm<T: Real>(metric: &MetricDescriptor<T>, xi: &CotangentVector<T>) -> Result<T> {
    metric.at(&xi.base_point)?.dual_norm(&xi.components)
}

pub fn legendre<T: Real>(
    metric: &MetricDescriptor<T>,
    v: &TangentVector<T>,
) -> Result<CotangentVector<T>> {
    Ok(CotangentVector {
        base_point: v.base_point.clone(),
        components: metric.at(&v.base_point)?.legendre(&v.components),
    })
}

pub fn legendre_inverse<T: Real>(
    metric: &MetricDescriptor<T>,
    xi: &CotangentVector<T>,
) -> Result<TangentVector<T>> {
    Ok(TangentVector {
        base_point: xi.base_point.clone(),
        components: metric.at(&xi.base_point)?.legendre_inverse(&xi.components)?,
    })
}

pub fn dual_tensor<T: Real>(
    metric: &MetricDescriptor<T>,
    xi: &CotangentVector<T>,
) -> Result<Matrix<T>> {
    metric.at(&xi.base_point)?.dual_tensor(&xi.components)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformityConstants<T> {
    pub kappa: T,
    pub kappa_star: T,
    pub lambda_rev: T,
}

impl<T: Real> UniformityConstants<T> {
    /// Constants of the dual metric: `(1/kappa_star, 1/kappa)`.
    pub fn dual(&self) -> (T, T) {
        (T::one() / self.kappa_star, T::one() / self.kappa)
    }

    pub fn satisfies_invariants(&self, rel_tol: T) -> bool {
        let one = T::one();
        let slack = one + rel_tol;
        self.kappa_star <= slack
            && self.kappa * slack >= one
            && self.lambda_rev * slack >= one
            && self.lambda_rev <= self.kappa.sqrt().min((one / self.kappa_star).sqrt()) * slack
    }
}

/// Region over which uniformity constants are sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRegion<T> {
    pub center: Vector<T>,
    pub radius: T,
    /// Base points drawn in the region (only the center is used for
    /// constant-coefficient metrics).
    pub points: usize,
    /// Direction samples per sphere; must be positive.
    pub resolution: usize,
}

impl<T: Real> SampleRegion<T> {
    pub fn around(center: &[T], radius: T) -> Self {
        Self {
            center: center.iter().copied().collect(),
            radius,
            points: 16,
            resolution: 180,
        }
    }
}

/// Sampled estimate of `kappa`, `kappa_star` and the reversibility over a
/// region. `kappa` is a lower and `kappa_star` an upper estimate.
pub fn uniformity_constants<T: Real>(
    metric: &MetricDescriptor<T>,
    region: &SampleRegion<T>,
) -> Result<UniformityConstants<T>> {
    if region.resolution == 0 {
        return Err(FinslerError::DomainError("sampling resolution must be positive".into()));
    }
    let points = if metric.is_constant_coefficient() {
        vec![region.center.clone()]
    } else {
        sampling::ball_points(&region.center, region.radius, region.points)
    };
    let mut out = UniformityConstants {
        kappa: T::one(),
        kappa_star: T::one(),
        lambda_rev: T::one(),
    };
    for x in &points {
        let m = metric.at(x)?;
        let c = pointwise_uniformity(&m, region.resolution)?;
        out.kappa = out.kappa.max(c.kappa);
        out.kappa_star = out.kappa_star.min(c.kappa_star);
        out.lambda_rev = out.lambda_rev.max(c.lambda_rev);
    }
    Ok(out)
}

fn ratio<T: Real>(m: &Minkowski<T>, v: &[T], w: &[T]) -> T {
    let g = m.fundamental_tensor(v).expect("unit direction");
    let f = m.f(w);
    g.quad(w) / (f * f)
}

/// Uniformity constants of a single Minkowski norm.
pub fn pointwise_uniformity<T: Real>(
    m: &Minkowski<T>,
    resolution: usize,
) -> Result<UniformityConstants<T>> {
    if m.is_riemannian() {
        return Ok(UniformityConstants {
            kappa: T::one(),
            kappa_star: T::one(),
            lambda_rev: T::one(),
        });
    }
    let n = m.dim();
    let dirs = sampling::directions::<T>(n, resolution);
    let mut kmax = (T::one(), 0usize, 0usize);
    let mut kmin = (T::one(), 0usize, 0usize);
    let mut lam = (T::one(), 0usize);
    for (i, v) in dirs.iter().enumerate() {
        let g = m.fundamental_tensor(v)?;
        for (j, w) in dirs.iter().enumerate() {
            let f = m.f(w);
            let r = g.quad(w) / (f * f);
            if r > kmax.0 {
                kmax = (r, i, j);
            }
            if r < kmin.0 {
                kmin = (r, i, j);
            }
        }
        let neg: Vector<T> = v.iter().map(|&c| -c).collect();
        let l = m.f(v) / m.f(&neg);
        if l > lam.0 {
            lam = (l, i);
        }
    }
    let mut out = UniformityConstants {
        kappa: kmax.0,
        kappa_star: kmin.0,
        lambda_rev: lam.0,
    };
    if n == 2 {
        let step = T::TAU() / T::from_usize_lossy(resolution);
        let angle = |i: usize| step * T::from_usize_lossy(i);
        let unit = |t: T| -> Vector<T> { smallvec::smallvec![t.cos(), t.sin()] };
        for (sign, best) in [(T::one(), kmax), (-T::one(), kmin)] {
            let (mut tv, mut tw) = (angle(best.1), angle(best.2));
            let mut val = best.0;
            for _ in 0..4 {
                let (a, _) = sampling::golden_max(
                    |t| sign * ratio(m, &unit(tv), &unit(t)),
                    tw - step,
                    tw + step,
                    60,
                );
                tw = a;
                let (a, v) = sampling::golden_max(
                    |t| sign * ratio(m, &unit(t), &unit(tw)),
                    tv - step,
                    tv + step,
                    60,
                );
                tv = a;
                val = v * sign;
            }
            if sign > T::zero() {
                out.kappa = out.kappa.max(val);
            } else {
                out.kappa_star = out.kappa_star.min(val);
            }
        }
        let (_, l) = sampling::golden_max(
            |t| {
                let v = unit(t);
                let neg: Vector<T> = v.iter().map(|&c| -c).collect();
                m.f(&v) / m.f(&neg)
            },
            angle(lam.1) - step,
            angle(lam.1) + step,
            80,
        );
        out.lambda_rev = out.lambda_rev.max(l);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn randers() -> MetricDescriptor<f64> {
        MetricDescriptor::randers_constant(&[0.5, 0.0]).unwrap()
    }

    fn at(m: &MetricDescriptor<f64>) -> Minkowski<f64> {
        m.at(&[0.0, 0.0]).unwrap()
    }

    #[test]
    fn norm_values() {
        let e = MetricDescriptor::<f64>::euclidean(2);
        assert_eq!(at(&e).f(&[3.0, 4.0]), 5.0);
        let r = at(&randers());
        assert_eq!(r.f(&[1.0, 0.0]), 1.5);
        assert_eq!(r.f(&[-1.0, 0.0]), 0.5);
    }

    #[test]
    fn invalid_drift_is_rejected() {
        let err = MetricDescriptor::<f64>::randers_constant(&[1.2, 0.0]).unwrap_err();
        assert!(matches!(err, FinslerError::InvalidMetric(_)));
        let bad = Matrix::from_row_major(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(MetricDescriptor::riemannian(MatrixField::Constant(bad)).is_err());
    }

    #[test]
    fn zero_vector_errors() {
        let r = at(&randers());
        assert_eq!(r.fundamental_tensor(&[0.0, 0.0]), Err(FinslerError::ZeroVector));
        assert!(r.cartan_tensor(&[0.0, 0.0]).is_err());
        assert_eq!(r.dual_tensor(&[0.0, 0.0]), Err(FinslerError::ZeroCovector));
        assert_eq!(r.legendre(&[0.0, 0.0]).as_slice(), &[0.0, 0.0]);
        assert_eq!(r.legendre_inverse(&[0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(r.dual_norm(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn riemannian_tensors() {
        let m = MetricDescriptor::riemannian(MatrixField::Constant(Matrix::diagonal(&[1.0, 4.0])))
            .unwrap();
        let n = at(&m);
        assert_eq!(n.fundamental_tensor(&[0.3, -1.0]).unwrap(), Matrix::diagonal(&[1.0, 4.0]));
        assert_eq!(n.cartan_tensor(&[1.0, 1.0]).unwrap().max_abs(), 0.0);
        assert_eq!(n.dual_tensor(&[1.0, 2.0]).unwrap(), Matrix::diagonal(&[1.0, 0.25]));
    }

    #[test]
    fn euclidean_constants_are_one() {
        let c = uniformity_constants(
            &MetricDescriptor::<f64>::euclidean(2),
            &SampleRegion::around(&[0.0, 0.0], 1.0),
        )
        .unwrap();
        assert_eq!((c.kappa, c.kappa_star, c.lambda_rev), (1.0, 1.0, 1.0));
    }

    #[test]
    fn reverse_metric_flips_drift() {
        let r = randers().reverse();
        assert_eq!(at(&r).f(&[1.0, 0.0]), 0.5);
    }

    #[test]
    fn f32_instantiation() {
        let m = MetricDescriptor::<f32>::randers_constant(&[0.5, 0.0]).unwrap();
        let n = m.at(&[0.0, 0.0]).unwrap();
        let y = n.legendre_inverse(&[1.0, 0.0]).unwrap();
        assert!((n.f(&y) - 2.0 / 3.0).abs() < 1e-5);
    }
}
