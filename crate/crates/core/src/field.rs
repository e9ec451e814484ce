//! Coefficient fields for metric descriptors: the matrix `a(x)` and the
//! covector `b(x)`, with closed-form first derivatives.

use crate::error::{FinslerError, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot, Real, Vector};

/// Scalar `psi(x)` of a conformal factor `e^{2 psi}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformalFactor<T> {
    /// `psi = -c |x|^2 / 2`
    Gaussian { c: T },
    /// `psi = ln 2 - ln(1 - |x|^2)`, defined on the open unit disk.
    PoincareDisk,
}

impl<T: Real> ConformalFactor<T> {
    pub fn psi(&self, x: &[T]) -> Result<T> {
        let r2 = dot(x, x);
        match self {
            ConformalFactor::Gaussian { c } => Ok(-*c * r2 / T::lit(2.0)),
            ConformalFactor::PoincareDisk => {
                if r2 >= T::one() {
                    return Err(FinslerError::DomainError(format!(
                        "point at radius {} lies outside the Poincare disk",
                        r2.sqrt()
                    )));
                }
                Ok(T::LN_2() - (T::one() - r2).ln())
            }
        }
    }

    pub fn grad_psi(&self, x: &[T]) -> Result<Vector<T>> {
        let r2 = dot(x, x);
        match self {
            ConformalFactor::Gaussian { c } => Ok(x.iter().map(|&v| -*c * v).collect()),
            ConformalFactor::PoincareDisk => {
                if r2 >= T::one() {
                    return Err(FinslerError::DomainError(
                        "point outside the Poincare disk".into(),
                    ));
                }
                let s = T::lit(2.0) / (T::one() - r2);
                Ok(x.iter().map(|&v| s * v).collect())
            }
        }
    }

    pub fn hess_psi(&self, x: &[T]) -> Result<Matrix<T>> {
        let n = x.len();
        match self {
            ConformalFactor::Gaussian { c } => Ok(Matrix::identity(n).scaled(-*c)),
            ConformalFactor::PoincareDisk => {
                let r2 = dot(x, x);
                if r2 >= T::one() {
                    return Err(FinslerError::DomainError(
                        "point outside the Poincare disk".into(),
                    ));
                }
                let s = T::one() - r2;
                Ok(Matrix::identity(n)
                    .scaled(T::lit(2.0) / s)
                    .rank_one_update(T::lit(4.0) / (s * s), x, x))
            }
        }
    }

    pub fn domain_radius(&self) -> Option<T> {
        match self {
            ConformalFactor::Gaussian { .. } => None,
            ConformalFactor::PoincareDisk => Some(T::one()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixField<T> {
    Identity { n: usize },
    Constant(Matrix<T>),
    /// `a(x) = e^{2 psi(x)} I`
    Conformal { n: usize, factor: ConformalFactor<T> },
}

impl<T: Real> MatrixField<T> {
    pub fn dim(&self) -> usize {
        match self {
            MatrixField::Identity { n } | MatrixField::Conformal { n, .. } => *n,
            MatrixField::Constant(m) => m.dim(),
        }
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, MatrixField::Conformal { .. })
    }

    pub fn value(&self, x: &[T]) -> Result<Matrix<T>> {
        match self {
            MatrixField::Identity { n } => Ok(Matrix::identity(*n)),
            MatrixField::Constant(m) => Ok(m.clone()),
            MatrixField::Conformal { n, factor } => {
                let e = (T::lit(2.0) * factor.psi(x)?).exp();
                Ok(Matrix::identity(*n).scaled(e))
            }
        }
    }

    /// `[d a / d x^k]` for `k = 0..n`.
    pub fn derivatives(&self, x: &[T]) -> Result<Vec<Matrix<T>>> {
        let n = self.dim();
        match self {
            MatrixField::Identity { .. } | MatrixField::Constant(_) => {
                Ok(vec![Matrix::zeros(n); n])
            }
            MatrixField::Conformal { factor, .. } => {
                let e = (T::lit(2.0) * factor.psi(x)?).exp();
                let g = factor.grad_psi(x)?;
                Ok(g.iter()
                    .map(|&gk| Matrix::identity(n).scaled(T::lit(2.0) * gk * e))
                    .collect())
            }
        }
    }

    pub fn domain_radius(&self) -> Option<T> {
        match self {
            MatrixField::Conformal { factor, .. } => factor.domain_radius(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovectorField<T> {
    Constant(Vector<T>),
    /// `b(x) = e^{psi(x)} b0`; paired with a conformal `a` of the same
    /// factor its `a`-norm is constant.
    Conformal { value: Vector<T>, factor: ConformalFactor<T> },
}

impl<T: Real> CovectorField<T> {
    pub fn dim(&self) -> usize {
        match self {
            CovectorField::Constant(v) | CovectorField::Conformal { value: v, .. } => v.len(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CovectorField::Constant(_))
    }

    pub fn value(&self, x: &[T]) -> Result<Vector<T>> {
        match self {
            CovectorField::Constant(v) => Ok(v.clone()),
            CovectorField::Conformal { value, factor } => {
                let e = factor.psi(x)?.exp();
                Ok(value.iter().map(|&v| v * e).collect())
            }
        }
    }

    /// `out[k][i] = d b_i / d x^k`
    pub fn derivatives(&self, x: &[T]) -> Result<Vec<Vector<T>>> {
        let n = self.dim();
        match self {
            CovectorField::Constant(_) => Ok(vec![smallvec::smallvec![T::zero(); n]; n]),
            CovectorField::Conformal { value, factor } => {
                let e = factor.psi(x)?.exp();
                let g = factor.grad_psi(x)?;
                Ok(g.iter()
                    .map(|&gk| value.iter().map(|&v| v * e * gk).collect())
                    .collect())
            }
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            CovectorField::Constant(v) => CovectorField::Constant(v.iter().map(|&x| -x).collect()),
            CovectorField::Conformal { value, factor } => CovectorField::Conformal {
                value: value.iter().map(|&x| -x).collect(),
                factor: factor.clone(),
            },
        }
    }

    pub fn domain_radius(&self) -> Option<T> {
        match self {
            CovectorField::Conformal { factor, .. } => factor.domain_radius(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_derivatives_match_differences() {
        let f = MatrixField::Conformal {
            n: 2,
            factor: ConformalFactor::PoincareDisk,
        };
        let x = [0.3_f64, -0.2];
        let d = f.derivatives(&x).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (f.value(&xp).unwrap()[(0, 0)] - f.value(&xm).unwrap()[(0, 0)]) / (2.0 * h);
            assert!((fd - d[k][(0, 0)]).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn poincare_rejects_points_outside() {
        let f = ConformalFactor::<f64>::PoincareDisk;
        assert!(f.psi(&[1.0, 0.0]).is_err());
        assert!((f.psi(&[0.0, 0.0]).unwrap() - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn conformal_covector_derivative() {
        let b = CovectorField::Conformal {
            value: smallvec::smallvec![0.5_f64, 0.1],
            factor: ConformalFactor::Gaussian { c: 0.7 },
        };
        let x = [0.4, 0.9];
        let d = b.derivatives(&x).unwrap();
        let h = 1e-6;
        let xp = [0.4, 0.9 + h];
        let xm = [0.4, 0.9 - h];
        let fd = (b.value(&xp).unwrap()[0] - b.value(&xm).unwrap()[0]) / (2.0 * h);
        assert!((fd - d[1][0]).abs() < 1e-8);
    }
}
