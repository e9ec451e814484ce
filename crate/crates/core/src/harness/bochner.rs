//! Pointwise residual of the weighted Bochner identity for closed-form
//! functions on constant-coefficient Riemannian spaces with a weight.

use crate::error::{FinslerError, Result};
use crate::measure::MeasureSpace;
use crate::minkowski::MetricVariant;
use crate::scalar::Real;

/// Polynomial `sum c x1^i x2^j` in the plane, with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    pub terms: Vec<(T, u32, u32)>,
}

fn pow_d<T: Real>(x: T, e: u32, d: u32) -> T {
    if d > e {
        return T::zero();
    }
    let coef: u32 = (0..d).map(|k| e - k).product();
    T::from_usize_lossy(coef as usize) * x.powi((e - d) as i32)
}

impl<T: Real> Polynomial<T> {
    pub fn new(terms: Vec<(T, u32, u32)>) -> Self {
        Self { terms }
    }

    /// `partial_1^d1 partial_2^d2` at `x`.
    pub fn derivative(&self, x: &[T; 2], d1: u32, d2: u32) -> T {
        self.terms.iter().map(|&(c, i, j)| c * pow_d(x[0], i, d1) * pow_d(x[1], j, d2)).sum()
    }

    pub fn value(&self, x: &[T; 2]) -> T {
        self.derivative(x, 0, 0)
    }

    pub fn gradient(&self, x: &[T; 2]) -> [T; 2] {
        [self.derivative(x, 1, 0), self.derivative(x, 0, 1)]
    }

    pub fn hessian(&self, x: &[T; 2]) -> [[T; 2]; 2] {
        let m = self.derivative(x, 1, 1);
        [[self.derivative(x, 2, 0), m], [m, self.derivative(x, 0, 2)]]
    }

    /// `u_{ijk}`
    pub fn third(&self, x: &[T; 2]) -> [[[T; 2]; 2]; 2] {
        let mut out = [[[T::zero(); 2]; 2]; 2];
        for (i, a) in out.iter_mut().enumerate() {
            for (j, b) in a.iter_mut().enumerate() {
                for (k, v) in b.iter_mut().enumerate() {
                    let d1 = [i, j, k].iter().filter(|&&q| q == 0).count() as u32;
                    *v = self.derivative(x, d1, 3 - d1);
                }
            }
        }
        out
    }
}

/// Largest `|Delta^{nabla u}(F^2(nabla u)/2) - d(Delta u)(nabla u) - Ric_inf(nabla u) - |nabla^2 u|^2_HS|`
/// over `points`, for `dm = e^Phi dx` and a constant metric `a`, where
/// `Delta = a^{ij} d_ij + a^{ij} d_i Phi d_j` and `Ric_inf(V) = -Hess Phi(V, V)`.
pub fn bochner_residual<T: Real>(space: &MeasureSpace<T>, u: &Polynomial<T>, points: &[[T; 2]]) -> Result<T> {
    if space.dim() != 2 {
        return Err(FinslerError::DimensionMismatch { expected: 2, found: space.dim() });
    }
    let metric = &space.metric;
    if matches!(metric.variant, MetricVariant::Randers { .. }) {
        return Err(FinslerError::UnsupportedSpace("Randers metrics need the Chern-connection Hessian".into()));
    }
    if !metric.is_constant_coefficient() {
        return Err(FinslerError::UnsupportedSpace("coordinate Hessians need a constant quadratic form".into()));
    }
    let origin = [T::zero(); 2];
    let ai = match &metric.variant {
        MetricVariant::Riemannian { a } => a.value(&origin)?.inverse()?,
        _ => crate::linalg::Matrix::identity(2),
    };
    let g = |i: usize, j: usize| ai[(i, j)];
    let mut worst = T::zero();
    for x in points {
        let du = u.gradient(x);
        let h = u.hessian(x);
        let t = u.third(x);
        let gp = space.log_density.grad_phi(metric, x)?;
        let hp = space.log_density.hess_phi(metric, x)?;
        let grad: Vec<T> = (0..2).map(|i| (0..2).map(|j| g(i, j) * du[j]).sum()).collect();
        // f = |du|^2 / 2: f_i = a^{kl} u_ki u_l, f_ij = a^{kl} (u_kij u_l + u_ki u_lj)
        let mut lap_f = T::zero();
        let mut f_i = [T::zero(); 2];
        for i in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    f_i[i] += g(k, l) * h[k][i] * du[l];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let mut fij = T::zero();
                for k in 0..2 {
                    for l in 0..2 {
                        fij += g(k, l) * (t[k][i][j] * du[l] + h[k][i] * h[l][j]);
                    }
                }
                lap_f += g(i, j) * (fij + gp[i] * f_i[j]);
            }
        }
        // d(Delta u)_k = a^{ij} (u_ijk + Phi_ik u_j + Phi_i u_jk)
        let mut d_lap = [T::zero(); 2];
        for (k, dk) in d_lap.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *dk += g(i, j) * (t[i][j][k] + hp[(i, k)] * du[j] + gp[i] * h[j][k]);
                }
            }
        }
        let d_lap_grad = d_lap[0] * grad[0] + d_lap[1] * grad[1];
        let ric = -hp.quad(&grad);
        let mut hs = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        hs += g(i, k) * g(j, l) * h[i][j] * h[k][l];
                    }
                }
            }
        }
        worst = worst.max((lap_f - d_lap_grad - ric - hs).abs());
    }
    Ok(worst)
}
