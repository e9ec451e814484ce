//! Discrete weak Finsler Laplacian on planar meshes.
//!
//! Harmonic functions are minimisers of `E(u) = 1/2 sum_c F*^2(x_c, du_c) m_c`
//! where `m_c` is the cell measure and `x_c` the centroid. The nodal
//! gradient of `E` at an interior node is `int dphi(nabla u) dm` for the hat
//! function `phi` of that node, so first-order optimality is the weak
//! equation `Delta u = 0`.

use rayon::prelude::*;

use crate::error::{FinslerError, Result};
use crate::linalg::{BandedCholesky, CsrMatrix};
use crate::measure::{gradient_field, MeasureSpace};
use crate::mesh::{DiscreteFunction, Mesh};
use crate::minkowski::Minkowski;
use crate::report::InequalityReport;
use crate::scalar::Real;

pub const NCG_MAX_ITERS: usize = 100_000;
const NEWTON_MAX_ITERS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-10;
const ENERGY_TOL: f64 = 1e-14;

/// Dual norm on one cell in Randers form `F*(xi) = sqrt(xi A xi) + B xi`.
/// The dual of a Randers norm `(a, b)` is again Randers with
/// `A = (lambda a^-1 + b# b#^T) / lambda^2`, `B = -b# / lambda`,
/// `b# = a^-1 b`, `lambda = 1 - |b|_a^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCell<T> {
    pub a: [[T; 2]; 2],
    pub b: [T; 2],
}

impl<T: Real> DualCell<T> {
    pub fn from_minkowski(m: &Minkowski<T>) -> Result<Self> {
        if m.dim() != 2 {
            return Err(FinslerError::DimensionMismatch { expected: 2, found: m.dim() });
        }
        Ok(match m {
            Minkowski::Euclidean { .. } => Self { a: [[T::one(), T::zero()], [T::zero(), T::one()]], b: [T::zero(); 2] },
            Minkowski::Riemannian { a_inv, .. } => Self {
                a: [[a_inv[(0, 0)], a_inv[(0, 1)]], [a_inv[(1, 0)], a_inv[(1, 1)]]],
                b: [T::zero(); 2],
            },
            Minkowski::Randers { a_inv, b, .. } => {
                let bs = a_inv.mul_vec(b);
                let lambda = T::one() - bs[0] * b[0] - bs[1] * b[1];
                let l2 = lambda * lambda;
                let e = |i: usize, j: usize| (lambda * a_inv[(i, j)] + bs[i] * bs[j]) / l2;
                Self { a: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]], b: [-bs[0] / lambda, -bs[1] / lambda] }
            }
        })
    }

    fn a_xi(&self, xi: &[T; 2]) -> [T; 2] {
        [self.a[0][0] * xi[0] + self.a[0][1] * xi[1], self.a[1][0] * xi[0] + self.a[1][1] * xi[1]]
    }

    pub fn norm(&self, xi: &[T; 2]) -> T {
        let ax = self.a_xi(xi);
        (ax[0] * xi[0] + ax[1] * xi[1]).max(T::zero()).sqrt() + self.b[0] * xi[0] + self.b[1] * xi[1]
    }

    /// `(F*^2/2, d(F*^2/2))`; the derivative is the gradient vector
    /// `L^{-1}(xi)`. Both vanish at `xi = 0`.
    pub fn half_square(&self, xi: &[T; 2]) -> (T, [T; 2]) {
        let ax = self.a_xi(xi);
        let alpha = (ax[0] * xi[0] + ax[1] * xi[1]).max(T::zero()).sqrt();
        if alpha == T::zero() {
            return (T::zero(), [T::zero(); 2]);
        }
        let f = alpha + self.b[0] * xi[0] + self.b[1] * xi[1];
        let q = [ax[0] / alpha + self.b[0], ax[1] / alpha + self.b[1]];
        (f * f / T::lit(2.0), [f * q[0], f * q[1]])
    }

    /// Hessian of `F*^2/2`; at `xi = 0` the quadratic part `A` is returned.
    pub fn hessian(&self, xi: &[T; 2]) -> [[T; 2]; 2] {
        let ax = self.a_xi(xi);
        let alpha = (ax[0] * xi[0] + ax[1] * xi[1]).max(T::zero()).sqrt();
        if alpha == T::zero() {
            return self.a;
        }
        let f = alpha + self.b[0] * xi[0] + self.b[1] * xi[1];
        let q = [ax[0] / alpha + self.b[0], ax[1] / alpha + self.b[1]];
        let a3 = alpha * alpha * alpha;
        let mut h = [[T::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = q[i] * q[j] + f * (self.a[i][j] / alpha - ax[i] * ax[j] / a3);
            }
        }
        h
    }
}

/// Dirichlet problem for the weak Finsler Laplacian on a mesh.
#[derive(Debug, Clone)]
pub struct DirichletProblem<T> {
    pub space: MeasureSpace<T>,
    pub mesh: Mesh<T>,
    /// Nodal values; only boundary entries are prescribed, interior entries
    /// are ignored.
    pub boundary_data: DiscreteFunction<T>,
    /// Optional nonnegative potential `f` for subsolution checks.
    pub source: Option<DiscreteFunction<T>>,
    duals: Vec<DualCell<T>>,
    masses: Vec<T>,
}

impl<T: Real> DirichletProblem<T> {
    pub fn new(space: MeasureSpace<T>, mesh: Mesh<T>, boundary_data: DiscreteFunction<T>) -> Result<Self> {
        if space.dim() != 2 {
            return Err(FinslerError::DimensionMismatch { expected: 2, found: space.dim() });
        }
        mesh.check_function(&boundary_data)?;
        let duals = (0..mesh.cells.len())
            .into_par_iter()
            .map(|c| DualCell::from_minkowski(&space.metric.at(&mesh.centroid(c))?))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let masses = mesh.cell_masses(&space)?;
        Ok(Self { space, mesh, boundary_data, source: None, duals, masses })
    }

    /// Boundary data from a function of position.
    pub fn with_boundary_fn<F: Fn(&[T; 2]) -> T>(space: MeasureSpace<T>, mesh: Mesh<T>, g: F) -> Result<Self> {
        let data = DiscreteFunction::from_fn(&mesh, g);
        Self::new(space, mesh, data)
    }

    pub fn with_source(mut self, f: DiscreteFunction<T>) -> Result<Self> {
        self.mesh.check_function(&f)?;
        if f.values.iter().any(|&v| v < T::zero()) {
            return Err(FinslerError::DomainError("source f must be nonnegative".into()));
        }
        self.source = Some(f);
        Ok(self)
    }

    /// Same mesh and space with new boundary values.
    pub fn with_boundary_data(&self, data: DiscreteFunction<T>) -> Result<Self> {
        self.mesh.check_function(&data)?;
        let mut p = self.clone();
        p.boundary_data = data;
        Ok(p)
    }

    pub fn cell_masses(&self) -> &[T] {
        &self.masses
    }

    pub fn dual_cells(&self) -> &[DualCell<T>] {
        &self.duals
    }

    /// Largest absolute boundary value, or one when all vanish.
    pub fn scale(&self) -> T {
        let s = self
            .mesh
            .boundary
            .iter()
            .zip(&self.boundary_data.values)
            .filter(|(b, _)| **b)
            .fold(T::zero(), |m, (_, v)| m.max(v.abs()));
        if s > T::zero() {
            s
        } else {
            T::one()
        }
    }

    fn xi(&self, c: usize, values: &[T]) -> [T; 2] {
        let d = self.mesh.cell_differential(c, values);
        [d[0], d[1]]
    }

    /// Energy and its full nodal gradient.
    pub fn energy_and_gradient(&self, values: &[T]) -> (T, Vec<T>) {
        let mut e = T::zero();
        let mut g = vec![T::zero(); values.len()];
        for c in 0..self.mesh.cells.len() {
            let xi = self.xi(c, values);
            let (h, v) = self.duals[c].half_square(&xi);
            let m = self.masses[c];
            e += m * h;
            let grads = self.mesh.basis_gradients(c);
            for (k, &node) in self.mesh.cells[c].iter().enumerate() {
                g[node] += m * (v[0] * grads[k][0] + v[1] * grads[k][1]);
            }
        }
        (e, g)
    }

    pub fn energy(&self, values: &[T]) -> T {
        (0..self.mesh.cells.len())
            .map(|c| self.masses[c] * self.duals[c].half_square(&self.xi(c, values)).0)
            .sum()
    }

    /// Sparse matrix `sum_c m_c G_c^T H_c G_c` over all nodes, with `H_c`
    /// the Hessian of `F*^2/2` (`hessian = true`) or the quadratic part `A`.
    pub(crate) fn stiffness(&self, values: Option<&[T]>) -> CsrMatrix<T> {
        let n = self.mesh.node_count();
        let mut trip = Vec::with_capacity(self.mesh.cells.len() * 9);
        for c in 0..self.mesh.cells.len() {
            let h = match values {
                Some(v) => self.duals[c].hessian(&self.xi(c, v)),
                None => self.duals[c].a,
            };
            let g = self.mesh.basis_gradients(c);
            let m = self.masses[c];
            for (i, &ni) in self.mesh.cells[c].iter().enumerate() {
                for (j, &nj) in self.mesh.cells[c].iter().enumerate() {
                    let mut s = T::zero();
                    for p in 0..2 {
                        for q in 0..2 {
                            s += g[i][p] * h[p][q] * g[j][q];
                        }
                    }
                    trip.push((ni, nj, m * s));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, trip)
    }
}

/// `E(u) = 1/2 sum_c F*^2(du_c) m_c`.
pub fn dirichlet_energy<T: Real>(problem: &DirichletProblem<T>, u: &DiscreteFunction<T>) -> Result<T> {
    problem.mesh.check_function(u)?;
    Ok(problem.energy(&u.values))
}

/// Outcome of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats<T> {
    pub iterations: usize,
    pub energy: T,
    pub residual: T,
    pub used_newton: bool,
}

struct Reduced<'a, T: Real> {
    p: &'a DirichletProblem<T>,
    interior: Vec<usize>,
    full: Vec<T>,
}

impl<T: Real> Reduced<'_, T> {
    fn set(&mut self, x: &[T]) {
        for (k, &i) in self.interior.iter().enumerate() {
            self.full[i] = x[k];
        }
    }

    fn eval(&mut self, x: &[T]) -> (T, Vec<T>) {
        self.set(x);
        let (e, g) = self.p.energy_and_gradient(&self.full);
        (e, self.interior.iter().map(|&i| g[i]).collect())
    }
}

fn dotv<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

fn moved<T: Real>(x: &[T], t: T, d: &[T]) -> Vec<T> {
    x.iter().zip(d).map(|(a, b)| *a + t * *b).collect()
}

/// Line search along a descent direction: secant iterations on the
/// directional derivative of the convex energy, safeguarded by Armijo
/// backtracking.
fn line_search<T: Real>(
    r: &mut Reduced<'_, T>,
    x: &[T],
    d: &[T],
    e0: T,
    slope0: T,
    t_init: T,
) -> Option<(T, T, Vec<T>)> {
    let c1 = T::lit(1e-4);
    let (mut lo, mut p_lo) = (T::zero(), slope0);
    let mut hi: Option<(T, T)> = None;
    let mut t = t_init;
    let mut best: Option<(T, T, Vec<T>)> = None;
    for _ in 0..40 {
        let (e, g) = r.eval(&moved(x, t, d));
        if !e.is_finite() {
            hi = Some((t, T::infinity()));
            t = (lo + t) / T::lit(2.0);
            continue;
        }
        let p = dotv(&g, d);
        let armijo = e <= e0 + c1 * t * slope0;
        let done = armijo && p.abs() <= T::lit(0.1) * slope0.abs();
        if armijo && best.as_ref().is_none_or(|b| e < b.1) {
            best = Some((t, e, g));
        }
        if done {
            return best;
        }
        if p < T::zero() {
            lo = t;
            p_lo = p;
        } else {
            hi = Some((t, p));
        }
        t = match hi {
            None => t * T::lit(4.0),
            Some((th, p_hi)) => {
                let s = lo - p_lo * (th - lo) / (p_hi - p_lo);
                if s > lo && s < th {
                    s
                } else {
                    (lo + th) / T::lit(2.0)
                }
            }
        };
    }
    best
}

fn boundary_solution<T: Real>(p: &DirichletProblem<T>) -> Vec<T> {
    p.mesh
        .boundary
        .iter()
        .zip(&p.boundary_data.values)
        .map(|(b, v)| if *b { *v } else { T::zero() })
        .collect()
}

/// Minimises the Dirichlet energy over interior nodal values.
pub fn solve_harmonic<T: Real>(problem: &DirichletProblem<T>) -> Result<DiscreteFunction<T>> {
    Ok(solve_harmonic_with_stats(problem)?.0)
}

pub fn solve_harmonic_with_stats<T: Real>(problem: &DirichletProblem<T>) -> Result<(DiscreteFunction<T>, SolveStats<T>)> {
    let mesh = &problem.mesh;
    if !mesh.boundary.iter().any(|&b| b) {
        return Err(FinslerError::DomainError("Dirichlet problem without boundary nodes".into()));
    }
    let interior = mesh.interior_nodes();
    let mut full = boundary_solution(problem);
    if interior.is_empty() {
        let energy = problem.energy(&full);
        return Ok((DiscreteFunction::new(full), SolveStats { iterations: 0, energy, residual: T::zero(), used_newton: false }));
    }
    let k = problem.stiffness(None);
    let kii = k.submatrix(&interior);
    let pre = BandedCholesky::factor(&kii)
        .map_err(|_| FinslerError::DegenerateMesh("stiffness matrix is not positive definite".into()))?;
    // start from the solution of the quadratic part
    let kx = k.mul_vec(&full);
    let rhs: Vec<T> = interior.iter().map(|&i| -kx[i]).collect();
    let x0 = pre.solve(&rhs);
    for (k, &i) in interior.iter().enumerate() {
        full[i] = x0[k];
    }

    let scale = problem.scale();
    let res_tol = T::tol(RESIDUAL_TOL) * scale;
    let mut r = Reduced { p: problem, interior: interior.clone(), full };
    let mut x = x0;
    let (mut e, mut g) = r.eval(&x);
    let mut z = pre.solve(&g);
    let mut d: Vec<T> = z.iter().map(|v| -*v).collect();
    let mut t_prev = T::one();
    let mut iterations = 0;
    let mut converged = max_abs(&g) <= res_tol;
    while !converged && iterations < NCG_MAX_ITERS {
        iterations += 1;
        let mut slope = dotv(&g, &d);
        if slope >= T::zero() {
            d = z.iter().map(|v| -*v).collect();
            slope = dotv(&g, &d);
        }
        let Some((t, e_new, g_new)) = line_search(&mut r, &x, &d, e, slope, t_prev) else {
            break;
        };
        x = moved(&x, t, &d);
        t_prev = t;
        let decrease = e - e_new;
        let z_new = pre.solve(&g_new);
        let num: T = z_new.iter().zip(g_new.iter().zip(&g)).map(|(zn, (gn, go))| *zn * (*gn - *go)).sum();
        let den = dotv(&z, &g);
        let beta = if den > T::zero() { (num / den).max(T::zero()) } else { T::zero() };
        d = z_new.iter().zip(&d).map(|(zn, dv)| -*zn + beta * *dv).collect();
        e = e_new;
        g = g_new;
        z = z_new;
        let res = max_abs(&g);
        converged = res <= res_tol
            || (decrease.abs() <= T::tol(ENERGY_TOL) * (T::one() + e.abs()) && res <= T::tol(1e-9) * scale);
    }
    let mut used_newton = false;
    if !converged {
        used_newton = true;
        let (xn, en, gn, it) = newton(&mut r, problem, &interior, x, res_tol)?;
        x = xn;
        e = en;
        g = gn;
        iterations += it;
    }
    r.set(&x);
    let residual = max_abs(&g);
    Ok((DiscreteFunction::new(r.full), SolveStats { iterations, energy: e, residual, used_newton }))
}

#[allow(clippy::type_complexity)]
fn newton<T: Real>(
    r: &mut Reduced<'_, T>,
    problem: &DirichletProblem<T>,
    interior: &[usize],
    mut x: Vec<T>,
    res_tol: T,
) -> Result<(Vec<T>, T, Vec<T>, usize)> {
    let (mut e, mut g) = r.eval(&x);
    for it in 0..NEWTON_MAX_ITERS {
        if max_abs(&g) <= res_tol {
            return Ok((x, e, g, it));
        }
        r.set(&x);
        let h = problem.stiffness(Some(&r.full)).submatrix(interior);
        let chol = BandedCholesky::factor(&h)?;
        let d: Vec<T> = chol.solve(&g).into_iter().map(|v| -v).collect();
        let slope = dotv(&g, &d);
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let cand = moved(&x, t, &d);
            let (ec, gc) = r.eval(&cand);
            if ec <= e + T::lit(1e-4) * t * slope || max_abs(&gc) < max_abs(&g) * (T::one() - T::lit(1e-4) * t) {
                x = cand;
                e = ec;
                g = gc;
                accepted = true;
                break;
            }
            t *= T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    if max_abs(&g) <= res_tol {
        return Ok((x, e, g, NEWTON_MAX_ITERS));
    }
    Err(FinslerError::NoConvergence(format!(
        "energy minimisation stopped with residual {}",
        max_abs(&g)
    )))
}

/// Weak equation terms `int dphi_i(nabla u) dm` for each interior hat
/// function, with `nabla u` the Legendre inverse of `du` on each cell.
pub fn weak_terms<T: Real>(problem: &DirichletProblem<T>, u: &DiscreteFunction<T>) -> Result<Vec<T>> {
    let mesh = &problem.mesh;
    let grad = gradient_field(&problem.space, mesh, u)?;
    let mut out = vec![T::zero(); mesh.node_count()];
    for c in 0..mesh.cells.len() {
        let g = mesh.basis_gradients(c);
        for (k, &node) in mesh.cells[c].iter().enumerate() {
            out[node] += problem.masses[c] * (g[k][0] * grad[c][0] + g[k][1] * grad[c][1]);
        }
    }
    Ok(out)
}

/// `max_i |int dphi_i(nabla u) dm|` over interior hat functions.
pub fn weak_residual<T: Real>(problem: &DirichletProblem<T>, u: &DiscreteFunction<T>) -> Result<T> {
    let w = weak_terms(problem, u)?;
    Ok(problem.mesh.interior_nodes().iter().fold(T::zero(), |m, &i| m.max(w[i].abs())))
}

/// `int phi_i f u dm` for each hat function, by the degree-5 cell rule.
fn potential_terms<T: Real>(problem: &DirichletProblem<T>, u: &[T], f: &[T]) -> Result<Vec<T>> {
    let mesh = &problem.mesh;
    let mut out = vec![T::zero(); mesh.node_count()];
    for c in 0..mesh.cells.len() {
        let cell = mesh.cells[c];
        for (p, w, bary) in mesh.cell_quadrature(c) {
            let dens = problem.space.density(&p)?;
            let fu: T = (0..3).map(|i| bary[i] * f[cell[i]]).sum::<T>() * (0..3).map(|i| bary[i] * u[cell[i]]).sum::<T>();
            for i in 0..3 {
                out[cell[i]] += w * dens * bary[i] * fu;
            }
        }
    }
    Ok(out)
}

/// Sense of a one-sided weak inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `Delta u >= -f u`: `int dphi(nabla u) dm <= int phi f u dm`.
    Sub,
    /// `Delta u <= f u`: `-int dphi(nabla u) dm <= int phi f u dm`.
    Super,
}

/// Verifies the weak sub- or supersolution inequality against every
/// interior hat function and reports the worst margin.
pub fn check_subsolution<T: Real>(
    problem: &DirichletProblem<T>,
    u: &DiscreteFunction<T>,
    f: Option<&DiscreteFunction<T>>,
    orientation: Orientation,
) -> Result<InequalityReport> {
    problem.mesh.check_function(u)?;
    let zero = DiscreteFunction::constant(&problem.mesh, T::zero());
    let f = f.or(problem.source.as_ref()).unwrap_or(&zero);
    problem.mesh.check_function(f)?;
    if f.values.iter().any(|&v| v < T::zero()) {
        return Err(FinslerError::DomainError("f must be nonnegative".into()));
    }
    let weak = weak_terms(problem, u)?;
    let pot = potential_terms(problem, &u.values, &f.values)?;
    let sign = match orientation {
        Orientation::Sub => T::one(),
        Orientation::Super => -T::one(),
    };
    let mut worst: Option<(usize, T, T)> = None;
    for i in problem.mesh.interior_nodes() {
        let lhs = sign * weak[i];
        let rhs = pot[i];
        if worst.is_none_or(|(_, l, r)| rhs - lhs < r - l) {
            worst = Some((i, lhs, rhs));
        }
    }
    let (node, lhs, rhs) = worst.unwrap_or((0, T::zero(), T::zero()));
    let u_scale = u.values.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::epsilon());
    let tol = T::tol(1e-8) * u_scale;
    let id = match orientation {
        Orientation::Sub => "subsolution",
        Orientation::Super => "supersolution",
    };
    Ok(InequalityReport::check_abs(id, &problem.space.name, lhs, rhs, tol)
        .with("worst_node", node as u64)
        .with_num("tol", tol)
        .with("test_functions", problem.mesh.interior_nodes().len() as u64))
}

/// Discrete maximum and minimum principle: interior values stay within the
/// boundary range up to `1e-8 * scale`.
pub fn maximum_principle_check<T: Real>(problem: &DirichletProblem<T>, u: &DiscreteFunction<T>) -> Result<InequalityReport> {
    problem.mesh.check_function(u)?;
    let mut bmax = T::neg_infinity();
    let mut bmin = T::infinity();
    let mut imax = T::neg_infinity();
    let mut imin = T::infinity();
    for (i, &v) in u.values.iter().enumerate() {
        if problem.mesh.boundary[i] {
            bmax = bmax.max(v);
            bmin = bmin.min(v);
        } else {
            imax = imax.max(v);
            imin = imin.min(v);
        }
    }
    if !bmax.is_finite() {
        return Err(FinslerError::DomainError("no boundary nodes".into()));
    }
    if !imax.is_finite() {
        imax = bmax;
        imin = bmin;
    }
    let scale = u.values.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::one());
    let tol = T::tol(1e-8) * scale;
    let ok = imax <= bmax + tol && imin >= bmin - tol;
    Ok(InequalityReport::shape(
        "maximum_principle",
        &problem.space.name,
        imax.to_f64_lossy(),
        bmax.to_f64_lossy(),
        ok,
    )
    .with_num("interior_min", imin)
    .with_num("boundary_min", bmin)
    .with_num("tol", tol))
}

/// Direct solve of the linear problem given by the quadratic part of the
/// dual norm. Agrees with [`solve_harmonic`] for Riemannian metrics.
pub fn solve_linear<T: Real>(problem: &DirichletProblem<T>) -> Result<DiscreteFunction<T>> {
    let interior = problem.mesh.interior_nodes();
    let mut full = boundary_solution(problem);
    if interior.is_empty() {
        return Ok(DiscreteFunction::new(full));
    }
    let k = problem.stiffness(None);
    let kx = k.mul_vec(&full);
    let rhs: Vec<T> = interior.iter().map(|&i| -kx[i]).collect();
    let x = BandedCholesky::factor(&k.submatrix(&interior))?.solve(&rhs);
    for (k, &i) in interior.iter().enumerate() {
        full[i] = x[k];
    }
    Ok(DiscreteFunction::new(full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::MetricDescriptor;
    use crate::spaces;

    #[test]
    fn dual_cell_matches_minkowski() {
        let m = MetricDescriptor::<f64>::randers_constant(&[0.3, -0.2]).unwrap().at(&[0.0, 0.0]).unwrap();
        let d = DualCell::from_minkowski(&m).unwrap();
        for xi in [[1.0, 0.0], [0.3, -0.7], [-2.0, 0.5]] {
            assert!((d.norm(&xi) - m.dual_norm(&xi).unwrap()).abs() < 1e-10);
            let (_, v) = d.half_square(&xi);
            let y = m.legendre_inverse(&xi).unwrap();
            assert!((v[0] - y[0]).abs() < 1e-9 && (v[1] - y[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_boundary_is_reproduced() {
        let mesh = Mesh::unit_square(6).unwrap();
        let p = DirichletProblem::with_boundary_fn(spaces::flat::<f64>(), mesh, |x| x[0]).unwrap();
        let u = solve_harmonic(&p).unwrap();
        for (i, n) in p.mesh.nodes.iter().enumerate() {
            assert!((u.values[i] - n[0]).abs() < 1e-10);
        }
    }
}
