//! Gradient bounds for positive harmonic functions and the weak
//! subsolution test for `h = F^2(nabla u)`.

use super::{positive_or_err, Ball, Check};
use crate::error::{FinslerError, Result};
use crate::mesh::DiscreteFunction;
use crate::report::InequalityReport;
use crate::scalar::Real;

/// Fraction of cells on which `du` may vanish before the frozen-coefficient
/// test is considered unreliable.
const MAX_FLAT_FRACTION: f64 = 0.1;

/// Over cells inside `B_{rho R}`: `max{F(nabla log u), F(nabla(-log u))}`,
/// i.e. `max(F*(du), F*(-du)) / min u` per cell, reported against the shape
/// `(1 + K)^(n + 4k)` with `Ric_inf >= -K`. The shape check is the weak
/// inequality `int dphi(nabla^{nabla u} h) dm <= 2K int phi h dm` for chart
/// hats `phi` supported away from the boundary, where `nabla^{nabla u} h = g*(du) dh` is taken with
/// the dual tensor frozen on each cell.
pub fn gradient_estimate_check<T: Real>(ball: &Ball<T>, u: &DiscreteFunction<T>) -> Result<Check> {
    positive_or_err(u)?;
    let p = &ball.problem;
    let mesh = &p.mesh;
    let rho = ball.config.rho;
    let mut worst = T::zero();
    for c in 0..mesh.cells.len() {
        if !ball.cell_in(c, rho) {
            continue;
        }
        let d = mesh.cell_differential(c, &u.values);
        let dual = &p.dual_cells()[c];
        let n = dual.norm(&[d[0], d[1]]).max(dual.norm(&[-d[0], -d[1]]));
        let umin = mesh.cells[c].iter().fold(T::infinity(), |m, &i| m.min(u.values[i]));
        worst = worst.max(n / umin);
    }
    let k_neg = ball.config.lower_bound_magnitude();
    let n = T::from_usize_lossy(ball.space().dim());
    let shape = (T::one() + k_neg).powf(n + T::lit(4.0) * ball.config.distortion);
    let constant = if worst > T::zero() { (worst / shape).ln() / (T::one() + k_neg.sqrt()) } else { T::neg_infinity() };
    let name = &ball.space().name;
    let report = ball
        .stamp(InequalityReport::measured("gradient_estimate", name, worst, constant))
        .with_num("shape", shape)
        .with_num("rho", rho)
        .with_num("K", k_neg);
    Ok(Check::new(report).with_shape(norm_subsolution(ball, u, k_neg)?))
}

fn norm_subsolution<T: Real>(ball: &Ball<T>, u: &DiscreteFunction<T>, k: T) -> Result<InequalityReport> {
    let p = &ball.problem;
    let mesh = &p.mesh;
    let name = &ball.space().name;
    let cells = mesh.cells.len();
    let diffs: Vec<[T; 2]> = (0..cells)
        .map(|c| {
            let d = mesh.cell_differential(c, &u.values);
            [d[0], d[1]]
        })
        .collect();
    let h_cell: Vec<T> = (0..cells).map(|c| p.dual_cells()[c].norm(&diffs[c]).powi(2)).collect();
    let h_max = h_cell.iter().fold(T::zero(), |m, v| m.max(*v));
    let u_scale = u.values.iter().fold(T::zero(), |m, v| m.max(v.abs())) / ball.radius();
    if h_max <= (T::lit(1e-10) * u_scale).powi(2) {
        return Ok(InequalityReport::shape("gradient_norm_subsolution", name, 0.0, 0.0, true));
    }
    let flat = h_cell.iter().filter(|&&h| h <= T::lit(1e-16) * h_max).count();
    if flat as f64 > MAX_FLAT_FRACTION * cells as f64 {
        return Err(FinslerError::InsufficientRegularity(format!("du vanishes on {flat} of {cells} cells")));
    }
    // nodal h: mass-weighted average of the adjacent cell values
    let masses = p.cell_masses();
    let mut h = vec![T::zero(); mesh.node_count()];
    let mut wsum = vec![T::zero(); mesh.node_count()];
    for (c, cell) in mesh.cells.iter().enumerate() {
        for &i in cell {
            h[i] += masses[c] * h_cell[c];
            wsum[i] += masses[c];
        }
    }
    h.iter_mut().zip(&wsum).for_each(|(v, w)| *v /= *w);
    // flux[c] = g*(du) dh on each cell with the dual tensor frozen
    let flux: Vec<[T; 2]> = (0..cells)
        .map(|c| {
            let g = p.dual_cells()[c].hessian(&diffs[c]);
            let dh = mesh.cell_differential(c, &h);
            [g[0][0] * dh[0] + g[0][1] * dh[1], g[1][0] * dh[0] + g[1][1] * dh[1]]
        })
        .collect();
    let two = T::lit(2.0);
    let r = ball.radius();
    let (mut worst, mut worst_tol, mut at) = (T::neg_infinity(), T::zero(), 0usize);
    let mut ok = true;
    for (t, phi) in test_functions(ball).iter().enumerate() {
        let (mut lhs, mut mag, mut rhs) = (T::zero(), T::zero(), T::zero());
        for c in 0..cells {
            let cell = mesh.cells[c];
            let mean = (phi[cell[0]] + phi[cell[1]] + phi[cell[2]]) / T::lit(3.0);
            let dphi = mesh.cell_differential(c, phi);
            let term = masses[c] * (dphi[0] * flux[c][0] + dphi[1] * flux[c][1]);
            lhs += term;
            mag += term.abs();
            rhs += two * k * masses[c] * mean * h_cell[c];
        }
        let tol = ball.config.tol * mag + T::lit(1e-12) * h_max * ball.measure(T::one()) / (r * r);
        let excess = lhs - rhs;
        if excess - tol > worst - worst_tol {
            worst = excess;
            worst_tol = tol;
            at = t;
        }
        ok &= excess <= tol;
    }
    Ok(InequalityReport::shape(
        "gradient_norm_subsolution",
        name,
        worst.to_f64_lossy(),
        worst_tol.to_f64_lossy(),
        ok,
    )
    .with("worst_test_function", at as u64)
    .with_num("K", k))
}

/// Chart hats `max(0, 1 - |z - c| / w)` with width `w = 0.4` centred at the
/// origin and on rings of radius 0.25 and 0.5, so every support stays in
/// `|z| <= 0.9`.
fn test_functions<T: Real>(ball: &Ball<T>) -> Vec<Vec<T>> {
    let w = T::lit(0.4);
    let mut centres = vec![[T::zero(), T::zero()]];
    for (rad, count) in [(0.25, 6usize), (0.5, 12)] {
        for j in 0..count {
            let th = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(count);
            centres.push([T::lit(rad) * th.cos(), T::lit(rad) * th.sin()]);
        }
    }
    centres
        .iter()
        .map(|c| {
            (0..ball.mesh().node_count())
                .map(|i| {
                    let z = ball.chart(i);
                    let d = ((z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2)).sqrt();
                    (T::one() - d / w).max(T::zero())
                })
                .collect()
        })
        .collect()
}
