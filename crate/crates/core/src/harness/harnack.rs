//! Harnack ratios and the weak-L1 estimate for `log u`.

use super::{positive_or_err, Ball, Check};
use crate::error::Result;
use crate::mesh::DiscreteFunction;
use crate::report::InequalityReport;
use crate::scalar::Real;

const SCALINGS: [f64; 3] = [1e-3, 7.5, 1e3];

fn ratio<T: Real>(ball: &Ball<T>, u: &DiscreteFunction<T>, s: T) -> T {
    ball.sup_over(u, s) / ball.inf_over(u, s)
}

/// `sup_{B_dR} u / inf_{B_dR} u` for positive `u`, with the exponent shape
/// `log(ratio) / (1 + sqrt|K| R)`. Shapes: invariance under `u -> lambda u`
/// to `1e-10` and monotonicity of the ratio in `delta`.
pub fn harnack_check<T: Real>(ball: &Ball<T>, u: &DiscreteFunction<T>, delta: T) -> Result<Check> {
    positive_or_err(u)?;
    let q = ratio(ball, u, delta);
    let r = ball.radius();
    let exponent = q.ln() / (T::one() + ball.config.abs_curvature().sqrt() * r);
    let name = &ball.space().name;
    let report = ball
        .stamp(InequalityReport::measured("harnack", name, q, exponent))
        .with_num("sup", ball.sup_over(u, delta))
        .with_num("inf", ball.inf_over(u, delta))
        .with_num("delta", delta);
    let drift = SCALINGS
        .iter()
        .map(|&l| ((ratio(ball, &u.scaled(T::lit(l)), delta) - q) / q).abs().to_f64_lossy())
        .fold(0.0, f64::max);
    let scaling = InequalityReport::shape("harnack_scaling", name, drift, 1e-10, drift <= 1e-10).with("lambdas", SCALINGS.to_vec());
    let grid: Vec<T> = (1..=4).map(|j| delta * T::from_usize_lossy(j) / T::lit(4.0)).collect();
    let values: Vec<f64> = grid.iter().map(|&s| ratio(ball, u, s).to_f64_lossy()).collect();
    let worst = values.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    let monotone = InequalityReport::shape("harnack_monotone", name, worst.max(0.0), 0.0, worst <= 0.0)
        .with("deltas", grid.iter().map(|s| s.to_f64_lossy()).collect::<Vec<_>>())
        .with("values", values);
    Ok(Check::new(report).with_shape(scaling).with_shape(monotone))
}

/// For `v = log u` and its `B_dR` average `vbar`: the weak-L1 constant
/// `max_t t m(B_dR & {|v - vbar| >= t}) / m(B_R)` over a log grid of `t`,
/// checked link by link against Chebyshev, Cauchy-Schwarz and a measured
/// Poincaré constant on `B_dR`, and the Dirichlet bound
/// `int_{B_dR} F^2(nabla v) <= 4 Lambda^2 / ((d' - d)^2 R^2) m(B_d'R)`.
pub fn weak_l1_log_check<T: Real>(ball: &Ball<T>, u: &DiscreteFunction<T>, delta: T, delta_prime: T) -> Result<Check> {
    positive_or_err(u)?;
    let name = &ball.space().name;
    let tol = ball.config.tol;
    // v on quadrature points is log of the interpolant of u
    let m_d = ball.measure(delta);
    let m_r = ball.measure(T::one());
    let vbar = ball.integral(&u.values, delta, |x| x.ln()) / m_d;
    let grid: Vec<T> = (0..15).map(|k| T::lit(1e-3) * T::lit(2.0).powi(k)).collect();
    let tails: Vec<T> = grid
        .iter()
        .map(|&t| t * ball.integral(&u.values, delta, |x| if (x.ln() - vbar).abs() >= t { T::one() } else { T::zero() }))
        .collect();
    let c_emp = tails.iter().fold(T::zero(), |m, x| m.max(*x)) / m_r;
    let l1 = ball.integral(&u.values, delta, |x| (x.ln() - vbar).abs());
    let l2 = ball.integral(&u.values, delta, |x| (x.ln() - vbar).powi(2));

    // int_{B_dR} F*^2(dv) with dv = du / u at each quadrature point
    let p = &ball.problem;
    let mut grad_sq = T::zero();
    for (c, q) in ball.quad.iter().enumerate() {
        if !ball.cell_in(c, delta) {
            continue;
        }
        let d = p.mesh.cell_differential(c, &u.values);
        let n = p.dual_cells()[c].norm(&[d[0], d[1]]);
        let cell = p.mesh.cells[c];
        for (w, l) in q {
            let ui = l[0] * u.values[cell[0]] + l[1] * u.values[cell[1]] + l[2] * u.values[cell[2]];
            grad_sq += *w * n * n / (ui * ui);
        }
    }
    let own = if grad_sq > T::zero() { l2 / grad_sq } else { T::zero() };
    let mut poincare = own;
    for f in ball.family()? {
        for sign in [T::one(), -T::one()] {
            let w: Vec<T> = f.values.values.iter().map(|x| sign * *x).collect();
            if let Some(q) = super::poincare_value(ball, &w, delta) {
                poincare = poincare.max(q);
            }
        }
    }
    let lambda = ball.reversibility()?;
    let r = ball.radius();
    let gap = delta_prime - delta;
    let dirichlet_rhs = T::lit(4.0) * lambda * lambda / (gap * gap * r * r) * ball.measure(delta_prime);
    let chain = poincare.sqrt() * T::lit(2.0) * lambda / (gap * r);

    let slack = T::one() + T::lit(1e-12);
    let links = [
        tails.iter().fold(T::zero(), |m, x| m.max(*x)) <= l1 * slack,
        l1 <= (l2 * m_d).sqrt() * slack,
        l2 <= poincare * grad_sq * slack,
    ];
    let report = ball
        .stamp(InequalityReport::measured("weak_l1_log", name, c_emp * m_r, c_emp))
        .with_num("vbar", vbar)
        .with_num("poincare_constant", poincare)
        .with_num("chain_constant", chain)
        .with_num("delta", delta)
        .with_num("delta_prime", delta_prime)
        .with("t_grid", grid.iter().map(|t| t.to_f64_lossy()).collect::<Vec<_>>())
        .with("tails", tails.iter().map(|t| t.to_f64_lossy()).collect::<Vec<_>>());
    let chain_ok = links.iter().all(|&b| b) && c_emp <= chain * (T::one() + tol);
    let chain_shape = InequalityReport::shape("weak_l1_chain", name, c_emp.to_f64_lossy(), chain.to_f64_lossy(), chain_ok)
        .with("links", links.to_vec());
    let dirichlet = InequalityReport::check("dirichlet_log_bound", name, grad_sq, dirichlet_rhs, tol).with_num("lambda", lambda);
    Ok(Check::new(report).with_shape(chain_shape).with_shape(dirichlet))
}
