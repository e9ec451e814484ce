//! Mean-value inequalities for subsolutions and the Moser iteration chain.

use super::{Ball, Check};
use crate::elliptic::{check_subsolution, Orientation};
use crate::error::{FinslerError, Result};
use crate::mesh::DiscreteFunction;
use crate::report::InequalityReport;
use crate::scalar::Real;

pub const MOSER_STEPS: usize = 4;

fn require(report: &InequalityReport, what: &str) -> Result<()> {
    if report.is_failure() {
        return Err(FinslerError::PreconditionFailed(format!(
            "{what} check failed: lhs {} rhs {}",
            report.lhs, report.rhs
        )));
    }
    Ok(())
}

fn require_nonnegative<T: Real>(u: &DiscreteFunction<T>) -> Result<()> {
    if u.min() < T::zero() {
        return Err(FinslerError::PreconditionFailed(format!("u takes the negative value {}", u.min())));
    }
    Ok(())
}

/// Sub-ball fractions used for the monotonicity-in-delta shape checks.
fn delta_grid<T: Real>(delta: T) -> Vec<T> {
    (1..=4).map(|j| delta * T::from_usize_lossy(j) / T::lit(4.0)).collect()
}

fn monotone_shape(id: &str, space: &str, grid: &[f64], values: &[f64]) -> InequalityReport {
    let worst = values.windows(2).map(|w| w[0] - w[1] * (1.0 + 1e-12)).fold(f64::NEG_INFINITY, f64::max);
    InequalityReport::shape(id, space, worst.max(0.0), 0.0, worst <= 0.0)
        .with("deltas", grid.to_vec())
        .with("values", values.to_vec())
}

/// `sup_{B_dR} u^p` over the average `m(B_R)^-1 int_{B_R} u^p` for a
/// nonnegative subsolution of `Delta u >= -f u`; the ratio is reported
/// against the shape `(1 + A R^2)^(nu/2) (1 - delta)^(-nu)`, `A = sup|f|`.
pub fn mean_value_check<T: Real>(
    ball: &Ball<T>,
    u: &DiscreteFunction<T>,
    f: Option<&DiscreteFunction<T>>,
    p: T,
    delta: T,
) -> Result<Check> {
    if !(p > T::zero() && p <= T::lit(2.0)) {
        return Err(FinslerError::DomainError(format!("p = {p} outside (0, 2]")));
    }
    require(&check_subsolution(&ball.problem, u, f, Orientation::Sub)?, "subsolution")?;
    require_nonnegative(u)?;
    let avg = ball.integral(&u.values, T::one(), |v| v.max(T::zero()).powf(p)) / ball.measure(T::one());
    let ratio = |s: T| {
        let sup = ball.sup_over(u, s).powf(p);
        if avg > T::zero() {
            (sup, sup / avg)
        } else {
            (sup, T::zero())
        }
    };
    let (sup, c_emp) = ratio(delta);
    let big_a = f.map_or(T::zero(), |f| f.values.iter().fold(T::zero(), |m, v| m.max(v.abs())));
    let (nu, r) = (ball.config.nu, ball.radius());
    let shape = (T::one() + big_a * r * r).powf(nu / T::lit(2.0)) * (T::one() - delta).powf(-nu);
    let name = &ball.space().name;
    let report = ball
        .stamp(InequalityReport::measured("mean_value", name, sup, c_emp))
        .with_num("average", avg)
        .with_num("shape", shape)
        .with_num("p", p)
        .with_num("delta", delta)
        .with_num("A", big_a);
    let grid = delta_grid(delta);
    let values: Vec<f64> = grid.iter().map(|&s| ratio(s).1.to_f64_lossy()).collect();
    let grid: Vec<f64> = grid.iter().map(|s| s.to_f64_lossy()).collect();
    Ok(Check::new(report).with_shape(monotone_shape("mean_value_monotone", name, &grid, &values)))
}

/// `sup_{B_dR} u^-1` over `m(B_R)^-1 int u^-1` for a positive supersolution.
pub fn superharmonic_inf_check<T: Real>(ball: &Ball<T>, u: &DiscreteFunction<T>, delta: T) -> Result<Check> {
    if !(u.min() > T::zero()) {
        return Err(FinslerError::PreconditionFailed(format!("u must be positive, min {}", u.min())));
    }
    require(&check_subsolution(&ball.problem, u, None, Orientation::Super)?, "supersolution")?;
    let avg = ball.integral(&u.values, T::one(), |v| T::one() / v) / ball.measure(T::one());
    let ratio = |s: T| {
        let sup = T::one() / ball.inf_over(u, s);
        (sup, sup / avg)
    };
    let (sup, c_emp) = ratio(delta);
    let nu = ball.config.nu;
    let name = &ball.space().name;
    let report = ball
        .stamp(InequalityReport::measured("superharmonic_inf", name, sup, c_emp))
        .with_num("average_inverse", avg)
        .with_num("inf_u", ball.inf_over(u, delta))
        .with_num("shape", (T::one() - delta).powf(-nu))
        .with_num("delta", delta);
    let grid = delta_grid(delta);
    let values: Vec<f64> = grid.iter().map(|&s| ratio(s).1.to_f64_lossy()).collect();
    let grid: Vec<f64> = grid.iter().map(|s| s.to_f64_lossy()).collect();
    Ok(Check::new(report).with_shape(monotone_shape("superharmonic_monotone", name, &grid, &values)))
}

struct Step<T> {
    lhs: T,
    rhs: T,
    inner: T,
    sobolev: T,
}

struct Chain<'a, T: Real> {
    ball: &'a Ball<T>,
    u: &'a DiscreteFunction<T>,
    t: T,
    lambda: T,
    family_sobolev: T,
}

impl<T: Real> Chain<'_, T> {
    /// `B = C_S R^2 m(B_R)^(-2/nu)`
    fn sobolev_factor(&self, c: T) -> T {
        let (r, nu) = (self.ball.radius(), self.ball.config.nu);
        c * r * r * self.ball.measure(T::one()).powf(-T::lit(2.0) / nu)
    }

    /// `Theta = 11 a^2 Lambda^2` (no potential)
    fn theta(&self, a: T) -> T {
        T::lit(11.0) * a * a * self.lambda * self.lambda
    }

    /// One step: `int_{B_dR} u^{2at} <= B Theta / ((d' - d)^2 R^2) (int_{B_d'R} u^{2a})^t`,
    /// with the Sobolev constant raised, if needed, to cover the cut-off
    /// function `u^a phi` the step is built on.
    fn step(&self, a: T, d: T, dp: T) -> Step<T> {
        let (ball, u, t) = (self.ball, self.u, self.t);
        let r = ball.radius();
        let lhs = ball.integral(&u.values, d, |v| v.max(T::zero()).powf(T::lit(2.0) * a * t));
        let inner = ball.integral(&u.values, dp, |v| v.max(T::zero()).powf(T::lit(2.0) * a));
        let w: Vec<T> = u
            .values
            .iter()
            .zip(&ball.radial)
            .map(|(v, &rad)| {
                let phi = ((dp * r - rad) / ((dp - d) * r)).max(T::zero()).min(T::one());
                v.max(T::zero()).powf(a) * phi
            })
            .collect();
        let sobolev = super::sobolev_variant_value(ball, &w).unwrap_or(T::zero()).max(self.family_sobolev);
        let gap = (dp - d) * r;
        let rhs = self.sobolev_factor(sobolev) * self.theta(a) / (gap * gap) * inner.powf(t);
        Step { lhs, rhs, inner, sobolev }
    }
}

/// Single Moser step at `(a, delta, delta')` followed by four steps of the
/// schedule `delta_0 = 1`, `delta_{i+1} = delta_i - (1 - delta)/2^{i+1}`,
/// `a = t^i`, and the bound on `sup_{B_dR} u^2` obtained by iterating the
/// schedule to the end.
pub fn moser_chain_check<T: Real>(ball: &Ball<T>, u: &DiscreteFunction<T>, a: T, delta: T, delta_prime: T) -> Result<Check> {
    if !(delta > T::zero() && delta < delta_prime && delta_prime <= T::one()) || a < T::one() {
        return Err(FinslerError::DomainError("need 0 < delta < delta' <= 1 and a >= 1".into()));
    }
    require(&check_subsolution(&ball.problem, u, None, Orientation::Sub)?, "subsolution")?;
    require_nonnegative(u)?;
    let ones = vec![T::one(); u.values.len()];
    let mut family_sobolev = super::sobolev_variant_value(ball, &ones).unwrap_or(T::zero());
    for f in ball.family()? {
        for sign in [T::one(), -T::one()] {
            let v: Vec<T> = f.values.values.iter().map(|x| sign * *x).collect();
            if let Some(q) = super::sobolev_variant_value(ball, &v) {
                family_sobolev = family_sobolev.max(q);
            }
        }
    }
    let chain = Chain { ball, u, t: ball.config.moser_exponent(), lambda: ball.reversibility()?, family_sobolev };
    let tol = ball.config.tol;
    let name = &ball.space().name;

    let single = chain.step(a, delta, delta_prime);
    let report = ball
        .stamp(InequalityReport::check("moser_step", name, single.lhs, single.rhs, tol))
        .with_num("a", a)
        .with_num("t", chain.t)
        .with_num("delta", delta)
        .with_num("delta_prime", delta_prime)
        .with_num("sobolev_constant", single.sobolev)
        .with_num("lambda", chain.lambda);
    let mut check = Check::new(report);

    let mut d_prev = T::one();
    let mut a_i = T::one();
    let mut worst_sobolev = single.sobolev;
    let mut norms = Vec::new();
    for i in 0..MOSER_STEPS {
        let d_next = d_prev - (T::one() - delta) / T::lit(2.0).powi(i as i32 + 1);
        let s = chain.step(a_i, d_next, d_prev);
        worst_sobolev = worst_sobolev.max(s.sobolev);
        norms.push(s.inner.powf(T::one() / (T::lit(2.0) * a_i)).to_f64_lossy());
        check = check.with_shape(
            InequalityReport::check(&format!("moser_step_{}", i + 1), name, s.lhs, s.rhs, tol)
                .with_num("a", a_i)
                .with_num("delta_in", d_next)
                .with_num("delta_out", d_prev)
                .with_num("sobolev_constant", s.sobolev),
        );
        d_prev = d_next;
        a_i = a_i * chain.t;
    }

    // log of prod_i c_i^(t^-(i+1)), c_i = 4^(i+1) B Theta_i / ((1 - delta) R)^2
    let b = chain.sobolev_factor(worst_sobolev);
    let base = ((T::one() - delta) * ball.radius()).powi(2);
    let (mut log_bound, mut a_j, mut weight) = (T::zero(), T::one(), T::one() / chain.t);
    for j in 0..1_000_000 {
        let c = T::lit(4.0).ln() * T::from_usize_lossy(j + 1) + (b * chain.theta(a_j) / base).ln();
        log_bound += weight * c;
        if weight * c.abs().max(T::one()) < T::lit(1e-17) {
            break;
        }
        weight /= chain.t;
        a_j = a_j * chain.t;
    }
    let l2 = ball.integral(&u.values, T::one(), |v| v * v);
    let bound = log_bound.exp() * l2;
    let sup2 = ball.sup_over(u, delta).powi(2);
    let all_finite = norms.iter().all(|v| v.is_finite());
    check = check.with_shape(
        InequalityReport::shape(
            "moser_sup_bound",
            name,
            sup2.to_f64_lossy(),
            bound.to_f64_lossy(),
            all_finite && sup2 <= bound * (T::one() + tol),
        )
        .with("norms", norms),
    );
    Ok(check)
}
