//! Multi-scale probes on spaces with nonnegative weighted Ricci curvature.

use super::{Ball, Check, ExperimentConfig};
use crate::error::{FinslerError, Result};
use crate::measure::MeasureSpace;
use crate::report::InequalityReport;
use crate::scalar::Real;

/// Allowed upward drift of the rescaled sequences across radii.
pub const PROBE_DRIFT: f64 = 0.1;

fn require_nonnegative_ricci<T: Real>(space: &MeasureSpace<T>) -> Result<()> {
    if !space.has_nonnegative_ricci() {
        return Err(FinslerError::HypothesisNotMet(format!(
            "{} is certified only for Ric_inf >= {}",
            space.name, space.certified_bounds.ric_inf_lower
        )));
    }
    Ok(())
}

/// Balls at large radii use the `K = 0` form of the certified bound, which
/// `Ric_inf >= K >= 0` implies and which carries no radius cap.
fn probe_ball<T: Real>(space: &MeasureSpace<T>, x0: [T; 2], r: T) -> Result<Ball<T>> {
    let mut cfg = ExperimentConfig::for_space(space, x0, r);
    cfg.ric_lower = T::zero();
    Ball::new(space.clone(), cfg)
}

fn require_radii<T>(radii: &[T]) -> Result<()> {
    if radii.is_empty() {
        return Err(FinslerError::DomainError("probe needs at least one radius".into()));
    }
    Ok(())
}

fn bounded_by_first(values: &[f64]) -> (f64, bool) {
    let first = values.first().copied().unwrap_or(0.0);
    let worst = values.iter().fold(0.0f64, |m, v| m.max(*v));
    (worst, worst <= first * (1.0 + PROBE_DRIFT) + 1e-14)
}

/// Harmonic solutions with boundary data `c + amplitude sin(pi x1' / R_j) / R_j`
/// (`x1'` measured from the centre) on `B_{R_j}`: reports `sup_{B_{R_j/4}} F(nabla u)`
/// and the shape check that `R_j sup F(nabla u)` does not grow across scales.
pub fn liouville_probe<T: Real>(space: &MeasureSpace<T>, x0: [T; 2], radii: &[T], level: T, amplitude: T) -> Result<Check> {
    require_nonnegative_ricci(space)?;
    require_radii(radii)?;
    let mut sups = Vec::new();
    let mut scaled = Vec::new();
    let mut oscs = Vec::new();
    for &r in radii {
        let ball = probe_ball(space, x0, r)?;
        let u = ball.solve(|_, x| level + amplitude * (T::PI() * (x[0] - x0[0]) / r).sin() / r)?;
        let norms = ball.cell_dual_norms(&u.values);
        let sup = (0..norms.len())
            .filter(|&c| ball.cell_in(c, T::lit(0.25)))
            .fold(T::zero(), |m, c| m.max(norms[c]));
        let osc = ball.sup_over(&u, T::one()) - ball.inf_over(&u, T::one());
        sups.push(sup.to_f64_lossy());
        scaled.push((sup * r).to_f64_lossy());
        oscs.push(osc.to_f64_lossy());
    }
    let c_emp = scaled
        .iter()
        .zip(&oscs)
        .map(|(s, o)| if *o > 0.0 { s / o } else { 0.0 })
        .fold(0.0, f64::max);
    let (worst, ok) = bounded_by_first(&scaled);
    let list: Vec<f64> = radii.iter().map(|r| r.to_f64_lossy()).collect();
    let report = InequalityReport::measured("liouville", &space.name, T::lit(worst), T::lit(c_emp))
        .with("radii", list.clone())
        .with("sup_gradient", sups)
        .with("oscillation", oscs);
    let shape = InequalityReport::shape("liouville_decay", &space.name, worst, scaled[0] * (1.0 + PROBE_DRIFT), ok)
        .with("radii", list)
        .with("scaled_sup_gradient", scaled);
    Ok(Check::new(report).with_shape(shape))
}

/// Harnack ratios on `B_{delta R_j}` of the harmonic functions with boundary
/// data `g(x - x0, e_j)`, `e_j` the Euclidean extent of the ball; the measured constant is the largest ratio and the
/// shape check bounds every ratio by the first one plus the allowed drift.
pub fn global_harnack_probe<T: Real, G: Fn([T; 2], T) -> T>(
    space: &MeasureSpace<T>,
    x0: [T; 2],
    radii: &[T],
    delta: T,
    g: G,
) -> Result<Check> {
    require_nonnegative_ricci(space)?;
    require_radii(radii)?;
    let mut ratios = Vec::new();
    for &r in radii {
        let ball = probe_ball(space, x0, r)?;
        let extent = ball
            .mesh()
            .nodes
            .iter()
            .map(|p| (p[0] - x0[0]).hypot(p[1] - x0[1]))
            .fold(T::zero(), |a, b| a.max(b));
        let u = ball.solve(|_, x| g([x[0] - x0[0], x[1] - x0[1]], extent))?;
        super::positive_or_err(&u)?;
        ratios.push((ball.sup_over(&u, delta) / ball.inf_over(&u, delta)).to_f64_lossy());
    }
    let (worst, ok) = bounded_by_first(&ratios);
    let list: Vec<f64> = radii.iter().map(|r| r.to_f64_lossy()).collect();
    let report = InequalityReport::measured("global_harnack", &space.name, T::lit(worst), T::lit(worst))
        .with("radii", list.clone())
        .with_num("delta", delta)
        .with("ratios", ratios.clone());
    let shape = InequalityReport::shape("global_harnack_bounded", &space.name, worst, ratios[0] * (1.0 + PROBE_DRIFT), ok)
        .with("radii", list)
        .with("ratios", ratios);
    Ok(Check::new(report).with_shape(shape))
}
