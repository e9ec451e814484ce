//! A standard battery of checks on one ball of one space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    bochner_residual, gradient_estimate_check, global_harnack_probe, harnack_check, liouville_probe, mean_value_check,
    moser_chain_check, poincare_quotient, poincare_scaling, sobolev_quotient, superharmonic_inf_check, weak_l1_log_check,
    Ball, Check, ExperimentConfig, Polynomial,
};
use crate::error::{FinslerError, Result};
use crate::measure::MeasureSpace;
use crate::minkowski::MetricVariant;
use crate::report::InequalityReport;
use crate::sampling::ball_points;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteCheck {
    Poincare,
    PoincareScaling,
    Sobolev,
    MeanValue,
    Moser,
    Harnack,
    Superharmonic,
    WeakL1,
    Gradient,
    Bochner,
    Liouville,
    GlobalHarnack,
}

impl SuiteCheck {
    pub const ALL: [SuiteCheck; 12] = [
        SuiteCheck::Poincare,
        SuiteCheck::PoincareScaling,
        SuiteCheck::Sobolev,
        SuiteCheck::MeanValue,
        SuiteCheck::Moser,
        SuiteCheck::Harnack,
        SuiteCheck::Superharmonic,
        SuiteCheck::WeakL1,
        SuiteCheck::Gradient,
        SuiteCheck::Bochner,
        SuiteCheck::Liouville,
        SuiteCheck::GlobalHarnack,
    ];

    /// Checks that apply to a space: the probes need `Ric_inf >= 0` and the
    /// Bochner identity a constant quadratic form.
    pub fn applicable<T: Real>(space: &MeasureSpace<T>) -> Vec<SuiteCheck> {
        Self::ALL
            .into_iter()
            .filter(|c| match c {
                SuiteCheck::Liouville | SuiteCheck::GlobalHarnack => space.has_nonnegative_ricci(),
                SuiteCheck::Bochner => bochner_supported(space),
                _ => true,
            })
            .collect()
    }
}

fn bochner_supported<T: Real>(space: &MeasureSpace<T>) -> bool {
    !matches!(space.metric.variant, MetricVariant::Randers { .. }) && space.metric.is_constant_coefficient()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions<T> {
    pub checks: Vec<SuiteCheck>,
    /// Radii for the Poincaré scaling shape; see [`default_scaling_radii`].
    pub scaling_radii: Option<Vec<T>>,
    pub probe_radii: Vec<T>,
}

impl<T: Real> SuiteOptions<T> {
    pub fn for_space(space: &MeasureSpace<T>) -> Self {
        Self {
            checks: SuiteCheck::applicable(space),
            scaling_radii: None,
            probe_radii: vec![T::one(), T::lit(2.0), T::lit(4.0)],
        }
    }
}

/// Closed-form test functions for the Bochner identity.
pub fn bochner_cases<T: Real>() -> Vec<(&'static str, Polynomial<T>)> {
    vec![
        ("half_saddle", Polynomial::new(vec![(T::lit(0.5), 2, 0), (T::lit(-0.5), 0, 2)])),
        ("cubic", Polynomial::new(vec![(T::one(), 3, 0)])),
        ("linear", Polynomial::new(vec![(T::one(), 1, 0)])),
        ("mixed", Polynomial::new(vec![(T::one(), 1, 2), (T::lit(0.25), 2, 1), (T::lit(-1.0), 0, 1)])),
    ]
}

/// `R/4, R/2, R` with `R` capped at `1/(2 sqrt|K|)`: the R^2 law is a
/// small-scale statement once curvature is present.
pub fn default_scaling_radii<T: Real>(config: &ExperimentConfig<T>) -> Vec<T> {
    let k = config.ric_lower.abs();
    let r = if k > T::zero() { config.radius.min(T::lit(0.5) / k.sqrt()) } else { config.radius };
    vec![r / T::lit(4.0), r / T::lit(2.0), r]
}

pub const BOCHNER_TOL: f64 = 1e-8;

/// Runs the requested checks on `B_R(x0)`. Reports come back in the order
/// of `options.checks`, each followed by its shape checks.
pub fn run_suite<T: Real>(space: &MeasureSpace<T>, config: &ExperimentConfig<T>, options: &SuiteOptions<T>) -> Result<Vec<InequalityReport>> {
    let ball = Ball::new(space.clone(), config.clone())?;
    ball.family()?;
    ball.reversibility()?;
    let harmonic = ball.solve(|z, _| T::lit(2.0) + z[0])?;
    let saddle = ball.solve(|z, _| T::lit(3.0) + z[0] * z[0] - z[1] * z[1])?;
    let (delta, delta_p) = (config.delta, config.delta_prime);
    let results: Vec<Result<Vec<InequalityReport>>> = options
        .checks
        .par_iter()
        .map(|check| {
            let c: Check = match check {
                SuiteCheck::Poincare => poincare_quotient(&ball)?,
                SuiteCheck::PoincareScaling => {
                    let radii = options.scaling_radii.clone().unwrap_or_else(|| default_scaling_radii(config));
                    poincare_scaling(space, config, &radii, T::lit(0.05))?
                }
                SuiteCheck::Sobolev => sobolev_quotient(&ball)?,
                SuiteCheck::MeanValue => mean_value_check(&ball, &harmonic, None, config.p, delta)?,
                SuiteCheck::Moser => moser_chain_check(&ball, &harmonic, config.a, delta, delta_p)?,
                SuiteCheck::Harnack => harnack_check(&ball, &harmonic, delta)?,
                SuiteCheck::Superharmonic => superharmonic_inf_check(&ball, &harmonic, delta)?,
                SuiteCheck::WeakL1 => weak_l1_log_check(&ball, &harmonic, delta, delta_p)?,
                SuiteCheck::Gradient => gradient_estimate_check(&ball, &saddle)?,
                SuiteCheck::Bochner => {
                    if !bochner_supported(space) {
                        return Err(FinslerError::UnsupportedSpace(format!("no coordinate Bochner check on {}", space.name)));
                    }
                    let pts: Vec<[T; 2]> = ball_points(&config.base_point, config.radius, 16).iter().map(|p| [p[0], p[1]]).collect();
                    let mut reports = Vec::new();
                    for (label, poly) in bochner_cases::<T>() {
                        let res = bochner_residual(space, &poly, &pts)?;
                        reports.push(
                            InequalityReport::check_abs("bochner", &space.name, res, T::zero(), T::lit(BOCHNER_TOL))
                                .with("case", label)
                                .with("points", pts.len() as u64),
                        );
                    }
                    return Ok(reports);
                }
                SuiteCheck::Liouville => liouville_probe(space, config.base_point, &options.probe_radii, T::one(), T::one())?,
                SuiteCheck::GlobalHarnack => {
                    global_harnack_probe(space, config.base_point, &options.probe_radii, delta, |x, r| T::lit(2.0) + x[0] / r)?
                }
            };
            Ok(c.into_reports())
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
