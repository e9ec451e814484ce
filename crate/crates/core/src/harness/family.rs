//! Deterministic trial functions for the quotient maximisations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Ball;
use crate::error::Result;
use crate::mesh::DiscreteFunction;
use crate::scalar::Real;

pub const HATS: usize = 8;
pub const CONE_EXPONENTS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
pub const SOLVER_MODES: usize = 4;
pub const BUMPS: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFunction<T> {
    pub label: String,
    pub values: DiscreteFunction<T>,
}

fn on_chart<T: Real, F: Fn([T; 2]) -> T>(ball: &Ball<T>, f: F) -> DiscreteFunction<T> {
    DiscreteFunction::new((0..ball.mesh().node_count()).map(|i| f(ball.chart(i))).collect())
}

fn dist<T: Real>(z: [T; 2], c: [T; 2]) -> T {
    ((z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2)).sqrt()
}

/// 8 hats, 4 cones, 2 plateaus, 4 harmonic solver outputs and 22 bumps,
/// all defined on the normalised polar chart so that the family is the same
/// for every radius.
pub(super) fn build<T: Real>(ball: &Ball<T>) -> Result<Vec<TrialFunction<T>>> {
    let mut out = Vec::with_capacity(40);
    let half = T::lit(0.5);
    for j in 0..HATS {
        let t = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(HATS);
        let c = [half * t.cos(), half * t.sin()];
        out.push(TrialFunction {
            label: format!("hat{j}"),
            values: on_chart(ball, |z| (T::one() - dist(z, c) / half).max(T::zero())),
        });
    }
    for g in CONE_EXPONENTS {
        let g = T::lit(g);
        out.push(TrialFunction {
            label: format!("cone{}", g.to_f64_lossy()),
            values: on_chart(ball, |z| dist(z, [T::zero(); 2]).powf(g)),
        });
    }
    let plateau = |c: [T; 2], r: T, w: T| move |z: [T; 2]| ((r + w - dist(z, c)) / w).max(T::zero()).min(T::one());
    out.push(TrialFunction {
        label: "plateau0".into(),
        values: on_chart(ball, plateau([T::zero(); 2], T::lit(0.3), T::lit(0.3))),
    });
    out.push(TrialFunction {
        label: "plateau1".into(),
        values: on_chart(ball, plateau([T::lit(0.4), T::zero()], T::lit(0.2), T::lit(0.3))),
    });
    for j in 1..=SOLVER_MODES {
        let k = T::from_usize_lossy(j);
        let u = ball.solve(|z, _| {
            let th = z[1].atan2(z[0]);
            (k * th).cos()
        })?;
        out.push(TrialFunction { label: format!("harmonic{j}"), values: u });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ball.config.seed);
    for j in 0..BUMPS {
        let r: f64 = 0.7 * rng.gen::<f64>().sqrt();
        let th: f64 = std::f64::consts::TAU * rng.gen::<f64>();
        let w = T::lit(rng.gen_range(0.15..0.5));
        let c = [T::lit(r * th.cos()), T::lit(r * th.sin())];
        out.push(TrialFunction {
            label: format!("bump{j}"),
            values: on_chart(ball, |z| (-(dist(z, c) / w).powi(2)).exp()),
        });
    }
    Ok(out)
}
