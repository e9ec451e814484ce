//! Built-in example spaces with their certified curvature metadata.

use crate::error::{FinslerError, Result};
use crate::field::{ConformalFactor, MatrixField};
use crate::measure::{CertifiedBounds, LogDensity, MeasureSpace};
use crate::minkowski::MetricDescriptor;
use crate::scalar::Real;

pub const BUILTIN_NAMES: [&str; 4] = ["flat", "hyperbolic", "gaussian", "randers"];

/// Euclidean plane with Lebesgue measure: `Ric_inf = 0`, `tau = S = 0`.
pub fn flat<T: Real>() -> MeasureSpace<T> {
    MeasureSpace {
        name: "flat".into(),
        metric: MetricDescriptor::euclidean(2),
        log_density: LogDensity::Lebesgue,
        certified_bounds: CertifiedBounds {
            ric_inf_lower: T::zero(),
            distortion_bound: Some(T::lit(0.01)),
            s_curvature_lower: Some(T::lit(0.01)),
        },
        working_radius: None,
    }
}

/// Poincare disk `a = 4/(1-|x|^2)^2 I` with its Riemannian volume: the
/// hyperbolic plane, `Ric_inf = -1`, `tau = S = 0`.
pub fn hyperbolic<T: Real>() -> MeasureSpace<T> {
    MeasureSpace {
        name: "hyperbolic".into(),
        metric: MetricDescriptor {
            dimension: 2,
            variant: crate::minkowski::MetricVariant::Riemannian {
                a: MatrixField::Conformal {
                    n: 2,
                    factor: ConformalFactor::PoincareDisk,
                },
            },
        },
        log_density: LogDensity::RiemannianVolume,
        certified_bounds: CertifiedBounds {
            ric_inf_lower: -T::one(),
            distortion_bound: Some(T::lit(0.01)),
            s_curvature_lower: Some(T::lit(0.01)),
        },
        working_radius: None,
    }
}

/// Euclidean plane with `Phi = -|x|^2/2`: `Ric_inf = 1`, `tau = |x|^2/2`,
/// `S(x, y) = <x, y>`. The distortion and S bounds hold on `|x| <= 4`.
pub fn gaussian<T: Real>() -> MeasureSpace<T> {
    MeasureSpace {
        name: "gaussian".into(),
        metric: MetricDescriptor::euclidean(2),
        log_density: LogDensity::Gaussian { scale: T::one() },
        certified_bounds: CertifiedBounds {
            ric_inf_lower: T::one(),
            distortion_bound: Some(T::lit(8.0)),
            s_curvature_lower: Some(T::lit(4.0)),
        },
        working_radius: Some(T::lit(4.0)),
    }
}

/// Constant Randers norm `|y| + <b, y>` with `b = (1/2, 0)` and Lebesgue
/// measure. Flat, `S = 0`, and `|tau| <= 3/2 ln 2`.
pub fn randers<T: Real>() -> MeasureSpace<T> {
    randers_with(T::lit(0.5))
}

/// Constant Randers norm with `b = (b1, 0)`, `0 <= b1 < 1`.
pub fn randers_with<T: Real>(b1: T) -> MeasureSpace<T> {
    let metric = MetricDescriptor::randers_constant(&[b1, T::zero()]).expect("drift below one");
    // tau = 3/2 ln(F/alpha) ranges over 3/2 ln(1 +- |b|)
    let k = T::lit(1.5) * (T::one() - b1.abs()).ln().abs();
    MeasureSpace {
        name: "randers".into(),
        metric,
        log_density: LogDensity::Lebesgue,
        certified_bounds: CertifiedBounds {
            ric_inf_lower: T::zero(),
            distortion_bound: Some(k.max(T::lit(0.01))),
            s_curvature_lower: Some(T::zero()),
        },
        working_radius: None,
    }
}

pub fn builtin<T: Real>(name: &str) -> Result<MeasureSpace<T>> {
    match name {
        "flat" => Ok(flat()),
        "hyperbolic" => Ok(hyperbolic()),
        "gaussian" => Ok(gaussian()),
        "randers" => Ok(randers()),
        other => Err(FinslerError::Parse(format!("unknown built-in space `{other}`"))),
    }
}
