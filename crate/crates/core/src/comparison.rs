//! Comparison functions, Laplacian-comparison profiles, geodesic polar
//! densities, ball volumes and volume-ratio checks.

use rayon::prelude::*;

use crate::error::{FinslerError, Result};
use crate::measure::{distance, shoot, GeodesicSample, MeasureSpace};
use crate::minkowski::MetricDescriptor;
use crate::report::InequalityReport;
use crate::scalar::{self, Real, Vector};

/// Default relative tolerance for comparison checks.
pub const DEFAULT_TOL: f64 = 5e-3;
/// Number of equally spaced directions in a polar table.
pub const DIRECTIONS: usize = 64;
/// Radial segments used by [`ball_volume`].
pub const RADIAL_SEGMENTS: usize = 64;

const MINIMALITY_SLACK: f64 = 1e-4;

fn check_t<T: Real>(c: T, t: T) -> Result<()> {
    if !(t > T::zero()) {
        return Err(FinslerError::DomainError(format!("comparison argument t = {t} must be positive")));
    }
    if c > T::zero() && t * c.sqrt() >= T::PI() {
        return Err(FinslerError::DomainError(format!("t = {t} beyond pi/sqrt({c})")));
    }
    Ok(())
}

/// Solution of `s'' + c s = 0`, `s(0) = 0`, `s'(0) = 1`.
pub fn s_c<T: Real>(c: T, t: T) -> Result<T> {
    check_t(c, t)?;
    Ok(if c > T::zero() {
        let q = c.sqrt();
        (q * t).sin() / q
    } else if c < T::zero() {
        let q = (-c).sqrt();
        (q * t).sinh() / q
    } else {
        t
    })
}

/// `ct_c = s_c' / s_c`.
pub fn ct_c<T: Real>(c: T, t: T) -> Result<T> {
    check_t(c, t)?;
    Ok(if c > T::zero() {
        let q = c.sqrt();
        q / (q * t).tan()
    } else if c < T::zero() {
        let q = (-c).sqrt();
        q / (q * t).tanh()
    } else {
        T::one() / t
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch<T> {
    /// `S >= -alpha`
    SBound { alpha: T },
    /// `|tau| <= k`
    TauBound { k: T },
    /// Mean curvature `m0` of the sphere of radius `r0`, given as input.
    MeanCurv { m0: T, r0: T },
}

impl<T: Real> Branch<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::SBound { .. } => "s_bound",
            Branch::TauBound { .. } => "tau_bound",
            Branch::MeanCurv { .. } => "mean_curv",
        }
    }
}

/// Comparison profile `chi(t)` for `Ric_inf >= curvature` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonProfile<T> {
    pub branch: Branch<T>,
    pub curvature: T,
    pub dimension: usize,
}

impl<T: Real> ComparisonProfile<T> {
    pub fn new(branch: Branch<T>, curvature: T, dimension: usize) -> Self {
        Self { branch, curvature, dimension }
    }

    /// Open interval on which the profile is defined; `None` means unbounded.
    pub fn valid_range(&self) -> (T, Option<T>) {
        let n1 = T::from_usize_lossy(self.dimension.saturating_sub(1));
        let k = self.curvature;
        match self.branch {
            Branch::MeanCurv { r0, .. } => (r0, None),
            Branch::SBound { .. } if k > T::zero() => (T::zero(), Some(T::FRAC_PI_2() * (n1 / k).sqrt())),
            Branch::TauBound { .. } if k > T::zero() => (T::zero(), Some(T::FRAC_PI_4() * (n1 / k).sqrt())),
            _ => (T::zero(), None),
        }
    }

    fn check(&self, t: T) -> Result<()> {
        if self.dimension < 2 {
            return Err(FinslerError::DomainError("comparison profiles need n >= 2".into()));
        }
        let (lo, hi) = self.valid_range();
        if !(t > lo) || hi.is_some_and(|h| t >= h) {
            return Err(FinslerError::DomainError(format!(
                "t = {t} outside ({lo}, {})",
                hi.map_or("inf".to_string(), |h| h.to_string())
            )));
        }
        Ok(())
    }

    fn c(&self) -> T {
        self.curvature / T::from_usize_lossy(self.dimension - 1)
    }

    fn exponent(&self) -> T {
        let n = T::from_usize_lossy(self.dimension);
        match self.branch {
            Branch::TauBound { k } => n + T::lit(4.0) * k - T::one(),
            _ => n - T::one(),
        }
    }

    pub fn chi(&self, t: T) -> Result<T> {
        self.check(t)?;
        match self.branch {
            Branch::SBound { alpha } => Ok(s_c(self.c(), t)?.powf(self.exponent()) * (alpha * t).exp()),
            Branch::TauBound { .. } => Ok(s_c(self.c(), t)?.powf(self.exponent())),
            Branch::MeanCurv { m0, r0 } => {
                let d = t - r0;
                Ok((m0 * d - self.curvature * d * d / T::lit(2.0)).exp())
            }
        }
    }

    /// `d/dt ln chi(t)`, the comparison bound on the Laplacian of distance.
    pub fn dlog_chi(&self, t: T) -> Result<T> {
        self.check(t)?;
        match self.branch {
            Branch::SBound { alpha } => Ok(self.exponent() * ct_c(self.c(), t)? + alpha),
            Branch::TauBound { .. } => Ok(self.exponent() * ct_c(self.c(), t)?),
            Branch::MeanCurv { m0, r0 } => Ok(m0 - self.curvature * (t - r0)),
        }
    }
}

/// Geodesic polar density `sigma(x, r, theta)` sampled on a grid of radii
/// and equally spaced Euclidean angles. Directions are normalised to unit
/// `F`, so `dm = sigma dr dphi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDensityTable<T> {
    pub base_point: Vector<T>,
    pub angles: Vec<T>,
    pub directions: Vec<Vector<T>>,
    pub radii: Vec<T>,
    /// `sigma[direction][radius]`
    pub sigma: Vec<Vec<T>>,
    pub minimal: Vec<Vec<bool>>,
}

/// Samples of the geodesic from `x0` with initial velocity `y` at the given
/// non-decreasing times, shot segment by segment.
fn ray<T: Real>(metric: &MetricDescriptor<T>, x0: &[T], y: &[T], times: &[T]) -> Result<Vec<GeodesicSample<T>>> {
    let mut out = Vec::with_capacity(times.len());
    let mut cur = GeodesicSample { t: T::zero(), x: x0.into(), v: y.into() };
    for &t in times {
        let dt = t - cur.t;
        if dt > T::zero() {
            let path = shoot(metric, &cur.x, &cur.v, dt, dt)?;
            let end = path.end();
            cur = GeodesicSample { t, x: end.x.clone(), v: end.v.clone() };
        }
        out.push(cur.clone());
    }
    Ok(out)
}

fn unit_direction<T: Real>(metric: &MetricDescriptor<T>, x0: &[T], phi: T) -> Result<Vector<T>> {
    let e = [phi.cos(), phi.sin()];
    let f = metric.at(x0)?.f(&e);
    Ok(scalar::scale(T::one() / f, &e))
}

fn require_plane<T: Real>(space: &MeasureSpace<T>) -> Result<()> {
    if space.dim() != 2 {
        return Err(FinslerError::UnsupportedSpace(format!(
            "polar densities are implemented for n = 2, got n = {}",
            space.dim()
        )));
    }
    Ok(())
}

fn det2<T: Real>(a: &[T], b: &[T]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

/// Builds the polar density table over `radii` (sorted, non-negative) with
/// `count` equally spaced directions.
pub fn polar_density<T: Real>(space: &MeasureSpace<T>, base_point: &[T], count: usize, radii: &[T]) -> Result<PolarDensityTable<T>> {
    require_plane(space)?;
    if count < 5 {
        return Err(FinslerError::DomainError("need at least 5 directions".into()));
    }
    if radii.windows(2).any(|w| w[1] < w[0]) || radii.first().is_some_and(|r| *r < T::zero()) {
        return Err(FinslerError::DomainError("radii must be sorted and non-negative".into()));
    }
    let metric = &space.metric;
    let dphi = T::TAU() / T::from_usize_lossy(count);
    let angles: Vec<T> = (0..count).map(|j| dphi * T::from_usize_lossy(j)).collect();
    let directions = angles
        .iter()
        .map(|&phi| unit_direction(metric, base_point, phi))
        .collect::<Result<Vec<_>>>()?;
    let rays = directions
        .par_iter()
        .map(|y| ray(metric, base_point, y, radii))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let twelve_dphi = T::lit(12.0) * dphi;
    let eight = T::lit(8.0);
    let mut sigma = vec![vec![T::zero(); radii.len()]; count];
    let mut minimal = vec![vec![true; radii.len()]; count];
    for j in 0..count {
        let jp1 = (j + 1) % count;
        let jp2 = (j + 2) % count;
        let jm1 = (j + count - 1) % count;
        let jm2 = (j + count - 2) % count;
        let mut alive = true;
        for (i, &r) in radii.iter().enumerate() {
            if r == T::zero() {
                continue;
            }
            let s = &rays[j][i];
            let d_phi: Vector<T> = (0..2)
                .map(|c| {
                    (-rays[jp2][i].x[c] + eight * rays[jp1][i].x[c] - eight * rays[jm1][i].x[c] + rays[jm2][i].x[c])
                        / twelve_dphi
                })
                .collect();
            let jac = det2(&s.v, &d_phi);
            let val = space.density(&s.x)? * jac;
            // a conjugate point flips the Jacobian sign
            alive &= val > T::zero();
            sigma[j][i] = val.abs();
            minimal[j][i] = alive;
        }
    }

    // end-of-ray check against the distance to catch cut points
    let ends: Vec<Option<usize>> = (0..count)
        .into_par_iter()
        .map(|j| last_minimal(space, base_point, radii, &rays[j], &minimal[j]))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    for (j, end) in ends.into_iter().enumerate() {
        if let Some(last) = end {
            for m in minimal[j].iter_mut().skip(last + 1) {
                *m = false;
            }
        }
    }

    Ok(PolarDensityTable { base_point: base_point.into(), angles, directions, radii: radii.to_vec(), sigma, minimal })
}

fn realises_distance<T: Real>(space: &MeasureSpace<T>, x0: &[T], r: T, s: &GeodesicSample<T>) -> Result<bool> {
    let d = distance(space, x0, &s.x)?;
    Ok(d >= r * (T::one() - T::tol(MINIMALITY_SLACK)))
}

/// Index of the last radius at which the ray still realises the distance,
/// or `None` when the whole ray does.
fn last_minimal<T: Real>(
    space: &MeasureSpace<T>,
    x0: &[T],
    radii: &[T],
    samples: &[GeodesicSample<T>],
    mask: &[bool],
) -> Result<Option<usize>> {
    let Some(top) = mask.iter().rposition(|&m| m) else {
        return Ok(None);
    };
    if radii[top] == T::zero() || realises_distance(space, x0, radii[top], &samples[top])? {
        return Ok(None);
    }
    // minimality is monotone along a ray: bisect for the cut radius
    let (mut lo, mut hi) = (0usize, top);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if radii[mid] == T::zero() || realises_distance(space, x0, radii[mid], &samples[mid])? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

impl<T: Real> PolarDensityTable<T> {
    pub fn direction_count(&self) -> usize {
        self.directions.len()
    }

    fn dphi(&self) -> T {
        T::TAU() / T::from_usize_lossy(self.direction_count())
    }

    /// Density on a direction, zero where the ray is not minimal.
    fn masked(&self, j: usize, i: usize) -> T {
        if self.minimal[j][i] {
            self.sigma[j][i]
        } else {
            T::zero()
        }
    }

    /// Angular integral `int sigma(r_i, theta) dtheta` by the periodic trapezoid rule.
    pub fn sphere_measure(&self, i: usize) -> T {
        (0..self.direction_count()).map(|j| self.masked(j, i)).sum::<T>() * self.dphi()
    }

    /// `m(B_R)` by the trapezoid rule in `r`, interpolating the last partial
    /// segment linearly.
    pub fn ball_volume(&self, r: T) -> Result<T> {
        let last = *self.radii.last().ok_or_else(|| FinslerError::DomainError("empty radius grid".into()))?;
        if r > last * (T::one() + T::epsilon() * T::lit(16.0)) {
            return Err(FinslerError::DomainError(format!("R = {r} beyond table radius {last}")));
        }
        let mut prev_r = T::zero();
        let mut prev_s = T::zero();
        let mut total = T::zero();
        for i in 0..self.radii.len() {
            let ri = self.radii[i];
            let si = self.sphere_measure(i);
            if ri >= r {
                let w = if ri > prev_r { (r - prev_r) / (ri - prev_r) } else { T::zero() };
                let s_end = prev_s + w * (si - prev_s);
                total += (r - prev_r) * (prev_s + s_end) / T::lit(2.0);
                return Ok(total);
            }
            total += (ri - prev_r) * (prev_s + si) / T::lit(2.0);
            prev_r = ri;
            prev_s = si;
        }
        Ok(total)
    }

    pub fn radius_index(&self, r: T) -> Option<usize> {
        let tol = T::tol(1e-9) * (T::one() + r.abs());
        self.radii.iter().position(|&x| (x - r).abs() <= tol)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["r", "theta_index", "sigma", "minimal"])?;
        for (i, r) in self.radii.iter().enumerate() {
            for j in 0..self.direction_count() {
                wr.write_record([
                    r.to_f64_lossy().to_string(),
                    j.to_string(),
                    self.sigma[j][i].to_f64_lossy().to_string(),
                    self.minimal[j][i].to_string(),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

fn uniform_radii<T: Real>(r: T, segments: usize) -> Vec<T> {
    (0..=segments).map(|i| r * T::from_usize_lossy(i) / T::from_usize_lossy(segments)).collect()
}

fn check_radius<T: Real>(space: &MeasureSpace<T>, base_point: &[T], r: T) -> Result<()> {
    if !(r > T::zero()) {
        return Err(FinslerError::DomainError(format!("radius {r} must be positive")));
    }
    if let Some(w) = space.working_radius {
        // certified bounds only hold on the working disc
        if scalar::norm2(base_point) + r > w {
            return Err(FinslerError::DomainError(format!("radius {r} leaves the working radius {w}")));
        }
    }
    Ok(())
}

/// Forward-ball measure `m(B_R(x))`.
pub fn ball_volume<T: Real>(space: &MeasureSpace<T>, base_point: &[T], r: T) -> Result<T> {
    check_radius(space, base_point, r)?;
    let table = polar_density(space, base_point, DIRECTIONS, &uniform_radii(r, RADIAL_SEGMENTS))?;
    table.ball_volume(r)
}

const LAPLACIAN_STEP: f64 = 1e-3;
const ANGLE_STEP: f64 = 1e-3;

/// Geodesic polar coordinates `(r, phi)` of `q` about `x0`, by Newton's
/// method on the exponential map.
pub fn polar_coordinates<T: Real>(space: &MeasureSpace<T>, x0: &[T], q: &[T]) -> Result<(T, T)> {
    require_plane(space)?;
    let metric = &space.metric;
    let d = scalar::sub(q, x0);
    if scalar::max_abs(&d) == T::zero() {
        return Err(FinslerError::DomainError("query point coincides with the base point".into()));
    }
    let m0 = metric.at(x0)?;
    let mut r = m0.f(&d);
    let mut phi = d[1].atan2(d[0]);
    let scale = scalar::norm2(&d);
    let delta = T::lit(ANGLE_STEP);
    for _ in 0..30 {
        let end = |phi: T, r: T| -> Result<GeodesicSample<T>> {
            let y = unit_direction(metric, x0, phi)?;
            Ok(ray(metric, x0, &y, &[r])?.pop().expect("one sample"))
        };
        let s = end(phi, r)?;
        let res = scalar::sub(&s.x, q);
        if scalar::norm2(&res) <= T::tol(1e-11) * (T::one() + scale) {
            return Ok((r, phi));
        }
        let sp = end(phi + delta, r)?;
        let sm = end(phi - delta, r)?;
        let dp: Vector<T> = (0..2).map(|c| (sp.x[c] - sm.x[c]) / (T::lit(2.0) * delta)).collect();
        let dr = &s.v;
        let det = det2(dr, &dp);
        if det.abs() <= T::epsilon() {
            return Err(FinslerError::NonMinimal("singular exponential map".into()));
        }
        // solve [dr dp] (a, b) = -res
        let a = -det2(&res, &dp) / det;
        let b = -det2(dr, &res) / det;
        r += a;
        phi += b;
        if !(r > T::zero()) {
            return Err(FinslerError::NoConvergence("polar coordinate search left r > 0".into()));
        }
    }
    Err(FinslerError::NoConvergence("polar coordinate search".into()))
}

/// `Delta r = d/dr ln sigma` at `q`, by central differences in `r` with
/// a local angular difference for the Jacobian.
pub fn laplacian_at<T: Real>(space: &MeasureSpace<T>, x0: &[T], q: &[T]) -> Result<T> {
    let (r, phi) = polar_coordinates(space, x0, q)?;
    let d = distance(space, x0, q)?;
    if r > d * (T::one() + T::tol(MINIMALITY_SLACK)) {
        return Err(FinslerError::NonMinimal(format!("geodesic of length {r} exceeds distance {d}")));
    }
    let h = T::lit(LAPLACIAN_STEP).min(r / T::lit(4.0));
    let delta = T::lit(ANGLE_STEP);
    let metric = &space.metric;
    let times = [r - h, r + h];
    let shots = [phi - delta, phi, phi + delta]
        .iter()
        .map(|&p| ray(metric, x0, &unit_direction(metric, x0, p)?, &times))
        .collect::<Result<Vec<_>>>()?;
    let sigma = |i: usize| -> Result<T> {
        let dp: Vector<T> = (0..2).map(|c| (shots[2][i].x[c] - shots[0][i].x[c]) / (T::lit(2.0) * delta)).collect();
        let s = &shots[1][i];
        Ok(space.density(&s.x)? * det2(&s.v, &dp))
    };
    let (lo, hi) = (sigma(0)?, sigma(1)?);
    if !(lo > T::zero() && hi > T::zero()) {
        return Err(FinslerError::NonMinimal("Jacobian vanished before the query point".into()));
    }
    Ok((hi.ln() - lo.ln()) / (T::lit(2.0) * h))
}

/// Laplacian of the distance from `x0` at each query point.
pub fn laplacian_of_distance<T: Real>(space: &MeasureSpace<T>, x0: &[T], queries: &[Vector<T>]) -> Result<Vec<T>> {
    queries.par_iter().map(|q| laplacian_at(space, x0, q)).collect::<Vec<_>>().into_iter().collect()
}

/// Branch of the volume comparison, with its constant taken from the
/// certified bounds unless overridden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeBranch<T> {
    SBound(Option<T>),
    TauBound(Option<T>),
}

impl<T: Real> VolumeBranch<T> {
    pub fn resolve(&self, space: &MeasureSpace<T>) -> Result<Branch<T>> {
        let cb = &space.certified_bounds;
        let missing = |what: &str| FinslerError::HypothesisNotMet(format!("space `{}` has no certified {what}", space.name));
        match *self {
            VolumeBranch::SBound(a) => {
                let alpha = a.or(cb.s_curvature_lower).ok_or_else(|| missing("S-curvature bound"))?;
                Ok(Branch::SBound { alpha })
            }
            VolumeBranch::TauBound(k) => {
                let k = k.or(cb.distortion_bound).ok_or_else(|| missing("distortion bound"))?;
                Ok(Branch::TauBound { k })
            }
        }
    }
}

/// Right-hand sides `(density, volume)` of the volume comparison at radii
/// `r1 < r2` for `Ric_inf >= curvature`.
pub fn volume_bounds<T: Real>(branch: Branch<T>, curvature: T, n: usize, r1: T, r2: T) -> Result<(T, T)> {
    if !(r1 > T::zero() && r2 > r1) {
        return Err(FinslerError::DomainError(format!("need 0 < r1 < r2, got {r1}, {r2}")));
    }
    let profile = ComparisonProfile::new(branch, curvature, n);
    if let (_, Some(cap)) = profile.valid_range() {
        if r2 >= cap {
            return Err(FinslerError::DomainError(format!("r2 = {r2} not below the range cap {cap}")));
        }
    }
    let nf = T::from_usize_lossy(n);
    let n1 = nf - T::one();
    let q = r2 / r1;
    let kneg = (-curvature).max(T::zero());
    match branch {
        Branch::SBound { alpha } => {
            let rate = if curvature > T::zero() { alpha } else { alpha + (n1 * kneg).sqrt() };
            let e = (r2 * rate).exp();
            Ok((q.powf(n1) * e, q.powf(nf) * e))
        }
        Branch::TauBound { k } => {
            let m = nf + T::lit(4.0) * k;
            if curvature > T::zero() {
                Ok((q.powf(m - T::one()), q.powf(m)))
            } else {
                let s = (kneg / n1).sqrt();
                Ok((q.powf(m - T::one()) * (r2 * (m - T::one()) * s).exp(), q.powf(m) * (r2 * m * s).exp()))
            }
        }
        Branch::MeanCurv { .. } => Err(FinslerError::DomainError("no volume comparison for the mean-curvature branch".into())),
    }
}

/// Checks `m(B_r2)/m(B_r1)` and the per-direction density ratios against
/// the comparison bounds for the space's certified curvature.
pub fn check_volume_ratio<T: Real>(
    space: &MeasureSpace<T>,
    base_point: &[T],
    r1: T,
    r2: T,
    branch: VolumeBranch<T>,
    tol: T,
) -> Result<InequalityReport> {
    let n = space.dim();
    let k_ric = space.certified_bounds.ric_inf_lower;
    let b = branch.resolve(space)?;
    let (density_rhs, rhs) = volume_bounds(b, k_ric, n, r1, r2)?;
    check_radius(space, base_point, r2)?;
    let half = RADIAL_SEGMENTS / 2;
    let mut radii = uniform_radii(r1, half);
    radii.extend(uniform_radii(r2 - r1, half).into_iter().skip(1).map(|r| r1 + r));
    let table = polar_density(space, base_point, DIRECTIONS, &radii)?;
    let i1 = half;
    let i2 = radii.len() - 1;
    let lhs = table.ball_volume(r2)? / table.ball_volume(r1)?;
    let mut density_max = T::zero();
    for j in 0..table.direction_count() {
        if table.minimal[j][i2] {
            density_max = density_max.max(table.sigma[j][i2] / table.sigma[j][i1]);
        }
    }
    let density_ok = density_max <= density_rhs * (T::one() + tol);
    let volume_ok = lhs <= rhs * (T::one() + tol);
    let id = match b {
        Branch::SBound { .. } => "volume_ratio_s",
        _ => "volume_ratio_tau",
    };
    let mut report = InequalityReport::shape(id, &space.name, lhs.to_f64_lossy(), rhs.to_f64_lossy(), volume_ok && density_ok)
        .with("branch", b.name())
        .with_num("r1", r1)
        .with_num("r2", r2)
        .with_num("n", T::from_usize_lossy(n))
        .with_num("ric_lower_K", k_ric)
        .with_num("ric_neg_K", -k_ric)
        .with(
            "parameterization",
            if k_ric > T::zero() { "Ric_inf >= K > 0" } else { "Ric_inf >= -K, K >= 0" },
        )
        .with_num("tol", tol)
        .with_num("density_ratio_max", density_max)
        .with_num("density_rhs", density_rhs)
        .with("density_pass", density_ok)
        .with("base_point", base_point.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>());
    match b {
        Branch::SBound { alpha } => report = report.with_num("alpha", alpha),
        Branch::TauBound { k } => report = report.with_num("k", k),
        Branch::MeanCurv { .. } => {}
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_functions() {
        assert_eq!(s_c(0.0, 7.0).unwrap(), 7.0);
        assert!((s_c(1.0, std::f64::consts::FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
        assert!((ct_c(1.0, std::f64::consts::FRAC_PI_4).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(ct_c(0.0, 2.0).unwrap(), 0.5);
        assert!(s_c(1.0, 4.0).is_err());
        assert!(ct_c(-1.0, 0.0).is_err());
    }

    #[test]
    fn profile_examples() {
        let p = ComparisonProfile::new(Branch::TauBound { k: 1.0 }, 0.0, 2);
        assert!((p.chi(2.0).unwrap() - 32.0f64).abs() < 1e-12);
        let p = ComparisonProfile::new(Branch::SBound { alpha: 1.0 }, 0.0, 2);
        assert!((p.chi(1.0).unwrap() - std::f64::consts::E).abs() < 1e-12);
        let p = ComparisonProfile::new(Branch::TauBound { k: 1.0 }, 1.0, 2);
        assert!(p.chi(std::f64::consts::FRAC_PI_4).is_err());
        assert!(p.chi(0.78).is_ok());
    }

    #[test]
    fn mean_curvature_profile() {
        let p = ComparisonProfile::new(Branch::MeanCurv { m0: 2.0, r0: 1.0 }, 1.0, 3);
        assert!((p.chi(2.0).unwrap() - 1.5f64.exp()).abs() < 1e-12);
        assert!((p.dlog_chi(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(p.chi(0.5).is_err());
    }
}
