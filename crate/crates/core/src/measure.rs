//! Measure spaces: distortion, S-curvature, geodesics and the asymmetric
//! distance, plus the mesh-level gradient and weak-divergence operators.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{FinslerError, Result};
use crate::field::MatrixField;
use crate::linalg::Matrix;
use crate::mesh::{DiscreteFunction, Mesh};
use crate::minkowski::{MetricDescriptor, MetricVariant, Minkowski, TangentVector};
use crate::scalar::{self, dot, Real, Vector};

/// Log-density `Phi` of the measure `dm = e^Phi dx`.
#[derive(Debug, Clone, PartialEq)]
pub enum LogDensity<T> {
    Lebesgue,
    /// `Phi = -scale |x|^2 / 2`
    Gaussian { scale: T },
    /// `Phi = ln sqrt(det a)`, the volume of the quadratic part.
    RiemannianVolume,
}

impl<T: Real> LogDensity<T> {
    pub fn phi(&self, metric: &MetricDescriptor<T>, x: &[T]) -> Result<T> {
        match self {
            LogDensity::Lebesgue => Ok(T::zero()),
            LogDensity::Gaussian { scale } => Ok(-*scale * dot(x, x) / T::lit(2.0)),
            LogDensity::RiemannianVolume => match quadratic_part(metric) {
                None => Ok(T::zero()),
                Some(MatrixField::Conformal { n, factor }) => {
                    Ok(T::from_usize_lossy(*n) * factor.psi(x)?)
                }
                Some(a) => Ok(a.value(x)?.det().ln() / T::lit(2.0)),
            },
        }
    }

    pub fn grad_phi(&self, metric: &MetricDescriptor<T>, x: &[T]) -> Result<Vector<T>> {
        match self {
            LogDensity::Lebesgue => Ok(scalar::zeros(x.len())),
            LogDensity::Gaussian { scale } => Ok(scalar::scale(-*scale, x)),
            LogDensity::RiemannianVolume => match quadratic_part(metric) {
                Some(MatrixField::Conformal { n, factor }) => {
                    Ok(scalar::scale(T::from_usize_lossy(*n), &factor.grad_psi(x)?))
                }
                _ => Ok(scalar::zeros(x.len())),
            },
        }
    }

    pub fn hess_phi(&self, metric: &MetricDescriptor<T>, x: &[T]) -> Result<Matrix<T>> {
        let n = x.len();
        match self {
            LogDensity::Lebesgue => Ok(Matrix::zeros(n)),
            LogDensity::Gaussian { scale } => Ok(Matrix::identity(n).scaled(-*scale)),
            LogDensity::RiemannianVolume => match quadratic_part(metric) {
                Some(MatrixField::Conformal { n, factor }) => {
                    Ok(factor.hess_psi(x)?.scaled(T::from_usize_lossy(*n)))
                }
                _ => Ok(Matrix::zeros(n)),
            },
        }
    }

    pub fn is_constant(&self, metric: &MetricDescriptor<T>) -> bool {
        match self {
            LogDensity::Lebesgue => true,
            LogDensity::Gaussian { scale } => *scale == T::zero(),
            LogDensity::RiemannianVolume => metric.is_constant_coefficient(),
        }
    }
}

fn quadratic_part<T: Real>(metric: &MetricDescriptor<T>) -> Option<&MatrixField<T>> {
    match &metric.variant {
        MetricVariant::Euclidean => None,
        MetricVariant::Riemannian { a } | MetricVariant::Randers { a, .. } => Some(a),
    }
}

/// Curvature metadata asserted for a space: `Ric_inf >= K`, `|tau| <= k`,
/// `S >= -alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedBounds<T> {
    pub ric_inf_lower: T,
    pub distortion_bound: Option<T>,
    pub s_curvature_lower: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace<T> {
    pub name: String,
    pub metric: MetricDescriptor<T>,
    pub log_density: LogDensity<T>,
    pub certified_bounds: CertifiedBounds<T>,
    /// Radius about the origin on which the certified bounds hold.
    pub working_radius: Option<T>,
}

impl<T: Real> MeasureSpace<T> {
    pub fn dim(&self) -> usize {
        self.metric.dimension
    }

    pub fn phi(&self, x: &[T]) -> Result<T> {
        self.log_density.phi(&self.metric, x)
    }

    pub fn density(&self, x: &[T]) -> Result<T> {
        Ok(self.phi(x)?.exp())
    }

    /// True when the certified bounds include `Ric_inf >= 0`.
    pub fn has_nonnegative_ricci(&self) -> bool {
        self.certified_bounds.ric_inf_lower >= T::zero()
    }
}

/// `tau(x, y) = ln(sqrt(det g_y) / e^Phi)`
pub fn distortion<T: Real>(space: &MeasureSpace<T>, v: &TangentVector<T>) -> Result<T> {
    let m = space.metric.at(&v.base_point)?;
    distortion_at(space, &m, &v.base_point, &v.components)
}

fn distortion_at<T: Real>(space: &MeasureSpace<T>, m: &Minkowski<T>, x: &[T], y: &[T]) -> Result<T> {
    let g = m.fundamental_tensor(y)?;
    Ok(g.det().ln() / T::lit(2.0) - space.phi(x)?)
}

/// `L = F^2` and its first and mixed derivatives at `(x, y)`.
#[derive(Debug, Clone)]
pub struct LagrangianJet<T> {
    pub l: T,
    pub l_x: Vector<T>,
    pub l_y: Vector<T>,
    /// `l_xy[(k, l)] = d^2 L / dx^k dy^l`
    pub l_xy: Matrix<T>,
    pub g: Matrix<T>,
}

pub fn lagrangian_jet<T: Real>(metric: &MetricDescriptor<T>, x: &[T], y: &[T]) -> Result<LagrangianJet<T>> {
    let n = metric.dimension;
    if scalar::max_abs(y) == T::zero() {
        return Err(FinslerError::ZeroVector);
    }
    let m = metric.at(x)?;
    let g = m.fundamental_tensor(y)?;
    let (a, da, b, db) = match &metric.variant {
        MetricVariant::Euclidean => {
            let l = dot(y, y);
            return Ok(LagrangianJet {
                l,
                l_x: scalar::zeros(n),
                l_y: scalar::scale(T::lit(2.0), y),
                l_xy: Matrix::zeros(n),
                g,
            });
        }
        MetricVariant::Riemannian { a } => (
            a.value(x)?,
            a.derivatives(x)?,
            scalar::zeros::<T>(n),
            vec![scalar::zeros::<T>(n); n],
        ),
        MetricVariant::Randers { a, b } => {
            (a.value(x)?, a.derivatives(x)?, b.value(x)?, b.derivatives(x)?)
        }
    };
    let two = T::lit(2.0);
    let ay = a.mul_vec(y);
    let alpha = a.quad(y).sqrt();
    let f = alpha + dot(&b, y);
    let f_y: Vector<T> = (0..n).map(|l| ay[l] / alpha + b[l]).collect();
    let mut f_x = scalar::zeros::<T>(n);
    let mut alpha_x = scalar::zeros::<T>(n);
    for k in 0..n {
        alpha_x[k] = da[k].quad(y) / (two * alpha);
        f_x[k] = alpha_x[k] + dot(&db[k], y);
    }
    let mut l_xy = Matrix::zeros(n);
    for k in 0..n {
        let day = da[k].mul_vec(y);
        for l in 0..n {
            let d_fy = day[l] / alpha - ay[l] * alpha_x[k] / (alpha * alpha) + db[k][l];
            l_xy[(k, l)] = two * f_x[k] * f_y[l] + two * f * d_fy;
        }
    }
    Ok(LagrangianJet {
        l: f * f,
        l_x: scalar::scale(two * f, &f_x),
        l_y: scalar::scale(two * f, &f_y),
        l_xy,
        g,
    })
}

/// Spray coefficients `G^i = 1/4 g^{il} (L_{x^k y^l} y^k - L_{x^l})`.
pub fn spray<T: Real>(metric: &MetricDescriptor<T>, x: &[T], y: &[T]) -> Result<Vector<T>> {
    let n = metric.dimension;
    if matches!(metric.variant, MetricVariant::Euclidean) || scalar::max_abs(y) == T::zero() {
        return Ok(scalar::zeros(n));
    }
    let j = lagrangian_jet(metric, x, y)?;
    let rhs: Vector<T> = (0..n)
        .map(|l| (0..n).map(|k| j.l_xy[(k, l)] * y[k]).sum::<T>() - j.l_x[l])
        .collect();
    Ok(scalar::scale(T::lit(0.25), &j.g.solve(&rhs)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSample<T> {
    pub t: T,
    pub x: Vector<T>,
    pub v: Vector<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath<T> {
    pub samples: Vec<GeodesicSample<T>>,
    pub speed: T,
    pub minimal: bool,
}

impl<T: Real> GeodesicPath<T> {
    pub fn end(&self) -> &GeodesicSample<T> {
        self.samples.last().expect("geodesic has samples")
    }

    pub fn write_csv<W: std::io::Write>(&self, metric: &MetricDescriptor<T>, w: W) -> Result<()> {
        let n = metric.dimension;
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("v{i}")));
        header.push("F".into());
        wr.write_record(&header)?;
        for s in &self.samples {
            let f = metric.at(&s.x)?.f(&s.v);
            let mut row = vec![s.t.to_f64_lossy().to_string()];
            row.extend(s.x.iter().map(|v| v.to_f64_lossy().to_string()));
            row.extend(s.v.iter().map(|v| v.to_f64_lossy().to_string()));
            row.push(f.to_f64_lossy().to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

const SPEED_DRIFT: f64 = 1e-6;
const MAX_HALVINGS: usize = 14;

fn accel<T: Real>(metric: &MetricDescriptor<T>, x: &[T], v: &[T]) -> Result<Vector<T>> {
    Ok(scalar::scale(-T::lit(2.0), &spray(metric, x, v)?))
}

fn rk4_run<T: Real>(
    metric: &MetricDescriptor<T>,
    x0: &[T],
    y0: &[T],
    t_end: T,
    outputs: usize,
    sub: usize,
    f0: T,
) -> Result<(Vec<GeodesicSample<T>>, T)> {
    let dt = t_end / T::from_usize_lossy(outputs * sub);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let mut x: Vector<T> = x0.iter().copied().collect();
    let mut v: Vector<T> = y0.iter().copied().collect();
    let mut samples = Vec::with_capacity(outputs + 1);
    samples.push(GeodesicSample { t: T::zero(), x: x.clone(), v: v.clone() });
    let mut drift = T::zero();
    for step in 0..outputs * sub {
        let k1x = v.clone();
        let k1v = accel(metric, &x, &v)?;
        let x2 = scalar::axpy(half * dt, &k1x, &x);
        let v2 = scalar::axpy(half * dt, &k1v, &v);
        let k2v = accel(metric, &x2, &v2)?;
        let x3 = scalar::axpy(half * dt, &v2, &x);
        let v3 = scalar::axpy(half * dt, &k2v, &v);
        let k3v = accel(metric, &x3, &v3)?;
        let x4 = scalar::axpy(dt, &v3, &x);
        let v4 = scalar::axpy(dt, &k3v, &v);
        let k4v = accel(metric, &x4, &v4)?;
        for i in 0..x.len() {
            x[i] += dt * sixth * (k1x[i] + T::lit(2.0) * (v2[i] + v3[i]) + v4[i]);
            v[i] += dt * sixth * (k1v[i] + T::lit(2.0) * (k2v[i] + k3v[i]) + k4v[i]);
        }
        let f = metric.at(&x)?.f(&v);
        drift = drift.max((f - f0).abs());
        if (step + 1) % sub == 0 {
            let t = dt * T::from_usize_lossy(step + 1);
            samples.push(GeodesicSample { t, x: x.clone(), v: v.clone() });
        }
    }
    Ok((samples, drift))
}

/// Integrates the geodesic equations with RK4. Samples are returned at
/// multiples of `step` (a negative `t_max` integrates backwards); the
/// internal step is halved until the speed drift is below `1e-6` relative.
pub fn shoot<T: Real>(metric: &MetricDescriptor<T>, x0: &[T], y0: &[T], t_max: T, step: T) -> Result<GeodesicPath<T>> {
    if scalar::max_abs(y0) == T::zero() {
        return Err(FinslerError::ZeroVector);
    }
    if !(step > T::zero()) {
        return Err(FinslerError::DomainError("geodesic step must be positive".into()));
    }
    let f0 = metric.at(x0)?.f(y0);
    let outputs = (t_max.abs() / step).ceil().to_usize().unwrap_or(1).max(1);
    let mut sub = 1;
    for _ in 0..=MAX_HALVINGS {
        match rk4_run(metric, x0, y0, t_max, outputs, sub, f0) {
            Ok((samples, drift)) if drift < T::tol(SPEED_DRIFT) * f0 => {
                return Ok(GeodesicPath { samples, speed: f0, minimal: true });
            }
            Ok(_) => {}
            // a stage left the metric domain; a smaller step may not
            Err(FinslerError::DomainError(_)) | Err(FinslerError::InvalidMetric(_)) => {}
            Err(e) => return Err(e),
        }
        sub *= 2;
    }
    Err(FinslerError::StepFailure(format!(
        "speed drift not controlled after {MAX_HALVINGS} step halvings"
    )))
}

pub fn geodesic_shoot<T: Real>(
    space: &MeasureSpace<T>,
    x0: &[T],
    y0: &TangentVector<T>,
    t_max: T,
    step: T,
) -> Result<GeodesicPath<T>> {
    shoot(&space.metric, x0, &y0.components, t_max, step)
}

/// Length scale for differencing along geodesics.
fn length_scale<T: Real>(space: &MeasureSpace<T>, x: &[T]) -> T {
    match space.metric.domain_radius() {
        Some(r) => (r - scalar::norm2(x)).min(T::one()),
        None => T::one(),
    }
}

/// `S(x, y) = d/dt tau(gamma(t), gamma'(t))` at `t = 0` by central differences.
pub fn s_curvature<T: Real>(space: &MeasureSpace<T>, v: &TangentVector<T>) -> Result<T> {
    let x = &v.base_point;
    let y = &v.components;
    let f = space.metric.at(x)?.f(y);
    if f == T::zero() {
        return Err(FinslerError::ZeroVector);
    }
    let h = T::lit(1e-3) * length_scale(space, x) / f;
    let fwd = shoot(&space.metric, x, y, h, h / T::lit(4.0))?;
    let bwd = shoot(&space.metric, x, y, -h, h / T::lit(4.0))?;
    let tau = |s: &GeodesicSample<T>| -> Result<T> {
        let m = space.metric.at(&s.x)?;
        distortion_at(space, &m, &s.x, &s.v)
    };
    Ok((tau(fwd.end())? - tau(bwd.end())?) / (T::lit(2.0) * h))
}

const LATTICE: usize = 33;
const SEGMENTS: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult<T> {
    pub value: T,
    /// Polyline from the first to the second point.
    pub path: Vec<Vector<T>>,
    /// True when a shot geodesic reproduced the minimised length.
    pub refined: bool,
}

/// Forward distance `d(x1, x2)`.
pub fn distance<T: Real>(space: &MeasureSpace<T>, x1: &[T], x2: &[T]) -> Result<T> {
    Ok(distance_path(&space.metric, x1, x2)?.value)
}

pub fn distance_path<T: Real>(metric: &MetricDescriptor<T>, x1: &[T], x2: &[T]) -> Result<DistanceResult<T>> {
    metric.at(x1)?;
    metric.at(x2)?;
    let d = scalar::sub(x2, x1);
    if scalar::max_abs(&d) == T::zero() {
        return Ok(DistanceResult { value: T::zero(), path: vec![x1.into(), x2.into()], refined: true });
    }
    if metric.is_constant_coefficient() {
        // straight segments are minimal for translation-invariant norms
        return Ok(DistanceResult {
            value: metric.at(x1)?.f(&d),
            path: vec![x1.into(), x2.into()],
            refined: true,
        });
    }
    let coarse = if metric.dimension == 2 {
        lattice_path(metric, x1, x2)?
    } else {
        vec![x1.into(), x2.into()]
    };
    let mut pts = resample(&coarse, SEGMENTS);
    straighten(metric, &mut pts)?;
    let discrete = discrete_length(metric, &pts)?;
    let mut out = DistanceResult { value: discrete, path: pts.clone(), refined: false };
    let y0 = scalar::scale(T::from_usize_lossy(SEGMENTS), &scalar::sub(&pts[1], &pts[0]));
    if let Ok(y) = shoot_to(metric, x1, x2, y0) {
        let len = metric.at(x1)?.f(&y);
        if (len - discrete).abs() <= T::lit(1e-2) * discrete {
            out.value = len;
            out.refined = true;
        }
    }
    Ok(out)
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);
impl Eq for HeapItem {}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const STENCIL: [(i64, i64); 16] = [
    (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1),
    (1, 2), (2, 1), (-1, 2), (-2, 1), (1, -2), (2, -1), (-1, -2), (-2, -1),
];

// Dijkstra on a lattice over a box around the two points, with the two
// endpoints attached to nearby lattice nodes.
fn lattice_path<T: Real>(metric: &MetricDescriptor<T>, x1: &[T], x2: &[T]) -> Result<Vec<Vector<T>>> {
    let span = scalar::norm2(&scalar::sub(x2, x1));
    let margin = span * T::lit(0.5);
    let mut lo = [x1[0].min(x2[0]) - margin, x1[1].min(x2[1]) - margin];
    let mut hi = [x1[0].max(x2[0]) + margin, x1[1].max(x2[1]) + margin];
    if let Some(r) = metric.domain_radius() {
        for k in 0..2 {
            lo[k] = lo[k].max(-r);
            hi[k] = hi[k].min(r);
        }
    }
    let nl = LATTICE;
    let hx = (hi[0] - lo[0]) / T::from_usize_lossy(nl - 1);
    let hy = (hi[1] - lo[1]) / T::from_usize_lossy(nl - 1);
    let node = |i: usize, j: usize| -> Vector<T> {
        smallvec::smallvec![lo[0] + hx * T::from_usize_lossy(i), lo[1] + hy * T::from_usize_lossy(j)]
    };
    let inside = |p: &[T]| -> bool {
        match metric.domain_radius() {
            Some(r) => scalar::norm2(p) < r * (T::one() - T::lit(1e-6)),
            None => true,
        }
    };
    let total = nl * nl + 2;
    let (src, dst) = (nl * nl, nl * nl + 1);
    let pos = |id: usize| -> Vector<T> {
        if id == src {
            x1.into()
        } else if id == dst {
            x2.into()
        } else {
            node(id % nl, id / nl)
        }
    };
    let weight = |a: &[T], b: &[T]| -> Option<f64> {
        let mid: Vector<T> = a.iter().zip(b).map(|(&p, &q)| (p + q) / T::lit(2.0)).collect();
        let m = metric.at(&mid).ok()?;
        Some(m.f(&scalar::sub(b, a)).to_f64_lossy())
    };
    let near = |p: &[T]| -> Vec<usize> {
        let ci = ((p[0] - lo[0]) / hx).to_f64_lossy().round() as i64;
        let cj = ((p[1] - lo[1]) / hy).to_f64_lossy().round() as i64;
        let mut out = Vec::new();
        for di in -2..=2 {
            for dj in -2..=2 {
                let (i, j) = (ci + di, cj + dj);
                if i >= 0 && j >= 0 && (i as usize) < nl && (j as usize) < nl {
                    let id = j as usize * nl + i as usize;
                    if inside(&node(i as usize, j as usize)) {
                        out.push(id);
                    }
                }
            }
        }
        out
    };
    let dst_links = near(x2);
    let mut dist = vec![f64::INFINITY; total];
    let mut prev = vec![usize::MAX; total];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapItem(0.0, src));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == dst {
            break;
        }
        let pu = pos(u);
        let mut nbrs: Vec<usize> = if u == src {
            near(x1)
        } else {
            let (i, j) = ((u % nl) as i64, (u / nl) as i64);
            STENCIL
                .iter()
                .filter_map(|&(di, dj)| {
                    let (a, b) = (i + di, j + dj);
                    (a >= 0 && b >= 0 && (a as usize) < nl && (b as usize) < nl)
                        .then(|| b as usize * nl + a as usize)
                })
                .filter(|&id| inside(&pos(id)))
                .collect()
        };
        if dst_links.contains(&u) {
            nbrs.push(dst);
        }
        for v in nbrs {
            if let Some(w) = weight(&pu, &pos(v)) {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                    heap.push(HeapItem(nd, v));
                }
            }
        }
    }
    if !dist[dst].is_finite() {
        return Err(FinslerError::NoConvergence("no lattice path between the points".into()));
    }
    let mut path = vec![pos(dst)];
    let mut cur = dst;
    while prev[cur] != usize::MAX {
        cur = prev[cur];
        path.push(pos(cur));
    }
    path.reverse();
    Ok(path)
}

// Resamples a polyline to `m` segments of equal Euclidean length.
fn resample<T: Real>(path: &[Vector<T>], m: usize) -> Vec<Vector<T>> {
    let mut cum = vec![T::zero()];
    for w in path.windows(2) {
        let l = scalar::norm2(&scalar::sub(&w[1], &w[0]));
        cum.push(*cum.last().expect("nonempty") + l);
    }
    let total = *cum.last().expect("nonempty");
    let mut out = Vec::with_capacity(m + 1);
    let mut seg = 0;
    for k in 0..=m {
        let s = total * T::from_usize_lossy(k) / T::from_usize_lossy(m);
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let w = if len > T::zero() { ((s - cum[seg]) / len).min(T::one()).max(T::zero()) } else { T::zero() };
        out.push(
            path[seg]
                .iter()
                .zip(&path[seg + 1])
                .map(|(&a, &b)| a + w * (b - a))
                .collect(),
        );
    }
    out[0] = path[0].clone();
    out[m] = path[path.len() - 1].clone();
    out
}

fn discrete_length<T: Real>(metric: &MetricDescriptor<T>, pts: &[Vector<T>]) -> Result<T> {
    let mut s = T::zero();
    for w in pts.windows(2) {
        let mid: Vector<T> = w[0].iter().zip(&w[1]).map(|(&a, &b)| (a + b) / T::lit(2.0)).collect();
        s += metric.at(&mid)?.f(&scalar::sub(&w[1], &w[0]));
    }
    Ok(s)
}

// Discrete energy M sum_k L(m_k, d_k) and its gradient in the interior points.
fn path_energy<T: Real>(metric: &MetricDescriptor<T>, pts: &[Vector<T>], grad: bool) -> Result<(T, Vec<Vector<T>>)> {
    let m = pts.len() - 1;
    let mf = T::from_usize_lossy(m);
    let n = metric.dimension;
    let mut e = T::zero();
    let mut g = vec![scalar::zeros::<T>(n); m + 1];
    let half = T::lit(0.5);
    for k in 0..m {
        let mid: Vector<T> = pts[k].iter().zip(&pts[k + 1]).map(|(&a, &b)| (a + b) * half).collect();
        let d = scalar::sub(&pts[k + 1], &pts[k]);
        if !grad {
            let f = metric.at(&mid)?.f(&d);
            e += mf * f * f;
            continue;
        }
        let j = lagrangian_jet(metric, &mid, &d)?;
        e += mf * j.l;
        for i in 0..n {
            g[k][i] += mf * (half * j.l_x[i] - j.l_y[i]);
            g[k + 1][i] += mf * (half * j.l_x[i] + j.l_y[i]);
        }
    }
    g[0] = scalar::zeros(n);
    g[m] = scalar::zeros(n);
    Ok((e, g))
}

// Polak-Ribiere+ conjugate gradient with backtracking on the path energy.
fn straighten<T: Real>(metric: &MetricDescriptor<T>, pts: &mut Vec<Vector<T>>) -> Result<()> {
    let dotv = |a: &[Vector<T>], b: &[Vector<T>]| -> T { a.iter().zip(b).map(|(u, v)| dot(u, v)).sum() };
    let (mut e, mut g) = path_energy(metric, pts, true)?;
    let mut dir: Vec<Vector<T>> = g.iter().map(|v| scalar::scale(-T::one(), v)).collect();
    let g_scale = dotv(&g, &g).sqrt().max(T::epsilon());
    let mut step = T::lit(1e-2) / g_scale;
    for _ in 0..2000 {
        let gg = dotv(&g, &g);
        if gg.sqrt() <= T::tol(1e-10) * (T::one() + e) {
            break;
        }
        let mut slope = dotv(&g, &dir);
        if slope >= T::zero() {
            dir = g.iter().map(|v| scalar::scale(-T::one(), v)).collect();
            slope = -gg;
        }
        let mut t = step * T::lit(4.0);
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<Vector<T>> = pts.iter().zip(&dir).map(|(p, d)| scalar::axpy(t, d, p)).collect();
            if let Ok((ec, _)) = path_energy(metric, &cand, false) {
                if ec <= e + T::lit(1e-4) * t * slope {
                    accepted = Some((cand, ec));
                    break;
                }
            }
            t *= T::lit(0.5);
        }
        let Some((cand, _)) = accepted else { break };
        step = t;
        let (ne, ng) = path_energy(metric, &cand, true)?;
        let beta = (dotv(&ng, &ng) - dotv(&ng, &g)) / gg;
        let beta = beta.max(T::zero());
        dir = ng.iter().zip(&dir).map(|(gv, dv)| scalar::axpy(beta, dv, &scalar::scale(-T::one(), gv))).collect();
        let converged = (e - ne).abs() <= T::epsilon() * T::lit(4.0) * e;
        *pts = cand;
        e = ne;
        g = ng;
        if converged {
            break;
        }
    }
    Ok(())
}

// Newton shooting on the initial velocity so that exp_{x1}(y) hits x2 at t = 1.
fn shoot_to<T: Real>(metric: &MetricDescriptor<T>, x1: &[T], x2: &[T], mut y: Vector<T>) -> Result<Vector<T>> {
    let n = metric.dimension;
    let step = T::one() / T::lit(64.0);
    let end = |y: &[T]| -> Result<Vector<T>> { Ok(shoot(metric, x1, y, T::one(), step)?.end().x.clone()) };
    let tol = T::tol(1e-10) * (T::one() + scalar::norm2(x2));
    for _ in 0..20 {
        let r = scalar::sub(&end(&y)?, x2);
        if scalar::norm2(&r) <= tol {
            return Ok(y);
        }
        let h = T::lit(1e-6) * (T::one() + scalar::norm2(&y));
        let mut jac = Matrix::zeros(n);
        for k in 0..n {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[k] += h;
            ym[k] -= h;
            let ep = end(&yp)?;
            let em = end(&ym)?;
            for i in 0..n {
                jac[(i, k)] = (ep[i] - em[i]) / (T::lit(2.0) * h);
            }
        }
        let dy = jac.solve(&r)?;
        let mut t = T::one();
        let r0 = scalar::norm2(&r);
        loop {
            let cand = scalar::axpy(-t, &dy, &y);
            if let Ok(e) = end(&cand) {
                if scalar::norm2(&scalar::sub(&e, x2)) < r0 {
                    y = cand;
                    break;
                }
            }
            t *= T::lit(0.5);
            if t < T::lit(1e-6) {
                return Err(FinslerError::NoConvergence("shooting stalled".into()));
            }
        }
    }
    Err(FinslerError::NoConvergence("shooting did not converge".into()))
}

/// Per-cell gradient vectors `nabla u = L^{-1}(du)`; zero where `du = 0`.
pub fn gradient_field<T: Real>(space: &MeasureSpace<T>, mesh: &Mesh<T>, u: &DiscreteFunction<T>) -> Result<Vec<Vector<T>>> {
    mesh.check_function(u)?;
    (0..mesh.cells.len())
        .map(|c| {
            let du = mesh.cell_differential(c, &u.values);
            if scalar::max_abs(&du) == T::zero() {
                return Ok(scalar::zeros(2));
            }
            space.metric.at(&mesh.centroid(c))?.legendre_inverse(&du)
        })
        .collect()
}

/// `int dphi(V) dm + int phi div_m V dm` for a cellwise-constant field `V`.
/// The divergence includes the weight term `V(Phi)` inside cells and the
/// normal jumps of `V` across interior edges.
pub fn weak_divergence_residual<T: Real>(
    space: &MeasureSpace<T>,
    mesh: &Mesh<T>,
    v: &[Vector<T>],
    phi: &DiscreteFunction<T>,
) -> Result<T> {
    Ok(weak_divergence_parts(space, mesh, v, phi)?.iter().copied().sum())
}

/// The three terms of [`weak_divergence_residual`]: `int dphi(V) dm`,
/// `int phi V(Phi) dm` and the edge-jump term.
pub fn weak_divergence_parts<T: Real>(
    space: &MeasureSpace<T>,
    mesh: &Mesh<T>,
    v: &[Vector<T>],
    phi: &DiscreteFunction<T>,
) -> Result<[T; 3]> {
    mesh.check_function(phi)?;
    if v.len() != mesh.cells.len() {
        return Err(FinslerError::DimensionMismatch { expected: mesh.cells.len(), found: v.len() });
    }
    let mut flux = T::zero();
    let mut weight = T::zero();
    for c in 0..mesh.cells.len() {
        if scalar::max_abs(&v[c]) == T::zero() {
            continue;
        }
        let dphi = mesh.cell_differential(c, &phi.values);
        let dphi_v = dot(&dphi, &v[c]);
        for (p, w, bary) in mesh.cell_quadrature(c) {
            let dens = space.density(&p)?;
            let phi_p: T = (0..3).map(|i| bary[i] * phi.values[mesh.cells[c][i]]).sum();
            let grad_phi = space.log_density.grad_phi(&space.metric, &p)?;
            flux += w * dphi_v * dens;
            weight += w * phi_p * dot(&v[c], &grad_phi) * dens;
        }
    }
    let mut jump = T::zero();
    for e in mesh.interior_edges() {
        let [a, b] = e.nodes;
        let (c1, c2) = (e.cells[0], e.cells[1]);
        let jv = scalar::sub(&v[c2], &v[c1]);
        if scalar::max_abs(&jv) == T::zero() {
            continue;
        }
        // normal pointing out of c1, scaled by the edge length
        let pa = mesh.nodes[a];
        let pb = mesh.nodes[b];
        let mut nrm = [pb[1] - pa[1], pa[0] - pb[0]];
        let cen = mesh.centroid(c1);
        if (cen[0] - pa[0]) * nrm[0] + (cen[1] - pa[1]) * nrm[1] > T::zero() {
            nrm = [-nrm[0], -nrm[1]];
        }
        let flux_n = jv[0] * nrm[0] + jv[1] * nrm[1];
        // Simpson rule along the edge
        let mid = [(pa[0] + pb[0]) / T::lit(2.0), (pa[1] + pb[1]) / T::lit(2.0)];
        let (fa, fb) = (phi.values[a], phi.values[b]);
        let fm = (fa + fb) / T::lit(2.0);
        let s = (fa * space.density(&pa)? + T::lit(4.0) * fm * space.density(&mid)? + fb * space.density(&pb)?) / T::lit(6.0);
        jump += s * flux_n;
    }
    Ok([flux, weight, jump])
}
