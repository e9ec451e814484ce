//! Randomised audits of the pointwise norm algebra: Legendre round trips,
//! dual-norm consistency, homogeneity, the two-sided tensor bounds and the
//! sampled uniformity constants.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::minkowski::{uniformity_constants, MetricDescriptor, Minkowski, SampleRegion, UniformityConstants};
use crate::report::InequalityReport;
use crate::scalar::{Real, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOptions<T> {
    pub samples: usize,
    pub seed: u64,
    /// Base points are drawn from the disk of this radius about the centre.
    pub region_radius: T,
    /// Direction samples per sphere when estimating `kappa`, `kappa_star`.
    pub resolution: usize,
    /// Relative tolerance of every pass/fail report.
    pub tol: T,
    /// Test directions per sample in the sandwich checks.
    pub directions: usize,
}

impl<T: Real> Default for AuditOptions<T> {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: crate::harness::DEFAULT_SEED,
            region_radius: T::lit(0.5),
            resolution: 90,
            tol: T::lit(1e-8),
            directions: 8,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Tally<T> {
    round_trip: T,
    dual: T,
    homogeneity: T,
    dual_low: T,
    dual_high: T,
    primal_low: T,
    primal_high: T,
}

impl<T: Real> Tally<T> {
    fn new() -> Self {
        Self {
            round_trip: T::zero(),
            dual: T::zero(),
            homogeneity: T::zero(),
            dual_low: T::infinity(),
            dual_high: T::zero(),
            primal_low: T::infinity(),
            primal_high: T::zero(),
        }
    }

    fn rel(a: &[T], b: &[T]) -> T {
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        d / (b[0] * b[0] + b[1] * b[1]).sqrt()
    }

    /// Observes one tangent vector `y`; `consts` bound the tensors relative
    /// to `F^2` and `F*^2`, and each sandwich is tracked as a ratio to them.
    fn observe(&mut self, m: &Minkowski<T>, consts: &UniformityConstants<T>, y: &[T], lambda: T, etas: &[[T; 2]]) -> Result<()> {
        let f = m.f(y);
        let xi = m.legendre(y);
        let y2 = m.legendre_inverse(&xi)?;
        let xi2 = m.legendre(&y2);
        self.round_trip = self.round_trip.max(Self::rel(&y2, y)).max(Self::rel(&xi2, &xi));
        self.dual = self.dual.max((m.dual_norm(&xi)? - f).abs() / f);
        let ly: Vector<T> = y.iter().map(|&v| lambda * v).collect();
        self.homogeneity = self.homogeneity.max((m.f(&ly) - lambda * f).abs() / (lambda * f));
        let gs = m.dual_tensor(&xi)?;
        let g = m.fundamental_tensor(y)?;
        let (kt, kts) = consts.dual();
        for eta in etas {
            let fs = m.dual_norm(eta)?;
            let q = gs.quad(eta) / (fs * fs);
            self.dual_high = self.dual_high.max(q / kt);
            self.dual_low = self.dual_low.min(q / kts);
            let fw = m.f(eta);
            let p = g.quad(eta) / (fw * fw);
            self.primal_high = self.primal_high.max(p / consts.kappa);
            self.primal_low = self.primal_low.min(p / consts.kappa_star);
        }
        Ok(())
    }

    fn merge(mut self, o: Self) -> Self {
        self.round_trip = self.round_trip.max(o.round_trip);
        self.dual = self.dual.max(o.dual);
        self.homogeneity = self.homogeneity.max(o.homogeneity);
        self.dual_low = self.dual_low.min(o.dual_low);
        self.dual_high = self.dual_high.max(o.dual_high);
        self.primal_low = self.primal_low.min(o.primal_low);
        self.primal_high = self.primal_high.max(o.primal_high);
        self
    }

    fn reports(&self, space: &str, tol: T) -> Vec<InequalityReport> {
        let one = T::one();
        let sandwich = |id: &str, low: T, high: T| {
            let ok = high <= one + tol && low >= one - tol;
            InequalityReport::shape(id, space, high.to_f64_lossy(), 1.0, ok).with_num("low_ratio", low).with_num("tol", tol)
        };
        vec![
            InequalityReport::check_abs("legendre_round_trip", space, self.round_trip, T::zero(), tol),
            InequalityReport::check_abs("dual_norm_consistency", space, self.dual, T::zero(), tol),
            InequalityReport::check_abs("homogeneity", space, self.homogeneity, T::zero(), tol),
            sandwich("dual_tensor_sandwich", self.dual_low, self.dual_high),
            sandwich("fundamental_tensor_sandwich", self.primal_low, self.primal_high),
        ]
    }
}

fn draw<T: Real>(rng: &mut ChaCha8Rng, count: usize) -> (Vector<T>, T, Vec<[T; 2]>) {
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let len = rng.gen_range((0.05f64).ln()..(5.0f64).ln()).exp();
    let y = smallvec::smallvec![T::lit(len * angle.cos()), T::lit(len * angle.sin())];
    let lambda = T::lit(rng.gen_range(1e-3..10.0));
    let etas = (0..count)
        .map(|_| {
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            [T::lit(t.cos()), T::lit(t.sin())]
        })
        .collect();
    (y, lambda, etas)
}

fn uniformity_report<T: Real>(space: &str, c: &UniformityConstants<T>, tol: T) -> InequalityReport {
    let cap = c.kappa.sqrt().min((T::one() / c.kappa_star).sqrt());
    let (kt, kts) = c.dual();
    InequalityReport::shape("uniformity_constants", space, c.lambda_rev.to_f64_lossy(), cap.to_f64_lossy(), c.satisfies_invariants(tol))
        .with_num("kappa", c.kappa)
        .with_num("kappa_star", c.kappa_star)
        .with_num("lambda_rev", c.lambda_rev)
        .with_num("kappa_tilde", kt)
        .with_num("kappa_tilde_star", kts)
}

/// Audit of one metric at base points drawn around `center` (only the
/// centre for constant-coefficient metrics).
pub fn metric_audit<T: Real>(space: &str, metric: &MetricDescriptor<T>, center: &[T], opts: &AuditOptions<T>) -> Result<Vec<InequalityReport>> {
    let region = SampleRegion {
        resolution: opts.resolution,
        ..SampleRegion::around(center, opts.region_radius)
    };
    let consts = uniformity_constants(metric, &region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let constant = metric.is_constant_coefficient();
    let fixed = metric.at(center)?;
    let mut tally = Tally::new();
    for _ in 0..opts.samples {
        let (y, lambda, etas) = draw::<T>(&mut rng, opts.directions);
        let x: Vector<T> = if constant {
            center.iter().copied().collect()
        } else {
            let r = opts.region_radius.to_f64_lossy() * rng.gen::<f64>().sqrt();
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            smallvec::smallvec![center[0] + T::lit(r * t.cos()), center[1] + T::lit(r * t.sin())]
        };
        let m = if constant { fixed.clone() } else { metric.at(&x)? };
        tally.observe(&m, &consts, &y, lambda, &etas)?;
    }
    let mut out = tally.reports(space, opts.tol);
    out.push(uniformity_report(space, &consts, opts.tol));
    let base: Vec<f64> = center.iter().map(|v| v.to_f64_lossy()).collect();
    Ok(out
        .into_iter()
        .map(|r| r.with("samples", opts.samples as u64).with("seed", opts.seed).with("base_point", base.clone()))
        .collect())
}

/// Audit over random constant Randers norms `|y| + <b, y>` with `|b| <= b_max`,
/// one `(b, y)` pair per sample, each against its own sampled constants.
pub fn randers_duality_audit<T: Real>(b_max: T, opts: &AuditOptions<T>) -> Result<Vec<InequalityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut tally = Tally::new();
    let mut lambda_worst = T::one();
    let mut invariants = true;
    for _ in 0..opts.samples {
        let r = b_max.to_f64_lossy() * rng.gen::<f64>().sqrt();
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let metric = MetricDescriptor::randers_constant(&[T::lit(r * t.cos()), T::lit(r * t.sin())])?;
        let region = SampleRegion {
            resolution: opts.resolution,
            ..SampleRegion::around(&[T::zero(), T::zero()], T::one())
        };
        let consts = uniformity_constants(&metric, &region)?;
        invariants &= consts.satisfies_invariants(opts.tol);
        lambda_worst = lambda_worst.max(consts.lambda_rev);
        let (y, lambda, etas) = draw::<T>(&mut rng, opts.directions);
        let mut one = Tally::new();
        one.observe(&metric.at(&[T::zero(), T::zero()])?, &consts, &y, lambda, &etas)?;
        tally = tally.merge(one);
    }
    let space = "randers-random";
    let mut out = tally.reports(space, opts.tol);
    // Lambda = (1 + |b|) / (1 - |b|) for these norms
    let cap = (T::one() + b_max) / (T::one() - b_max);
    let ok = invariants && lambda_worst <= cap * (T::one() + opts.tol);
    out.push(InequalityReport::shape("uniformity_constants", space, lambda_worst.to_f64_lossy(), cap.to_f64_lossy(), ok));
    Ok(out
        .into_iter()
        .map(|r| r.with("samples", opts.samples as u64).with("seed", opts.seed).with_num("b_max", b_max))
        .collect())
}
