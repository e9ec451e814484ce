//! Poincaré and Sobolev quotients.

use super::{Ball, Check, ExperimentConfig};
use crate::error::{FinslerError, Result};
use crate::linalg::{BandedCholesky, CsrMatrix};
use crate::measure::MeasureSpace;
use crate::report::InequalityReport;
use crate::scalar::Real;

const EIGEN_MAX_ITERS: usize = 400;
const ASCENT_MAX_ITERS: usize = 100;

fn dotv<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// `int_{B_sR} |u - mean|^2 dm / int_{B_sR} F*^2(du) dm`, or `None` when
/// `u` is constant on the sub-ball.
pub fn poincare_value<T: Real>(ball: &Ball<T>, u: &[T], s: T) -> Option<T> {
    let mean = ball.mean(u, s);
    let num = ball.integral(u, s, |v| (v - mean) * (v - mean));
    let den = ball.dual_energy(u, s);
    let scale = u.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let r = ball.radius();
    if !(den > T::lit(1e-20) * scale * scale * ball.measure(s) / (r * r)) {
        return None;
    }
    Some(num / den)
}

/// `(int |u - mean|^q)^(2/q) / [R^2 m(B)^(-2/nu) int F*^2(du)]` with
/// `q = 2 nu / (nu - 2)`, over the whole ball.
pub fn sobolev_value<T: Real>(ball: &Ball<T>, u: &[T]) -> Option<T> {
    let (nu, r) = (ball.config.nu, ball.radius());
    let q = T::lit(2.0) * nu / (nu - T::lit(2.0));
    let mean = ball.mean(u, T::one());
    let num = ball.integral(u, T::one(), |v| (v - mean).abs().powf(q)).powf(T::lit(2.0) / q);
    let energy = ball.dual_energy(u, T::one());
    let m = ball.measure(T::one());
    let scale = u.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    if !(energy > T::lit(1e-20) * scale * scale * m / (r * r)) {
        return None;
    }
    Some(num / (r * r * m.powf(-T::lit(2.0) / nu) * energy))
}

/// `(int |u|^q)^(2/q) / [m(B)^(-2/nu) R^2 int (F*^2(du) + R^-2 u^2)]`, or
/// `None` for `u = 0`.
pub fn sobolev_variant_value<T: Real>(ball: &Ball<T>, u: &[T]) -> Option<T> {
    let (nu, r) = (ball.config.nu, ball.radius());
    let q = T::lit(2.0) * nu / (nu - T::lit(2.0));
    let num = ball.integral(u, T::one(), |v| v.abs().powf(q)).powf(T::lit(2.0) / q);
    let energy = ball.dual_energy(u, T::one()) + ball.integral(u, T::one(), |v| v * v) / (r * r);
    if !(energy > T::zero()) {
        return None;
    }
    let m = ball.measure(T::one());
    Some(num / (m.powf(-T::lit(2.0) / nu) * r * r * energy))
}

fn mass_matrix<T: Real>(ball: &Ball<T>) -> CsrMatrix<T> {
    let mesh = ball.mesh();
    let mut trip = Vec::with_capacity(mesh.cells.len() * 9);
    for (c, q) in ball.quad.iter().enumerate() {
        let cell = mesh.cells[c];
        for i in 0..3 {
            for j in 0..3 {
                let v: T = q.iter().map(|(w, l)| *w * l[i] * l[j]).sum();
                trip.push((cell[i], cell[j], v));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.node_count(), mesh.node_count(), trip)
}

struct Neumann<T: Real> {
    mass: CsrMatrix<T>,
    ones_mass: Vec<T>,
    total: T,
    chol: BandedCholesky<T>,
}

impl<T: Real> Neumann<T> {
    fn new(ball: &Ball<T>) -> Result<Self> {
        let mass = mass_matrix(ball);
        let stiff = ball.problem.stiffness(None);
        let r = ball.radius();
        let shifted = stiff.add_scaled(T::lit(1e-2) / (r * r), &mass);
        let chol = BandedCholesky::factor(&shifted)?;
        let ones = vec![T::one(); mass.rows];
        let ones_mass = mass.mul_vec(&ones);
        let total = ones_mass.iter().copied().sum();
        Ok(Self { mass, ones_mass, total, chol })
    }

    fn deflate(&self, v: &mut [T]) {
        let c = dotv(&self.ones_mass, v) / self.total;
        v.iter_mut().for_each(|x| *x -= c);
    }

    fn normalise(&self, v: &mut [T]) {
        let n = dotv(v, &self.mass.mul_vec(v)).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
    }

    /// Smallest nonzero eigenpair of `K v = lambda M v` by shifted inverse
    /// iteration with the constants deflated. A slowly converging iterate is
    /// still an admissible trial function, so the last one is returned.
    fn first_mode(&self, ball: &Ball<T>) -> Result<(T, Vec<T>)> {
        let stiff = ball.problem.stiffness(None);
        let mut v: Vec<T> = (0..self.mass.rows).map(|i| ball.chart(i)[0] + T::lit(0.1) * ball.chart(i)[1]).collect();
        self.deflate(&mut v);
        self.normalise(&mut v);
        let mut lambda = T::infinity();
        for _ in 0..EIGEN_MAX_ITERS {
            let mut w = self.chol.solve(&self.mass.mul_vec(&v));
            self.deflate(&mut w);
            self.normalise(&mut w);
            let next = dotv(&w, &stiff.mul_vec(&w));
            v = w;
            let done = (next - lambda).abs() <= T::lit(1e-12) * next;
            lambda = next;
            if done {
                break;
            }
        }
        if !lambda.is_finite() {
            return Err(FinslerError::NoConvergence("Neumann eigen-iteration".into()));
        }
        Ok((lambda, v))
    }

    /// `(Q, grad Q)` for `Q = N(u) / int F*^2(du)`.
    fn quotient(&self, ball: &Ball<T>, u: &[T]) -> (T, Vec<T>) {
        let mu = self.mass.mul_vec(u);
        let mean = dotv(&self.ones_mass, u) / self.total;
        let num = dotv(u, &mu) - mean * mean * self.total;
        let (e, g) = ball.problem.energy_and_gradient(u);
        let den = T::lit(2.0) * e;
        let q = num / den;
        let two = T::lit(2.0);
        let grad = (0..u.len())
            .map(|i| (two * (mu[i] - mean * self.ones_mass[i]) - q * two * g[i]) / den)
            .collect();
        (q, grad)
    }

    /// Preconditioned gradient ascent of the true quotient.
    fn ascend(&self, ball: &Ball<T>, start: &[T]) -> T {
        let mut u = start.to_vec();
        let (mut q, mut grad) = self.quotient(ball, &u);
        let mut step = T::one();
        for _ in 0..ASCENT_MAX_ITERS {
            let mut d = self.chol.solve(&grad);
            self.deflate(&mut d);
            let mut accepted = None;
            let mut s = step * T::lit(2.0);
            for _ in 0..40 {
                let trial: Vec<T> = u.iter().zip(&d).map(|(a, b)| *a + s * *b).collect();
                let qt = self.quotient(ball, &trial).0;
                if qt.is_finite() && qt > q {
                    accepted = Some((trial, qt));
                    break;
                }
                s /= T::lit(2.0);
            }
            let Some((mut trial, qt)) = accepted else { break };
            step = s;
            let gain = qt - q;
            self.normalise(&mut trial);
            u = trial;
            q = qt;
            grad = self.quotient(ball, &u).1;
            if gain <= T::lit(1e-10) * q {
                break;
            }
        }
        q
    }
}

struct Best<T> {
    value: T,
    label: String,
}

fn family_best<T: Real, F: Fn(&[T]) -> Option<T>>(ball: &Ball<T>, eval: F) -> Result<Best<T>> {
    let mut best = Best { value: T::zero(), label: String::new() };
    for f in ball.family()? {
        for (sign, tag) in [(T::one(), ""), (-T::one(), "-")] {
            let v: Vec<T> = f.values.values.iter().map(|x| sign * *x).collect();
            if let Some(q) = eval(&v) {
                if q > best.value {
                    best = Best { value: q, label: format!("{tag}{}", f.label) };
                }
            }
        }
    }
    Ok(best)
}

/// Largest Poincaré quotient over the Neumann mode (refined by ascent under
/// the true energy, both signs) and the trial family. The measured constant
/// is the quotient divided by `R^2`.
pub fn poincare_quotient<T: Real>(ball: &Ball<T>) -> Result<Check> {
    let neumann = Neumann::new(ball)?;
    let (lambda, mode) = neumann.first_mode(ball)?;
    let neg: Vec<T> = mode.iter().map(|x| -*x).collect();
    let ascent = neumann.ascend(ball, &mode).max(neumann.ascend(ball, &neg));
    let eigen = T::one() / lambda;
    let fam = family_best(ball, |u| poincare_value(ball, u, T::one()))?;
    let (best, source) = if fam.value > ascent {
        (fam.value, fam.label)
    } else if ascent > eigen {
        (ascent, "ascent".to_string())
    } else {
        (eigen, "neumann_mode".to_string())
    };
    let r = ball.radius();
    let report = ball
        .stamp(InequalityReport::measured("poincare", &ball.space().name, best, best / (r * r)))
        .with_num("R", r)
        .with_num("eigen_quotient", eigen)
        .with_num("ascent_quotient", ascent)
        .with_num("family_quotient", fam.value)
        .with("maximiser", source)
        .with("shape", "c1 exp(c2 sqrt|K| R) R^2");
    let ones = vec![T::one(); ball.mesh().node_count()];
    let excluded = poincare_value(ball, &ones, T::one()).is_none();
    let shape = InequalityReport::shape("poincare_constant_excluded", &ball.space().name, 0.0, 0.0, excluded);
    Ok(Check::new(report).with_shape(shape))
}

/// Measured Poincaré constants at several radii about the same point; the
/// shape check asks each to match the one at the largest radius within
/// `tol` (exact `R^2` scaling on flat space).
pub fn poincare_scaling<T: Real>(space: &MeasureSpace<T>, config: &ExperimentConfig<T>, radii: &[T], tol: T) -> Result<Check> {
    let mut constants = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut cfg = config.clone();
        cfg.radius = r;
        let ball = Ball::new(space.clone(), cfg)?;
        constants.push(poincare_quotient(&ball)?.report.rhs);
    }
    let (i_ref, _) = radii
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &r)| if r > bv { (i, r) } else { (bi, bv) });
    let reference = constants[i_ref];
    let worst = constants.iter().map(|c| (c / reference - 1.0).abs()).fold(0.0, f64::max);
    let ok = worst <= tol.to_f64_lossy();
    let list: Vec<f64> = radii.iter().map(|r| r.to_f64_lossy()).collect();
    let report = InequalityReport::measured("poincare_scaling", &space.name, T::lit(worst), T::lit(reference))
        .with("radii", list.clone())
        .with("constants", constants.clone())
        .with("config", config.snapshot());
    let shape = InequalityReport::shape("poincare_r2_scaling", &space.name, worst, tol.to_f64_lossy(), ok)
        .with("radii", list)
        .with("constants", constants);
    Ok(Check::new(report).with_shape(shape))
}

/// Sobolev constants over the trial family (both signs) together with the
/// variant that carries the `R^-2 u^2` term, where constants are admissible.
pub fn sobolev_quotient<T: Real>(ball: &Ball<T>) -> Result<Check> {
    let (nu, r) = (ball.config.nu, ball.radius());
    let q = T::lit(2.0) * nu / (nu - T::lit(2.0));
    let fam = family_best(ball, |u| sobolev_value(ball, u))?;
    let ones = vec![T::one(); ball.mesh().node_count()];
    let constant = sobolev_variant_value(ball, &ones).unwrap_or(T::nan());
    let var = family_best(ball, |u| sobolev_variant_value(ball, u))?;
    let variant = var.value.max(constant);
    let shape = T::one() + ball.config.abs_curvature().sqrt() * r;
    let name = &ball.space().name;
    let report = ball
        .stamp(InequalityReport::measured("sobolev", name, fam.value, fam.value))
        .with_num("exponent", q)
        .with_num("nu", nu)
        .with_num("R", r)
        .with_num("log_constant_over_shape", fam.value.ln() / shape)
        .with("maximiser", fam.label);
    let variant_report = ball
        .stamp(InequalityReport::measured("sobolev_variant", name, variant, variant))
        .with_num("exponent", q)
        .with_num("constant_function_quotient", constant)
        .with("maximiser", if var.value >= constant { var.label } else { "constant".into() });
    let dev = (constant - T::one()).abs().to_f64_lossy();
    let eq = InequalityReport::shape("sobolev_variant_constant", name, dev, 1e-10, dev <= 1e-10);
    Ok(Check::new(report).with_shape(variant_report).with_shape(eq))
}
