use finsler_core::error::FinslerError;
use finsler_core::harness::{
    bochner_residual, global_harnack_probe, gradient_estimate_check, harnack_check, liouville_probe, mean_value_check,
    moser_chain_check, poincare_quotient, poincare_scaling, poincare_value, sobolev_dimension, sobolev_quotient,
    sobolev_value, sobolev_variant_value, superharmonic_inf_check, weak_l1_log_check, Ball, ExperimentConfig, Polynomial,
};
use finsler_core::mesh::DiscreteFunction;
use finsler_core::spaces;
use proptest::prelude::*;

fn flat_ball(r: f64) -> Ball<f64> {
    Ball::around(spaces::flat(), [0.0, 0.0], r).unwrap()
}

fn flat_ball_res(rings: usize, sectors: usize) -> Ball<f64> {
    let space = spaces::flat();
    let mut cfg = ExperimentConfig::for_space(&space, [0.0, 0.0], 1.0);
    cfg.rings = rings;
    cfg.sectors = sectors;
    Ball::new(space, cfg).unwrap()
}

fn nodal<F: Fn(&[f64; 2]) -> f64>(ball: &Ball<f64>, f: F) -> DiscreteFunction<f64> {
    DiscreteFunction::from_fn(ball.mesh(), f)
}

fn bessel_j(n: i32, x: f64) -> f64 {
    let mut s = 0.0;
    let mut term = (x / 2.0).powi(n) / (1..=n).map(f64::from).product::<f64>();
    for m in 0..60 {
        s += term;
        let m = f64::from(m);
        term *= -(x / 2.0).powi(2) / ((m + 1.0) * (m + 1.0 + f64::from(n)));
    }
    s
}

/// First zero of `J1'` by bisection: the first nonzero Neumann eigenvalue of
/// the unit disk is its square.
fn first_neumann_eigenvalue() -> f64 {
    let d = |x: f64| bessel_j(0, x) - bessel_j(1, x) / x;
    let (mut a, mut b) = (1.0, 3.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if d(a) * d(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let j = 0.5 * (a + b);
    j * j
}

#[test]
fn poincare_on_the_flat_unit_disk_matches_the_neumann_eigenvalue() {
    let lambda = first_neumann_eigenvalue();
    assert!((lambda.sqrt() - 1.841_183_781).abs() < 1e-8);
    let ball = flat_ball(1.0);
    let c = poincare_quotient(&ball).unwrap();
    let want = 1.0 / lambda;
    assert!((c.report.lhs - want).abs() <= 0.05 * want, "{} vs {want}", c.report.lhs);
    assert!(c.report.pass.is_none());
    assert!(c.shape("poincare_constant_excluded").unwrap().passed());
    let ones = vec![3.0; ball.mesh().node_count()];
    assert!(poincare_value(&ball, &ones, 1.0).is_none());
}

#[test]
fn poincare_constant_scales_with_r_squared_on_flat_space() {
    let space = spaces::flat();
    let cfg = ExperimentConfig::for_space(&space, [0.0, 0.0], 1.0);
    let c = poincare_scaling(&space, &cfg, &[0.25, 0.5, 1.0], 0.05).unwrap();
    assert!(c.passed(), "{:?}", c.shapes);
    let constants: Vec<f64> = serde_json::from_value(c.report.params["constants"].clone()).unwrap();
    assert!((constants[1] - constants[2]).abs() <= 0.05 * constants[2]);
}

#[test]
fn randers_poincare_quotient_exceeds_its_riemannian_part() {
    let ball = Ball::around(spaces::randers(), [0.0, 0.0], 1.0).unwrap();
    let c = poincare_quotient(&ball).unwrap();
    let eig: f64 = c.report.params["eigen_quotient"].as_f64().unwrap();
    let asc: f64 = c.report.params["ascent_quotient"].as_f64().unwrap();
    assert!(asc >= eig * (1.0 - 1e-9));
    assert!(c.report.lhs >= asc);
}

#[test]
fn sobolev_exponent_examples() {
    let nu: f64 = sobolev_dimension(2, 1.0);
    assert_eq!(nu, 22.0);
    assert!((2.0 * nu / (nu - 2.0) - 2.2).abs() < 1e-12);
    let flat: f64 = sobolev_dimension(2, 0.01);
    assert!((flat - 6.16).abs() < 1e-12);
}

#[test]
fn sobolev_variant_is_an_equality_for_constants() {
    let ball = flat_ball(1.0);
    for c in [1.0, 2.5] {
        let u = vec![c; ball.mesh().node_count()];
        assert!((sobolev_variant_value(&ball, &u).unwrap() - 1.0).abs() < 1e-10);
        assert!(sobolev_value(&ball, &u).is_none());
    }
    let c = sobolev_quotient(&ball).unwrap();
    assert!(c.passed());
    assert!(c.report.rhs > 0.0 && c.report.rhs.is_finite());
    let variant = &c.shapes[0];
    assert!(variant.rhs >= 1.0 - 1e-10);
}

#[test]
fn sobolev_hat_quotient_is_stable_under_refinement() {
    let hat = |b: &Ball<f64>| -> Vec<f64> {
        (0..b.mesh().node_count())
            .map(|i| {
                let z = b.chart(i);
                1.0 - (z[0] * z[0] + z[1] * z[1]).sqrt()
            })
            .collect()
    };
    let coarse = flat_ball_res(16, 32);
    let fine = flat_ball_res(32, 64);
    let a = sobolev_value(&coarse, &hat(&coarse)).unwrap();
    let b = sobolev_value(&fine, &hat(&fine)).unwrap();
    assert!((a - b).abs() <= 0.05 * b, "{a} vs {b}");
}

#[test]
fn mean_value_examples() {
    let ball = flat_ball(1.0);
    let one = DiscreteFunction::constant(ball.mesh(), 1.0);
    let c = mean_value_check(&ball, &one, None, 2.0, 0.5).unwrap();
    assert!((c.report.lhs - 1.0).abs() < 1e-14 && (c.report.rhs - 1.0).abs() < 1e-12);

    let u = nodal(&ball, |x| x[0] + 2.0);
    let c = mean_value_check(&ball, &u, None, 2.0, 0.5).unwrap();
    assert!((c.report.lhs - 6.25).abs() < 1e-12);
    // average of (x1 + 2)^2 over the unit disk: (pi/4 + 4 pi) / pi
    let avg = c.report.params["average"].as_f64().unwrap();
    assert!((avg - 4.25).abs() < 1e-2, "{avg}");
    assert!(c.shape("mean_value_monotone").unwrap().passed());
    let shape = c.report.params["shape"].as_f64().unwrap();
    assert!((shape - 2f64.powf(6.16)).abs() < 1e-9 * shape);

    let bowl = nodal(&ball, |x| 4.0 - x[0] * x[0] - x[1] * x[1]);
    assert!(matches!(mean_value_check(&ball, &bowl, None, 2.0, 0.5), Err(FinslerError::PreconditionFailed(_))));
    assert!(matches!(mean_value_check(&ball, &u, None, 2.5, 0.5), Err(FinslerError::DomainError(_))));
}

#[test]
fn randers_mean_value_constant_is_close_to_the_flat_one() {
    let g = |_: [f64; 2], x: [f64; 2]| 1.0 + 0.5 * (std::f64::consts::PI * x[0]).sin();
    let flat = flat_ball(1.0);
    let randers = Ball::around(spaces::randers(), [0.0, 0.0], 1.0).unwrap();
    let cf = mean_value_check(&flat, &flat.solve(g).unwrap(), None, 2.0, 0.5).unwrap();
    let cr = mean_value_check(&randers, &randers.solve(g).unwrap(), None, 2.0, 0.5).unwrap();
    assert!(cr.passed() && cf.passed());
    let ratio = cr.report.rhs / cf.report.rhs;
    assert!((0.5..=2.0).contains(&ratio), "{} vs {}", cr.report.rhs, cf.report.rhs);
}

#[test]
fn moser_chain_examples() {
    let ball = flat_ball(1.0);
    let one = DiscreteFunction::constant(ball.mesh(), 1.0);
    let c = moser_chain_check(&ball, &one, 1.0, 0.5, 0.75).unwrap();
    assert!(c.passed(), "{c:?}");
    // u = 1 reduces the step to volumes
    let t = ball.config.moser_exponent();
    assert!((c.report.lhs - ball.measure(0.5)).abs() < 1e-12);
    assert!(c.report.rhs >= ball.measure(0.75).powf(t));

    let u = nodal(&ball, |x| x[0] + 2.0);
    let c = moser_chain_check(&ball, &u, 1.0, 0.5, 0.75).unwrap();
    assert!(c.passed(), "{c:?}");
    assert_eq!(c.shapes.len(), 5);
    let bowl = nodal(&ball, |x| 4.0 - x[0] * x[0] - x[1] * x[1]);
    assert!(matches!(moser_chain_check(&ball, &bowl, 1.0, 0.5, 0.75), Err(FinslerError::PreconditionFailed(_))));
}

#[test]
fn moser_chain_on_solver_outputs() {
    for space in [spaces::hyperbolic(), spaces::randers()] {
        let ball = Ball::around(space, [0.0, 0.0], 1.0).unwrap();
        let u = ball.solve(|z: [f64; 2], _| 1.0 + 0.5 * (3.0 * z[1].atan2(z[0])).cos()).unwrap();
        let c = moser_chain_check(&ball, &u, 1.0, 0.5, 0.75).unwrap();
        assert!(c.passed(), "{} {c:?}", ball.space().name);
        let bound = c.shape("moser_sup_bound").unwrap();
        assert!(bound.lhs <= bound.rhs);
    }
}

#[test]
fn harnack_examples() {
    let ball = flat_ball(1.0);
    let u = nodal(&ball, |x| x[0] + 2.0);
    let c = harnack_check(&ball, &u, 0.5).unwrap();
    assert!((c.report.lhs - 5.0 / 3.0).abs() < 1e-6);
    assert!(c.passed());
    assert!(c.shape("harnack_scaling").unwrap().lhs <= 1e-10);
    let one = DiscreteFunction::constant(ball.mesh(), 4.0);
    assert_eq!(harnack_check(&ball, &one, 0.5).unwrap().report.lhs, 1.0);
    let z = nodal(&ball, |x| x[0] + 1.0);
    assert!(matches!(harnack_check(&ball, &z, 0.5), Err(FinslerError::NonPositive(_))));

    let hyp = Ball::around(spaces::hyperbolic(), [0.0, 0.0], 1.0).unwrap();
    let u = hyp.solve(|_, x| 2.0 + x[0]).unwrap();
    let c = harnack_check(&hyp, &u, 0.5).unwrap();
    assert!(c.passed(), "{c:?}");
    assert!(c.report.lhs > 1.0);
}

#[test]
fn superharmonic_examples() {
    let ball = flat_ball(1.0);
    let one = DiscreteFunction::constant(ball.mesh(), 1.0);
    let c = superharmonic_inf_check(&ball, &one, 0.5).unwrap();
    assert!((c.report.rhs - 1.0).abs() < 1e-12);

    let bowl = nodal(&ball, |x| 4.0 - x[0] * x[0] - x[1] * x[1]);
    let c = superharmonic_inf_check(&ball, &bowl, 0.5).unwrap();
    assert!((c.report.lhs - 1.0 / 3.75).abs() < 1e-12);
    assert!(c.passed());
    // int_{B_1} 1/(4 - r^2) = pi ln(4/3)
    let avg = c.report.params["average_inverse"].as_f64().unwrap();
    assert!((avg - (4.0f64 / 3.0).ln()).abs() < 1e-3, "{avg}");

    let u = ball.solve(|z, _| 2.0 + z[0] * z[1]).unwrap();
    let s = superharmonic_inf_check(&ball, &u, 0.5).unwrap();
    let h = harnack_check(&ball, &u, 0.5).unwrap();
    let inf = h.report.params["inf"].as_f64().unwrap();
    assert!((1.0 / s.report.lhs - inf).abs() < 1e-14);
    let sub = nodal(&ball, |x| 1.0 + x[0] * x[0] + x[1] * x[1]);
    assert!(matches!(superharmonic_inf_check(&ball, &sub, 0.5), Err(FinslerError::PreconditionFailed(_))));
}

#[test]
fn weak_l1_examples() {
    let ball = flat_ball(1.0);
    let c = weak_l1_log_check(&ball, &DiscreteFunction::constant(ball.mesh(), 2.0), 0.5, 0.75).unwrap();
    assert_eq!(c.report.lhs, 0.0);
    assert!(c.passed());

    let u = nodal(&ball, |x| x[0] + 2.0);
    let c = weak_l1_log_check(&ball, &u, 0.5, 0.75).unwrap();
    assert!(c.passed(), "{c:?}");
    let osc = (2.5f64 / 1.5).ln();
    let grid: Vec<f64> = serde_json::from_value(c.report.params["t_grid"].clone()).unwrap();
    let tails: Vec<f64> = serde_json::from_value(c.report.params["tails"].clone()).unwrap();
    for (t, tail) in grid.iter().zip(&tails) {
        if *t > osc {
            assert_eq!(*tail, 0.0);
        }
    }
    assert!(tails[0] > 0.0);

    let randers = Ball::around(spaces::randers(), [0.0, 0.0], 1.0).unwrap();
    let u = randers.solve(|z, _| 2.0 + z[0] + 0.3 * z[1]).unwrap();
    let c = weak_l1_log_check(&randers, &u, 0.5, 0.75).unwrap();
    let d = c.shape("dirichlet_log_bound").unwrap();
    assert!(d.passed());
    assert!((d.params["lambda"].as_f64().unwrap() - 3.0).abs() < 1e-6);
}

#[test]
fn gradient_estimate_examples() {
    let ball = flat_ball(1.0);
    let c = gradient_estimate_check(&ball, &DiscreteFunction::constant(ball.mesh(), 3.0)).unwrap();
    assert!(c.report.lhs < 1e-12);

    // F(nabla log u) = 1/(x1 + 2), largest at x1 = -rho R
    let u = nodal(&ball, |x| x[0] + 2.0);
    let c = gradient_estimate_check(&ball, &u).unwrap();
    assert!((c.report.lhs - 1.0 / 1.5).abs() < 1e-12, "{}", c.report.lhs);
    assert!(c.passed());

    let saddle = ball.solve(|_, x| 3.0 + x[0] * x[0] - x[1] * x[1]).unwrap();
    let c = gradient_estimate_check(&ball, &saddle).unwrap();
    assert!(c.shape("gradient_norm_subsolution").unwrap().passed(), "{c:?}");

    let kink = nodal(&ball, |x| 1.0 + x[0].max(0.0));
    assert!(matches!(gradient_estimate_check(&ball, &kink), Err(FinslerError::InsufficientRegularity(_))));
    let neg = nodal(&ball, |x| x[0]);
    assert!(matches!(gradient_estimate_check(&ball, &neg), Err(FinslerError::NonPositive(_))));
}

#[test]
fn gradient_norm_is_a_subsolution_on_curved_solver_outputs() {
    for space in [spaces::hyperbolic(), spaces::randers()] {
        let ball = Ball::around(space, [0.0, 0.0], 1.0).unwrap();
        let u = ball.solve(|z, _| 3.0 + z[0] * z[0] - z[1] * z[1]).unwrap();
        let c = gradient_estimate_check(&ball, &u).unwrap();
        assert!(c.passed(), "{} {:?}", ball.space().name, c.shapes);
    }
}

fn points() -> Vec<[f64; 2]> {
    (0..10).map(|i| [0.3 * f64::from(i) - 1.2, 0.7 - 0.15 * f64::from(i)]).collect()
}

#[test]
fn bochner_examples() {
    let flat = spaces::flat::<f64>();
    // Delta(|du|^2/2) = 2, |Hess u|^2 = 2, d(Delta u) = 0, Ric = 0
    let saddle = Polynomial::new(vec![(0.5, 2, 0), (-0.5, 0, 2)]);
    assert!(bochner_residual(&flat, &saddle, &points()).unwrap() <= 1e-8);
    let cubic = Polynomial::new(vec![(1.0, 3, 0)]);
    assert!(bochner_residual(&flat, &cubic, &points()).unwrap() <= 1e-10);
    // Gaussian weight: Delta_Phi x1 = -x1, d(Delta u)(nabla u) = -1, Ric_inf = 1
    let gaussian = spaces::gaussian::<f64>();
    let x1 = Polynomial::new(vec![(1.0, 1, 0)]);
    assert!(bochner_residual(&gaussian, &x1, &points()).unwrap() <= 1e-8);
    assert!(matches!(bochner_residual(&spaces::randers::<f64>(), &x1, &points()), Err(FinslerError::UnsupportedSpace(_))));
    assert!(matches!(bochner_residual(&spaces::hyperbolic::<f64>(), &x1, &points()), Err(FinslerError::UnsupportedSpace(_))));
}

#[test]
fn bochner_cubic_terms_by_hand() {
    // u = x1^3: |du|^2/2 = 9 x1^4 / 2, Laplacian 54 x1^2; Delta u = 6 x1,
    // d(Delta u)(nabla u) = 18 x1^2; |Hess u|^2 = 36 x1^2.
    let p = Polynomial::new(vec![(1.0f64, 3, 0)]);
    let x = [0.7, -0.2];
    assert!((p.derivative(&x, 3, 0) - 6.0).abs() < 1e-14);
    assert!((p.hessian(&x)[0][0] - 6.0 * 0.7).abs() < 1e-14);
    assert_eq!(p.third(&x)[0][0][1], 0.0);
    assert!(bochner_residual(&spaces::flat(), &p, &[x]).unwrap() <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn bochner_holds_for_random_cubics(c in proptest::collection::vec(-2.0f64..2.0, 10), scale in 0.0f64..2.0) {
        let mut terms = Vec::new();
        let mut k = 0;
        for d in 0..=3u32 {
            for i in 0..=d {
                terms.push((c[k], i, d - i));
                k += 1;
            }
        }
        let p = Polynomial::new(terms);
        let mut space = spaces::gaussian::<f64>();
        space.log_density = finsler_core::measure::LogDensity::Gaussian { scale };
        let res = bochner_residual(&space, &p, &points()).unwrap();
        prop_assert!(res <= 1e-8, "{}", res);
    }
}

#[test]
fn liouville_probe_examples() {
    for space in [spaces::flat(), spaces::gaussian()] {
        let c = liouville_probe(&space, [0.0, 0.0], &[1.0, 2.0, 4.0], 1.0, 1.0).unwrap();
        assert!(c.passed(), "{} {:?}", space.name, c.shapes);
        let flat = liouville_probe(&space, [0.0, 0.0], &[1.0, 2.0], 2.0, 0.0).unwrap();
        assert!(flat.report.lhs < 1e-8, "{}", flat.report.lhs);
    }
    let refused = liouville_probe(&spaces::hyperbolic(), [0.0, 0.0], &[1.0, 2.0, 4.0], 1.0, 1.0);
    assert!(matches!(refused, Err(FinslerError::HypothesisNotMet(_))));
}

#[test]
fn global_harnack_probe_examples() {
    let radii = [1.0, 2.0, 4.0];
    let c = global_harnack_probe(&spaces::flat(), [0.0, 0.0], &radii, 0.5, |x, r| x[0] + 2.0 * r).unwrap();
    let ratios: Vec<f64> = serde_json::from_value(c.report.params["ratios"].clone()).unwrap();
    for q in ratios {
        assert!((q - 5.0 / 3.0).abs() < 1e-6, "{q}");
    }
    assert!(c.passed());
    let c = global_harnack_probe(&spaces::flat(), [0.0, 0.0], &radii, 0.5, |_, _| 3.0).unwrap();
    assert!((c.report.lhs - 1.0).abs() < 1e-12);
    let c = global_harnack_probe(&spaces::gaussian(), [0.0, 0.0], &radii, 0.5, |x, r| 2.0 + x[0] / r).unwrap();
    assert!(c.passed(), "{:?}", c.shapes);
    let refused = global_harnack_probe(&spaces::hyperbolic(), [0.0, 0.0], &radii, 0.5, |_, _| 1.0);
    assert!(matches!(refused, Err(FinslerError::HypothesisNotMet(_))));
}

#[test]
fn config_validation() {
    let g = spaces::gaussian::<f64>();
    let cfg = ExperimentConfig::for_space(&g, [0.0, 0.0], 1.0);
    assert!(matches!(cfg.validate(&g), Err(FinslerError::DomainError(_))));
    let cfg = ExperimentConfig::for_space(&g, [0.0, 0.0], 0.75);
    assert!(cfg.validate(&g).is_ok());
    assert!((cfg.nu - 134.0).abs() < 1e-12);
    let f = spaces::flat::<f64>();
    let mut cfg = ExperimentConfig::for_space(&f, [0.0, 0.0], 1.0);
    cfg.delta = 0.8;
    assert!(cfg.validate(&f).is_err());
    let mut cfg = ExperimentConfig::for_space(&f, [0.0, 0.0], 1.0);
    cfg.p = 3.0;
    assert!(cfg.validate(&f).is_err());
    let cfg = ExperimentConfig::for_space(&g, [3.5, 0.0], 0.75);
    assert!(cfg.validate(&g).is_err());
}
