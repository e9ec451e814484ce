use finsler_core::measure::*;
use finsler_core::mesh::{DiscreteFunction, Mesh};
use finsler_core::minkowski::{MetricDescriptor, TangentVector};
use finsler_core::spaces;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tv(x: [f64; 2], y: [f64; 2]) -> TangentVector<f64> {
    TangentVector::new(&x, &y)
}

#[test]
fn distortion_examples() {
    let flat = spaces::flat::<f64>();
    assert_eq!(distortion(&flat, &tv([0.3, 0.1], [1.0, 2.0])).unwrap(), 0.0);
    let g = spaces::gaussian::<f64>();
    assert!((distortion(&g, &tv([1.0, 0.0], [0.0, 1.0])).unwrap() - 0.5).abs() < 1e-15);
    let r = spaces::randers::<f64>();
    // det g = (F/alpha)^3 for a = I in the plane
    let oracle = 0.5 * (1.0f64).powi(3).ln();
    assert!((distortion(&r, &tv([0.0, 0.0], [0.0, 1.0])).unwrap() - oracle).abs() < 1e-8);
    let y = [0.6, -0.8];
    let oracle = 1.5 * (1.0 + 0.5 * 0.6f64).ln();
    assert!((distortion(&r, &tv([0.0, 0.0], y)).unwrap() - oracle).abs() < 1e-12);
}

#[test]
fn straight_geodesics_in_constant_norms() {
    let flat = spaces::flat::<f64>();
    let p = geodesic_shoot(&flat, &[0.0, 0.0], &tv([0.0, 0.0], [1.0, 0.0]), 2.0, 0.1).unwrap();
    let e = p.end();
    assert!((e.x[0] - 2.0).abs() < 1e-12 && e.x[1].abs() < 1e-12);
    let r = spaces::randers::<f64>();
    let p = geodesic_shoot(&r, &[0.0, 0.0], &tv([0.0, 0.0], [0.0, 1.0]), 1.5, 0.1).unwrap();
    for s in &p.samples {
        assert!(s.x[0].abs() < 1e-12 && (s.x[1] - s.t).abs() < 1e-12);
    }
}

#[test]
fn hyperbolic_diameter_reaches_tanh() {
    let h = spaces::hyperbolic::<f64>();
    for (dir, t) in [([1.0, 0.0], 1.0), ([0.6, 0.8], 0.7), ([-1.0, 0.0], 1.4)] {
        let p = geodesic_shoot(&h, &[0.0, 0.0], &tv([0.0, 0.0], dir), t, 0.01).unwrap();
        let e = p.end();
        let rho = (e.x[0] * e.x[0] + e.x[1] * e.x[1]).sqrt();
        assert!((rho - t.tanh()).abs() < 1e-5, "{rho} vs {}", t.tanh());
        // stays on the diameter through the initial direction
        assert!((e.x[0] * dir[1] - e.x[1] * dir[0]).abs() < 1e-8);
        for s in &p.samples {
            let f = h.metric.at(&s.x).unwrap().f(&s.v);
            assert!((f - p.speed).abs() <= 1e-6 * p.speed);
        }
    }
}

#[test]
fn geodesic_csv_has_header() {
    let flat = spaces::flat::<f64>();
    let p = geodesic_shoot(&flat, &[0.0, 0.0], &tv([0.0, 0.0], [3.0, 4.0]), 1.0, 0.5).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&flat.metric, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,x1,x2,v1,v2,F\n"));
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(3).unwrap().ends_with(",5"));
}

#[test]
fn s_curvature_examples() {
    let flat = spaces::flat::<f64>();
    assert_eq!(s_curvature(&flat, &tv([0.2, 0.3], [1.0, 0.0])).unwrap(), 0.0);
    let g = spaces::gaussian::<f64>();
    assert!((s_curvature(&g, &tv([1.0, 0.0], [1.0, 0.0])).unwrap() - 1.0).abs() < 1e-5);
    let h = spaces::hyperbolic::<f64>();
    for x in [[0.0, 0.0], [0.3, -0.4], [-0.6, 0.1]] {
        assert!(s_curvature(&h, &tv(x, [0.4, 0.9])).unwrap().abs() < 1e-6);
    }
    let r = spaces::randers::<f64>();
    assert!(s_curvature(&r, &tv([0.0, 0.0], [0.3, 1.0])).unwrap().abs() < 1e-6);
}

#[test]
fn gaussian_s_curvature_on_random_unit_vectors() {
    let g = spaces::gaussian::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..100 {
        let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let y = [t.cos(), t.sin()];
        let s = s_curvature(&g, &tv(x, y)).unwrap();
        assert!((s - (x[0] * y[0] + x[1] * y[1])).abs() < 1e-5);
    }
}

#[test]
fn distance_examples() {
    let flat = spaces::flat::<f64>();
    assert_eq!(distance(&flat, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
    let r = spaces::randers::<f64>();
    assert!((distance(&r, &[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-14);
    assert!((distance(&r, &[1.0, 0.0], &[0.0, 0.0]).unwrap() - 0.5).abs() < 1e-14);
    let h = spaces::hyperbolic::<f64>();
    assert_eq!(distance(&h, &[0.2, 0.1], &[0.2, 0.1]).unwrap(), 0.0);
}

fn hyperbolic_oracle(p: [f64; 2], q: [f64; 2]) -> f64 {
    let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
    let np = 1.0 - p[0] * p[0] - p[1] * p[1];
    let nq = 1.0 - q[0] * q[0] - q[1] * q[1];
    (1.0 + 2.0 * d2 / (np * nq)).acosh()
}

#[test]
fn hyperbolic_distance_matches_closed_form() {
    let h = spaces::hyperbolic::<f64>();
    let r = distance_path(&h.metric, &[0.0, 0.0], &[0.5, 0.0]).unwrap();
    assert!(r.refined);
    assert!((r.value - 2.0 * 0.5f64.atanh()).abs() < 1e-7);
    for (p, q) in [([0.1, 0.2], [-0.4, 0.3]), ([0.6, 0.0], [0.0, 0.6]), ([-0.3, -0.5], [0.5, 0.1])] {
        let d = distance(&h, &p, &q).unwrap();
        assert!((d - hyperbolic_oracle(p, q)).abs() < 1e-6, "{d} vs {}", hyperbolic_oracle(p, q));
    }
}

#[test]
fn conformal_randers_distance_is_asymmetric_and_consistent() {
    use finsler_core::field::{ConformalFactor, CovectorField, MatrixField};
    let factor = ConformalFactor::Gaussian { c: 0.3_f64 };
    let metric = MetricDescriptor::randers(
        MatrixField::Conformal { n: 2, factor: factor.clone() },
        CovectorField::Conformal { value: [0.4, 0.0].into_iter().collect(), factor },
    )
    .unwrap();
    let (p, q): ([f64; 2], [f64; 2]) = ([-0.5, 0.2], [0.7, -0.1]);
    let fwd = distance_path(&metric, &p, &q).unwrap();
    let bwd = distance_path(&metric, &q, &p).unwrap();
    assert!(fwd.refined && bwd.refined);
    assert!(fwd.value > bwd.value);
    // reverse metric swaps the two distances
    let rev = distance_path(&metric.reverse(), &q, &p).unwrap();
    assert!((rev.value - fwd.value).abs() < 1e-6);
}

#[test]
fn shooting_never_beats_minimisation() {
    let h = spaces::hyperbolic::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mut pt = || loop {
            let p = [rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)];
            if p[0] * p[0] + p[1] * p[1] < 0.49 {
                return p;
            }
        };
        let (p, q) = (pt(), pt());
        let d = distance_path(&h.metric, &p, &q).unwrap();
        assert!(d.refined);
        assert!((d.value - hyperbolic_oracle(p, q)).abs() < 1e-6);
    }
}

#[test]
fn triangle_inequality_hyperbolic() {
    let h = spaces::hyperbolic::<f64>();
    let (a, b, c) = ([0.1, 0.1], [0.5, -0.2], [-0.3, 0.4]);
    let ab = distance(&h, &a, &b).unwrap();
    let bc = distance(&h, &b, &c).unwrap();
    let ac = distance(&h, &a, &c).unwrap();
    assert!(ac <= ab + bc + 1e-8);
}

#[test]
fn gradient_field_examples() {
    let mesh = Mesh::<f64>::unit_square(6).unwrap();
    let flat = spaces::flat::<f64>();
    let u = DiscreteFunction::from_fn(&mesh, |p| p[0]);
    for v in gradient_field(&flat, &mesh, &u).unwrap() {
        assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12);
    }
    let c = DiscreteFunction::constant(&mesh, 3.0);
    assert!(gradient_field(&flat, &mesh, &c).unwrap().iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
    let r = spaces::randers::<f64>();
    let m = r.metric.at(&[0.0, 0.0]).unwrap();
    let expect = m.legendre_inverse(&[1.0, 0.0]).unwrap();
    for v in gradient_field(&r, &mesh, &u).unwrap() {
        assert!((v[0] - expect[0]).abs() < 1e-10 && (v[1] - expect[1]).abs() < 1e-10);
        assert!((m.f(&v) - 2.0 / 3.0).abs() < 1e-8);
    }
}

fn hat(mesh: &Mesh<f64>, node: usize) -> DiscreteFunction<f64> {
    let mut v = vec![0.0; mesh.node_count()];
    v[node] = 1.0;
    DiscreteFunction::new(v)
}

#[test]
fn weak_divergence_examples() {
    let mesh = Mesh::<f64>::rectangle(-1.0, 1.0, -1.0, 1.0, 8, 8).unwrap();
    let flat = spaces::flat::<f64>();
    let centre = 4 * 9 + 4;
    let phi = hat(&mesh, centre);
    let zero = vec![[0.0, 0.0].into_iter().collect(); mesh.cells.len()];
    assert_eq!(weak_divergence_residual(&flat, &mesh, &zero, &phi).unwrap(), 0.0);
    let ones = vec![[1.0, 0.0].into_iter().collect(); mesh.cells.len()];
    assert!(weak_divergence_residual(&flat, &mesh, &ones, &phi).unwrap().abs() < 1e-10);

    // Gaussian weight: the flux term equals -int phi d1(Phi) dm
    let g = spaces::gaussian::<f64>();
    let node = 5 * 9 + 5;
    let phi = hat(&mesh, node);
    let parts = weak_divergence_parts(&g, &mesh, &ones, &phi).unwrap();
    // independent oracle: refined tensor-product midpoint sum of
    // phi(x) * (-x1) * e^{-|x|^2/2} over the hat's support square
    let p = mesh.nodes[node];
    let h = 0.25;
    let n = 800;
    let mut oracle = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = p[0] - h + 2.0 * h * (i as f64 + 0.5) / n as f64;
            let y = p[1] - h + 2.0 * h * (j as f64 + 0.5) / n as f64;
            let val = hat_value(&mesh, node, [x, y]);
            oracle += val * (-x) * (-(x * x + y * y) / 2.0).exp();
        }
    }
    oracle *= (2.0 * h / n as f64).powi(2);
    assert!((parts[1] - oracle).abs() < 1e-5, "{} vs {oracle}", parts[1]);
    assert!((parts[0] + oracle).abs() < 1e-4);
    assert!(weak_divergence_residual(&g, &mesh, &ones, &phi).unwrap().abs() < 1e-4);
}

// Piecewise-linear hat evaluated by locating the containing cell.
fn hat_value(mesh: &Mesh<f64>, node: usize, x: [f64; 2]) -> f64 {
    for (c, cell) in mesh.cells.iter().enumerate() {
        let Some(k) = cell.iter().position(|&i| i == node) else { continue };
        let g = mesh.basis_gradients(c);
        let mut lam = [0.0; 3];
        for i in 0..3 {
            let q = mesh.nodes[cell[(i + 1) % 3]];
            // barycentric i vanishes on the opposite edge
            lam[i] = g[i][0] * (x[0] - q[0]) + g[i][1] * (x[1] - q[1]);
        }
        if lam.iter().all(|&l| l >= -1e-12) {
            return lam[k];
        }
    }
    0.0
}

#[test]
fn reverse_gradient_relation() {
    let r = spaces::randers::<f64>();
    let fwd = r.metric.at(&[0.0, 0.0]).unwrap();
    let rev = r.metric.reverse().at(&[0.0, 0.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let du = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let a = fwd.legendre_inverse(&[-du[0], -du[1]]).unwrap();
        let b = rev.legendre_inverse(&du).unwrap();
        assert!((a[0] + b[0]).abs() < 1e-8 && (a[1] + b[1]).abs() < 1e-8);
        assert!((fwd.f(&a) - rev.f(&b)).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_speed_on_hyperbolic(x in 0.0..0.5f64, t in 0.0..6.28f64, len in 0.1..1.5f64) {
        let h = spaces::hyperbolic::<f64>();
        let x0 = [x * 0.7, -x * 0.5];
        let p = shoot(&h.metric, &x0, &[t.cos(), t.sin()], len, 0.05).unwrap();
        for s in &p.samples {
            let f = h.metric.at(&s.x).unwrap().f(&s.v);
            prop_assert!((f - p.speed).abs() <= 1e-6 * p.speed);
        }
    }
}
