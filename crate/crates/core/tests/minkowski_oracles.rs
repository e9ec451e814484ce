use finsler_core::field::{ConformalFactor, CovectorField, MatrixField};
use finsler_core::linalg::Matrix;
use finsler_core::minkowski::*;
use proptest::prelude::*;

fn randers(b: [f64; 2]) -> MetricDescriptor<f64> {
    MetricDescriptor::randers_constant(&b).unwrap()
}

fn tv(y: [f64; 2]) -> TangentVector<f64> {
    TangentVector::new(&[0.0, 0.0], &y)
}

fn cv(xi: [f64; 2]) -> CotangentVector<f64> {
    CotangentVector::new(&[0.0, 0.0], &xi)
}

// Central finite-difference Hessian of F^2/2, step 1e-4 (1 + |y|).
fn fd_hessian(m: &Minkowski<f64>, y: [f64; 2]) -> [[f64; 2]; 2] {
    let h = 1e-4 * (1.0 + (y[0] * y[0] + y[1] * y[1]).sqrt());
    let e = |y: [f64; 2]| 0.5 * m.f(&y).powi(2);
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0.0;
            for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut p = y;
                p[i] += si * h;
                p[j] += sj * h;
                s += w * e(p);
            }
            out[i][j] = s / (4.0 * h * h);
        }
    }
    out
}

// Third derivatives of F^2/4 from central differences of the closed-form
// Hessian oracle above, i.e. one more differencing level.
fn fd_cartan(m: &Minkowski<f64>, y: [f64; 2]) -> [[[f64; 2]; 2]; 2] {
    let h = 1e-3;
    let mut out = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        let mut yp = y;
        let mut ym = y;
        yp[k] += h;
        ym[k] -= h;
        let gp = fd_hessian(m, yp);
        let gm = fd_hessian(m, ym);
        for i in 0..2 {
            for j in 0..2 {
                out[i][j][k] = 0.5 * (gp[i][j] - gm[i][j]) / (2.0 * h);
            }
        }
    }
    out
}

// sup over the unit circle of xi(y)/F(y): dense grid then golden refinement.
fn circle_dual(m: &Minkowski<f64>, xi: [f64; 2]) -> f64 {
    let q = |t: f64| {
        let y = [t.cos(), t.sin()];
        (xi[0] * y[0] + xi[1] * y[1]) / m.f(&y)
    };
    let n = 20000;
    let step = std::f64::consts::TAU / n as f64;
    let best = (0..n).map(|i| i as f64 * step).fold((0.0, f64::MIN), |b, t| {
        let v = q(t);
        if v > b.1 {
            (t, v)
        } else {
            b
        }
    });
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if q(c) > q(d) {
            b = d;
        } else {
            a = c;
        }
    }
    q(0.5 * (a + b))
}

// Closed-form dual of a constant Randers norm with a = I.
fn randers_dual_closed(b: [f64; 2], xi: [f64; 2]) -> f64 {
    let lam = 1.0 - (b[0] * b[0] + b[1] * b[1]);
    let xb = xi[0] * b[0] + xi[1] * b[1];
    let xx = xi[0] * xi[0] + xi[1] * xi[1];
    ((lam * xx + xb * xb).sqrt() - xb) / lam
}

#[test]
fn randers_fundamental_tensor_matches_hessian_oracle() {
    let m = randers([0.5, 0.0]).at(&[0.0, 0.0]).unwrap();
    for y in [[0.0, 1.0], [1.0, 0.3], [-0.4, -2.0]] {
        let g = m.fundamental_tensor(&y).unwrap();
        let o = fd_hessian(&m, y);
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[(i, j)] - o[i][j]).abs() < 1e-6, "{y:?} {i}{j}");
            }
        }
    }
}

#[test]
fn randers_cartan_matches_third_difference_oracle() {
    let m = randers([0.5, 0.0]).at(&[0.0, 0.0]).unwrap();
    let y = [0.0, 1.0];
    let c = m.cartan_tensor(&y).unwrap();
    let o = fd_cartan(&m, y);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                assert!((c.get(i, j, k) - o[i][j][k]).abs() < 1e-5);
                assert_eq!(c.get(i, j, k), c.get(k, i, j));
            }
        }
    }
    assert!(c.contract(&y).max_abs() < 1e-8);
}

#[test]
fn randers_dual_values_against_circle_oracle() {
    let b = [0.5, 0.0];
    let metric = randers(b);
    let m = metric.at(&[0.0, 0.0]).unwrap();
    for (xi, expect) in [([1.0, 0.0], 2.0 / 3.0), ([-1.0, 0.0], 2.0)] {
        let d = dual_norm(&metric, &cv(xi)).unwrap();
        assert!((d - circle_dual(&m, xi)).abs() < 1e-8);
        assert!((d - expect).abs() < 1e-8);
        assert!((d - randers_dual_closed(b, xi)).abs() < 1e-12);
    }
    assert_eq!(dual_norm(&MetricDescriptor::euclidean(2), &cv([3.0, 4.0])).unwrap(), 5.0);
}

#[test]
fn legendre_inverse_examples() {
    let e = MetricDescriptor::<f64>::euclidean(2);
    assert_eq!(legendre(&e, &tv([3.0, 4.0])).unwrap().components.as_slice(), &[3.0, 4.0]);
    assert_eq!(
        legendre_inverse(&e, &cv([1.0, 2.0])).unwrap().components.as_slice(),
        &[1.0, 2.0]
    );
    let r = randers([0.5, 0.0]);
    let y = legendre_inverse(&r, &cv([1.0, 0.0])).unwrap();
    assert!((eval_f(&r, &y).unwrap() - 2.0 / 3.0).abs() < 1e-8);
    let xi = legendre(&r, &tv([0.0, 1.0])).unwrap();
    assert!((dual_norm(&r, &xi).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn randers_reversibility_against_circle_oracle() {
    let c = uniformity_constants(&randers([0.5, 0.0]), &SampleRegion::around(&[0.0, 0.0], 1.0))
        .unwrap();
    let oracle = (1.0 + 0.5) / (1.0 - 0.5);
    assert!((c.lambda_rev - oracle).abs() < 1e-8, "{}", c.lambda_rev);
    assert!(c.kappa >= 9.0 - 1e-8);
    assert!(c.satisfies_invariants(1e-8));
}

#[test]
fn randers_dual_tensor_sandwich_at_one_one() {
    let r = randers([0.5, 0.0]);
    let c = uniformity_constants(&r, &SampleRegion::around(&[0.0, 0.0], 1.0)).unwrap();
    let (kt, kts) = c.dual();
    let gs = dual_tensor(&r, &cv([1.0, 1.0])).unwrap();
    let m = r.at(&[0.0, 0.0]).unwrap();
    for k in 0..64 {
        let t = k as f64 * std::f64::consts::TAU / 64.0;
        let eta = [t.cos(), t.sin()];
        let q = gs.quad(&eta);
        let fs = m.dual_norm(&eta).unwrap().powi(2);
        assert!(q <= kt * fs * (1.0 + 1e-8) && q >= kts * fs * (1.0 - 1e-8));
    }
}

#[test]
fn determinant_formula_for_randers() {
    // det g = (F/alpha)^{n+1} det a
    let m = randers([0.3, -0.4]).at(&[0.0, 0.0]).unwrap();
    let y = [0.7_f64, 1.1];
    let alpha = (y[0] * y[0] + y[1] * y[1]).sqrt();
    let expect = (m.f(&y) / alpha).powi(3);
    assert!((m.fundamental_tensor(&y).unwrap().det() - expect).abs() < 1e-12);
}

#[test]
fn conformal_randers_is_valid_everywhere() {
    let factor = ConformalFactor::Gaussian { c: 0.5_f64 };
    let m = MetricDescriptor::randers(
        MatrixField::Conformal { n: 2, factor: factor.clone() },
        CovectorField::Conformal { value: [0.6, 0.0].into_iter().collect(), factor },
    )
    .unwrap();
    for x in [[0.0, 0.0], [3.0, -2.0], [10.0, 0.0]] {
        let n = m.at(&x).unwrap();
        assert!((n.drift_norm() - 0.6).abs() < 1e-12);
    }
}

#[test]
fn general_a_matrix_round_trip() {
    let a = Matrix::from_row_major(2, &[2.0_f64, 0.3, 0.3, 1.0]).unwrap();
    let m = MetricDescriptor::randers(MatrixField::Constant(a), CovectorField::Constant([0.2, 0.5].into_iter().collect()))
        .unwrap()
        .at(&[0.0, 0.0])
        .unwrap();
    let xi = [0.4_f64, -1.3];
    let y = m.legendre_inverse(&xi).unwrap();
    let back = m.legendre(&y);
    assert!(((back[0] - xi[0]).powi(2) + (back[1] - xi[1]).powi(2)).sqrt() < 1e-10);
}

fn arb_b() -> impl Strategy<Value = [f64; 2]> {
    (0.0..0.8f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| [r * t.cos(), r * t.sin()])
}

fn arb_vec() -> impl Strategy<Value = [f64; 2]> {
    (0.05..5.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| [r * t.cos(), r * t.sin()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn homogeneity(b in arb_b(), y in arb_vec(), lam in 1e-3..10.0f64) {
        let m = randers(b).at(&[0.0, 0.0]).unwrap();
        let f = m.f(&y);
        prop_assert!((m.f(&[lam * y[0], lam * y[1]]) - lam * f).abs() <= 1e-10 * lam.max(1.0) * f);
    }

    #[test]
    fn fundamental_tensor_reproduces_norm(b in arb_b(), y in arb_vec()) {
        let m = randers(b).at(&[0.0, 0.0]).unwrap();
        let g = m.fundamental_tensor(&y).unwrap();
        let f2 = m.f(&y).powi(2);
        prop_assert!((g.quad(&y) - f2).abs() <= 1e-8 * f2);
        prop_assert!(g.is_positive_definite());
    }

    #[test]
    fn cartan_contraction_vanishes(b in arb_b(), y in arb_vec()) {
        let m = randers(b).at(&[0.0, 0.0]).unwrap();
        let c = m.cartan_tensor(&y).unwrap();
        let scale = 1.0 + c.max_abs();
        prop_assert!(c.contract(&y).max_abs() <= 1e-8 * scale * (1.0 + y[0].abs() + y[1].abs()));
    }

    #[test]
    fn reversibility_bound(b in arb_b(), y in arb_vec()) {
        let metric = randers(b);
        let c = uniformity_constants(&metric, &SampleRegion { resolution: 90, ..SampleRegion::around(&[0.0, 0.0], 1.0) }).unwrap();
        let m = metric.at(&[0.0, 0.0]).unwrap();
        prop_assert!(m.f(&y) <= c.lambda_rev * m.f(&[-y[0], -y[1]]) * (1.0 + 1e-8));
    }

    #[test]
    fn dual_matches_closed_form(b in arb_b(), xi in arb_vec()) {
        let m = randers(b).at(&[0.0, 0.0]).unwrap();
        let d = m.dual_norm(&xi).unwrap();
        let o = randers_dual_closed(b, xi);
        prop_assert!((d - o).abs() <= 1e-8 * o);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn legendre_round_trips(b in arb_b(), y in arb_vec()) {
        let m = randers(b).at(&[0.0, 0.0]).unwrap();
        let xi = m.legendre(&y);
        let y2 = m.legendre_inverse(&xi).unwrap();
        let ny = (y[0] * y[0] + y[1] * y[1]).sqrt();
        prop_assert!(((y2[0] - y[0]).powi(2) + (y2[1] - y[1]).powi(2)).sqrt() <= 1e-8 * ny);
        let xi2 = m.legendre(&y2);
        let nx = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        prop_assert!(((xi2[0] - xi[0]).powi(2) + (xi2[1] - xi[1]).powi(2)).sqrt() <= 1e-8 * nx);
        let f = m.f(&y);
        prop_assert!((m.dual_norm(&xi).unwrap() - f).abs() <= 1e-8 * f);
    }
}
