use finsler_core::elliptic::{
    check_subsolution, dirichlet_energy, maximum_principle_check, solve_harmonic, solve_linear, weak_residual,
    DirichletProblem, Orientation,
};
use finsler_core::measure::MeasureSpace;
use finsler_core::mesh::{DiscreteFunction, Mesh};
use finsler_core::spaces;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(n: usize) -> Mesh<f64> {
    Mesh::unit_square(n).unwrap()
}

fn problem<F: Fn(&[f64; 2]) -> f64>(space: MeasureSpace<f64>, mesh: Mesh<f64>, g: F) -> DirichletProblem<f64> {
    DirichletProblem::with_boundary_fn(space, mesh, g).unwrap()
}

fn max_diff(a: &DiscreteFunction<f64>, b: &DiscreteFunction<f64>) -> f64 {
    a.values.iter().zip(&b.values).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn energy_examples() {
    let p = problem(spaces::flat(), square(8), |x| x[0]);
    let c = DiscreteFunction::constant(&p.mesh, 3.0);
    assert_eq!(dirichlet_energy(&p, &c).unwrap(), 0.0);
    let u = DiscreteFunction::from_fn(&p.mesh, |x| x[0]);
    assert!((dirichlet_energy(&p, &u).unwrap() - 0.5).abs() < 1e-10);
    // F*((1, 0)) = [sqrt(lambda + 1/4) - 1/2] / lambda = 2/3 with lambda = 3/4
    let p = problem(spaces::randers(), square(8), |x| x[0]);
    let u = DiscreteFunction::from_fn(&p.mesh, |x| x[0]);
    assert!((dirichlet_energy(&p, &u).unwrap() - 2.0 / 9.0).abs() < 1e-8);
}

#[test]
fn affine_solutions() {
    for space in [spaces::flat(), spaces::randers()] {
        let p = problem(space, square(12), |x| x[0]);
        let u = solve_harmonic(&p).unwrap();
        let want = DiscreteFunction::from_fn(&p.mesh, |x| x[0]);
        assert!(max_diff(&u, &want) < 1e-8, "{}", p.space.name);
        assert!(weak_residual(&p, &u).unwrap() < 1e-8);
    }
}

fn re_z2(x: &[f64; 2]) -> f64 {
    x[0] * x[0] - x[1] * x[1]
}

fn re_z2_error(rings: usize) -> f64 {
    let mesh = Mesh::disk([0.3, -0.2], 1.0, rings, 4 * rings).unwrap();
    let p = problem(spaces::flat(), mesh, re_z2);
    let u = solve_harmonic(&p).unwrap();
    let want = DiscreteFunction::from_fn(&p.mesh, re_z2);
    max_diff(&u, &want)
}

#[test]
fn re_z2_converges_at_second_order() {
    let e1 = re_z2_error(8);
    let e2 = re_z2_error(16);
    let order = (e1 / e2).log2();
    assert!(order >= 1.8, "errors {e1} {e2}, order {order}");
    assert!(e2 < 1e-2);
}

#[test]
fn weak_residual_examples() {
    let p = problem(spaces::randers(), square(10), |x| (std::f64::consts::PI * x[0]).sin() + x[1]);
    let before = DiscreteFunction::from_fn(&p.mesh, |x| if x[0] > 0.5 { 1.0 } else { 0.0 } * x[1]);
    let before = DiscreteFunction::new(
        before
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| if p.mesh.boundary[i] { p.boundary_data.values[i] } else { *v })
            .collect(),
    );
    let u = solve_harmonic(&p).unwrap();
    let after = weak_residual(&p, &u).unwrap();
    assert!(after <= 1e-8 * p.scale(), "{after}");
    assert!(weak_residual(&p, &before).unwrap() > after);

    let z = problem(spaces::randers(), square(6), |_| 0.0);
    let c = DiscreteFunction::constant(&z.mesh, 0.0);
    assert_eq!(weak_residual(&z, &c).unwrap(), 0.0);
}

#[test]
fn subsolution_examples() {
    // harmonic and positive
    let p = problem(spaces::randers(), square(10), |x| 1.0 + x[0] * x[1]);
    let u = solve_harmonic(&p).unwrap();
    assert!(u.min() >= 0.0);
    let rep = check_subsolution(&p, &u, None, Orientation::Sub).unwrap();
    assert!(rep.passed(), "{rep:?}");

    // 4 - |x|^2 has Delta = -4 on the unit disk
    let disk = Mesh::disk([0.0, 0.0], 1.0, 12, 48).unwrap();
    let bowl = |x: &[f64; 2]| 4.0 - x[0] * x[0] - x[1] * x[1];
    let p = problem(spaces::flat(), disk, bowl);
    let u = DiscreteFunction::from_fn(&p.mesh, bowl);
    assert!(check_subsolution(&p, &u, None, Orientation::Super).unwrap().passed());
    let sub = check_subsolution(&p, &u, None, Orientation::Sub).unwrap();
    assert!(sub.is_failure());
    // summed over interior hats, int dphi(nabla u) dm approximates 4 int phi dm
    let weak = finsler_core::elliptic::weak_terms(&p, &u).unwrap();
    let masses = p.mesh.node_masses(p.cell_masses());
    let interior = p.mesh.interior_nodes();
    let lhs: f64 = interior.iter().map(|&i| weak[i]).sum();
    let rhs: f64 = interior.iter().map(|&i| 4.0 * masses[i]).sum();
    assert!((lhs - rhs).abs() < 0.05 * rhs, "{lhs} vs {rhs}");

    // |x|^2 on an annulus with f = 4 / min u
    let ann = Mesh::annulus([0.0, 0.0], 0.5, 1.0, 8, 48).unwrap();
    let sq = |x: &[f64; 2]| x[0] * x[0] + x[1] * x[1];
    let p = problem(spaces::flat(), ann, sq);
    let u = DiscreteFunction::from_fn(&p.mesh, sq);
    let f = DiscreteFunction::constant(&p.mesh, 4.0 / u.min());
    assert!(check_subsolution(&p, &u, Some(&f), Orientation::Sub).unwrap().passed());
}

#[test]
fn maximum_principle_examples() {
    let p = problem(spaces::flat(), square(8), |x| x[0]);
    let u = DiscreteFunction::from_fn(&p.mesh, |x| x[0]);
    let rep = maximum_principle_check(&p, &u).unwrap();
    assert!(rep.passed() && rep.lhs < 1.0 && rep.rhs == 1.0);
    let c = DiscreteFunction::constant(&p.mesh, 2.0);
    let rep = maximum_principle_check(&p, &c).unwrap();
    assert!(rep.passed() && rep.lhs == rep.rhs);
    let p = problem(spaces::randers(), square(12), |x| (std::f64::consts::PI * x[0]).sin());
    let u = solve_harmonic(&p).unwrap();
    assert!(maximum_principle_check(&p, &u).unwrap().passed());
}

fn random_function(mesh: &Mesh<f64>, rng: &mut ChaCha8Rng) -> DiscreteFunction<f64> {
    DiscreteFunction::new((0..mesh.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn energy_is_convex(seed in any::<u64>(), lambda in 0.01f64..0.99) {
        let p = problem(spaces::randers_with(0.7), square(5), |_| 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_function(&p.mesh, &mut rng);
        let w = random_function(&p.mesh, &mut rng);
        let mix = DiscreteFunction::new(u.values.iter().zip(&w.values).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect());
        let lhs = dirichlet_energy(&p, &mix).unwrap();
        let rhs = lambda * dirichlet_energy(&p, &u).unwrap() + (1.0 - lambda) * dirichlet_energy(&p, &w).unwrap();
        prop_assert!(lhs <= rhs + 1e-10);
    }
}

#[test]
fn energy_gradient_matches_finite_differences() {
    let p = problem(spaces::randers(), square(6), |_| 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_function(&p.mesh, &mut rng);
    let (_, grad) = p.energy_and_gradient(&u.values);
    for _ in 0..50 {
        let dir: Vec<f64> = (0..u.values.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = 1e-6;
        let shift = |s: f64| DiscreteFunction::new(u.values.iter().zip(&dir).map(|(a, d)| a + s * d).collect());
        let fd = (dirichlet_energy(&p, &shift(h)).unwrap() - dirichlet_energy(&p, &shift(-h)).unwrap()) / (2.0 * h);
        let an: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");
    }
}

#[test]
fn positive_scaling_is_equivariant() {
    let g = |x: &[f64; 2]| (std::f64::consts::PI * x[0]).sin() + 0.5 * x[1];
    let p = problem(spaces::randers(), square(10), g);
    let u = solve_harmonic(&p).unwrap();
    for lambda in [0.5, 3.0] {
        let q = p.with_boundary_data(p.boundary_data.scaled(lambda)).unwrap();
        let v = solve_harmonic(&q).unwrap();
        assert!(max_diff(&v, &u.scaled(lambda)) < 1e-8 * lambda.max(1.0));
    }
    // irreversible norm: negation is not a symmetry
    let q = p.with_boundary_data(p.boundary_data.scaled(-1.0)).unwrap();
    let v = solve_harmonic(&q).unwrap();
    assert!(max_diff(&v, &u.scaled(-1.0)) > 1e-3);
}

#[test]
fn riemannian_variants_match_linear_solve() {
    let g = |x: &[f64; 2]| (2.0 * x[0]).sin() * x[1] + x[0];
    let cases = [
        problem(spaces::flat(), square(12), g),
        problem(spaces::gaussian(), square(12), g),
        problem(spaces::hyperbolic(), Mesh::disk([0.0, 0.0], 0.7, 10, 40).unwrap(), g),
    ];
    for p in cases {
        let u = solve_harmonic(&p).unwrap();
        let v = solve_linear(&p).unwrap();
        assert!(max_diff(&u, &v) < 1e-8, "{}", p.space.name);
    }
}

#[test]
fn f32_solve_reproduces_affine_data() {
    let mesh = Mesh::<f32>::unit_square(6).unwrap();
    let p = DirichletProblem::with_boundary_fn(spaces::randers::<f32>(), mesh, |x| x[0]).unwrap();
    let u = solve_harmonic(&p).unwrap();
    for (i, n) in p.mesh.nodes.iter().enumerate() {
        assert!((u.values[i] - n[0]).abs() < 1e-4);
    }
}
