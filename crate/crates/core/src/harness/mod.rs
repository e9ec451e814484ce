//! Empirical checks of the Poincaré, Sobolev, mean-value, Harnack and
//! gradient inequalities on forward geodesic balls.
//!
//! Every check works on a [`Ball`]: a geodesic-polar mesh of `B_R(x0)` with
//! the polar radius of each node, degree-5 quadrature weights that include
//! the density, and a Dirichlet problem for energies and solves. Sub-balls
//! `B_{sR}` are unions of rings, so radii that are multiples of `R / rings`
//! are resolved exactly.

mod bochner;
mod family;
mod gradient;
mod harnack;
mod mean_value;
mod probes;
mod quotients;
mod suite;

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::elliptic::{solve_harmonic, DirichletProblem};
use crate::error::{FinslerError, Result};
use crate::measure::MeasureSpace;
use crate::mesh::{DiscreteFunction, Mesh};
use crate::minkowski::{uniformity_constants, SampleRegion};
use crate::report::InequalityReport;
use crate::scalar::Real;

pub use bochner::{bochner_residual, Polynomial};
pub use family::TrialFunction;
pub use gradient::gradient_estimate_check;
pub use harnack::{harnack_check, weak_l1_log_check};
pub use mean_value::{mean_value_check, moser_chain_check, superharmonic_inf_check};
pub use probes::{global_harnack_probe, liouville_probe};
pub use quotients::{poincare_quotient, poincare_scaling, poincare_value, sobolev_quotient, sobolev_value, sobolev_variant_value};
pub use suite::{bochner_cases, default_scaling_radii, run_suite, SuiteCheck, SuiteOptions, BOCHNER_TOL};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_RINGS: usize = 32;
pub const DEFAULT_SECTORS: usize = 64;

/// `nu = 4 (n + 4k) - 2`
pub fn sobolev_dimension<T: Real>(n: usize, k: T) -> T {
    T::lit(4.0) * (T::from_usize_lossy(n) + T::lit(4.0) * k) - T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T> {
    pub space: String,
    pub base_point: [T; 2],
    pub radius: T,
    pub delta: T,
    pub delta_prime: T,
    /// Fraction of `R` on which interior gradient bounds are taken.
    pub rho: T,
    pub p: T,
    pub a: T,
    /// Certified `Ric_inf >= K`.
    pub ric_lower: T,
    pub distortion: T,
    pub s_lower: T,
    pub nu: T,
    pub seed: u64,
    pub tol: T,
    pub rings: usize,
    pub sectors: usize,
}

impl<T: Real> ExperimentConfig<T> {
    /// Defaults for a space: `delta = 1/2`, `delta' = 3/4`, `rho = 1/2`,
    /// `p = 2`, `a = 1`, certified constants from the space.
    pub fn for_space(space: &MeasureSpace<T>, base_point: [T; 2], radius: T) -> Self {
        let cb = &space.certified_bounds;
        let k = cb.distortion_bound.unwrap_or(T::zero());
        Self {
            space: space.name.clone(),
            base_point,
            radius,
            delta: T::lit(0.5),
            delta_prime: T::lit(0.75),
            rho: T::lit(0.5),
            p: T::lit(2.0),
            a: T::one(),
            ric_lower: cb.ric_inf_lower,
            distortion: k,
            s_lower: cb.s_curvature_lower.unwrap_or(T::zero()),
            nu: sobolev_dimension(space.dim(), k),
            seed: DEFAULT_SEED,
            tol: T::lit(crate::comparison::DEFAULT_TOL),
            rings: DEFAULT_RINGS,
            sectors: DEFAULT_SECTORS,
        }
    }

    /// `t = 1 + 2 / nu`
    pub fn moser_exponent(&self) -> T {
        T::one() + T::lit(2.0) / self.nu
    }

    /// `|K|` for the `sqrt|K| R` shapes.
    pub fn abs_curvature(&self) -> T {
        self.ric_lower.abs()
    }

    /// `K >= 0` with `Ric_inf >= -K`.
    pub fn lower_bound_magnitude(&self) -> T {
        (-self.ric_lower).max(T::zero())
    }

    pub fn validate(&self, space: &MeasureSpace<T>) -> Result<()> {
        let bad = |m: String| Err(FinslerError::DomainError(m));
        if !(self.delta > T::zero() && self.delta < self.delta_prime && self.delta_prime <= T::one()) {
            return bad(format!("need 0 < delta < delta' <= 1, got {} and {}", self.delta, self.delta_prime));
        }
        if !(self.p > T::zero() && self.p <= T::lit(2.0)) {
            return bad(format!("p = {} outside (0, 2]", self.p));
        }
        if self.a < T::one() {
            return bad(format!("a = {} below 1", self.a));
        }
        if self.nu <= T::lit(2.0) {
            return bad(format!("nu = {} must exceed 2", self.nu));
        }
        if !(self.radius > T::zero()) || !(self.rho > T::zero() && self.rho <= T::one()) {
            return bad("radius and rho must be positive, rho <= 1".into());
        }
        if self.rings < 4 || self.sectors < 8 {
            return Err(FinslerError::DegenerateMesh("ball mesh needs at least 4 rings and 8 sectors".into()));
        }
        if self.ric_lower > T::zero() {
            let n1 = T::from_usize_lossy(space.dim() - 1);
            let cap = T::FRAC_PI_4() * (n1 / self.ric_lower).sqrt();
            if self.radius > cap {
                return bad(format!("R = {} exceeds the cap {} for K = {}", self.radius, cap, self.ric_lower));
            }
        }
        if let Some(w) = space.working_radius {
            let reach = (self.base_point[0].powi(2) + self.base_point[1].powi(2)).sqrt() + self.radius;
            if reach > w {
                return bad(format!("ball reaches {reach}, beyond the working radius {w}"));
            }
        }
        Ok(())
    }

    /// Deterministic JSON snapshot attached to every report.
    pub fn snapshot(&self) -> serde_json::Value {
        let f = |v: T| serde_json::json!(v.to_f64_lossy());
        serde_json::json!({
            "space": self.space,
            "x0": [f(self.base_point[0]), f(self.base_point[1])],
            "R": f(self.radius),
            "delta": f(self.delta),
            "delta_prime": f(self.delta_prime),
            "rho": f(self.rho),
            "p": f(self.p),
            "a": f(self.a),
            "K": f(self.ric_lower),
            "k": f(self.distortion),
            "alpha": f(self.s_lower),
            "nu": f(self.nu),
            "seed": self.seed,
            "tol": f(self.tol),
            "rings": self.rings,
            "sectors": self.sectors,
        })
    }
}

/// A main report plus the pass/fail shape checks that accompany it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub report: InequalityReport,
    pub shapes: Vec<InequalityReport>,
}

impl Check {
    pub fn new(report: InequalityReport) -> Self {
        Self { report, shapes: Vec::new() }
    }

    pub fn with_shape(mut self, r: InequalityReport) -> Self {
        self.shapes.push(r);
        self
    }

    pub fn shape(&self, id: &str) -> Option<&InequalityReport> {
        self.shapes.iter().find(|r| r.ineq_id == id)
    }

    /// No failing report among the main one and its shapes.
    pub fn passed(&self) -> bool {
        !self.report.is_failure() && self.shapes.iter().all(|r| !r.is_failure())
    }

    pub fn into_reports(self) -> Vec<InequalityReport> {
        let mut v = vec![self.report];
        v.extend(self.shapes);
        v
    }
}

/// Forward geodesic ball `B_R(x0)` prepared for quadrature.
#[derive(Debug)]
pub struct Ball<T: Real> {
    pub config: ExperimentConfig<T>,
    pub problem: DirichletProblem<T>,
    /// Polar radius `d(x0, x)` of each node.
    pub radial: Vec<T>,
    chart: Vec<[T; 2]>,
    quad: Vec<Vec<(T, [T; 3])>>,
    cell_radius: Vec<T>,
    family: OnceLock<Vec<TrialFunction<T>>>,
    lambda: OnceLock<T>,
}

impl<T: Real> Ball<T> {
    pub fn new(space: MeasureSpace<T>, config: ExperimentConfig<T>) -> Result<Self> {
        config.validate(&space)?;
        let mesh = Mesh::geodesic_ball(&space, config.base_point, config.radius, config.rings, config.sectors)?;
        let radial = mesh.radial.clone().ok_or_else(|| FinslerError::DegenerateMesh("ball mesh lacks radii".into()))?;
        let x0 = config.base_point;
        let chart = mesh
            .nodes
            .iter()
            .zip(&radial)
            .map(|(x, &r)| {
                let d = [x[0] - x0[0], x[1] - x0[1]];
                let e = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if e > T::zero() {
                    let s = r / (config.radius * e);
                    [d[0] * s, d[1] * s]
                } else {
                    [T::zero(), T::zero()]
                }
            })
            .collect();
        let quad = (0..mesh.cells.len())
            .into_par_iter()
            .map(|c| {
                mesh.cell_quadrature(c)
                    .into_iter()
                    .map(|(p, w, l)| Ok((w * space.density(&p)?, l)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let cell_radius = mesh.cells.iter().map(|c| c.iter().fold(T::zero(), |m, &i| m.max(radial[i]))).collect();
        let zero = DiscreteFunction::constant(&mesh, T::zero());
        let problem = DirichletProblem::new(space, mesh, zero)?;
        Ok(Self {
            config,
            problem,
            radial,
            chart,
            quad,
            cell_radius,
            family: OnceLock::new(),
            lambda: OnceLock::new(),
        })
    }

    /// Ball with default parameters for the space.
    pub fn around(space: MeasureSpace<T>, base_point: [T; 2], radius: T) -> Result<Self> {
        let cfg = ExperimentConfig::for_space(&space, base_point, radius);
        Self::new(space, cfg)
    }

    pub fn space(&self) -> &MeasureSpace<T> {
        &self.problem.space
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.problem.mesh
    }

    pub fn radius(&self) -> T {
        self.config.radius
    }

    /// Normalised polar chart `(d(x0, x) / R) * direction`, in the unit disk.
    pub fn chart(&self, i: usize) -> [T; 2] {
        self.chart[i]
    }

    fn limit(&self, s: T) -> T {
        s * self.config.radius * (T::one() + T::lit(1e-9))
    }

    pub fn node_in(&self, i: usize, s: T) -> bool {
        self.radial[i] <= self.limit(s)
    }

    pub fn cell_in(&self, c: usize, s: T) -> bool {
        self.cell_radius[c] <= self.limit(s)
    }

    pub fn sup_over(&self, u: &DiscreteFunction<T>, s: T) -> T {
        (0..u.values.len()).filter(|&i| self.node_in(i, s)).fold(T::neg_infinity(), |m, i| m.max(u.values[i]))
    }

    pub fn inf_over(&self, u: &DiscreteFunction<T>, s: T) -> T {
        (0..u.values.len()).filter(|&i| self.node_in(i, s)).fold(T::infinity(), |m, i| m.min(u.values[i]))
    }

    /// `int_{B_{sR}} f(u) dm` with `u` the piecewise-linear interpolant.
    pub fn integral<F: Fn(T) -> T>(&self, u: &[T], s: T, f: F) -> T {
        let cells = &self.problem.mesh.cells;
        let mut total = T::zero();
        for (c, q) in self.quad.iter().enumerate() {
            if !self.cell_in(c, s) {
                continue;
            }
            let cell = cells[c];
            for (w, l) in q {
                let v = l[0] * u[cell[0]] + l[1] * u[cell[1]] + l[2] * u[cell[2]];
                total += *w * f(v);
            }
        }
        total
    }

    /// `m(B_{sR})`
    pub fn measure(&self, s: T) -> T {
        self.quad
            .iter()
            .enumerate()
            .filter(|(c, _)| self.cell_in(*c, s))
            .map(|(_, q)| q.iter().map(|(w, _)| *w).sum::<T>())
            .sum()
    }

    pub fn mean(&self, u: &[T], s: T) -> T {
        self.integral(u, s, |v| v) / self.measure(s)
    }

    /// `int_{B_{sR}} F*^2(du) dm`
    pub fn dual_energy(&self, u: &[T], s: T) -> T {
        let p = &self.problem;
        (0..p.mesh.cells.len())
            .filter(|&c| self.cell_in(c, s))
            .map(|c| {
                let d = p.mesh.cell_differential(c, u);
                let n = p.dual_cells()[c].norm(&[d[0], d[1]]);
                p.cell_masses()[c] * n * n
            })
            .sum()
    }

    /// `F*(du)` on each cell.
    pub fn cell_dual_norms(&self, u: &[T]) -> Vec<T> {
        let p = &self.problem;
        (0..p.mesh.cells.len())
            .map(|c| {
                let d = p.mesh.cell_differential(c, u);
                p.dual_cells()[c].norm(&[d[0], d[1]])
            })
            .collect()
    }

    /// Harmonic function with boundary values `g(chart point, coordinates)`.
    pub fn solve<F: Fn([T; 2], [T; 2]) -> T>(&self, g: F) -> Result<DiscreteFunction<T>> {
        let mesh = &self.problem.mesh;
        let data = DiscreteFunction::new(
            (0..mesh.node_count())
                .map(|i| if mesh.boundary[i] { g(self.chart[i], mesh.nodes[i]) } else { T::zero() })
                .collect(),
        );
        solve_harmonic(&self.problem.with_boundary_data(data)?)
    }

    /// `Lambda` of the space sampled over the ball.
    pub fn reversibility(&self) -> Result<T> {
        if let Some(l) = self.lambda.get() {
            return Ok(*l);
        }
        let region = SampleRegion::around(&self.config.base_point, self.config.radius);
        let l = uniformity_constants(&self.problem.space.metric, &region)?.lambda_rev;
        Ok(*self.lambda.get_or_init(|| l))
    }

    /// The deterministic trial family, built on first use.
    pub fn family(&self) -> Result<&[TrialFunction<T>]> {
        if let Some(f) = self.family.get() {
            return Ok(f);
        }
        let f = family::build(self)?;
        Ok(self.family.get_or_init(|| f))
    }

    fn stamp(&self, r: InequalityReport) -> InequalityReport {
        r.with("config", self.config.snapshot())
    }
}

fn positive_or_err<T: Real>(u: &DiscreteFunction<T>) -> Result<()> {
    let m = u.min();
    if !(m > T::zero()) {
        return Err(FinslerError::NonPositive(format!("min u = {m}")));
    }
    Ok(())
}
