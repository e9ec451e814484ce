//! One-file experiment documents: named spaces, meshes, Dirichlet problems
//! and suites, cross-referenced by name.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elliptic::DirichletProblem;
use crate::error::{FinslerError, Result};
use crate::field::{ConformalFactor, CovectorField, MatrixField};
use crate::harness::SuiteCheck;
use crate::linalg::Matrix;
use crate::measure::{CertifiedBounds, LogDensity, MeasureSpace};
use crate::mesh::{DiscreteFunction, Mesh};
use crate::minkowski::{MetricDescriptor, MetricVariant};
use crate::scalar::Real;
use crate::spaces;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantName {
    Euclidean,
    Riemannian,
    Randers,
}

/// Matrix field: `"identity"`, a row-major matrix (flat or nested), or a
/// named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Named(String),
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
    Family(MatrixFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixFamily {
    Constant { value: Vec<f64> },
    /// `e^{-c |x|^2} I`
    GaussianConformal { c: f64 },
    /// `4 / (1 - |x|^2)^2 I`
    PoincareDisk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovectorSpec {
    Constant(Vec<f64>),
    Family(CovectorFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CovectorFamily {
    Constant { value: Vec<f64> },
    /// `e^{-c |x|^2 / 2} b0`
    GaussianConformal { c: f64, value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub variant: VariantName,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<CovectorSpec>,
}

fn parse_err<X>(m: impl Into<String>) -> Result<X> {
    Err(FinslerError::Parse(m.into()))
}

impl MatrixSpec {
    fn build<T: Real>(&self, n: usize) -> Result<MatrixField<T>> {
        let constant = |v: &[f64]| -> Result<MatrixField<T>> {
            if v.len() != n * n {
                return Err(FinslerError::DimensionMismatch { expected: n * n, found: v.len() });
            }
            let vals: Vec<T> = v.iter().map(|&x| T::lit(x)).collect();
            Ok(MatrixField::Constant(Matrix::from_row_major(n, &vals)?))
        };
        match self {
            MatrixSpec::Named(s) if s == "identity" => Ok(MatrixField::Identity { n }),
            MatrixSpec::Named(s) => parse_err(format!("unknown matrix `{s}`")),
            MatrixSpec::Flat(v) => constant(v),
            MatrixSpec::Rows(rows) => constant(&rows.concat()),
            MatrixSpec::Family(MatrixFamily::Constant { value }) => constant(value),
            MatrixSpec::Family(MatrixFamily::GaussianConformal { c }) => Ok(MatrixField::Conformal {
                n,
                factor: ConformalFactor::Gaussian { c: T::lit(*c) },
            }),
            MatrixSpec::Family(MatrixFamily::PoincareDisk) => Ok(MatrixField::Conformal {
                n,
                factor: ConformalFactor::PoincareDisk,
            }),
        }
    }

    fn from_field<T: Real>(a: &MatrixField<T>) -> Result<Self> {
        Ok(match a {
            MatrixField::Identity { .. } => MatrixSpec::Named("identity".into()),
            MatrixField::Constant(m) => MatrixSpec::Flat(m.as_slice().iter().map(|v| v.to_f64_lossy()).collect()),
            MatrixField::Conformal { factor: ConformalFactor::Gaussian { c }, .. } => {
                MatrixSpec::Family(MatrixFamily::GaussianConformal { c: c.to_f64_lossy() })
            }
            MatrixField::Conformal { factor: ConformalFactor::PoincareDisk, .. } => MatrixSpec::Family(MatrixFamily::PoincareDisk),
        })
    }
}

impl CovectorSpec {
    fn build<T: Real>(&self, n: usize) -> Result<CovectorField<T>> {
        let vec = |v: &[f64]| -> Result<crate::scalar::Vector<T>> {
            if v.len() != n {
                return Err(FinslerError::DimensionMismatch { expected: n, found: v.len() });
            }
            Ok(v.iter().map(|&x| T::lit(x)).collect())
        };
        match self {
            CovectorSpec::Constant(v) | CovectorSpec::Family(CovectorFamily::Constant { value: v }) => Ok(CovectorField::Constant(vec(v)?)),
            CovectorSpec::Family(CovectorFamily::GaussianConformal { c, value }) => Ok(CovectorField::Conformal {
                value: vec(value)?,
                factor: ConformalFactor::Gaussian { c: T::lit(*c) },
            }),
        }
    }

    fn from_field<T: Real>(b: &CovectorField<T>) -> Result<Self> {
        let v = |x: &[T]| x.iter().map(|c| c.to_f64_lossy()).collect::<Vec<_>>();
        match b {
            CovectorField::Constant(x) => Ok(CovectorSpec::Constant(v(x))),
            CovectorField::Conformal { value, factor: ConformalFactor::Gaussian { c } } => {
                Ok(CovectorSpec::Family(CovectorFamily::GaussianConformal { c: c.to_f64_lossy(), value: v(value) }))
            }
            CovectorField::Conformal { .. } => parse_err("covector family has no document form"),
        }
    }
}

impl MetricSpec {
    pub fn build<T: Real>(&self) -> Result<MetricDescriptor<T>> {
        let n = self.dimension;
        let a = || -> Result<MatrixField<T>> {
            match &self.a {
                Some(a) => a.build(n),
                None => Ok(MatrixField::Identity { n }),
            }
        };
        match self.variant {
            VariantName::Euclidean => {
                if self.a.is_some() || self.b.is_some() {
                    return parse_err("euclidean metrics take neither `a` nor `b`");
                }
                if n < 2 {
                    return Err(FinslerError::InvalidMetric(format!("dimension {n} < 2")));
                }
                Ok(MetricDescriptor::euclidean(n))
            }
            VariantName::Riemannian => {
                if self.b.is_some() {
                    return parse_err("riemannian metrics take no `b`");
                }
                MetricDescriptor::riemannian(a()?)
            }
            VariantName::Randers => {
                let b = self.b.as_ref().ok_or_else(|| FinslerError::Parse("randers metric needs `b`".into()))?;
                MetricDescriptor::randers(a()?, b.build(n)?)
            }
        }
    }

    pub fn from_metric<T: Real>(m: &MetricDescriptor<T>) -> Result<Self> {
        let dimension = m.dimension;
        Ok(match &m.variant {
            MetricVariant::Euclidean => Self { variant: VariantName::Euclidean, dimension, a: None, b: None },
            MetricVariant::Riemannian { a } => Self {
                variant: VariantName::Riemannian,
                dimension,
                a: Some(MatrixSpec::from_field(a)?),
                b: None,
            },
            MetricVariant::Randers { a, b } => Self {
                variant: VariantName::Randers,
                dimension,
                a: Some(MatrixSpec::from_field(a)?),
                b: Some(CovectorSpec::from_field(b)?),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensitySpec {
    Lebesgue,
    RiemannianVolume,
    Gaussian { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    /// Certified `Ric_inf >= K`.
    #[serde(rename = "K")]
    pub ric_inf_lower: f64,
    /// `|tau| <= k`
    #[serde(default)]
    pub k: Option<f64>,
    /// `S >= -alpha`
    #[serde(default)]
    pub alpha: Option<f64>,
}

/// A space: either a built-in name with optional overrides, or a metric
/// with density and certified bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub metric: Option<MetricSpec>,
    #[serde(default)]
    pub log_density: Option<DensitySpec>,
    #[serde(default)]
    pub certified_bounds: Option<BoundsSpec>,
    #[serde(default)]
    pub working_radius: Option<f64>,
}

impl SpaceSpec {
    pub fn build<T: Real>(&self, name: &str) -> Result<MeasureSpace<T>> {
        let mut space = match (&self.builtin, &self.metric) {
            (Some(b), None) => spaces::builtin::<T>(b)?,
            (None, Some(m)) => {
                let cb = self
                    .certified_bounds
                    .ok_or_else(|| FinslerError::Parse(format!("space `{name}` needs certified_bounds")))?;
                MeasureSpace {
                    name: String::new(),
                    metric: m.build()?,
                    log_density: LogDensity::Lebesgue,
                    certified_bounds: bounds(&cb),
                    working_radius: None,
                }
            }
            (Some(_), Some(_)) => return parse_err(format!("space `{name}` sets both builtin and metric")),
            (None, None) => return parse_err(format!("space `{name}` needs builtin or metric")),
        };
        space.name = name.to_string();
        if let Some(d) = &self.log_density {
            space.log_density = match d {
                DensitySpec::Lebesgue => LogDensity::Lebesgue,
                DensitySpec::RiemannianVolume => LogDensity::RiemannianVolume,
                DensitySpec::Gaussian { scale } => LogDensity::Gaussian { scale: T::lit(*scale) },
            };
        }
        if let Some(cb) = &self.certified_bounds {
            space.certified_bounds = bounds(cb);
        }
        if let Some(w) = self.working_radius {
            space.working_radius = Some(T::lit(w));
        }
        Ok(space)
    }
}

fn bounds<T: Real>(cb: &BoundsSpec) -> CertifiedBounds<T> {
    CertifiedBounds {
        ric_inf_lower: T::lit(cb.ric_inf_lower),
        distortion_bound: cb.k.map(T::lit),
        s_curvature_lower: cb.alpha.map(T::lit),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSpec {
    Rectangle { x: [f64; 2], y: [f64; 2], n: [usize; 2] },
    UnitSquare { n: usize },
    Disk { center: [f64; 2], radius: f64, rings: usize, sectors: usize },
    Annulus { center: [f64; 2], r_in: f64, r_out: f64, rings: usize, sectors: usize },
    GeodesicBall { space_ref: String, center: [f64; 2], radius: f64, rings: usize, sectors: usize },
    Explicit { nodes: Vec<[f64; 2]>, cells: Vec<[usize; 3]>, boundary: Vec<bool> },
    /// Node and cell CSV files, relative to the document.
    Csv { nodes: PathBuf, cells: PathBuf },
}

/// Boundary data of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Constant { value: f64 },
    /// `c0 + c1 x1 + c2 x2`
    Affine { coeffs: [f64; 3] },
    /// `x1^2 - x2^2`
    ReZ2,
    /// `2 x1 x2`
    ImZ2,
    Nodal { values: Vec<f64> },
}

impl BoundarySpec {
    pub fn values<T: Real>(&self, mesh: &Mesh<T>) -> Result<DiscreteFunction<T>> {
        let f = |g: &dyn Fn(f64, f64) -> f64| {
            DiscreteFunction::from_fn(mesh, |p| T::lit(g(p[0].to_f64_lossy(), p[1].to_f64_lossy())))
        };
        Ok(match self {
            BoundarySpec::Constant { value } => DiscreteFunction::constant(mesh, T::lit(*value)),
            BoundarySpec::Affine { coeffs: [c0, c1, c2] } => {
                DiscreteFunction::from_fn(mesh, |p| T::lit(*c0) + T::lit(*c1) * p[0] + T::lit(*c2) * p[1])
            }
            BoundarySpec::ReZ2 => f(&|x, y| x * x - y * y),
            BoundarySpec::ImZ2 => f(&|x, y| 2.0 * x * y),
            BoundarySpec::Nodal { values } => {
                let u = DiscreteFunction::new(values.iter().map(|&v| T::lit(v)).collect());
                mesh.check_function(&u)?;
                u
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Nodal(Vec<f64>),
    Constant { constant: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub space_ref: String,
    pub mesh_ref: String,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub f: Option<SourceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSpec {
    pub samples: usize,
    pub region_radius: f64,
    pub resolution: usize,
    pub tol: f64,
}

impl Default for AuditSpec {
    fn default() -> Self {
        Self { samples: 1000, region_radius: 0.5, resolution: 90, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolumeSpec {
    /// Largest radius of the polar density table.
    pub r_max: f64,
    /// Radial segments of the table.
    pub segments: usize,
    /// Radii whose ball measure is reported.
    pub radii: Vec<f64>,
    /// `(r1, r2)` pairs for the volume-ratio checks.
    pub pairs: Vec<[f64; 2]>,
    /// Query points (offsets from the base point) for the Laplacian
    /// comparison; `None` uses Halton points in the ball of `query_radius`.
    pub queries: Option<Vec<[f64; 2]>>,
    pub query_radius: f64,
    pub query_count: usize,
    pub tol: f64,
}

impl Default for VolumeSpec {
    fn default() -> Self {
        Self {
            r_max: 1.0,
            segments: 64,
            radii: vec![0.5, 1.0],
            pairs: vec![[0.3, 0.6]],
            queries: None,
            query_radius: 0.6,
            query_count: 8,
            tol: crate::comparison::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InequalitySpec {
    pub radius: f64,
    /// `None` runs every check applicable to the space.
    pub checks: Option<Vec<SuiteCheck>>,
    pub delta: f64,
    pub delta_prime: f64,
    pub rho: f64,
    pub p: f64,
    pub a: f64,
    pub tol: f64,
    pub rings: usize,
    pub sectors: usize,
    pub probe_radii: Vec<f64>,
    pub scaling_radii: Option<Vec<f64>>,
}

impl Default for InequalitySpec {
    fn default() -> Self {
        Self {
            radius: 1.0,
            checks: None,
            delta: 0.5,
            delta_prime: 0.75,
            rho: 0.5,
            p: 2.0,
            a: 1.0,
            tol: crate::comparison::DEFAULT_TOL,
            rings: crate::harness::DEFAULT_RINGS,
            sectors: crate::harness::DEFAULT_SECTORS,
            probe_radii: vec![1.0, 2.0, 4.0],
            scaling_radii: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSpec {
    /// Spaces the suite runs on; empty means every declared space.
    pub spaces: Vec<String>,
    /// Problems solved by `solve-harmonic`; empty means every problem.
    pub problems: Vec<String>,
    pub base_point: [f64; 2],
    pub seed: Option<u64>,
    /// Advisory wall-clock budget recorded in the run manifest.
    pub budget_seconds: Option<f64>,
    pub audit: AuditSpec,
    pub volume: VolumeSpec,
    pub inequalities: InequalitySpec,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            spaces: Vec::new(),
            problems: Vec::new(),
            base_point: [0.0, 0.0],
            seed: None,
            budget_seconds: None,
            audit: AuditSpec::default(),
            volume: VolumeSpec::default(),
            inequalities: InequalitySpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub spaces: BTreeMap<String, SpaceSpec>,
    pub meshes: BTreeMap<String, MeshSpec>,
    pub problems: BTreeMap<String, ProblemSpec>,
    pub suites: BTreeMap<String, SuiteSpec>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub root: PathBuf,
}

impl LabConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FinslerError::Parse(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for (name, p) in &cfg.problems {
            if !cfg.spaces.contains_key(&p.space_ref) {
                return parse_err(format!("problem `{name}` refers to unknown space `{}`", p.space_ref));
            }
            if !cfg.meshes.contains_key(&p.mesh_ref) {
                return parse_err(format!("problem `{name}` refers to unknown mesh `{}`", p.mesh_ref));
            }
        }
        for (name, s) in &cfg.suites {
            for r in &s.spaces {
                if !cfg.spaces.contains_key(r) {
                    return parse_err(format!("suite `{name}` refers to unknown space `{r}`"));
                }
            }
            for r in &s.problems {
                if !cfg.problems.contains_key(r) {
                    return parse_err(format!("suite `{name}` refers to unknown problem `{r}`"));
                }
            }
        }
        Ok(cfg)
    }

    pub fn space<T: Real>(&self, name: &str) -> Result<MeasureSpace<T>> {
        self.spaces
            .get(name)
            .ok_or_else(|| FinslerError::Parse(format!("unknown space `{name}`")))?
            .build(name)
    }

    pub fn mesh<T: Real>(&self, name: &str) -> Result<Mesh<T>> {
        let spec = self.meshes.get(name).ok_or_else(|| FinslerError::Parse(format!("unknown mesh `{name}`")))?;
        let l = T::lit;
        let pt = |p: &[f64; 2]| [l(p[0]), l(p[1])];
        match spec {
            MeshSpec::Rectangle { x, y, n } => Mesh::rectangle(l(x[0]), l(x[1]), l(y[0]), l(y[1]), n[0], n[1]),
            MeshSpec::UnitSquare { n } => Mesh::unit_square(*n),
            MeshSpec::Disk { center, radius, rings, sectors } => Mesh::disk(pt(center), l(*radius), *rings, *sectors),
            MeshSpec::Annulus { center, r_in, r_out, rings, sectors } => Mesh::annulus(pt(center), l(*r_in), l(*r_out), *rings, *sectors),
            MeshSpec::GeodesicBall { space_ref, center, radius, rings, sectors } => {
                Mesh::geodesic_ball(&self.space(space_ref)?, pt(center), l(*radius), *rings, *sectors)
            }
            MeshSpec::Explicit { nodes, cells, boundary } => Mesh::new(nodes.iter().map(pt).collect(), cells.clone(), boundary.clone()),
            MeshSpec::Csv { nodes, cells } => {
                let open = |p: &PathBuf| std::fs::File::open(self.root.join(p)).map_err(|e| FinslerError::Parse(format!("{}: {e}", p.display())));
                Mesh::read_csv(open(nodes)?, open(cells)?)
            }
        }
    }

    pub fn problem<T: Real>(&self, name: &str) -> Result<DirichletProblem<T>> {
        let spec = self.problems.get(name).ok_or_else(|| FinslerError::Parse(format!("unknown problem `{name}`")))?;
        let space = self.space(&spec.space_ref)?;
        let mesh = self.mesh(&spec.mesh_ref)?;
        let data = spec.boundary.values(&mesh)?;
        let p = DirichletProblem::new(space, mesh, data)?;
        match &spec.f {
            None => Ok(p),
            Some(SourceSpec::Nodal(v)) => p.with_source(DiscreteFunction::new(v.iter().map(|&x| T::lit(x)).collect())),
            Some(SourceSpec::Constant { constant }) => {
                let f = DiscreteFunction::constant(&p.mesh, T::lit(*constant));
                p.with_source(f)
            }
        }
    }

    /// Suites selected by name, or all of them in name order.
    pub fn select_suites(&self, name: Option<&str>) -> Result<Vec<(&str, &SuiteSpec)>> {
        match name {
            Some(n) => {
                let (k, s) = self.suites.get_key_value(n).ok_or_else(|| FinslerError::Parse(format!("unknown suite `{n}`")))?;
                Ok(vec![(k.as_str(), s)])
            }
            None if self.suites.is_empty() => parse_err("document declares no suites"),
            None => Ok(self.suites.iter().map(|(k, v)| (k.as_str(), v)).collect()),
        }
    }

    /// Spaces a suite runs on.
    pub fn suite_spaces<'a>(&'a self, suite: &'a SuiteSpec) -> Vec<&'a str> {
        if suite.spaces.is_empty() {
            self.spaces.keys().map(String::as_str).collect()
        } else {
            suite.spaces.iter().map(String::as_str).collect()
        }
    }

    pub fn suite_problems<'a>(&'a self, suite: &'a SuiteSpec) -> Vec<&'a str> {
        if suite.problems.is_empty() {
            self.problems.keys().map(String::as_str).collect()
        } else {
            suite.problems.iter().map(String::as_str).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_documents_round_trip() {
        let text = r#"{"variant": "randers", "dimension": 2, "a": "identity", "b": [0.5, 0.0]}"#;
        let spec: MetricSpec = serde_json::from_str(text).unwrap();
        let m: MetricDescriptor<f64> = spec.build().unwrap();
        assert_eq!(m, MetricDescriptor::randers_constant(&[0.5, 0.0]).unwrap());
        let back = MetricSpec::from_metric(&m).unwrap();
        assert_eq!(back.build::<f64>().unwrap(), m);
        let again: MetricSpec = serde_json::from_str(&serde_json::to_string(&back).unwrap()).unwrap();
        assert_eq!(again, back);
    }

    #[test]
    fn matrix_forms_agree() {
        let flat: MetricSpec = serde_json::from_str(r#"{"variant": "riemannian", "dimension": 2, "a": [1, 0, 0, 4]}"#).unwrap();
        let rows: MetricSpec = serde_json::from_str(r#"{"variant": "riemannian", "dimension": 2, "a": [[1, 0], [0, 4]]}"#).unwrap();
        let fam: MetricSpec =
            serde_json::from_str(r#"{"variant": "riemannian", "dimension": 2, "a": {"family": "constant", "value": [1, 0, 0, 4]}}"#).unwrap();
        let m = flat.build::<f64>().unwrap();
        assert_eq!(rows.build::<f64>().unwrap(), m);
        assert_eq!(fam.build::<f64>().unwrap(), m);
    }

    #[test]
    fn conformal_families_parse() {
        let s: MetricSpec = serde_json::from_str(
            r#"{"variant": "randers", "dimension": 2, "a": {"family": "gaussian-conformal", "c": 0.2},
                "b": {"family": "gaussian-conformal", "c": 0.2, "value": [0.3, 0.0]}}"#,
        )
        .unwrap();
        let m = s.build::<f64>().unwrap();
        assert!(!m.is_constant_coefficient());
        assert_eq!(MetricSpec::from_metric(&m).unwrap(), s);
        let h: MetricSpec = serde_json::from_str(r#"{"variant": "riemannian", "dimension": 2, "a": {"family": "poincare-disk"}}"#).unwrap();
        assert_eq!(h.build::<f64>().unwrap().domain_radius(), Some(1.0));
    }

    #[test]
    fn invalid_drift_is_an_invalid_metric() {
        let s: MetricSpec = serde_json::from_str(r#"{"variant": "randers", "dimension": 2, "a": "identity", "b": [1.2, 0.0]}"#).unwrap();
        assert!(matches!(s.build::<f64>(), Err(FinslerError::InvalidMetric(_))));
        let s: MetricSpec = serde_json::from_str(r#"{"variant": "randers", "dimension": 2, "b": [1.0, 0.0, 0.0]}"#).unwrap();
        assert!(matches!(s.build::<f64>(), Err(FinslerError::DimensionMismatch { .. })));
    }

    #[test]
    fn documents_resolve_references() {
        let doc = r#"{
            "spaces": {"flat": {"builtin": "flat"},
                       "hyp": {"builtin": "hyperbolic", "certified_bounds": {"K": -1, "k": 0.02}},
                       "r": {"metric": {"variant": "randers", "dimension": 2, "b": [0.5, 0]},
                             "log_density": {"gaussian": {"scale": 1}}, "certified_bounds": {"K": 0}}},
            "meshes": {"sq": {"kind": "unit-square", "n": 4}},
            "problems": {"p": {"space_ref": "flat", "mesh_ref": "sq", "boundary": {"profile": "affine", "coeffs": [1, 2, 3]}}},
            "suites": {"s": {"spaces": ["flat"]}}
        }"#;
        let cfg = LabConfig::from_json(doc).unwrap();
        let hyp = cfg.space::<f64>("hyp").unwrap();
        assert_eq!(hyp.certified_bounds.distortion_bound, Some(0.02));
        assert_eq!(hyp.certified_bounds.s_curvature_lower, None);
        let r = cfg.space::<f64>("r").unwrap();
        assert_eq!(r.log_density, LogDensity::Gaussian { scale: 1.0 });
        let p = cfg.problem::<f64>("p").unwrap();
        assert_eq!(p.boundary_data.values[0], 1.0);
        assert_eq!(cfg.select_suites(None).unwrap().len(), 1);
        assert!(cfg.select_suites(Some("nope")).is_err());
        assert!(LabConfig::from_json(r#"{"spaces": {"x": {"bogus": 1}}}"#).is_err());
    }

    #[test]
    fn degenerate_explicit_mesh_is_rejected() {
        let doc = r#"{"meshes": {"bad": {"kind": "explicit", "nodes": [[0, 0], [1, 0], [2, 0]], "cells": [[0, 1, 2]],
                      "boundary": [true, true, true]}}}"#;
        let cfg = LabConfig::from_json(doc).unwrap();
        assert!(matches!(cfg.mesh::<f64>("bad"), Err(FinslerError::DegenerateMesh(_))));
    }
}
