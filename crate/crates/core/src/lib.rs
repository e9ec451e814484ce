pub mod error;
pub mod field;
pub mod linalg;
pub mod minkowski;
pub mod sampling;
pub mod scalar;
pub mod measure;
pub mod mesh;
pub mod spaces;
pub mod report;
pub mod comparison;
pub mod elliptic;
pub mod harness;
pub mod audit;
pub mod config;

pub use error::{FinslerError, Result};
pub use report::{InequalityReport, Status};
pub use scalar::Real;

// f64 instantiations of the generic types
pub type Metric = minkowski::MetricDescriptor<f64>;
pub type Space = measure::MeasureSpace<f64>;
pub type Mesh = mesh::Mesh<f64>;
pub type Function = mesh::DiscreteFunction<f64>;
pub type Problem = elliptic::DirichletProblem<f64>;
pub type DensityTable = comparison::PolarDensityTable<f64>;
pub type Profile = comparison::ComparisonProfile<f64>;
pub type Ball = harness::Ball<f64>;
pub type Experiment = harness::ExperimentConfig<f64>;
pub type Constants = minkowski::UniformityConstants<f64>;
