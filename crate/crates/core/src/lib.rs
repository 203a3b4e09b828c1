//! Surrogate-based global optimization over mixed continuous, integer,
//! categorical and hierarchical design spaces.
//!
//! The crate provides kriging models with mixed-categorical and hierarchical
//! kernels, partial-least-squares hyperparameter reduction, infill criteria,
//! the EGO / SEGO / SEGOMOE enrichment loops, analytic benchmark problems and
//! quality metrics.

pub mod acquisition;
pub mod error;
pub mod gp;
pub mod kernels;
pub mod metrics;
pub mod optimizer;
pub mod pls;
pub mod problems;
pub mod simplex;
pub mod space;

pub use error::{Error, Result};
pub use gp::{FitOptions, GpModel, Prediction};
pub use kernels::{CategoricalKind, DecreedMode, Kernel, KernelConfig, KernelOptions};
pub use optimizer::{OptimizerConfig, ParetoArchive, RunHistory};
pub use problems::Problem;
pub use space::{DesignSpace, Doe, MixedPoint, Value, VarKind, Variable};
