//! Enrichment loops (EGO, SEGO, SEGOMOE, embedded EGO), their run records
//! and NSGA-II post-processing.

mod inner;
mod nsga2;
mod run;

use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionConfig;
use crate::error::{Error, Result};
use crate::gp::FitOptions;
use crate::metrics::pareto_indices;
use crate::pls::{AdaptivePlsConfig, EmbeddingKind};
use crate::space::MixedPoint;

pub use inner::{maximize, InnerSearch};
pub use nsga2::{nsga2, nsga2_postprocess, Nsga2Options};
pub use run::{run_ego, run_embedded, run_sego, run_segomoe_mo};

/// `a_i ≤ b_i` for every component.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}

/// [`dominates`] with `a ≠ b`.
pub fn dominates_strict(a: &[f64], b: &[f64]) -> bool {
    dominates(a, b) && a != b
}

/// Linear embedding used by [`run_embedded`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub kind: EmbeddingKind,
    pub d_e: usize,
    /// Matrix of the `Given` kind, `d_e` rows of `n` entries.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
}

/// Settings of one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub doe_size: usize,
    /// Total number of problem evaluations, DoE included.
    pub budget: usize,
    pub inner: InnerSearch,
    pub seed: u64,
    /// Feasibility tolerance on constraint values.
    pub tolerance: f64,
    pub acquisition: AcquisitionConfig,
    #[serde(default)]
    pub embedding: Option<EmbeddingConfig>,
    #[serde(default)]
    pub adaptive_pls: Option<AdaptivePlsConfig>,
    /// Surrogate fitting options; the seed is derived per iteration.
    pub fit: FitOptions,
    /// Multi-objective runs only.
    pub nsga2: Nsga2Options,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            doe_size: 10,
            budget: 50,
            inner: InnerSearch::default(),
            seed: 0,
            tolerance: 1e-4,
            acquisition: AcquisitionConfig::default(),
            embedding: None,
            adaptive_pls: None,
            fit: FitOptions {
                n_starts: 3,
                ..Default::default()
            },
            nsga2: Nsga2Options::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.doe_size == 0 {
            return Err(Error::Config("DoE size must be positive".into()));
        }
        if self.budget < self.doe_size {
            return Err(Error::Config(format!(
                "budget {} is smaller than the DoE size {}",
                self.budget, self.doe_size
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("constraint tolerance must be positive".into()));
        }
        if let Some(a) = &self.adaptive_pls {
            a.validate()?;
        }
        self.inner.validate()?;
        self.acquisition.validate()
    }
}

/// One problem evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// 0 for the DoE, then the infill iteration number.
    pub iteration: usize,
    pub point: MixedPoint,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub feasible: bool,
    /// Evaluation error message, if the evaluation failed.
    pub error: Option<String>,
    pub wall_ms: f64,
}

impl EvalRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub records: Vec<EvalRecord>,
    /// Best feasible objective after each evaluation (single objective).
    pub best: Vec<Option<f64>>,
    pub seed: u64,
    /// Iterations where no surrogate-feasible candidate existed.
    pub fallback_iterations: Vec<usize>,
    /// Iterations where the infill had to be moved off a known point.
    pub jitter_iterations: Vec<usize>,
}

impl RunHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Best feasible objective value and its record.
    pub fn best_record(&self) -> Option<&EvalRecord> {
        self.records
            .iter()
            .filter(|r| r.ok() && r.feasible && r.f.len() == 1)
            .fold(None, |acc: Option<&EvalRecord>, r| match acc {
                Some(a) if a.f[0] <= r.f[0] => Some(a),
                _ => Some(r),
            })
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best.last().copied().flatten()
    }

    /// Objective vectors of successful feasible evaluations among the first
    /// `upto` records.
    pub fn feasible_objectives(&self, upto: usize) -> Vec<Vec<f64>> {
        self.records
            .iter()
            .take(upto)
            .filter(|r| r.ok() && r.feasible)
            .map(|r| r.f.clone())
            .collect()
    }
}

/// Nondominated feasible evaluations and the surrogate-predicted front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    pub ps: Vec<MixedPoint>,
    pub pf: Vec<Vec<f64>>,
    pub predicted_ps: Vec<MixedPoint>,
    pub predicted_pf: Vec<Vec<f64>>,
}

impl ParetoArchive {
    /// Archive of the feasible nondominated records of `history`.
    pub fn from_history(history: &RunHistory) -> Self {
        let recs: Vec<&EvalRecord> = history.records.iter().filter(|r| r.ok() && r.feasible).collect();
        let f: Vec<Vec<f64>> = recs.iter().map(|r| r.f.clone()).collect();
        let idx = pareto_indices(&f);
        ParetoArchive {
            ps: idx.iter().map(|&i| recs[i].point.clone()).collect(),
            pf: idx.iter().map(|&i| f[i].clone()).collect(),
            predicted_ps: Vec::new(),
            predicted_pf: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[0.0, 0.0], &[1.0, 1.0]));
        assert!(!dominates(&[0.0, 1.0], &[1.0, 0.0]));
        assert!(!dominates(&[1.0, 0.0], &[0.0, 1.0]));
        assert!(dominates(&[1.0, 1.0], &[1.0, 1.0]));
        assert!(!dominates_strict(&[1.0, 1.0], &[1.0, 1.0]));
        assert!(dominates_strict(&[0.0, 1.0], &[1.0, 1.0]));
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        assert!(c.validate().is_ok());
        c.budget = 5;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.budget = 50;
        c.tolerance = 0.0;
        assert!(c.validate().is_err());
    }
}
