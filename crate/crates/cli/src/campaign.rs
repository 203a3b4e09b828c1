//! Campaign configuration and execution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mixed_ego::acquisition::hypervolume;
use mixed_ego::metrics::{igd_plus, pareto_filter};
use mixed_ego::optimizer::{run_ego, run_embedded, run_sego, run_segomoe_mo, OptimizerConfig, ParetoArchive, RunHistory};
use mixed_ego::problems::{self, Problem};
use mixed_ego::VarKind;

use crate::summary::summarize;

/// Points sampled from analytic fronts for IGD+.
pub const FRONT_POINTS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Ego,
    Sego,
    Segomoe,
    Embedded,
}

/// A named algorithm variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    pub kind: AlgorithmKind,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

/// Problems × algorithms × seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub problems: Vec<String>,
    #[serde(default)]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Explicit seeds, one per repetition; overrides `seed_base`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    /// Hypervolume reference point per problem name.
    #[serde(default)]
    pub hv_reference: BTreeMap<String, Vec<f64>>,
}

fn one() -> usize {
    1
}

/// Campaign failure, mapped to the process exit code.
#[derive(Debug)]
pub enum CampaignError {
    Config(String),
    Runtime(String),
}

impl CampaignError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CampaignError::Config(_) => 2,
            CampaignError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CampaignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CampaignError::Config(m) => write!(f, "configuration error: {m}"),
            CampaignError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CampaignError {}

fn io_err(path: &Path, e: impl fmt::Display) -> CampaignError {
    CampaignError::Runtime(format!("{}: {e}", path.display()))
}

/// Campaign manifest: the resolved configuration plus provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignManifest {
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub config: CampaignConfig,
}

/// Per-run manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub campaign: String,
    pub problem: String,
    pub algorithm: AlgorithmSpec,
    pub seed: u64,
    pub csv: String,
    pub status: String,
    pub error: Option<String>,
    pub n_evaluations: usize,
    pub best_feasible: Option<f64>,
    pub fallback_iterations: Vec<usize>,
    pub jitter_iterations: Vec<usize>,
    pub archive: Option<ParetoArchive>,
}

/// Outcome of [`run_campaign`].
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub runs: usize,
    pub failed: usize,
    pub out: PathBuf,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Reads a campaign config, or the config stored in a campaign manifest.
pub fn load_config(path: &Path) -> Result<CampaignConfig, CampaignError> {
    let text = fs::read_to_string(path).map_err(|e| CampaignError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<CampaignConfig, CampaignError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))?;
    let inner = match value.get("config") {
        Some(c) if value.get("tool").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| CampaignError::Config(e.to_string()))
}

impl CampaignConfig {
    /// Seeds of the repetitions.
    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.repetitions as u64).map(|r| self.seed_base + r).collect(),
        }
    }

    /// Checks names, seeds and algorithm/problem compatibility.
    pub fn validate(&self) -> Result<Vec<Problem>, CampaignError> {
        let cfg = |m: String| CampaignError::Config(m);
        if self.repetitions == 0 {
            return Err(cfg("repetitions must be at least 1".into()));
        }
        let seeds = self.seed_list();
        if seeds.len() != self.repetitions {
            return Err(cfg(format!("{} seeds given for {} repetitions", seeds.len(), self.repetitions)));
        }
        if seeds.iter().collect::<BTreeSet<_>>().len() != seeds.len() {
            return Err(cfg("seeds must be distinct".into()));
        }
        let mut names = BTreeSet::new();
        for a in &self.algorithms {
            if a.name.is_empty() || a.name.contains(['/', '\\']) || !names.insert(a.name.as_str()) {
                return Err(cfg(format!("algorithm name `{}` is empty, repeated or not a valid file name", a.name)));
            }
            a.optimizer.validate().map_err(|e| cfg(format!("algorithm {}: {e}", a.name)))?;
        }
        let problems = self
            .problems
            .iter()
            .map(|n| problems::by_name(n).map_err(|e| cfg(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        for p in &problems {
            for a in &self.algorithms {
                let ok = match a.kind {
                    AlgorithmKind::Ego => p.n_obj == 1 && !p.is_constrained(),
                    AlgorithmKind::Sego => p.n_obj == 1,
                    AlgorithmKind::Segomoe => p.n_obj <= 2,
                    AlgorithmKind::Embedded => p.n_obj == 1 && p.space.is_continuous() && a.optimizer.embedding.is_some(),
                };
                if !ok {
                    return Err(cfg(format!("algorithm {} ({:?}) cannot run problem {}", a.name, a.kind, p.name)));
                }
            }
        }
        Ok(problems)
    }
}

/// File stem of one run.
pub fn run_stem(problem: &str, algorithm: &str, seed: u64) -> String {
    format!("{problem}__{algorithm}__seed{seed}")
}

/// Runs every (problem, algorithm, seed) cell with up to `jobs` threads,
/// writes per-run CSV and manifest files under `out/runs`, the campaign
/// manifest, and the summary files.
pub fn run_campaign(config: &CampaignConfig, out: &Path, jobs: usize) -> Result<CampaignReport, CampaignError> {
    let problems = config.validate()?;
    let runs_dir = out.join("runs");
    fs::create_dir_all(&runs_dir).map_err(|e| io_err(&runs_dir, e))?;
    let mut resolved = config.clone();
    resolved.seeds = Some(config.seed_list());
    let manifest = CampaignManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        created_unix: now_unix(),
        config: resolved,
    };
    write_json(&out.join("manifest.json"), &manifest)?;

    let mut cells = Vec::new();
    for p in &problems {
        for a in &config.algorithms {
            for s in config.seed_list() {
                cells.push((p, a, s));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CampaignError::Runtime(e.to_string()))?;
    let results: Vec<Result<bool, CampaignError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(p, a, s)| run_cell(config, p, a, *s, &runs_dir))
            .collect()
    });
    let mut failed = 0;
    for r in results {
        if !r? {
            failed += 1;
        }
    }
    summarize(out, &mixed_ego::metrics::DEFAULT_TAUS).map_err(|e| CampaignError::Runtime(e.to_string()))?;
    Ok(CampaignReport {
        runs: cells.len(),
        failed,
        out: out.to_path_buf(),
    })
}

/// Runs one cell; `Ok(false)` when the optimizer failed (recorded in the
/// manifest).
fn run_cell(config: &CampaignConfig, problem: &Problem, algo: &AlgorithmSpec, seed: u64, dir: &Path) -> Result<bool, CampaignError> {
    let mut spec = algo.clone();
    spec.optimizer.seed = seed;
    let cfg = &spec.optimizer;
    let outcome: mixed_ego::Result<(RunHistory, Option<ParetoArchive>)> = match algo.kind {
        AlgorithmKind::Ego => run_ego(problem, cfg).map(|h| (h, None)),
        AlgorithmKind::Sego => run_sego(problem, cfg).map(|h| (h, None)),
        AlgorithmKind::Embedded => run_embedded(problem, cfg).map(|h| (h, None)),
        AlgorithmKind::Segomoe => run_segomoe_mo(problem, cfg).map(|(h, a)| (h, (problem.n_obj > 1).then_some(a))),
    };
    let stem = run_stem(&problem.name, &algo.name, seed);
    let csv_name = format!("{stem}.csv");
    let (status, error, history, archive) = match outcome {
        Ok((h, a)) => ("ok", None, Some(h), a),
        Err(e) => {
            log::error!("{stem}: {e}");
            ("failed", Some(e.to_string()), None, None)
        }
    };
    if let Some(h) = &history {
        let reference = hv_reference(config, problem);
        write_history_csv(&dir.join(&csv_name), problem, h, reference.as_deref())?;
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        created_unix: now_unix(),
        campaign: config.name.clone(),
        problem: problem.name.clone(),
        algorithm: spec.clone(),
        seed,
        csv: if history.is_some() { csv_name } else { String::new() },
        status: status.into(),
        error,
        n_evaluations: history.as_ref().map_or(0, |h| h.len()),
        best_feasible: history.as_ref().and_then(|h| h.best_value()),
        fallback_iterations: history.as_ref().map_or_else(Vec::new, |h| h.fallback_iterations.clone()),
        jitter_iterations: history.as_ref().map_or_else(Vec::new, |h| h.jitter_iterations.clone()),
        archive,
    };
    write_json(&dir.join(format!("{stem}.json")), &manifest)?;
    Ok(history.is_some())
}

/// Reference point for hypervolume columns: the configured one, else the
/// analytic front's nadir plus 10% of its range.
pub fn hv_reference(config: &CampaignConfig, problem: &Problem) -> Option<Vec<f64>> {
    if problem.n_obj != 2 {
        return None;
    }
    if let Some(r) = config.hv_reference.get(&problem.name) {
        return Some(r.clone());
    }
    let front = (problem.front?)(FRONT_POINTS);
    Some(
        (0..2)
            .map(|j| {
                let (lo, hi) = front.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[j]), h.max(p[j])));
                hi + 0.1 * (hi - lo)
            })
            .collect(),
    )
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CampaignError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Names of the relaxed coordinates of a problem's space.
pub fn encoded_columns(problem: &Problem) -> Vec<String> {
    let mut cols = Vec::new();
    for v in problem.space.variables() {
        match &v.kind {
            VarKind::Categorical { levels } => cols.extend(levels.iter().map(|l| format!("x_{}={l}", v.name))),
            _ => cols.push(format!("x_{}", v.name)),
        }
    }
    cols
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// One row per evaluation.
pub fn write_history_csv(path: &Path, problem: &Problem, h: &RunHistory, hv_ref: Option<&[f64]>) -> Result<(), CampaignError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    let mut header: Vec<String> = ["iteration", "eval_count", "best_feasible", "igd_plus", "hv", "wall_ms", "feasible", "error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(encoded_columns(problem));
    header.extend((0..problem.n_obj).map(|j| format!("f_{j}")));
    header.extend((0..problem.n_ineq).map(|j| format!("g_{j}")));
    header.extend((0..problem.n_eq).map(|j| format!("h_{j}")));
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    let front = if problem.n_obj == 2 { problem.front.map(|f| f(FRONT_POINTS)) } else { None };
    let mut feasible_f: Vec<Vec<f64>> = Vec::new();
    for (k, r) in h.records.iter().enumerate() {
        if r.ok() && r.feasible {
            feasible_f.push(r.f.clone());
        }
        let igd = match (&front, feasible_f.is_empty()) {
            (Some(z), false) => igd_plus(&pareto_filter(&feasible_f), z, false).ok(),
            _ => None,
        };
        let hv = match (hv_ref, feasible_f.is_empty()) {
            (Some(r), false) => hypervolume(&feasible_f, r).ok(),
            _ => None,
        };
        let mut row = vec![
            r.iteration.to_string(),
            (k + 1).to_string(),
            fmt_opt(h.best[k]),
            fmt_opt(igd),
            fmt_opt(hv),
            format!("{:.3}", r.wall_ms),
            (r.feasible as u8).to_string(),
            r.error.clone().unwrap_or_default(),
        ];
        match problem.space.encode(&r.point) {
            Ok(x) => row.extend(x.iter().map(|v| v.to_string())),
            Err(_) => row.extend(std::iter::repeat_n(String::new(), problem.space.relaxed_dimension())),
        }
        let cell = |v: &[f64], n: usize| -> Vec<String> {
            if v.len() == n {
                v.iter().map(|x| x.to_string()).collect()
            } else {
                vec![String::new(); n]
            }
        };
        row.extend(cell(&r.f, problem.n_obj));
        row.extend(cell(&r.g, problem.n_ineq));
        row.extend(cell(&r.h, problem.n_eq));
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_and_manifest() {
        let c = parse_config(r#"{"name": "t", "problems": ["quadratic"], "algorithms": [{"name": "e", "kind": "ego", "optimizer": {"doe_size": 3, "budget": 5}}], "repetitions": 2}"#).unwrap();
        assert_eq!(c.seed_list(), vec![0, 1]);
        assert_eq!(c.algorithms[0].optimizer.budget, 5);
        let m = CampaignManifest {
            tool: "x".into(),
            version: "0".into(),
            created_unix: 1,
            config: c.clone(),
        };
        assert_eq!(parse_config(&serde_json::to_string(&m).unwrap()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"problems": ["nope"]}"#,
            r#"{"algorithms": [{"name": "a", "kind": "bogus"}]}"#,
            r#"{"repetitions": 0}"#,
            r#"{"repetitions": 2, "seeds": [1, 1]}"#,
            r#"{"problems": ["g24"], "algorithms": [{"name": "a", "kind": "ego"}]}"#,
            r#"{"unknown_field": 1}"#,
        ];
        for b in bad {
            let r = parse_config(b).and_then(|c| c.validate().map(|_| ()));
            assert!(matches!(r, Err(CampaignError::Config(_))), "{b}");
        }
    }
}
