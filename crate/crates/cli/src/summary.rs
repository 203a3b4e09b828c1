//! Campaign summaries recomputed from the per-run CSV files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use mixed_ego::metrics::{data_profile, igd_plus, pareto_filter, Trace};
use mixed_ego::problems;

use crate::campaign::{RunManifest, FRONT_POINTS};

/// Counts written to `summary_meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub runs: usize,
    pub failed_runs: usize,
    pub warnings: usize,
    pub skipped_files: Vec<String>,
    pub taus: Vec<f64>,
}

/// Traces of one successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTraces {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub best: Trace,
    pub igd: Trace,
    /// Feasible objective vectors in evaluation order.
    pub objectives: Vec<Vec<f64>>,
    /// Evaluations in the initial design.
    pub doe_len: usize,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn stats(values: &[Option<f64>]) -> (usize, Option<[f64; 3]>) {
    let mut v: Vec<f64> = values.iter().flatten().copied().collect();
    if v.is_empty() {
        return (0, None);
    }
    v.sort_by(f64::total_cmp);
    (v.len(), Some([quantile(&v, 0.5), quantile(&v, 0.25), quantile(&v, 0.75)]))
}

/// Reads the traces of a run CSV.
pub fn read_traces(path: &Path, n_obj: usize, front: Option<&[Vec<f64>]>) -> Result<(Trace, Trace, Vec<Vec<f64>>, usize)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).with_context(|| format!("missing column {name}"));
    let feasible_col = col("feasible")?;
    let error_col = col("error")?;
    let iter_col = col("iteration")?;
    let f_cols = (0..n_obj).map(|j| col(&format!("f_{j}"))).collect::<Result<Vec<_>>>()?;
    let (mut best, mut igd, mut objectives) = (Vec::new(), Vec::new(), Vec::new());
    let mut current: Option<f64> = None;
    let mut doe_len = 0;
    for row in rdr.records() {
        let row = row?;
        if row[iter_col].parse::<usize>()? == 0 {
            doe_len += 1;
        }
        let ok = row[error_col].is_empty() && &row[feasible_col] == "1";
        if ok {
            let f = f_cols.iter().map(|&c| row[c].parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>()?;
            if n_obj == 1 && current.is_none_or(|c| f[0] < c) {
                current = Some(f[0]);
            }
            objectives.push(f);
        }
        best.push(if n_obj == 1 { current } else { None });
        igd.push(match front {
            Some(z) if !objectives.is_empty() => Some(igd_plus(&pareto_filter(&objectives), z, false)?),
            _ => None,
        });
    }
    Ok((best, igd, objectives, doe_len))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Recomputes best-so-far and IGD+ traces from `dir/runs`, then writes
/// `summary.csv`, one `data_profile_tau<τ>.csv` per tolerance,
/// `pareto.csv`, `igd.csv` and `summary_meta.json` into `dir`.
pub fn summarize(dir: &Path, taus: &[f64]) -> Result<SummaryReport> {
    let runs_dir = dir.join("runs");
    let mut manifests: Vec<_> = match fs::read_dir(&runs_dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(_) => Vec::new(),
    };
    manifests.sort();
    let mut report = SummaryReport {
        runs: 0,
        failed_runs: 0,
        warnings: 0,
        skipped_files: Vec::new(),
        taus: taus.to_vec(),
    };
    let mut runs: Vec<(RunTraces, RunManifest)> = Vec::new();
    let mut fronts: BTreeMap<String, Option<Vec<Vec<f64>>>> = BTreeMap::new();
    let mut optima: BTreeMap<String, (usize, Option<f64>)> = BTreeMap::new();
    for path in manifests {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let parsed = fs::read_to_string(&path)
            .map_err(anyhow::Error::from)
            .and_then(|t| serde_json::from_str::<RunManifest>(&t).map_err(anyhow::Error::from));
        let m = match parsed {
            Ok(m) => m,
            Err(e) => {
                log::warn!("skipping {name}: {e}");
                report.warnings += 1;
                report.skipped_files.push(name);
                continue;
            }
        };
        report.runs += 1;
        if m.status != "ok" {
            report.failed_runs += 1;
            report.warnings += 1;
            continue;
        }
        if !optima.contains_key(&m.problem) {
            match problems::by_name(&m.problem) {
                Ok(p) => {
                    let front = if p.n_obj == 2 { p.front.map(|f| f(FRONT_POINTS)) } else { None };
                    fronts.insert(m.problem.clone(), front);
                    optima.insert(m.problem.clone(), (p.n_obj, p.optimum));
                }
                Err(e) => {
                    log::warn!("skipping {name}: {e}");
                    report.warnings += 1;
                    report.skipped_files.push(name);
                    continue;
                }
            }
        }
        let n_obj = optima[&m.problem].0;
        match read_traces(&runs_dir.join(&m.csv), n_obj, fronts[&m.problem].as_deref()) {
            Ok((best, igd, objectives, doe_len)) => runs.push((
                RunTraces {
                    problem: m.problem.clone(),
                    algorithm: m.algorithm.name.clone(),
                    seed: m.seed,
                    best,
                    igd,
                    objectives,
                    doe_len,
                },
                m,
            )),
            Err(e) => {
                log::warn!("skipping {}: {e}", m.csv);
                report.warnings += 1;
                report.skipped_files.push(m.csv.clone());
            }
        }
    }

    let mut groups: BTreeMap<(String, String), Vec<&RunTraces>> = BTreeMap::new();
    for (t, _) in &runs {
        groups.entry((t.problem.clone(), t.algorithm.clone())).or_default().push(t);
    }
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record([
        "problem", "algorithm", "eval_count", "runs", "best_median", "best_q1", "best_q3", "igd_median", "igd_q1", "igd_q3",
    ])?;
    for ((problem, algorithm), ts) in &groups {
        let len = ts.iter().map(|t| t.best.len()).max().unwrap_or(0);
        for k in 0..len {
            let (nb, b) = stats(&ts.iter().map(|t| t.best.get(k).copied().flatten()).collect::<Vec<_>>());
            let (ni, i) = stats(&ts.iter().map(|t| t.igd.get(k).copied().flatten()).collect::<Vec<_>>());
            let mut row = vec![problem.clone(), algorithm.clone(), (k + 1).to_string(), nb.max(ni).to_string()];
            for s in [b, i] {
                row.extend((0..3).map(|j| fmt_opt(s.map(|s| s[j]))));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;

    let mut by_algo: BTreeMap<String, Vec<(Trace, Option<f64>)>> = BTreeMap::new();
    for (t, _) in &runs {
        let (n_obj, optimum) = optima[&t.problem];
        if n_obj == 1 {
            by_algo.entry(t.algorithm.clone()).or_default().push((t.best.clone(), optimum));
        }
    }
    for &tau in taus {
        let mut w = csv::Writer::from_path(dir.join(format!("data_profile_tau{tau}.csv")))?;
        w.write_record(["algorithm", "budget", "fraction"])?;
        for (algo, instances) in &by_algo {
            let (curve, skipped) = data_profile(instances, tau);
            report.warnings += skipped;
            for (k, v) in curve.iter().enumerate() {
                w.write_record([algo.clone(), (k + 1).to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
    }

    let mut wp = csv::Writer::from_path(dir.join("pareto.csv"))?;
    wp.write_record(["problem", "algorithm", "seed", "source", "f_0", "f_1"])?;
    let mut wi = csv::Writer::from_path(dir.join("igd.csv"))?;
    wi.write_record(["problem", "algorithm", "seed", "igd_doe", "igd_final", "igd_predicted"])?;
    for (t, m) in &runs {
        if optima[&t.problem].0 != 2 {
            continue;
        }
        let front = &fronts[&t.problem];
        let pf = pareto_filter(&t.objectives);
        let predicted = m.archive.as_ref().map(|a| a.predicted_pf.clone()).unwrap_or_default();
        for (source, set) in [("database", &pf), ("predicted", &predicted)] {
            for f in set {
                wp.write_record([t.problem.clone(), t.algorithm.clone(), t.seed.to_string(), source.into(), f[0].to_string(), f[1].to_string()])?;
            }
        }
        let igd_doe = t.doe_len.checked_sub(1).and_then(|k| t.igd.get(k).copied().flatten());
        let igd_pred = match front {
            Some(z) if !predicted.is_empty() => igd_plus(&predicted, z, false).ok(),
            _ => None,
        };
        wi.write_record([
            t.problem.clone(),
            t.algorithm.clone(),
            t.seed.to_string(),
            fmt_opt(igd_doe),
            fmt_opt(t.igd.last().copied().flatten()),
            fmt_opt(igd_pred),
        ])?;
    }
    wp.flush()?;
    wi.flush()?;

    fs::write(dir.join("summary_meta.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.75), 3.25);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }

    #[test]
    fn empty_directory_gives_header_only_summary() {
        let d = tempfile::tempdir().unwrap();
        let r = summarize(d.path(), &[0.02]).unwrap();
        assert_eq!(r.runs, 0);
        let s = fs::read_to_string(d.path().join("summary.csv")).unwrap();
        assert_eq!(s.lines().count(), 1);
    }
}
