//! The enrichment loops.

use std::cell::RefCell;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{maximize, nsga2_postprocess, EvalRecord, InnerSearch, OptimizerConfig, ParetoArchive, RunHistory};
use crate::acquisition::{self, AcquisitionKind, Psi};
use crate::error::{Error, Result};
use crate::gp::{FitOptions, GpModel, Prediction, Reduction};
use crate::metrics::pareto_filter;
use crate::pls::{make_embedding, EmbeddingKind, EmbeddingSpec};
use crate::problems::Problem;
use crate::space::{DesignSpace, MixedPoint, VarKind, Variable};

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

type MapFn<'a> = dyn Fn(&MixedPoint) -> Result<MixedPoint> + 'a;

struct Models {
    f: Vec<GpModel>,
    g: Vec<GpModel>,
    h: Vec<GpModel>,
}

impl Models {
    fn constraint_means(&self, pts: &[MixedPoint]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let means = |ms: &[GpModel]| -> Result<Vec<Vec<f64>>> {
            ms.iter()
                .map(|m| Ok(m.predict_many(pts)?.into_iter().map(|p| p.mean).collect()))
                .collect()
        };
        Ok((means(&self.g)?, means(&self.h)?))
    }
}

struct Loop<'a> {
    problem: &'a Problem,
    cfg: &'a OptimizerConfig,
    search: DesignSpace,
    map: &'a MapFn<'a>,
    history: RunHistory,
    /// Search-space coordinates of each record; `None` for points not
    /// usable by the surrogates.
    coords: Vec<Option<MixedPoint>>,
    encoded: Vec<Vec<f64>>,
    thetas: Vec<Option<Vec<f64>>>,
}

impl<'a> Loop<'a> {
    fn new(problem: &'a Problem, cfg: &'a OptimizerConfig, search: DesignSpace, map: &'a MapFn<'a>) -> Self {
        let n_out = problem.n_obj + problem.n_ineq + problem.n_eq;
        Loop {
            problem,
            cfg,
            search,
            map,
            history: RunHistory {
                records: Vec::new(),
                best: Vec::new(),
                seed: cfg.seed,
                fallback_iterations: Vec::new(),
                jitter_iterations: Vec::new(),
            },
            coords: Vec::new(),
            encoded: Vec::new(),
            thetas: vec![None; n_out],
        }
    }

    fn remaining(&self) -> usize {
        self.cfg.budget - self.history.records.len()
    }

    /// Evaluates a problem-space point without search coordinates.
    fn evaluate_full(&mut self, iteration: usize, x: MixedPoint) {
        self.push(iteration, x, None);
    }

    fn evaluate(&mut self, iteration: usize, sp: MixedPoint) -> Result<()> {
        let x = (self.map)(&sp)?;
        self.push(iteration, x, Some(sp));
        Ok(())
    }

    fn push(&mut self, iteration: usize, x: MixedPoint, sp: Option<MixedPoint>) {
        let tol = self.cfg.tolerance;
        let start = Instant::now();
        let out = self.problem.evaluate(&x);
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let rec = match out {
            Ok(o) => {
                let feasible = o.g.iter().all(|v| *v <= tol) && o.h.iter().all(|v| v.abs() <= tol);
                let finite = o.f.iter().chain(&o.g).chain(&o.h).all(|v| v.is_finite());
                EvalRecord {
                    iteration,
                    point: x,
                    f: o.f,
                    g: o.g,
                    h: o.h,
                    feasible: feasible && finite,
                    error: (!finite).then(|| "non-finite output".to_string()),
                    wall_ms,
                }
            }
            Err(e) => {
                log::warn!("evaluation failed at iteration {iteration}: {e}");
                EvalRecord {
                    iteration,
                    point: x,
                    f: Vec::new(),
                    g: Vec::new(),
                    h: Vec::new(),
                    feasible: false,
                    error: Some(e.to_string()),
                    wall_ms,
                }
            }
        };
        let prev = self.history.best.last().copied().flatten();
        let cur = if rec.ok() && rec.feasible && rec.f.len() == 1 {
            Some(prev.map_or(rec.f[0], |p: f64| p.min(rec.f[0])))
        } else {
            prev
        };
        self.history.best.push(cur);
        self.encoded.push(sp.as_ref().and_then(|p| self.search.encode_unit(p).ok()).unwrap_or_default());
        self.coords.push(if rec.ok() { sp } else { None });
        self.history.records.push(rec);
    }

    fn is_known(&self, p: &MixedPoint) -> bool {
        match self.search.encode_unit(p) {
            Ok(u) => self
                .encoded
                .iter()
                .any(|v| v.len() == u.len() && v.iter().zip(&u).all(|(a, b)| (a - b).abs() <= 1e-12)),
            Err(_) => true,
        }
    }

    fn data(&self) -> (Vec<MixedPoint>, Vec<&EvalRecord>) {
        self.coords
            .iter()
            .zip(&self.history.records)
            .filter_map(|(c, r)| c.as_ref().map(|c| (c.clone(), r)))
            .unzip()
    }

    fn fit(&mut self, iteration: usize) -> Result<Models> {
        let (pts, recs) = self.data();
        if pts.len() < 2 {
            return Err(Error::Fit("fewer than two usable evaluations".into()));
        }
        let (q, m) = (self.problem.n_obj, self.problem.n_ineq);
        let column = |j: usize| -> Vec<f64> {
            recs.iter()
                .map(|r| {
                    if j < q {
                        r.f[j]
                    } else if j < q + m {
                        r.g[j - q]
                    } else {
                        r.h[j - q - m]
                    }
                })
                .collect()
        };
        let ys: Vec<Vec<f64>> = (0..self.thetas.len()).map(column).collect();
        let mut models = Vec::with_capacity(ys.len());
        for (j, y) in ys.into_iter().enumerate() {
            let mut opts = FitOptions {
                seed: mix(self.cfg.seed, iteration as u64, j as u64),
                initial_theta: self.thetas[j].clone(),
                ..self.cfg.fit.clone()
            };
            if let Some(a) = &self.cfg.adaptive_pls {
                opts.reduction = Reduction::AdaptiveKpls(a.clone());
            }
            let model = match GpModel::fit(&self.search, &pts, &y, &opts) {
                Ok(mdl) => mdl,
                Err(e) if opts.reduction != Reduction::None => {
                    log::debug!("reduced fit failed ({e}); fitting the full kernel");
                    opts.reduction = Reduction::None;
                    opts.initial_theta = None;
                    GpModel::fit(&self.search, &pts, &y, &opts)?
                }
                Err(e) => return Err(e),
            };
            self.thetas[j] = Some(model.theta().to_vec());
            models.push(model);
        }
        let h = models.split_off(q + m);
        let g = models.split_off(q);
        Ok(Models { f: models, g, h })
    }

    fn feasible_mask(&self, models: &Models, pts: &[MixedPoint]) -> Result<Vec<bool>> {
        let (gm, hm) = models.constraint_means(pts)?;
        Ok((0..pts.len())
            .map(|i| {
                let g: Vec<f64> = gm.iter().map(|c| c[i]).collect();
                let h: Vec<f64> = hm.iter().map(|c| c[i]).collect();
                acquisition::feasible_means(&g, &h, self.cfg.tolerance)
            })
            .collect())
    }

    /// Objective values of the usable records, feasible ones when any.
    fn reference_objectives(&self) -> Vec<Vec<f64>> {
        let (_, recs) = self.data();
        let feas: Vec<Vec<f64>> = recs.iter().filter(|r| r.feasible).map(|r| r.f.clone()).collect();
        if feas.is_empty() {
            recs.iter().map(|r| r.f.clone()).collect()
        } else {
            feas
        }
    }

    /// Ranked candidates of the infill problem; `None` when no candidate is
    /// surrogate-feasible.
    fn infill(&self, models: &Models, seed: u64) -> Result<Option<Vec<(MixedPoint, f64)>>> {
        let acq = &self.cfg.acquisition;
        let objs = self.reference_objectives();
        let probe = InnerSearch {
            n_polish: 0,
            ..self.cfg.inner.clone()
        };
        let ranked = if self.problem.n_obj == 1 {
            let y_min = objs.iter().map(|f| f[0]).fold(f64::INFINITY, f64::min);
            let ei = |p: &[Prediction]| acquisition::expected_improvement(p[0].mean, p[0].sd(), y_min).unwrap_or(f64::NEG_INFINITY);
            match acq.kind {
                AcquisitionKind::Wb2 => {
                    let c = |p: &[Prediction]| acquisition::wb2(p[0].mean, p[0].sd(), y_min).unwrap_or(f64::NEG_INFINITY);
                    maximize(&self.search, self.scorer(models, &c), &self.cfg.inner, seed)?
                }
                AcquisitionKind::Wb2s => {
                    let first = maximize(&self.search, self.scorer(models, &ei), &probe, seed)?;
                    if first[0].1 == f64::NEG_INFINITY {
                        return Ok(None);
                    }
                    let mean_star = models.f[0].predict_mean(&first[0].0)?;
                    let s = acquisition::wb2s_scale(first[0].1, mean_star, acq.wb2s_beta);
                    let c = |p: &[Prediction]| acquisition::wb2s(p[0].mean, p[0].sd(), y_min, s).unwrap_or(f64::NEG_INFINITY);
                    maximize(&self.search, self.scorer(models, &c), &self.cfg.inner, seed)?
                }
                _ => maximize(&self.search, self.scorer(models, &ei), &self.cfg.inner, seed)?,
            }
        } else {
            let front = pareto_filter(&objs);
            let r = match &acq.reference {
                Some(r) => r.clone(),
                None => reference_point(&objs),
            };
            let kind = acq.mo_kind();
            let alpha = |p: &[Prediction]| -> f64 {
                let mean: Vec<f64> = p.iter().map(|v| v.mean).collect();
                let sd: Vec<f64> = p.iter().map(|v| v.sd()).collect();
                acquisition::mo_acquisition(kind, &mean, &sd, &front, Some(&r)).unwrap_or(f64::NEG_INFINITY)
            };
            let psi = |p: &[Prediction]| -> f64 {
                let mean: Vec<f64> = p.iter().map(|v| v.mean).collect();
                acquisition::regularized(0.0, &mean, 1.0, acq.psi).map_or(f64::NAN, |v| -v)
            };
            let gamma = if acq.scale_gamma && acq.psi != Psi::None {
                let first = maximize(&self.search, self.scorer(models, &alpha), &probe, seed)?;
                if first[0].1 == f64::NEG_INFINITY {
                    return Ok(None);
                }
                let preds = models.f.iter().map(|m| m.predict(&first[0].0)).collect::<Result<Vec<_>>>()?;
                acq.gamma * acquisition::wb2s_scale(first[0].1, psi(&preds), acq.wb2s_beta)
            } else {
                acq.gamma
            };
            let c = |p: &[Prediction]| -> f64 {
                let mean: Vec<f64> = p.iter().map(|v| v.mean).collect();
                acquisition::regularized(alpha(p), &mean, gamma, acq.psi).unwrap_or(f64::NEG_INFINITY)
            };
            maximize(&self.search, self.scorer(models, &c), &self.cfg.inner, seed)?
        };
        Ok((ranked[0].1 != f64::NEG_INFINITY).then_some(ranked))
    }

    fn scorer<'s, C>(&'s self, models: &'s Models, crit: C) -> impl Fn(&[MixedPoint]) -> Vec<f64> + 's
    where
        C: Fn(&[Prediction]) -> f64 + 's,
    {
        move |pts: &[MixedPoint]| -> Vec<f64> {
            let run = || -> Result<Vec<f64>> {
                let feas = self.feasible_mask(models, pts)?;
                let preds = models.f.iter().map(|m| m.predict_many(pts)).collect::<Result<Vec<_>>>()?;
                Ok((0..pts.len())
                    .map(|i| {
                        if !feas[i] {
                            return f64::NEG_INFINITY;
                        }
                        let p: Vec<Prediction> = preds.iter().map(|c| c[i]).collect();
                        crit(&p)
                    })
                    .collect())
            };
            run().unwrap_or_else(|_| vec![f64::NEG_INFINITY; pts.len()])
        }
    }

    /// Candidates ranked by decreasing negative constraint-mean violation.
    fn least_violation(&self, models: &Models, seed: u64) -> Result<Vec<(MixedPoint, f64)>> {
        let tol = self.cfg.tolerance;
        let score = |pts: &[MixedPoint]| -> Vec<f64> {
            match models.constraint_means(pts) {
                Ok((gm, hm)) => (0..pts.len())
                    .map(|i| {
                        -(gm.iter().map(|c| c[i].max(0.0)).sum::<f64>()
                            + hm.iter().map(|c| (c[i].abs() - tol).max(0.0)).sum::<f64>())
                    })
                    .collect(),
                Err(_) => vec![f64::NEG_INFINITY; pts.len()],
            }
        };
        maximize(&self.search, score, &self.cfg.inner, seed)
    }

    /// Picks the first ranked candidate not yet evaluated, nudging the best
    /// one by `1e-8` in its continuous coordinates when it repeats a point.
    fn select(&mut self, iteration: usize, ranked: Vec<(MixedPoint, f64)>, seed: u64) -> Result<MixedPoint> {
        let best = &ranked[0].0;
        if !self.is_known(best) {
            return Ok(best.clone());
        }
        self.history.jitter_iterations.push(iteration);
        log::info!("iteration {iteration}: infill repeats a known point, perturbing it");
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut u = self.search.encode_unit(best)?;
        let mut k = 0;
        for v in self.search.variables() {
            let w = v.relaxed_width();
            if matches!(v.kind, VarKind::Continuous { .. }) {
                let step = if rng.random::<bool>() { 1e-8 } else { -1e-8 };
                u[k] = if u[k] + step > 1.0 || u[k] + step < 0.0 { u[k] - step } else { u[k] + step };
            }
            k += w;
        }
        let jittered = self.search.decode_unit(&u)?;
        if !self.is_known(&jittered) {
            return Ok(jittered);
        }
        if let Some((p, _)) = ranked.iter().find(|(p, _)| !self.is_known(p)) {
            return Ok(p.clone());
        }
        Ok(self
            .search
            .lhs(self.cfg.inner.n_candidates.max(1), seed ^ 0xfa11)?
            .points
            .into_iter()
            .find(|p| !self.is_known(p))
            .unwrap_or_else(|| best.clone()))
    }

    fn step(&mut self, iteration: usize) -> Result<()> {
        let seed = mix(self.cfg.seed, iteration as u64, 0xacc);
        let ranked = match self.fit(iteration) {
            Ok(models) => match self.infill(&models, seed)? {
                Some(r) => r,
                None => {
                    self.history.fallback_iterations.push(iteration);
                    log::info!("iteration {iteration}: no surrogate-feasible candidate, minimizing violation");
                    self.least_violation(&models, seed)?
                }
            },
            Err(e) => {
                log::warn!("iteration {iteration}: surrogate fit failed ({e}), sampling at random");
                self.history.fallback_iterations.push(iteration);
                let pts = self.search.lhs(self.cfg.inner.n_candidates.max(1), seed)?.points;
                pts.into_iter().map(|p| (p, 0.0)).collect()
            }
        };
        let next = self.select(iteration, ranked, seed)?;
        self.evaluate(iteration, next)
    }

    fn run(&mut self, doe_seed: u64) -> Result<()> {
        let n = self.cfg.doe_size.min(self.remaining());
        for p in self.search.lhs(n.max(1), doe_seed)?.points.into_iter().take(n) {
            self.evaluate(0, p)?;
        }
        let mut it = 1;
        while self.remaining() > 0 {
            self.step(it)?;
            it += 1;
        }
        Ok(())
    }
}

/// Worst value per objective plus 10% of its range (1 when flat).
fn reference_point(objs: &[Vec<f64>]) -> Vec<f64> {
    let q = objs[0].len();
    (0..q)
        .map(|j| {
            let (lo, hi) = objs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), f| (l.min(f[j]), h.max(f[j])));
            let range = hi - lo;
            hi + if range > 0.0 { 0.1 * range } else { 1.0 }
        })
        .collect()
}

fn identity(p: &MixedPoint) -> Result<MixedPoint> {
    Ok(p.clone())
}

fn single(problem: &Problem, config: &OptimizerConfig) -> Result<RunHistory> {
    config.validate()?;
    let map: &MapFn = &identity;
    let mut lp = Loop::new(problem, config, problem.space.clone(), map);
    lp.run(config.seed)?;
    Ok(lp.history)
}

/// Unconstrained single-objective EGO.
pub fn run_ego(problem: &Problem, config: &OptimizerConfig) -> Result<RunHistory> {
    if problem.n_obj != 1 || problem.is_constrained() {
        return Err(Error::Argument("EGO needs an unconstrained single-objective problem".into()));
    }
    single(problem, config)
}

/// Constrained single-objective EGO with mean-feasible infill search.
pub fn run_sego(problem: &Problem, config: &OptimizerConfig) -> Result<RunHistory> {
    if problem.n_obj != 1 {
        return Err(Error::Argument("SEGO needs a single-objective problem".into()));
    }
    single(problem, config)
}

/// Constrained mono- or bi-objective mixed-variable optimization followed
/// by NSGA-II on the final surrogates.
pub fn run_segomoe_mo(problem: &Problem, config: &OptimizerConfig) -> Result<(RunHistory, ParetoArchive)> {
    if !(1..=2).contains(&problem.n_obj) {
        return Err(Error::Unsupported("only one or two objectives are supported".into()));
    }
    config.validate()?;
    let map: &MapFn = &identity;
    let mut lp = Loop::new(problem, config, problem.space.clone(), map);
    lp.run(config.seed)?;
    let mut archive = ParetoArchive::from_history(&lp.history);
    match lp.fit(config.budget + 1) {
        Ok(models) => {
            let pred = nsga2_postprocess(
                &models.f,
                &models.g,
                &models.h,
                &lp.search,
                &config.nsga2,
                config.tolerance,
                mix(config.seed, 0x2a, 0),
            )?;
            for (p, f) in pred {
                archive.predicted_ps.push(p);
                archive.predicted_pf.push(f);
            }
        }
        Err(e) => log::warn!("post-processing skipped: {e}"),
    }
    Ok((lp.history, archive))
}

/// EGO in a linear subspace `[-1, 1]^{d_e}`; candidates are mapped back
/// to the full space before evaluation.
pub fn run_embedded(problem: &Problem, config: &OptimizerConfig) -> Result<RunHistory> {
    config.validate()?;
    let emb = config
        .embedding
        .as_ref()
        .ok_or_else(|| Error::Config("embedded run needs an embedding".into()))?;
    if problem.n_obj != 1 || !problem.space.is_continuous() {
        return Err(Error::Argument("embedded runs need a continuous single-objective problem".into()));
    }
    let n = problem.space.len();
    let bounds = problem.space.relaxed_bounds();
    let to_unit = |x: &MixedPoint| -> Vec<f64> {
        bounds
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| if (*lo, *hi) == (-1.0, 1.0) { x.real(i) } else { -1.0 + 2.0 * (x.real(i) - lo) / (hi - lo) })
            .collect()
    };
    let from_unit = |u: &[f64]| -> Vec<f64> {
        bounds
            .iter()
            .zip(u)
            .map(|((lo, hi), v)| if (*lo, *hi) == (-1.0, 1.0) { *v } else { lo + (v + 1.0) / 2.0 * (hi - lo) })
            .collect()
    };

    let spec = match emb.kind {
        EmbeddingKind::Given => {
            let a = emb
                .matrix
                .clone()
                .ok_or_else(|| Error::Config("a given embedding needs its matrix".into()))?;
            let spec = EmbeddingSpec::from_matrix(a)?;
            if spec.n() != n || spec.d_e() != emb.d_e {
                return Err(Error::Config("embedding matrix shape does not match the problem".into()));
            }
            Some(spec)
        }
        EmbeddingKind::RandomGaussian => Some(make_embedding(EmbeddingKind::RandomGaussian, n, emb.d_e, config.seed, None)?),
        EmbeddingKind::SupervisedPls => {
            if config.budget < 2 * config.doe_size {
                return Err(Error::Config("supervised embedding needs a budget of at least twice the DoE".into()));
            }
            None
        }
    };

    let reduced = DesignSpace::new((0..emb.d_e).map(|i| Variable::continuous(&format!("u{}", i + 1), -1.0, 1.0)).collect())?;
    let cell = RefCell::new(spec);
    let map = |u: &MixedPoint| -> Result<MixedPoint> {
        let uu: Vec<f64> = (0..u.values().len()).map(|i| u.real(i)).collect();
        let x = cell
            .borrow()
            .as_ref()
            .ok_or_else(|| Error::Config("embedding not built".into()))?
            .back_map(&uu)?;
        problem.space.point_from_reals(&from_unit(&x))
    };
    let mut lp = Loop::new(problem, config, reduced, &map);
    if cell.borrow().is_none() {
        for p in problem.space.lhs(config.doe_size, mix(config.seed, 0xe4b, 0))?.points {
            lp.evaluate_full(0, p);
        }
        let (x, y): (Vec<Vec<f64>>, Vec<f64>) = lp
            .history
            .records
            .iter()
            .filter(|r| r.ok())
            .map(|r| (to_unit(&r.point), r.f[0]))
            .unzip();
        *cell.borrow_mut() = Some(make_embedding(EmbeddingKind::SupervisedPls, n, emb.d_e, config.seed, Some((&x, &y)))?);
    }
    lp.run(config.seed)?;
    Ok(lp.history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::by_name;

    fn small(budget: usize, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            doe_size: 4,
            budget,
            seed,
            inner: InnerSearch {
                n_candidates: 200,
                n_polish: 1,
                local_evals: 60,
            },
            ..Default::default()
        }
    }

    #[test]
    fn zero_infill_budget_is_the_doe() {
        let p = by_name("quadratic").unwrap();
        let h = run_ego(&p, &small(4, 1)).unwrap();
        assert_eq!(h.len(), 4);
        let m = h.records.iter().map(|r| r.f[0]).fold(f64::INFINITY, f64::min);
        assert_eq!(h.best_value(), Some(m));
    }

    #[test]
    fn quadratic_converges_and_trace_is_monotone() {
        let p = by_name("quadratic").unwrap();
        let h = run_ego(&p, &small(12, 3)).unwrap();
        assert_eq!(h.len(), 12);
        assert!(h.best_value().unwrap() < 1e-3);
        for w in h.best.windows(2) {
            assert!(w[1].unwrap() <= w[0].unwrap());
        }
    }

    #[test]
    fn sego_matches_ego_without_constraints() {
        let p = by_name("quadratic").unwrap();
        let a = run_ego(&p, &small(8, 2)).unwrap();
        let b = run_sego(&p, &small(8, 2)).unwrap();
        let strip = |h: &RunHistory| h.records.iter().map(|r| (r.point.clone(), r.f.clone())).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn ego_rejects_constrained_problems() {
        assert!(run_ego(&by_name("g24").unwrap(), &small(8, 0)).is_err());
    }

    #[test]
    fn infeasible_everywhere_takes_fallback() {
        let space = DesignSpace::new(vec![Variable::continuous("x", 0.0, 1.0)]).unwrap();
        let p = Problem::new("nogo", space, (1, 1, 0), |x| {
            Ok(crate::problems::Outputs {
                f: vec![x.real(0)],
                g: vec![1.0],
                h: vec![],
            })
        });
        let h = run_sego(&p, &small(8, 0)).unwrap();
        assert_eq!(h.len(), 8);
        assert_eq!(h.fallback_iterations, vec![1, 2, 3, 4]);
        assert!(h.best_value().is_none());
    }

    #[test]
    fn failures_are_recorded_and_budget_is_kept() {
        let space = DesignSpace::new(vec![Variable::continuous("x", 0.0, 1.0)]).unwrap();
        let p = Problem::new("flaky", space, (1, 0, 0), |x| {
            if x.real(0) > 0.7 {
                Err(Error::Numerical("solver diverged".into()))
            } else {
                Ok(crate::problems::Outputs::objective((x.real(0) - 0.3).powi(2)))
            }
        });
        let h = run_ego(&p, &small(10, 4)).unwrap();
        assert_eq!(h.len(), 10);
        assert!(h.records.iter().any(|r| !r.ok()));
    }

    #[test]
    fn identity_embedding_matches_ego() {
        let p = by_name("quadratic").unwrap();
        let mut c = small(8, 5);
        c.embedding = Some(super::super::EmbeddingConfig {
            kind: EmbeddingKind::Given,
            d_e: 1,
            matrix: Some(vec![vec![1.0]]),
        });
        let a = run_embedded(&p, &c).unwrap();
        let b = run_ego(&p, &small(8, 5)).unwrap();
        let strip = |h: &RunHistory| h.records.iter().map(|r| (r.point.clone(), r.f.clone())).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }
}
