//! NSGA-II with constraint domination over the relaxed unit box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dominates_strict;
use crate::error::Result;
use crate::gp::GpModel;
use crate::metrics::pareto_indices;
use crate::space::{DesignSpace, MixedPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Nsga2Options {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
}

impl Default for Nsga2Options {
    fn default() -> Self {
        Nsga2Options {
            population: 100,
            generations: 100,
            crossover_prob: 0.9,
            eta_crossover: 15.0,
            eta_mutation: 20.0,
        }
    }
}

#[derive(Clone)]
struct Individual {
    genes: Vec<f64>,
    point: MixedPoint,
    f: Vec<f64>,
    violation: f64,
    rank: usize,
    crowding: f64,
}

fn constrained_dominates(a: &Individual, b: &Individual) -> bool {
    match (a.violation > 0.0, b.violation > 0.0) {
        (false, false) => dominates_strict(&a.f, &b.f),
        (false, true) => true,
        (true, false) => false,
        (true, true) => a.violation < b.violation,
    }
}

/// Fronts of indices, best first.
fn nondominated_sort(pop: &[Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && constrained_dominates(&pop[i], &pop[j]) {
                dominates_list[i].push(j);
            } else if i != j && constrained_dominates(&pop[j], &pop[i]) {
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

fn assign_crowding(pop: &mut [Individual], front: &[usize]) {
    for &i in front {
        pop[i].crowding = 0.0;
    }
    if front.is_empty() {
        return;
    }
    let q = pop[front[0]].f.len();
    for k in 0..q {
        let mut idx = front.to_vec();
        idx.sort_by(|&a, &b| pop[a].f[k].total_cmp(&pop[b].f[k]));
        let (lo, hi) = (pop[idx[0]].f[k], pop[idx[idx.len() - 1]].f[k]);
        pop[idx[0]].crowding = f64::INFINITY;
        pop[idx[idx.len() - 1]].crowding = f64::INFINITY;
        if hi > lo {
            for w in 1..idx.len().saturating_sub(1) {
                let d = (pop[idx[w + 1]].f[k] - pop[idx[w - 1]].f[k]) / (hi - lo);
                pop[idx[w]].crowding += d;
            }
        }
    }
}

fn better(a: &Individual, b: &Individual) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

fn sbx(a: &[f64], b: &[f64], eta: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = a.to_vec();
    let mut c2 = b.to_vec();
    for i in 0..a.len() {
        if rng.random::<f64>() > 0.5 || (a[i] - b[i]).abs() < 1e-14 {
            continue;
        }
        let (y1, y2) = if a[i] < b[i] { (a[i], b[i]) } else { (b[i], a[i]) };
        let u: f64 = rng.random();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let dy = y2 - y1;
        let bq1 = spread(1.0 + 2.0 * y1 / dy);
        let bq2 = spread(1.0 + 2.0 * (1.0 - y2) / dy);
        let v1 = (0.5 * (y1 + y2 - bq1 * dy)).clamp(0.0, 1.0);
        let v2 = (0.5 * (y1 + y2 + bq2 * dy)).clamp(0.0, 1.0);
        if rng.random::<f64>() < 0.5 {
            c1[i] = v2;
            c2[i] = v1;
        } else {
            c1[i] = v1;
            c2[i] = v2;
        }
    }
    (c1, c2)
}

fn mutate(x: &mut [f64], eta: f64, rng: &mut ChaCha8Rng) {
    let p = 1.0 / x.len() as f64;
    for v in x.iter_mut() {
        if rng.random::<f64>() >= p {
            continue;
        }
        let u: f64 = rng.random();
        let y = *v;
        let m = 1.0 / (eta + 1.0);
        let dq = if u < 0.5 {
            (2.0 * u + (1.0 - 2.0 * u) * (1.0 - y).powf(eta + 1.0)).powf(m) - 1.0
        } else {
            1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * y.powf(eta + 1.0)).powf(m)
        };
        *v = (y + dq).clamp(0.0, 1.0);
    }
}

/// Runs NSGA-II on `space`. `eval` maps a batch of points to objective
/// vectors and total constraint violations (`0` when feasible). Returns
/// the mutually nondominated best front of the final population.
pub fn nsga2<F>(space: &DesignSpace, eval: F, opts: &Nsga2Options, seed: u64) -> Result<Vec<(MixedPoint, Vec<f64>)>>
where
    F: Fn(&[MixedPoint]) -> Result<Vec<(Vec<f64>, f64)>>,
{
    let n = opts.population.max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let make = |genes: Vec<Vec<f64>>| -> Result<Vec<Individual>> {
        let points = genes.iter().map(|g| space.decode_unit(g)).collect::<Result<Vec<_>>>()?;
        let outs = eval(&points)?;
        Ok(genes
            .into_iter()
            .zip(points)
            .zip(outs)
            .map(|((genes, point), (f, violation))| Individual {
                genes,
                point,
                f,
                violation: violation.max(0.0),
                rank: 0,
                crowding: 0.0,
            })
            .collect())
    };
    let init = space.lhs(n, seed)?.points.iter().map(|p| space.encode_unit(p)).collect::<Result<Vec<_>>>()?;
    let mut pop = make(init)?;
    rank_population(&mut pop);
    for _ in 0..opts.generations {
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let pick = |rng: &mut ChaCha8Rng| {
                let a = rng.random_range(0..pop.len());
                let b = rng.random_range(0..pop.len());
                if better(&pop[b], &pop[a]) {
                    b
                } else {
                    a
                }
            };
            let (pa, pb) = (pick(&mut rng), pick(&mut rng));
            let (mut c1, mut c2) = if rng.random::<f64>() < opts.crossover_prob {
                sbx(&pop[pa].genes, &pop[pb].genes, opts.eta_crossover, &mut rng)
            } else {
                (pop[pa].genes.clone(), pop[pb].genes.clone())
            };
            mutate(&mut c1, opts.eta_mutation, &mut rng);
            mutate(&mut c2, opts.eta_mutation, &mut rng);
            children.push(c1);
            if children.len() < n {
                children.push(c2);
            }
        }
        let mut merged = pop;
        merged.extend(make(children)?);
        let fronts = rank_population(&mut merged);
        let mut keep = Vec::with_capacity(n);
        for front in fronts {
            if keep.len() + front.len() <= n {
                keep.extend(front);
            } else {
                let mut rest = front;
                rest.sort_by(|&a, &b| merged[b].crowding.total_cmp(&merged[a].crowding));
                keep.extend(rest.into_iter().take(n - keep.len()));
                break;
            }
        }
        keep.sort_unstable();
        pop = keep.into_iter().map(|i| merged[i].clone()).collect();
        rank_population(&mut pop);
    }
    let min_violation = pop.iter().map(|p| p.violation).fold(f64::INFINITY, f64::min);
    let best: Vec<&Individual> = pop.iter().filter(|p| p.violation <= min_violation).collect();
    let fs: Vec<Vec<f64>> = best.iter().map(|p| p.f.clone()).collect();
    Ok(pareto_indices(&fs).into_iter().map(|i| (best[i].point.clone(), best[i].f.clone())).collect())
}

fn rank_population(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let fronts = nondominated_sort(pop);
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            pop[i].rank = r;
        }
        assign_crowding(pop, front);
    }
    fronts
}

/// NSGA-II over the surrogate means of the objective and constraint
/// models, with mean-based constraint violation.
pub fn nsga2_postprocess(
    objectives: &[GpModel],
    g: &[GpModel],
    h: &[GpModel],
    space: &DesignSpace,
    opts: &Nsga2Options,
    tolerance: f64,
    seed: u64,
) -> Result<Vec<(MixedPoint, Vec<f64>)>> {
    let eval = |pts: &[MixedPoint]| -> Result<Vec<(Vec<f64>, f64)>> {
        let means = |ms: &[GpModel]| -> Result<Vec<Vec<f64>>> {
            ms.iter()
                .map(|m| Ok(m.predict_many(pts)?.into_iter().map(|p| p.mean).collect()))
                .collect()
        };
        let (f, gm, hm) = (means(objectives)?, means(g)?, means(h)?);
        Ok((0..pts.len())
            .map(|i| {
                let v: f64 = gm.iter().map(|c| c[i].max(0.0)).sum::<f64>()
                    + hm.iter().map(|c| (c[i].abs() - tolerance).max(0.0)).sum::<f64>();
                (f.iter().map(|c| c[i]).collect(), v)
            })
            .collect())
    };
    nsga2(space, eval, opts, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::igd_plus;
    use crate::problems::{zdt, zdt_front};
    use crate::space::Variable;

    fn box2() -> DesignSpace {
        DesignSpace::new(vec![Variable::continuous("x1", 0.0, 1.0), Variable::continuous("x2", 0.0, 1.0)]).unwrap()
    }

    #[test]
    fn exact_zdt1_front() {
        let eval = |pts: &[MixedPoint]| -> Result<Vec<(Vec<f64>, f64)>> {
            pts.iter().map(|p| Ok((zdt(1, &[p.real(0), p.real(1)])?.to_vec(), 0.0))).collect()
        };
        let front = nsga2(&box2(), eval, &Nsga2Options::default(), 5).unwrap();
        let f: Vec<Vec<f64>> = front.iter().map(|p| p.1.clone()).collect();
        for a in &f {
            for b in &f {
                assert!(!dominates_strict(a, b));
            }
        }
        assert!(igd_plus(&f, &zdt_front(1, 500), false).unwrap() < 0.05);
    }

    #[test]
    fn single_objective_returns_minimizer() {
        let eval = |pts: &[MixedPoint]| -> Result<Vec<(Vec<f64>, f64)>> {
            Ok(pts.iter().map(|p| (vec![(p.real(0) - 0.25).powi(2) + p.real(1)], 0.0)).collect())
        };
        let r = nsga2(&box2(), eval, &Nsga2Options::default(), 1).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].1[0] < 1e-3);
    }

    #[test]
    fn deterministic_per_seed() {
        let eval = |pts: &[MixedPoint]| -> Result<Vec<(Vec<f64>, f64)>> {
            Ok(pts.iter().map(|p| (vec![p.real(0), 1.0 - p.real(0) + p.real(1)], (0.2 - p.real(0)).max(0.0))).collect())
        };
        let o = Nsga2Options {
            generations: 10,
            ..Default::default()
        };
        let a = nsga2(&box2(), eval, &o, 9).unwrap();
        let b = nsga2(&box2(), eval, &o, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.0.real(0) >= 0.2));
    }
}
