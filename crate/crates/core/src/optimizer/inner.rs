//! Multistart maximization of infill criteria over a mixed space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{self, SimplexOptions};
use crate::space::{DesignSpace, MixedPoint};

/// Random exploration followed by local simplex polish in the relaxed
/// unit box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerSearch {
    /// Latin hypercube candidates scored per iteration.
    pub n_candidates: usize,
    /// Best candidates polished locally.
    pub n_polish: usize,
    /// Criterion evaluations per local polish.
    pub local_evals: usize,
}

impl Default for InnerSearch {
    fn default() -> Self {
        InnerSearch {
            n_candidates: 1000,
            n_polish: 3,
            local_evals: 150,
        }
    }
}

impl InnerSearch {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates == 0 {
            return Err(Error::Config("inner search needs at least one candidate".into()));
        }
        Ok(())
    }
}

/// Maximizes `score` (batch evaluated; `-inf` or NaN marks an excluded
/// point). Returns every scored point, polished ones included, sorted by
/// decreasing score; ties keep generation order.
pub fn maximize<F>(space: &DesignSpace, score: F, opts: &InnerSearch, seed: u64) -> Result<Vec<(MixedPoint, f64)>>
where
    F: Fn(&[MixedPoint]) -> Vec<f64>,
{
    let cands = space.lhs(opts.n_candidates, seed)?.points;
    let scores = score(&cands);
    let mut ranked: Vec<(MixedPoint, f64)> = cands
        .into_iter()
        .zip(scores)
        .map(|(p, s)| (p, if s.is_nan() { f64::NEG_INFINITY } else { s }))
        .collect();
    sort_desc(&mut ranked);

    let dim = space.relaxed_dimension();
    let bounds = vec![(0.0, 1.0); dim];
    let simplex_opts = SimplexOptions {
        max_evals: opts.local_evals,
        initial_step: 0.05,
        f_tol: 1e-12,
        x_tol: 1e-9,
    };
    let mut polished = Vec::new();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for (p, s) in &ranked {
        if starts.len() >= opts.n_polish || *s == f64::NEG_INFINITY {
            break;
        }
        let u = space.encode_unit(p)?;
        if starts.iter().any(|v| v == &u) {
            continue;
        }
        starts.push(u);
    }
    for u0 in starts {
        if opts.local_evals == 0 {
            break;
        }
        let objective = |u: &[f64]| -> f64 {
            match space.decode_unit(u) {
                Ok(p) => {
                    let s = score(std::slice::from_ref(&p))[0];
                    if s.is_nan() || s == f64::NEG_INFINITY {
                        f64::INFINITY
                    } else {
                        -s
                    }
                }
                Err(_) => f64::INFINITY,
            }
        };
        let r = simplex::minimize(objective, &u0, &bounds, &simplex_opts);
        if r.f.is_finite() {
            polished.push((space.decode_unit(&r.x)?, -r.f));
        }
    }
    polished.extend(ranked);
    sort_desc(&mut polished);
    Ok(polished)
}

fn sort_desc(v: &mut [(MixedPoint, f64)]) {
    v.sort_by(|a, b| b.1.total_cmp(&a.1));
}
