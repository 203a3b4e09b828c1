//! Run quality indicators: IGD+, Pareto filtering and data profiles.

use crate::error::{Error, Result};
use crate::optimizer::dominates_strict;

/// Default data-profile tolerances.
pub const DEFAULT_TAUS: [f64; 2] = [0.02, 0.005];

/// Modified distance from a reference point `z` to `a`.
pub fn d_plus(a: &[f64], z: &[f64]) -> f64 {
    a.iter().zip(z).map(|(ai, zi)| (ai - zi).max(0.0).powi(2)).sum::<f64>().sqrt()
}

/// IGD+ of the approximation set `a` against the reference set `z`:
/// `(1/|Z|) (Σ_z min_a d⁺(a, z)²)^{1/2}`.
///
/// With `normalize`, both sets are rescaled by the per-objective range of
/// `z` first.
pub fn igd_plus(a: &[Vec<f64>], z: &[Vec<f64>], normalize: bool) -> Result<f64> {
    if a.is_empty() || z.is_empty() {
        return Err(Error::Argument("IGD+ needs nonempty approximation and reference sets".into()));
    }
    let q = z[0].len();
    if a.iter().chain(z).any(|p| p.len() != q) {
        return Err(Error::Argument("IGD+ sets have inconsistent dimensions".into()));
    }
    let scale: Vec<f64> = if normalize {
        (0..q)
            .map(|j| {
                let (lo, hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[j]), h.max(p[j])));
                if hi > lo {
                    hi - lo
                } else {
                    1.0
                }
            })
            .collect()
    } else {
        vec![1.0; q]
    };
    let sum: f64 = z
        .iter()
        .map(|zp| {
            a.iter()
                .map(|ap| {
                    ap.iter()
                        .zip(zp)
                        .zip(&scale)
                        .map(|((ai, zi), s)| ((ai - zi) / s).max(0.0).powi(2))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(sum.sqrt() / z.len() as f64)
}

/// Indices of the points not strictly dominated by any other, keeping the
/// first of any group of identical points.
pub fn pareto_indices(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points.iter().enumerate().any(|(j, p)| {
                (j != i && dominates_strict(p, &points[i])) || (j < i && p == &points[i])
            })
        })
        .collect()
}

/// Nondominated subset of `points`, in input order.
pub fn pareto_filter(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    pareto_indices(points).into_iter().map(|i| points[i].clone()).collect()
}

/// Best-so-far trace of one instance: one entry per evaluation, `None`
/// until a feasible value appears.
pub type Trace = Vec<Option<f64>>;

/// Relative error used by data profiles; absolute when the optimum is 0.
pub fn relative_error(best: f64, optimum: f64) -> f64 {
    if optimum == 0.0 {
        best.abs()
    } else {
        (best - optimum).abs() / optimum.abs()
    }
}

/// Fraction of instances solved to tolerance `tau` after each evaluation
/// count `1..=max_len`. Instances without an optimum are skipped and
/// counted in the returned warning count.
pub fn data_profile(instances: &[(Trace, Option<f64>)], tau: f64) -> (Vec<f64>, usize) {
    let valid: Vec<(&Trace, f64)> = instances.iter().filter_map(|(t, o)| o.map(|o| (t, o))).collect();
    let skipped = instances.len() - valid.len();
    if skipped > 0 {
        log::warn!("data profile: {skipped} instance(s) without a known optimum skipped");
    }
    let len = valid.iter().map(|(t, _)| t.len()).max().unwrap_or(0);
    if valid.is_empty() {
        return (vec![0.0; len], skipped);
    }
    let solved_at: Vec<Option<usize>> = valid
        .iter()
        .map(|(t, o)| t.iter().position(|b| b.is_some_and(|b| relative_error(b, *o) <= tau)))
        .collect();
    let curve = (0..len)
        .map(|b| solved_at.iter().filter(|s| s.is_some_and(|k| k <= b)).count() as f64 / valid.len() as f64)
        .collect();
    (curve, skipped)
}
