//! Infill criteria.
//!
//! Single-objective criteria (EI, WB2, WB2S), mean-based feasibility, and
//! bi-objective criteria (EHVI, PI, MPI) with the regularized scalarization
//! `γ α - ψ(μ)`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::optimizer::dominates_strict;
use crate::space::MixedPoint;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn norm_pdf(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

/// Standard normal distribution function.
pub fn norm_cdf(u: f64) -> f64 {
    0.5 * erfc(-u / std::f64::consts::SQRT_2)
}

/// Expected improvement below `y_min`.
pub fn expected_improvement(mean: f64, sd: f64, y_min: f64) -> Result<f64> {
    if mean.is_nan() || sd.is_nan() || y_min.is_nan() {
        return Err(Error::Domain("NaN in expected improvement".into()));
    }
    if sd < 0.0 {
        return Err(Error::Domain("negative standard deviation".into()));
    }
    if sd == 0.0 {
        return Ok(0.0);
    }
    let d = y_min - mean;
    let u = d / sd;
    Ok((d * norm_cdf(u) + sd * norm_pdf(u)).max(0.0))
}

/// `EI - μ`.
pub fn wb2(mean: f64, sd: f64, y_min: f64) -> Result<f64> {
    Ok(expected_improvement(mean, sd, y_min)? - mean)
}

/// `s · EI - μ`.
pub fn wb2s(mean: f64, sd: f64, y_min: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Argument(format!("WB2S scale must be positive, got {s}")));
    }
    Ok(s * expected_improvement(mean, sd, y_min)? - mean)
}

/// WB2S scale `β |μ(x*)| / EI(x*)` at the EI maximizer `x*`; `1` when the
/// maximal EI vanishes.
pub fn wb2s_scale(ei_star: f64, mean_star: f64, beta: f64) -> f64 {
    if ei_star > 0.0 && mean_star != 0.0 {
        beta * mean_star.abs() / ei_star
    } else {
        1.0
    }
}

/// True when every inequality mean is `≤ 0` and every equality mean lies in
/// `[-tol, tol]`.
pub fn feasible_means(g: &[f64], h: &[f64], tol: f64) -> bool {
    g.iter().all(|v| *v <= 0.0) && h.iter().all(|v| v.abs() <= tol)
}

/// Mean-based feasibility of `x` under constraint models.
pub fn constrained_feasible(x: &MixedPoint, g: &[GpModel], h: &[GpModel], tol: f64) -> Result<bool> {
    let gm = g.iter().map(|m| m.predict_mean(x)).collect::<Result<Vec<_>>>()?;
    let hm = h.iter().map(|m| m.predict_mean(x)).collect::<Result<Vec<_>>>()?;
    Ok(feasible_means(&gm, &hm, tol))
}

/// Mutually nondominated, deduplicated front sorted by the first objective.
fn sorted_front(points: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            Some(last) if last[1] <= p[1] => {}
            _ => out.push(p),
        }
    }
    out
}

fn check_2d(points: &[Vec<f64>], r: Option<&[f64]>) -> Result<()> {
    if points.iter().any(|p| p.len() != 2) || r.is_some_and(|r| r.len() != 2) {
        return Err(Error::Unsupported("only two objectives are supported".into()));
    }
    Ok(())
}

/// Area dominated by `points` and bounded by the reference point `r`.
pub fn hypervolume(points: &[Vec<f64>], r: &[f64]) -> Result<f64> {
    check_2d(points, Some(r))?;
    let inside: Vec<Vec<f64>> = points.iter().filter(|p| p[0] < r[0] && p[1] < r[1]).cloned().collect();
    let front = sorted_front(&inside);
    let mut hv = 0.0;
    for (i, p) in front.iter().enumerate() {
        let next = front.get(i + 1).map_or(r[0], |q| q[0]);
        hv += (next - p[0]) * (r[1] - p[1]);
    }
    Ok(hv)
}

/// Multi-objective criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoKind {
    Ehvi,
    Pi,
    Mpi,
}

/// `E[(c - Y)⁺]` for `Y ~ N(μ, σ²)`.
fn partial_expectation(c: f64, mu: f64, sd: f64) -> f64 {
    if c == f64::NEG_INFINITY {
        return 0.0;
    }
    if sd == 0.0 {
        return (c - mu).max(0.0);
    }
    let u = (c - mu) / sd;
    (c - mu) * norm_cdf(u) + sd * norm_pdf(u)
}

/// `P(Y < c)`.
fn prob_below(c: f64, mu: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return if mu < c { 1.0 } else { 0.0 };
    }
    norm_cdf((c - mu) / sd)
}

/// Bi-objective criterion of a candidate with independent Gaussian
/// predictions (`mean`, `sd`) against `front`. `r` is required by EHVI.
pub fn mo_acquisition(kind: MoKind, mean: &[f64], sd: &[f64], front: &[Vec<f64>], r: Option<&[f64]>) -> Result<f64> {
    if mean.len() != 2 || sd.len() != 2 {
        return Err(Error::Unsupported("only two objectives are supported".into()));
    }
    check_2d(front, r)?;
    if mean.iter().chain(sd).any(|v| v.is_nan()) || sd.iter().any(|s| *s < 0.0) {
        return Err(Error::Domain("invalid predictive distribution".into()));
    }
    match kind {
        MoKind::Ehvi => {
            let r = r.ok_or_else(|| Error::Argument("EHVI needs a reference point".into()))?;
            let inside: Vec<Vec<f64>> = front.iter().filter(|p| p[0] < r[0] && p[1] < r[1]).cloned().collect();
            let f = sorted_front(&inside);
            let k = f.len();
            let mut total = 0.0;
            for i in 0..=k {
                let a = if i == 0 { f64::NEG_INFINITY } else { f[i - 1][0] };
                let b = if i == k { r[0] } else { f[i][0] };
                let c = if i == 0 { r[1] } else { f[i - 1][1] };
                let width = partial_expectation(b, mean[0], sd[0]) - partial_expectation(a, mean[0], sd[0]);
                total += width * partial_expectation(c, mean[1], sd[1]);
            }
            Ok(total.max(0.0))
        }
        MoKind::Pi => {
            let f = sorted_front(front);
            let k = f.len();
            let mut total = 0.0;
            for i in 0..=k {
                let a = if i == 0 { f64::NEG_INFINITY } else { f[i - 1][0] };
                let b = if i == k { f64::INFINITY } else { f[i][0] };
                let c = if i == 0 { f64::INFINITY } else { f[i - 1][1] };
                let pa = if a == f64::NEG_INFINITY { 0.0 } else { prob_below(a, mean[0], sd[0]) };
                let pb = if b == f64::INFINITY { 1.0 } else { prob_below(b, mean[0], sd[0]) };
                let pc = if c == f64::INFINITY { 1.0 } else { prob_below(c, mean[1], sd[1]) };
                total += (pb - pa) * pc;
            }
            Ok(total.clamp(0.0, 1.0))
        }
        MoKind::Mpi => {
            let mut best = 1.0f64;
            for p in front {
                let dominated: f64 = (0..2).map(|i| 1.0 - prob_below(p[i], mean[i], sd[i])).product();
                best = best.min(1.0 - dominated);
            }
            Ok(best.clamp(0.0, 1.0))
        }
    }
}

/// Scalarization `ψ` of the objective means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Psi {
    Max,
    Sum,
    None,
}

/// `γ α - ψ(μ)`.
pub fn regularized(alpha: f64, mu: &[f64], gamma: f64, psi: Psi) -> Result<f64> {
    if mu.is_empty() {
        return Err(Error::Argument("regularization needs at least one mean".into()));
    }
    let pen = match psi {
        Psi::Max => mu.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Psi::Sum => mu.iter().sum(),
        Psi::None => 0.0,
    };
    Ok(gamma * alpha - pen)
}

/// Infill criterion selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcquisitionKind {
    Ei,
    Wb2,
    Wb2s,
    Ehvi,
    Pi,
    Mpi,
}

/// Infill criterion and regularization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionConfig {
    pub kind: AcquisitionKind,
    pub gamma: f64,
    pub psi: Psi,
    /// Reference point of hypervolume criteria; `None` derives it from the
    /// data (worst value per objective plus 10% of the range).
    pub reference: Option<Vec<f64>>,
    /// `β` of the WB2S scale.
    pub wb2s_beta: f64,
    /// Multiplies `γ` by the WB2S scale of the bi-objective criterion at
    /// its maximizer, so that `α` and `ψ(μ)` are commensurate.
    #[serde(default = "yes")]
    pub scale_gamma: bool,
}

fn yes() -> bool {
    true
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        AcquisitionConfig {
            kind: AcquisitionKind::Wb2s,
            gamma: 1.0,
            psi: Psi::Max,
            reference: None,
            wb2s_beta: 100.0,
            scale_gamma: true,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::Config("γ must be positive".into()));
        }
        if !(self.wb2s_beta > 0.0) {
            return Err(Error::Config("WB2S β must be positive".into()));
        }
        Ok(())
    }

    pub fn mo_kind(&self) -> MoKind {
        match self.kind {
            AcquisitionKind::Pi => MoKind::Pi,
            AcquisitionKind::Mpi => MoKind::Mpi,
            _ => MoKind::Ehvi,
        }
    }
}

/// True when some member of `front` strictly dominates `r`.
pub fn reference_dominated(front: &[Vec<f64>], r: &[f64]) -> bool {
    front.iter().any(|p| dominates_strict(r, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ei_examples() {
        assert_eq!(expected_improvement(1.0, 0.0, 2.0).unwrap(), 0.0);
        assert_relative_eq!(expected_improvement(0.5, 1.0, 0.5).unwrap(), 0.3989422804014327, epsilon = 1e-15);
        assert!(expected_improvement(10.0, 1.0, 0.0).unwrap() < 1e-20);
        assert!(expected_improvement(f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn wb2s_examples() {
        assert_eq!(wb2s(3.0, 0.0, 1.0, 50.0).unwrap(), -3.0);
        assert_eq!(wb2s(0.2, 0.5, 0.1, 1.0).unwrap(), wb2(0.2, 0.5, 0.1).unwrap());
        assert!(wb2s(0.2, 0.5, 0.1, 0.0).is_err());
        assert_eq!(wb2s_scale(0.0, 3.0, 100.0), 1.0);
        assert_relative_eq!(wb2s_scale(0.5, -2.0, 100.0), 400.0);
    }

    #[test]
    fn feasibility_closed_band() {
        assert!(feasible_means(&[], &[], 1e-4));
        assert!(!feasible_means(&[1.0], &[], 1e-4));
        assert!(feasible_means(&[0.0], &[1e-4], 1e-4));
        assert!(!feasible_means(&[], &[2e-4], 1e-4));
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume(&[], &[2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(hypervolume(&[vec![1.0, 1.0]], &[2.0, 2.0]).unwrap(), 1.0);
        let s = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let a = hypervolume(&s, &[2.0, 2.0]).unwrap();
        assert_eq!(a, 3.0);
        let mut t = s.clone();
        t.push(vec![1.5, 1.5]);
        assert_eq!(hypervolume(&t, &[2.0, 2.0]).unwrap(), a);
        assert!(matches!(hypervolume(&[vec![1.0, 1.0, 1.0]], &[2.0, 2.0, 2.0]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn ehvi_degenerate_limits() {
        let front = vec![vec![0.0, 0.0]];
        let r = [1.0, 1.0];
        let e = mo_acquisition(MoKind::Ehvi, &[-1.0, -1.0], &[1e-9, 1e-9], &front, Some(&r)).unwrap();
        assert_relative_eq!(e, 3.0, epsilon = 1e-6);
        let e = mo_acquisition(MoKind::Ehvi, &[0.5, 0.5], &[1e-9, 1e-9], &front, Some(&r)).unwrap();
        assert!(e < 1e-6);
        let p = mo_acquisition(MoKind::Pi, &[0.5, 0.5], &[1e-9, 1e-9], &front, None).unwrap();
        assert!(p < 1e-6);
        let p = mo_acquisition(MoKind::Pi, &[-0.5, 0.5], &[1e-9, 1e-9], &front, None).unwrap();
        assert!((p - 1.0).abs() < 1e-6);
        assert!(matches!(
            mo_acquisition(MoKind::Ehvi, &[0.0; 3], &[1.0; 3], &[], Some(&[1.0; 3])),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn mpi_examples() {
        assert_eq!(mo_acquisition(MoKind::Mpi, &[0.0, 0.0], &[1.0, 1.0], &[], None).unwrap(), 1.0);
        let v = mo_acquisition(MoKind::Mpi, &[0.0, 0.0], &[1.0, 1.0], &[vec![0.0, 0.0]], None).unwrap();
        assert_relative_eq!(v, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn regularized_examples() {
        assert_eq!(regularized(0.7, &[0.0, 0.0], 1.0, Psi::Sum).unwrap(), 0.7);
        assert_eq!(regularized(0.5, &[1.0, 3.0], 2.0, Psi::Max).unwrap(), -2.0);
        let a = 1.7;
        let m = regularized(0.3, &[a, a], 1.0, Psi::Max).unwrap();
        let s = regularized(0.3, &[a, a], 1.0, Psi::Sum).unwrap();
        assert_relative_eq!(m - s, a, epsilon = 1e-15);
        assert!(regularized(0.3, &[], 1.0, Psi::None).is_err());
    }
}
