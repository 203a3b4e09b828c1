//! Categorical correlation kernels: GD, CR, EHH and HH.
//!
//! Every kernel of the family is described by a symmetric `L × L` level
//! correlation matrix. GD uses one scale, CR one scale per level, EHH adds a
//! hypersphere-parameterized correlation between levels, and HH uses the
//! hypersphere correlation directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Member of the categorical kernel family, ordered by parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CategoricalKind {
    /// Gower distance: one scale shared by all level pairs.
    Gd,
    /// Continuous relaxation: one scale per level.
    Cr,
    /// Exponential homoscedastic hypersphere: per-level scales and
    /// `L(L-1)/2` angles.
    Ehh,
    /// Homoscedastic hypersphere: `L(L-1)/2` angles.
    Hh,
}

impl CategoricalKind {
    /// Number of (scale, angle) hyperparameters for `l` levels.
    pub fn n_params(self, l: usize) -> (usize, usize) {
        let angles = l * l.saturating_sub(1) / 2;
        match self {
            CategoricalKind::Gd => (1, 0),
            CategoricalKind::Cr => (l, 0),
            CategoricalKind::Ehh => (l, angles),
            CategoricalKind::Hh => (0, angles),
        }
    }
}

/// Hyperparameters of one categorical variable.
///
/// `angles` holds the strict lower triangle of the angle matrix row by row:
/// the angle of entry `(i, k)`, `k < i`, sits at `i(i-1)/2 + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalKernelParams {
    pub kind: CategoricalKind,
    pub n_levels: usize,
    pub scales: Vec<f64>,
    pub angles: Vec<f64>,
    pub eps: f64,
}

pub(crate) fn angle_index(i: usize, k: usize) -> usize {
    i * (i - 1) / 2 + k
}

impl CategoricalKernelParams {
    pub fn new(kind: CategoricalKind, n_levels: usize, scales: Vec<f64>, angles: Vec<f64>, eps: f64) -> Result<Self> {
        let p = CategoricalKernelParams {
            kind,
            n_levels,
            scales,
            angles,
            eps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn gd(n_levels: usize, theta: f64) -> Self {
        CategoricalKernelParams {
            kind: CategoricalKind::Gd,
            n_levels,
            scales: vec![theta],
            angles: vec![],
            eps: DEFAULT_EPS,
        }
    }

    pub fn cr(scales: Vec<f64>) -> Self {
        CategoricalKernelParams {
            kind: CategoricalKind::Cr,
            n_levels: scales.len(),
            scales,
            angles: vec![],
            eps: DEFAULT_EPS,
        }
    }

    pub fn ehh(scales: Vec<f64>, angles: Vec<f64>, eps: f64) -> Self {
        CategoricalKernelParams {
            kind: CategoricalKind::Ehh,
            n_levels: scales.len(),
            scales,
            angles,
            eps,
        }
    }

    pub fn hh(n_levels: usize, angles: Vec<f64>) -> Self {
        CategoricalKernelParams {
            kind: CategoricalKind::Hh,
            n_levels,
            scales: vec![],
            angles,
            eps: DEFAULT_EPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (ns, na) = self.kind.n_params(self.n_levels);
        if self.n_levels == 0 {
            return Err(Error::Argument("categorical kernel needs at least one level".into()));
        }
        if self.scales.len() != ns || self.angles.len() != na {
            return Err(Error::Argument(format!(
                "{:?} kernel on {} levels expects {ns} scales and {na} angles, got {} and {}",
                self.kind,
                self.n_levels,
                self.scales.len(),
                self.angles.len()
            )));
        }
        if self.scales.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Argument("categorical scales must be finite and nonnegative".into()));
        }
        check_angles(&self.angles)?;
        check_eps(self.eps)
    }

    /// Full `L × L` level correlation matrix, row-major.
    pub fn matrix(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let l = self.n_levels;
        let mut m = vec![1.0; l * l];
        match self.kind {
            CategoricalKind::Gd => {
                let v = (-self.scales[0]).exp();
                for r in 0..l {
                    for s in 0..l {
                        if r != s {
                            m[r * l + s] = v;
                        }
                    }
                }
            }
            CategoricalKind::Cr => {
                for r in 0..l {
                    for s in 0..l {
                        if r != s {
                            m[r * l + s] = (-self.scales[r] - self.scales[s]).exp();
                        }
                    }
                }
            }
            CategoricalKind::Ehh => {
                let phi = phi_matrix(l, &self.scales, &self.angles, self.eps)?;
                for r in 0..l {
                    for s in 0..l {
                        if r != s {
                            m[r * l + s] = (-phi[r * l + r] - phi[s * l + s] - 2.0 * phi[r * l + s]).exp();
                        }
                    }
                }
            }
            CategoricalKind::Hh => {
                let c = hypersphere_matrix(l, &self.angles)?;
                let s = gram(l, &c);
                for r in 0..l {
                    for q in 0..l {
                        if r != q {
                            m[r * l + q] = s[r * l + q];
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Derivative of [`matrix`](Self::matrix) with respect to each parameter,
    /// scales first then angles.
    pub fn matrix_derivatives(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let l = self.n_levels;
        let m = self.matrix()?;
        let mut out = Vec::new();
        match self.kind {
            CategoricalKind::Gd => {
                out.push(m.iter().enumerate().map(|(i, v)| if i / l == i % l { 0.0 } else { -v }).collect());
            }
            CategoricalKind::Cr | CategoricalKind::Ehh => {
                for t in 0..l {
                    let mut d = vec![0.0; l * l];
                    for r in 0..l {
                        for s in 0..l {
                            if r != s {
                                let hits = (r == t) as u8 + (s == t) as u8;
                                d[r * l + s] = -(hits as f64) * m[r * l + s];
                            }
                        }
                    }
                    out.push(d);
                }
                if self.kind == CategoricalKind::Ehh {
                    // M_rs = exp(-θr - θs + |ln ε| (S_rs - 1))
                    let k = -self.eps.ln();
                    for ds in gram_derivatives(l, &self.angles)? {
                        out.push(
                            (0..l * l)
                                .map(|i| if i / l == i % l { 0.0 } else { k * ds[i] * m[i] })
                                .collect(),
                        );
                    }
                }
            }
            CategoricalKind::Hh => {
                for ds in gram_derivatives(l, &self.angles)? {
                    out.push((0..l * l).map(|i| if i / l == i % l { 0.0 } else { ds[i] }).collect());
                }
            }
        }
        Ok(out)
    }
}

/// Default `ε` of the Φ mapping.
pub const DEFAULT_EPS: f64 = 1e-2;

fn check_angles(angles: &[f64]) -> Result<()> {
    if angles
        .iter()
        .any(|a| !(a.is_finite() && (0.0..=std::f64::consts::PI).contains(a)))
    {
        return Err(Error::Argument("hypersphere angles must lie in [0, π]".into()));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("ε must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Product of the cos/sin factors of entry `(i, j)` of `C`; when `d` is
/// `Some(k)`, the factor holding angle `(i, k)` is replaced by its derivative.
fn hypersphere_entry(angles: &[f64], i: usize, j: usize, d: Option<usize>) -> f64 {
    if i == 0 {
        return if j == 0 && d.is_none() { 1.0 } else { 0.0 };
    }
    if j > i {
        return 0.0;
    }
    let a = |k: usize| angles[angle_index(i, k)];
    let mut v = 1.0;
    let mut touched = false;
    for k in 0..j {
        if d == Some(k) {
            v *= a(k).cos();
            touched = true;
        } else {
            v *= a(k).sin();
        }
    }
    if j < i {
        if d == Some(j) {
            v *= -a(j).sin();
            touched = true;
        } else {
            v *= a(j).cos();
        }
    }
    if d.is_some() && !touched {
        return 0.0;
    }
    v
}

/// Lower-triangular hypersphere factor `C` (row-major, `L × L`) from the
/// strict-lower-triangle angles. `C Cᵀ` has unit diagonal.
pub fn hypersphere_matrix(l: usize, angles: &[f64]) -> Result<Vec<f64>> {
    if angles.len() != l * l.saturating_sub(1) / 2 {
        return Err(Error::Argument(format!("{l} levels need {} angles", l * l.saturating_sub(1) / 2)));
    }
    check_angles(angles)?;
    let mut c = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..=i {
            c[i * l + j] = hypersphere_entry(angles, i, j, None);
        }
    }
    Ok(c)
}

fn gram(l: usize, c: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; l * l];
    for r in 0..l {
        for q in 0..l {
            s[r * l + q] = (0..l).map(|k| c[r * l + k] * c[q * l + k]).sum();
        }
    }
    s
}

/// Derivatives of `C Cᵀ` with respect to each angle.
fn gram_derivatives(l: usize, angles: &[f64]) -> Result<Vec<Vec<f64>>> {
    let c = hypersphere_matrix(l, angles)?;
    let mut out = Vec::with_capacity(angles.len());
    for i in 1..l {
        for k in 0..i {
            // only row i of C depends on angle (i, k)
            let dc: Vec<f64> = (0..l).map(|j| hypersphere_entry(angles, i, j, Some(k))).collect();
            let mut ds = vec![0.0; l * l];
            for q in 0..l {
                let v: f64 = (0..l).map(|j| dc[j] * c[q * l + j]).sum();
                ds[i * l + q] += v;
                ds[q * l + i] += v;
            }
            out.push(ds);
        }
    }
    Ok(out)
}

/// Φ matrix: per-level scales on the diagonal and
/// `(ln ε / 2)([C Cᵀ] - 1)` off the diagonal.
pub fn phi_matrix(l: usize, scales: &[f64], angles: &[f64], eps: f64) -> Result<Vec<f64>> {
    check_eps(eps)?;
    if scales.len() != l {
        return Err(Error::Argument(format!("{l} levels need {l} diagonal scales")));
    }
    let c = hypersphere_matrix(l, angles)?;
    let s = gram(l, &c);
    let half_log = 0.5 * eps.ln();
    let mut phi = vec![0.0; l * l];
    for r in 0..l {
        for q in 0..l {
            phi[r * l + q] = if r == q {
                scales[r]
            } else {
                half_log * (s[r * l + q] - 1.0)
            };
        }
    }
    Ok(phi)
}

/// Correlation between levels `r` and `s`.
pub fn categorical_corr(r: usize, s: usize, params: &CategoricalKernelParams) -> Result<f64> {
    let l = params.n_levels;
    if r >= l || s >= l {
        return Err(Error::Domain(format!("level pair ({r}, {s}) out of range for {l} levels")));
    }
    if r == s {
        params.validate()?;
        return Ok(1.0);
    }
    Ok(params.matrix()?[r * l + s])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn hypersphere_zero_angles() {
        let c = hypersphere_matrix(4, &[0.0; 6]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(c[i * 4 + j], if j == 0 { 1.0 } else { 0.0 });
            }
        }
        assert!(gram(4, &c).iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert_eq!(hypersphere_matrix(1, &[]).unwrap(), vec![1.0]);
    }

    #[test]
    fn hypersphere_right_angle() {
        let c = hypersphere_matrix(2, &[PI / 2.0]).unwrap();
        let s = gram(2, &c);
        assert!(s[1].abs() < 1e-15);
        assert!((s[3] - 1.0).abs() < 1e-15);
        assert!(hypersphere_matrix(2, &[4.0]).is_err());
    }

    #[test]
    fn gram_has_unit_diagonal() {
        let angles = [0.3, 1.2, 2.9, 0.7, 1.9, 3.0];
        let s = gram(4, &hypersphere_matrix(4, &angles).unwrap());
        for i in 0..4 {
            assert_relative_eq!(s[i * 4 + i], 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn phi_examples() {
        let phi = phi_matrix(3, &[0.5, 1.0, 2.0], &[0.0; 3], 1e-2).unwrap();
        for r in 0..3 {
            for s in 0..3 {
                if r != s {
                    assert!(phi[r * 3 + s].abs() < 1e-15);
                }
            }
        }
        let phi = phi_matrix(2, &[0.0, 0.0], &[PI / 2.0], (-2.0f64).exp()).unwrap();
        assert_relative_eq!(phi[1], 1.0, epsilon = 1e-12);
        assert!(phi_matrix(2, &[0.0, 0.0], &[0.1], 1.0).is_err());
    }

    #[test]
    fn reductions() {
        let scales = vec![0.4, 1.3, 0.2];
        let cr = CategoricalKernelParams::cr(scales.clone());
        let ehh = CategoricalKernelParams::ehh(scales, vec![0.0; 3], 1e-2);
        let gd = CategoricalKernelParams::gd(3, 0.8);
        let tied = CategoricalKernelParams::cr(vec![0.4; 3]);
        for r in 0..3 {
            for s in 0..3 {
                let a = categorical_corr(r, s, &cr).unwrap();
                let b = categorical_corr(r, s, &ehh).unwrap();
                assert!((a - b).abs() < 1e-12);
                let g = categorical_corr(r, s, &gd).unwrap();
                let t = categorical_corr(r, s, &tied).unwrap();
                assert!((g - t).abs() < 1e-12);
            }
        }
        assert!(matches!(categorical_corr(3, 0, &gd), Err(Error::Domain(_))));
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(CategoricalKind::Gd.n_params(5), (1, 0));
        assert_eq!(CategoricalKind::Cr.n_params(5), (5, 0));
        assert_eq!(CategoricalKind::Ehh.n_params(5), (5, 10));
        assert_eq!(CategoricalKind::Hh.n_params(5), (0, 10));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let base = [
            CategoricalKernelParams::gd(3, 0.7),
            CategoricalKernelParams::cr(vec![0.3, 0.9, 1.4]),
            CategoricalKernelParams::ehh(vec![0.3, 0.9, 1.4], vec![0.4, 1.1, 2.2], 1e-2),
            CategoricalKernelParams::hh(3, vec![0.4, 1.1, 2.2]),
        ];
        for p in &base {
            let d = p.matrix_derivatives().unwrap();
            let n_scales = p.scales.len();
            for (k, dk) in d.iter().enumerate() {
                let h = 1e-6;
                let shifted = |delta: f64| {
                    let mut q = p.clone();
                    if k < n_scales {
                        q.scales[k] += delta;
                    } else {
                        q.angles[k - n_scales] += delta;
                    }
                    q.matrix().unwrap()
                };
                let (plus, minus) = (shifted(h), shifted(-h));
                for i in 0..9 {
                    let fd = (plus[i] - minus[i]) / (2.0 * h);
                    assert!((fd - dk[i]).abs() < 1e-7, "{:?} param {k} entry {i}: {fd} vs {}", p.kind, dk[i]);
                }
            }
        }
    }
}
