//! Activity-aware distances and correlations for decreed variables.
//!
//! A decreed continuous value `x ∈ [0, 1]` is embedded on the unit circle by
//! [`alg_embed`] and sent to the origin when excluded, so that the Euclidean
//! distance between embeddings gives the algebraic distance [`alg_distance`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Treatment of decreed categorical variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecreedMode {
    /// Activity-aware kernel built from the diagonal level scales.
    Algebraic,
    /// Gower-type distances scaled by a single `θ_cov`.
    Gower,
    /// Excluded levels replaced by level 0, then the plain categorical kernel.
    Imputation,
}

/// Maps `x ∈ [0, 1]` to the unit circle; excluded values map to the origin.
pub fn alg_embed(x: f64, active: bool) -> Result<[f64; 2]> {
    if !active {
        return Ok([0.0, 0.0]);
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("algebraic embedding expects x in [0, 1], got {x}")));
    }
    let d = 1.0 + x * x;
    Ok([(1.0 - x * x) / d, 2.0 * x / d])
}

/// Algebraic distance between two decreed values.
pub fn alg_distance(u: f64, v: f64, u_active: bool, v_active: bool, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Argument(format!("θ must be positive, got {theta}")));
    }
    for (x, a) in [(u, u_active), (v, v_active)] {
        if a && !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("algebraic distance expects values in [0, 1], got {x}")));
        }
    }
    Ok(theta * unit_alg_distance(u, v, u_active, v_active))
}

/// [`alg_distance`] with `θ = 1` and no argument checks.
pub(crate) fn unit_alg_distance(u: f64, v: f64, u_active: bool, v_active: bool) -> f64 {
    match (u_active, v_active) {
        (false, false) => 0.0,
        (true, true) => 2.0 * (u - v).abs() / ((u * u + 1.0).sqrt() * (v * v + 1.0).sqrt()),
        _ => 1.0,
    }
}

/// Hyperparameters of a decreed categorical variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecreedCategoricalParams {
    pub mode: DecreedMode,
    /// Diagonal level scales `Φ_jj` (algebraic and imputation modes).
    pub phi: Vec<f64>,
    /// Gower scale.
    pub theta_cov: f64,
}

/// Correlation between two values of a decreed categorical variable with
/// `L = params.phi.len()` levels. `None` marks an excluded value.
///
/// In imputation mode the diagonal scales are read as a CR kernel.
pub fn decreed_categorical_corr(r: Option<usize>, s: Option<usize>, params: &DecreedCategoricalParams) -> Result<f64> {
    let l = params.phi.len();
    for v in [r, s].into_iter().flatten() {
        if v >= l {
            return Err(Error::Domain(format!("level {v} out of range for {l} levels")));
        }
    }
    let (a, b) = (r.unwrap_or(l), s.unwrap_or(l));
    let m = match params.mode {
        DecreedMode::Algebraic => algebraic_matrix(&params.phi),
        DecreedMode::Gower => gower_matrix(l, params.theta_cov),
        DecreedMode::Imputation => {
            let (a, b) = (r.unwrap_or(0), s.unwrap_or(0));
            return Ok(if a == b {
                1.0
            } else {
                (-params.phi[a] - params.phi[b]).exp()
            });
        }
    };
    Ok(m[a * (l + 1) + b])
}

/// `(L+1) × (L+1)` correlation matrix of the algebraic mode; index `L` is the
/// excluded state.
pub(crate) fn algebraic_matrix(phi: &[f64]) -> Vec<f64> {
    let l = phi.len();
    let k = l + 1;
    let sqrt2 = std::f64::consts::SQRT_2;
    let one_sided = (-phi.iter().sum::<f64>()).exp();
    let mut m = vec![1.0; k * k];
    for r in 0..k {
        for s in 0..k {
            if r == s {
                continue;
            }
            m[r * k + s] = if r == l || s == l {
                one_sided
            } else {
                (-sqrt2 * (phi[r] + phi[s])).exp()
            };
        }
    }
    m
}

/// Derivatives of [`algebraic_matrix`] with respect to each `φ_j`.
pub(crate) fn algebraic_matrix_derivatives(phi: &[f64]) -> Vec<Vec<f64>> {
    let l = phi.len();
    let k = l + 1;
    let m = algebraic_matrix(phi);
    let sqrt2 = std::f64::consts::SQRT_2;
    (0..l)
        .map(|j| {
            let mut d = vec![0.0; k * k];
            for r in 0..k {
                for s in 0..k {
                    if r == s {
                        continue;
                    }
                    d[r * k + s] = if r == l || s == l {
                        -m[r * k + s]
                    } else {
                        let hits = (r == j) as u8 + (s == j) as u8;
                        -sqrt2 * hits as f64 * m[r * k + s]
                    };
                }
            }
            d
        })
        .collect()
}

/// `(L+1) × (L+1)` correlation matrix of the Gower mode: distances `0`,
/// `√2 θ_cov` (both included, different levels) and `L θ_cov / 2` (one
/// excluded).
pub(crate) fn gower_matrix(l: usize, theta_cov: f64) -> Vec<f64> {
    let k = l + 1;
    let both = (-std::f64::consts::SQRT_2 * theta_cov).exp();
    let one = (-0.5 * l as f64 * theta_cov).exp();
    let mut m = vec![1.0; k * k];
    for r in 0..k {
        for s in 0..k {
            if r != s {
                m[r * k + s] = if r == l || s == l { one } else { both };
            }
        }
    }
    m
}

pub(crate) fn gower_matrix_derivative(l: usize, theta_cov: f64) -> Vec<f64> {
    let k = l + 1;
    let m = gower_matrix(l, theta_cov);
    let mut d = vec![0.0; k * k];
    for r in 0..k {
        for s in 0..k {
            if r != s {
                let rate = if r == l || s == l {
                    0.5 * l as f64
                } else {
                    std::f64::consts::SQRT_2
                };
                d[r * k + s] = -rate * m[r * k + s];
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn embed_examples() {
        assert_eq!(alg_embed(0.0, true).unwrap(), [1.0, 0.0]);
        let e = alg_embed(1.0, true).unwrap();
        assert_relative_eq!(e[0], 0.0);
        assert_relative_eq!(e[1], 1.0);
        assert_eq!(alg_embed(0.3, false).unwrap(), [0.0, 0.0]);
        assert!(alg_embed(1.5, true).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(alg_distance(0.2, 0.7, false, false, 1.0).unwrap(), 0.0);
        assert_eq!(alg_distance(0.2, 0.7, true, false, 1.0).unwrap(), 1.0);
        assert_relative_eq!(alg_distance(0.0, 1.0, true, true, 1.0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert!(alg_distance(0.0, 1.0, true, true, 0.0).is_err());
    }

    #[test]
    fn decreed_categorical_examples() {
        let p = DecreedCategoricalParams {
            mode: DecreedMode::Algebraic,
            phi: vec![1.0; 3],
            theta_cov: 1.0,
        };
        assert_eq!(decreed_categorical_corr(None, None, &p).unwrap(), 1.0);
        assert_relative_eq!(decreed_categorical_corr(Some(1), None, &p).unwrap(), (-3.0f64).exp(), epsilon = 1e-15);
        assert_eq!(decreed_categorical_corr(Some(2), Some(2), &p).unwrap(), 1.0);
        let g = DecreedCategoricalParams {
            mode: DecreedMode::Gower,
            ..p.clone()
        };
        let c = decreed_categorical_corr(Some(0), Some(1), &g).unwrap();
        assert_relative_eq!(-c.ln(), 2f64.sqrt(), epsilon = 1e-14);
        assert!(decreed_categorical_corr(Some(3), None, &p).is_err());
    }

    #[test]
    fn matrix_derivatives_match_finite_differences() {
        let phi = vec![0.3, 0.8, 1.1];
        let d = algebraic_matrix_derivatives(&phi);
        let h = 1e-6;
        for (j, dj) in d.iter().enumerate() {
            let mut up = phi.clone();
            up[j] += h;
            let mut dn = phi.clone();
            dn[j] -= h;
            let (a, b) = (algebraic_matrix(&up), algebraic_matrix(&dn));
            for i in 0..16 {
                assert!(((a[i] - b[i]) / (2.0 * h) - dj[i]).abs() < 1e-8);
            }
        }
        let dg = gower_matrix_derivative(3, 0.7);
        let (a, b) = (gower_matrix(3, 0.7 + h), gower_matrix(3, 0.7 - h));
        for i in 0..16 {
            assert!(((a[i] - b[i]) / (2.0 * h) - dg[i]).abs() < 1e-8);
        }
    }
}
