//! Kriging with a constant trend.
//!
//! Hyperparameters are fitted by maximizing the concentrated log-likelihood
//! `-(n ln σ̂² + ln |R|) / 2`, with the trend `β` and process variance `σ̂²`
//! profiled out, using a multistart bounded simplex search.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernels::{factorize, Assembled, Features, Kernel, KernelConfig, KernelOptions, PairTable, ParamKind, Parameterization};
use crate::pls::{self, AdaptivePlsConfig};
use crate::simplex::{self, SimplexOptions};
use crate::space::{lhs_unit, DesignSpace, MixedPoint};

/// Hyperparameter reduction applied before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum Reduction {
    #[default]
    None,
    /// KPLS with a fixed number of components.
    Kpls(usize),
    /// KPLS with a component count chosen by cross-validation.
    AdaptiveKpls(AdaptivePlsConfig),
}

/// Options of [`GpModel::fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub kernel: KernelOptions,
    pub reduction: Reduction,
    /// Number of local searches; the first starts from the kernel defaults,
    /// the others from a Latin hypercube over the search box.
    pub n_starts: usize,
    /// Likelihood evaluations per local search; `None` scales with the
    /// number of hyperparameters.
    pub max_evals: Option<usize>,
    pub seed: u64,
    /// Starting point of the first local search, replacing the kernel
    /// defaults when its length matches the parameter count.
    #[serde(default)]
    pub initial_theta: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            kernel: KernelOptions::default(),
            reduction: Reduction::None,
            n_starts: 10,
            max_evals: None,
            seed: 0,
            initial_theta: None,
        }
    }
}

/// Mean and variance of a prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Profiled likelihood quantities at fixed hyperparameters.
struct Profile {
    value: f64,
    beta: f64,
    sigma2: f64,
    alpha: DVector<f64>,
    rinv_one: DVector<f64>,
    assembled: Assembled,
    constant_y: bool,
}

fn profile(kernel: &Kernel, theta: &[f64], table: &PairTable, y: &DVector<f64>, nugget: f64) -> Result<Profile> {
    let n = y.len();
    let pk = kernel.prepare(theta, false)?;
    let assembled = factorize(&pk.matrix(table), nugget)?;
    let chol = &assembled.chol;
    let ones = DVector::from_element(n, 1.0);
    let rinv_one = chol.solve(&ones);
    let rinv_y = chol.solve(y);
    let denom = rinv_one.sum();
    if !(denom > 0.0) {
        return Err(Error::Numerical("1ᵀR⁻¹1 is not positive".into()));
    }
    let beta = rinv_y.sum() / denom;
    let alpha = &rinv_y - &rinv_one * beta;
    let constant_y = y.iter().all(|v| *v == y[0]);
    let resid = y.add_scalar(-beta);
    let sigma2 = if constant_y { 0.0 } else { resid.dot(&alpha).max(0.0) / n as f64 };
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let value = if constant_y {
        -0.5 * log_det
    } else if sigma2 > 0.0 {
        -0.5 * (n as f64 * sigma2.ln() + log_det)
    } else {
        return Err(Error::Numerical("zero process variance".into()));
    };
    Ok(Profile {
        value,
        beta,
        sigma2,
        alpha,
        rinv_one,
        assembled,
        constant_y,
    })
}

fn check_data(space: &DesignSpace, points: &[MixedPoint], y: &[f64]) -> Result<()> {
    if points.len() != y.len() {
        return Err(Error::Argument("points and outputs differ in length".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("outputs must be finite".into()));
    }
    for p in points {
        if p.values().len() != space.len() {
            return Err(Error::Domain("point dimension does not match space".into()));
        }
    }
    Ok(())
}

/// Concentrated log-likelihood at `theta`.
///
/// For a constant output vector the data-fit term is dropped and the value
/// reduces to `-ln |R| / 2`.
pub fn log_likelihood(kernel: &Kernel, theta: &[f64], points: &[MixedPoint], y: &[f64]) -> Result<f64> {
    check_data(kernel.space(), points, y)?;
    let table = kernel.pair_table(points)?;
    Ok(profile(kernel, theta, &table, &DVector::from_column_slice(y), kernel.nugget(points.len()))?.value)
}

/// Gradient of [`log_likelihood`]:
/// `½ Tr((R⁻¹ r rᵀ R⁻¹ / σ̂² - R⁻¹) ∂R/∂θ)` with `r = y - β 1`.
pub fn likelihood_grad(kernel: &Kernel, theta: &[f64], points: &[MixedPoint], y: &[f64]) -> Result<Vec<f64>> {
    check_data(kernel.space(), points, y)?;
    for (t, p) in theta.iter().zip(kernel.params()) {
        if p.categorical && p.kind == ParamKind::Scale && *t == 0.0 {
            return Err(Error::OneSidedLimit(
                "derivative in a categorical direction at θ = 0 exists only as a one-sided limit".into(),
            ));
        }
    }
    let table = kernel.pair_table(points)?;
    let prof = profile(kernel, theta, &table, &DVector::from_column_slice(y), kernel.nugget(points.len()))?;
    let rinv = prof.assembled.chol.inverse();
    let dr = kernel.prepare(theta, true)?.matrix_derivatives(&table);
    Ok(dr
        .iter()
        .map(|d| {
            let fit = if prof.constant_y {
                0.0
            } else {
                (d * &prof.alpha).dot(&prof.alpha) / prof.sigma2
            };
            let trace = rinv.component_mul(d).sum();
            0.5 * (fit - trace)
        })
        .collect())
}

/// Fitted kriging model.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: Kernel,
    theta: Vec<f64>,
    points: Vec<MixedPoint>,
    y: Vec<f64>,
    features: Vec<Features>,
    beta: f64,
    sigma2: f64,
    nugget: f64,
    alpha: DVector<f64>,
    rinv_one: DVector<f64>,
    one_rinv_one: f64,
    assembled: Assembled,
    log_likelihood: f64,
}

impl GpModel {
    /// Fits hyperparameters by multistart maximum likelihood.
    pub fn fit(space: &DesignSpace, points: &[MixedPoint], y: &[f64], options: &FitOptions) -> Result<Self> {
        check_data(space, points, y)?;
        if points.len() < 2 {
            return Err(Error::Argument("fitting needs at least two points".into()));
        }
        let kernel = build_kernel(space, points, y, options)?;
        let table = kernel.pair_table(points)?;
        let yv = DVector::from_column_slice(y);
        let nugget = kernel.nugget(points.len());

        let bounds = kernel.bounds();
        let kinds: Vec<ParamKind> = kernel.params().iter().map(|p| p.kind).collect();
        let to_search = |theta: &[f64]| -> Vec<f64> {
            theta
                .iter()
                .zip(&kinds)
                .map(|(t, k)| match k {
                    ParamKind::Scale => t.log10(),
                    ParamKind::Angle => *t,
                })
                .collect()
        };
        let from_search = |s: &[f64]| -> Vec<f64> {
            s.iter()
                .zip(&kinds)
                .map(|(v, k)| match k {
                    ParamKind::Scale => 10f64.powf(*v),
                    ParamKind::Angle => *v,
                })
                .collect()
        };
        let search_bounds: Vec<(f64, f64)> = to_search(&bounds.iter().map(|b| b.0).collect::<Vec<_>>())
            .into_iter()
            .zip(to_search(&bounds.iter().map(|b| b.1).collect::<Vec<_>>()))
            .collect();

        let np = kernel.n_params();
        let n_starts = options.n_starts.max(1);
        let first = match &options.initial_theta {
            Some(t) if t.len() == np && t.iter().zip(&bounds).all(|(v, (lo, hi))| v >= lo && v <= hi) => t.clone(),
            _ => kernel.default_theta(),
        };
        let mut starts = vec![to_search(&first)];
        if n_starts > 1 && np > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            for u in lhs_unit(n_starts - 1, np, &mut rng) {
                starts.push(
                    u.iter()
                        .zip(&search_bounds)
                        .map(|(x, (lo, hi))| lo + x * (hi - lo))
                        .collect(),
                );
            }
        }
        let simplex_opts = SimplexOptions {
            max_evals: options.max_evals.unwrap_or((40 * (np + 1)).clamp(100, 800)),
            initial_step: 0.15,
            f_tol: 1e-8,
            x_tol: 1e-6,
        };
        let objective = |s: &[f64]| -> f64 {
            match profile(&kernel, &from_search(s), &table, &yv, nugget) {
                Ok(p) => -p.value,
                Err(_) => f64::INFINITY,
            }
        };
        let results: Vec<(f64, Vec<f64>)> = if np == 0 {
            vec![(objective(&[]), vec![])]
        } else {
            starts
                .par_iter()
                .map(|s| {
                    let r = simplex::minimize(objective, s, &search_bounds, &simplex_opts);
                    (r.f, r.x)
                })
                .collect()
        };
        let mut best = 0;
        for (i, r) in results.iter().enumerate() {
            if r.0 < results[best].0 {
                best = i;
            }
        }
        if !results[best].0.is_finite() {
            return Err(Error::Fit("every likelihood search start failed".into()));
        }
        let theta = from_search(&results[best].1);
        GpModel::build(kernel, theta, points, y, Some(table))
    }

    /// Model at fixed hyperparameters (no likelihood search).
    pub fn with_theta(kernel: Kernel, theta: Vec<f64>, points: &[MixedPoint], y: &[f64]) -> Result<Self> {
        check_data(kernel.space(), points, y)?;
        if points.is_empty() {
            return Err(Error::Argument("a model needs at least one point".into()));
        }
        GpModel::build(kernel, theta, points, y, None)
    }

    fn build(kernel: Kernel, theta: Vec<f64>, points: &[MixedPoint], y: &[f64], table: Option<PairTable>) -> Result<Self> {
        let features = points.iter().map(|p| kernel.features(p)).collect::<Result<Vec<_>>>()?;
        let table = match table {
            Some(t) => t,
            None => kernel.pair_table_from_features(&features),
        };
        let prof = profile(&kernel, &theta, &table, &DVector::from_column_slice(y), kernel.nugget(points.len()))?;
        // a constant output has no spread; keep a tiny positive variance
        let sigma2 = if prof.constant_y {
            f64::MIN_POSITIVE
        } else {
            prof.sigma2
        };
        Ok(GpModel {
            one_rinv_one: prof.rinv_one.sum(),
            nugget: prof.assembled.nugget,
            kernel,
            theta,
            points: points.to_vec(),
            y: y.to_vec(),
            features,
            beta: prof.beta,
            sigma2,
            alpha: prof.alpha,
            rinv_one: prof.rinv_one,
            assembled: prof.assembled,
            log_likelihood: prof.value,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn points(&self) -> &[MixedPoint] {
        &self.points
    }

    pub fn outputs(&self) -> &[f64] {
        &self.y
    }

    /// Correlation matrix used by the model (nugget included).
    pub fn correlation_matrix(&self) -> &DMatrix<f64> {
        &self.assembled.r
    }

    fn cross(&self, x: &MixedPoint) -> Result<DVector<f64>> {
        let f = self.kernel.features(x)?;
        let pk = self.kernel.prepare(&self.theta, false)?;
        Ok(DVector::from_vec(self.kernel.cross(&pk, &f, &self.features)))
    }

    /// Kriging mean and variance at `x`.
    pub fn predict(&self, x: &MixedPoint) -> Result<Prediction> {
        let k = self.cross(x)?;
        Ok(self.predict_from_cross(&k))
    }

    fn predict_from_cross(&self, k: &DVector<f64>) -> Prediction {
        let mean = self.beta + k.dot(&self.alpha);
        let rinv_k = self.assembled.chol.solve(k);
        let u = 1.0 - self.rinv_one.dot(k);
        let var = self.sigma2 * (1.0 - k.dot(&rinv_k) + u * u / self.one_rinv_one);
        Prediction {
            mean,
            variance: var.max(0.0),
        }
    }

    /// Kriging mean only.
    pub fn predict_mean(&self, x: &MixedPoint) -> Result<f64> {
        Ok(self.beta + self.cross(x)?.dot(&self.alpha))
    }

    /// Predictions at many points, evaluated in parallel.
    pub fn predict_many(&self, xs: &[MixedPoint]) -> Result<Vec<Prediction>> {
        let pk = self.kernel.prepare(&self.theta, false)?;
        xs.par_iter()
            .map(|x| {
                let f = self.kernel.features(x)?;
                let k = DVector::from_vec(self.kernel.cross(&pk, &f, &self.features));
                Ok(self.predict_from_cross(&k))
            })
            .collect()
    }

    /// Serializable snapshot of the model.
    pub fn export(&self) -> Result<ModelExport> {
        Ok(ModelExport {
            space: serde_json::from_str(&self.kernel.space().to_json()?)?,
            kernel: KernelConfig {
                options: *self.kernel.options(),
                parameterization: self.kernel.parameterization().clone(),
                theta: self.theta.clone(),
            },
            beta: self.beta,
            sigma2: self.sigma2,
            nugget: self.nugget,
            points: self.points.clone(),
            y: self.y.clone(),
            doe_hash: doe_hash(self.kernel.space(), &self.points, &self.y)?,
        })
    }

    /// Rebuilds a model from an export, checking the DoE hash.
    pub fn from_export(e: &ModelExport) -> Result<Self> {
        let space = DesignSpace::from_json(&serde_json::to_string(&e.space)?)?;
        let hash = doe_hash(&space, &e.points, &e.y)?;
        if hash != e.doe_hash {
            return Err(Error::Serde("DoE hash mismatch".into()));
        }
        let mut options = e.kernel.options;
        options.nugget = Some(e.nugget);
        let kernel = Kernel::with_parameterization(&space, options, &e.kernel.parameterization)?;
        GpModel::with_theta(kernel, e.kernel.theta.clone(), &e.points, &e.y)
    }
}

fn build_kernel(space: &DesignSpace, points: &[MixedPoint], y: &[f64], options: &FitOptions) -> Result<Kernel> {
    let h = match &options.reduction {
        Reduction::None => return Kernel::new(space, options.kernel),
        Reduction::Kpls(h) => *h,
        Reduction::AdaptiveKpls(cfg) => pls::adaptive_components(space, points, y, cfg, options)?,
    };
    let x = points.iter().map(|p| space.encode_unit(p)).collect::<Result<Vec<_>>>()?;
    let proj = pls::fit_pls(&x, y, h)?;
    Kernel::with_parameterization(space, options.kernel, &Parameterization::Kpls { weights: proj.weights_rows() })
}

/// SHA-256 of the encoded points and outputs, hex encoded.
pub fn doe_hash(space: &DesignSpace, points: &[MixedPoint], y: &[f64]) -> Result<String> {
    let mut h = Sha256::new();
    for p in points {
        for v in space.encode(p)? {
            h.update(v.to_le_bytes());
        }
    }
    for v in y {
        h.update(v.to_le_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

/// On-disk form of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelExport {
    pub space: serde_json::Value,
    pub kernel: KernelConfig,
    pub beta: f64,
    pub sigma2: f64,
    pub nugget: f64,
    pub points: Vec<MixedPoint>,
    pub y: Vec<f64>,
    pub doe_hash: String,
}
