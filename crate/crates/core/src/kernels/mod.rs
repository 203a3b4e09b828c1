//! Correlation kernels over mixed hierarchical spaces.
//!
//! The correlation between two points is the product of one factor per
//! variable: a squared-exponential factor for continuous and integer
//! variables (on inputs normalized to `[0, 1]`), a level-correlation matrix
//! for categorical variables, and activity-aware factors for decreed
//! variables. Under a KPLS parameterization the whole relaxed vector is
//! handled by a squared-exponential kernel whose length-scales are induced
//! by PLS weights.

pub mod categorical;
pub mod hierarchical;

use nalgebra::{Cholesky, DMatrix, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{DesignSpace, MixedPoint, VarKind, Value};

pub use categorical::{
    categorical_corr, hypersphere_matrix, phi_matrix, CategoricalKernelParams, CategoricalKind, DEFAULT_EPS,
};
pub use hierarchical::{alg_distance, alg_embed, decreed_categorical_corr, DecreedCategoricalParams, DecreedMode};

/// Squared-exponential correlation `exp(-Σ θ_k (x_k - x2_k)²)`.
pub fn continuous_corr(x: &[f64], x2: &[f64], theta: &[f64]) -> Result<f64> {
    if x.len() != x2.len() || x.len() != theta.len() {
        return Err(Error::Argument("continuous_corr expects equal lengths".into()));
    }
    if theta.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::Argument("θ must be nonnegative".into()));
    }
    let s: f64 = x
        .iter()
        .zip(x2)
        .zip(theta)
        .map(|((a, b), t)| t * (a - b) * (a - b))
        .sum();
    Ok((-s).exp())
}

/// User-facing kernel choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelOptions {
    pub categorical: CategoricalKind,
    pub decreed_mode: DecreedMode,
    /// Use activity-aware factors for decreed variables; otherwise decreed
    /// variables are read through their imputed values.
    pub hierarchical: bool,
    pub eps: f64,
    /// Diagonal nugget; `None` selects `1e-10 · n`.
    pub nugget: Option<f64>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            categorical: CategoricalKind::Cr,
            decreed_mode: DecreedMode::Algebraic,
            hierarchical: true,
            eps: DEFAULT_EPS,
            nugget: None,
        }
    }
}

impl KernelOptions {
    pub fn with_categorical(mut self, kind: CategoricalKind) -> Self {
        self.categorical = kind;
        self
    }

    pub fn with_decreed_mode(mut self, mode: DecreedMode) -> Self {
        self.decreed_mode = mode;
        self
    }
}

/// How hyperparameters map to the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Parameterization {
    /// One block of hyperparameters per variable.
    Full,
    /// `h` hyperparameters; `weights` is the `d' × h` PLS weight matrix over
    /// the normalized relaxed vector.
    Kpls { weights: Vec<Vec<f64>> },
}

/// Nature of a hyperparameter, which fixes its search bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    /// Length-scale type parameter `θ ≥ 0`.
    Scale,
    /// Hypersphere angle in `[0, π]`.
    Angle,
}

/// Description of one hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamInfo {
    pub kind: ParamKind,
    /// Variable the parameter belongs to (`None` for KPLS components).
    pub var: Option<usize>,
    /// True for scales of categorical factors.
    pub categorical: bool,
}

/// Search bounds of scale hyperparameters.
pub const SCALE_BOUNDS: (f64, f64) = (1e-6, 1e2);
/// Search bounds of hypersphere angles.
pub const ANGLE_BOUNDS: (f64, f64) = (1e-6, std::f64::consts::PI - 1e-6);

#[derive(Debug, Clone, PartialEq)]
enum CatModel {
    Plain(CategoricalKind),
    /// Algebraic decreed kernel; `tied` derives every `φ_j = θ/2` from one
    /// parameter.
    Algebraic { tied: bool },
    Gower,
}

#[derive(Debug, Clone, PartialEq)]
enum Term {
    Sq { var: usize, param: usize, alg: bool },
    Kpls { param: usize, w2: Vec<f64> },
    Cat { var: usize, levels: usize, model: CatModel, first: usize, count: usize, extended: bool },
}

/// Pairwise feature consumed by one term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Pair {
    Sq(f64),
    Lv(u32, u32),
}

/// Per-point inputs of the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    x: Vec<f64>,
    lv: Vec<usize>,
    on: Vec<bool>,
}

/// Kernel structure bound to a design space.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    space: DesignSpace,
    options: KernelOptions,
    parameterization: Parameterization,
    terms: Vec<Term>,
    params: Vec<ParamInfo>,
}

/// Level-correlation matrix of one categorical term at fixed hyperparameters.
#[derive(Debug, Clone)]
pub(crate) struct MatTerm {
    k: usize,
    m: Vec<f64>,
    dm: Vec<Vec<f64>>,
    first: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum Prepared {
    Sq { theta: f64, param: usize },
    Mat(MatTerm),
}

/// Kernel with hyperparameters bound, ready to evaluate correlations.
#[derive(Debug, Clone)]
pub struct PreparedKernel {
    terms: Vec<Prepared>,
    n_params: usize,
}

impl Kernel {
    /// Kernel with one hyperparameter block per variable.
    pub fn new(space: &DesignSpace, options: KernelOptions) -> Result<Self> {
        if !(options.eps > 0.0 && options.eps < 1.0) {
            return Err(Error::Argument(format!("ε must lie in (0, 1), got {}", options.eps)));
        }
        if let Some(n) = options.nugget {
            if !(n > 0.0) {
                return Err(Error::Argument("nugget must be positive".into()));
            }
        }
        let mut terms = Vec::new();
        let mut params = Vec::new();
        for (i, v) in space.variables().iter().enumerate() {
            let decreed = options.hierarchical && v.is_decreed();
            match &v.kind {
                VarKind::Continuous { .. } | VarKind::Integer { .. } => {
                    terms.push(Term::Sq {
                        var: i,
                        param: params.len(),
                        alg: decreed,
                    });
                    params.push(ParamInfo {
                        kind: ParamKind::Scale,
                        var: Some(i),
                        categorical: false,
                    });
                }
                VarKind::Categorical { levels } => {
                    let l = levels.len();
                    let mode = if decreed { Some(options.decreed_mode) } else { None };
                    let (model, extended) = match (mode, options.categorical) {
                        (Some(DecreedMode::Gower), _) => (CatModel::Gower, true),
                        (Some(DecreedMode::Algebraic), CategoricalKind::Gd) => (CatModel::Algebraic { tied: true }, true),
                        (Some(DecreedMode::Algebraic), CategoricalKind::Cr | CategoricalKind::Ehh) => {
                            (CatModel::Algebraic { tied: false }, true)
                        }
                        (_, kind) => (CatModel::Plain(kind), false),
                    };
                    let (scales, angles) = match &model {
                        CatModel::Plain(kind) => kind.n_params(l),
                        CatModel::Algebraic { tied: true } | CatModel::Gower => (1, 0),
                        CatModel::Algebraic { tied: false } => (l, 0),
                    };
                    if l == 1 && !extended {
                        // a single level never changes the correlation
                        continue;
                    }
                    let first = params.len();
                    for _ in 0..scales {
                        params.push(ParamInfo {
                            kind: ParamKind::Scale,
                            var: Some(i),
                            categorical: true,
                        });
                    }
                    for _ in 0..angles {
                        params.push(ParamInfo {
                            kind: ParamKind::Angle,
                            var: Some(i),
                            categorical: true,
                        });
                    }
                    if scales + angles > 0 {
                        terms.push(Term::Cat {
                            var: i,
                            levels: l,
                            model,
                            first,
                            count: scales + angles,
                            extended,
                        });
                    }
                }
            }
        }
        Ok(Kernel {
            space: space.clone(),
            options,
            parameterization: Parameterization::Full,
            terms,
            params,
        })
    }

    /// KPLS kernel: `weights` is `d' × h`; the length-scale of relaxed
    /// coordinate `k` is `Σ_j w_kj² θ_j`.
    pub fn kpls(space: &DesignSpace, options: KernelOptions, weights: Vec<Vec<f64>>) -> Result<Self> {
        let dp = space.relaxed_dimension();
        if weights.len() != dp {
            return Err(Error::Argument(format!("KPLS weights need {dp} rows, got {}", weights.len())));
        }
        let h = weights.first().map_or(0, Vec::len);
        if h == 0 || weights.iter().any(|r| r.len() != h || r.iter().any(|w| !w.is_finite())) {
            return Err(Error::Argument("KPLS weights must be a finite d' × h matrix with h ≥ 1".into()));
        }
        let mut k = Kernel::new(space, options)?;
        k.terms = (0..h)
            .map(|j| Term::Kpls {
                param: j,
                w2: weights.iter().map(|r| r[j] * r[j]).collect(),
            })
            .collect();
        k.params = (0..h)
            .map(|_| ParamInfo {
                kind: ParamKind::Scale,
                var: None,
                categorical: false,
            })
            .collect();
        k.parameterization = Parameterization::Kpls { weights };
        Ok(k)
    }

    /// Builds the kernel described by `parameterization`.
    pub fn with_parameterization(space: &DesignSpace, options: KernelOptions, p: &Parameterization) -> Result<Self> {
        match p {
            Parameterization::Full => Kernel::new(space, options),
            Parameterization::Kpls { weights } => Kernel::kpls(space, options, weights.clone()),
        }
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn options(&self) -> &KernelOptions {
        &self.options
    }

    pub fn parameterization(&self) -> &Parameterization {
        &self.parameterization
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[ParamInfo] {
        &self.params
    }

    /// Hyperparameters used as the first fitting start: unit scales and
    /// right angles.
    pub fn default_theta(&self) -> Vec<f64> {
        self.params
            .iter()
            .map(|p| match p.kind {
                ParamKind::Scale => 1.0,
                ParamKind::Angle => std::f64::consts::FRAC_PI_2,
            })
            .collect()
    }

    /// Search bounds of each hyperparameter.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.params
            .iter()
            .map(|p| match p.kind {
                ParamKind::Scale => SCALE_BOUNDS,
                ParamKind::Angle => ANGLE_BOUNDS,
            })
            .collect()
    }

    /// Nugget for `n` points.
    pub fn nugget(&self, n: usize) -> f64 {
        self.options.nugget.unwrap_or(1e-10 * n.max(1) as f64)
    }

    /// Normalized per-point inputs.
    pub fn features(&self, p: &MixedPoint) -> Result<Features> {
        let vars = self.space.variables();
        if p.values().len() != vars.len() {
            return Err(Error::Domain("point dimension does not match kernel space".into()));
        }
        if let Parameterization::Kpls { .. } = self.parameterization {
            return Ok(Features {
                x: self.space.encode_unit(p)?,
                lv: vec![],
                on: vec![],
            });
        }
        let mut x = vec![0.0; vars.len()];
        let mut lv = vec![0; vars.len()];
        for (i, (v, val)) in vars.iter().zip(p.values()).enumerate() {
            match (&v.kind, val) {
                (VarKind::Continuous { lower, upper }, Value::Real(r)) => x[i] = normalize(*r, *lower, *upper),
                (VarKind::Integer { lower, upper }, Value::Int(z)) => {
                    x[i] = normalize(*z as f64, *lower as f64, *upper as f64)
                }
                (VarKind::Categorical { levels }, Value::Level(l)) if *l < levels.len() => lv[i] = *l,
                _ => return Err(Error::Domain(format!("value {val:?} invalid for variable {}", v.name))),
            }
        }
        Ok(Features {
            x,
            lv,
            on: p.activity().to_vec(),
        })
    }

    pub(crate) fn pair(&self, t: usize, a: &Features, b: &Features) -> Pair {
        match &self.terms[t] {
            Term::Sq { var, alg: false, .. } => {
                let d = a.x[*var] - b.x[*var];
                Pair::Sq(d * d)
            }
            Term::Sq { var, alg: true, .. } => {
                let d = hierarchical::unit_alg_distance(a.x[*var], b.x[*var], a.on[*var], b.on[*var]);
                Pair::Sq(d * d)
            }
            Term::Kpls { w2, .. } => Pair::Sq(
                w2.iter()
                    .zip(a.x.iter().zip(&b.x))
                    .map(|(w, (u, v))| w * (u - v) * (u - v))
                    .sum(),
            ),
            Term::Cat {
                var, levels, extended, ..
            } => {
                let level = |f: &Features| {
                    if *extended && !f.on[*var] {
                        *levels as u32
                    } else {
                        f.lv[*var] as u32
                    }
                };
                Pair::Lv(level(a), level(b))
            }
        }
    }

    /// Checks hyperparameter ranges.
    pub fn validate_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.params.len() {
            return Err(Error::Argument(format!(
                "kernel expects {} hyperparameters, got {}",
                self.params.len(),
                theta.len()
            )));
        }
        for (t, p) in theta.iter().zip(&self.params) {
            let ok = match p.kind {
                ParamKind::Scale => t.is_finite() && *t >= 0.0,
                ParamKind::Angle => (0.0..=std::f64::consts::PI).contains(t),
            };
            if !ok {
                return Err(Error::Argument(format!("hyperparameter {t} out of range for {:?}", p.kind)));
            }
        }
        Ok(())
    }

    /// Binds hyperparameters. Derivative matrices are computed only when
    /// `derivatives` is set.
    pub fn prepare(&self, theta: &[f64], derivatives: bool) -> Result<PreparedKernel> {
        self.validate_theta(theta)?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            terms.push(match t {
                Term::Sq { param, .. } | Term::Kpls { param, .. } => Prepared::Sq {
                    theta: theta[*param],
                    param: *param,
                },
                Term::Cat {
                    levels,
                    model,
                    first,
                    count,
                    ..
                } => {
                    let l = *levels;
                    let th = &theta[*first..*first + *count];
                    let (k, m, dm) = match model {
                        CatModel::Plain(kind) => {
                            let (ns, _) = kind.n_params(l);
                            let p = CategoricalKernelParams {
                                kind: *kind,
                                n_levels: l,
                                scales: th[..ns].to_vec(),
                                angles: th[ns..].to_vec(),
                                eps: self.options.eps,
                            };
                            let dm = if derivatives { p.matrix_derivatives()? } else { vec![] };
                            (l, p.matrix()?, dm)
                        }
                        CatModel::Algebraic { tied } => {
                            let phi: Vec<f64> = if *tied { vec![0.5 * th[0]; l] } else { th.to_vec() };
                            let m = hierarchical::algebraic_matrix(&phi);
                            let dm = if !derivatives {
                                vec![]
                            } else if *tied {
                                let parts = hierarchical::algebraic_matrix_derivatives(&phi);
                                let mut acc = vec![0.0; (l + 1) * (l + 1)];
                                for p in parts {
                                    for (a, v) in acc.iter_mut().zip(p) {
                                        *a += 0.5 * v;
                                    }
                                }
                                vec![acc]
                            } else {
                                hierarchical::algebraic_matrix_derivatives(&phi)
                            };
                            (l + 1, m, dm)
                        }
                        CatModel::Gower => {
                            let dm = if derivatives {
                                vec![hierarchical::gower_matrix_derivative(l, th[0])]
                            } else {
                                vec![]
                            };
                            (l + 1, hierarchical::gower_matrix(l, th[0]), dm)
                        }
                    };
                    Prepared::Mat(MatTerm { k, m, dm, first: *first })
                }
            });
        }
        Ok(PreparedKernel {
            terms,
            n_params: self.params.len(),
        })
    }

    /// Correlation between two points at hyperparameters `theta`.
    pub fn correlation(&self, theta: &[f64], a: &MixedPoint, b: &MixedPoint) -> Result<f64> {
        let pk = self.prepare(theta, false)?;
        let (fa, fb) = (self.features(a)?, self.features(b)?);
        Ok(pk.corr(|t| self.pair(t, &fa, &fb)))
    }

    /// Pairwise features of all distinct pairs `i < j` of `points`.
    pub fn pair_table(&self, points: &[MixedPoint]) -> Result<PairTable> {
        let feats = points.iter().map(|p| self.features(p)).collect::<Result<Vec<_>>>()?;
        Ok(self.pair_table_from_features(&feats))
    }

    pub(crate) fn pair_table_from_features(&self, feats: &[Features]) -> PairTable {
        let n = feats.len();
        let pairs = (0..self.terms.len())
            .map(|t| {
                let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
                for i in 0..n {
                    for j in i + 1..n {
                        v.push(self.pair(t, &feats[i], &feats[j]));
                    }
                }
                v
            })
            .collect();
        PairTable { n, pairs }
    }

    /// Correlations of `x` with every point behind `feats`.
    pub(crate) fn cross(&self, pk: &PreparedKernel, x: &Features, feats: &[Features]) -> Vec<f64> {
        feats.iter().map(|f| pk.corr(|t| self.pair(t, x, f))).collect()
    }
}

fn normalize(v: f64, lower: f64, upper: f64) -> f64 {
    if upper > lower {
        (v - lower) / (upper - lower)
    } else {
        0.0
    }
}

/// Pairwise kernel inputs for a fixed point set (upper triangle, row-major).
#[derive(Debug, Clone)]
pub struct PairTable {
    n: usize,
    pairs: Vec<Vec<Pair>>,
}

impl PairTable {
    pub fn n(&self) -> usize {
        self.n
    }
}

impl PreparedKernel {
    pub(crate) fn corr(&self, pair: impl Fn(usize) -> Pair) -> f64 {
        let mut log = 0.0;
        let mut prod = 1.0;
        for (t, p) in self.terms.iter().enumerate() {
            match (p, pair(t)) {
                (Prepared::Sq { theta, .. }, Pair::Sq(d)) => log -= theta * d,
                (Prepared::Mat(m), Pair::Lv(a, b)) => prod *= m.m[a as usize * m.k + b as usize],
                _ => unreachable!("term and pair feature mismatch"),
            }
        }
        prod * log.exp()
    }

    /// Correlation matrix without nugget.
    pub fn matrix(&self, table: &PairTable) -> DMatrix<f64> {
        let n = table.n;
        let mut r = DMatrix::identity(n, n);
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                let v = self.corr(|t| table.pairs[t][idx]);
                r[(i, j)] = v;
                r[(j, i)] = v;
                idx += 1;
            }
        }
        r
    }

    /// `∂R/∂θ_p` for every hyperparameter (zero diagonal).
    pub fn matrix_derivatives(&self, table: &PairTable) -> Vec<DMatrix<f64>> {
        let n = table.n;
        let mut out = vec![DMatrix::zeros(n, n); self.n_params];
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                let pairs: Vec<Pair> = (0..self.terms.len()).map(|t| table.pairs[t][idx]).collect();
                for (t, term) in self.terms.iter().enumerate() {
                    // product of all factors but t
                    let others = self.corr_except(&pairs, t);
                    match (term, pairs[t]) {
                        (Prepared::Sq { theta, param }, Pair::Sq(d)) => {
                            let v = -d * (-theta * d).exp() * others;
                            out[*param][(i, j)] = v;
                            out[*param][(j, i)] = v;
                        }
                        (Prepared::Mat(m), Pair::Lv(a, b)) => {
                            let cell = a as usize * m.k + b as usize;
                            for (q, dm) in m.dm.iter().enumerate() {
                                let v = dm[cell] * others;
                                out[m.first + q][(i, j)] = v;
                                out[m.first + q][(j, i)] = v;
                            }
                        }
                        _ => unreachable!("term and pair feature mismatch"),
                    }
                }
                idx += 1;
            }
        }
        out
    }

    fn corr_except(&self, pairs: &[Pair], skip: usize) -> f64 {
        let mut log = 0.0;
        let mut prod = 1.0;
        for (t, p) in self.terms.iter().enumerate() {
            if t == skip {
                continue;
            }
            match (p, pairs[t]) {
                (Prepared::Sq { theta, .. }, Pair::Sq(d)) => log -= theta * d,
                (Prepared::Mat(m), Pair::Lv(a, b)) => prod *= m.m[a as usize * m.k + b as usize],
                _ => unreachable!("term and pair feature mismatch"),
            }
        }
        prod * log.exp()
    }
}

/// Correlation matrix with nugget and its Cholesky factor.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub r: DMatrix<f64>,
    pub chol: Cholesky<f64, Dyn>,
    pub nugget: f64,
}

/// Adds `nugget` to the diagonal of `r` and factorizes, doubling the nugget
/// on failure up to `1e-6`.
pub fn factorize(r: &DMatrix<f64>, nugget: f64) -> Result<Assembled> {
    let mut nug = nugget;
    loop {
        let mut m = r.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += nug;
        }
        if let Some(chol) = Cholesky::new(m.clone()) {
            return Ok(Assembled { r: m, chol, nugget: nug });
        }
        if nug >= 1e-6 {
            let diag_min = (0..r.nrows()).map(|i| r[(i, i)]).fold(f64::INFINITY, f64::min);
            let off_max = (0..r.nrows())
                .flat_map(|i| (0..r.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|ij| r[ij])
                .fold(f64::NEG_INFINITY, f64::max);
            return Err(Error::Numerical(format!(
                "correlation matrix ({n}×{n}) not positive definite with nugget {nug:e}; \
                 min diagonal {diag_min}, max off-diagonal {off_max}",
                n = r.nrows()
            )));
        }
        nug = (nug * 2.0).min(1e-6);
    }
}

/// Kernel hyperparameters bound to options and parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub options: KernelOptions,
    pub parameterization: Parameterization,
    pub theta: Vec<f64>,
}

/// Correlation matrix of `points` under `config`, nugget included.
pub fn assemble_correlation(space: &DesignSpace, points: &[MixedPoint], config: &KernelConfig) -> Result<Assembled> {
    let kernel = Kernel::with_parameterization(space, config.options, &config.parameterization)?;
    let pk = kernel.prepare(&config.theta, false)?;
    let table = kernel.pair_table(points)?;
    factorize(&pk.matrix(&table), kernel.nugget(points.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Variable;
    use approx::assert_relative_eq;

    #[test]
    fn continuous_examples() {
        assert_eq!(continuous_corr(&[0.3], &[0.3], &[5.0]).unwrap(), 1.0);
        assert_eq!(continuous_corr(&[0.0], &[1.0], &[0.0]).unwrap(), 1.0);
        assert_relative_eq!(continuous_corr(&[0.0], &[1.0], &[1.0]).unwrap(), 0.36787944117144233, epsilon = 1e-15);
        assert!(continuous_corr(&[0.0], &[1.0], &[-1.0]).is_err());
    }

    fn mixed_space() -> DesignSpace {
        DesignSpace::new(vec![
            Variable::continuous("x", 0.0, 2.0),
            Variable::integer("z", 0, 4),
            Variable::categorical_n("c", 3),
        ])
        .unwrap()
    }

    #[test]
    fn parameter_layout() {
        let s = mixed_space();
        assert_eq!(Kernel::new(&s, KernelOptions::default()).unwrap().n_params(), 5);
        let ehh = KernelOptions::default().with_categorical(CategoricalKind::Ehh);
        assert_eq!(Kernel::new(&s, ehh).unwrap().n_params(), 8);
        let hh = KernelOptions::default().with_categorical(CategoricalKind::Hh);
        assert_eq!(Kernel::new(&s, hh).unwrap().n_params(), 5);
        let gd = KernelOptions::default().with_categorical(CategoricalKind::Gd);
        assert_eq!(Kernel::new(&s, gd).unwrap().n_params(), 3);
    }

    #[test]
    fn product_of_factors() {
        let s = mixed_space();
        let k = Kernel::new(&s, KernelOptions::default()).unwrap();
        let a = s.point(vec![Value::Real(0.0), Value::Int(0), Value::Level(0)]).unwrap();
        let b = s.point(vec![Value::Real(2.0), Value::Int(2), Value::Level(2)]).unwrap();
        let theta = [1.0, 2.0, 0.1, 0.2, 0.3];
        let expected = (-1.0f64).exp() * (-2.0f64 * 0.25).exp() * (-0.1f64 - 0.3).exp();
        assert_relative_eq!(k.correlation(&theta, &a, &b).unwrap(), expected, epsilon = 1e-14);
        assert_relative_eq!(k.correlation(&theta, &a, &a).unwrap(), 1.0);
    }

    #[test]
    fn single_point_matrix() {
        let s = mixed_space();
        let p = s.point(vec![Value::Real(1.0), Value::Int(1), Value::Level(1)]).unwrap();
        let cfg = KernelConfig {
            options: KernelOptions {
                nugget: Some(1e-8),
                ..Default::default()
            },
            parameterization: Parameterization::Full,
            theta: vec![1.0; 5],
        };
        let a = assemble_correlation(&s, &[p], &cfg).unwrap();
        assert_eq!(a.r[(0, 0)], 1.0 + 1e-8);
    }

    #[test]
    fn kpls_matches_cr_on_one_hot() {
        let s = mixed_space();
        // identity weights on the 5 relaxed coordinates with one component
        // per coordinate reproduce the full CR kernel
        let w: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let kp = Kernel::kpls(&s, KernelOptions::default(), w).unwrap();
        let full = Kernel::new(&s, KernelOptions::default()).unwrap();
        let a = s.point(vec![Value::Real(0.4), Value::Int(3), Value::Level(0)]).unwrap();
        let b = s.point(vec![Value::Real(1.5), Value::Int(1), Value::Level(2)]).unwrap();
        let theta = [0.7, 1.1, 0.2, 0.5, 0.9];
        let c1 = kp.correlation(&theta, &a, &b).unwrap();
        let c2 = full.correlation(&theta, &a, &b).unwrap();
        assert_relative_eq!(c1, c2, epsilon = 1e-14);
    }

    #[test]
    fn decreed_continuous_uses_algebraic_distance() {
        let s = DesignSpace::new(vec![
            Variable::categorical_n("m", 2).meta(),
            Variable::continuous("x", 0.0, 1.0).decreed_by(0, &[1]),
        ])
        .unwrap();
        let k = Kernel::new(&s, KernelOptions::default()).unwrap();
        let on = s.point(vec![Value::Level(1), Value::Real(0.5)]).unwrap();
        let off = s.point(vec![Value::Level(0), Value::Real(0.5)]).unwrap();
        // meta factor exp(-θ0-θ1) times exp(-θx · 1)
        let theta = [0.2, 0.3, 2.0];
        let c = k.correlation(&theta, &on, &off).unwrap();
        assert_relative_eq!(c, (-0.5f64).exp() * (-2.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn derivative_matrices_match_finite_differences() {
        let s = DesignSpace::new(vec![
            Variable::categorical_n("m", 2).meta(),
            Variable::continuous("x", 0.0, 1.0).decreed_by(0, &[1]),
            Variable::categorical_n("c", 3).decreed_by(0, &[1]),
            Variable::categorical_n("w", 3),
        ])
        .unwrap();
        let doe = s.lhs(8, 3).unwrap();
        for kind in [CategoricalKind::Gd, CategoricalKind::Cr, CategoricalKind::Ehh, CategoricalKind::Hh] {
            for mode in [DecreedMode::Algebraic, DecreedMode::Gower, DecreedMode::Imputation] {
                let k = Kernel::new(&s, KernelOptions::default().with_categorical(kind).with_decreed_mode(mode)).unwrap();
                let theta: Vec<f64> = k
                    .params()
                    .iter()
                    .enumerate()
                    .map(|(i, p)| match p.kind {
                        ParamKind::Scale => 0.3 + 0.1 * i as f64,
                        ParamKind::Angle => 0.4 + (0.37 * i as f64) % 2.2,
                    })
                    .collect();
                let table = k.pair_table(&doe.points).unwrap();
                let d = k.prepare(&theta, true).unwrap().matrix_derivatives(&table);
                for (p, dp) in d.iter().enumerate() {
                    let h = 1e-6;
                    let mut up = theta.clone();
                    up[p] += h;
                    let mut dn = theta.clone();
                    dn[p] -= h;
                    let fd = (k.prepare(&up, false).unwrap().matrix(&table) - k.prepare(&dn, false).unwrap().matrix(&table))
                        / (2.0 * h);
                    assert!((fd - dp).abs().max() < 1e-7, "{kind:?} {mode:?} param {p}");
                }
            }
        }
    }
}
