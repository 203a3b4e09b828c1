//! Partial least squares: projections, KPLS length-scale expansion, adaptive
//! component selection and linear embeddings.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{FitOptions, GpModel, Reduction};
use crate::space::{DesignSpace, MixedPoint};

/// PLS weight matrix (`d × h`, unit-norm orthogonal columns).
#[derive(Debug, Clone, PartialEq)]
pub struct PlsProjection {
    pub weights: DMatrix<f64>,
}

impl PlsProjection {
    pub fn h(&self) -> usize {
        self.weights.ncols()
    }

    /// Weights as `d` rows of `h` entries.
    pub fn weights_rows(&self) -> Vec<Vec<f64>> {
        (0..self.weights.nrows())
            .map(|i| self.weights.row(i).iter().copied().collect())
            .collect()
    }
}

fn standardize(col: &mut [f64]) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = if sd > 0.0 { sd } else { 1.0 };
    for v in col.iter_mut() {
        *v = (*v - mean) / scale;
    }
}

/// NIPALS PLS1 on `x` (`n` rows of `d` features) and `y`, with `h`
/// components. Inputs are centered and scaled internally.
pub fn fit_pls(x: &[Vec<f64>], y: &[f64], h: usize) -> Result<PlsProjection> {
    let n = x.len();
    if n != y.len() || n == 0 {
        return Err(Error::Argument("PLS needs as many outputs as rows".into()));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) || d == 0 {
        return Err(Error::Argument("PLS rows must share a nonzero length".into()));
    }
    if h == 0 || h > d.min(n.saturating_sub(1)) {
        return Err(Error::Argument(format!("PLS component count {h} must lie in 1..={}", d.min(n.saturating_sub(1)))));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::Argument("constant output has no covariance direction".into()));
    }
    let mut xm = DMatrix::from_fn(n, d, |i, j| x[i][j]);
    for j in 0..d {
        let mut col: Vec<f64> = xm.column(j).iter().copied().collect();
        standardize(&mut col);
        xm.set_column(j, &DVector::from_vec(col));
    }
    let mut yc = y.to_vec();
    standardize(&mut yc);
    let mut yv = DVector::from_vec(yc);

    let mut w_all = DMatrix::zeros(d, h);
    let first_norm = (xm.transpose() * &yv).norm();
    for k in 0..h {
        let mut w = xm.transpose() * &yv;
        if w.norm() <= 1e-12 * first_norm.max(1.0) {
            // y exhausted: continue with the largest remaining X direction
            let j = (0..d)
                .max_by(|&a, &b| xm.column(a).norm().total_cmp(&xm.column(b).norm()))
                .unwrap();
            w = DVector::from_fn(d, |i, _| if i == j { 1.0 } else { 0.0 });
        }
        for q in 0..k {
            let prev = w_all.column(q).into_owned();
            w -= &prev * prev.dot(&w);
        }
        let norm = w.norm();
        if !(norm > 0.0) {
            return Err(Error::Numerical("PLS weight vector vanished".into()));
        }
        w /= norm;
        let t = &xm * &w;
        let tt = t.dot(&t);
        if tt > 0.0 {
            let p = xm.transpose() * &t / tt;
            let c = yv.dot(&t) / tt;
            xm -= &t * p.transpose();
            yv -= &t * c;
        }
        w_all.set_column(k, &w);
    }
    Ok(PlsProjection { weights: w_all })
}

/// Full-space length-scales `θ_k = Σ_j w_kj² θ̃_j` from reduced ones.
pub fn kpls_kernel_params(projection: &PlsProjection, reduced: &[f64]) -> Result<Vec<f64>> {
    if reduced.len() != projection.h() {
        return Err(Error::Argument("reduced θ length must equal the component count".into()));
    }
    Ok((0..projection.weights.nrows())
        .map(|k| {
            reduced
                .iter()
                .enumerate()
                .map(|(j, t)| projection.weights[(k, j)].powi(2) * t)
                .sum()
        })
        .collect())
}

/// Adaptive component-count search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptivePlsConfig {
    pub d_min: usize,
    pub d_max: usize,
    /// Stop adding components once `PRESS(d+1)/PRESS(d) ≥ sigma`.
    pub sigma: f64,
    pub folds: usize,
    pub seed: u64,
}

impl Default for AdaptivePlsConfig {
    fn default() -> Self {
        AdaptivePlsConfig {
            d_min: 1,
            d_max: 5,
            sigma: 0.95,
            folds: 5,
            seed: 0,
        }
    }
}

impl AdaptivePlsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_min < 1 || self.d_min > self.d_max {
            return Err(Error::Config("adaptive PLS needs 1 ≤ d_min ≤ d_max".into()));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(Error::Config("threshold must lie in [0, 1]".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("cross-validation needs at least two folds".into()));
        }
        Ok(())
    }
}

/// Fold index of every point: points are sorted by output and each block of
/// `k` consecutive points is spread over the folds in a seeded random order.
pub fn fold_assignment(y: &[f64], k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; y.len()];
    for block in order.chunks(k) {
        let mut ids: Vec<usize> = (0..k).collect();
        ids.shuffle(&mut rng);
        for (i, &p) in block.iter().enumerate() {
            folds[p] = ids[i];
        }
    }
    folds
}

/// K-fold predicted error sum of squares of a `d`-component KPLS model.
pub fn press(
    space: &DesignSpace,
    points: &[MixedPoint],
    y: &[f64],
    d: usize,
    k: usize,
    seed: u64,
    fit: &FitOptions,
) -> Result<f64> {
    if k < 2 || points.len() < k {
        return Err(Error::Config(format!("{k}-fold PRESS needs 2 ≤ K ≤ n = {}", points.len())));
    }
    let folds = fold_assignment(y, k, seed);
    let mut opts = fit.clone();
    opts.reduction = Reduction::Kpls(d);
    let mut total = 0.0;
    for f in 0..k {
        let test: Vec<usize> = (0..points.len()).filter(|&i| folds[i] == f).collect();
        if test.len() < 2 {
            return Err(Error::Config(format!("fold {f} holds fewer than two points")));
        }
        let train: Vec<usize> = (0..points.len()).filter(|&i| folds[i] != f).collect();
        let tp: Vec<MixedPoint> = train.iter().map(|&i| points[i].clone()).collect();
        let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = GpModel::fit(space, &tp, &ty, &opts)?;
        for &i in &test {
            let e = y[i] - model.predict_mean(&points[i])?;
            total += e * e;
        }
    }
    Ok(total)
}

/// Outcome of Wold's ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WoldR {
    Ratio(f64),
    /// `PRESS(d) = 0`: the `d`-component model already predicts exactly.
    ExactFit,
}

/// `R(d) = PRESS(d+1) / PRESS(d)`.
pub fn wold_r(press_d: f64, press_d1: f64) -> WoldR {
    if press_d == 0.0 {
        WoldR::ExactFit
    } else {
        WoldR::Ratio(press_d1 / press_d)
    }
}

/// Component count chosen by Wold's R, starting from `d_min` and stopping
/// when `R(d) ≥ σ` or `d = d_max`.
pub fn adaptive_components(
    space: &DesignSpace,
    points: &[MixedPoint],
    y: &[f64],
    cfg: &AdaptivePlsConfig,
    fit: &FitOptions,
) -> Result<usize> {
    cfg.validate()?;
    let press_at = |d: usize| press(space, points, y, d, cfg.folds, cfg.seed, fit);
    adaptive_from(cfg, press_at)
}

/// Loop of [`adaptive_components`] over an arbitrary PRESS sequence.
pub fn adaptive_from(cfg: &AdaptivePlsConfig, mut press_at: impl FnMut(usize) -> Result<f64>) -> Result<usize> {
    cfg.validate()?;
    let mut d = cfg.d_min;
    if d == cfg.d_max {
        return Ok(d);
    }
    let mut current = press_at(d)?;
    while d < cfg.d_max {
        let next = press_at(d + 1)?;
        match wold_r(current, next) {
            WoldR::ExactFit => break,
            WoldR::Ratio(r) if r >= cfg.sigma => break,
            WoldR::Ratio(_) => {
                d += 1;
                current = next;
            }
        }
    }
    Ok(d)
}

/// Kind of linear embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingKind {
    RandomGaussian,
    SupervisedPls,
    /// Matrix supplied directly.
    Given,
}

/// Linear map `A` from `[-1, 1]ⁿ` into `[-1, 1]^{d_e}` and its clipped
/// pseudo-inverse back-map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub kind: EmbeddingKind,
    /// `d_e` rows of `n` entries.
    pub a: Vec<Vec<f64>>,
}

fn l1_normalize(rows: &mut [Vec<f64>]) -> Result<()> {
    for r in rows.iter_mut() {
        let s: f64 = r.iter().map(|v| v.abs()).sum();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Numerical("embedding row has zero norm".into()));
        }
        for v in r.iter_mut() {
            *v /= s;
        }
    }
    Ok(())
}

/// Builds an embedding of `[-1, 1]ⁿ` into `d_e < n` dimensions. Rows are
/// scaled to unit L1 norm so that the image of the box lies in the box.
///
/// The supervised kind needs a DoE given as normalized inputs in `[-1, 1]ⁿ`
/// and outputs.
pub fn make_embedding(
    kind: EmbeddingKind,
    n: usize,
    d_e: usize,
    seed: u64,
    doe: Option<(&[Vec<f64>], &[f64])>,
) -> Result<EmbeddingSpec> {
    if d_e == 0 || d_e >= n {
        return Err(Error::Argument(format!("embedding dimension {d_e} must satisfy 1 ≤ d_e < n = {n}")));
    }
    let mut a = match kind {
        EmbeddingKind::RandomGaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..d_e)
                .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect::<Vec<Vec<f64>>>()
        }
        EmbeddingKind::SupervisedPls => {
            let (x, y) = doe.ok_or_else(|| Error::Argument("supervised embedding needs a DoE".into()))?;
            if x.iter().any(|r| r.len() != n) {
                return Err(Error::Argument("DoE inputs must have n columns".into()));
            }
            let w = fit_pls(x, y, d_e)?.weights;
            (0..d_e).map(|j| w.column(j).iter().copied().collect()).collect()
        }
        EmbeddingKind::Given => return Err(Error::Argument("use EmbeddingSpec::from_matrix".into())),
    };
    l1_normalize(&mut a)?;
    Ok(EmbeddingSpec { kind, a })
}

impl EmbeddingSpec {
    /// Embedding from an explicit `d_e × n` matrix with `d_e ≤ n`.
    pub fn from_matrix(a: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.first().map_or(0, Vec::len);
        if a.is_empty() || n == 0 || a.len() > n || a.iter().any(|r| r.len() != n || r.iter().any(|v| !v.is_finite())) {
            return Err(Error::Argument("embedding matrix must be finite d_e × n with d_e ≤ n".into()));
        }
        Ok(EmbeddingSpec {
            kind: EmbeddingKind::Given,
            a,
        })
    }

    /// Identity embedding of dimension `n`.
    pub fn identity(n: usize) -> Self {
        EmbeddingSpec {
            kind: EmbeddingKind::Given,
            a: (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
        }
    }

    pub fn d_e(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.a[0].len()
    }

    /// `A x`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `γ(u) = clip(A⁺ u)` to `[-1, 1]ⁿ`, with `A⁺ = Aᵀ (A Aᵀ)⁻¹`.
    pub fn back_map(&self, u: &[f64]) -> Result<Vec<f64>> {
        let (de, n) = (self.d_e(), self.n());
        if u.len() != de {
            return Err(Error::Domain("reduced point has the wrong dimension".into()));
        }
        let a = DMatrix::from_fn(de, n, |i, j| self.a[i][j]);
        let gram = &a * a.transpose();
        let z = gram
            .cholesky()
            .ok_or_else(|| Error::Numerical("embedding matrix is rank deficient".into()))?
            .solve(&DVector::from_column_slice(u));
        Ok((a.transpose() * z).iter().map(|v| v.clamp(-1.0, 1.0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(d: usize) -> Vec<Vec<f64>> {
        (0..1usize << d)
            .map(|m| (0..d).map(|j| if m >> j & 1 == 1 { 1.0 } else { -1.0 }).collect())
            .collect()
    }

    #[test]
    fn aligned_weight() {
        let x = factorial(4);
        let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
        let p = fit_pls(&x, &y, 2).unwrap();
        let w = p.weights.column(0);
        assert!(w[0].abs() > 0.999);
        assert_relative_eq!(w.norm(), 1.0, epsilon = 1e-12);
        // second weight orthogonal to the first
        assert!(p.weights.column(0).dot(&p.weights.column(1)).abs() < 1e-10);
    }

    #[test]
    fn duplicated_columns_get_equal_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                vec![a, a, b]
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] + 0.3 * r[2]).collect();
        let w = fit_pls(&x, &y, 1).unwrap().weights;
        assert_relative_eq!(w[(0, 0)], w[(1, 0)], epsilon = 1e-12);
    }

    #[test]
    fn constant_output_rejected() {
        let x = factorial(2);
        assert!(fit_pls(&x, &[1.0; 4], 1).is_err());
        assert!(fit_pls(&x, &[1.0, 2.0, 3.0, 4.0], 3).is_err());
    }

    #[test]
    fn kpls_expansion() {
        let p = PlsProjection {
            weights: DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]),
        };
        assert_eq!(kpls_kernel_params(&p, &[2.5]).unwrap(), vec![2.5, 0.0, 0.0]);
    }

    #[test]
    fn wold_examples() {
        assert_eq!(wold_r(2.0, 2.0), WoldR::Ratio(1.0));
        assert!(matches!(wold_r(1.0, 0.9), WoldR::Ratio(r) if (r - 0.9).abs() < 1e-15));
        assert_eq!(wold_r(0.0, 0.5), WoldR::ExactFit);
    }

    #[test]
    fn adaptive_loop_bounds() {
        let cfg = AdaptivePlsConfig {
            d_min: 2,
            d_max: 2,
            ..Default::default()
        };
        assert_eq!(adaptive_from(&cfg, |_| unreachable!()).unwrap(), 2);
        let cfg = AdaptivePlsConfig {
            d_min: 1,
            d_max: 4,
            sigma: 0.95,
            ..Default::default()
        };
        // ratios all 0.5
        assert_eq!(adaptive_from(&cfg, |d| Ok(0.5f64.powi(d as i32))).unwrap(), 4);
        // ratio at d = 2 is 0.99
        let seq = [0.0, 1.0, 0.5, 0.495, 0.1];
        assert_eq!(adaptive_from(&cfg, |d| Ok(seq[d])).unwrap(), 2);
    }

    #[test]
    fn folds_are_balanced() {
        let y: Vec<f64> = (0..23).map(|i| ((i * 7) % 23) as f64).collect();
        let f = fold_assignment(&y, 5, 3);
        let mut counts = [0; 5];
        for v in &f {
            counts[*v] += 1;
        }
        assert!(counts.iter().all(|&c| c == 4 || c == 5));
        assert_eq!(f, fold_assignment(&y, 5, 3));
    }

    #[test]
    fn embedding_properties() {
        let e = make_embedding(EmbeddingKind::RandomGaussian, 10, 2, 5, None).unwrap();
        assert_eq!(e, make_embedding(EmbeddingKind::RandomGaussian, 10, 2, 5, None).unwrap());
        assert_eq!((e.d_e(), e.n()), (2, 10));
        let corner = vec![1.0; 10];
        assert!(e.forward(&corner).iter().all(|v| v.abs() <= 1.0 + 1e-12));
        assert!(make_embedding(EmbeddingKind::RandomGaussian, 3, 3, 5, None).is_err());
        let u = [0.1, -0.2];
        let x = e.back_map(&u).unwrap();
        let back = e.forward(&x);
        // the pseudo-inverse image is inside the box here, so it maps back exactly
        assert!(x.iter().all(|v| v.abs() < 1.0));
        assert_relative_eq!(back[0], u[0], epsilon = 1e-12);
        assert_relative_eq!(back[1], u[1], epsilon = 1e-12);
    }
}
