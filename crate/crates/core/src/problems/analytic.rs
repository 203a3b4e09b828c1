//! Single-objective analytic problems.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Outputs, Problem};
use crate::error::{Error, Result};
use crate::space::{DesignSpace, MixedPoint, Variable};

/// Smallest value of the cosine problem on a 1000-point grid per level.
pub const COSINE_GRID_MIN: f64 = -0.999_999_792_089_612_8;
/// Smallest value of the toy problem on a 1001-point grid per level.
pub const TOY_GRID_MIN: f64 = -2.329_593_827_707_772_6;
/// Global minimum of the modified Branin function.
pub const MB_MIN: f64 = 1.011_570_128_171_298;
/// Global minimum of G24.
pub const G24_MIN: f64 = -5.508_013_271_595_6;

/// Cosine curves; `c ∈ 1..=13`.
pub fn eval_cosine(x: f64, c: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(1..=13).contains(&c) {
        return Err(Error::Domain(format!("cosine problem outside its domain: x={x}, c={c}")));
    }
    let c = c as f64;
    Ok(if c <= 9.0 {
        (3.5 * PI * x + (0.4 * PI + PI * c / 15.0) - c / 20.0).cos()
    } else {
        (3.5 * PI * x - c / 20.0).cos()
    })
}

/// Ten-branch toy function; `c ∈ 0..=9`.
pub fn eval_toy(x: f64, c: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("toy problem expects x in [0, 1], got {x}")));
    }
    Ok(match c {
        0 => (3.6 * PI * (x - 2.0)).cos() + x - 1.0,
        1 => 2.0 * (1.1 * PI * x.exp()).cos() - x / 2.0 + 2.0,
        2 => (2.0 * PI * x).cos() + x / 2.0,
        3 => x * ((3.4 * PI * (x - 1.0)).cos() - (x - 1.0) / 2.0),
        4 => -x * x / 2.0,
        5 => 2.0 * (0.25 * PI * (-x.powi(4)).exp()).cos().powi(2) - x / 2.0 + 1.0,
        6 => x * (3.4 * PI * x).cos() - x / 2.0 + 1.0,
        7 => -x * ((3.5 * PI * x).cos() + x / 2.0) + 2.0,
        8 => -x.powi(5) / 2.0 + 1.0,
        9 => -(2.5 * PI * x).cos().powi(2) * x.sqrt() - 0.5 * (x + 0.5).ln() - 1.3,
        _ => return Err(Error::Domain(format!("toy level {c} out of range"))),
    })
}

/// Continuous Goldstein variant used by every branch of the hierarchical
/// Goldstein problem.
#[allow(clippy::too_many_arguments)]
pub fn gold_cont(x1: f64, x2: f64, x3: f64, x4: f64, z3: i32, z4: i32, x5: f64, w2: f64) -> f64 {
    53.3108 + 0.184901 * x1 - 5.02914 * x1.powi(3) * 1e-6 + 7.72522 * x1.powi(z3) * 1e-8 - 0.0870775 * x2 - 0.106959 * x3
        + 7.98772 * x3.powi(z4) * 1e-6
        + 0.00242482 * x4
        + 1.32851 * x4.powi(3) * 1e-6
        - 0.00146393 * x1 * x2
        - 0.00301588 * x1 * x3
        - 0.00272291 * x1 * x4
        + 0.0017004 * x2 * x3
        + 0.0038428 * x2 * x4
        - 0.000198969 * x3 * x4
        + 1.86025 * x1 * x2 * x3 * 1e-5
        - 1.88719 * x1 * x2 * x4 * 1e-6
        + 2.50923 * x1 * x3 * x4 * 1e-5
        - 5.62199 * x2 * x3 * x4 * 1e-5
        + w2 * (5.0 * (2.0 * PI / 100.0 * x5).cos() - 2.0)
}

const SLOT: [f64; 3] = [20.0, 50.0, 80.0];

/// Hierarchical Goldstein on `(x1, x2, x3, x4, z1, z2, z3, z4, x5, w1, w2)`.
pub fn eval_hier_goldstein(x: [f64; 5], z: [i32; 4], w1: usize, w2: usize) -> Result<f64> {
    let [x1, x2, x3, x4, x5] = x;
    let [z1, z2, z3, z4] = z;
    if x.iter().any(|v| !(0.0..=100.0).contains(v)) || z.iter().any(|v| !(0..=2).contains(v)) || w1 > 3 || w2 > 1 {
        return Err(Error::Domain("hierarchical Goldstein point outside its domain".into()));
    }
    let w2 = w2 as f64;
    let g = |a: f64, b: f64, c: f64, d: f64| gold_cont(a, b, c, d, z3, z4, x5, w2);
    Ok(match w1 {
        0 => g(x1, x2, SLOT[z1 as usize], SLOT[z2 as usize]),
        1 => g(x1, x2, x3, SLOT[z2 as usize]),
        2 => g(x1, x2, SLOT[z1 as usize], x4),
        _ => g(x1, x2, x3, x4),
    })
}

/// Modified Branin on `Ω₁ = [-5, 10] × [0, 15]`.
pub fn branin_f1(u1: f64, u2: f64) -> f64 {
    let a = u2 - 5.1 * u1 * u1 / (4.0 * PI * PI) + 5.0 * u1 / PI - 6.0;
    a * a + (10.0 - 10.0 / (8.0 * PI)) * u1.cos() + 10.0 + (5.0 * u1 + 25.0) / 15.0
}

/// `2 × d` matrix mapping `[-1, 1]^d` into `[-1, 1]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbMatrix {
    pub seed: u64,
    pub a: Vec<Vec<f64>>,
}

/// Draws a standard normal `2 × d` matrix from `seed` and scales each row
/// to unit L1 norm.
pub fn mb_matrix(d: usize, seed: u64) -> MbMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    for row in a.iter_mut() {
        let s: f64 = row.iter().map(|v| v.abs()).sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    MbMatrix { seed, a }
}

/// `MB_d(x) = f₁(A x)` with `A x` clipped to `[-1, 1]²` and rescaled to `Ω₁`.
pub fn eval_mb(x: &[f64], a: &MbMatrix) -> Result<f64> {
    if a.a.len() != 2 || a.a.iter().any(|r| r.len() != x.len()) {
        return Err(Error::Domain("MB point and matrix dimensions differ".into()));
    }
    if x.iter().any(|v| !(-1.0..=1.0).contains(v)) {
        return Err(Error::Domain("MB expects x in [-1, 1]^d".into()));
    }
    let u: Vec<f64> = a
        .a
        .iter()
        .map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum::<f64>().clamp(-1.0, 1.0))
        .collect();
    Ok(branin_f1(-5.0 + (u[0] + 1.0) * 7.5, (u[1] + 1.0) * 7.5))
}

static MB10: OnceLock<MbMatrix> = OnceLock::new();
static MB100: OnceLock<MbMatrix> = OnceLock::new();

/// Shipped benchmark matrix for `d ∈ {10, 100}`.
pub fn shipped_mb_matrix(d: usize) -> Result<&'static MbMatrix> {
    let parse = |s: &str| serde_json::from_str::<MbMatrix>(s).expect("shipped MB matrix is valid JSON");
    match d {
        10 => Ok(MB10.get_or_init(|| parse(include_str!("../../data/mb10.json")))),
        100 => Ok(MB100.get_or_init(|| parse(include_str!("../../data/mb100.json")))),
        _ => Err(Error::Argument(format!("no shipped MB matrix for d = {d}"))),
    }
}

fn reals(p: &MixedPoint) -> Vec<f64> {
    (0..p.values().len()).map(|i| p.real(i)).collect()
}

/// `x²` on `[-1, 1]`.
pub fn quadratic() -> Problem {
    let space = DesignSpace::new(vec![Variable::continuous("x", -1.0, 1.0)]).unwrap();
    Problem::new("quadratic", space, (1, 0, 0), |p| Ok(Outputs::objective(p.real(0).powi(2)))).with_optimum(0.0)
}

pub fn cosine() -> Problem {
    let labels: Vec<String> = (1..=13).map(|c| c.to_string()).collect();
    let space = DesignSpace::new(vec![Variable::continuous("x", 0.0, 1.0), Variable::categorical("c", &labels)]).unwrap();
    Problem::new("cosine", space, (1, 0, 0), |p| Ok(Outputs::objective(eval_cosine(p.real(0), p.level(1) + 1)?)))
        .with_optimum(COSINE_GRID_MIN)
}

pub fn toy() -> Problem {
    let space = DesignSpace::new(vec![Variable::continuous("x", 0.0, 1.0), Variable::categorical_n("c1", 10)]).unwrap();
    Problem::new("toy", space, (1, 0, 0), |p| Ok(Outputs::objective(eval_toy(p.real(0), p.level(1))?))).with_optimum(TOY_GRID_MIN)
}

/// Design space of the hierarchical Goldstein problem, variables ordered
/// `x1 x2 x3 x4 z1 z2 z3 z4 x5 w1 w2`.
pub fn hier_goldstein_space() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::continuous("x1", 0.0, 100.0),
        Variable::continuous("x2", 0.0, 100.0),
        Variable::continuous("x3", 0.0, 100.0).decreed_by(9, &[1, 3]),
        Variable::continuous("x4", 0.0, 100.0).decreed_by(9, &[2, 3]),
        Variable::integer("z1", 0, 2).decreed_by(9, &[0, 2]),
        Variable::integer("z2", 0, 2).decreed_by(9, &[0, 1]),
        Variable::integer("z3", 0, 2),
        Variable::integer("z4", 0, 2),
        Variable::continuous("x5", 0.0, 100.0),
        Variable::categorical_n("w1", 4).meta(),
        Variable::categorical_n("w2", 2),
    ])
    .unwrap()
}

pub fn hier_goldstein() -> Problem {
    Problem::new("hier_goldstein", hier_goldstein_space(), (1, 0, 0), |p| {
        let r = |i| p.real(i);
        let z = |i| p.real(i) as i32;
        Ok(Outputs::objective(eval_hier_goldstein(
            [r(0), r(1), r(2), r(3), r(8)],
            [z(4), z(5), z(6), z(7)],
            p.level(9),
            p.level(10),
        )?))
    })
}

/// G24: two inequality constraints, disconnected feasible region.
pub fn g24(x1: f64, x2: f64) -> Outputs {
    Outputs {
        f: vec![-x1 - x2],
        g: vec![
            -2.0 * x1.powi(4) + 8.0 * x1.powi(3) - 8.0 * x1 * x1 + x2 - 2.0,
            -4.0 * x1.powi(4) + 32.0 * x1.powi(3) - 88.0 * x1 * x1 + 96.0 * x1 + x2 - 36.0,
        ],
        h: vec![],
    }
}

pub fn g24_problem() -> Problem {
    let space = DesignSpace::new(vec![Variable::continuous("x1", 0.0, 3.0), Variable::continuous("x2", 0.0, 4.0)]).unwrap();
    Problem::new("g24", space, (1, 2, 0), |p| Ok(g24(p.real(0), p.real(1)))).with_optimum(G24_MIN)
}

/// `MB_d` on `[-1, 1]^d` with the shipped matrix.
pub fn mb(d: usize) -> Result<Problem> {
    let a = shipped_mb_matrix(d)?;
    let space = DesignSpace::new((0..d).map(|i| Variable::continuous(&format!("x{}", i + 1), -1.0, 1.0)).collect())?;
    Ok(Problem::new(&format!("mb{d}"), space, (1, 0, 0), move |p| Ok(Outputs::objective(eval_mb(&reals(p), a)?))).with_optimum(MB_MIN))
}

/// True when the zonotope `{A x : x ∈ [-1, 1]^d}` contains `u` with the
/// given margin (checked on 3600 support directions).
pub fn mb_reaches(a: &MbMatrix, u: [f64; 2], margin: f64) -> bool {
    (0..3600).all(|k| {
        let t = k as f64 * PI / 1800.0;
        let v = [t.cos(), t.sin()];
        let support: f64 = (0..a.a[0].len()).map(|j| (v[0] * a.a[0][j] + v[1] * a.a[1][j]).abs()).sum();
        v[0] * u[0] + v[1] * u[1] + margin <= support
    })
}

/// Normalized location of the modified Branin global minimizer.
pub const MB_ARGMIN: [f64; 2] = [-0.756_841_894_943_334_5, 0.647_813_329_283_396_5];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cosine_values() {
        assert_relative_eq!(eval_cosine(0.0, 10).unwrap(), 0.8775825618903728, epsilon = 1e-15);
        assert_relative_eq!(eval_cosine(0.0, 1).unwrap(), 0.15410320805926137, epsilon = 1e-14);
        assert!(eval_cosine(0.0, 14).is_err());
    }

    #[test]
    fn toy_values() {
        assert_eq!(eval_toy(1.0, 4).unwrap(), -0.5);
        assert_eq!(eval_toy(0.0, 8).unwrap(), 1.0);
        assert_eq!(eval_toy(0.0, 2).unwrap(), 1.0);
    }

    #[test]
    fn grid_minima() {
        let cos_min = (1..=13)
            .flat_map(|c| (0..1000).map(move |i| eval_cosine(i as f64 / 999.0, c).unwrap()))
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(cos_min, COSINE_GRID_MIN, epsilon = 1e-14);
        let toy_min = (0..10)
            .flat_map(|c| (0..1001).map(move |i| eval_toy(i as f64 / 1000.0, c).unwrap()))
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(toy_min, TOY_GRID_MIN, epsilon = 1e-14);
    }

    #[test]
    fn goldstein_values() {
        assert_relative_eq!(gold_cont(50.0, 50.0, 50.0, 50.0, 1, 1, 0.0, 0.0), 46.065331748610014, epsilon = 1e-11);
        assert_relative_eq!(gold_cont(50.0, 50.0, 50.0, 50.0, 1, 1, 0.0, 1.0), 49.065331748610014, epsilon = 1e-11);
        assert_relative_eq!(gold_cont(10.0, 20.0, 30.0, 40.0, 2, 0, 25.0, 1.0), 49.00384469294001, epsilon = 1e-11);
        let v = eval_hier_goldstein([50.0; 5], [0, 2, 1, 1], 3, 0).unwrap();
        let w = eval_hier_goldstein([50.0, 50.0, 50.0, 50.0, 0.0], [2, 0, 1, 1], 3, 0).unwrap();
        assert_relative_eq!(w, 46.065331748610014, epsilon = 1e-11);
        assert_eq!(v, eval_hier_goldstein([50.0; 5], [1, 1, 1, 1], 3, 0).unwrap());
    }

    #[test]
    fn mb_minimum() {
        assert_relative_eq!(branin_f1(-3.17631421, 12.35859997), MB_MIN, epsilon = 1e-8);
        let mut best = f64::INFINITY;
        for i in 0..=600 {
            for j in 0..=600 {
                best = best.min(branin_f1(-5.0 + 15.0 * i as f64 / 600.0, 15.0 * j as f64 / 600.0));
            }
        }
        assert!(best >= MB_MIN - 1e-9 && best < 1.2);
    }

    #[test]
    fn shipped_matrices_match_generator_and_reach_minimizer() {
        for d in [10, 100] {
            let a = shipped_mb_matrix(d).unwrap();
            assert_eq!(*a, mb_matrix(d, a.seed));
            assert!(mb_reaches(a, MB_ARGMIN, 0.02));
            // image of the box stays in [-1, 1]^2
            for r in &a.a {
                assert!((r.iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn g24_optimum_is_feasible() {
        let o = g24(2.329520197, 3.178493074);
        assert_relative_eq!(o.f[0], G24_MIN, epsilon = 1e-8);
        assert!(o.g.iter().all(|g| *g <= 1e-6));
    }
}
