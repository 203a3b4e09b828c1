//! Standard multi-objective test problems.

use std::f64::consts::PI;

use super::{Outputs, Problem};
use crate::error::{Error, Result};
use crate::space::{DesignSpace, Variable};

/// Pareto-optimal `f1` intervals of ZDT3.
pub const ZDT3_SEGMENTS: [(f64, f64); 5] = [
    (0.0, 0.083_001_534_9),
    (0.182_228_728_0, 0.257_762_363_4),
    (0.409_313_674_8, 0.453_882_104_1),
    (0.618_396_794_4, 0.652_511_703_8),
    (0.823_331_798_3, 0.851_832_865_4),
];

fn zdt_f2(k: u8, f1: f64, g: f64) -> f64 {
    let r = f1 / g;
    match k {
        1 => g * (1.0 - r.sqrt()),
        2 => g * (1.0 - r * r),
        _ => g * (1.0 - r.sqrt() - r * (10.0 * PI * f1).sin()),
    }
}

/// ZDT1, ZDT2 or ZDT3 on `[0, 1]^d`, `d ≥ 2`.
pub fn zdt(k: u8, x: &[f64]) -> Result<[f64; 2]> {
    if !(1..=3).contains(&k) || x.len() < 2 || x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain(format!("ZDT{k} point outside its domain")));
    }
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
    Ok([x[0], zdt_f2(k, x[0], g)])
}

/// `n` points of the analytic ZDT`k` front, spread uniformly in `f1`
/// (over the union of the segments for ZDT3).
pub fn zdt_front(k: u8, n: usize) -> Vec<Vec<f64>> {
    let f1s: Vec<f64> = if k == 3 {
        let total: f64 = ZDT3_SEGMENTS.iter().map(|(a, b)| b - a).sum();
        (0..n)
            .map(|i| {
                let mut t = if n == 1 { 0.0 } else { total * i as f64 / (n - 1) as f64 };
                for (a, b) in ZDT3_SEGMENTS {
                    if t <= b - a + 1e-15 {
                        return (a + t).min(b);
                    }
                    t -= b - a;
                }
                ZDT3_SEGMENTS[4].1
            })
            .collect()
    } else {
        (0..n).map(|i| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 }).collect()
    };
    f1s.into_iter().map(|f1| vec![f1, zdt_f2(k, f1, 1.0)]).collect()
}

fn front1(n: usize) -> Vec<Vec<f64>> {
    zdt_front(1, n)
}
fn front2(n: usize) -> Vec<Vec<f64>> {
    zdt_front(2, n)
}
fn front3(n: usize) -> Vec<Vec<f64>> {
    zdt_front(3, n)
}

pub fn zdt_problem(k: u8, d: usize) -> Result<Problem> {
    if !(1..=3).contains(&k) || d < 2 {
        return Err(Error::Config(format!("ZDT{k} with d = {d} is not available")));
    }
    let space = DesignSpace::new((0..d).map(|i| Variable::continuous(&format!("x{}", i + 1), 0.0, 1.0)).collect())?;
    let name = if d == 2 { format!("zdt{k}") } else { format!("zdt{k}-{d}d") };
    let front = [front1, front2, front3][k as usize - 1];
    Ok(Problem::new(&name, space, (2, 0, 0), move |p| {
        let x: Vec<f64> = (0..d).map(|i| p.real(i)).collect();
        Ok(Outputs {
            f: zdt(k, &x)?.to_vec(),
            ..Default::default()
        })
    })
    .with_front(front))
}

/// Binh and Korn: `x1 ∈ [0, 5]`, `x2 ∈ [0, 3]`.
pub fn bnh(x1: f64, x2: f64) -> Outputs {
    Outputs {
        f: vec![4.0 * x1 * x1 + 4.0 * x2 * x2, (x1 - 5.0).powi(2) + (x2 - 5.0).powi(2)],
        g: vec![(x1 - 5.0).powi(2) + x2 * x2 - 25.0, 7.7 - (x1 - 8.0).powi(2) - (x2 + 3.0).powi(2)],
        h: vec![],
    }
}

/// Tanaka: `x ∈ [0, π]²`.
pub fn tnk(x1: f64, x2: f64) -> Outputs {
    Outputs {
        f: vec![x1, x2],
        g: vec![
            -x1 * x1 - x2 * x2 + 1.0 + 0.1 * (16.0 * x1.atan2(x2)).cos(),
            (x1 - 0.5).powi(2) + (x2 - 0.5).powi(2) - 0.5,
        ],
        h: vec![],
    }
}

/// Osyczka and Kundu, six variables and six constraints.
pub fn osy(x: &[f64; 6]) -> Outputs {
    let [x1, x2, x3, x4, x5, x6] = *x;
    let f1 = -(25.0 * (x1 - 2.0).powi(2) + (x2 - 2.0).powi(2) + (x3 - 1.0).powi(2) + (x4 - 4.0).powi(2) + (x5 - 1.0).powi(2));
    let f2 = x.iter().map(|v| v * v).sum();
    let c = [
        x1 + x2 - 2.0,
        6.0 - x1 - x2,
        2.0 - x2 + x1,
        2.0 - x1 + 3.0 * x2,
        4.0 - (x3 - 3.0).powi(2) - x4,
        (x5 - 3.0).powi(2) + x6 - 4.0,
    ];
    Outputs {
        f: vec![f1, f2],
        g: c.iter().map(|v| -v).collect(),
        h: vec![],
    }
}

pub fn bnh_problem() -> Problem {
    let space = DesignSpace::new(vec![Variable::continuous("x1", 0.0, 5.0), Variable::continuous("x2", 0.0, 3.0)]).unwrap();
    Problem::new("bnh", space, (2, 2, 0), |p| Ok(bnh(p.real(0), p.real(1))))
}

pub fn tnk_problem() -> Problem {
    let space = DesignSpace::new(vec![Variable::continuous("x1", 0.0, PI), Variable::continuous("x2", 0.0, PI)]).unwrap();
    Problem::new("tnk", space, (2, 2, 0), |p| Ok(tnk(p.real(0), p.real(1))))
}

pub fn osy_problem() -> Problem {
    let b = [(0.0, 10.0), (0.0, 10.0), (1.0, 5.0), (0.0, 6.0), (1.0, 5.0), (0.0, 10.0)];
    let space = DesignSpace::new(
        b.iter()
            .enumerate()
            .map(|(i, (lo, hi))| Variable::continuous(&format!("x{}", i + 1), *lo, *hi))
            .collect(),
    )
    .unwrap();
    Problem::new("osy", space, (2, 6, 0), |p| {
        let x: [f64; 6] = std::array::from_fn(|i| p.real(i));
        Ok(osy(&x))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zdt1_corners() {
        assert_eq!(zdt(1, &[0.0, 0.0]).unwrap(), [0.0, 1.0]);
        assert_eq!(zdt(1, &[1.0, 0.0]).unwrap(), [1.0, 0.0]);
        assert!(zdt(1, &[1.5, 0.0]).is_err());
    }

    #[test]
    fn fronts_lie_on_analytic_curves() {
        for k in 1..=3u8 {
            for p in zdt_front(k, 500) {
                let f = zdt(k, &[p[0], 0.0]).unwrap();
                assert!((f[1] - p[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zdt3_front_is_nondominated() {
        let f = zdt_front(3, 200);
        for a in &f {
            for b in &f {
                assert!(a == b || !(a[0] <= b[0] && a[1] <= b[1]));
            }
        }
    }

    #[test]
    fn constraint_counts() {
        assert_eq!(bnh_problem().n_ineq, 2);
        assert_eq!(tnk_problem().n_ineq, 2);
        assert_eq!(osy_problem().n_ineq, 6);
    }

    #[test]
    fn known_feasible_points() {
        assert!(bnh(0.0, 0.0).g.iter().all(|g| *g <= 0.0));
        assert!(tnk(1.0, 0.5).g.iter().all(|g| *g <= 0.0));
        assert!(osy(&[5.0, 1.0, 5.0, 0.0, 5.0, 0.0]).g.iter().all(|g| *g <= 0.0));
    }
}
