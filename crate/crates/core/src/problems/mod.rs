//! Benchmark problems and the name registry.

pub mod analytic;
pub mod multiobjective;
pub mod schemas;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::{DesignSpace, MixedPoint};

pub use analytic::{branin_f1, eval_cosine, eval_hier_goldstein, eval_mb, eval_toy, g24, gold_cont, mb_matrix, MbMatrix};
pub use multiobjective::{bnh, osy, tnk, zdt, zdt_front};

/// Objective, inequality (`g ≤ 0`) and equality (`h = 0`) outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outputs {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl Outputs {
    pub fn objective(f: f64) -> Self {
        Outputs {
            f: vec![f],
            ..Default::default()
        }
    }
}

type EvalFn = dyn Fn(&MixedPoint) -> Result<Outputs> + Send + Sync;

/// A benchmark problem: design space, evaluator and reference data.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub space: DesignSpace,
    pub n_obj: usize,
    pub n_ineq: usize,
    pub n_eq: usize,
    eval: Arc<EvalFn>,
    /// Known optimal objective value (single-objective problems).
    pub optimum: Option<f64>,
    /// Sampler of the analytic Pareto front.
    pub front: Option<fn(usize) -> Vec<Vec<f64>>>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n_obj", &self.n_obj)
            .field("n_ineq", &self.n_ineq)
            .field("n_eq", &self.n_eq)
            .field("optimum", &self.optimum)
            .finish()
    }
}

impl Problem {
    pub fn new<F>(name: &str, space: DesignSpace, shape: (usize, usize, usize), eval: F) -> Self
    where
        F: Fn(&MixedPoint) -> Result<Outputs> + Send + Sync + 'static,
    {
        Problem {
            name: name.to_string(),
            space,
            n_obj: shape.0,
            n_ineq: shape.1,
            n_eq: shape.2,
            eval: Arc::new(eval),
            optimum: None,
            front: None,
        }
    }

    pub fn with_optimum(mut self, f: f64) -> Self {
        self.optimum = Some(f);
        self
    }

    pub fn with_front(mut self, front: fn(usize) -> Vec<Vec<f64>>) -> Self {
        self.front = Some(front);
        self
    }

    /// Evaluates `x` after checking it against the design space.
    pub fn evaluate(&self, x: &MixedPoint) -> Result<Outputs> {
        let checked = self.space.point(x.values().to_vec())?;
        let out = (self.eval)(&checked)?;
        if out.f.len() != self.n_obj || out.g.len() != self.n_ineq || out.h.len() != self.n_eq {
            return Err(Error::Numerical(format!("problem {} returned malformed outputs", self.name)));
        }
        Ok(out)
    }

    pub fn is_constrained(&self) -> bool {
        self.n_ineq + self.n_eq > 0
    }
}

/// Names accepted by [`by_name`].
pub fn names() -> Vec<&'static str> {
    vec![
        "quadratic", "cosine", "toy", "hier_goldstein", "g24", "mb10", "mb100", "zdt1", "zdt2", "zdt3", "bnh", "tnk", "osy",
    ]
}

/// Looks a problem up by name. ZDT problems accept a `-<d>d` suffix
/// (e.g. `zdt1-5d`); the default is two variables.
pub fn by_name(name: &str) -> Result<Problem> {
    let p = match name {
        "quadratic" => analytic::quadratic(),
        "cosine" => analytic::cosine(),
        "toy" => analytic::toy(),
        "hier_goldstein" => analytic::hier_goldstein(),
        "g24" => analytic::g24_problem(),
        "mb10" => analytic::mb(10)?,
        "mb100" => analytic::mb(100)?,
        "bnh" => multiobjective::bnh_problem(),
        "tnk" => multiobjective::tnk_problem(),
        "osy" => multiobjective::osy_problem(),
        _ => {
            if let Some(rest) = name.strip_prefix("zdt") {
                let (k, d) = match rest.split_once('-') {
                    Some((k, d)) => (k, d.strip_suffix('d').and_then(|v| v.parse().ok())),
                    None => (rest, Some(2)),
                };
                match (k.parse::<u8>(), d) {
                    (Ok(k @ 1..=3), Some(d)) if d >= 2 => return multiobjective::zdt_problem(k, d),
                    _ => {}
                }
            }
            return Err(Error::Config(format!("unknown problem `{name}`")));
        }
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_every_name() {
        for n in names() {
            let p = by_name(n).unwrap();
            assert_eq!(p.name, n);
        }
        assert_eq!(by_name("zdt2-5d").unwrap().space.len(), 5);
        assert!(matches!(by_name("nope"), Err(Error::Config(_))));
        assert!(by_name("zdt4").is_err());
    }

    #[test]
    fn evaluators_are_deterministic() {
        for n in names() {
            let p = by_name(n).unwrap();
            let doe = p.space.lhs(20, 4).unwrap();
            for x in &doe.points {
                let a = p.evaluate(x).unwrap();
                let b = p.evaluate(x).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}
