//! Mixed hierarchical design spaces.
//!
//! A [`DesignSpace`] is an ordered list of continuous, integer and categorical
//! variables. Variables may be *meta* (their value switches other variables on
//! or off), *decreed* (activated by a meta variable) or *neutral* (always
//! active). The continuous relaxation maps a [`MixedPoint`] to a real vector of
//! length `d + ℓ + Σ L_j`, one-hot encoding every categorical variable.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Domain of a single design variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous { lower: f64, upper: f64 },
    Integer { lower: i64, upper: i64 },
    Categorical { levels: Vec<String> },
}

/// Hierarchy role of a variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Role {
    Neutral,
    Meta,
    /// Included only when `parent` is itself included and takes one of the
    /// `active_levels` (level index for categorical parents, `value - lower`
    /// for integer parents).
    Decreed { parent: usize, active_levels: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub role: Role,
}

impl Variable {
    pub fn continuous(name: &str, lower: f64, upper: f64) -> Self {
        Variable {
            name: name.to_string(),
            kind: VarKind::Continuous { lower, upper },
            role: Role::Neutral,
        }
    }

    pub fn integer(name: &str, lower: i64, upper: i64) -> Self {
        Variable {
            name: name.to_string(),
            kind: VarKind::Integer { lower, upper },
            role: Role::Neutral,
        }
    }

    pub fn categorical<S: ToString>(name: &str, levels: &[S]) -> Self {
        Variable {
            name: name.to_string(),
            kind: VarKind::Categorical {
                levels: levels.iter().map(|l| l.to_string()).collect(),
            },
            role: Role::Neutral,
        }
    }

    /// Categorical variable with `n` levels labelled `0..n`.
    pub fn categorical_n(name: &str, n: usize) -> Self {
        let levels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        Self::categorical(name, &levels)
    }

    pub fn meta(mut self) -> Self {
        self.role = Role::Meta;
        self
    }

    pub fn decreed_by(mut self, parent: usize, active_levels: &[usize]) -> Self {
        self.role = Role::Decreed {
            parent,
            active_levels: active_levels.to_vec(),
        };
        self
    }

    pub fn is_decreed(&self) -> bool {
        matches!(self.role, Role::Decreed { .. })
    }

    /// Number of relaxed coordinates taken by this variable.
    pub fn relaxed_width(&self) -> usize {
        match &self.kind {
            VarKind::Categorical { levels } => levels.len(),
            _ => 1,
        }
    }

    /// Number of levels of a categorical variable, `None` otherwise.
    pub fn n_levels(&self) -> Option<usize> {
        match &self.kind {
            VarKind::Categorical { levels } => Some(levels.len()),
            _ => None,
        }
    }

    /// Value used in place of an excluded entry: domain midpoint for
    /// continuous variables, midpoint rounded down for integers, level 0 for
    /// categorical variables.
    pub fn imputed(&self) -> Value {
        match self.kind {
            VarKind::Continuous { lower, upper } => Value::Real(0.5 * (lower + upper)),
            VarKind::Integer { lower, upper } => Value::Int((lower + upper).div_euclid(2)),
            VarKind::Categorical { .. } => Value::Level(0),
        }
    }

    fn contains(&self, value: &Value) -> bool {
        match (&self.kind, value) {
            (VarKind::Continuous { lower, upper }, Value::Real(x)) => {
                x.is_finite() && *x >= *lower && *x <= *upper
            }
            (VarKind::Integer { lower, upper }, Value::Int(z)) => z >= lower && z <= upper,
            (VarKind::Categorical { levels }, Value::Level(l)) => *l < levels.len(),
            _ => false,
        }
    }

    /// Level index used by activation predicates of the children.
    fn level_of(&self, value: &Value) -> Option<usize> {
        match (&self.kind, value) {
            (VarKind::Categorical { .. }, Value::Level(l)) => Some(*l),
            (VarKind::Integer { lower, .. }, Value::Int(z)) => usize::try_from(z - lower).ok(),
            _ => None,
        }
    }
}

/// Value of one variable in a [`MixedPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Real(f64),
    Int(i64),
    Level(usize),
}

impl Value {
    /// Numeric view: reals as is, integers cast, levels as their index.
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Real(x) => x,
            Value::Int(z) => z as f64,
            Value::Level(l) => l as f64,
        }
    }

    pub fn level(&self) -> Option<usize> {
        match *self {
            Value::Level(l) => Some(l),
            _ => None,
        }
    }
}

/// A point of a [`DesignSpace`] along with its activity flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedPoint {
    values: Vec<Value>,
    activity: Vec<bool>,
}

impl MixedPoint {
    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, i: usize) -> Value {
        self.values[i]
    }

    pub fn activity(&self) -> &[bool] {
        &self.activity
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.activity[i]
    }

    /// Real value of variable `i` (panics on categorical variables).
    pub fn real(&self, i: usize) -> f64 {
        match self.values[i] {
            Value::Real(x) => x,
            Value::Int(z) => z as f64,
            Value::Level(_) => panic!("variable {i} is categorical"),
        }
    }

    /// Level index of categorical variable `i` (panics otherwise).
    pub fn level(&self, i: usize) -> usize {
        self.values[i]
            .level()
            .unwrap_or_else(|| panic!("variable {i} is not categorical"))
    }
}

/// Ordered collection of typed design variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    variables: Vec<Variable>,
}

impl DesignSpace {
    /// Builds and validates a space.
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Argument("design space has no variables".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            match &v.kind {
                VarKind::Continuous { lower, upper } => {
                    if !lower.is_finite() || !upper.is_finite() || lower >= upper {
                        return Err(Error::Argument(format!(
                            "variable {}: continuous bounds must be finite with lower < upper",
                            v.name
                        )));
                    }
                }
                VarKind::Integer { lower, upper } => {
                    if lower > upper {
                        return Err(Error::Argument(format!(
                            "variable {}: integer bounds must satisfy lower <= upper",
                            v.name
                        )));
                    }
                }
                VarKind::Categorical { levels } => {
                    if levels.is_empty() {
                        return Err(Error::Argument(format!(
                            "variable {}: categorical variable needs at least one level",
                            v.name
                        )));
                    }
                }
            }
            if let Role::Decreed { parent, .. } = &v.role {
                let p = variables.get(*parent).ok_or_else(|| {
                    Error::Argument(format!("variable {}: parent {parent} out of range", v.name))
                })?;
                if *parent == i {
                    return Err(Error::Argument(format!("variable {} decrees itself", v.name)));
                }
                if matches!(p.kind, VarKind::Continuous { .. }) {
                    return Err(Error::Argument(format!(
                        "variable {}: parent {} must be a meta or categorical variable",
                        v.name, p.name
                    )));
                }
            }
        }
        // parents must form a forest
        for start in 0..variables.len() {
            let mut seen = vec![false; variables.len()];
            let mut cur = start;
            while let Role::Decreed { parent, .. } = &variables[cur].role {
                if seen[cur] {
                    return Err(Error::Argument(format!(
                        "activation cycle through variable {}",
                        variables[start].name
                    )));
                }
                seen[cur] = true;
                cur = *parent;
            }
        }
        Ok(DesignSpace { variables })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn n_continuous(&self) -> usize {
        self.count(|k| matches!(k, VarKind::Continuous { .. }))
    }

    pub fn n_integer(&self) -> usize {
        self.count(|k| matches!(k, VarKind::Integer { .. }))
    }

    pub fn n_categorical(&self) -> usize {
        self.count(|k| matches!(k, VarKind::Categorical { .. }))
    }

    fn count(&self, f: impl Fn(&VarKind) -> bool) -> usize {
        self.variables.iter().filter(|v| f(&v.kind)).count()
    }

    /// True when any variable is decreed.
    pub fn is_hierarchical(&self) -> bool {
        self.variables.iter().any(Variable::is_decreed)
    }

    /// True when all variables are continuous.
    pub fn is_continuous(&self) -> bool {
        self.n_continuous() == self.len()
    }

    /// `d' = d + ℓ + Σ L_j`.
    pub fn relaxed_dimension(&self) -> usize {
        self.variables.iter().map(Variable::relaxed_width).sum()
    }

    /// Offset of each variable's block in the relaxed vector.
    pub fn relaxed_offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.variables
            .iter()
            .map(|v| {
                let o = off;
                off += v.relaxed_width();
                o
            })
            .collect()
    }

    /// Bounds of each relaxed coordinate.
    pub fn relaxed_bounds(&self) -> Vec<(f64, f64)> {
        let mut b = Vec::with_capacity(self.relaxed_dimension());
        for v in &self.variables {
            match &v.kind {
                VarKind::Continuous { lower, upper } => b.push((*lower, *upper)),
                VarKind::Integer { lower, upper } => b.push((*lower as f64, *upper as f64)),
                VarKind::Categorical { levels } => b.extend(std::iter::repeat_n((0.0, 1.0), levels.len())),
            }
        }
        b
    }

    /// Activity flags implied by the meta values of `values`.
    pub fn activity(&self, values: &[Value]) -> Vec<bool> {
        let mut memo: Vec<Option<bool>> = vec![None; self.variables.len()];
        (0..self.variables.len())
            .map(|i| self.resolve_activity(i, values, &mut memo))
            .collect()
    }

    fn resolve_activity(&self, i: usize, values: &[Value], memo: &mut [Option<bool>]) -> bool {
        if let Some(a) = memo[i] {
            return a;
        }
        let a = match &self.variables[i].role {
            Role::Neutral | Role::Meta => true,
            Role::Decreed {
                parent,
                active_levels,
            } => {
                self.resolve_activity(*parent, values, memo)
                    && self.variables[*parent]
                        .level_of(&values[*parent])
                        .is_some_and(|l| active_levels.contains(&l))
            }
        };
        memo[i] = Some(a);
        a
    }

    /// Validates values and attaches activity flags.
    pub fn point(&self, values: Vec<Value>) -> Result<MixedPoint> {
        if values.len() != self.variables.len() {
            return Err(Error::Domain(format!(
                "point has {} values, space has {} variables",
                values.len(),
                self.variables.len()
            )));
        }
        for (v, x) in self.variables.iter().zip(&values) {
            if !v.contains(x) {
                return Err(Error::Domain(format!("value {x:?} outside domain of {}", v.name)));
            }
        }
        let activity = self.activity(&values);
        Ok(MixedPoint { values, activity })
    }

    /// Convenience constructor for all-continuous spaces.
    pub fn point_from_reals(&self, x: &[f64]) -> Result<MixedPoint> {
        self.point(x.iter().map(|&v| Value::Real(v)).collect())
    }

    /// Indices of the variables included at `point`.
    pub fn active_set(&self, point: &MixedPoint) -> BTreeSet<usize> {
        point
            .activity
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
            .collect()
    }

    /// Replaces every excluded entry by its imputed value.
    pub fn impute(&self, point: &MixedPoint) -> MixedPoint {
        let values = self
            .variables
            .iter()
            .zip(point.values.iter().zip(&point.activity))
            .map(|(v, (x, &active))| if active { *x } else { v.imputed() })
            .collect();
        MixedPoint {
            values,
            activity: point.activity.clone(),
        }
    }

    /// Continuous relaxation; excluded entries are emitted imputed.
    pub fn encode(&self, point: &MixedPoint) -> Result<Vec<f64>> {
        if point.values.len() != self.variables.len() {
            return Err(Error::Domain("point dimension does not match space".into()));
        }
        let mut out = Vec::with_capacity(self.relaxed_dimension());
        for (i, v) in self.variables.iter().enumerate() {
            let x = if point.activity[i] {
                point.values[i]
            } else {
                v.imputed()
            };
            if !v.contains(&x) {
                return Err(Error::Domain(format!("value {x:?} outside domain of {}", v.name)));
            }
            match (&v.kind, x) {
                (VarKind::Categorical { levels }, Value::Level(l)) => {
                    out.extend((0..levels.len()).map(|j| if j == l { 1.0 } else { 0.0 }));
                }
                (_, x) => out.push(x.as_f64()),
            }
        }
        Ok(out)
    }

    /// [`encode`](Self::encode) with continuous and integer coordinates
    /// rescaled to `[0, 1]`; one-hot blocks are left as is.
    pub fn encode_unit(&self, point: &MixedPoint) -> Result<Vec<f64>> {
        let mut v = self.encode(point)?;
        for ((lo, hi), x) in self.relaxed_bounds().into_iter().zip(v.iter_mut()) {
            *x = if hi > lo { (*x - lo) / (hi - lo) } else { 0.0 };
        }
        Ok(v)
    }

    /// Inverse of [`encode_unit`](Self::encode_unit).
    pub fn decode_unit(&self, u: &[f64]) -> Result<MixedPoint> {
        if u.len() != self.relaxed_dimension() {
            return Err(Error::Domain("relaxed vector length does not match space".into()));
        }
        let v: Vec<f64> = self
            .relaxed_bounds()
            .into_iter()
            .zip(u)
            .map(|((lo, hi), x)| lo + x * (hi - lo))
            .collect();
        self.decode(&v)
    }

    /// Inverse of [`encode`](Self::encode): clips, rounds integers half-up,
    /// maps one-hot blocks to their argmax (lowest index on ties), recomputes
    /// activity and imputes excluded entries.
    pub fn decode(&self, v: &[f64]) -> Result<MixedPoint> {
        if v.len() != self.relaxed_dimension() {
            return Err(Error::Domain(format!(
                "relaxed vector has length {}, expected {}",
                v.len(),
                self.relaxed_dimension()
            )));
        }
        if v.iter().any(|x| x.is_nan()) {
            return Err(Error::Domain("NaN in relaxed vector".into()));
        }
        let mut values = Vec::with_capacity(self.variables.len());
        let mut k = 0;
        for var in &self.variables {
            match &var.kind {
                VarKind::Continuous { lower, upper } => {
                    values.push(Value::Real(v[k].clamp(*lower, *upper)));
                    k += 1;
                }
                VarKind::Integer { lower, upper } => {
                    let z = (v[k] + 0.5).floor().clamp(*lower as f64, *upper as f64);
                    values.push(Value::Int(z as i64));
                    k += 1;
                }
                VarKind::Categorical { levels } => {
                    let block = &v[k..k + levels.len()];
                    let mut best = 0;
                    for (j, &b) in block.iter().enumerate() {
                        if b > block[best] {
                            best = j;
                        }
                    }
                    values.push(Value::Level(best));
                    k += levels.len();
                }
            }
        }
        let activity = self.activity(&values);
        Ok(self.impute(&MixedPoint { values, activity }))
    }

    /// Latin hypercube sample of `n` points, deterministic given `seed`.
    ///
    /// Every variable is stratified on its unit interval; integers and
    /// categorical levels are obtained by projecting the stratified value onto
    /// equal-probability bins. Excluded entries are imputed.
    pub fn lhs(&self, n: usize, seed: u64) -> Result<Doe> {
        if n < 1 {
            return Err(Error::Argument("LHS needs at least one point".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = lhs_unit(n, self.variables.len(), &mut rng);
        let points = unit
            .iter()
            .map(|row| {
                let values = self
                    .variables
                    .iter()
                    .zip(row)
                    .map(|(v, &u)| unit_to_value(v, u))
                    .collect::<Vec<_>>();
                let activity = self.activity(&values);
                self.impute(&MixedPoint { values, activity })
            })
            .collect();
        Ok(Doe::from_points(points))
    }

    /// Maps a point of the unit hypercube (one coordinate per variable) to the
    /// space, used by samplers that work per variable.
    pub fn from_unit(&self, u: &[f64]) -> MixedPoint {
        let values: Vec<Value> = self
            .variables
            .iter()
            .zip(u)
            .map(|(v, &x)| unit_to_value(v, x.clamp(0.0, 1.0)))
            .collect();
        let activity = self.activity(&values);
        self.impute(&MixedPoint { values, activity })
    }

    /// Serializes to a JSON array of variable records.
    pub fn to_json(&self) -> Result<String> {
        let records: Vec<VariableRecord> = self.variables.iter().map(VariableRecord::from).collect();
        Ok(serde_json::to_string_pretty(&records)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let records: Vec<VariableRecord> = serde_json::from_str(s)?;
        let vars = records
            .into_iter()
            .map(Variable::try_from)
            .collect::<Result<Vec<_>>>()?;
        DesignSpace::new(vars)
    }
}

fn unit_to_value(v: &Variable, u: f64) -> Value {
    match &v.kind {
        VarKind::Continuous { lower, upper } => Value::Real(lower + u * (upper - lower)),
        VarKind::Integer { lower, upper } => {
            let span = (upper - lower + 1) as f64;
            let z = lower + ((u * span).floor() as i64).min(upper - lower);
            Value::Int(z)
        }
        VarKind::Categorical { levels } => {
            let l = ((u * levels.len() as f64).floor() as usize).min(levels.len() - 1);
            Value::Level(l)
        }
    }
}

/// `n × dim` Latin hypercube on the unit cube: column `j` holds one sample in
/// each stratum `[k/n, (k+1)/n)`.
pub(crate) fn lhs_unit<R: Rng>(n: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        perm.shuffle(rng);
        for (i, &k) in perm.iter().enumerate() {
            let jitter: f64 = rng.random();
            out[i][j] = (k as f64 + jitter) / n as f64;
        }
    }
    out
}

/// On-disk record of one variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct VariableRecord {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<String>>,
    role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<Vec<usize>>,
}

impl From<&Variable> for VariableRecord {
    fn from(v: &Variable) -> Self {
        let (kind, bounds, levels) = match &v.kind {
            VarKind::Continuous { lower, upper } => ("continuous", Some([*lower, *upper]), None),
            VarKind::Integer { lower, upper } => ("integer", Some([*lower as f64, *upper as f64]), None),
            VarKind::Categorical { levels } => ("categorical", None, Some(levels.clone())),
        };
        let (role, parent, activation) = match &v.role {
            Role::Neutral => ("neutral", None, None),
            Role::Meta => ("meta", None, None),
            Role::Decreed {
                parent,
                active_levels,
            } => ("decreed", Some(*parent), Some(active_levels.clone())),
        };
        VariableRecord {
            name: v.name.clone(),
            kind: kind.into(),
            bounds,
            levels,
            role: role.into(),
            parent,
            activation,
        }
    }
}

impl TryFrom<VariableRecord> for Variable {
    type Error = Error;

    fn try_from(r: VariableRecord) -> Result<Self> {
        let bounds = || {
            r.bounds
                .ok_or_else(|| Error::Serde(format!("variable {}: missing bounds", r.name)))
        };
        let kind = match r.kind.as_str() {
            "continuous" => {
                let [lower, upper] = bounds()?;
                VarKind::Continuous { lower, upper }
            }
            "integer" => {
                let [lower, upper] = bounds()?;
                if lower.fract() != 0.0 || upper.fract() != 0.0 {
                    return Err(Error::Serde(format!("variable {}: integer bounds must be whole", r.name)));
                }
                VarKind::Integer {
                    lower: lower as i64,
                    upper: upper as i64,
                }
            }
            "categorical" => VarKind::Categorical {
                levels: r
                    .levels
                    .clone()
                    .ok_or_else(|| Error::Serde(format!("variable {}: missing levels", r.name)))?,
            },
            other => return Err(Error::Serde(format!("unknown variable kind `{other}`"))),
        };
        let role = match r.role.as_str() {
            "neutral" => Role::Neutral,
            "meta" => Role::Meta,
            "decreed" => Role::Decreed {
                parent: r
                    .parent
                    .ok_or_else(|| Error::Serde(format!("variable {}: decreed without parent", r.name)))?,
                active_levels: r.activation.clone().unwrap_or_default(),
            },
            other => return Err(Error::Serde(format!("unknown role `{other}`"))),
        };
        Ok(Variable {
            name: r.name,
            kind,
            role,
        })
    }
}

/// Evaluated design of experiments: points with aligned objective (`y`),
/// inequality (`g`) and equality (`h`) outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Doe {
    pub points: Vec<MixedPoint>,
    pub y: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

impl Doe {
    /// A DoE holding points only (no outputs yet).
    pub fn from_points(points: Vec<MixedPoint>) -> Self {
        let n = points.len();
        Doe {
            points,
            y: vec![Vec::new(); n],
            g: vec![Vec::new(); n],
            h: vec![Vec::new(); n],
        }
    }

    /// Builds a checked DoE: rows aligned, no duplicate encoded points.
    pub fn new(
        space: &DesignSpace,
        points: Vec<MixedPoint>,
        y: Vec<Vec<f64>>,
        g: Vec<Vec<f64>>,
        h: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = points.len();
        if y.len() != n || g.len() != n || h.len() != n {
            return Err(Error::Argument("DoE outputs must align with points".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &points {
            let key: Vec<u64> = space.encode(p)?.iter().map(|x| x.to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::Argument("duplicate point in DoE".into()));
            }
        }
        Ok(Doe { points, y, g, h })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Column `j` of the objective outputs.
    pub fn objective(&self, j: usize) -> Vec<f64> {
        self.y.iter().map(|r| r[j]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn goldstein_like() -> DesignSpace {
        // x1 x2 x3 x4 z1 z2 z3 z4 x5 w1 w2
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

    #[test]
    fn relaxed_dimension_counts_levels() {
        let s = DesignSpace::new(vec![
            Variable::continuous("x", 0.0, 1.0),
            Variable::integer("z", 0, 3),
            Variable::categorical_n("c", 3),
        ])
        .unwrap();
        assert_eq!(s.relaxed_dimension(), 5);
        let only_cont = DesignSpace::new((0..5).map(|i| Variable::continuous(&i.to_string(), 0.0, 1.0)).collect()).unwrap();
        assert_eq!(only_cont.relaxed_dimension(), 5);
    }

    #[test]
    fn encode_examples() {
        let s = DesignSpace::new(vec![Variable::categorical_n("c", 3)]).unwrap();
        let p = s.point(vec![Value::Level(0)]).unwrap();
        assert_eq!(s.encode(&p).unwrap(), vec![1.0, 0.0, 0.0]);

        let s = DesignSpace::new(vec![Variable::continuous("x", 0.0, 1.0)]).unwrap();
        assert_eq!(s.encode(&s.point_from_reals(&[0.5]).unwrap()).unwrap(), vec![0.5]);

        let s = DesignSpace::new(vec![
            Variable::continuous("x", 0.0, 2.0),
            Variable::integer("z", 0, 5),
            Variable::categorical_n("c", 2),
        ])
        .unwrap();
        let p = s
            .point(vec![Value::Real(1.0), Value::Int(2), Value::Level(1)])
            .unwrap();
        assert_eq!(s.encode(&p).unwrap(), vec![1.0, 2.0, 0.0, 1.0]);
    }

    #[test]
    fn decode_argmax_and_ties() {
        let s = DesignSpace::new(vec![Variable::categorical_n("c", 2)]).unwrap();
        assert_eq!(s.decode(&[0.9, 0.1]).unwrap().level(0), 0);
        assert_eq!(s.decode(&[0.5, 0.5]).unwrap().level(0), 0);
        assert_eq!(s.decode(&[0.2, 0.7]).unwrap().level(0), 1);
        assert!(matches!(s.decode(&[f64::NAN, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(s.decode(&[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn decode_rounds_half_up_and_clips() {
        let s = DesignSpace::new(vec![Variable::integer("z", 0, 4), Variable::continuous("x", -1.0, 1.0)]).unwrap();
        let p = s.decode(&[1.5, 3.0]).unwrap();
        assert_eq!(p.value(0), Value::Int(2));
        assert_eq!(p.value(1), Value::Real(1.0));
        let p = s.decode(&[2.49, -7.0]).unwrap();
        assert_eq!(p.value(0), Value::Int(2));
        assert_eq!(p.value(1), Value::Real(-1.0));
    }

    #[test]
    fn encode_rejects_out_of_range_level() {
        let s = DesignSpace::new(vec![Variable::categorical_n("c", 2)]).unwrap();
        assert!(s.point(vec![Value::Level(2)]).is_err());
        let bad = MixedPoint {
            values: vec![Value::Level(5)],
            activity: vec![true],
        };
        assert!(matches!(s.encode(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn impute_examples() {
        let s = DesignSpace::new(vec![
            Variable::categorical_n("m", 2).meta(),
            Variable::continuous("len", 10.0, 20.0).decreed_by(0, &[1]),
            Variable::categorical_n("shape", 3).decreed_by(0, &[1]),
            Variable::integer("k", 0, 5).decreed_by(0, &[1]),
        ])
        .unwrap();
        let p = s
            .point(vec![Value::Level(0), Value::Real(12.0), Value::Level(2), Value::Int(4)])
            .unwrap();
        let q = s.impute(&p);
        assert_eq!(q.value(1), Value::Real(15.0));
        assert_eq!(q.value(2), Value::Level(0));
        // midpoint 2.5 rounded down
        assert_eq!(q.value(3), Value::Int(2));
        assert_eq!(s.impute(&q), q);

        let active = s
            .point(vec![Value::Level(1), Value::Real(12.0), Value::Level(2), Value::Int(4)])
            .unwrap();
        assert_eq!(s.impute(&active), active);
    }

    #[test]
    fn goldstein_active_sets() {
        let s = goldstein_like();
        let mk = |w1: usize| {
            s.point(vec![
                Value::Real(1.0),
                Value::Real(1.0),
                Value::Real(1.0),
                Value::Real(1.0),
                Value::Int(0),
                Value::Int(0),
                Value::Int(0),
                Value::Int(0),
                Value::Real(1.0),
                Value::Level(w1),
                Value::Level(0),
            ])
            .unwrap()
        };
        let excluded = |w1| -> BTreeSet<usize> {
            let act = s.active_set(&mk(w1));
            (0..s.len()).filter(|i| !act.contains(i)).collect()
        };
        assert_eq!(excluded(0), BTreeSet::from([2, 3]));
        assert_eq!(excluded(3), BTreeSet::from([4, 5]));
        assert_eq!(excluded(1), BTreeSet::from([3, 4]));
        assert_eq!(excluded(2), BTreeSet::from([2, 5]));
    }

    #[test]
    fn nested_activation_follows_parent() {
        let s = DesignSpace::new(vec![
            Variable::categorical_n("a", 2).meta(),
            Variable::integer("b", 1, 3).meta().decreed_by(0, &[1]),
            Variable::continuous("c", 0.0, 1.0).decreed_by(1, &[2]),
        ])
        .unwrap();
        let p = s.point(vec![Value::Level(0), Value::Int(3), Value::Real(0.3)]).unwrap();
        assert_eq!(p.activity(), &[true, false, false]);
        let p = s.point(vec![Value::Level(1), Value::Int(3), Value::Real(0.3)]).unwrap();
        assert_eq!(p.activity(), &[true, true, true]);
    }

    #[test]
    fn invalid_spaces_rejected() {
        assert!(DesignSpace::new(vec![Variable::continuous("x", 1.0, 1.0)]).is_err());
        assert!(DesignSpace::new(vec![Variable::continuous("x", 0.0, f64::INFINITY)]).is_err());
        assert!(DesignSpace::new(vec![Variable::integer("z", 3, 2)]).is_err());
        assert!(DesignSpace::new(vec![Variable::integer("z", 2, 2)]).is_ok());
        assert!(DesignSpace::new(vec![Variable::categorical_n("c", 0)]).is_err());
        assert!(DesignSpace::new(vec![
            Variable::continuous("x", 0.0, 1.0),
            Variable::continuous("y", 0.0, 1.0).decreed_by(0, &[0]),
        ])
        .is_err());
        assert!(DesignSpace::new(vec![
            Variable::categorical_n("a", 2).meta().decreed_by(1, &[0]),
            Variable::categorical_n("b", 2).meta().decreed_by(0, &[0]),
        ])
        .is_err());
    }

    #[test]
    fn lhs_stratified_and_deterministic() {
        let s = DesignSpace::new(vec![Variable::continuous("x", 0.0, 1.0)]).unwrap();
        let d = s.lhs(4, 7).unwrap();
        let mut strata: Vec<usize> = d.points.iter().map(|p| (p.real(0) * 4.0).floor() as usize).collect();
        strata.sort();
        assert_eq!(strata, vec![0, 1, 2, 3]);
        assert_eq!(s.lhs(4, 7).unwrap(), d);
        assert_ne!(s.lhs(4, 8).unwrap(), d);
        assert!(matches!(s.lhs(0, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn json_round_trip() {
        let s = goldstein_like();
        let j = s.to_json().unwrap();
        assert!(j.contains("\"decreed\""));
        assert_eq!(DesignSpace::from_json(&j).unwrap(), s);
        assert!(DesignSpace::from_json("[{\"name\":\"x\",\"kind\":\"blob\",\"role\":\"neutral\"}]").is_err());
    }

    #[test]
    fn doe_rejects_duplicates() {
        let s = DesignSpace::new(vec![Variable::continuous("x", 0.0, 1.0)]).unwrap();
        let p = s.point_from_reals(&[0.5]).unwrap();
        let err = Doe::new(&s, vec![p.clone(), p], vec![vec![1.0]; 2], vec![vec![]; 2], vec![vec![]; 2]);
        assert!(err.is_err());
    }
}
