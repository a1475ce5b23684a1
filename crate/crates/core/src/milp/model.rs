use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("variable name {0:?} is already registered")]
    NameCollision(String),
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("{0} has an unbounded input")]
    Unbounded(&'static str),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("bad bounds [{lb}, {ub}] for {name}")]
    Bounds { name: String, lb: f64, ub: f64 },
}

pub type Result<T> = std::result::Result<T, MilpError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }
}

/// `Σ coeff·var + constant`. Terms are kept merged and sorted by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    terms: BTreeMap<VarId, f64>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: VarId, c: f64) -> Self {
        let mut e = LinExpr::default();
        e.add_term(v, c);
        e
    }

    pub fn add_term(&mut self, v: VarId, c: f64) {
        let entry = self.terms.entry(v).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, *c))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms().map(|(v, c)| c * values[v.0]).sum::<f64>()
    }

    pub fn sum<I: IntoIterator<Item = LinExpr>>(items: I) -> LinExpr {
        items.into_iter().fold(LinExpr::default(), |a, b| a + b)
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::var(v)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (v, c) in rhs.terms {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, k: f64) -> LinExpr {
        if k == 0.0 {
            return LinExpr::default();
        }
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs: f64 = self.terms.iter().map(|(v, c)| c * values[v.0]).sum();
        match self.sense {
            RowSense::Le => lhs <= self.rhs + tol,
            RowSense::Ge => lhs >= self.rhs - tol,
            RowSense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// Maximization MILP with a name registry. Variable order is insertion order.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
    quadratic: Vec<(VarId, VarId, f64)>,
    names: HashMap<String, VarId>,
    audit: Vec<String>,
    infeasible_anchor: Option<VarId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct ModelCounts {
    pub variables: usize,
    pub continuous: usize,
    pub binaries: usize,
    pub integers: usize,
    pub constraints: usize,
    pub nonzeros: usize,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lb: f64, ub: f64) -> Result<VarId> {
        let name = name.into();
        let (lb, ub) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (lb, ub),
        };
        if lb.is_nan() || ub.is_nan() || lb > ub || lb == f64::INFINITY || ub == f64::NEG_INFINITY {
            return Err(MilpError::Bounds { name, lb, ub });
        }
        if self.names.contains_key(&name) {
            return Err(MilpError::NameCollision(name));
        }
        let id = VarId(self.variables.len());
        self.names.insert(name.clone(), id);
        self.variables.push(Variable { name, kind, lb, ub });
        Ok(id)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Result<VarId> {
        self.add_var(name, VarKind::Continuous, lb, ub)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> Result<VarId> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds `expr sense rhs`. The expression's constant moves to the right.
    /// A row with no variables is checked immediately; a violated one makes
    /// the model infeasible through a pinned anchor variable.
    pub fn add_row(&mut self, expr: LinExpr, sense: RowSense, rhs: f64) -> Result<()> {
        let rhs = rhs - expr.constant;
        if !rhs.is_finite() || expr.terms().any(|(_, c)| !c.is_finite()) {
            return Err(MilpError::NonFinite(format!("row {}", self.constraints.len())));
        }
        if let Some((v, _)) = expr.terms().find(|(v, _)| v.0 >= self.variables.len()) {
            return Err(MilpError::UnknownVariable(format!("#{}", v.0)));
        }
        if expr.is_constant() {
            let ok = Constraint { terms: vec![], sense, rhs }.satisfied(&[], 1e-9);
            if !ok {
                self.audit.push(format!("constant row 0 {} {rhs} is violated", sense.symbol()));
                let anchor = match self.infeasible_anchor {
                    Some(a) => a,
                    None => {
                        let a = self.continuous("infeasible_anchor", 0.0, 0.0)?;
                        self.infeasible_anchor = Some(a);
                        a
                    }
                };
                self.constraints.push(Constraint { terms: vec![(anchor, 1.0)], sense: RowSense::Ge, rhs: 1.0 });
            }
            return Ok(());
        }
        self.constraints.push(Constraint { terms: expr.terms().collect(), sense, rhs });
        Ok(())
    }

    pub fn le(&mut self, lhs: impl Into<LinExpr>, rhs: impl Into<LinExpr>) -> Result<()> {
        self.add_row(lhs.into() - rhs.into(), RowSense::Le, 0.0)
    }

    pub fn ge(&mut self, lhs: impl Into<LinExpr>, rhs: impl Into<LinExpr>) -> Result<()> {
        self.add_row(lhs.into() - rhs.into(), RowSense::Ge, 0.0)
    }

    pub fn eq(&mut self, lhs: impl Into<LinExpr>, rhs: impl Into<LinExpr>) -> Result<()> {
        self.add_row(lhs.into() - rhs.into(), RowSense::Eq, 0.0)
    }

    pub fn set_objective(&mut self, objective: LinExpr) {
        self.objective = LinExpr { constant: 0.0, ..objective };
    }

    pub fn add_quadratic(&mut self, a: VarId, b: VarId, c: f64) {
        self.quadratic.push((a, b, c));
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    /// Objective terms `c·x_a·x_b`.
    pub fn quadratic(&self) -> &[(VarId, VarId, f64)] {
        &self.quadratic
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn id(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn set_bounds(&mut self, id: VarId, lb: f64, ub: f64) -> Result<()> {
        let v = &mut self.variables[id.0];
        if lb.is_nan() || ub.is_nan() || lb > ub {
            return Err(MilpError::Bounds { name: v.name.clone(), lb, ub });
        }
        v.lb = lb;
        v.ub = ub;
        Ok(())
    }

    /// Changes a variable's kind; binaries are clipped to `[0, 1]`.
    pub fn retype(&mut self, id: VarId, kind: VarKind) {
        let v = &mut self.variables[id.0];
        v.kind = kind;
        if kind == VarKind::Binary {
            v.lb = v.lb.max(0.0);
            v.ub = v.ub.min(1.0);
        }
    }

    pub fn fix(&mut self, id: VarId, value: f64) -> Result<()> {
        self.set_bounds(id, value, value)
    }

    /// Interval bounds of an expression over the variable box.
    pub fn bounds(&self, e: &LinExpr) -> (f64, f64) {
        let mut lo = e.constant;
        let mut hi = e.constant;
        for (v, c) in e.terms() {
            let var = &self.variables[v.0];
            let (a, b) = (c * var.lb, c * var.ub);
            lo += a.min(b);
            hi += a.max(b);
        }
        (lo, hi)
    }

    /// Findings from construction-time audits such as big-M checks.
    pub fn audit(&self) -> &[String] {
        &self.audit
    }

    pub fn push_audit(&mut self, finding: String) {
        self.audit.push(finding);
    }

    pub fn counts(&self) -> ModelCounts {
        let mut c = ModelCounts { variables: self.variables.len(), constraints: self.constraints.len(), ..Default::default() };
        for v in &self.variables {
            match v.kind {
                VarKind::Continuous => c.continuous += 1,
                VarKind::Binary => c.binaries += 1,
                VarKind::Integer => c.integers += 1,
            }
        }
        c.nonzeros = self.constraints.iter().map(|r| r.terms.len()).sum();
        c
    }

    /// Count of variables whose name starts with `prefix`.
    pub fn count_prefixed(&self, prefix: &str) -> usize {
        self.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    /// Rows violated by `values` beyond `tol`, plus out-of-bound variables.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (v, x) in self.variables.iter().zip(values) {
            if *x < v.lb - tol || *x > v.ub + tol {
                out.push(format!("{} = {x} outside [{}, {}]", v.name, v.lb, v.ub));
            }
            if v.kind != VarKind::Continuous && (x - x.round()).abs() > tol {
                out.push(format!("{} = {x} is not integral", v.name));
            }
        }
        for (i, r) in self.constraints.iter().enumerate() {
            if !r.satisfied(values, tol) {
                out.push(format!("row {i} violated"));
            }
        }
        out
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        let q: f64 = self.quadratic.iter().map(|(a, b, c)| c * values[a.0] * values[b.0]).sum();
        self.objective.eval(values) + q
    }

    /// Checks the structural invariants every exporter relies on.
    pub fn check(&self) -> Result<()> {
        for v in &self.variables {
            if v.kind == VarKind::Binary && (v.lb < 0.0 || v.ub > 1.0) {
                return Err(MilpError::Bounds { name: v.name.clone(), lb: v.lb, ub: v.ub });
            }
        }
        let n = self.variables.len();
        let refs = self
            .constraints
            .iter()
            .flat_map(|r| r.terms.iter().copied())
            .chain(self.objective.terms())
            .chain(self.quadratic.iter().flat_map(|(a, b, c)| [(*a, *c), (*b, *c)]));
        for (v, c) in refs {
            if v.0 >= n {
                return Err(MilpError::UnknownVariable(format!("#{}", v.0)));
            }
            if !c.is_finite() {
                return Err(MilpError::NonFinite(self.variables[v.0].name.clone()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ModelCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} variables ({} binary, {} integer), {} constraints, {} nonzeros",
            self.variables, self.binaries, self.integers, self.constraints, self.nonzeros
        )
    }
}
