use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::model::{LinExpr, MilpError, MilpModel, VarId};
use crate::dynamics::TeamTrajectory;
use crate::groups::GroupSet;
use crate::spec::{AgentId, Formula, Horizon, LinearPredicate, SyncTask, Task};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("formula is not in negation normal form")]
    NotNnf,
    #[error("encoding needs {needed} steps but the horizon is {available}")]
    Horizon { needed: usize, available: usize },
    #[error("{0} has no groups")]
    EmptyGroupSet(String),
    #[error("agent {0} has no state variables")]
    MissingAgent(AgentId),
    #[error("slot {slot} has no agent bound (element of size {size})")]
    Unbound { slot: usize, size: usize },
    #[error("invalid weight: {0}")]
    Weight(String),
}

pub type Result<T> = std::result::Result<T, EncodeError>;

/// Number of binaries that label `n` entries with distinct codes.
pub fn log2_ceil(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Constrains `entries` (each within `[0, 1]`) to a unit vector using
/// `⌈log₂ n⌉` binaries `y_{label}_b{t}`; entry `j` carries code `j`.
pub fn encode_sos1(model: &mut MilpModel, entries: &[LinExpr], label: &str) -> Result<Vec<VarId>> {
    if entries.is_empty() {
        return Err(MilpError::Empty("SOS1 entry list").into());
    }
    model.eq(LinExpr::sum(entries.iter().cloned()), 1.0)?;
    let m = log2_ceil(entries.len());
    let mut ys = Vec::with_capacity(m);
    for t in 0..m {
        let y = model.binary(format!("y_{label}_b{t}"))?;
        let ones = entries.iter().enumerate().filter(|(j, _)| j >> t & 1 == 1).map(|(_, e)| e.clone());
        let zeros = entries.iter().enumerate().filter(|(j, _)| j >> t & 1 == 0).map(|(_, e)| e.clone());
        model.le(LinExpr::sum(ones), y)?;
        model.le(LinExpr::sum(zeros), LinExpr::constant(1.0) - y.into())?;
        ys.push(y);
    }
    Ok(ys)
}

/// `z = x·q` for `x ∈ [0, u]` and binary `q`. An `x` whose upper bound exceeds
/// `u` is recorded in the model's audit.
pub fn linearize_product(model: &mut MilpModel, x: &LinExpr, q: VarId, u: f64, name: &str) -> Result<VarId> {
    let (lo, hi) = model.bounds(x);
    if !hi.is_finite() || !lo.is_finite() || !u.is_finite() {
        return Err(MilpError::Unbounded("product linearization").into());
    }
    if hi > u {
        model.push_audit(format!("bound audit: {name} input reaches {hi} above U = {u}"));
    }
    let z = model.continuous(name, 0.0, u.max(0.0))?;
    model.le(z, LinExpr::term(q, u))?;
    model.le(z, x.clone())?;
    model.ge(z, x.clone() - LinExpr::constant(u) + LinExpr::term(q, u))?;
    Ok(z)
}

/// Suffix run lengths `c_i = (c_{i+1} + 1)·q_i` with `c_n = 0`, named by
/// `names(i)`. Position `i` uses the bound `min(u, n − i)`.
pub fn encode_counting_chain(model: &mut MilpModel, qs: &[VarId], u: f64, names: impl Fn(usize) -> String) -> Result<Vec<VarId>> {
    let n = qs.len();
    let mut cs = vec![VarId(0); n];
    let mut next = LinExpr::constant(0.0);
    for i in (0..n).rev() {
        let z = linearize_product(model, &(next + 1.0.into()), qs[i], u.min((n - i) as f64), &names(i))?;
        cs[i] = z;
        next = z.into();
    }
    Ok(cs)
}

fn linearize_extreme(model: &mut MilpModel, vals: &[LinExpr], name: &str, max: bool) -> Result<LinExpr> {
    match vals {
        [] => return Err(MilpError::Empty("max/min input").into()),
        [v] => return Ok(v.clone()),
        _ => {}
    }
    let bounds: Vec<(f64, f64)> = vals.iter().map(|v| model.bounds(v)).collect();
    if bounds.iter().any(|(l, h)| !l.is_finite() || !h.is_finite()) {
        return Err(MilpError::Unbounded("max/min linearization").into());
    }
    let lo = bounds.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let hi = bounds.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let (rlo, rhi) = if max {
        (bounds.iter().map(|b| b.0).fold(f64::NEG_INFINITY, f64::max), hi)
    } else {
        (lo, bounds.iter().map(|b| b.1).fold(f64::INFINITY, f64::min))
    };
    let r = model.continuous(name, rlo, rhi)?;
    let mut deltas = Vec::with_capacity(vals.len());
    for (i, v) in vals.iter().enumerate() {
        let d = model.continuous(format!("{name}_sel{i}"), 0.0, 1.0)?;
        let slack = LinExpr::constant(range) - LinExpr::term(d, range);
        if max {
            model.ge(r, v.clone())?;
            model.le(r, v.clone() + slack)?;
        } else {
            model.le(r, v.clone())?;
            model.ge(r, v.clone() - slack)?;
        }
        deltas.push(LinExpr::var(d));
    }
    encode_sos1(model, &deltas, name)?;
    Ok(r.into())
}

/// Exact `max` with log-encoded selectors. A single value is returned as is.
pub fn linearize_max(model: &mut MilpModel, vals: &[LinExpr], name: &str) -> Result<LinExpr> {
    linearize_extreme(model, vals, name, true)
}

pub fn linearize_min(model: &mut MilpModel, vals: &[LinExpr], name: &str) -> Result<LinExpr> {
    linearize_extreme(model, vals, name, false)
}

/// State expressions per step and the state box of one agent.
type AgentStates = (Vec<Vec<LinExpr>>, Vec<(f64, f64)>);

/// Per-agent state expressions `x_p(k)_i` and the boxes used for big-M.
#[derive(Debug, Clone, Default)]
pub struct StateTable {
    horizon: usize,
    agents: BTreeMap<AgentId, AgentStates>,
}

impl StateTable {
    pub fn new(horizon: usize) -> Self {
        StateTable { horizon, agents: BTreeMap::new() }
    }

    /// `states[k][i]` for `k ∈ [0, H]`.
    pub fn insert(&mut self, agent: AgentId, states: Vec<Vec<LinExpr>>, boxes: Vec<(f64, f64)>) {
        debug_assert_eq!(states.len(), self.horizon + 1);
        self.agents.insert(agent, (states, boxes));
    }

    /// Constant states taken from a team trajectory.
    pub fn fixed(team: &TeamTrajectory, boxes: &BTreeMap<AgentId, Vec<(f64, f64)>>) -> Self {
        let mut t = StateTable::new(team.horizon());
        for (i, traj) in team.agents().iter().enumerate() {
            let p = i + 1;
            let states = traj.states().iter().map(|x| x.iter().map(|v| LinExpr::constant(*v)).collect()).collect();
            t.insert(p, states, boxes.get(&p).cloned().unwrap_or_default());
        }
        t
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn get(&self, p: AgentId) -> Result<&AgentStates> {
        self.agents.get(&p).ok_or(EncodeError::MissingAgent(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BigM {
    pub value: f64,
    /// `sup |α|` over the state box, from corner enumeration.
    pub sup_abs: f64,
}

/// Disjunction bookkeeping for statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Site {
    pub label: String,
    pub width: usize,
    pub binaries: usize,
}

/// Emits indication-variable encodings of formulas and tasks into a model.
pub struct Encoder<'a> {
    pub model: &'a mut MilpModel,
    states: &'a StateTable,
    epsilon: f64,
    margin: f64,
    fresh: usize,
    pub big_m: Vec<BigM>,
    pub sites: Vec<Site>,
}

impl<'a> Encoder<'a> {
    /// `margin` is the slack by which an enforced predicate must hold.
    pub fn new(model: &'a mut MilpModel, states: &'a StateTable, epsilon: f64, margin: f64) -> Self {
        Encoder { model, states, epsilon, margin, fresh: 0, big_m: vec![], sites: vec![] }
    }

    fn next_label(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn sos1(&mut self, entries: &[LinExpr], label: String) -> Result<()> {
        let ys = encode_sos1(self.model, entries, &label)?;
        self.sites.push(Site { label, width: entries.len(), binaries: ys.len() });
        Ok(())
    }

    fn check_horizon(&self, needed: usize) -> Result<()> {
        if needed > self.states.horizon() {
            return Err(EncodeError::Horizon { needed, available: self.states.horizon() });
        }
        Ok(())
    }

    /// Fresh `h ∈ [0, 1]` with `h = 1` enforcing `(element, k) ⊨ f`.
    pub fn encode_inner(&mut self, f: &Formula, element: &[AgentId], k: usize) -> Result<VarId> {
        let name = self.next_label("h");
        let h = self.model.continuous(name, 0.0, 1.0)?;
        self.enforce(f, element, k, h)?;
        Ok(h)
    }

    /// Adds constraints so that `h = 1` implies satisfaction and `h = 0`
    /// constrains nothing. Conjunctive nodes share `h` with their children;
    /// disjunctive nodes create fresh children joined by SOS1.
    pub fn enforce(&mut self, f: &Formula, element: &[AgentId], k: usize, h: VarId) -> Result<()> {
        self.check_horizon(k + f.horizon())?;
        self.enforce_at(f, element, k, h)
    }

    fn enforce_at(&mut self, f: &Formula, element: &[AgentId], k: usize, h: VarId) -> Result<()> {
        match f {
            Formula::Pred(p) => self.predicate(p, element, k, h),
            Formula::Not(_) => Err(EncodeError::NotNnf),
            Formula::And(cs) => cs.iter().try_for_each(|c| self.enforce_at(c, element, k, h)),
            Formula::Or(cs) if cs.len() == 1 => self.enforce_at(&cs[0], element, k, h),
            Formula::Or(cs) => {
                let branches: Vec<(&Formula, usize)> = cs.iter().map(|c| (c, k)).collect();
                self.disjunction(h, &branches, element)
            }
            Formula::Globally(i, c) => i.steps().try_for_each(|t| self.enforce_at(c, element, k + t, h)),
            Formula::Finally(i, c) => {
                let branches: Vec<(&Formula, usize)> = i.steps().map(|t| (c.as_ref(), k + t)).collect();
                self.disjunction(h, &branches, element)
            }
            Formula::Until(i, l, r) => {
                let mut entries = vec![LinExpr::constant(1.0) - h.into()];
                for kp in k + i.lo()..=k + i.hi() {
                    let name = self.next_label("w");
                    let w = self.model.continuous(name, 0.0, 1.0)?;
                    self.enforce_at(r, element, kp, w)?;
                    for kpp in k..=kp {
                        self.enforce_at(l, element, kpp, w)?;
                    }
                    entries.push(w.into());
                }
                let label = self.next_label("d");
                self.sos1(&entries, label)
            }
        }
    }

    fn disjunction(&mut self, h: VarId, branches: &[(&Formula, usize)], element: &[AgentId]) -> Result<()> {
        let mut entries = vec![LinExpr::constant(1.0) - h.into()];
        for (c, k) in branches {
            let name = self.next_label("h");
            let hc = self.model.continuous(name, 0.0, 1.0)?;
            self.enforce_at(c, element, *k, hc)?;
            entries.push(hc.into());
        }
        let label = self.next_label("d");
        self.sos1(&entries, label)
    }

    /// `α ≥ margin + (M + margin)(h − 1)` with `M` derived from the state box.
    fn predicate(&mut self, p: &LinearPredicate, element: &[AgentId], k: usize, h: VarId) -> Result<()> {
        let mut alpha = LinExpr::constant(p.offset());
        let mut center = p.offset();
        let mut spread = 0.0;
        let mut corners: Vec<(f64, f64, f64)> = Vec::new();
        for (r, c) in p.coeffs() {
            let agent = *element.get(r.slot - 1).ok_or(EncodeError::Unbound { slot: r.slot, size: element.len() })?;
            let (states, boxes) = self.states.get(agent)?;
            let x = states[k]
                .get(r.component)
                .ok_or_else(|| MilpError::UnknownVariable(format!("component {} of agent {agent}", r.component)))?;
            alpha = alpha + x.clone() * *c;
            let (lo, hi) = boxes.get(r.component).copied().unwrap_or((0.0, 0.0));
            center += c * (lo + hi) / 2.0;
            spread += c.abs() * (hi - lo) / 2.0;
            corners.push((*c, lo, hi));
        }
        let m = spread + center.abs() + self.epsilon;
        let sup_abs = corner_sup(p.offset(), &corners);
        if sup_abs > m {
            self.model.push_audit(format!("big-M {m} below sup |alpha| = {sup_abs}"));
        }
        self.big_m.push(BigM { value: m, sup_abs });
        let lhs = alpha - LinExpr::term(h, m + self.margin);
        self.model.ge(lhs, -m)?;
        Ok(())
    }

    /// Task indication variable `hT_{tag}`; fixing it to 1 requires one
    /// group whose every element satisfies the inner formula.
    pub fn encode_task(&mut self, task: &Task, groups: &GroupSet, k: usize, tag: &str) -> Result<VarId> {
        if groups.is_empty() {
            return Err(EncodeError::EmptyGroupSet(task.name.clone()));
        }
        self.check_horizon(k + task.horizon())?;
        let h = self.model.continuous(format!("hT_{tag}"), 0.0, 1.0)?;
        let n = groups.len();
        let group_vars: Vec<VarId> = if n == 1 {
            vec![h]
        } else {
            let vars = (0..n)
                .map(|j| self.model.continuous(format!("hg_{tag}_g{j}"), 0.0, 1.0))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let mut entries = vec![LinExpr::constant(1.0) - h.into()];
            entries.extend(vars.iter().map(|v| LinExpr::var(*v)));
            self.sos1(&entries, tag.to_string())?;
            vars
        };
        if task.count == 1 {
            for (g, hg) in groups.groups().iter().zip(&group_vars) {
                self.enforce(&task.formula, &g.elements()[0], k, *hg)?;
            }
            return Ok(h);
        }
        let mut roots: BTreeMap<&[AgentId], VarId> = BTreeMap::new();
        for (g, hg) in groups.groups().iter().zip(&group_vars) {
            for e in g.elements() {
                let he = match roots.get(e.as_slice()) {
                    Some(v) => *v,
                    None => {
                        let v = self.model.continuous(format!("he_{tag}_e{}", roots.len()), 0.0, 1.0)?;
                        self.enforce(&task.formula, e, k, v)?;
                        roots.insert(e, v);
                        v
                    }
                };
                self.model.ge(he, *hg)?;
            }
        }
        Ok(h)
    }

    /// Synchronous robustness `rho_{tag} = max_j duration_j − d`, where a
    /// group's duration is its longest common run starting in the window.
    pub fn encode_sync_task(&mut self, task: &SyncTask, groups: &GroupSet, k: usize, tag: &str) -> Result<VarId> {
        if groups.is_empty() {
            return Err(EncodeError::EmptyGroupSet(task.name.clone()));
        }
        let horizon = self.states.horizon();
        self.check_horizon(k + task.horizon())?;
        let first = k + task.window.lo();
        let last_start = k + task.window.hi();
        let k_max = horizon - task.formula.horizon();
        let u = (horizon + 1) as f64;
        let mut roots: BTreeMap<(&[AgentId], usize), VarId> = BTreeMap::new();
        let mut durations = Vec::with_capacity(groups.len());
        for (j, g) in groups.groups().iter().enumerate() {
            let mut qs = Vec::with_capacity(k_max + 1 - first);
            for kp in first..=k_max {
                let q = self.model.binary(format!("q_{tag}_g{j}_k{kp}"))?;
                for e in g.elements() {
                    let he = match roots.get(&(e.as_slice(), kp)) {
                        Some(v) => *v,
                        None => {
                            let v = self.model.continuous(format!("he_{tag}_e{}_k{kp}", roots.len()), 0.0, 1.0)?;
                            self.enforce(&task.formula, e, kp, v)?;
                            roots.insert((e, kp), v);
                            v
                        }
                    };
                    self.model.ge(he, q)?;
                }
                qs.push(q);
            }
            let chain = encode_counting_chain(self.model, &qs, u, |i| format!("c_{tag}_g{j}_k{}", first + i))?;
            let window: Vec<LinExpr> = chain[..=last_start - first].iter().map(|c| LinExpr::var(*c)).collect();
            durations.push(linearize_max(self.model, &window, &format!("dur_{tag}_g{j}"))?);
        }
        let best = linearize_max(self.model, &durations, &format!("best_{tag}"))?;
        let d = task.hold as f64;
        let rho = self.model.continuous(format!("rho_{tag}"), -d, u - d)?;
        self.model.eq(rho, best - LinExpr::constant(d))?;
        Ok(rho)
    }
}

/// `sup |offset + Σ c·x|` over the box, by enumerating corners.
fn corner_sup(offset: f64, terms: &[(f64, f64, f64)]) -> f64 {
    if terms.len() > 16 {
        let center: f64 = offset + terms.iter().map(|(c, l, h)| c * (l + h) / 2.0).sum::<f64>();
        return center.abs() + terms.iter().map(|(c, l, h)| c.abs() * (h - l) / 2.0).sum::<f64>();
    }
    let mut best: f64 = 0.0;
    for mask in 0u32..1 << terms.len() {
        let v: f64 = offset
            + terms
                .iter()
                .enumerate()
                .map(|(i, (c, l, h))| c * if mask >> i & 1 == 1 { *h } else { *l })
                .sum::<f64>();
        best = best.max(v.abs());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::VarKind;

    /// Feasibility of `model` with the given continuous values, searching all
    /// assignments of the remaining (binary) variables.
    fn feasible_with(model: &MilpModel, fixed: &[(VarId, f64)]) -> bool {
        let free: Vec<VarId> = (0..model.variables().len())
            .map(VarId)
            .filter(|v| !fixed.iter().any(|(f, _)| f == v))
            .collect();
        assert!(free.iter().all(|v| model.variable(*v).kind == VarKind::Binary));
        let mut values = vec![0.0; model.variables().len()];
        for (v, x) in fixed {
            values[v.0] = *x;
        }
        (0u32..1 << free.len()).any(|mask| {
            for (i, v) in free.iter().enumerate() {
                values[v.0] = (mask >> i & 1) as f64;
            }
            model.violations(&values, 1e-9).is_empty()
        })
    }

    #[test]
    fn log2_ceil_values() {
        let got: Vec<usize> = (1..=9).map(log2_ceil).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn sos1_integral_points_are_unit_vectors() {
        for n in 1..=9usize {
            let mut m = MilpModel::new();
            let es: Vec<VarId> = (0..n).map(|i| m.continuous(format!("e{i}"), 0.0, 1.0).unwrap()).collect();
            let ys = encode_sos1(&mut m, &es.iter().map(|e| LinExpr::var(*e)).collect::<Vec<_>>(), "s").unwrap();
            assert_eq!(ys.len(), log2_ceil(n));
            for point in 0u32..1 << n {
                let fixed: Vec<(VarId, f64)> = es.iter().enumerate().map(|(i, e)| (*e, (point >> i & 1) as f64)).collect();
                assert_eq!(feasible_with(&m, &fixed), point.count_ones() == 1, "n={n} point={point:b}");
            }
        }
    }

    #[test]
    fn sos1_single_entry_is_forced() {
        let mut m = MilpModel::new();
        let e = m.continuous("e", 0.0, 1.0).unwrap();
        assert!(encode_sos1(&mut m, &[e.into()], "s").unwrap().is_empty());
        assert!(!feasible_with(&m, &[(e, 0.0)]));
        assert!(feasible_with(&m, &[(e, 1.0)]));
        assert!(encode_sos1(&mut m, &[], "t").is_err());
    }

    #[test]
    fn product_vertices() {
        for x in 0..=10 {
            for q in 0..=1 {
                let mut m = MilpModel::new();
                let xv = m.continuous("x", 0.0, 10.0).unwrap();
                let qv = m.binary("q").unwrap();
                let z = linearize_product(&mut m, &xv.into(), qv, 10.0, "z").unwrap();
                assert!(m.audit().is_empty());
                for zz in 0..=10 {
                    let mut values = vec![0.0; 3];
                    values[xv.0] = x as f64;
                    values[qv.0] = q as f64;
                    values[z.0] = zz as f64;
                    assert_eq!(m.violations(&values, 1e-9).is_empty(), zz == x * q);
                }
            }
        }
    }

    #[test]
    fn product_bound_audit() {
        let mut m = MilpModel::new();
        let x = m.continuous("x", 0.0, 12.0).unwrap();
        let q = m.binary("q").unwrap();
        let z = linearize_product(&mut m, &x.into(), q, 10.0, "z").unwrap();
        assert_eq!(m.audit().len(), 1);
        let mut v = vec![0.0; 3];
        v[x.0] = 11.0;
        v[q.0] = 1.0;
        assert!((0..=10).all(|zz| {
            v[z.0] = zz as f64;
            !m.violations(&v, 1e-9).is_empty()
        }));
        let mut m = MilpModel::new();
        let x = m.continuous("x", 0.0, f64::INFINITY).unwrap();
        let q = m.binary("q").unwrap();
        assert!(linearize_product(&mut m, &x.into(), q, 10.0, "z").is_err());
    }

    fn scalar_table(values: &[&[f64]], lo: f64, hi: f64) -> StateTable {
        let team = TeamTrajectory::new(
            values
                .iter()
                .map(|v| crate::dynamics::Trajectory::new(v.iter().map(|x| vec![*x]).collect()).unwrap())
                .collect(),
        )
        .unwrap();
        let boxes = (1..=values.len()).map(|p| (p, vec![(lo, hi)])).collect();
        StateTable::fixed(&team, &boxes)
    }

    fn above(thr: f64) -> Formula {
        Formula::Pred(LinearPredicate::new([(crate::spec::StateRef { slot: 1, component: 0 }, 1.0)], -thr).unwrap())
    }

    #[test]
    fn predicate_big_m_from_box() {
        // α = x − 2 on [0, 7]: sup |α| = 5
        for (x, ok) in [(1.0, false), (3.0, true), (2.0, true)] {
            let table = scalar_table(&[&[x]], 0.0, 7.0);
            let mut m = MilpModel::new();
            let mut enc = Encoder::new(&mut m, &table, 1e-4, 0.0);
            let h = enc.encode_inner(&above(2.0), &[1], 0).unwrap();
            assert_eq!(enc.big_m[0], BigM { value: 5.0 + 1e-4, sup_abs: 5.0 });
            assert!(feasible_with(&m, &[(h, 0.0)]));
            assert_eq!(feasible_with(&m, &[(h, 1.0)]), ok, "x = {x}");
        }
    }

    #[test]
    fn margin_excludes_boundary() {
        let table = scalar_table(&[&[2.0]], 0.0, 7.0);
        let mut m = MilpModel::new();
        let mut enc = Encoder::new(&mut m, &table, 1e-4, 1e-5);
        let h = enc.encode_inner(&above(2.0), &[1], 0).unwrap();
        assert!(!feasible_with(&m, &[(h, 1.0)]));
    }

    #[test]
    fn finally_agrees_with_truth_patterns() {
        for bits in 0u32..8 {
            let xs: Vec<f64> = (0..3).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            let table = scalar_table(&[&xs], -1.0, 1.0);
            let mut m = MilpModel::new();
            let f = Formula::finally(crate::spec::Interval::new(0, 2).unwrap(), above(0.0));
            let mut enc = Encoder::new(&mut m, &table, 1e-4, 0.0);
            let h = enc.encode_inner(&f, &[1], 0).unwrap();
            // The three branch indicators are continuous; search them on {0,1}.
            let branch: Vec<VarId> = (0..m.variables().len())
                .map(VarId)
                .filter(|v| *v != h && m.variable(*v).kind == VarKind::Continuous)
                .collect();
            let feasible = (0u32..8).any(|mask| {
                let mut fixed = vec![(h, 1.0)];
                fixed.extend(branch.iter().enumerate().map(|(i, v)| (*v, (mask >> i & 1) as f64)));
                feasible_with(&m, &fixed)
            });
            assert_eq!(feasible, bits != 0, "bits {bits:03b}");
        }
    }

    #[test]
    fn not_nnf_and_horizon_errors() {
        let table = scalar_table(&[&[0.0, 0.0]], -1.0, 1.0);
        let mut m = MilpModel::new();
        let mut enc = Encoder::new(&mut m, &table, 1e-4, 0.0);
        assert_eq!(enc.encode_inner(&Formula::not(above(0.0)), &[1], 0), Err(EncodeError::NotNnf));
        let g = Formula::globally(crate::spec::Interval::new(0, 2).unwrap(), above(0.0));
        assert!(matches!(enc.encode_inner(&g, &[1], 0), Err(EncodeError::Horizon { needed: 2, available: 1 })));
    }

    #[test]
    fn counting_chain_on_fixed_q() {
        let mut m = MilpModel::new();
        let qs: Vec<VarId> = (0..5).map(|i| m.binary(format!("q{i}")).unwrap()).collect();
        let cs = encode_counting_chain(&mut m, &qs, 6.0, |i| format!("c{i}")).unwrap();
        let pattern = [1.0, 1.0, 0.0, 1.0, 1.0];
        let expect = [2.0, 1.0, 0.0, 2.0, 1.0];
        let mut values = vec![0.0; m.variables().len()];
        for i in 0..5 {
            values[qs[i].0] = pattern[i];
            values[cs[i].0] = expect[i];
        }
        assert!(m.violations(&values, 1e-9).is_empty());
        values[cs[0].0] = 1.0;
        assert!(!m.violations(&values, 1e-9).is_empty());
    }
}
