use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::encode::{EncodeError, Encoder, Result, StateTable};
use super::model::{LinExpr, MilpModel, ModelCounts, VarId, VarKind};
use crate::dynamics::{AgentModel, TeamTrajectory};
use crate::groups::SpecGroups;
use crate::spec::{AgentId, Fleet, GlobalSpec, DEFAULT_EPSILON};

/// Enforced predicates must hold by this much so that solver round-off does
/// not land exactly on a boundary the oracle rejects.
pub const DEFAULT_MARGIN: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffortNorm {
    /// Sum of absolute control components; keeps the model linear.
    #[default]
    L1,
    /// Sum of squared control components; makes the objective quadratic.
    L2,
}

impl std::str::FromStr for EffortNorm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "l1" => Ok(EffortNorm::L1),
            "l2" => Ok(EffortNorm::L2),
            other => Err(format!("unknown effort norm {other:?} (expected l1 or l2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodingContext {
    pub epsilon: f64,
    pub margin: f64,
    pub beta: f64,
    /// Upper caps on synchronous robustness, by task name. Missing means uncapped.
    pub gamma: BTreeMap<String, u32>,
    pub effort_norm: EffortNorm,
}

impl Default for EncodingContext {
    fn default() -> Self {
        EncodingContext {
            epsilon: DEFAULT_EPSILON,
            margin: DEFAULT_MARGIN,
            beta: 0.0,
            gamma: BTreeMap::new(),
            effort_norm: EffortNorm::L1,
        }
    }
}

/// Where the solution of each spec-level quantity lives in the model.
#[derive(Debug, Clone, Default)]
pub struct ModelIndex {
    pub horizon: usize,
    pub states: BTreeMap<AgentId, Vec<Vec<VarId>>>,
    pub controls: BTreeMap<AgentId, Vec<Vec<VarId>>>,
    pub task_roots: Vec<VarId>,
    /// Per task, the indicator of each group in canonical order.
    pub task_groups: Vec<Vec<VarId>>,
    pub sync_rho: Vec<VarId>,
    pub rho: Option<VarId>,
    pub effort: BTreeMap<AgentId, VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskBudget {
    pub name: String,
    pub synchronous: bool,
    pub groups: usize,
    pub binaries: usize,
    pub disjunction_sites: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct BigMSummary {
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodingStats {
    pub counts: ModelCounts,
    pub state_vars: usize,
    pub control_vars: usize,
    pub indicator_vars: usize,
    pub tasks: Vec<TaskBudget>,
    pub big_m: BigMSummary,
    pub audit: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Assembled {
    pub model: MilpModel,
    pub index: ModelIndex,
    pub stats: EncodingStats,
}

fn state_name(p: AgentId, k: usize, i: usize) -> String {
    format!("x_p{p}_k{k}_{i}")
}

fn control_name(p: AgentId, k: usize, i: usize) -> String {
    format!("u_p{p}_k{k}_{i}")
}

/// Encodes every task against `states`; returns per-task budgets and the
/// global robustness variable when there is at least one synchronous task.
fn encode_spec(
    model: &mut MilpModel,
    states: &StateTable,
    spec: &GlobalSpec,
    groups: &SpecGroups,
    ctx: &EncodingContext,
    index: &mut ModelIndex,
) -> Result<(Vec<TaskBudget>, BigMSummary)> {
    if ctx.epsilon <= 0.0 || ctx.margin < 0.0 {
        return Err(EncodeError::Weight(format!("epsilon {} / margin {}", ctx.epsilon, ctx.margin)));
    }
    let mut enc = Encoder::new(model, states, ctx.epsilon, ctx.margin);
    let mut budgets = Vec::new();
    for (m, (task, gs)) in spec.tasks.iter().zip(&groups.tasks).enumerate() {
        let before = (enc.model.counts().binaries, enc.sites.len());
        let tag = format!("t{m}");
        let h = enc.encode_task(task, gs, 0, &tag)?;
        enc.model.set_bounds(h, 1.0, 1.0)?;
        index.task_roots.push(h);
        index.task_groups.push(if gs.len() == 1 {
            vec![h]
        } else {
            (0..gs.len()).map(|j| enc.model.id(&format!("hg_{tag}_g{j}")).expect("group indicator")).collect()
        });
        budgets.push(TaskBudget {
            name: task.name.clone(),
            synchronous: false,
            groups: gs.len(),
            binaries: enc.model.counts().binaries - before.0,
            disjunction_sites: enc.sites.len() - before.1,
        });
    }
    let mut rhos = Vec::new();
    for (l, (task, gs)) in spec.sync_tasks.iter().zip(&groups.sync_tasks).enumerate() {
        let before = (enc.model.counts().binaries, enc.sites.len());
        let rho = enc.encode_sync_task(task, gs, 0, &format!("s{l}"))?;
        let ub = enc.model.variable(rho).ub;
        let cap = ctx.gamma.get(&task.name).map_or(ub, |g| (*g as f64).min(ub));
        enc.model.set_bounds(rho, 0.0, cap.max(0.0))?;
        if cap < 0.0 {
            enc.model.le(rho, cap)?;
        }
        rhos.push(rho);
        budgets.push(TaskBudget {
            name: task.name.clone(),
            synchronous: true,
            groups: gs.len(),
            binaries: enc.model.counts().binaries - before.0,
            disjunction_sites: enc.sites.len() - before.1,
        });
    }
    let big_m = BigMSummary {
        count: enc.big_m.len(),
        min: enc.big_m.iter().map(|b| b.value).reduce(f64::min),
        max: enc.big_m.iter().map(|b| b.value).reduce(f64::max),
    };
    index.sync_rho = rhos.clone();
    if !rhos.is_empty() {
        let vals: Vec<LinExpr> = rhos.iter().map(|r| LinExpr::var(*r)).collect();
        let min = super::encode::linearize_min(model, &vals, "rho_min")?;
        let (lo, hi) = model.bounds(&min);
        let rho = model.continuous("rho", lo, hi)?;
        model.eq(rho, min)?;
        index.rho = Some(rho);
    }
    Ok((budgets, big_m))
}

fn stats(model: &MilpModel, tasks: Vec<TaskBudget>, big_m: BigMSummary) -> EncodingStats {
    let indicator_vars = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Continuous && (v.name.starts_with('h') || v.name.starts_with('w')))
        .count();
    EncodingStats {
        counts: model.counts(),
        state_vars: model.count_prefixed("x_p"),
        control_vars: model.count_prefixed("u_p"),
        indicator_vars,
        tasks,
        big_m,
        audit: model.audit().to_vec(),
    }
}

/// Builds the planning problem: dynamics and boxes for every agent, each
/// general task enforced, each synchronous robustness in `[0, γ]`, and the
/// objective `ρ − β·Σ effort_p` (without `ρ` when there is no synchronous task).
pub fn assemble_problem(
    spec: &GlobalSpec,
    fleet: &Fleet,
    models: &BTreeMap<AgentId, AgentModel>,
    horizon: usize,
    groups: &SpecGroups,
    ctx: &EncodingContext,
) -> Result<Assembled> {
    if !(ctx.beta >= 0.0 && ctx.beta.is_finite()) {
        return Err(EncodeError::Weight(format!("beta = {}", ctx.beta)));
    }
    let mut model = MilpModel::new();
    let mut index = ModelIndex { horizon, ..Default::default() };
    let mut table = StateTable::new(horizon);
    for agent in &fleet.agents {
        let p = agent.id;
        let dyn_model = models.get(&p).ok_or(EncodeError::MissingAgent(p))?;
        if agent.x0.len() != dyn_model.nx() {
            return Err(EncodeError::Weight(format!("agent {p}: x0 has {} components, model has {}", agent.x0.len(), dyn_model.nx())));
        }
        let mut xs: Vec<Vec<VarId>> = Vec::with_capacity(horizon + 1);
        for k in 0..=horizon {
            let mut row = Vec::with_capacity(dyn_model.nx());
            for (i, (lo, hi)) in dyn_model.state_bounds().iter().enumerate() {
                let v = if k == 0 {
                    model.continuous(state_name(p, k, i), agent.x0[i], agent.x0[i])?
                } else {
                    model.continuous(state_name(p, k, i), *lo, *hi)?
                };
                row.push(v);
            }
            xs.push(row);
        }
        let mut us: Vec<Vec<VarId>> = Vec::with_capacity(horizon);
        for k in 0..horizon {
            let row = dyn_model
                .control_bounds()
                .iter()
                .enumerate()
                .map(|(i, (lo, hi))| model.continuous(control_name(p, k, i), *lo, *hi))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            us.push(row);
        }
        for k in 0..horizon {
            for i in 0..dyn_model.nx() {
                let mut rhs = LinExpr::default();
                for (j, a) in dyn_model.a()[i].iter().enumerate() {
                    rhs.add_term(xs[k][j], *a);
                }
                for (j, b) in dyn_model.b()[i].iter().enumerate() {
                    rhs.add_term(us[k][j], *b);
                }
                model.eq(xs[k + 1][i], rhs)?;
            }
        }
        let exprs = xs.iter().map(|r| r.iter().map(|v| LinExpr::var(*v)).collect()).collect();
        table.insert(p, exprs, dyn_model.state_bounds().to_vec());
        index.states.insert(p, xs);
        index.controls.insert(p, us);
    }
    let (budgets, big_m) = encode_spec(&mut model, &table, spec, groups, ctx, &mut index)?;

    let mut objective = index.rho.map(LinExpr::var).unwrap_or_default();
    if ctx.beta > 0.0 {
        for agent in &fleet.agents {
            let p = agent.id;
            let us = &index.controls[&p];
            match ctx.effort_norm {
                EffortNorm::L1 => {
                    let mut total = LinExpr::default();
                    let mut cap = 0.0;
                    for (k, row) in us.iter().enumerate() {
                        for (i, u) in row.iter().enumerate() {
                            let var = model.variable(*u);
                            let bound = var.lb.abs().max(var.ub.abs());
                            cap += bound;
                            let a = model.continuous(format!("abs_p{p}_k{k}_{i}"), 0.0, bound)?;
                            model.ge(a, *u)?;
                            model.ge(a, -LinExpr::var(*u))?;
                            total = total + a.into();
                        }
                    }
                    let t = model.continuous(format!("t_p{p}"), 0.0, cap)?;
                    model.eq(t, total)?;
                    index.effort.insert(p, t);
                    objective = objective - LinExpr::term(t, ctx.beta);
                }
                EffortNorm::L2 => {
                    for u in us.iter().flatten() {
                        model.add_quadratic(*u, *u, -ctx.beta);
                    }
                }
            }
        }
    }
    model.set_objective(objective);
    let stats = stats(&model, budgets, big_m);
    Ok(Assembled { model, index, stats })
}

/// The task constraints with every state pinned to `team`; the objective is
/// the global robustness. Used to compare the encoding with the oracle.
pub fn assemble_fixed(
    spec: &GlobalSpec,
    groups: &SpecGroups,
    team: &TeamTrajectory,
    boxes: &BTreeMap<AgentId, Vec<(f64, f64)>>,
    ctx: &EncodingContext,
) -> Result<Assembled> {
    let mut model = MilpModel::new();
    let mut index = ModelIndex { horizon: team.horizon(), ..Default::default() };
    let table = StateTable::fixed(team, boxes);
    let (budgets, big_m) = encode_spec(&mut model, &table, spec, groups, ctx, &mut index)?;
    model.set_objective(index.rho.map(LinExpr::var).unwrap_or_default());
    let stats = stats(&model, budgets, big_m);
    Ok(Assembled { model, index, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{enumerate_spec, DEFAULT_GROUP_CAP};
    use crate::spec::{Agent, Formula, Interval, LinearPredicate, StateRef, Task};

    fn one_agent() -> (Fleet, BTreeMap<AgentId, AgentModel>) {
        let fleet = Fleet::new(
            ["UV".to_string()].into(),
            vec![Agent { id: 1, capabilities: ["UV".to_string()].into(), model: "double_integrator".into(), x0: vec![1.0, 1.0, 0.0, 0.0] }],
        )
        .unwrap();
        (fleet, [(1, AgentModel::double_integrator())].into())
    }

    #[test]
    fn hand_countable_model() {
        let (fleet, models) = one_agent();
        let pred = LinearPredicate::new([(StateRef { slot: 1, component: 0 }, 1.0)], -2.0).unwrap();
        let spec = GlobalSpec { tasks: vec![Task::new("t", Formula::Pred(pred), 1, vec![]).unwrap()], sync_tasks: vec![] };
        let groups = enumerate_spec(&spec, &fleet, DEFAULT_GROUP_CAP).unwrap();
        let a = assemble_problem(&spec, &fleet, &models, 2, &groups, &EncodingContext::default()).unwrap();
        assert_eq!(a.stats.state_vars, 12);
        assert_eq!(a.stats.control_vars, 4);
        assert_eq!(a.stats.indicator_vars, 1);
        assert_eq!(a.stats.counts.binaries, 0);
        assert_eq!(a.stats.counts.variables, 17);
        assert!(a.index.rho.is_none());
        a.model.check().unwrap();
    }

    #[test]
    fn effort_terms_follow_norm() {
        let (fleet, models) = one_agent();
        let spec = GlobalSpec::default();
        let groups = enumerate_spec(&spec, &fleet, DEFAULT_GROUP_CAP).unwrap();
        let ctx = EncodingContext { beta: 0.05, ..Default::default() };
        let a = assemble_problem(&spec, &fleet, &models, 3, &groups, &ctx).unwrap();
        assert_eq!(a.model.count_prefixed("abs_p1"), 6);
        assert_eq!(a.model.objective().terms().collect::<Vec<_>>(), vec![(a.index.effort[&1], -0.05)]);
        let ctx = EncodingContext { beta: 0.05, effort_norm: EffortNorm::L2, ..Default::default() };
        let a = assemble_problem(&spec, &fleet, &models, 3, &groups, &ctx).unwrap();
        assert_eq!(a.model.quadratic().len(), 6);
        assert!(a.model.objective().is_constant());
        let ctx = EncodingContext { beta: -1.0, ..Default::default() };
        assert!(matches!(assemble_problem(&spec, &fleet, &models, 3, &groups, &ctx), Err(EncodeError::Weight(_))));
    }

    #[test]
    fn dynamics_rows_hold_for_rollout() {
        let (fleet, models) = one_agent();
        let spec = GlobalSpec::default();
        let groups = enumerate_spec(&spec, &fleet, DEFAULT_GROUP_CAP).unwrap();
        let a = assemble_problem(&spec, &fleet, &models, 3, &groups, &EncodingContext::default()).unwrap();
        let u = crate::dynamics::ControlSequence::new(vec![vec![0.5, 0.5], vec![1.0, 0.0], vec![0.0, -0.25]]);
        let traj = crate::dynamics::rollout(&models[&1], &fleet.agents[0].x0, &u).unwrap();
        let mut values = vec![0.0; a.model.variables().len()];
        for (k, row) in a.index.states[&1].iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                values[v.0] = traj.states()[k][i];
            }
        }
        for (k, row) in a.index.controls[&1].iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                values[v.0] = u.controls()[k][i];
            }
        }
        assert_eq!(a.model.violations(&values, 1e-9), Vec::<String>::new());
    }

    #[test]
    fn horizon_is_checked() {
        let (fleet, models) = one_agent();
        let pred = LinearPredicate::new([(StateRef { slot: 1, component: 0 }, 1.0)], -2.0).unwrap();
        let f = Formula::finally(Interval::new(0, 5).unwrap(), Formula::Pred(pred));
        let spec = GlobalSpec { tasks: vec![Task::new("t", f, 1, vec![]).unwrap()], sync_tasks: vec![] };
        let groups = enumerate_spec(&spec, &fleet, DEFAULT_GROUP_CAP).unwrap();
        let r = assemble_problem(&spec, &fleet, &models, 3, &groups, &EncodingContext::default());
        assert!(matches!(r, Err(EncodeError::Horizon { needed: 5, available: 3 })));
    }
}
