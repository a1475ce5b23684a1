use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::{Solution, SolveStatus};
use crate::dynamics::{check_bounds_with_tolerance, rollout, AgentModel, ControlSequence, DynamicsError, TeamTrajectory};
use crate::groups::SpecGroups;
use crate::milp::{Assembled, EffortNorm, EncodingContext};
use crate::oracle::{monitor, MonitorReport, OracleError, Robustness};
use crate::spec::{AgentId, Fleet, GlobalSpec};

/// Rollout and solver states may differ by this much before a warning.
pub const RESIDUAL_WARNING: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("solution has no values (status {0})")]
    NoValues(SolveStatus),
    #[error("missing variable: {0}")]
    Missing(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("plan failed verification: {}", summary(.0))]
    VerificationFailure(Box<MonitorReport>),
}

fn summary(r: &MonitorReport) -> String {
    let mut parts: Vec<String> = r.failed_tasks().map(|t| t.name.clone()).collect();
    if r.rho.is_unsat() {
        parts.push(format!("synchronous robustness {}", r.rho));
    }
    parts.join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskWitness {
    pub name: String,
    /// Group selected by the solver's disjunction.
    pub solver_group: Option<String>,
    /// First group that satisfies the task on the rolled-out trajectories.
    pub oracle_group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncOutcome {
    pub name: String,
    pub rho_solver: Option<i64>,
    pub rho: Robustness,
    pub witness: String,
    pub window_start: usize,
    pub duration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveBreakdown {
    pub total: f64,
    pub rho_term: f64,
    pub effort_term: f64,
    pub effort_norm: EffortNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    pub status: SolveStatus,
    #[serde(skip)]
    pub controls: BTreeMap<AgentId, ControlSequence>,
    #[serde(skip)]
    pub trajectories: TeamTrajectory,
    pub rho: Robustness,
    pub rho_solver: Option<f64>,
    pub sync: Vec<SyncOutcome>,
    pub witnesses: Vec<TaskWitness>,
    pub objective: ObjectiveBreakdown,
    pub solver_objective: Option<f64>,
    pub gap: Option<f64>,
    pub solve_time: f64,
    pub max_residual: f64,
    pub bound_warnings: Vec<String>,
    pub verdict: MonitorReport,
}

/// Reads controls from the solution, re-derives states by rollout, and
/// re-verifies the plan with the oracle. A plan the oracle rejects is an error.
pub fn extract_plan(
    solution: &Solution,
    assembled: &Assembled,
    spec: &GlobalSpec,
    fleet: &Fleet,
    models: &BTreeMap<AgentId, AgentModel>,
    groups: &SpecGroups,
    ctx: &EncodingContext,
) -> Result<PlanResult, ExtractError> {
    let values = solution.values.as_ref().ok_or(ExtractError::NoValues(solution.status))?;
    let index = &assembled.index;
    let mut controls = BTreeMap::new();
    let mut trajectories = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut bound_warnings = Vec::new();
    for agent in &fleet.agents {
        let p = agent.id;
        let model = models.get(&p).ok_or_else(|| ExtractError::Missing(format!("model of agent {p}")))?;
        let us = index.controls.get(&p).ok_or_else(|| ExtractError::Missing(format!("controls of agent {p}")))?;
        let seq = ControlSequence::new(us.iter().map(|row| row.iter().map(|v| values[v.0]).collect()).collect());
        let traj = rollout(model, &agent.x0, &seq)?;
        for (k, row) in index.states[&p].iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                max_residual = max_residual.max((values[v.0] - traj.states()[k][i]).abs());
            }
        }
        for b in check_bounds_with_tolerance(model, &traj, &seq, 1e-6) {
            bound_warnings.push(format!("agent {p}: {b:?}"));
        }
        controls.insert(p, seq);
        trajectories.push(traj);
    }
    if max_residual > RESIDUAL_WARNING {
        log::warn!("rollout differs from solver states by up to {max_residual:.3e}");
    }
    for w in &bound_warnings {
        log::warn!("bound check: {w}");
    }
    let team = TeamTrajectory::new(trajectories)?;
    let verdict = monitor(spec, &team, groups, 0)?;

    let witnesses = spec
        .tasks
        .iter()
        .enumerate()
        .map(|(m, t)| TaskWitness {
            name: t.name.clone(),
            solver_group: index.task_groups[m]
                .iter()
                .position(|v| values[v.0] > 0.5)
                .map(|j| groups.tasks[m].groups()[j].to_string()),
            oracle_group: verdict.tasks[m].witness.clone(),
        })
        .collect();
    let sync = verdict
        .sync_tasks
        .iter()
        .zip(&index.sync_rho)
        .map(|(r, v)| SyncOutcome {
            name: r.name.clone(),
            rho_solver: Some(values[v.0].round() as i64),
            rho: r.robustness,
            witness: r.witness.clone(),
            window_start: r.window_start,
            duration: r.duration,
        })
        .collect();

    let rho_term = index.rho.map_or(0.0, |r| values[r.0].round());
    let effort: f64 = controls
        .values()
        .map(|c| {
            c.controls()
                .iter()
                .flatten()
                .map(|u| match ctx.effort_norm {
                    EffortNorm::L1 => u.abs(),
                    EffortNorm::L2 => u * u,
                })
                .sum::<f64>()
        })
        .sum();
    let effort_term = -ctx.beta * effort;

    if !verdict.satisfied {
        return Err(ExtractError::VerificationFailure(Box::new(verdict)));
    }
    Ok(PlanResult {
        status: solution.status,
        controls,
        trajectories: team,
        rho: verdict.rho,
        rho_solver: index.rho.map(|r| values[r.0]),
        sync,
        witnesses,
        objective: ObjectiveBreakdown { total: rho_term + effort_term, rho_term, effort_term, effort_norm: ctx.effort_norm },
        solver_objective: solution.objective,
        gap: solution.gap,
        solve_time: solution.solve_time,
        max_residual,
        bound_warnings,
        verdict,
    })
}
