use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::Scenario;
use crate::milp::{EffortNorm, ModelCounts};
use crate::oracle::{MonitorReport, Robustness};
use crate::solver::{ObjectiveBreakdown, PlanResult, SolveStatus, SyncOutcome, TaskWitness};

/// Wall-clock measurements, kept apart so reports can be diffed without them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub solve: f64,
    pub total: f64,
    pub stages: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub id: String,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<u32>,
    pub time_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSummary {
    pub beta: f64,
    pub gamma: BTreeMap<String, u32>,
    pub effort_norm: EffortNorm,
}

/// The machine-readable plan report written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanReport {
    pub scenario: String,
    pub horizon: usize,
    pub agents: usize,
    pub verified: bool,
    pub rho: Robustness,
    pub rho_solver: Option<f64>,
    pub sync: Vec<SyncOutcome>,
    pub witnesses: Vec<TaskWitness>,
    pub objective: ObjectiveBreakdown,
    pub weights: WeightSummary,
    pub solver: SolverSummary,
    pub model: ModelCounts,
    pub max_residual: f64,
    pub bound_warnings: Vec<String>,
    pub verdict: MonitorReport,
    pub timing: Timing,
}

impl PlanReport {
    pub fn new(scenario: &Scenario, solver_id: &str, r: &PlanResult, counts: &ModelCounts, timing: Timing) -> Self {
        PlanReport {
            scenario: scenario.name.clone(),
            horizon: scenario.horizon,
            agents: scenario.fleet.len(),
            verified: r.verdict.satisfied,
            rho: r.rho,
            rho_solver: r.rho_solver,
            sync: r.sync.clone(),
            witnesses: r.witnesses.clone(),
            objective: r.objective.clone(),
            weights: WeightSummary {
                beta: scenario.encoding.beta,
                gamma: scenario.encoding.gamma.clone(),
                effort_norm: scenario.encoding.effort_norm,
            },
            solver: SolverSummary {
                id: solver_id.to_string(),
                status: r.status,
                objective: r.solver_objective,
                gap: r.gap,
                seed: scenario.options.seed,
                threads: scenario.options.threads,
                time_limit: scenario.options.time_limit,
            },
            model: *counts,
            max_residual: r.max_residual,
            bound_warnings: r.bound_warnings.clone(),
            verdict: r.verdict.clone(),
            timing,
        }
    }
}

/// Per-task verdicts, witnesses, synchronization windows and global ρ.
pub fn monitor_text(r: &MonitorReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "verdict: {}", if r.satisfied { "satisfied" } else { "VIOLATED" });
    let _ = writeln!(out, "rho: {}", r.rho);
    for t in &r.tasks {
        let _ = write!(out, "  task {:<20} {}", t.name, if t.satisfied { "ok" } else { "FAILED" });
        if let Some(w) = &t.witness {
            let _ = write!(out, "  witness {w}");
        }
        if let Some(a) = &t.agents {
            let _ = write!(out, "  agents {a}");
        }
        if !t.violations.is_empty() {
            let steps: Vec<String> = t.violations.iter().map(usize::to_string).collect();
            let _ = write!(out, "  violated at steps {}", steps.join(","));
        }
        out.push('\n');
    }
    for s in &r.sync_tasks {
        let _ = writeln!(
            out,
            "  sync {:<20} rho {}  witness {}  window start {} duration {}",
            s.name, s.robustness, s.witness, s.window_start, s.duration
        );
    }
    out
}

pub fn summary_text(r: &PlanReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} (H = {}, {} agents)", r.scenario, r.horizon, r.agents);
    let _ = write!(out, "solver {}: {}", r.solver.id, r.solver.status);
    if let Some(g) = r.solver.gap {
        let _ = write!(out, ", gap {:.4}%", g * 100.0);
    }
    let _ = writeln!(out, ", {:.2} s", r.timing.solve);
    let _ = writeln!(
        out,
        "model: {} variables ({} binary, {} integer), {} constraints, {} nonzeros",
        r.model.variables, r.model.binaries, r.model.integers, r.model.constraints, r.model.nonzeros
    );
    let _ = writeln!(
        out,
        "objective {:.6} = rho term {} + effort term {:.6} ({:?}, beta {})",
        r.objective.total, r.objective.rho_term, r.objective.effort_term, r.objective.effort_norm, r.weights.beta
    );
    for w in &r.witnesses {
        let _ = writeln!(
            out,
            "  {:<24} solver group {}  oracle group {}",
            w.name,
            w.solver_group.as_deref().unwrap_or("-"),
            w.oracle_group.as_deref().unwrap_or("-")
        );
    }
    let _ = writeln!(out, "max rollout residual {:.3e}", r.max_residual);
    for w in &r.bound_warnings {
        let _ = writeln!(out, "bound warning: {w}");
    }
    out.push_str(&monitor_text(&r.verdict));
    out
}
