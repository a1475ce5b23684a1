//! Solver-independent model export, solver invocation and solution intake.

mod command;
mod extract;
#[cfg(feature = "highs")]
mod highs;
mod lp;
mod solution;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{MilpError, MilpModel, VarId, VarKind};

pub use command::{CommandBackend, KNOWN_COMMANDS};
pub use extract::{extract_plan, ExtractError, ObjectiveBreakdown, PlanResult, SyncOutcome, TaskWitness};
#[cfg(feature = "highs")]
pub use highs::HighsBackend;
pub use lp::{export_model, fmt_num, parse_lp, ModelFormat};
pub use solution::{parse_solution, ParsedSolution, SolutionFormat};

pub const DEFAULT_INTEGRALITY_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver not found: {0}")]
    NotFound(String),
    #[error("malformed solver output: {0}")]
    Malformed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid model: {0}")]
    Model(MilpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    Timeout,
    Error,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Timeout => "timeout",
            SolveStatus::Error => "error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub time_limit: Option<f64>,
    pub gap: Option<f64>,
    pub threads: Option<u32>,
    pub seed: Option<u64>,
    pub verbose: bool,
    pub integrality_tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: None,
            gap: None,
            threads: None,
            seed: None,
            verbose: false,
            integrality_tolerance: DEFAULT_INTEGRALITY_TOLERANCE,
        }
    }
}

/// Values are present for optimal and feasible results, and for a timeout
/// that left an incumbent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub status: SolveStatus,
    #[serde(skip)]
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub solve_time: f64,
    pub message: Option<String>,
}

impl Solution {
    pub fn without_values(status: SolveStatus, solve_time: f64, message: Option<String>) -> Self {
        Solution { status, values: None, objective: None, gap: None, solve_time, message }
    }

    /// Checks integrality, rounds integer columns and computes the objective.
    pub fn with_values(
        model: &MilpModel,
        status: SolveStatus,
        mut values: Vec<f64>,
        gap: Option<f64>,
        solve_time: f64,
        tol: f64,
    ) -> Self {
        if values.len() != model.variables().len() {
            return Solution::without_values(
                SolveStatus::Error,
                solve_time,
                Some(format!("{} values for {} variables", values.len(), model.variables().len())),
            );
        }
        for (v, x) in model.variables().iter().zip(values.iter_mut()) {
            if v.kind != VarKind::Continuous {
                let r = x.round();
                if (*x - r).abs() > tol {
                    return Solution::without_values(
                        SolveStatus::Error,
                        solve_time,
                        Some(format!("{} = {x} is not integral within {tol}", v.name)),
                    );
                }
                *x = r;
            }
        }
        let objective = Some(model.objective_value(&values));
        Solution { status, values: Some(values), objective, gap, solve_time, message: None }
    }

    pub fn value(&self, v: VarId) -> Option<f64> {
        self.values.as_ref().map(|vals| vals[v.0])
    }

    pub fn has_values(&self) -> bool {
        self.values.is_some()
    }
}

pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    fn solve(&self, model: &MilpModel, options: &SolveOptions) -> Result<Solution, SolverError>;
}

/// How to reach a solver: an in-process id, a known command id, or an
/// explicit command template.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolverConfig {
    pub id: String,
    pub command: Option<String>,
    pub solution_format: Option<SolutionFormat>,
    pub executable: Option<String>,
}

impl SolverConfig {
    pub fn new(id: impl Into<String>) -> Self {
        SolverConfig { id: id.into(), ..Default::default() }
    }

    /// `GSTL_SOLVER_PATH` sets the executable and `GSTL_SOLVER_CMD` the template.
    pub fn with_env(mut self) -> Self {
        if let Ok(p) = std::env::var("GSTL_SOLVER_PATH") {
            if !p.is_empty() {
                self.executable = Some(p);
            }
        }
        if let Ok(c) = std::env::var("GSTL_SOLVER_CMD") {
            if !c.is_empty() {
                self.command = Some(c);
            }
        }
        self
    }

    pub fn backend(&self) -> Result<Box<dyn Backend>, SolverError> {
        if self.command.is_none() && self.id == "highs" {
            #[cfg(feature = "highs")]
            return Ok(Box::new(HighsBackend));
            #[cfg(not(feature = "highs"))]
            return Err(SolverError::NotFound("highs (built without the highs feature)".into()));
        }
        CommandBackend::from_config(self).map(|b| Box::new(b) as Box<dyn Backend>)
    }
}

impl FromStr for SolutionFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plain" => Ok(SolutionFormat::Plain),
            "sol" | "gurobi" => Ok(SolutionFormat::Sol),
            "cbc" => Ok(SolutionFormat::Cbc),
            "highs" => Ok(SolutionFormat::Highs),
            "cplex-xml" | "xml" => Ok(SolutionFormat::CplexXml),
            other => Err(format!("unknown solution format {other:?}")),
        }
    }
}

pub fn solve(model: &MilpModel, config: &SolverConfig, options: &SolveOptions) -> Result<Solution, SolverError> {
    config.backend()?.solve(model, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::LinExpr;

    #[test]
    fn integrality_rounding() {
        let mut m = MilpModel::new();
        let y = m.binary("y").unwrap();
        let x = m.continuous("x", 0.0, 1.0).unwrap();
        m.set_objective(LinExpr::var(y) + x.into());
        let s = Solution::with_values(&m, SolveStatus::Optimal, vec![0.999999, 0.5], Some(0.0), 0.0, 1e-5);
        assert_eq!(s.values, Some(vec![1.0, 0.5]));
        assert_eq!(s.objective, Some(1.5));
        let s = Solution::with_values(&m, SolveStatus::Optimal, vec![0.7, 0.5], None, 0.0, 1e-5);
        assert_eq!(s.status, SolveStatus::Error);
        assert!(!s.has_values());
    }

    #[test]
    fn unknown_solver_id() {
        let c = SolverConfig::new("no-such-solver");
        assert!(matches!(c.backend(), Err(SolverError::NotFound(_))));
    }
}
