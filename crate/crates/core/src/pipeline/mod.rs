//! End-to-end planning: scenario loading, validation, encoding, solving,
//! oracle re-verification and artifact emission.

mod plot;
mod report;
mod traces;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::AgentModel;
use crate::groups::{enumerate_spec, SpecGroups, DEFAULT_GROUP_CAP};
use crate::milp::{assemble_problem, Assembled, BigMSummary, EffortNorm, EncodingContext, ModelCounts, TaskBudget};
use crate::oracle::{monitor, MonitorReport};
use crate::par;
use crate::solver::{
    export_model, extract_plan, ExtractError, ModelFormat, PlanResult, SolveOptions, SolveStatus, SolverConfig,
};
use crate::spec::{parse_document, validate, Document, Region};
use crate::spec::{AgentId, Fleet, GlobalSpec, DEFAULT_EPSILON};

pub use plot::render_svg;
pub use report::{monitor_text, summary_text, PlanReport, Timing};
pub use traces::{read_traces, write_traces, TraceError};

/// Time limit applied when a scenario does not set one.
pub const DEFAULT_TIME_LIMIT: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Load,
    Validate,
    Groups,
    Encode,
    Export,
    Solve,
    Extract,
    Emit,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Load => "load",
            Stage::Validate => "validate",
            Stage::Groups => "groups",
            Stage::Encode => "encode",
            Stage::Export => "export",
            Stage::Solve => "solve",
            Stage::Extract => "extract",
            Stage::Emit => "emit",
            Stage::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage}: {message}")]
    Failed { stage: Stage, message: String },
    #[error("{stage}: unsatisfiable: {}", .diagnostics.join("; "))]
    Unsat { stage: Stage, diagnostics: Vec<String> },
    #[error("solve: time limit reached after {elapsed:.1} s without a feasible plan")]
    Timeout { elapsed: f64 },
    #[error("extract: plan failed oracle verification: {}", failed(.0))]
    Verification(Box<MonitorReport>),
}

fn failed(r: &MonitorReport) -> String {
    let mut parts: Vec<String> = r
        .failed_tasks()
        .map(|t| match (&t.agents, t.violations.first()) {
            (Some(a), Some(k)) => format!("{} ({a} at step {k})", t.name),
            _ => t.name.clone(),
        })
        .collect();
    if r.rho.is_unsat() {
        parts.push(format!("synchronous robustness {}", r.rho));
    }
    parts.join(", ")
}

impl PipelineError {
    fn at(stage: Stage) -> impl FnOnce(String) -> PipelineError {
        move |message| PipelineError::Failed { stage, message }
    }

    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Failed { stage, .. } | PipelineError::Unsat { stage, .. } => *stage,
            PipelineError::Timeout { .. } => Stage::Solve,
            PipelineError::Verification(_) => Stage::Extract,
        }
    }

    /// 2 unsatisfiable, 3 timeout, 4 verification failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Unsat { .. } => 2,
            PipelineError::Timeout { .. } => 3,
            PipelineError::Verification(_) => 4,
            PipelineError::Failed { .. } => 1,
        }
    }
}

fn fail<E: fmt::Display>(stage: Stage) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Failed { stage, message: e.to_string() }
}

/// A fully resolved planning problem.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub spec: GlobalSpec,
    pub fleet: Fleet,
    pub models: BTreeMap<AgentId, AgentModel>,
    pub horizon: usize,
    pub regions: BTreeMap<String, Region>,
    pub encoding: EncodingContext,
    pub group_cap: usize,
    pub solver: SolverConfig,
    pub options: SolveOptions,
    pub out_dir: PathBuf,
}

impl Scenario {
    pub fn from_document(doc: Document, fallback_name: &str) -> Result<Self, PipelineError> {
        let fleet = doc.fleet.ok_or_else(|| PipelineError::at(Stage::Load)("scenario has no [fleet]".into()))?;
        let horizon = doc.horizon.ok_or_else(|| PipelineError::at(Stage::Load)("scenario has no horizon".into()))?;
        let mut models = BTreeMap::new();
        for a in &fleet.agents {
            let m = match doc.models.get(&a.model) {
                Some(m) => m.clone(),
                None => AgentModel::preset(&a.model).map_err(fail(Stage::Load))?,
            };
            if m.nx() != a.x0.len() {
                return Err(PipelineError::at(Stage::Load)(format!(
                    "agent {}: x0 has {} components, model {:?} has {}",
                    a.id,
                    a.x0.len(),
                    a.model,
                    m.nx()
                )));
            }
            models.insert(a.id, m);
        }
        let beta = doc.weights.beta.unwrap_or(0.0);
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(PipelineError::at(Stage::Load)(format!("beta must be a finite non-negative number, got {beta}")));
        }
        let effort_norm = match &doc.encoding.effort_norm {
            Some(s) => s.parse::<EffortNorm>().map_err(fail(Stage::Load))?,
            None => EffortNorm::default(),
        };
        let defaults = EncodingContext::default();
        let encoding = EncodingContext {
            epsilon: doc.encoding.epsilon.unwrap_or(DEFAULT_EPSILON),
            margin: doc.encoding.margin.unwrap_or(defaults.margin),
            beta,
            gamma: doc.weights.gamma.clone(),
            effort_norm,
        };
        let s = &doc.solver;
        let solver = SolverConfig {
            id: s.id.clone().unwrap_or_else(|| "highs".into()),
            command: s.command.clone(),
            solution_format: s.solution_format.as_deref().map(str::parse).transpose().map_err(fail(Stage::Load))?,
            executable: None,
        };
        let options = SolveOptions {
            time_limit: Some(s.time_limit.unwrap_or(DEFAULT_TIME_LIMIT)),
            gap: s.gap,
            threads: s.threads,
            seed: s.seed.map(u64::from),
            ..SolveOptions::default()
        };
        let name = doc.name.clone().unwrap_or_else(|| fallback_name.to_string());
        Ok(Scenario {
            out_dir: PathBuf::from("out").join(&name),
            name,
            spec: doc.spec,
            fleet,
            models,
            horizon,
            regions: doc.regions,
            encoding,
            group_cap: doc.encoding.group_cap.unwrap_or(DEFAULT_GROUP_CAP),
            solver,
            options,
        })
    }

    pub fn parse(text: &str, fallback_name: &str) -> Result<Self, PipelineError> {
        let doc = parse_document(text).map_err(fail(Stage::Load))?;
        Self::from_document(doc, fallback_name)
    }

    /// Reads a scenario file. The solver executable and command template may
    /// be overridden from the environment.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::at(Stage::Load)(format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        let doc = parse_document(&text).map_err(|e| PipelineError::at(Stage::Load)(format!("{}:{e}", path.display())))?;
        let mut s = Self::from_document(doc, stem)?;
        s.solver = s.solver.with_env();
        Ok(s)
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    /// Validation diagnostics as an `Unsat` error, and the group sets otherwise.
    pub fn groups(&self) -> Result<SpecGroups, PipelineError> {
        let diagnostics = validate(&self.spec, &self.fleet, self.horizon);
        if !diagnostics.is_empty() {
            return Err(PipelineError::Unsat {
                stage: Stage::Validate,
                diagnostics: diagnostics.into_iter().map(|d| d.message).collect(),
            });
        }
        enumerate_spec(&self.spec, &self.fleet, self.group_cap)
            .map_err(|(task, e)| PipelineError::at(Stage::Groups)(format!("{task}: {e}")))
    }

    pub fn assemble(&self, groups: &SpecGroups) -> Result<Assembled, PipelineError> {
        let nnf = self.spec.to_nnf(self.encoding.epsilon).map_err(fail(Stage::Encode))?;
        assemble_problem(&nnf, &self.fleet, &self.models, self.horizon, groups, &self.encoding).map_err(fail(Stage::Encode))
    }
}

/// Result of a successful [`run_plan`].
#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub result: PlanResult,
    pub report: PlanReport,
    pub files: Vec<PathBuf>,
}

impl PlanOutput {
    /// 0 for a verified plan, 3 when the plan is an incumbent left by a timeout.
    pub fn exit_code(&self) -> i32 {
        if self.result.status == SolveStatus::Timeout {
            3
        } else {
            0
        }
    }
}

/// Validates, encodes, solves, re-verifies and writes `model.lp`,
/// `traces.csv`, `report.json`, `summary.txt` and `plot.svg` to the output
/// directory.
pub fn run_plan(scenario: &Scenario) -> Result<PlanOutput, PipelineError> {
    let total = Instant::now();
    let mut stages = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |stages: &mut BTreeMap<String, f64>, stage: Stage| {
        stages.insert(stage.to_string(), clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };

    let groups = scenario.groups()?;
    lap(&mut stages, Stage::Groups);
    let assembled = scenario.assemble(&groups)?;
    lap(&mut stages, Stage::Encode);
    for a in &assembled.stats.audit {
        log::warn!("encoding audit: {a}");
    }

    let out = &scenario.out_dir;
    fs::create_dir_all(out).map_err(|e| PipelineError::at(Stage::Emit)(format!("{}: {e}", out.display())))?;
    let mut files = Vec::new();
    let lp = export_model(&assembled.model, ModelFormat::Lp).map_err(fail(Stage::Export))?;
    files.push(write(out, "model.lp", &lp)?);
    lap(&mut stages, Stage::Export);

    log::info!(
        "solving {}: {} variables ({} binary), {} constraints",
        scenario.name,
        assembled.stats.counts.variables,
        assembled.stats.counts.binaries,
        assembled.stats.counts.constraints
    );
    let backend = scenario.solver.backend().map_err(fail(Stage::Solve))?;
    let solution = backend.solve(&assembled.model, &scenario.options).map_err(fail(Stage::Solve))?;
    lap(&mut stages, Stage::Solve);
    match solution.status {
        SolveStatus::Infeasible => {
            return Err(PipelineError::Unsat {
                stage: Stage::Solve,
                diagnostics: vec![format!("{} reports the problem infeasible", backend.id())],
            })
        }
        SolveStatus::Timeout if !solution.has_values() => {
            return Err(PipelineError::Timeout { elapsed: solution.solve_time })
        }
        SolveStatus::Unbounded | SolveStatus::Error => {
            return Err(PipelineError::at(Stage::Solve)(format!(
                "{} returned {}{}",
                backend.id(),
                solution.status,
                solution.message.as_deref().map(|m| format!(": {m}")).unwrap_or_default()
            )))
        }
        _ => {}
    }

    let result = extract_plan(
        &solution,
        &assembled,
        &scenario.spec,
        &scenario.fleet,
        &scenario.models,
        &groups,
        &scenario.encoding,
    )
    .map_err(|e| match e {
        ExtractError::VerificationFailure(r) => PipelineError::Verification(r),
        other => PipelineError::at(Stage::Extract)(other.to_string()),
    })?;
    lap(&mut stages, Stage::Extract);

    let csv = write_traces(&scenario.fleet, &scenario.models, &result.trajectories, &result.controls)
        .map_err(fail(Stage::Emit))?;
    files.push(write(out, "traces.csv", &csv)?);
    let svg = render_svg(&scenario.regions, &result.trajectories, &scenario.name);
    files.push(write(out, "plot.svg", &svg)?);
    lap(&mut stages, Stage::Emit);

    let timing = Timing { solve: solution.solve_time, total: total.elapsed().as_secs_f64(), stages };
    let report = PlanReport::new(scenario, backend.id(), &result, &assembled.stats.counts, timing);
    let json = serde_json::to_string_pretty(&report).map_err(fail(Stage::Emit))?;
    files.push(write(out, "report.json", &(json + "\n"))?);
    files.push(write(out, "summary.txt", &summary_text(&report))?);
    Ok(PlanOutput { result, report, files })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, PipelineError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| PipelineError::at(Stage::Emit)(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Monitors a trajectory table against the scenario. No solver is involved.
pub fn run_verify(scenario: &Scenario, traces: &str) -> Result<MonitorReport, PipelineError> {
    let team = read_traces(traces, &scenario.fleet, &scenario.models).map_err(fail(Stage::Verify))?;
    let groups = enumerate_spec(&scenario.spec, &scenario.fleet, scenario.group_cap)
        .map_err(|(task, e)| PipelineError::at(Stage::Groups)(format!("{task}: {e}")))?;
    monitor(&scenario.spec, &team, &groups, 0).map_err(fail(Stage::Verify))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InspectReport {
    pub scenario: String,
    pub horizon: usize,
    pub counts: ModelCounts,
    pub state_vars: usize,
    pub control_vars: usize,
    pub indicator_vars: usize,
    pub tasks: Vec<TaskBudget>,
    pub big_m: BigMSummary,
    pub audit: Vec<String>,
}

/// Model statistics without solving.
pub fn run_inspect(scenario: &Scenario) -> Result<InspectReport, PipelineError> {
    let groups = scenario.groups()?;
    let a = scenario.assemble(&groups)?;
    let s = a.stats;
    Ok(InspectReport {
        scenario: scenario.name.clone(),
        horizon: scenario.horizon,
        counts: s.counts,
        state_vars: s.state_vars,
        control_vars: s.control_vars,
        indicator_vars: s.indicator_vars,
        tasks: s.tasks,
        big_m: s.big_m,
        audit: s.audit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares line through `(x, y)`. A fit with no residual has `r2 = 1`
/// even when `y` is constant.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_res <= 1e-12 * ss_tot.max(1.0) { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit { slope, intercept, r2 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub horizon: usize,
    pub variables: usize,
    pub binaries: usize,
    pub constraints: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    /// Binary count against horizon.
    pub binaries: Option<LinearFit>,
    pub variables: Option<LinearFit>,
    pub constraints: Option<LinearFit>,
}

/// Builds the model at each horizon and fits each count against `H`.
pub fn sweep_horizon(scenario: &Scenario, horizons: &[usize]) -> Result<Sweep, PipelineError> {
    let points = par::map(horizons, |&h| {
        let r = run_inspect(&scenario.clone().with_horizon(h))?;
        Ok(SweepPoint {
            horizon: h,
            variables: r.counts.variables,
            binaries: r.counts.binaries,
            constraints: r.counts.constraints,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, PipelineError>>()?;
    let fit = |f: fn(&SweepPoint) -> usize| {
        linear_fit(&points.iter().map(|p| (p.horizon as f64, f(p) as f64)).collect::<Vec<_>>())
    };
    Ok(Sweep {
        binaries: fit(|p| p.binaries),
        variables: fit(|p| p.variables),
        constraints: fit(|p| p.constraints),
        points,
    })
}
