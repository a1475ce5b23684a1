use std::collections::HashMap;
use std::fs;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::lp::{export_model, ModelFormat};
use super::solution::{parse_solution, SolutionFormat};
use super::{Backend, Solution, SolveOptions, SolveStatus, SolverConfig, SolverError};
use crate::milp::MilpModel;

/// Command templates for solvers with a known command line. `{solver}` is
/// the executable, overridable by `GSTL_SOLVER_PATH`.
pub const KNOWN_COMMANDS: &[(&str, &str, &str, SolutionFormat)] = &[
    ("cbc", "cbc", "{solver} {model_path} sec {time_limit} solve solu {solution_path}", SolutionFormat::Cbc),
    (
        "highs-cli",
        "highs",
        "{solver} --model_file {model_path} --time_limit {time_limit} --solution_file {solution_path}",
        SolutionFormat::Highs,
    ),
    (
        "gurobi",
        "gurobi_cl",
        "{solver} TimeLimit={time_limit} ResultFile={solution_path} {model_path}",
        SolutionFormat::Sol,
    ),
    (
        "cplex",
        "cplex",
        "{solver} -c \"read {model_path}\" \"set timelimit {time_limit}\" mipopt \"write {solution_path}\" quit",
        SolutionFormat::CplexXml,
    ),
];

/// Large enough to mean "no limit" for every solver above.
const NO_TIME_LIMIT: &str = "100000000";

/// Runs an external solver through a command template with the slots
/// `{model_path}`, `{solution_path}`, `{time_limit}`, `{solver}`,
/// `{threads}`, `{seed}` and `{gap}`.
#[derive(Debug, Clone)]
pub struct CommandBackend {
    id: String,
    template: String,
    executable: String,
    format: SolutionFormat,
    model_format: ModelFormat,
}

impl CommandBackend {
    pub fn new(template: impl Into<String>, format: SolutionFormat) -> Self {
        CommandBackend {
            id: "command".into(),
            template: template.into(),
            executable: String::new(),
            format,
            model_format: ModelFormat::Lp,
        }
    }

    pub fn with_model_format(mut self, f: ModelFormat) -> Self {
        self.model_format = f;
        self
    }

    pub fn from_config(config: &SolverConfig) -> Result<Self, SolverError> {
        let known = KNOWN_COMMANDS.iter().find(|(id, ..)| *id == config.id);
        let (template, default_exe, default_format) = match (&config.command, known) {
            (Some(t), k) => (t.clone(), k.map_or("", |k| k.1), k.map_or(SolutionFormat::Plain, |k| k.3)),
            (None, Some((_, exe, t, f))) => (t.to_string(), *exe, *f),
            (None, None) => {
                let known: Vec<&str> = KNOWN_COMMANDS.iter().map(|k| k.0).collect();
                return Err(SolverError::NotFound(format!(
                    "{:?} is not a known solver (highs, {}); set a command template for others",
                    config.id,
                    known.join(", ")
                )));
            }
        };
        Ok(CommandBackend {
            id: config.id.clone(),
            template,
            executable: config.executable.clone().unwrap_or_else(|| default_exe.to_string()),
            format: config.solution_format.unwrap_or(default_format),
            model_format: ModelFormat::Lp,
        })
    }

    /// The argument vector for one run.
    pub fn argv(&self, slots: &HashMap<&str, String>) -> Result<Vec<String>, SolverError> {
        let words = shlex::split(&self.template)
            .ok_or_else(|| SolverError::Malformed(format!("unbalanced quotes in template {:?}", self.template)))?;
        if words.is_empty() {
            return Err(SolverError::NotFound("empty solver command".into()));
        }
        Ok(words
            .into_iter()
            .map(|w| slots.iter().fold(w, |acc, (k, v)| acc.replace(&format!("{{{k}}}"), v)))
            .collect())
    }
}

fn tail(text: &str, n: usize) -> String {
    let lines: Vec<&str> = text.lines().collect();
    lines[lines.len().saturating_sub(n)..].join("\n")
}

impl Backend for CommandBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn solve(&self, model: &MilpModel, options: &SolveOptions) -> Result<Solution, SolverError> {
        let dir = tempfile::tempdir()?;
        let model_path = dir.path().join(format!("model.{}", self.model_format.extension()));
        let solution_path = dir.path().join(format!("solution.{}", self.format.extension()));
        fs::write(&model_path, export_model(model, self.model_format)?)?;
        let slots: HashMap<&str, String> = [
            ("model_path", model_path.display().to_string()),
            ("solution_path", solution_path.display().to_string()),
            ("time_limit", options.time_limit.map_or(NO_TIME_LIMIT.to_string(), |t| format!("{t}"))),
            ("solver", self.executable.clone()),
            ("threads", options.threads.unwrap_or(1).to_string()),
            ("seed", options.seed.unwrap_or(0).to_string()),
            ("gap", options.gap.unwrap_or(1e-4).to_string()),
        ]
        .into();
        let argv = self.argv(&slots)?;
        log::debug!("running {argv:?}");
        let start = Instant::now();
        let stdout_path = dir.path().join("stdout.log");
        let stderr_path = dir.path().join("stderr.log");
        let mut child = match Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .stdout(fs::File::create(&stdout_path)?)
            .stderr(fs::File::create(&stderr_path)?)
            .spawn()
        {
            Ok(c) => c,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(SolverError::NotFound(argv[0].clone())),
            Err(e) => return Err(e.into()),
        };
        // The solver enforces its own limit; this only guards against hangs.
        let deadline = options.time_limit.map(|t| Duration::from_secs_f64(t * 2.0 + 30.0));
        let exit = loop {
            if let Some(status) = child.try_wait()? {
                break Some(status);
            }
            if deadline.is_some_and(|d| start.elapsed() > d) {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            std::thread::sleep(Duration::from_millis(20));
        };
        let elapsed = start.elapsed().as_secs_f64();
        let Some(exit) = exit else {
            return Ok(Solution::without_values(SolveStatus::Timeout, elapsed, Some("solver process killed after deadline".into())));
        };
        if !solution_path.exists() {
            let err = fs::read_to_string(&stderr_path).unwrap_or_default();
            let out = fs::read_to_string(&stdout_path).unwrap_or_default();
            let msg = format!("{} exited with {exit} and wrote no solution\n{}", argv[0], tail(&format!("{out}\n{err}"), 20));
            return if exit.success() {
                Err(SolverError::Malformed(msg))
            } else {
                Ok(Solution::without_values(SolveStatus::Error, elapsed, Some(msg)))
            };
        }
        let parsed = parse_solution(&fs::read_to_string(&solution_path)?, self.format)?;
        let status = parsed.status.unwrap_or(if parsed.values.is_empty() { SolveStatus::Error } else { SolveStatus::Feasible });
        let carries_values = matches!(status, SolveStatus::Optimal | SolveStatus::Feasible | SolveStatus::Timeout);
        if !carries_values || parsed.values.is_empty() {
            return Ok(Solution::without_values(status, elapsed, None));
        }
        // Several solvers omit zero-valued columns, so absent names read as 0.
        let mut values = vec![0.0; model.variables().len()];
        for (name, v) in &parsed.values {
            let id = model
                .id(name)
                .ok_or_else(|| SolverError::Malformed(format!("solution names unknown variable {name:?}")))?;
            values[id.0] = *v;
        }
        let gap = (status == SolveStatus::Optimal).then_some(0.0);
        Ok(Solution::with_values(model, status, values, gap, elapsed, options.integrality_tolerance))
    }
}
