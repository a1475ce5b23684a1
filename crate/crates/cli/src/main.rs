use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use gstl::milp::EffortNorm;
use gstl::pipeline::{monitor_text, run_inspect, run_plan, run_verify, sweep_horizon, PipelineError, Scenario};

#[derive(Parser)]
#[command(name = "gstl", version, about = "Plan, verify and inspect multi-agent STL missions")]
struct Cli {
    /// Log level filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write traces, report, model and plot.
    Plan {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `highs` (in-process), a known command solver, or any id with
        /// `GSTL_SOLVER_CMD` set.
        #[arg(long)]
        solver: Option<String>,
        #[arg(long, value_name = "S")]
        time_limit: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<u32>,
        #[arg(long, value_name = "l1|l2")]
        effort_norm: Option<EffortNorm>,
    },
    /// Check a trajectory table against a scenario without solving.
    Verify {
        scenario: PathBuf,
        #[arg(long)]
        traces: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Report model statistics without solving.
    Inspect {
        scenario: PathBuf,
        /// Build the model for every horizon in `A:B[:STEP]` and fit counts against H.
        #[arg(long, value_name = "A:B[:S]")]
        sweep_horizon: Option<String>,
    },
}

fn parse_range(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad horizon range {s:?}")))
        .collect::<Result<_>>()?;
    let (a, b, step) = match parts.as_slice() {
        [a, b] => (*a, *b, 1),
        [a, b, st] => (*a, *b, *st),
        _ => bail!("expected A:B or A:B:STEP, got {s:?}"),
    };
    if step == 0 || a > b {
        bail!("empty horizon range {s:?}");
    }
    Ok((a..=b).step_by(step).collect())
}

fn pipeline(e: PipelineError) -> (anyhow::Error, u8) {
    let code = e.exit_code() as u8;
    (anyhow!(e), code)
}

fn run(cli: Cli) -> Result<u8, (anyhow::Error, u8)> {
    match cli.command {
        Command::Plan { scenario, out, solver, time_limit, seed, threads, effort_norm } => {
            let mut s = Scenario::load(&scenario).map_err(pipeline)?;
            if let Some(o) = out {
                s.out_dir = o;
            }
            if let Some(id) = solver {
                s.solver.id = id;
            }
            if time_limit.is_some() {
                s.options.time_limit = time_limit;
            }
            if seed.is_some() {
                s.options.seed = seed;
            }
            if threads.is_some() {
                s.options.threads = threads;
            }
            if let Some(n) = effort_norm {
                s.encoding.effort_norm = n;
            }
            let out = run_plan(&s).map_err(pipeline)?;
            print!("{}", std::fs::read_to_string(s.out_dir.join("summary.txt")).unwrap_or_default());
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if let Some(g) = out.result.gap.filter(|_| out.exit_code() != 0) {
                println!("time limit reached; incumbent gap {:.4}%", g * 100.0);
            }
            Ok(out.exit_code() as u8)
        }
        Command::Verify { scenario, traces, json } => {
            let s = Scenario::load(&scenario).map_err(pipeline)?;
            let text = std::fs::read_to_string(&traces)
                .with_context(|| format!("reading {}", traces.display()))
                .map_err(|e| (e, 1))?;
            let report = run_verify(&s, &text).map_err(pipeline)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(|e| (e.into(), 1))?);
            } else {
                print!("{}", monitor_text(&report));
            }
            Ok(if report.satisfied { 0 } else { 2 })
        }
        Command::Inspect { scenario, sweep_horizon: sweep } => {
            let s = Scenario::load(&scenario).map_err(pipeline)?;
            let value = match sweep {
                Some(r) => {
                    let hs = parse_range(&r).map_err(|e| (e, 1))?;
                    serde_json::to_value(sweep_horizon(&s, &hs).map_err(pipeline)?)
                }
                None => serde_json::to_value(run_inspect(&s).map_err(pipeline)?),
            }
            .map_err(|e| (e.into(), 1))?;
            println!("{}", serde_json::to_string_pretty(&value).map_err(|e| (e.into(), 1))?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).format_timestamp(None).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((e, code)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
