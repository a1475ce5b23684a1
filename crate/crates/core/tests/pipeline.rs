use gstl::pipeline::{run_inspect, run_plan, run_verify, PipelineError, Scenario, Stage};
use gstl::solver::SolveStatus;
use gstl::Robustness;

const PAIR: &str = r#"
name = "pair"
horizon = 5

[weights]
beta = 0.05

[solver]
threads = 1
seed = 1

[fleet]
capabilities = ["V"]
agents = [
  { id = 1, capabilities = ["V"], model = "scalar_integrator", x0 = [0.0] },
  { id = 2, capabilities = ["V"], model = "scalar_integrator", x0 = [3.0] },
]

[[tasks]]
name = "high"
kind = "sync"
window = [0, 2]
hold = 1
formula = { op = "pred", terms = [{ slot = 1, component = 0, coeff = 1.0 }], offset = -1.5 }

[[tasks]]
name = "col"
kind = "task"
for_each = "pair"
formula = { op = "globally", interval = [0, 5], arg = { op = "or", args = [
  { op = "pred", terms = [{ slot = 1, component = 0, coeff = 1.0 }, { slot = 2, component = 0, coeff = -1.0 }], offset = -0.5 },
  { op = "pred", terms = [{ slot = 1, component = 0, coeff = -1.0 }, { slot = 2, component = 0, coeff = 1.0 }], offset = -0.5 },
] } }
"#;

fn scenario(text: &str, dir: &tempfile::TempDir) -> Scenario {
    let mut s = Scenario::parse(text, "test").unwrap();
    s.out_dir = dir.path().to_path_buf();
    s
}

#[test]
fn plan_and_verify_agree() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(PAIR, &dir);
    let out = run_plan(&s).unwrap();
    assert_eq!(out.result.status, SolveStatus::Optimal);
    assert!(out.result.verdict.satisfied);
    for f in ["model.lp", "traces.csv", "plot.svg", "report.json", "summary.txt"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let traces = std::fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    let report = run_verify(&s, &traces).unwrap();
    assert_eq!(report, out.result.verdict);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["verified"], true);
}

/// Moves agent 2 onto agent 1 at step `k` in a trajectory table.
fn collide(traces: &str, k: usize) -> String {
    let rows: Vec<Vec<String>> = traces.lines().map(|l| l.split(',').map(str::to_string).collect()).collect();
    let x1 = rows.iter().find(|r| r[0] == "1" && r[1] == k.to_string()).unwrap()[2].clone();
    rows.into_iter()
        .map(|mut r| {
            if r[0] == "2" && r[1] == k.to_string() {
                r[2] = x1.clone();
            }
            r.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn collision_is_reported_with_pair_and_step() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(PAIR, &dir);
    run_plan(&s).unwrap();
    let traces = std::fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    let report = run_verify(&s, &collide(&traces, 3)).unwrap();
    assert!(!report.satisfied);
    let failed: Vec<_> = report.failed_tasks().collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].name, "col[1,2]");
    assert_eq!(failed[0].violations, vec![3]);
    assert!(failed[0].agents.as_deref().unwrap().contains('1'));
    assert!(failed[0].agents.as_deref().unwrap().contains('2'));
}

#[test]
fn zero_cap_pins_robustness_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text = PAIR.replace("beta = 0.05", "beta = 0.05\ngamma = { high = 0 }");
    let out = run_plan(&scenario(&text, &dir)).unwrap();
    assert_eq!(out.result.rho_solver.map(f64::round), Some(0.0));
    assert!(out.result.verdict.satisfied);
    assert!(out.result.rho.value().is_some_and(|v| v >= 0));
}

#[test]
fn uncapped_robustness_is_maximal() {
    // Agent 2 starts above 1.5 and can stay there: a run of 6 from k = 0,
    // minus the hold of 1.
    let dir = tempfile::tempdir().unwrap();
    let out = run_plan(&scenario(PAIR, &dir)).unwrap();
    assert_eq!(out.result.rho, Robustness::Value(5));
}

#[test]
fn empty_spec_has_no_binaries() {
    let dir = tempfile::tempdir().unwrap();
    let text = &PAIR[..PAIR.find("[[tasks]]").unwrap()];
    let s = scenario(text, &dir);
    let report = run_inspect(&s).unwrap();
    assert_eq!(report.counts.binaries, 0);
    assert_eq!(report.indicator_vars, 0);
    let out = run_plan(&s).unwrap();
    assert_eq!(out.result.rho, Robustness::NotApplicable);
    assert!(out.result.verdict.satisfied);
}

#[test]
fn unreachable_spec_is_unsat() {
    let dir = tempfile::tempdir().unwrap();
    let text = PAIR.replace("offset = -1.5", "offset = -9.5");
    let e = run_plan(&scenario(&text, &dir)).unwrap_err();
    assert!(matches!(e, PipelineError::Unsat { stage: Stage::Solve, .. }), "{e}");
    assert_eq!(e.exit_code(), 2);
}
