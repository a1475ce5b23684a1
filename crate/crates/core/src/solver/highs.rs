use std::ffi::CString;
use std::time::Instant;

use highs::{ColProblem, Row, Sense};
use highs_sys as sys;

use super::{Backend, Solution, SolveOptions, SolveStatus, SolverError};
use crate::milp::{MilpModel, RowSense, VarKind};

/// Links HiGHS in-process.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

fn int_info(ptr: *const std::ffi::c_void, name: &str) -> Option<i32> {
    let key = CString::new(name).ok()?;
    let mut out: sys::HighsInt = 0;
    let status = unsafe { sys::Highs_getIntInfoValue(ptr, key.as_ptr(), &mut out) };
    (status == sys::STATUS_OK).then_some(out as i32)
}

fn double_info(ptr: *const std::ffi::c_void, name: &str) -> Option<f64> {
    let key = CString::new(name).ok()?;
    let mut out = 0.0;
    let status = unsafe { sys::Highs_getDoubleInfoValue(ptr, key.as_ptr(), &mut out) };
    (status == sys::STATUS_OK).then_some(out)
}

impl Backend for HighsBackend {
    fn id(&self) -> &str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, options: &SolveOptions) -> Result<Solution, SolverError> {
        model.check().map_err(SolverError::Model)?;
        if !model.quadratic().is_empty() {
            return Err(SolverError::Unsupported(
                "the in-process HiGHS backend solves linear objectives only; use --effort-norm l1 or a command solver".into(),
            ));
        }
        let start = Instant::now();
        let n = model.variables().len();
        if n == 0 {
            return Ok(Solution::with_values(model, SolveStatus::Optimal, vec![], Some(0.0), 0.0, options.integrality_tolerance));
        }
        let mut pb = ColProblem::default();
        let mut columns: Vec<Vec<(Row, f64)>> = vec![Vec::new(); n];
        for r in model.constraints() {
            let row = match r.sense {
                RowSense::Le => pb.add_row(f64::NEG_INFINITY..=r.rhs),
                RowSense::Ge => pb.add_row(r.rhs..=f64::INFINITY),
                RowSense::Eq => pb.add_row(r.rhs..=r.rhs),
            };
            for (v, c) in &r.terms {
                columns[v.0].push((row, *c));
            }
        }
        let mut obj = vec![0.0; n];
        for (v, c) in model.objective().terms() {
            obj[v.0] = c;
        }
        let any_integer = model.variables().iter().any(|v| v.kind != VarKind::Continuous);
        for ((v, col), c) in model.variables().iter().zip(&columns).zip(&obj) {
            pb.add_column_with_integrality(*c, v.lb..=v.ub, col, v.kind != VarKind::Continuous);
        }
        let mut hm = pb
            .try_optimise(Sense::Maximise)
            .map_err(|s| SolverError::Malformed(format!("HiGHS rejected the model: {s:?}")))?;
        if !options.verbose {
            hm.make_quiet();
        }
        if let Some(t) = options.time_limit {
            hm.set_option("time_limit", t);
        }
        if let Some(g) = options.gap {
            hm.set_option("mip_rel_gap", g);
        }
        if let Some(t) = options.threads {
            hm.set_option("threads", t as i32);
        }
        if let Some(s) = options.seed {
            hm.set_option("random_seed", (s % i32::MAX as u64) as i32);
        }
        let solved = hm
            .try_solve()
            .map_err(|s| SolverError::Malformed(format!("HiGHS run failed: {s:?}")))?;
        let elapsed = start.elapsed().as_secs_f64();
        let ptr = solved.as_ptr();
        let raw_status = unsafe { sys::Highs_getModelStatus(ptr) };
        let has_primal = int_info(ptr, "primal_solution_status") == Some(sys::SOLUTION_STATUS_FEASIBLE as i32);
        let gap = if any_integer {
            double_info(ptr, "mip_gap").filter(|g| g.is_finite())
        } else {
            Some(0.0)
        };
        let status = match raw_status {
            sys::MODEL_STATUS_OPTIMAL => SolveStatus::Optimal,
            sys::MODEL_STATUS_INFEASIBLE | sys::MODEL_STATUS_UNBOUNDED_OR_INFEASIBLE => SolveStatus::Infeasible,
            sys::MODEL_STATUS_UNBOUNDED => SolveStatus::Unbounded,
            sys::MODEL_STATUS_REACHED_TIME_LIMIT => SolveStatus::Timeout,
            _ if has_primal => SolveStatus::Feasible,
            other => {
                return Ok(Solution::without_values(
                    SolveStatus::Error,
                    elapsed,
                    Some(format!("HiGHS model status {other}")),
                ))
            }
        };
        if matches!(status, SolveStatus::Infeasible | SolveStatus::Unbounded) || !has_primal {
            return Ok(Solution::without_values(status, elapsed, None));
        }
        let values = solved.get_solution().columns().to_vec();
        let mut s = Solution::with_values(model, status, values, gap, elapsed, options.integrality_tolerance);
        if s.status == SolveStatus::Optimal && s.gap.is_none() {
            s.gap = Some(0.0);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::LinExpr;

    #[test]
    fn bounded_maximum() {
        let mut m = MilpModel::new();
        let x = m.continuous("x", 0.0, f64::INFINITY).unwrap();
        m.le(x, 3.0).unwrap();
        m.set_objective(x.into());
        let s = HighsBackend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.value(x).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_toy() {
        let mut m = MilpModel::new();
        let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.ge(x, 1.0).unwrap();
        m.le(x, 0.0).unwrap();
        m.set_objective(x.into());
        let s = HighsBackend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(!s.has_values());
    }

    #[test]
    fn integer_program() {
        let mut m = MilpModel::new();
        let a = m.binary("a").unwrap();
        let b = m.binary("b").unwrap();
        let z = m.add_var("z", VarKind::Integer, 0.0, 10.0).unwrap();
        m.le(LinExpr::var(a) + b.into(), 1.0).unwrap();
        m.le(LinExpr::term(z, 2.0), 7.0).unwrap();
        m.set_objective(LinExpr::term(a, 2.0) + LinExpr::term(b, 3.0) + z.into());
        let s = HighsBackend.solve(&m, &SolveOptions { seed: Some(1), threads: Some(1), ..Default::default() }).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.values, Some(vec![0.0, 1.0, 3.0]));
        assert_eq!(s.objective, Some(6.0));
    }

    #[test]
    fn quadratic_is_refused() {
        let mut m = MilpModel::new();
        let x = m.continuous("x", 0.0, 1.0).unwrap();
        m.add_quadratic(x, x, -1.0);
        assert!(matches!(HighsBackend.solve(&m, &SolveOptions::default()), Err(SolverError::Unsupported(_))));
    }
}
