//! Qualitative semantics and synchronous robustness evaluated directly on
//! concrete trajectories. This is the reference the MILP encoding is checked
//! against, so it shares no code with it.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{TeamTrajectory, Trajectory};
use crate::groups::{AgentGroup, GroupSet, SpecGroups};
use crate::par::{self, Execution};
use crate::spec::{AgentId, Formula, GlobalSpec, Horizon, LinearPredicate, SyncTask, Task};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("evaluation needs {needed} steps but the trajectory ends at {available}")]
    Horizon { needed: usize, available: usize },
    #[error("agent {0} has no trajectory")]
    MissingAgent(AgentId),
    #[error("spec has {spec} tasks but {groups} group sets were supplied")]
    GroupMismatch { spec: usize, groups: usize },
}

type Result<T> = std::result::Result<T, OracleError>;

/// Synchronous robustness value. `Unsat` means the defining constraint
/// (duration ≥ hold) fails for every group; `NotApplicable` is the `+∞`
/// returned for a spec with no synchronous tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Robustness {
    Value(i64),
    Unsat,
    NotApplicable,
}

impl Robustness {
    pub fn value(self) -> Option<i64> {
        match self {
            Robustness::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_unsat(self) -> bool {
        self == Robustness::Unsat
    }

    /// `Unsat < Value(_) < NotApplicable`.
    fn rank(self) -> (u8, i64) {
        match self {
            Robustness::Unsat => (0, 0),
            Robustness::Value(v) => (1, v),
            Robustness::NotApplicable => (2, 0),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.rank() <= other.rank() {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Robustness {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.rank().cmp(&other.rank()))
    }
}

impl fmt::Display for Robustness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Robustness::Value(v) => write!(f, "{v}"),
            Robustness::Unsat => f.write_str("UNSAT"),
            Robustness::NotApplicable => f.write_str("n/a"),
        }
    }
}

pub fn eval_predicate(pred: &LinearPredicate, states: &[&[f64]]) -> Result<f64> {
    let mut acc = pred.offset();
    for (r, c) in pred.coeffs() {
        let x = states
            .get(r.slot - 1)
            .ok_or_else(|| OracleError::Dimension(format!("slot {} unbound ({} given)", r.slot, states.len())))?;
        let v = x.get(r.component).ok_or_else(|| {
            OracleError::Dimension(format!("component {} of slot {} (state has {})", r.component, r.slot, x.len()))
        })?;
        acc += c * v;
    }
    Ok(acc)
}

fn available(element: &[&Trajectory]) -> usize {
    element.iter().map(|t| t.horizon()).min().unwrap_or(0)
}

fn check_horizon(needed: usize, element: &[&Trajectory]) -> Result<()> {
    let available = available(element);
    if needed > available {
        return Err(OracleError::Horizon { needed, available });
    }
    Ok(())
}

/// `(ξ, k) ⊨ f` for the element whose slot `n` is bound to `element[n-1]`.
pub fn sat_inner(f: &Formula, element: &[&Trajectory], k: usize) -> Result<bool> {
    check_horizon(k + f.horizon(), element)?;
    if element.len() < f.slot_count() {
        return Err(OracleError::Dimension(format!(
            "formula uses {} slots, element has {}",
            f.slot_count(),
            element.len()
        )));
    }
    eval(f, element, k)
}

fn eval(f: &Formula, element: &[&Trajectory], k: usize) -> Result<bool> {
    Ok(match f {
        Formula::Pred(p) => {
            let states: Vec<&[f64]> = element.iter().map(|t| t.state(k).unwrap()).collect();
            eval_predicate(p, &states)? >= 0.0
        }
        Formula::Not(c) => !eval(c, element, k)?,
        Formula::And(cs) => {
            for c in cs {
                if !eval(c, element, k)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(cs) => {
            for c in cs {
                if eval(c, element, k)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Globally(i, c) => {
            for t in i.steps() {
                if !eval(c, element, k + t)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Finally(i, c) => {
            for t in i.steps() {
                if eval(c, element, k + t)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Until(i, l, r) => {
            // ∃k' ∈ [k+a, k+b]: r at k' and l on every step of [k, k'].
            for kp in k + i.lo()..=k + i.hi() {
                if eval(r, element, kp)? {
                    let mut held = true;
                    for kpp in k..=kp {
                        if !eval(l, element, kpp)? {
                            held = false;
                            break;
                        }
                    }
                    if held {
                        return Ok(true);
                    }
                }
            }
            false
        }
    })
}

fn element_trajectories<'a>(team: &'a TeamTrajectory, element: &[AgentId]) -> Result<Vec<&'a Trajectory>> {
    element
        .iter()
        .map(|&p| team.agent(p).ok_or(OracleError::MissingAgent(p)))
        .collect()
}

fn group_satisfies(f: &Formula, team: &TeamTrajectory, group: &AgentGroup, k: usize) -> Result<bool> {
    for element in group.elements() {
        if !sat_inner(f, &element_trajectories(team, element)?, k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TaskVerdict {
    pub satisfied: bool,
    /// First satisfying group in canonical order.
    pub witness: Option<usize>,
}

pub fn sat_task(task: &Task, team: &TeamTrajectory, groups: &GroupSet, k: usize) -> Result<TaskVerdict> {
    let results = par::map(groups.groups(), |g| group_satisfies(&task.formula, team, g, k));
    let mut witness = None;
    for (j, r) in results.into_iter().enumerate() {
        if r? && witness.is_none() {
            witness = Some(j);
        }
    }
    Ok(TaskVerdict {
        satisfied: witness.is_some(),
        witness,
    })
}

/// Start and length of a group's longest common satisfaction run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SyncWindow {
    pub start: usize,
    pub duration: usize,
}

/// Longest run of `true` starting at some `s ∈ starts`; runs may extend past
/// the end of `starts`. Earliest start wins ties.
pub fn window_scan(q: &[bool], starts: std::ops::RangeInclusive<usize>) -> SyncWindow {
    let first = *starts.start();
    let mut best = SyncWindow {
        start: first,
        duration: 0,
    };
    for s in starts {
        let run = q.iter().skip(s).take_while(|&&b| b).count();
        if run > best.duration {
            best = SyncWindow { start: s, duration: run };
        }
    }
    best
}

/// `q(k') = 1` iff every element of the group satisfies `φ` at `k'`, for
/// `k' ∈ [k+a, H - horizon(φ)]`; entries before `k+a` are `false`.
pub fn sync_indicator(task: &SyncTask, team: &TeamTrajectory, group: &AgentGroup, k: usize) -> Result<Vec<bool>> {
    let h = team.horizon();
    let first = k + task.window.lo();
    check_horizon_team(k + task.horizon(), h)?;
    let last = h - task.formula.horizon();
    let mut q = vec![false; last + 1];
    for (kp, slot) in q.iter_mut().enumerate().skip(first) {
        *slot = group_satisfies(&task.formula, team, group, kp)?;
    }
    Ok(q)
}

fn check_horizon_team(needed: usize, available: usize) -> Result<()> {
    if needed > available {
        Err(OracleError::Horizon { needed, available })
    } else {
        Ok(())
    }
}

pub fn sync_window(task: &SyncTask, team: &TeamTrajectory, group: &AgentGroup, k: usize) -> Result<SyncWindow> {
    let q = sync_indicator(task, team, group, k)?;
    Ok(window_scan(&q, k + task.window.lo()..=k + task.window.hi()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SyncVerdict {
    pub robustness: Robustness,
    /// Group with the longest run (lowest index on ties).
    pub witness: usize,
    pub window: SyncWindow,
}

pub fn sync_verdict(task: &SyncTask, team: &TeamTrajectory, groups: &GroupSet, k: usize) -> Result<SyncVerdict> {
    let windows = par::map(groups.groups(), |g| sync_window(task, team, g, k));
    let mut best: Option<(usize, SyncWindow)> = None;
    for (j, w) in windows.into_iter().enumerate() {
        let w = w?;
        if best.is_none_or(|(_, b)| w.duration > b.duration) {
            best = Some((j, w));
        }
    }
    let (witness, window) = best.ok_or(OracleError::GroupMismatch { spec: 1, groups: 0 })?;
    let rho = window.duration as i64 - task.hold as i64;
    Ok(SyncVerdict {
        robustness: if rho >= 0 { Robustness::Value(rho) } else { Robustness::Unsat },
        witness,
        window,
    })
}

/// `ρ_s(S, T_s, k) = max_j duration_j - d`, or `Unsat` when negative.
pub fn rho_sync(task: &SyncTask, team: &TeamTrajectory, groups: &GroupSet, k: usize) -> Result<Robustness> {
    sync_verdict(task, team, groups, k).map(|v| v.robustness)
}

fn check_groups(spec: &GlobalSpec, groups: &SpecGroups) -> Result<()> {
    if spec.tasks.len() != groups.tasks.len() || spec.sync_tasks.len() != groups.sync_tasks.len() {
        return Err(OracleError::GroupMismatch {
            spec: spec.tasks.len() + spec.sync_tasks.len(),
            groups: groups.tasks.len() + groups.sync_tasks.len(),
        });
    }
    Ok(())
}

/// Minimum over the synchronous tasks; `NotApplicable` when there are none.
pub fn rho_sync_global(spec: &GlobalSpec, team: &TeamTrajectory, groups: &SpecGroups, k: usize) -> Result<Robustness> {
    check_groups(spec, groups)?;
    let mut acc = Robustness::NotApplicable;
    for (t, g) in spec.sync_tasks.iter().zip(&groups.sync_tasks) {
        acc = acc.min(rho_sync(t, team, g, k)?);
    }
    Ok(acc)
}

/// Every general task holds and every synchronous robustness is defined.
pub fn sat_global(spec: &GlobalSpec, team: &TeamTrajectory, groups: &SpecGroups, k: usize) -> Result<bool> {
    check_groups(spec, groups)?;
    for (t, g) in spec.tasks.iter().zip(&groups.tasks) {
        if !sat_task(t, team, g, k)?.satisfied {
            return Ok(false);
        }
    }
    Ok(!rho_sync_global(spec, team, groups, k)?.is_unsat())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub name: String,
    pub satisfied: bool,
    pub witness: Option<String>,
    /// For failed single-group tasks rooted at `G`, the steps where the body fails.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agents: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncReport {
    pub name: String,
    pub robustness: Robustness,
    pub witness: String,
    pub window_start: usize,
    pub duration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub satisfied: bool,
    pub rho: Robustness,
    pub tasks: Vec<TaskReport>,
    pub sync_tasks: Vec<SyncReport>,
}

impl MonitorReport {
    pub fn failed_tasks(&self) -> impl Iterator<Item = &TaskReport> {
        self.tasks.iter().filter(|t| !t.satisfied)
    }
}

fn globally_violations(task: &Task, team: &TeamTrajectory, groups: &GroupSet, k: usize) -> Result<(Vec<usize>, Option<String>)> {
    let (Formula::Globally(i, body), [group]) = (&task.formula, groups.groups()) else {
        return Ok((vec![], None));
    };
    let mut steps = Vec::new();
    for element in group.elements() {
        let trajs = element_trajectories(team, element)?;
        for t in i.steps() {
            if !sat_inner(body, &trajs, k + t)? {
                steps.push(k + t);
            }
        }
    }
    steps.sort_unstable();
    steps.dedup();
    Ok((steps, Some(group.to_string())))
}

/// Full per-task breakdown of the global verdict.
pub fn monitor(spec: &GlobalSpec, team: &TeamTrajectory, groups: &SpecGroups, k: usize) -> Result<MonitorReport> {
    check_groups(spec, groups)?;
    let mut tasks = Vec::new();
    for (t, g) in spec.tasks.iter().zip(&groups.tasks) {
        let v = sat_task(t, team, g, k)?;
        let (violations, agents) = if v.satisfied {
            (vec![], None)
        } else {
            globally_violations(t, team, g, k)?
        };
        tasks.push(TaskReport {
            name: t.name.clone(),
            satisfied: v.satisfied,
            witness: v.witness.map(|j| g.groups()[j].to_string()),
            violations,
            agents,
        });
    }
    let mut sync_tasks = Vec::new();
    let mut rho = Robustness::NotApplicable;
    for (t, g) in spec.sync_tasks.iter().zip(&groups.sync_tasks) {
        let v = sync_verdict(t, team, g, k)?;
        rho = rho.min(v.robustness);
        sync_tasks.push(SyncReport {
            name: t.name.clone(),
            robustness: v.robustness,
            witness: g.groups()[v.witness].to_string(),
            window_start: v.window.start,
            duration: v.window.duration,
        });
    }
    Ok(MonitorReport {
        satisfied: tasks.iter().all(|t| t.satisfied) && !rho.is_unsat(),
        rho,
        tasks,
        sync_tasks,
    })
}

/// Global verdict and robustness for many team trajectories.
pub fn verify_batch(
    exec: Execution,
    spec: &GlobalSpec,
    groups: &SpecGroups,
    teams: &[TeamTrajectory],
) -> Vec<Result<(bool, Robustness)>> {
    par::map_with(exec, teams, |team| {
        Ok((sat_global(spec, team, groups, 0)?, rho_sync_global(spec, team, groups, 0)?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{enumerate_groups, DEFAULT_GROUP_CAP};
    use crate::spec::{Agent, Fleet, Interval, PatternConstraint, StateRef};
    use std::collections::BTreeSet;

    fn iv(a: i64, b: i64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    /// `x_slot[0] - thr ≥ 0`.
    fn above(slot: usize, thr: f64) -> Formula {
        Formula::Pred(LinearPredicate::new([(StateRef { slot, component: 0 }, 1.0)], -thr).unwrap())
    }

    fn scalar(values: &[f64]) -> Trajectory {
        Trajectory::new(values.iter().map(|v| vec![*v]).collect()).unwrap()
    }

    fn bools(bits: &[bool]) -> Trajectory {
        scalar(&bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect::<Vec<_>>())
    }

    #[test]
    fn predicate_values() {
        let p = LinearPredicate::new([(StateRef { slot: 1, component: 0 }, 1.0)], -2.0).unwrap();
        assert_eq!(eval_predicate(&p, &[&[2.0]]).unwrap(), 0.0);
        assert!(eval_predicate(&p, &[]).is_err());
        assert!(eval_predicate(&p, &[&[]]).is_err());
    }

    #[test]
    fn infinity_norm_near_at_example_offsets() {
        // ‖z1 - z2‖∞ ≤ 0.25 at z1 = (1, 1), z2 = (1.2, 1.1)
        let r = 0.25;
        let at = |slot, component| StateRef { slot, component };
        let preds: Vec<LinearPredicate> = [(0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0)]
            .iter()
            .map(|&(c, s)| LinearPredicate::new([(at(1, c), s), (at(2, c), -s)], r).unwrap())
            .collect();
        let vals: Vec<f64> = preds.iter().map(|p| eval_predicate(p, &[&[1.0, 1.0], &[1.2, 1.1]]).unwrap()).collect();
        assert!(vals.iter().all(|v| *v >= 0.0));
        let tightest = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((tightest - 0.05).abs() < 1e-12);
    }

    #[test]
    fn globally_requires_every_step() {
        let f = Formula::globally(iv(0, 2), above(1, 0.0));
        assert!(sat_inner(&f, &[&bools(&[true, true, true])], 0).unwrap());
        assert!(!sat_inner(&f, &[&bools(&[true, false, true])], 0).unwrap());
        assert!(matches!(sat_inner(&f, &[&bools(&[true, true])], 0), Err(OracleError::Horizon { .. })));
    }

    #[test]
    fn finally_globally_enters_at_four() {
        let mut bits = vec![false; 10];
        bits[4..=6].iter_mut().for_each(|b| *b = true);
        let f = Formula::finally(iv(0, 7), Formula::globally(iv(0, 2), above(1, 0.0)));
        assert!(sat_inner(&f, &[&bools(&bits)], 0).unwrap());
        bits[6] = false;
        assert!(!sat_inner(&f, &[&bools(&bits)], 0).unwrap());
    }

    /// Direct transcription of the until definition over boolean traces.
    fn until_by_definition(p: &[bool], q: &[bool], k: usize, a: usize, b: usize) -> bool {
        (k + a..=k + b).any(|kp| q[kp] && (k..=kp).all(|kpp| p[kpp]))
    }

    #[test]
    fn until_examples_and_exhaustive() {
        let f = Formula::until(iv(1, 3), above(1, 0.0), above(2, 0.0));
        let p = bools(&[true, true, true, false]);
        let q = bools(&[false, false, true, false]);
        assert!(sat_inner(&f, &[&p, &q], 0).unwrap());
        let p2 = bools(&[true, false, true, false]);
        assert!(!sat_inner(&f, &[&p2, &q], 0).unwrap());
        for bits in 0u32..256 {
            let pb: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
            let qb: Vec<bool> = (4..8).map(|i| bits >> i & 1 == 1).collect();
            let got = sat_inner(&f, &[&bools(&pb), &bools(&qb)], 0).unwrap();
            assert_eq!(got, until_by_definition(&pb, &qb, 0, 1, 3), "p={pb:?} q={qb:?}");
        }
    }

    /// Independent run-length scan: for each start, count forward.
    fn scan_reference(q: &[bool], lo: usize, hi: usize) -> usize {
        let mut best = 0;
        for s in lo..=hi {
            let mut n = 0;
            while s + n < q.len() && q[s + n] {
                n += 1;
            }
            best = best.max(n);
        }
        best
    }

    #[test]
    fn window_scan_examples() {
        let mut q = vec![false; 10];
        q[3..=9].iter_mut().for_each(|b| *b = true);
        assert_eq!(window_scan(&q, 3..=7), SyncWindow { start: 3, duration: 7 });
        assert_eq!(window_scan(&[false; 10], 3..=7).duration, 0);
        let mut q = vec![false; 10];
        for i in [3, 4, 6, 7, 8] {
            q[i] = true;
        }
        assert_eq!(window_scan(&q, 3..=7), SyncWindow { start: 6, duration: 3 });
    }

    #[test]
    fn window_scan_exhaustive_length_ten() {
        for bits in 0u32..1024 {
            let q: Vec<bool> = (0..10).map(|i| bits >> i & 1 == 1).collect();
            for (lo, hi) in [(0, 9), (3, 7), (2, 4), (0, 0)] {
                assert_eq!(window_scan(&q, lo..=hi).duration, scan_reference(&q, lo, hi));
            }
        }
    }

    fn vis_fleet(n: usize) -> Fleet {
        let caps: BTreeSet<String> = ["Vis".to_string()].into();
        let agents = (1..=n)
            .map(|id| Agent { id, capabilities: caps.clone(), model: "scalar_integrator".into(), x0: vec![0.0] })
            .collect();
        Fleet::new(caps, agents).unwrap()
    }

    fn pair_task(window: (i64, i64), hold: u32) -> SyncTask {
        SyncTask::new(
            "sync",
            iv(window.0, window.1),
            hold,
            above(1, 0.0),
            2,
            vec![PatternConstraint::NotEqual((1, 1), (2, 1))],
        )
        .unwrap()
    }

    #[test]
    fn synchronous_robustness_counts_common_steps() {
        let fleet = vis_fleet(3);
        let task = pair_task((3, 7), 1);
        let groups = enumerate_groups(&task, &fleet, DEFAULT_GROUP_CAP).unwrap();
        let mut a = vec![false; 15];
        let mut b = vec![false; 15];
        a[3..=9].iter_mut().for_each(|x| *x = true);
        b[2..=9].iter_mut().for_each(|x| *x = true);
        let team = TeamTrajectory::new(vec![bools(&a), bools(&b), bools(&[false; 15])]).unwrap();
        let v = sync_verdict(&task, &team, &groups, 0).unwrap();
        assert_eq!(v.window, SyncWindow { start: 3, duration: 7 });
        assert_eq!(v.robustness, Robustness::Value(6));
        assert_eq!(v.witness, 0);

        // Exactly d common steps is boundary satisfaction, d - 1 is not.
        let task = pair_task((3, 7), 7);
        assert_eq!(rho_sync(&task, &team, &groups, 0).unwrap(), Robustness::Value(0));
        let task = SyncTask { hold: 8, window: iv(0, 1), ..pair_task((0, 1), 8) };
        assert_eq!(rho_sync(&task, &team, &groups, 0).unwrap(), Robustness::Unsat);
    }

    #[test]
    fn global_composition() {
        let fleet = vis_fleet(2);
        let t1 = pair_task((0, 2), 1);
        let t2 = SyncTask { name: "late".into(), ..pair_task((3, 4), 0) };
        let spec = GlobalSpec { tasks: vec![], sync_tasks: vec![t1.clone(), t2.clone()] };
        let groups = crate::groups::enumerate_spec(&spec, &fleet, DEFAULT_GROUP_CAP).unwrap();
        let all = bools(&[true; 8]);
        let team = TeamTrajectory::new(vec![all.clone(), all]).unwrap();
        // t1: run 0..7 = 8 steps, rho 7; t2: start 3, run 5, rho 5 -> min 5
        assert_eq!(rho_sync_global(&spec, &team, &groups, 0).unwrap(), Robustness::Value(5));
        assert!(sat_global(&spec, &team, &groups, 0).unwrap());

        let none = bools(&[false; 8]);
        let team = TeamTrajectory::new(vec![none.clone(), none]).unwrap();
        assert_eq!(rho_sync_global(&spec, &team, &groups, 0).unwrap(), Robustness::Unsat);
        assert!(!sat_global(&spec, &team, &groups, 0).unwrap());

        let empty = GlobalSpec::default();
        let eg = crate::groups::enumerate_spec(&empty, &fleet, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(rho_sync_global(&empty, &team, &eg, 0).unwrap(), Robustness::NotApplicable);
        assert!(sat_global(&empty, &team, &eg, 0).unwrap());
    }

    #[test]
    fn robustness_ordering() {
        assert_eq!(Robustness::Value(6).min(Robustness::Value(2)), Robustness::Value(2));
        assert_eq!(Robustness::Value(6).min(Robustness::Unsat), Robustness::Unsat);
        assert_eq!(Robustness::NotApplicable.min(Robustness::Value(3)), Robustness::Value(3));
    }

    #[test]
    fn task_witness_is_first_group() {
        let fleet = vis_fleet(3);
        let task = Task::new("t", Formula::globally(iv(0, 1), above(1, 0.0)), 1, vec![]).unwrap();
        let groups = enumerate_groups(&task, &fleet, DEFAULT_GROUP_CAP).unwrap();
        let yes = bools(&[true, true]);
        let no = bools(&[true, false]);
        let team = TeamTrajectory::new(vec![no.clone(), yes.clone(), yes]).unwrap();
        assert_eq!(sat_task(&task, &team, &groups, 0).unwrap(), TaskVerdict { satisfied: true, witness: Some(1) });
        let team = TeamTrajectory::new(vec![no.clone(), no.clone(), no]).unwrap();
        let v = sat_task(&task, &team, &groups, 0).unwrap();
        assert_eq!(v, TaskVerdict { satisfied: false, witness: None });
    }
}
