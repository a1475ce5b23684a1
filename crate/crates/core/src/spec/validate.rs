use std::fmt;

use serde::Serialize;

use super::{Fleet, GlobalSpec, Horizon, PatternConstraint};
use crate::groups::{group_count, GroupError, TaskRef, DEFAULT_GROUP_CAP};

/// A problem found by [`validate`]. Diagnostics are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub task: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn diag(task: &str, message: String) -> Diagnostic {
    Diagnostic {
        task: Some(task.to_string()),
        message,
    }
}

/// Returns an empty list iff every task fits the horizon, every capability
/// constraint names a nonempty agent set, and every task admits a group.
pub fn validate(spec: &GlobalSpec, fleet: &Fleet, horizon: usize) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let items = spec
        .tasks
        .iter()
        .map(|t| (TaskRef::Task(t), t.name.as_str(), t.horizon(), &t.pattern))
        .chain(
            spec.sync_tasks
                .iter()
                .map(|t| (TaskRef::Sync(t), t.name.as_str(), t.horizon(), &t.pattern)),
        );
    for (task, name, needs, pattern) in items {
        if needs > horizon {
            out.push(diag(name, format!("horizon exceeded by {name} (needs {needs})")));
        }
        let mut pattern_ok = true;
        for pc in pattern {
            match pc {
                PatternConstraint::Capability { capability, .. } => {
                    if !fleet.capabilities.contains(capability) {
                        out.push(diag(name, format!("{name}: unknown capability {capability:?}")));
                        pattern_ok = false;
                    } else if fleet.with_capability(capability).is_empty() {
                        out.push(diag(name, format!("{name}: no agent has capability {capability:?}")));
                        pattern_ok = false;
                    }
                }
                PatternConstraint::Agent { agent, .. } if fleet.agent(*agent).is_none() => {
                    out.push(diag(name, format!("{name}: agent {agent} is not in the fleet")));
                    pattern_ok = false;
                }
                _ => {}
            }
        }
        if !pattern_ok {
            continue;
        }
        match group_count(task, fleet, DEFAULT_GROUP_CAP) {
            Ok(0) | Err(GroupError::Empty) => {
                out.push(diag(name, format!("{name}: no feasible group")));
            }
            Ok(_) => {}
            Err(e) => out.push(diag(name, format!("{name}: {e}"))),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{Agent, Formula, Interval, LinearPredicate, StateRef, SyncTask, Task};
    use std::collections::BTreeSet;

    fn fleet(caps: &[&str]) -> Fleet {
        let universe: BTreeSet<String> = ["UV", "IR", "Vis"].map(String::from).into();
        let agents = caps
            .iter()
            .enumerate()
            .map(|(i, c)| Agent {
                id: i + 1,
                capabilities: [c.to_string()].into(),
                model: "double_integrator".into(),
                x0: vec![0.0; 4],
            })
            .collect();
        Fleet::new(universe, agents).unwrap()
    }

    fn in_c() -> Formula {
        Formula::Pred(LinearPredicate::new([(StateRef { slot: 1, component: 0 }, 1.0)], -3.0).unwrap())
    }

    fn phi_c() -> SyncTask {
        let cap = |e| PatternConstraint::Capability { element: e, slot: 1, capability: "Vis".into() };
        SyncTask::new(
            "Phi_C",
            Interval::new(3, 7).unwrap(),
            1,
            in_c(),
            2,
            vec![cap(1), cap(2), PatternConstraint::NotEqual((1, 1), (2, 1))],
        )
        .unwrap()
    }

    #[test]
    fn too_few_agents_for_distinct_pattern() {
        let spec = GlobalSpec { tasks: vec![], sync_tasks: vec![phi_c()] };
        let d = validate(&spec, &fleet(&["Vis", "UV"]), 9);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "Phi_C: no feasible group");
        assert!(validate(&spec, &fleet(&["Vis", "Vis"]), 9).is_empty());
    }

    #[test]
    fn horizon_diagnostic_names_the_task() {
        let f = Formula::finally(Interval::new(7, 9).unwrap(), in_c());
        let spec = GlobalSpec { tasks: vec![Task::new("Phi_B", f, 1, vec![]).unwrap()], sync_tasks: vec![] };
        let d = validate(&spec, &fleet(&["UV"]), 5);
        assert_eq!(d[0].message, "horizon exceeded by Phi_B (needs 9)");
        assert!(validate(&spec, &fleet(&["UV"]), 9).is_empty());
    }

    #[test]
    fn empty_capability_set() {
        let pattern = vec![PatternConstraint::Capability { element: 1, slot: 1, capability: "IR".into() }];
        let spec = GlobalSpec { tasks: vec![Task::new("t", in_c(), 1, pattern).unwrap()], sync_tasks: vec![] };
        let d = validate(&spec, &fleet(&["UV"]), 3);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("IR"));
    }
}
