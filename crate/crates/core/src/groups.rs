//! Enumeration of the agent groups that satisfy a task's selection pattern.
//!
//! A group assigns a concrete agent to every `(element, slot)` position of a
//! task. Groups that differ only by the order of their elements are the same
//! group; they are stored with elements sorted lexicographically and the group
//! list itself is sorted, so enumeration order is deterministic.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::spec::{AgentId, Fleet, GlobalSpec, PatternConstraint, SyncTask, Task};

pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("no agent assignment satisfies the pattern")]
    Empty,
    #[error("more than {cap} groups; raise the group cap or tighten the pattern")]
    Explosion { cap: usize },
}

/// Borrowed view over the two task kinds.
#[derive(Debug, Clone, Copy)]
pub enum TaskRef<'a> {
    Task(&'a Task),
    Sync(&'a SyncTask),
}

impl<'a> TaskRef<'a> {
    pub fn name(&self) -> &'a str {
        match self {
            TaskRef::Task(t) => &t.name,
            TaskRef::Sync(t) => &t.name,
        }
    }

    pub fn count(&self) -> usize {
        match self {
            TaskRef::Task(t) => t.count,
            TaskRef::Sync(t) => t.count,
        }
    }

    pub fn slots(&self) -> usize {
        match self {
            TaskRef::Task(t) => t.slots(),
            TaskRef::Sync(t) => t.slots(),
        }
    }

    pub fn pattern(&self) -> &'a [PatternConstraint] {
        match self {
            TaskRef::Task(t) => &t.pattern,
            TaskRef::Sync(t) => &t.pattern,
        }
    }
}

impl<'a> From<&'a Task> for TaskRef<'a> {
    fn from(t: &'a Task) -> Self {
        TaskRef::Task(t)
    }
}

impl<'a> From<&'a SyncTask> for TaskRef<'a> {
    fn from(t: &'a SyncTask) -> Self {
        TaskRef::Sync(t)
    }
}

/// `c` elements of `N^φ` agents each, elements in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AgentGroup {
    elements: Vec<Vec<AgentId>>,
}

impl AgentGroup {
    pub fn new(mut elements: Vec<Vec<AgentId>>) -> Self {
        elements.sort();
        Self { elements }
    }

    pub fn elements(&self) -> &[Vec<AgentId>] {
        &self.elements
    }
}

impl fmt::Display for AgentGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .elements
            .iter()
            .map(|e| format!("({})", e.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSet {
    pub task: String,
    groups: Vec<AgentGroup>,
}

impl GroupSet {
    pub fn groups(&self) -> &[AgentGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Group sets for every task of a spec, in spec order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecGroups {
    pub tasks: Vec<GroupSet>,
    pub sync_tasks: Vec<GroupSet>,
}

struct Search<'a> {
    count: usize,
    slots: usize,
    pattern: &'a [PatternConstraint],
    /// Allowed agents per position `i * slots + n` (0-based).
    candidates: Vec<Vec<AgentId>>,
}

impl<'a> Search<'a> {
    fn new(task: TaskRef<'a>, fleet: &Fleet) -> Self {
        let count = task.count();
        let slots = task.slots().max(1);
        let pattern = task.pattern();
        let mut candidates = Vec::with_capacity(count * slots);
        for i in 1..=count {
            for n in 1..=slots {
                let allowed = fleet
                    .agents
                    .iter()
                    .filter(|a| {
                        pattern.iter().all(|pc| match pc {
                            PatternConstraint::Capability { element, slot, capability } if (*element, *slot) == (i, n) => {
                                a.capabilities.contains(capability)
                            }
                            PatternConstraint::Agent { element, slot, agent } if (*element, *slot) == (i, n) => {
                                a.id == *agent
                            }
                            _ => true,
                        })
                    })
                    .map(|a| a.id)
                    .collect();
                candidates.push(allowed);
            }
        }
        Self { count, slots, pattern, candidates }
    }

    fn pos(&self, element: usize, slot: usize) -> usize {
        (element - 1) * self.slots + (slot - 1)
    }

    /// Checks the distinctness constraints that are decidable once positions
    /// `0..=last` are assigned, for those involving `last`.
    fn consistent(&self, assigned: &[AgentId], last: usize) -> bool {
        let agent = assigned[last];
        let (el, _) = (last / self.slots, last % self.slots);
        self.pattern.iter().all(|pc| match pc {
            PatternConstraint::AllDifferentWithinElement(e) if e - 1 == el => {
                (el * self.slots..last).all(|p| assigned[p] != agent)
            }
            PatternConstraint::PairwiseDisjointElements => (0..el * self.slots).all(|p| assigned[p] != agent),
            PatternConstraint::NotEqual(a, b) => {
                let (pa, pb) = (self.pos(a.0, a.1), self.pos(b.0, b.1));
                let (other, mine) = if pa == last { (pb, pa) } else if pb == last { (pa, pb) } else { return true };
                other != mine && (other > mine || assigned[other] != agent)
            }
            _ => true,
        })
    }

    fn run(&self, cap: usize, mut emit: impl FnMut(&[AgentId]) -> Result<(), GroupError>) -> Result<(), GroupError> {
        let total = self.count * self.slots;
        if self.candidates.iter().any(Vec::is_empty) {
            return Ok(());
        }
        let mut assigned = vec![0; total];
        let mut cursor = vec![0usize; total];
        let mut depth = 0usize;
        let mut steps = 0usize;
        let step_cap = cap.saturating_mul(64).max(1 << 20);
        loop {
            if cursor[depth] == self.candidates[depth].len() {
                cursor[depth] = 0;
                if depth == 0 {
                    return Ok(());
                }
                depth -= 1;
                cursor[depth] += 1;
                continue;
            }
            steps += 1;
            if steps > step_cap {
                return Err(GroupError::Explosion { cap });
            }
            assigned[depth] = self.candidates[depth][cursor[depth]];
            if !self.consistent(&assigned, depth) {
                cursor[depth] += 1;
                continue;
            }
            if depth + 1 == total {
                emit(&assigned)?;
                cursor[depth] += 1;
            } else {
                depth += 1;
            }
        }
    }

    fn split(&self, assigned: &[AgentId]) -> Vec<Vec<AgentId>> {
        assigned.chunks(self.slots).map(<[AgentId]>::to_vec).collect()
    }
}

/// All pattern-satisfying groups of a task, deduplicated under element
/// permutation and sorted.
pub fn enumerate_groups<'a>(task: impl Into<TaskRef<'a>>, fleet: &Fleet, cap: usize) -> Result<GroupSet, GroupError> {
    let task = task.into();
    let search = Search::new(task, fleet);
    let mut set = BTreeSet::new();
    search.run(cap, |assigned| {
        set.insert(AgentGroup::new(search.split(assigned)));
        if set.len() > cap {
            Err(GroupError::Explosion { cap })
        } else {
            Ok(())
        }
    })?;
    if set.is_empty() {
        return Err(GroupError::Empty);
    }
    Ok(GroupSet {
        task: task.name().to_string(),
        groups: set.into_iter().collect(),
    })
}

/// `|enumerate_groups(task)|` without storing the groups.
///
/// Walks element multisets in canonical order and keeps those for which some
/// ordering of the elements satisfies the pattern. Returns 0 for infeasible
/// patterns.
pub fn group_count<'a>(task: impl Into<TaskRef<'a>>, fleet: &Fleet, cap: usize) -> Result<usize, GroupError> {
    let task = task.into();
    let search = Search::new(task, fleet);
    let slots = search.slots;
    // Every tuple any element could take.
    let mut tuples: Vec<Vec<AgentId>> = vec![vec![]];
    for n in 0..slots {
        let union: BTreeSet<AgentId> = (0..search.count)
            .flat_map(|i| search.candidates[i * slots + n].iter().copied())
            .collect();
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                union.iter().map(move |&a| {
                    let mut t = t.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
        if tuples.len() > cap.saturating_mul(16) {
            return Err(GroupError::Explosion { cap });
        }
    }
    let c = search.count;
    let mut count = 0usize;
    let mut visited = 0usize;
    let mut chosen: Vec<usize> = Vec::with_capacity(c);
    // Non-decreasing index sequences = multisets of tuples.
    fn walk(
        search: &Search,
        tuples: &[Vec<AgentId>],
        chosen: &mut Vec<usize>,
        start: usize,
        count: &mut usize,
        visited: &mut usize,
        cap: usize,
    ) -> Result<(), GroupError> {
        if chosen.len() == search.count {
            *visited += 1;
            if *visited > cap.saturating_mul(64).max(1 << 20) {
                return Err(GroupError::Explosion { cap });
            }
            let elements: Vec<&Vec<AgentId>> = chosen.iter().map(|&i| &tuples[i]).collect();
            if orderable(search, &elements) {
                *count += 1;
                if *count > cap {
                    return Err(GroupError::Explosion { cap });
                }
            }
            return Ok(());
        }
        for i in start..tuples.len() {
            chosen.push(i);
            walk(search, tuples, chosen, i, count, visited, cap)?;
            chosen.pop();
        }
        Ok(())
    }
    walk(&search, &tuples, &mut chosen, 0, &mut count, &mut visited, cap)?;
    debug_assert!(c >= 1);
    Ok(count)
}

/// Whether some assignment of `elements` to element indices satisfies the
/// pattern.
fn orderable(search: &Search, elements: &[&Vec<AgentId>]) -> bool {
    let c = elements.len();
    let mut used = vec![false; c];
    let mut assigned = vec![0; c * search.slots];
    fn place(search: &Search, elements: &[&Vec<AgentId>], used: &mut [bool], assigned: &mut [AgentId], idx: usize) -> bool {
        if idx == elements.len() {
            return true;
        }
        for e in 0..elements.len() {
            if used[e] || (e > 0 && !used[e - 1] && elements[e] == elements[e - 1]) {
                continue;
            }
            let base = idx * search.slots;
            let ok = (0..search.slots).all(|n| {
                assigned[base + n] = elements[e][n];
                search.candidates[base + n].contains(&elements[e][n]) && search.consistent(assigned, base + n)
            });
            if ok {
                used[e] = true;
                if place(search, elements, used, assigned, idx + 1) {
                    return true;
                }
                used[e] = false;
            }
        }
        false
    }
    place(search, elements, &mut used, &mut assigned, 0)
}

/// Enumerates every task of a spec; independent tasks run concurrently.
pub fn enumerate_spec(spec: &GlobalSpec, fleet: &Fleet, cap: usize) -> Result<SpecGroups, (String, GroupError)> {
    let run = |t: TaskRef| enumerate_groups(t, fleet, cap).map_err(|e| (t.name().to_string(), e));
    let tasks: Vec<TaskRef> = spec.tasks.iter().map(TaskRef::from).collect();
    let syncs: Vec<TaskRef> = spec.sync_tasks.iter().map(TaskRef::from).collect();
    let tasks = par::map(&tasks, |t| run(*t)).into_iter().collect::<Result<_, _>>()?;
    let sync_tasks = par::map(&syncs, |t| run(*t)).into_iter().collect::<Result<_, _>>()?;
    Ok(SpecGroups { tasks, sync_tasks })
}
