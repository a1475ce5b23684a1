//! Specification language: linear predicates over agent slots, the inner STL
//! logic, tasks, synchronous tasks, agent-selection patterns and the global
//! conjunction of tasks.

mod format;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{parse_document, parse_spec, print_spec, Document, ParseError, Region};
pub use validate::{validate, Diagnostic};

/// Agent identifiers are 1-based and contiguous.
pub type AgentId = usize;

/// Default strictness margin used when a negated predicate is turned into a
/// non-strict inequality.
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("interval [{0},{1}] must satisfy 0 <= a < b")]
    BadInterval(i64, i64),
    #[error("predicate has no nonzero coefficient")]
    EmptyPredicate,
    #[error("slot indices are 1-based, got slot 0")]
    ZeroSlot,
    #[error("until under negation is not supported")]
    NegatedUntil,
    #[error("task count c must be at least 1")]
    ZeroCount,
    #[error("synchronous body must be a globally operator, got {0}")]
    SyncBodyNotGlobally(&'static str),
    #[error("pattern constraint references element {element} / slot {slot} outside c={count}, N={slots}")]
    PatternIndex {
        element: usize,
        slot: usize,
        count: usize,
        slots: usize,
    },
}

/// Closed integer time interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    lo: u32,
    hi: u32,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Self, SpecError> {
        if lo < 0 || hi <= lo || hi > u32::MAX as i64 {
            return Err(SpecError::BadInterval(lo, hi));
        }
        Ok(Self {
            lo: lo as u32,
            hi: hi as u32,
        })
    }

    pub fn lo(&self) -> usize {
        self.lo as usize
    }

    pub fn hi(&self) -> usize {
        self.hi as usize
    }

    pub fn steps(&self) -> std::ops::RangeInclusive<usize> {
        self.lo()..=self.hi()
    }

    fn shifted(&self, by: u32) -> Self {
        Self {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// Reference to one state component of the agent bound to a formula slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateRef {
    /// 1-based slot index.
    pub slot: usize,
    /// 0-based state component.
    pub component: usize,
}

/// `α(x_{p¹},…,x_{pᴺ}) = Σ coeff·x + offset`; holds iff `α ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPredicate {
    coeffs: BTreeMap<StateRef, f64>,
    offset: f64,
}

impl LinearPredicate {
    /// Builds a predicate, merging duplicate references and dropping zero
    /// coefficients.
    pub fn new(
        terms: impl IntoIterator<Item = (StateRef, f64)>,
        offset: f64,
    ) -> Result<Self, SpecError> {
        let mut coeffs = BTreeMap::new();
        for (r, c) in terms {
            if r.slot == 0 {
                return Err(SpecError::ZeroSlot);
            }
            *coeffs.entry(r).or_insert(0.0) += c;
        }
        coeffs.retain(|_, c| *c != 0.0);
        if coeffs.is_empty() {
            return Err(SpecError::EmptyPredicate);
        }
        Ok(Self { coeffs, offset })
    }

    pub fn coeffs(&self) -> &BTreeMap<StateRef, f64> {
        &self.coeffs
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Highest slot index referenced.
    pub fn slot_count(&self) -> usize {
        self.coeffs.keys().map(|r| r.slot).max().unwrap_or(0)
    }

    /// `-α - eps ≥ 0`, the non-strict stand-in for `α < 0`.
    pub fn negated(&self, eps: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(r, c)| (*r, -c)).collect(),
            offset: -self.offset - eps,
        }
    }
}

/// Inner STL logic over agent slots.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Pred(LinearPredicate),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Globally(Interval, Box<Formula>),
    Finally(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn globally(i: Interval, f: Formula) -> Self {
        Formula::Globally(i, Box::new(f))
    }

    pub fn finally(i: Interval, f: Formula) -> Self {
        Formula::Finally(i, Box::new(f))
    }

    pub fn until(i: Interval, left: Formula, right: Formula) -> Self {
        Formula::Until(i, Box::new(left), Box::new(right))
    }

    pub fn op_name(&self) -> &'static str {
        match self {
            Formula::Pred(_) => "pred",
            Formula::Not(_) => "not",
            Formula::And(_) => "and",
            Formula::Or(_) => "or",
            Formula::Globally(..) => "globally",
            Formula::Finally(..) => "finally",
            Formula::Until(..) => "until",
        }
    }

    /// Number of agent slots the formula refers to (`N^φ`).
    pub fn slot_count(&self) -> usize {
        match self {
            Formula::Pred(p) => p.slot_count(),
            Formula::Not(f) | Formula::Globally(_, f) | Formula::Finally(_, f) => f.slot_count(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::slot_count).max().unwrap_or(0)
            }
            Formula::Until(_, l, r) => l.slot_count().max(r.slot_count()),
        }
    }

    /// Calls `f` on every predicate in the tree.
    pub fn for_each_predicate<'a>(&'a self, f: &mut impl FnMut(&'a LinearPredicate)) {
        match self {
            Formula::Pred(p) => f(p),
            Formula::Not(c) | Formula::Globally(_, c) | Formula::Finally(_, c) => {
                c.for_each_predicate(f)
            }
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.for_each_predicate(f)),
            Formula::Until(_, l, r) => {
                l.for_each_predicate(f);
                r.for_each_predicate(f);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Pred(_) => 0,
            Formula::Not(c) | Formula::Globally(_, c) | Formula::Finally(_, c) => 1 + c.depth(),
            Formula::And(cs) | Formula::Or(cs) => {
                1 + cs.iter().map(Formula::depth).max().unwrap_or(0)
            }
            Formula::Until(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// True when no `Not` node is left (negated predicates are rewritten).
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Pred(_) => true,
            Formula::Not(_) => false,
            Formula::Globally(_, c) | Formula::Finally(_, c) => c.is_nnf(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().all(Formula::is_nnf),
            Formula::Until(_, l, r) => l.is_nnf() && r.is_nnf(),
        }
    }

    /// Pushes negations down to predicates and replaces `¬(α ≥ 0)` with
    /// `-α - eps ≥ 0`.
    pub fn to_nnf(&self, eps: f64) -> Result<Formula, SpecError> {
        self.nnf(false, eps)
    }

    fn nnf(&self, negate: bool, eps: f64) -> Result<Formula, SpecError> {
        let all = |cs: &[Formula]| -> Result<Vec<Formula>, SpecError> {
            cs.iter().map(|c| c.nnf(negate, eps)).collect()
        };
        Ok(match (self, negate) {
            (Formula::Pred(p), false) => Formula::Pred(p.clone()),
            (Formula::Pred(p), true) => Formula::Pred(p.negated(eps)),
            (Formula::Not(c), _) => c.nnf(!negate, eps)?,
            (Formula::And(cs), false) => Formula::And(all(cs)?),
            (Formula::And(cs), true) => Formula::Or(all(cs)?),
            (Formula::Or(cs), false) => Formula::Or(all(cs)?),
            (Formula::Or(cs), true) => Formula::And(all(cs)?),
            (Formula::Globally(i, c), false) => Formula::globally(*i, c.nnf(false, eps)?),
            (Formula::Globally(i, c), true) => Formula::finally(*i, c.nnf(true, eps)?),
            (Formula::Finally(i, c), false) => Formula::finally(*i, c.nnf(false, eps)?),
            (Formula::Finally(i, c), true) => Formula::globally(*i, c.nnf(true, eps)?),
            (Formula::Until(i, l, r), false) => {
                Formula::until(*i, l.nnf(false, eps)?, r.nnf(false, eps)?)
            }
            (Formula::Until(..), true) => return Err(SpecError::NegatedUntil),
        })
    }
}

/// Minimal number of future steps needed to evaluate an object at time 0.
pub trait Horizon {
    fn horizon(&self) -> usize;
}

impl Horizon for Formula {
    fn horizon(&self) -> usize {
        match self {
            Formula::Pred(_) => 0,
            Formula::Not(c) => c.horizon(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().map(|c| c.horizon()).max().unwrap_or(0),
            Formula::Globally(i, c) | Formula::Finally(i, c) => i.hi() + c.horizon(),
            Formula::Until(i, l, r) => i.hi() + l.horizon().max(r.horizon()),
        }
    }
}

impl Horizon for Task {
    fn horizon(&self) -> usize {
        self.formula.horizon()
    }
}

impl Horizon for SyncTask {
    fn horizon(&self) -> usize {
        self.window.hi() + self.hold as usize + self.formula.horizon()
    }
}

impl Horizon for GlobalSpec {
    fn horizon(&self) -> usize {
        let t = self.tasks.iter().map(|t| t.horizon());
        let s = self.sync_tasks.iter().map(|t| t.horizon());
        t.chain(s).max().unwrap_or(0)
    }
}

/// Free-function form of [`Horizon::horizon`].
pub fn formula_horizon(item: &impl Horizon) -> usize {
    item.horizon()
}

/// One agent-selection constraint. Element and slot indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternConstraint {
    /// `p_i^n ∈ 𝒫_C`.
    Capability {
        element: usize,
        slot: usize,
        capability: String,
    },
    /// `p_i^n = agent`: pins a slot to a concrete agent.
    Agent {
        element: usize,
        slot: usize,
        agent: AgentId,
    },
    /// Agents inside element `i` are pairwise distinct.
    AllDifferentWithinElement(usize),
    /// No agent appears in two different elements.
    PairwiseDisjointElements,
    /// `p_{i₁}^{n₁} ≠ p_{i₂}^{n₂}`.
    NotEqual((usize, usize), (usize, usize)),
}

impl PatternConstraint {
    /// All `(element, slot)` positions mentioned.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        match self {
            PatternConstraint::Capability { element, slot, .. }
            | PatternConstraint::Agent { element, slot, .. } => vec![(*element, *slot)],
            PatternConstraint::AllDifferentWithinElement(e) => vec![(*e, 1)],
            PatternConstraint::PairwiseDisjointElements => vec![],
            PatternConstraint::NotEqual(a, b) => vec![*a, *b],
        }
    }
}

fn check_pattern(pattern: &[PatternConstraint], count: usize, slots: usize) -> Result<(), SpecError> {
    for pc in pattern {
        for (element, slot) in pc.positions() {
            if element == 0 || element > count || slot == 0 || slot > slots.max(1) {
                return Err(SpecError::PatternIndex {
                    element,
                    slot,
                    count,
                    slots,
                });
            }
        }
    }
    Ok(())
}

/// `T = ⟨φ, c, Pattern⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: String,
    pub formula: Formula,
    pub count: usize,
    pub pattern: Vec<PatternConstraint>,
}

impl Task {
    pub fn new(
        name: impl Into<String>,
        formula: Formula,
        count: usize,
        pattern: Vec<PatternConstraint>,
    ) -> Result<Self, SpecError> {
        if count == 0 {
            return Err(SpecError::ZeroCount);
        }
        check_pattern(&pattern, count, formula.slot_count())?;
        Ok(Self {
            name: name.into(),
            formula,
            count,
            pattern,
        })
    }

    pub fn slots(&self) -> usize {
        self.formula.slot_count()
    }
}

/// `T_s = F_[a,b] ⟨G_[0,d] φ, c, Pattern⟩`, stored with the hold interval
/// anchored at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncTask {
    pub name: String,
    pub window: Interval,
    pub hold: u32,
    pub formula: Formula,
    pub count: usize,
    pub pattern: Vec<PatternConstraint>,
}

impl SyncTask {
    /// Builds from the already-anchored body `G_[0,hold] formula`.
    pub fn new(
        name: impl Into<String>,
        window: Interval,
        hold: u32,
        formula: Formula,
        count: usize,
        pattern: Vec<PatternConstraint>,
    ) -> Result<Self, SpecError> {
        if count == 0 {
            return Err(SpecError::ZeroCount);
        }
        check_pattern(&pattern, count, formula.slot_count())?;
        Ok(Self {
            name: name.into(),
            window,
            hold,
            formula,
            count,
            pattern,
        })
    }

    /// Builds from `F_[a,b] ⟨G_[e,d+e] φ, …⟩`, rewriting it to
    /// `F_[a+e,b+e] ⟨G_[0,d] φ, …⟩`.
    pub fn from_globally(
        name: impl Into<String>,
        window: Interval,
        body: Formula,
        count: usize,
        pattern: Vec<PatternConstraint>,
    ) -> Result<Self, SpecError> {
        match body {
            Formula::Globally(i, inner) => {
                let shift = i.lo;
                Self::new(
                    name,
                    window.shifted(shift),
                    i.hi - i.lo,
                    *inner,
                    count,
                    pattern,
                )
            }
            other => Err(SpecError::SyncBodyNotGlobally(other.op_name())),
        }
    }

    pub fn slots(&self) -> usize {
        self.formula.slot_count()
    }
}

/// Flat conjunction `⋀ T^m ∧ ⋀ T_s^l`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GlobalSpec {
    pub tasks: Vec<Task>,
    pub sync_tasks: Vec<SyncTask>,
}

impl GlobalSpec {
    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty() && self.sync_tasks.is_empty()
    }

    /// Rewrites every formula into negation normal form.
    pub fn to_nnf(&self, eps: f64) -> Result<GlobalSpec, SpecError> {
        let tasks = self
            .tasks
            .iter()
            .map(|t| {
                Ok(Task {
                    formula: t.formula.to_nnf(eps)?,
                    ..t.clone()
                })
            })
            .collect::<Result<_, SpecError>>()?;
        let sync_tasks = self
            .sync_tasks
            .iter()
            .map(|t| {
                Ok(SyncTask {
                    formula: t.formula.to_nnf(eps)?,
                    ..t.clone()
                })
            })
            .collect::<Result<_, SpecError>>()?;
        Ok(GlobalSpec { tasks, sync_tasks })
    }
}

/// One agent of the fleet.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub capabilities: BTreeSet<String>,
    pub model: String,
    pub x0: Vec<f64>,
}

/// The team `𝒫` with its capability universe.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fleet {
    pub capabilities: BTreeSet<String>,
    pub agents: Vec<Agent>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FleetError {
    #[error("agent ids must be contiguous from 1; position {position} holds id {id}")]
    NonContiguous { position: usize, id: AgentId },
    #[error("agent {agent} has capability {capability:?} outside the fleet universe")]
    UnknownCapability { agent: AgentId, capability: String },
}

impl Fleet {
    pub fn new(capabilities: BTreeSet<String>, mut agents: Vec<Agent>) -> Result<Self, FleetError> {
        agents.sort_by_key(|a| a.id);
        for (i, a) in agents.iter().enumerate() {
            if a.id != i + 1 {
                return Err(FleetError::NonContiguous {
                    position: i + 1,
                    id: a.id,
                });
            }
            if let Some(c) = a.capabilities.iter().find(|c| !capabilities.contains(*c)) {
                return Err(FleetError::UnknownCapability {
                    agent: a.id,
                    capability: c.clone(),
                });
            }
        }
        Ok(Self {
            capabilities,
            agents,
        })
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        id.checked_sub(1).and_then(|i| self.agents.get(i))
    }

    /// `𝒫_C`.
    pub fn with_capability(&self, capability: &str) -> Vec<AgentId> {
        self.agents
            .iter()
            .filter(|a| a.capabilities.contains(capability))
            .map(|a| a.id)
            .collect()
    }
}
