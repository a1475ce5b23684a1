//! Scenario document format.
//!
//! A TOML document with the top-level keys `horizon`, `fleet`, `models`,
//! `regions`, `tasks`, `weights`, `encoding` and `solver`. Formulas are nested
//! tables keyed by `op`; see `docs/scenario-format.md` for every field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::Range;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use super::{
    Agent, Fleet, Formula, GlobalSpec, Interval, LinearPredicate, PatternConstraint, SpecError,
    StateRef, SyncTask, Task,
};
use crate::dynamics::AgentModel;

/// Position components used by region and distance shorthands.
pub const POSITION_COMPONENTS: [usize; 2] = [0, 1];

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Axis-aligned box in position space.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Region {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightSection {
    pub beta: Option<f64>,
    pub gamma: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EncodingSection {
    pub epsilon: Option<f64>,
    pub margin: Option<f64>,
    pub effort_norm: Option<String>,
    pub group_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub id: Option<String>,
    pub time_limit: Option<f64>,
    pub gap: Option<f64>,
    pub threads: Option<u32>,
    pub seed: Option<u32>,
    pub command: Option<String>,
    pub solution_format: Option<String>,
}

/// Everything a scenario file can carry. Only `spec` is always present.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub name: Option<String>,
    pub horizon: Option<usize>,
    pub spec: GlobalSpec,
    pub fleet: Option<Fleet>,
    /// Inline models; fleet agents may also name a preset.
    pub models: BTreeMap<String, AgentModel>,
    pub regions: BTreeMap<String, Region>,
    pub weights: WeightSection,
    pub encoding: EncodingSection,
    pub solver: SolverSection,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    name: Option<String>,
    horizon: Option<Spanned<i64>>,
    fleet: Option<RawFleet>,
    #[serde(default)]
    models: BTreeMap<String, Spanned<RawModel>>,
    #[serde(default)]
    regions: BTreeMap<String, Spanned<Region>>,
    #[serde(default)]
    tasks: Vec<RawTask>,
    weights: Option<RawWeights>,
    encoding: Option<RawEncoding>,
    solver: Option<SolverSection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFleet {
    capabilities: Vec<String>,
    agents: Vec<Spanned<RawAgent>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    id: usize,
    #[serde(default)]
    capabilities: Vec<String>,
    model: String,
    x0: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    state_bounds: Vec<[f64; 2]>,
    control_bounds: Vec<[f64; 2]>,
    state_names: Option<Vec<String>>,
    control_names: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    beta: Option<f64>,
    #[serde(default)]
    gamma: BTreeMap<String, u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEncoding {
    epsilon: Option<f64>,
    margin: Option<f64>,
    effort_norm: Option<String>,
    group_cap: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    name: String,
    kind: Spanned<String>,
    c: Option<usize>,
    formula: RawFormula,
    #[serde(default)]
    pattern: Vec<RawConstraint>,
    window: Option<Spanned<[i64; 2]>>,
    hold: Option<Spanned<i64>>,
    for_each: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFormula {
    op: Spanned<String>,
    interval: Option<Spanned<[i64; 2]>>,
    arg: Option<Box<RawFormula>>,
    args: Option<Vec<RawFormula>>,
    left: Option<Box<RawFormula>>,
    right: Option<Box<RawFormula>>,
    terms: Option<Vec<RawTerm>>,
    offset: Option<f64>,
    slot: Option<usize>,
    region: Option<Spanned<String>>,
    slots: Option<[usize; 2]>,
    dist: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    slot: usize,
    component: usize,
    coeff: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    kind: Spanned<String>,
    element: Option<usize>,
    slot: Option<usize>,
    capability: Option<Spanned<String>>,
    agent: Option<usize>,
    first: Option<[usize; 2]>,
    second: Option<[usize; 2]>,
}

struct Ctx<'a> {
    text: &'a str,
    regions: BTreeMap<String, Region>,
    capabilities: Option<BTreeSet<String>>,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ParseError {
        let (line, column) = line_col(self.text, span.start);
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn interval(&self, raw: &Spanned<[i64; 2]>) -> Result<Interval, ParseError> {
        let [a, b] = *raw.get_ref();
        Interval::new(a, b).map_err(|e| self.err(raw.span(), e.to_string()))
    }

    fn formula(&self, raw: &RawFormula) -> Result<Formula, ParseError> {
        let span = raw.op.span();
        let need = |v: bool, what: &str| -> Result<(), ParseError> {
            if v {
                Ok(())
            } else {
                Err(self.err(span.clone(), format!("`{}` requires `{what}`", raw.op.get_ref())))
            }
        };
        let child = |f: &Option<Box<RawFormula>>, what: &str| -> Result<Formula, ParseError> {
            match f {
                Some(f) => self.formula(f),
                None => Err(self.err(span.clone(), format!("`{}` requires `{what}`", raw.op.get_ref()))),
            }
        };
        let interval = || -> Result<Interval, ParseError> {
            match &raw.interval {
                Some(i) => self.interval(i),
                None => Err(self.err(span.clone(), format!("`{}` requires `interval`", raw.op.get_ref()))),
            }
        };
        let pred = |terms: Vec<(StateRef, f64)>, offset: f64| -> Result<Formula, ParseError> {
            LinearPredicate::new(terms, offset)
                .map(Formula::Pred)
                .map_err(|e| self.err(span.clone(), e.to_string()))
        };
        let region = || -> Result<(usize, Region), ParseError> {
            need(raw.slot.is_some(), "slot")?;
            let name = raw
                .region
                .as_ref()
                .ok_or_else(|| self.err(span.clone(), format!("`{}` requires `region`", raw.op.get_ref())))?;
            let r = self
                .regions
                .get(name.get_ref())
                .ok_or_else(|| self.err(name.span(), format!("unknown region {:?}", name.get_ref())))?;
            Ok((raw.slot.unwrap(), *r))
        };
        let [px, py] = POSITION_COMPONENTS;
        let at = |slot, component| StateRef { slot, component };
        match raw.op.get_ref().as_str() {
            "pred" => {
                need(raw.terms.is_some(), "terms")?;
                let terms = raw.terms.as_ref().unwrap();
                pred(
                    terms.iter().map(|t| (at(t.slot, t.component), t.coeff)).collect(),
                    raw.offset.unwrap_or(0.0),
                )
            }
            "not" => Ok(Formula::not(child(&raw.arg, "arg")?)),
            op @ ("and" | "or") => {
                need(raw.args.as_ref().is_some_and(|a| !a.is_empty()), "args")?;
                let cs = raw
                    .args
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|a| self.formula(a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(if op == "and" { Formula::And(cs) } else { Formula::Or(cs) })
            }
            "globally" => Ok(Formula::globally(interval()?, child(&raw.arg, "arg")?)),
            "finally" => Ok(Formula::finally(interval()?, child(&raw.arg, "arg")?)),
            "until" => Ok(Formula::until(
                interval()?,
                child(&raw.left, "left")?,
                child(&raw.right, "right")?,
            )),
            "in" => {
                let (s, r) = region()?;
                Ok(Formula::And(vec![
                    pred(vec![(at(s, px), 1.0)], -r.xmin)?,
                    pred(vec![(at(s, px), -1.0)], r.xmax)?,
                    pred(vec![(at(s, py), 1.0)], -r.ymin)?,
                    pred(vec![(at(s, py), -1.0)], r.ymax)?,
                ]))
            }
            "out" => {
                let (s, r) = region()?;
                Ok(Formula::Or(vec![
                    pred(vec![(at(s, px), -1.0)], r.xmin)?,
                    pred(vec![(at(s, px), 1.0)], -r.xmax)?,
                    pred(vec![(at(s, py), -1.0)], r.ymin)?,
                    pred(vec![(at(s, py), 1.0)], -r.ymax)?,
                ]))
            }
            op @ ("near" | "apart") => {
                need(raw.slots.is_some(), "slots")?;
                need(raw.dist.is_some(), "dist")?;
                let [s1, s2] = raw.slots.unwrap();
                let r = raw.dist.unwrap();
                let diff = |c: usize, sign: f64| vec![(at(s1, c), sign), (at(s2, c), -sign)];
                if op == "near" {
                    // ‖z1 - z2‖∞ ≤ r
                    Ok(Formula::And(vec![
                        pred(diff(px, -1.0), r)?,
                        pred(diff(px, 1.0), r)?,
                        pred(diff(py, -1.0), r)?,
                        pred(diff(py, 1.0), r)?,
                    ]))
                } else {
                    // ‖z1 - z2‖∞ ≥ r
                    Ok(Formula::Or(vec![
                        pred(diff(px, 1.0), -r)?,
                        pred(diff(px, -1.0), -r)?,
                        pred(diff(py, 1.0), -r)?,
                        pred(diff(py, -1.0), -r)?,
                    ]))
                }
            }
            other => Err(self.err(span, format!("unknown operator {other:?}"))),
        }
    }

    fn constraint(&self, raw: &RawConstraint) -> Result<PatternConstraint, ParseError> {
        let span = raw.kind.span();
        let missing = |what: &str| self.err(span.clone(), format!("`{}` constraint requires `{what}`", raw.kind.get_ref()));
        match raw.kind.get_ref().as_str() {
            "capability" => {
                let cap = raw.capability.as_ref().ok_or_else(|| missing("capability"))?;
                if let Some(known) = &self.capabilities {
                    if !known.contains(cap.get_ref()) {
                        return Err(self.err(cap.span(), format!("unknown capability {:?}", cap.get_ref())));
                    }
                }
                Ok(PatternConstraint::Capability {
                    element: raw.element.ok_or_else(|| missing("element"))?,
                    slot: raw.slot.ok_or_else(|| missing("slot"))?,
                    capability: cap.get_ref().clone(),
                })
            }
            "agent" => Ok(PatternConstraint::Agent {
                element: raw.element.ok_or_else(|| missing("element"))?,
                slot: raw.slot.ok_or_else(|| missing("slot"))?,
                agent: raw.agent.ok_or_else(|| missing("agent"))?,
            }),
            "distinct" => Ok(PatternConstraint::AllDifferentWithinElement(
                raw.element.ok_or_else(|| missing("element"))?,
            )),
            "disjoint" => Ok(PatternConstraint::PairwiseDisjointElements),
            "not_equal" => {
                let a = raw.first.ok_or_else(|| missing("first"))?;
                let b = raw.second.ok_or_else(|| missing("second"))?;
                Ok(PatternConstraint::NotEqual((a[0], a[1]), (b[0], b[1])))
            }
            other => Err(self.err(span, format!("unknown pattern constraint {other:?}"))),
        }
    }

    fn task(&self, raw: &RawTask, fleet: Option<&Fleet>, spec: &mut GlobalSpec) -> Result<(), ParseError> {
        let formula = self.formula(&raw.formula)?;
        let mut pattern = raw
            .pattern
            .iter()
            .map(|c| self.constraint(c))
            .collect::<Result<Vec<_>, _>>()?;
        let count = raw.c.unwrap_or(1);
        let kind_span = raw.kind.span();
        let spec_err = |e: SpecError| self.err(kind_span.clone(), format!("task {:?}: {e}", raw.name));
        match raw.kind.get_ref().as_str() {
            "task" => {
                let Some(each) = &raw.for_each else {
                    spec.tasks.push(Task::new(&raw.name, formula, count, pattern).map_err(spec_err)?);
                    return Ok(());
                };
                let fleet = fleet.ok_or_else(|| self.err(each.span(), "`for_each` needs a [fleet] section"))?;
                if count != 1 {
                    return Err(self.err(each.span(), "`for_each` tasks must have c = 1"));
                }
                let ids: Vec<usize> = fleet.agents.iter().map(|a| a.id).collect();
                let pin = |slot, agent| PatternConstraint::Agent { element: 1, slot, agent };
                let base = pattern.clone();
                match each.get_ref().as_str() {
                    "agent" => {
                        for &p in &ids {
                            pattern = base.clone();
                            pattern.push(pin(1, p));
                            let name = format!("{}[{p}]", raw.name);
                            spec.tasks.push(Task::new(name, formula.clone(), 1, pattern).map_err(spec_err)?);
                        }
                    }
                    "pair" => {
                        for (i, &p) in ids.iter().enumerate() {
                            for &q in &ids[i + 1..] {
                                pattern = base.clone();
                                pattern.extend([pin(1, p), pin(2, q)]);
                                let name = format!("{}[{p},{q}]", raw.name);
                                spec.tasks.push(Task::new(name, formula.clone(), 1, pattern).map_err(spec_err)?);
                            }
                        }
                    }
                    other => return Err(self.err(each.span(), format!("unknown for_each {other:?}"))),
                }
                Ok(())
            }
            "sync" => {
                let window = raw
                    .window
                    .as_ref()
                    .ok_or_else(|| self.err(kind_span.clone(), "sync task requires `window`"))?;
                let window = self.interval(window)?;
                let task = match &raw.hold {
                    Some(hold) => {
                        let d = *hold.get_ref();
                        if d < 0 {
                            return Err(self.err(hold.span(), format!("hold must be non-negative, got {d}")));
                        }
                        SyncTask::new(&raw.name, window, d as u32, formula, count, pattern)
                    }
                    None => SyncTask::from_globally(&raw.name, window, formula, count, pattern),
                };
                spec.sync_tasks.push(task.map_err(spec_err)?);
                Ok(())
            }
            other => Err(self.err(kind_span, format!("unknown task kind {other:?}"))),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

/// Parses a full scenario document.
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let raw: RawDocument = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        ParseError {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let mut ctx = Ctx {
        text,
        regions: BTreeMap::new(),
        capabilities: None,
    };
    for (name, r) in &raw.regions {
        let b = r.get_ref();
        if !(b.xmin < b.xmax && b.ymin < b.ymax) {
            return Err(ctx.err(r.span(), format!("region {name:?} is empty")));
        }
        ctx.regions.insert(name.clone(), *b);
    }

    let mut models = BTreeMap::new();
    for (name, m) in &raw.models {
        let rm = m.get_ref();
        let bounds = |v: &[[f64; 2]]| v.iter().map(|b| (b[0], b[1])).collect();
        let mut model = AgentModel::new(rm.a.clone(), rm.b.clone(), bounds(&rm.state_bounds), bounds(&rm.control_bounds))
            .map_err(|e| ctx.err(m.span(), format!("model {name:?}: {e}")))?;
        if rm.state_names.is_some() || rm.control_names.is_some() {
            let states = rm.state_names.clone().unwrap_or_else(|| model.state_names().to_vec());
            let controls = rm.control_names.clone().unwrap_or_else(|| model.control_names().to_vec());
            model = model
                .with_names(states, controls)
                .map_err(|e| ctx.err(m.span(), format!("model {name:?}: {e}")))?;
        }
        models.insert(name.clone(), model);
    }

    let fleet = match &raw.fleet {
        Some(f) => {
            let capabilities: BTreeSet<String> = f.capabilities.iter().cloned().collect();
            let mut agents = Vec::new();
            for a in &f.agents {
                let ra = a.get_ref();
                if !models.contains_key(&ra.model) && AgentModel::preset(&ra.model).is_err() {
                    return Err(ctx.err(a.span(), format!("agent {}: unknown model {:?}", ra.id, ra.model)));
                }
                if let Some(c) = ra.capabilities.iter().find(|c| !capabilities.contains(*c)) {
                    return Err(ctx.err(a.span(), format!("agent {}: unknown capability {c:?}", ra.id)));
                }
                agents.push(Agent {
                    id: ra.id,
                    capabilities: ra.capabilities.iter().cloned().collect(),
                    model: ra.model.clone(),
                    x0: ra.x0.clone(),
                });
            }
            let span = f.agents.first().map_or(0..0, |a| a.span());
            let fleet = Fleet::new(capabilities.clone(), agents).map_err(|e| ctx.err(span, e.to_string()))?;
            ctx.capabilities = Some(capabilities);
            Some(fleet)
        }
        None => None,
    };

    let mut spec = GlobalSpec::default();
    for t in &raw.tasks {
        ctx.task(t, fleet.as_ref(), &mut spec)?;
    }

    let horizon = match &raw.horizon {
        Some(h) if *h.get_ref() <= 0 => {
            return Err(ctx.err(h.span(), "horizon must be positive"));
        }
        Some(h) => Some(*h.get_ref() as usize),
        None => None,
    };
    let weights = raw
        .weights
        .map(|w| WeightSection {
            beta: w.beta,
            gamma: w.gamma,
        })
        .unwrap_or_default();
    let encoding = raw
        .encoding
        .map(|e| EncodingSection {
            epsilon: e.epsilon,
            margin: e.margin,
            effort_norm: e.effort_norm,
            group_cap: e.group_cap,
        })
        .unwrap_or_default();
    Ok(Document {
        name: raw.name,
        horizon,
        spec,
        fleet,
        models,
        regions: ctx.regions,
        weights,
        encoding,
        solver: raw.solver.unwrap_or_default(),
    })
}

/// Parses the task list of a document into a [`GlobalSpec`].
pub fn parse_spec(text: &str) -> Result<GlobalSpec, ParseError> {
    parse_document(text).map(|d| d.spec)
}

fn num(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'i', 'N']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_formula(out: &mut String, path: &str, f: &Formula) {
    let _ = writeln!(out, "op = {}", quote(f.op_name()));
    match f {
        Formula::Pred(p) => {
            let terms: Vec<String> = p
                .coeffs()
                .iter()
                .map(|(r, c)| format!("{{ slot = {}, component = {}, coeff = {} }}", r.slot, r.component, num(*c)))
                .collect();
            let _ = writeln!(out, "terms = [{}]", terms.join(", "));
            let _ = writeln!(out, "offset = {}", num(p.offset()));
        }
        Formula::Not(c) => {
            let sub = format!("{path}.arg");
            let _ = writeln!(out, "\n[{sub}]");
            write_formula(out, &sub, c);
        }
        Formula::And(cs) | Formula::Or(cs) => {
            let sub = format!("{path}.args");
            for c in cs {
                let _ = writeln!(out, "\n[[{sub}]]");
                write_formula(out, &sub, c);
            }
        }
        Formula::Globally(i, c) | Formula::Finally(i, c) => {
            let _ = writeln!(out, "interval = [{}, {}]", i.lo(), i.hi());
            let sub = format!("{path}.arg");
            let _ = writeln!(out, "\n[{sub}]");
            write_formula(out, &sub, c);
        }
        Formula::Until(i, l, r) => {
            let _ = writeln!(out, "interval = [{}, {}]", i.lo(), i.hi());
            let sub = format!("{path}.left");
            let _ = writeln!(out, "\n[{sub}]");
            write_formula(out, &sub, l);
            let sub = format!("{path}.right");
            let _ = writeln!(out, "\n[{sub}]");
            write_formula(out, &sub, r);
        }
    }
}

fn write_pattern(out: &mut String, pattern: &[PatternConstraint]) {
    if pattern.is_empty() {
        return;
    }
    let items: Vec<String> = pattern
        .iter()
        .map(|p| match p {
            PatternConstraint::Capability { element, slot, capability } => format!(
                "{{ kind = \"capability\", element = {element}, slot = {slot}, capability = {} }}",
                quote(capability)
            ),
            PatternConstraint::Agent { element, slot, agent } => {
                format!("{{ kind = \"agent\", element = {element}, slot = {slot}, agent = {agent} }}")
            }
            PatternConstraint::AllDifferentWithinElement(e) => format!("{{ kind = \"distinct\", element = {e} }}"),
            PatternConstraint::PairwiseDisjointElements => "{ kind = \"disjoint\" }".to_string(),
            PatternConstraint::NotEqual(a, b) => format!(
                "{{ kind = \"not_equal\", first = [{}, {}], second = [{}, {}] }}",
                a.0, a.1, b.0, b.1
            ),
        })
        .collect();
    let _ = writeln!(out, "pattern = [\n  {},\n]", items.join(",\n  "));
}

/// Writes the task list back out in the document format. Shorthands are
/// emitted in their expanded predicate form.
pub fn print_spec(spec: &GlobalSpec) -> String {
    let mut out = String::new();
    for t in &spec.tasks {
        let _ = writeln!(out, "[[tasks]]\nname = {}\nkind = \"task\"\nc = {}", quote(&t.name), t.count);
        write_pattern(&mut out, &t.pattern);
        let _ = writeln!(out, "\n[tasks.formula]");
        write_formula(&mut out, "tasks.formula", &t.formula);
        out.push('\n');
    }
    for t in &spec.sync_tasks {
        let _ = writeln!(
            out,
            "[[tasks]]\nname = {}\nkind = \"sync\"\nc = {}\nwindow = [{}, {}]\nhold = {}",
            quote(&t.name),
            t.count,
            t.window.lo(),
            t.window.hi(),
            t.hold
        );
        write_pattern(&mut out, &t.pattern);
        let _ = writeln!(out, "\n[tasks.formula]");
        write_formula(&mut out, "tasks.formula", &t.formula);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Horizon;

    const HEADER: &str = r#"
[fleet]
capabilities = ["UV", "IR", "Vis"]
agents = [
  { id = 1, capabilities = ["Vis"], model = "double_integrator", x0 = [0.5, 4.5, 0.0, 0.0] },
  { id = 2, capabilities = ["Vis"], model = "double_integrator", x0 = [1.0, 4.5, 0.0, 0.0] },
]

[regions.C]
xmin = 3.0
xmax = 4.5
ymin = 3.5
ymax = 5.0
"#;

    #[test]
    fn sync_task_example() {
        let doc = format!(
            "{HEADER}
[[tasks]]
name = \"Phi_C\"
kind = \"sync\"
c = 2
window = [3, 7]
hold = 1
pattern = [
  {{ kind = \"capability\", element = 1, slot = 1, capability = \"Vis\" }},
  {{ kind = \"capability\", element = 2, slot = 1, capability = \"Vis\" }},
  {{ kind = \"not_equal\", first = [1, 1], second = [2, 1] }},
]
formula = {{ op = \"in\", slot = 1, region = \"C\" }}
"
        );
        let spec = parse_spec(&doc).unwrap();
        let t = &spec.sync_tasks[0];
        assert_eq!((t.window.lo(), t.window.hi(), t.hold, t.count), (3, 7, 1, 2));
        assert_eq!(t.pattern.len(), 3);
        assert_eq!(t.horizon(), 8);
    }

    #[test]
    fn globally_body_is_shifted() {
        let doc = r#"
[[tasks]]
name = "s"
kind = "sync"
window = [1, 4]
[tasks.formula]
op = "globally"
interval = [2, 5]
arg = { op = "pred", terms = [{ slot = 1, component = 0, coeff = 1.0 }], offset = -1.0 }
"#;
        let t = &parse_spec(doc).unwrap().sync_tasks[0];
        assert_eq!((t.window.lo(), t.window.hi(), t.hold), (3, 6, 3));
    }

    #[test]
    fn errors_report_positions() {
        let doc = "[[tasks]]\nname = \"t\"\nkind = \"task\"\nformula = { op = \"finally\", interval = [5, 2], arg = { op = \"pred\", terms = [{ slot = 1, component = 0, coeff = 1.0 }] } }\n";
        let e = parse_spec(doc).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("[5,2]"), "{e}");

        let e = parse_spec("[[tasks]]\nname = \"t\"\nkind = \n").unwrap_err();
        assert_eq!(e.line, 3);

        let neg = "[[tasks]]\nname = \"t\"\nkind = \"task\"\nformula = { op = \"globally\", interval = [-1, 2], arg = { op = \"pred\", terms = [{ slot = 1, component = 0, coeff = 1.0 }] } }\n";
        assert!(parse_spec(neg).is_err());
    }

    #[test]
    fn unknown_capability_is_rejected() {
        let doc = format!(
            "{HEADER}
[[tasks]]
name = \"t\"
kind = \"task\"
pattern = [{{ kind = \"capability\", element = 1, slot = 1, capability = \"Lidar\" }}]
formula = {{ op = \"in\", slot = 1, region = \"C\" }}
"
        );
        let e = parse_spec(&doc).unwrap_err();
        assert!(e.message.contains("Lidar"));
        assert_eq!(e.line, doc.lines().position(|l| l.contains("Lidar")).unwrap() + 1);
    }

    #[test]
    fn shorthand_expansion() {
        let doc = format!(
            "{HEADER}
[[tasks]]
name = \"col\"
kind = \"task\"
for_each = \"pair\"
formula = {{ op = \"globally\", interval = [0, 9], arg = {{ op = \"apart\", slots = [1, 2], dist = 0.05 }} }}
"
        );
        let spec = parse_spec(&doc).unwrap();
        assert_eq!(spec.tasks.len(), 1);
        assert_eq!(spec.tasks[0].name, "col[1,2]");
        let Formula::Globally(_, inner) = &spec.tasks[0].formula else { panic!() };
        let Formula::Or(ds) = inner.as_ref() else { panic!() };
        assert_eq!(ds.len(), 4);
    }

    #[test]
    fn printed_spec_reparses() {
        let doc = format!(
            "{HEADER}
[[tasks]]
name = \"a\"
kind = \"task\"
formula = {{ op = \"finally\", interval = [0, 7], arg = {{ op = \"globally\", interval = [0, 2], arg = {{ op = \"in\", slot = 1, region = \"C\" }} }} }}
pattern = [{{ kind = \"capability\", element = 1, slot = 1, capability = \"Vis\" }}]
"
        );
        let spec = parse_spec(&doc).unwrap();
        let printed = print_spec(&spec);
        assert_eq!(parse_spec(&printed).unwrap(), spec);
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}
