//! Readers for the solution files written by common MILP solvers.

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use super::{SolveStatus, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionFormat {
    /// `name value` lines; `# status: <s>` and `# objective: <v>` comments.
    Plain,
    /// Gurobi-style `.sol`: `# Objective value = v` then `name value`.
    Sol,
    /// CBC `solu` output: a status line then `index name value reduced-cost`.
    Cbc,
    /// HiGHS raw solution file.
    Highs,
    /// CPLEX XML solution.
    CplexXml,
}

impl SolutionFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SolutionFormat::CplexXml => "xml",
            SolutionFormat::Sol => "sol",
            _ => "txt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedSolution {
    /// `None` when the file does not state a status.
    pub status: Option<SolveStatus>,
    pub objective: Option<f64>,
    pub values: Vec<(String, f64)>,
}

fn bad(msg: impl Into<String>) -> SolverError {
    SolverError::Malformed(msg.into())
}

fn number(s: &str) -> Result<f64, SolverError> {
    s.trim().parse().map_err(|_| bad(format!("expected a number, found {s:?}")))
}

/// Maps free-form status words from solver output onto [`SolveStatus`].
pub fn status_from_text(text: &str) -> Option<SolveStatus> {
    let t = text.to_ascii_lowercase();
    if t.contains("time") && (t.contains("limit") || t.contains("stopped")) || t.contains("stopped on time") {
        Some(SolveStatus::Timeout)
    } else if t.contains("infeasible") {
        Some(SolveStatus::Infeasible)
    } else if t.contains("unbounded") {
        Some(SolveStatus::Unbounded)
    } else if t.contains("optimal") {
        Some(SolveStatus::Optimal)
    } else if t.contains("feasible") {
        Some(SolveStatus::Feasible)
    } else if t.contains("error") || t.contains("abort") {
        Some(SolveStatus::Error)
    } else {
        None
    }
}

pub fn parse_solution(text: &str, format: SolutionFormat) -> Result<ParsedSolution, SolverError> {
    match format {
        SolutionFormat::Plain => parse_plain(text),
        SolutionFormat::Sol => parse_sol(text),
        SolutionFormat::Cbc => parse_cbc(text),
        SolutionFormat::Highs => parse_highs(text),
        SolutionFormat::CplexXml => parse_cplex_xml(text),
    }
}

fn name_value(line: &str) -> Result<(String, f64), SolverError> {
    let mut it = line.split_whitespace();
    match (it.next(), it.next()) {
        (Some(n), Some(v)) => Ok((n.to_string(), number(v)?)),
        _ => Err(bad(format!("expected `name value`, found {line:?}"))),
    }
}

fn parse_plain(text: &str) -> Result<ParsedSolution, SolverError> {
    let mut out = ParsedSolution::default();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(c) = line.strip_prefix('#') {
            let c = c.trim();
            if let Some(s) = c.strip_prefix("status:") {
                out.status = Some(status_from_text(s).ok_or_else(|| bad(format!("unknown status {s:?}")))?);
            } else if let Some(v) = c.strip_prefix("objective:") {
                out.objective = Some(number(v)?);
            }
            continue;
        }
        out.values.push(name_value(line)?);
    }
    Ok(out)
}

fn parse_sol(text: &str) -> Result<ParsedSolution, SolverError> {
    let mut out = ParsedSolution::default();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(c) = line.strip_prefix('#') {
            if let Some((_, v)) = c.split_once('=') {
                if c.to_ascii_lowercase().contains("objective") {
                    out.objective = Some(number(v)?);
                }
            }
            continue;
        }
        out.values.push(name_value(line)?);
    }
    Ok(out)
}

fn parse_cbc(text: &str) -> Result<ParsedSolution, SolverError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty CBC solution"))?;
    let mut out = ParsedSolution { status: status_from_text(header), ..Default::default() };
    if let Some((_, v)) = header.split_once("objective value") {
        out.objective = v.split_whitespace().next().map(number).transpose()?;
    }
    for line in lines {
        let line = line.trim().trim_start_matches("**").trim();
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 3 {
            return Err(bad(format!("short CBC row {line:?}")));
        }
        out.values.push((cols[1].to_string(), number(cols[2])?));
    }
    Ok(out)
}

fn parse_highs(text: &str) -> Result<ParsedSolution, SolverError> {
    let mut out = ParsedSolution::default();
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let mut i = 0;
    while i < lines.len() {
        let l = lines[i];
        if l.eq_ignore_ascii_case("model status") {
            let s = lines.get(i + 1).copied().unwrap_or("");
            out.status = status_from_text(s).or(Some(SolveStatus::Error));
            i += 2;
            continue;
        }
        if let Some(v) = l.strip_prefix("Objective ") {
            out.objective = Some(number(v)?);
        }
        if let Some(n) = l.strip_prefix("# Columns ") {
            let n: usize = n.trim().parse().map_err(|_| bad(format!("bad column count {n:?}")))?;
            for k in 0..n {
                let row = lines.get(i + 1 + k).ok_or_else(|| bad("truncated column section"))?;
                out.values.push(name_value(row)?);
            }
            i += n + 1;
            continue;
        }
        if l.starts_with("# Dual") {
            break;
        }
        i += 1;
    }
    Ok(out)
}

fn parse_cplex_xml(text: &str) -> Result<ParsedSolution, SolverError> {
    let mut out = ParsedSolution::default();
    let mut reader = Reader::from_str(text);
    loop {
        match reader.read_event().map_err(|e| bad(format!("XML: {e}")))? {
            Event::Eof => break,
            Event::Start(e) | Event::Empty(e) => {
                let tag = e.name().as_ref().to_vec();
                let mut attrs = std::collections::HashMap::new();
                for a in e.attributes() {
                    let a = a.map_err(|e| bad(format!("XML attribute: {e}")))?;
                    let v = a.unescape_value().map_err(|e| bad(format!("XML value: {e}")))?;
                    attrs.insert(String::from_utf8_lossy(a.key.as_ref()).into_owned(), v.into_owned());
                }
                match tag.as_slice() {
                    b"header" => {
                        if let Some(s) = attrs.get("solutionStatusString") {
                            out.status = status_from_text(s);
                        }
                        if let Some(v) = attrs.get("objectiveValue") {
                            out.objective = Some(number(v)?);
                        }
                    }
                    b"variable" => {
                        let name = attrs.get("name").ok_or_else(|| bad("variable without name"))?;
                        let value = attrs.get("value").ok_or_else(|| bad("variable without value"))?;
                        out.values.push((name.clone(), number(value)?));
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }
    Ok(out)
}
