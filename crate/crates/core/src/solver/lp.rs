//! CPLEX-LP and free-MPS writers, plus an LP reader for the dialect written here.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use super::SolverError;
use crate::milp::{LinExpr, MilpModel, RowSense, VarId, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Lp,
    Mps,
}

impl ModelFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ModelFormat::Lp => "lp",
            ModelFormat::Mps => "mps",
        }
    }
}

const TERMS_PER_LINE: usize = 8;

/// 12 significant digits, shortest decimal form, no negative zero.
pub fn fmt_num(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

fn check_model(model: &MilpModel) -> Result<(), SolverError> {
    model.check().map_err(SolverError::Model)?;
    let mut seen = BTreeSet::new();
    for v in model.variables() {
        if !seen.insert(v.name.as_str()) {
            return Err(SolverError::Model(crate::milp::MilpError::NameCollision(v.name.clone())));
        }
    }
    for (i, r) in model.constraints().iter().enumerate() {
        if !r.rhs.is_finite() {
            return Err(SolverError::Model(crate::milp::MilpError::NonFinite(format!("row r{i}"))));
        }
    }
    Ok(())
}

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(VarId, f64)], indent: &str) {
    for (n, (v, c)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push('\n');
            out.push_str(indent);
        }
        let sign = if *c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", fmt_num(c.abs()), model.variable(*v).name);
    }
}

pub fn export_model(model: &MilpModel, format: ModelFormat) -> Result<String, SolverError> {
    check_model(model)?;
    Ok(match format {
        ModelFormat::Lp => write_lp(model),
        ModelFormat::Mps => write_mps(model),
    })
}

fn write_lp(model: &MilpModel) -> String {
    let mut out = String::from("Maximize\n obj:");
    let obj: Vec<(VarId, f64)> = model.objective().terms().collect();
    if obj.is_empty() && model.quadratic().is_empty() {
        if let Some(v) = model.variables().first() {
            let _ = write!(out, " 0 {}", v.name);
        }
    } else {
        write_terms(&mut out, model, &obj, "     ");
    }
    if !model.quadratic().is_empty() {
        out.push_str(" + [");
        for (a, b, c) in model.quadratic() {
            let sign = if *c < 0.0 { '-' } else { '+' };
            let (na, nb) = (&model.variable(*a).name, &model.variable(*b).name);
            let prod = if a == b { format!("{na} ^ 2") } else { format!("{na} * {nb}") };
            let _ = write!(out, " {sign} {} {prod}", fmt_num(2.0 * c.abs()));
        }
        out.push_str(" ] / 2");
    }
    out.push_str("\nSubject To\n");
    let mut used = vec![false; model.variables().len()];
    for (v, _) in model.objective().terms() {
        used[v.0] = true;
    }
    for (a, b, _) in model.quadratic() {
        used[a.0] = true;
        used[b.0] = true;
    }
    for (i, r) in model.constraints().iter().enumerate() {
        let _ = write!(out, " r{i}:");
        write_terms(&mut out, model, &r.terms, "     ");
        let _ = writeln!(out, " {} {}", r.sense.symbol(), fmt_num(r.rhs));
        for (v, _) in &r.terms {
            used[v.0] = true;
        }
    }
    let mut bounds = String::new();
    for (i, v) in model.variables().iter().enumerate() {
        let default = match v.kind {
            VarKind::Binary => v.lb == 0.0 && v.ub == 1.0,
            _ => v.lb == 0.0 && v.ub == f64::INFINITY,
        };
        if default && used[i] {
            continue;
        }
        let n = &v.name;
        let _ = match (v.lb, v.ub) {
            (lb, ub) if lb == ub => writeln!(bounds, " {n} = {}", fmt_num(lb)),
            (lb, ub) if lb == f64::NEG_INFINITY && ub == f64::INFINITY => writeln!(bounds, " {n} free"),
            (lb, ub) if lb == f64::NEG_INFINITY => writeln!(bounds, " -inf <= {n} <= {}", fmt_num(ub)),
            (lb, ub) if ub == f64::INFINITY => writeln!(bounds, " {n} >= {}", fmt_num(lb)),
            (lb, ub) => writeln!(bounds, " {} <= {n} <= {}", fmt_num(lb), fmt_num(ub)),
        };
    }
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        out.push_str(&bounds);
    }
    for (header, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        let names: Vec<&str> = model.variables().iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if !names.is_empty() {
            let _ = writeln!(out, "{header}");
            for chunk in names.chunks(TERMS_PER_LINE) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
    }
    out.push_str("End\n");
    out
}

fn write_mps(model: &MilpModel) -> String {
    let mut out = String::from("NAME gstl\nOBJSENSE\n    MAX\nROWS\n N  obj\n");
    for (i, r) in model.constraints().iter().enumerate() {
        let t = match r.sense {
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
            RowSense::Eq => 'E',
        };
        let _ = writeln!(out, " {t}  r{i}");
    }
    let mut columns: Vec<Vec<(String, f64)>> = vec![vec![]; model.variables().len()];
    for (v, c) in model.objective().terms() {
        columns[v.0].push(("obj".into(), c));
    }
    for (i, r) in model.constraints().iter().enumerate() {
        for (v, c) in &r.terms {
            columns[v.0].push((format!("r{i}"), *c));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (var, entries) in model.variables().iter().zip(&columns) {
        let int = var.kind != VarKind::Continuous;
        if int != in_int {
            let marker = if int { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER 'MARKER' '{marker}'");
            in_int = int;
        }
        if entries.is_empty() {
            let _ = writeln!(out, "    {} obj 0", var.name);
        }
        for (row, c) in entries {
            let _ = writeln!(out, "    {} {row} {}", var.name, fmt_num(*c));
        }
    }
    if in_int {
        out.push_str("    MARKER 'MARKER' 'INTEND'\n");
    }
    out.push_str("RHS\n");
    for (i, r) in model.constraints().iter().enumerate() {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    RHS r{i} {}", fmt_num(r.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for v in model.variables() {
        let n = &v.name;
        if v.kind == VarKind::Binary && v.lb == 0.0 && v.ub == 1.0 {
            let _ = writeln!(out, " BV BND {n}");
            continue;
        }
        if v.lb == v.ub {
            let _ = writeln!(out, " FX BND {n} {}", fmt_num(v.lb));
            continue;
        }
        match (v.lb == f64::NEG_INFINITY, v.ub == f64::INFINITY) {
            (true, true) => {
                let _ = writeln!(out, " FR BND {n}");
            }
            (true, false) => {
                let _ = writeln!(out, " MI BND {n}\n UP BND {n} {}", fmt_num(v.ub));
            }
            (false, ub_inf) => {
                if v.lb != 0.0 || v.kind != VarKind::Continuous {
                    let _ = writeln!(out, " LO BND {n} {}", fmt_num(v.lb));
                }
                if ub_inf {
                    if v.kind != VarKind::Continuous {
                        let _ = writeln!(out, " PL BND {n}");
                    }
                } else {
                    let _ = writeln!(out, " UP BND {n} {}", fmt_num(v.ub));
                }
            }
        }
    }
    if !model.quadratic().is_empty() {
        out.push_str("QUADOBJ\n");
        let mut q: Vec<(VarId, VarId, f64)> = Vec::new();
        for (a, b, c) in model.quadratic() {
            let (a, b) = if a <= b { (*a, *b) } else { (*b, *a) };
            // QUADOBJ stores the lower triangle of Q in ½xᵀQx.
            let coeff = if a == b { 2.0 * c } else { *c };
            q.push((a, b, coeff));
        }
        for (a, b, c) in q {
            let _ = writeln!(out, "    {} {} {}", model.variable(a).name, model.variable(b).name, fmt_num(c));
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(PartialEq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
}

fn section_of(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "maximize" | "maximise" | "max" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::Generals),
        _ => None,
    }
}

struct Reader {
    model: MilpModel,
    ids: HashMap<String, VarId>,
}

impl Reader {
    fn var(&mut self, name: &str) -> Result<VarId, SolverError> {
        if let Some(v) = self.ids.get(name) {
            return Ok(*v);
        }
        let v = self.model.continuous(name, 0.0, f64::INFINITY).map_err(SolverError::Model)?;
        self.ids.insert(name.to_string(), v);
        Ok(v)
    }

    fn linear(&mut self, tokens: &[&str]) -> Result<LinExpr, SolverError> {
        let mut e = LinExpr::default();
        let mut sign = 1.0;
        let mut coeff: Option<f64> = None;
        for t in tokens {
            match *t {
                "+" => sign = 1.0,
                "-" => sign = -1.0,
                _ => {
                    if let Ok(c) = t.parse::<f64>() {
                        coeff = Some(c);
                    } else {
                        let v = self.var(t)?;
                        e.add_term(v, sign * coeff.take().unwrap_or(1.0));
                        sign = 1.0;
                    }
                }
            }
        }
        if let Some(c) = coeff {
            e.constant += sign * c;
        }
        Ok(e)
    }
}

fn malformed(msg: impl Into<String>) -> SolverError {
    SolverError::Malformed(msg.into())
}

/// Reads an LP document in the dialect produced by [`export_model`].
pub fn parse_lp(text: &str) -> Result<MilpModel, SolverError> {
    let mut reader = Reader { model: MilpModel::new(), ids: HashMap::new() };
    let mut section: Option<Section> = None;
    let mut records: Vec<(Section, String)> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.eq_ignore_ascii_case("end") {
            break;
        }
        if let Some(s) = section_of(line) {
            section = Some(s);
            continue;
        }
        let s = section.as_ref().ok_or_else(|| malformed(format!("content before any section: {line}")))?;
        let starts_record = matches!(s, Section::Bounds | Section::Binaries | Section::Generals)
            || line.split_whitespace().next().is_some_and(|t| t.ends_with(':'));
        match records.last_mut() {
            Some((rs, body)) if !starts_record && rs == s => {
                body.push(' ');
                body.push_str(line);
            }
            _ => records.push((
                match s {
                    Section::Objective => Section::Objective,
                    Section::Constraints => Section::Constraints,
                    Section::Bounds => Section::Bounds,
                    Section::Binaries => Section::Binaries,
                    Section::Generals => Section::Generals,
                },
                line.to_string(),
            )),
        }
    }
    for (s, body) in records {
        let body = body.replace('[', " [ ").replace(']', " ] ").replace('^', " ^ ").replace('*', " * ");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match s {
            Section::Objective => {
                let rest = tokens.strip_prefix(&["obj:"][..]).unwrap_or(&tokens);
                let (lin, quad) = match rest.iter().position(|t| *t == "[") {
                    Some(i) => (&rest[..i], Some(&rest[i + 1..])),
                    None => (rest, None),
                };
                let lin: Vec<&str> = lin.iter().copied().filter(|t| *t != "+").collect();
                let mut obj = reader.linear(&lin)?;
                obj.constant = 0.0;
                reader.model.set_objective(obj);
                if let Some(q) = quad {
                    let end = q.iter().position(|t| *t == "]").ok_or_else(|| malformed("unclosed quadratic term"))?;
                    let mut sign = 1.0;
                    let mut i = 0;
                    let q = &q[..end];
                    while i < q.len() {
                        match q[i] {
                            "+" => sign = 1.0,
                            "-" => sign = -1.0,
                            c => {
                                let c: f64 = c.parse().map_err(|_| malformed(format!("bad coefficient {c}")))?;
                                let a = reader.var(q.get(i + 1).ok_or_else(|| malformed("truncated quadratic"))?)?;
                                let (b, step) = match q.get(i + 2) {
                                    Some(&"^") => (a, 4),
                                    Some(&"*") => (reader.var(q.get(i + 3).ok_or_else(|| malformed("truncated quadratic"))?)?, 4),
                                    _ => return Err(malformed("bad quadratic term")),
                                };
                                reader.model.add_quadratic(a, b, sign * c / 2.0);
                                i += step;
                                continue;
                            }
                        }
                        i += 1;
                    }
                }
            }
            Section::Constraints => {
                let rest = if tokens.first().is_some_and(|t| t.ends_with(':')) { &tokens[1..] } else { &tokens[..] };
                let op = rest
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "=" | "<" | ">" | "=<" | "=>"))
                    .ok_or_else(|| malformed(format!("row without comparison: {body}")))?;
                let sense = match rest[op] {
                    "<=" | "<" | "=<" => RowSense::Le,
                    ">=" | ">" | "=>" => RowSense::Ge,
                    _ => RowSense::Eq,
                };
                let lhs = reader.linear(&rest[..op])?;
                let rhs = reader.linear(&rest[op + 1..])?;
                if !rhs.is_constant() {
                    return Err(malformed(format!("variables on the right-hand side: {body}")));
                }
                reader.model.add_row(lhs, sense, rhs.constant).map_err(SolverError::Model)?;
            }
            Section::Bounds => {
                let num = |t: &str| -> Result<f64, SolverError> {
                    match t.to_ascii_lowercase().as_str() {
                        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                        _ => t.parse().map_err(|_| malformed(format!("bad bound {t}"))),
                    }
                };
                let (v, lb, ub) = match tokens.as_slice() {
                    [n, "free"] => (reader.var(n)?, f64::NEG_INFINITY, f64::INFINITY),
                    [n, "=", x] => {
                        let x = num(x)?;
                        (reader.var(n)?, x, x)
                    }
                    [n, ">=", x] => {
                        let v = reader.var(n)?;
                        (v, num(x)?, reader.model.variable(v).ub)
                    }
                    [n, "<=", x] => {
                        let v = reader.var(n)?;
                        (v, reader.model.variable(v).lb, num(x)?)
                    }
                    [lo, "<=", n, "<=", hi] => (reader.var(n)?, num(lo)?, num(hi)?),
                    _ => return Err(malformed(format!("bad bound line: {body}"))),
                };
                reader.model.set_bounds(v, lb, ub).map_err(SolverError::Model)?;
            }
            Section::Binaries | Section::Generals => {
                for n in tokens {
                    let v = reader.var(n)?;
                    reader.model.retype(v, if s == Section::Binaries { VarKind::Binary } else { VarKind::Integer });
                }
            }
        }
    }
    Ok(reader.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var() -> MilpModel {
        let mut m = MilpModel::new();
        let x = m.continuous("x", 0.0, f64::INFINITY).unwrap();
        m.le(x, 3.0).unwrap();
        m.set_objective(x.into());
        m
    }

    #[test]
    fn golden_single_variable() {
        let text = export_model(&one_var(), ModelFormat::Lp).unwrap();
        assert_eq!(text, "Maximize\n obj: + 1 x\nSubject To\n r0: + 1 x <= 3\nEnd\n");
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(3.0), "3");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(0.05), "0.05");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(5.0001), "5.0001");
        assert_eq!(fmt_num(-1e-5), "-0.00001");
    }

    fn mixed() -> MilpModel {
        let mut m = MilpModel::new();
        let x = m.continuous("x_p1_k0_0", -2.0, 2.0).unwrap();
        let y = m.binary("y_a_b0").unwrap();
        let z = m.add_var("z", VarKind::Integer, 0.0, 7.0).unwrap();
        let f = m.continuous("fixed", 1.5, 1.5).unwrap();
        let _lonely = m.continuous("lonely", 0.0, f64::INFINITY).unwrap();
        let free = m.continuous("free", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let terms: Vec<LinExpr> = (0..20).map(|i| LinExpr::term(if i % 2 == 0 { x } else { z }, 0.1 * i as f64)).collect();
        m.le(LinExpr::sum(terms) + LinExpr::var(y), 4.25).unwrap();
        m.ge(LinExpr::var(f) - LinExpr::term(free, 2.0), -1.0).unwrap();
        m.eq(LinExpr::var(z) + y.into(), 3.0).unwrap();
        m.set_objective(LinExpr::var(z) - LinExpr::term(y, 0.05));
        m
    }

    #[test]
    fn lp_round_trip_preserves_matrix() {
        let m = mixed();
        let text = export_model(&m, ModelFormat::Lp).unwrap();
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.variables().len(), m.variables().len());
        assert_eq!(back.constraints().len(), m.constraints().len());
        for (a, b) in m.constraints().iter().zip(back.constraints()) {
            let names = |model: &MilpModel, r: &crate::milp::Constraint| {
                let mut t: Vec<(String, String)> =
                    r.terms.iter().map(|(v, c)| (model.variable(*v).name.clone(), fmt_num(*c))).collect();
                t.sort();
                t
            };
            assert_eq!(names(&m, a), names(&back, b));
            assert_eq!((a.sense, fmt_num(a.rhs)), (b.sense, fmt_num(b.rhs)));
        }
        for v in m.variables() {
            let w = back.variable(back.id(&v.name).unwrap());
            assert_eq!((v.kind, v.lb, v.ub), (w.kind, w.lb, w.ub), "{}", v.name);
        }
        assert_eq!(export_model(&back, ModelFormat::Lp).unwrap().len(), text.len());
    }

    #[test]
    fn exports_are_deterministic() {
        for f in [ModelFormat::Lp, ModelFormat::Mps] {
            assert_eq!(export_model(&mixed(), f).unwrap(), export_model(&mixed(), f).unwrap());
        }
    }

    #[test]
    fn quadratic_objective_round_trip() {
        let mut m = MilpModel::new();
        let u = m.continuous("u", -1.0, 1.0).unwrap();
        let v = m.continuous("v", -1.0, 1.0).unwrap();
        m.le(LinExpr::var(u) + v.into(), 1.0).unwrap();
        m.add_quadratic(u, u, -0.05);
        m.add_quadratic(u, v, 0.5);
        let text = export_model(&m, ModelFormat::Lp).unwrap();
        assert!(text.contains("[ - 0.1 u ^ 2 + 1 u * v ] / 2"), "{text}");
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.quadratic(), m.quadratic());
    }

    #[test]
    fn mps_sections() {
        let text = export_model(&mixed(), ModelFormat::Mps).unwrap();
        for needle in ["OBJSENSE\n    MAX", " BV BND y_a_b0", " FX BND fixed 1.5", " FR BND free", "MARKER 'MARKER' 'INTORG'", "    lonely obj 0", "ENDATA"] {
            assert!(text.contains(needle), "missing {needle:?} in\n{text}");
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = one_var();
        let x = m.id("x").unwrap();
        m.set_objective(LinExpr::term(x, f64::NAN));
        assert!(export_model(&m, ModelFormat::Lp).is_err());
    }
}
