use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dynamics::TeamTrajectory;
use crate::spec::Region;

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const SCALE: f64 = 80.0;
const PAD: f64 = 30.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Planar points of one trajectory: the first two state components, or
/// `(k, x)` for scalar states.
fn points(team: &TeamTrajectory, i: usize) -> Vec<(f64, f64)> {
    let t = &team.agents()[i];
    t.states()
        .iter()
        .enumerate()
        .map(|(k, x)| if x.len() >= 2 { (x[0], x[1]) } else { (k as f64, x.first().copied().unwrap_or(0.0)) })
        .collect()
}

/// Overhead view: regions as labelled rectangles, one polyline per agent with
/// a marker at every step.
pub fn render_svg(regions: &BTreeMap<String, Region>, team: &TeamTrajectory, title: &str) -> String {
    let paths: Vec<Vec<(f64, f64)>> = (0..team.len()).map(|i| points(team, i)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in regions.values() {
        x0 = x0.min(r.xmin);
        x1 = x1.max(r.xmax);
        y0 = y0.min(r.ymin);
        y1 = y1.max(r.ymax);
    }
    for (x, y) in paths.iter().flatten() {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (w, h) = ((x1 - x0).max(1e-9) * SCALE + 2.0 * PAD, (y1 - y0).max(1e-9) * SCALE + 2.0 * PAD + 20.0);
    let px = |x: f64| PAD + (x - x0) * SCALE;
    let py = |y: f64| h - PAD - (y - y0) * SCALE;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{PAD}" y="18" font-size="14">{}</text>"#, escape(title));
    for (name, r) in regions {
        let fill = if name.to_ascii_lowercase().starts_with("obs") { "#999999" } else { "#a6d96a" };
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" fill-opacity="0.35" stroke="#555" stroke-width="1"><title>{}</title></rect>"##,
            px(r.xmin),
            py(r.ymax),
            (r.xmax - r.xmin) * SCALE,
            (r.ymax - r.ymin) * SCALE,
            escape(name)
        );
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" fill="#333">{}</text>"##, px(r.xmin) + 3.0, py(r.ymax) + 12.0, escape(name));
    }
    for (i, path) in paths.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = path.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(out, r#"<g id="agent{}">"#, i + 1);
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for (k, (x, y)) in path.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"><title>agent {} k={k}</title></circle>"#,
                px(*x),
                py(*y),
                i + 1
            );
        }
        if let Some((x, y)) = path.first() {
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#, px(*x) + 4.0, py(*y) - 4.0, i + 1);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
