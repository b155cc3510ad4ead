//! CSV and SVG renderings of a run report.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;
use crate::run::RunReport;

const ENTRIES: [&str; 2] = ["delta", "omega"];

/// Header plus one row per grid time; 17 significant digits, `\n` line ends.
pub fn csv_string(report: &RunReport) -> String {
    let mut out = String::from("t,gap_delta,gap_omega");
    for b in &report.bounds {
        for e in ENTRIES {
            let _ = write!(out, ",{k}_lower_{e},{k}_upper_{e}", k = b.kind.name());
        }
    }
    out.push('\n');
    let n = if report.gap.is_empty() { 0 } else { report.grid.len() };
    for i in 0..n {
        let _ = write!(out, "{:.16e},{:.16e},{:.16e}", report.grid[i], report.gap[i][0], report.gap[i][1]);
        for b in &report.bounds {
            for k in 0..2 {
                let _ = write!(out, ",{:.16e},{:.16e}", b.lower(i, k), b.upper(i, k));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(report: &RunReport, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, csv_string(report)).map_err(|e| CliError::io(path, e))
}

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 320.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Maps data to pixels inside one panel.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    top: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        self.top + (self.y1 - y) / (self.y1 - self.y0) * (PANEL_H - TOP - BOTTOM)
    }
}

fn polyline(out: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str, dashed: bool, class: &str) {
    let _ = write!(out, r#"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="1.2""#);
    if dashed {
        out.push_str(r#" stroke-dasharray="6 3""#);
    }
    out.push_str(r#" points=""#);
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.4},{:.4}", f.px(*x), f.py(*y));
    }
    out.push_str("\"/>\n");
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Two stacked panels, δ gap then ω gap, each with the gap and every bound envelope.
pub fn svg_string(report: &RunReport) -> String {
    let height = 2.0 * PANEL_H;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{height}" fill="white"/>"#);
    let xs = &report.grid;
    let (t0, t1) = (xs[0], xs[xs.len() - 1]);
    let labels = ["δ gap (rad)", "ω gap (p.u.)"];
    for (k, label) in labels.iter().enumerate() {
        let top = k as f64 * PANEL_H + TOP;
        let gap = report.gap_entry(k);
        let mut series: Vec<(String, Vec<f64>, &str, bool)> = Vec::new();
        for (j, b) in report.bounds.iter().enumerate() {
            let c = COLORS[j % COLORS.len()];
            series.push((format!("{}-lower", b.kind.name()), b.lower_entry(k), c, true));
            series.push((format!("{}-upper", b.kind.name()), b.upper_entry(k), c, true));
        }
        let all = gap.iter().chain(series.iter().flat_map(|s| s.1.iter())).filter(|v| v.is_finite());
        let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !(lo.is_finite() && hi.is_finite()) {
            (lo, hi) = (-1.0, 1.0);
        }
        let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1e-12) };
        let f = Frame { x0: t0, x1: if t1 > t0 { t1 } else { t0 + 1.0 }, y0: lo - pad, y1: hi + pad, top };

        let (w, h) = (WIDTH - LEFT - RIGHT, PANEL_H - TOP - BOTTOM);
        let _ = writeln!(out, r##"<rect x="{LEFT}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#444"/>"##);
        for i in 0..=5 {
            let t = f.x0 + (f.x1 - f.x0) * i as f64 / 5.0;
            let (x, y) = (f.px(t), top + h);
            let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##, y + 4.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.3}</text>"#, y + 18.0);
        }
        for v in [f.y0, 0.5 * (f.y0 + f.y1), f.y1] {
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3e}</text>"#, LEFT - 6.0, f.py(v) + 4.0);
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t (s)</text>"#, LEFT + w / 2.0, top + h + 36.0);
        let _ = writeln!(
            out,
            r#"<text x="14" y="{y:.2}" text-anchor="middle" transform="rotate(-90 14 {y:.2})">{label}</text>"#,
            y = top + h / 2.0
        );
        let title = format!("{}: {}", report.scenario.name, label);
        let _ = writeln!(out, r#"<text x="{LEFT}" y="{:.2}">{}</text>"#, top - 10.0, escape(&title));

        if !gap.is_empty() {
            for (name, ys, color, dashed) in &series {
                polyline(&mut out, &f, xs, ys, color, *dashed, name);
            }
            polyline(&mut out, &f, xs, &gap, "#000000", false, "gap");
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(report: &RunReport, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, svg_string(report)).map_err(|e| CliError::io(path, e))
}

/// Writes `<name>.csv`, `<name>.summary.json` and, if asked, `<name>.svg` into `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path, svg: bool) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = &report.scenario.name;
    write_csv(report, &dir.join(format!("{name}.csv")))?;
    let summary = dir.join(format!("{name}.summary.json"));
    std::fs::write(&summary, report.summary_json() + "\n").map_err(|e| CliError::io(&summary, e))?;
    if svg {
        write_svg(report, &dir.join(format!("{name}.svg")))?;
    }
    Ok(())
}
