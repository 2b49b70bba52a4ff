//! Static SVG charts.

use std::f64::consts::PI;
use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const W: f64 = 640.0;
const H: f64 = 420.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
"#,
        W / 2.0,
        escape(title)
    );
}

fn legend(out: &mut String, names: &[&str], x: f64) {
    for (i, name) in names.iter().enumerate() {
        let y = 48.0 + 18.0 * i as f64;
        let c = PALETTE[i % PALETTE.len()];
        let _ = writeln!(out, r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{c}"/>"#, y - 10.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, x + 18.0, escape(name));
    }
}

/// Line chart of several `(x, y)` series with `y` in `[0, 1]`.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (left, right, top, bottom) = (60.0, W - 150.0, 40.0, H - 50.0);
    let x_max = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.0))
        .fold(1.0_f64, f64::max);
    let sx = |x: f64| left + (right - left) * x / x_max;
    let sy = |y: f64| bottom - (bottom - top) * y.clamp(0.0, 1.0);
    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(out, r##"<g stroke="#444" fill="none"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/></g>"##);
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let _ = writeln!(out, r##"<line x1="{left}" y1="{y:.1}" x2="{right}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"##, left - 6.0, sy(v) + 4.0, y = sy(v));
    }
    for k in 0..=4 {
        let v = x_max * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.0}</text>"#, sx(v), bottom + 16.0);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (left + right) / 2.0, H - 14.0, escape(x_label));
    let _ = writeln!(out, r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#, (top + bottom) / 2.0, (top + bottom) / 2.0, escape(y_label));
    for (i, (_, pts)) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, path.join(" "));
    }
    let names: Vec<&str> = series.iter().map(|s| s.0.as_str()).collect();
    legend(&mut out, &names, right + 16.0);
    out.push_str("</svg>\n");
    out
}

/// Radar chart over named axes with values in `[0, 1]`.
pub fn radar_chart(title: &str, axes: &[&str], series: &[(String, Vec<f64>)]) -> String {
    let (cx, cy, r) = (250.0, H / 2.0 + 10.0, 150.0);
    let n = axes.len().max(1);
    let at = |k: usize, v: f64| {
        let a = -PI / 2.0 + 2.0 * PI * k as f64 / n as f64;
        (cx + r * v.clamp(0.0, 1.0) * a.cos(), cy + r * v.clamp(0.0, 1.0) * a.sin())
    };
    let mut out = String::new();
    header(&mut out, title);
    for ring in 1..=4 {
        let v = ring as f64 / 4.0;
        let pts: Vec<String> = (0..n).map(|k| { let (x, y) = at(k, v); format!("{x:.1},{y:.1}") }).collect();
        let _ = writeln!(out, r##"<polygon points="{}" fill="none" stroke="#ddd"/>"##, pts.join(" "));
    }
    for (k, name) in axes.iter().enumerate() {
        let (x, y) = at(k, 1.0);
        let (lx, ly) = at(k, 1.12);
        let _ = writeln!(out, r##"<line x1="{cx}" y1="{cy}" x2="{x:.1}" y2="{y:.1}" stroke="#aaa"/><text x="{lx:.1}" y="{:.1}" text-anchor="middle">{}</text>"##, ly + 4.0, escape(name));
    }
    for (i, (_, vals)) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = vals.iter().enumerate().map(|(k, &v)| { let (x, y) = at(k, v); format!("{x:.1},{y:.1}") }).collect();
        let _ = writeln!(out, r#"<polygon points="{}" fill="{c}" fill-opacity="0.12" stroke="{c}" stroke-width="2"/>"#, pts.join(" "));
    }
    let names: Vec<&str> = series.iter().map(|s| s.0.as_str()).collect();
    legend(&mut out, &names, 470.0);
    out.push_str("</svg>\n");
    out
}
