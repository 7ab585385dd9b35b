//! Static SVG charts. Values are drawn on an asinh scale since profiles
//! range from O(1) to O(1e11) across a sweep.

use crate::sweep::{SweepKind, SweepReport};
use std::fmt::Write;

const W: f64 = 420.0;
const H: f64 = 300.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 8] = ["#1b6ca8", "#d1495b", "#2a9d8f", "#e9a03b", "#6a4c93", "#3d405b", "#8ab17d", "#c05299"];

struct Panel {
    x0: f64,
    title: String,
    xlabel: String,
    ylabel: String,
    series: Vec<(String, Vec<(f64, f64)>)>,
    dots: bool,
}

fn bounds(series: &[(String, Vec<(f64, f64)>)]) -> Option<[f64; 4]> {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    if pts.is_empty() {
        return None;
    }
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for (x, y) in pts {
        b = [b[0].min(x), b[1].max(x), b[2].min(y), b[3].max(y)];
    }
    if b[1] == b[0] {
        b[0] -= 0.5;
        b[1] += 0.5;
    }
    if b[3] == b[2] {
        b[2] -= 0.5;
        b[3] += 0.5;
    }
    Some(b)
}

fn panel(out: &mut String, p: &Panel) {
    let (left, top) = (p.x0 + PAD, PAD);
    let (pw, ph) = (W - 1.5 * PAD, H - 2.0 * PAD);
    let _ = writeln!(out, r##"<g><rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>"##);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#, left + pw / 2.0, top - 14.0, p.title);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, left + pw / 2.0, top + ph + 32.0, p.xlabel);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
        p.x0 + 14.0,
        top + ph / 2.0,
        p.x0 + 14.0,
        top + ph / 2.0,
        p.ylabel
    );
    let Some(b) = bounds(&p.series) else {
        let _ = writeln!(out, "</g>");
        return;
    };
    let sx = |x: f64| left + (x - b[0]) / (b[1] - b[0]) * pw;
    let sy = |y: f64| top + ph - (y - b[2]) / (b[3] - b[2]) * ph;
    for (v, anchor, x, y) in [(b[0], "start", left, top + ph + 14.0), (b[1], "end", left + pw, top + ph + 14.0)] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" font-size="10" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (v, y) in [(b[2], top + ph), (b[3], top + 8.0)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" font-size="10" text-anchor="end">{v:.2}</text>"#, left - 4.0);
    }
    for (k, (name, pts)) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().filter(|q| q.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        if p.dots {
            for &(x, y) in pts.iter().filter(|q| q.1.is_finite()) {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
            }
        }
        if p.series.len() > 1 {
            let ly = top + 14.0 + 13.0 * k as f64;
            let _ = writeln!(out, r#"<text x="{}" y="{ly}" font-size="10" fill="{color}">{name}</text>"#, left + 6.0);
        }
    }
    let _ = writeln!(out, "</g>");
}

pub fn sweep_svg(report: &SweepReport) -> String {
    let profiles: Vec<(String, Vec<(f64, f64)>)> = report
        .runs
        .iter()
        .filter_map(|r| r.profile.as_ref().map(|p| (format!("s={}", r.s), p.x.iter().zip(&p.u).map(|(&x, &u)| (x, u.asinh())).collect())))
        .collect();
    let cf: Vec<(f64, f64)> = report.rows.iter().filter_map(|r| r.coincidence_fraction.map(|c| (r.s.log10(), c))).collect();
    let (label, ext): (&str, Vec<(f64, f64)>) = match report.kind {
        SweepKind::Stickiness => ("asinh(min u off A)", report.rows.iter().filter_map(|r| r.min_off_a.map(|m| (r.s.log10(), m.asinh()))).collect()),
        SweepKind::Detachment => ("asinh(min u on Omega)", report.runs.iter().filter_map(|r| r.min_on_omega.map(|m| (r.s.log10(), m.asinh()))).collect()),
    };
    let panels = [
        Panel { x0: 0.0, title: "profiles".into(), xlabel: "x".into(), ylabel: "asinh(u)".into(), series: profiles, dots: false },
        Panel {
            x0: W,
            title: "coincidence on A".into(),
            xlabel: "log10 s".into(),
            ylabel: "fraction".into(),
            series: vec![("coincidence".into(), cf)],
            dots: true,
        },
        Panel { x0: 2.0 * W, title: "extremum".into(), xlabel: "log10 s".into(), ylabel: label.into(), series: vec![("min".into(), ext)], dots: true },
    ];
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{H}" font-family="sans-serif">"#, 3.0 * W);
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    for p in &panels {
        panel(&mut out, p);
    }
    out.push_str("</svg>\n");
    out
}
