//! Report files: rows.csv, profile_<s>.csv, manifest.json, plots.svg.

use crate::config::Config;
use crate::plot;
use crate::sweep::{Row, SweepReport};
use serde_json::json;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("cannot write {path}: {msg}")]
pub struct EmitError {
    pub path: PathBuf,
    pub msg: String,
}

fn err(path: &Path, e: impl std::fmt::Display) -> EmitError {
    EmitError { path: path.to_path_buf(), msg: e.to_string() }
}

pub const ROW_HEADER: [&str; 7] = ["s", "coincidence_fraction", "min_off_A", "max_on_Omega", "kkt_residual", "energy", "wall_ms"];

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

pub fn profile_name(s: f64) -> String {
    format!("profile_{s}.csv")
}

/// rows.csv; wall times are left blank unless `wall_clock`, so that equal
/// configurations give equal bytes.
pub fn write_rows(rows: &[Row], path: &Path, wall_clock: bool) -> Result<(), EmitError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| err(path, e))?;
    w.write_record(ROW_HEADER).map_err(|e| err(path, e))?;
    for r in rows {
        let wall = if wall_clock { format!("{:.0}", r.wall_ms) } else { String::new() };
        w.write_record([
            format!("{}", r.s),
            cell(r.coincidence_fraction),
            cell(r.min_off_a),
            cell(r.max_on_omega),
            cell(r.kkt_residual),
            cell(r.energy),
            wall,
        ])
        .map_err(|e| err(path, e))?;
    }
    w.flush().map_err(|e| err(path, e))
}

pub fn write_profile(p: &crate::sweep::Profile, path: &Path) -> Result<(), EmitError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| err(path, e))?;
    w.write_record(["x", "u", "psi"]).map_err(|e| err(path, e))?;
    for ((x, u), psi) in p.x.iter().zip(&p.u).zip(&p.psi) {
        w.write_record([format!("{x}"), format!("{u}"), cell(*psi)]).map_err(|e| err(path, e))?;
    }
    w.flush().map_err(|e| err(path, e))
}

pub fn manifest(report: &SweepReport, config: &Config) -> serde_json::Value {
    let runs: Vec<_> = report
        .runs
        .iter()
        .zip(&report.rows)
        .map(|(r, row)| {
            json!({
                "s": r.s,
                "status": r.status,
                "certified": r.certified,
                "iterations": r.iterations,
                "min_on_omega": r.min_on_omega,
                "apriori": r.apriori,
                "error": r.error,
                "wall_ms": row.wall_ms,
                "profile": r.profile.as_ref().map(|_| profile_name(r.s)),
            })
        })
        .collect();
    json!({
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "library": { "name": "nlplateau", "version": nlplateau::VERSION },
        "kind": report.kind,
        "config": config,
        "grid": {
            "h": report.h,
            "nodes": report.nodes,
            "window": report.window,
            "truncation_m": report.m,
        },
        "tolerances": {
            "kkt": config.sweep.tol,
            "max_iters": config.sweep.max_iters,
            "apriori_slack": 1e-8,
        },
        "alpha_bar": report.alpha_bar,
        "alpha_lower": report.alpha_lower,
        "k0": report.k0,
        "k_levels": report.k_levels,
        "thresholds": report.thresholds,
        "assertions": report.assertions,
        "window_change": report.window_change,
        "runs": runs,
        "assumptions": [
            "a carved region with C^2 boundary is assumed, not verified, when psi is user supplied",
            "thresholds are over the tested s grid only",
        ],
    })
}

/// Writes every report file into `dir` and returns their paths.
pub fn emit_report(report: &SweepReport, config: &Config, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    std::fs::create_dir_all(dir).map_err(|e| err(dir, e))?;
    let mut files = Vec::new();
    let rows = dir.join("rows.csv");
    write_rows(&report.rows, &rows, config.output.wall_clock)?;
    files.push(rows);
    if config.output.profiles {
        for r in &report.runs {
            if let Some(p) = &r.profile {
                let path = dir.join(profile_name(r.s));
                write_profile(p, &path)?;
                files.push(path);
            }
        }
    }
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest(report, config)).map_err(|e| err(&path, e))?;
    std::fs::write(&path, text + "\n").map_err(|e| err(&path, e))?;
    files.push(path);
    let path = dir.join("plots.svg");
    std::fs::write(&path, plot::sweep_svg(report)).map_err(|e| err(&path, e))?;
    files.push(path);
    Ok(files)
}
