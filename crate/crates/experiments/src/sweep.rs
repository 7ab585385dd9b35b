//! s-sweeps of the obstacle problem and their trend assertions.

use crate::config::{Config, ConfigError};
use nlplateau::domain::{Domain1D, ObstacleRegion};
use nlplateau::geometry::FarField;
use nlplateau::kernel::Kernel;
use nlplateau::solver::{apriori_bounds_check, solve, AprioriRecord, ObstacleProblem, SolveOptions, SolveReport, SolveStatus};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("precondition: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Stickiness,
    Detachment,
}

/// One line of rows.csv.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub s: f64,
    pub coincidence_fraction: Option<f64>,
    pub min_off_a: Option<f64>,
    pub max_on_omega: Option<f64>,
    pub kkt_residual: Option<f64>,
    pub energy: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Obstacle profile (unscaled) on constrained nodes.
    pub psi: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Run {
    pub s: f64,
    pub status: Option<SolveStatus>,
    pub certified: bool,
    pub iterations: usize,
    pub min_on_omega: Option<f64>,
    pub apriori: Option<AprioriRecord>,
    pub error: Option<String>,
    #[serde(skip)]
    pub profile: Option<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Empirical thresholds: the largest tested `s` below which (on the tested
/// grid) the property holds for every order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    /// Stickiness: full coincidence on A. Detachment: no contact.
    pub contact: Option<f64>,
    /// `(k, s_k)`; stickiness uses `min_off_A <= -k`, detachment `min_Omega >= k`.
    pub levels: Vec<(f64, Option<f64>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub rows: Vec<Row>,
    pub runs: Vec<Run>,
    pub thresholds: Thresholds,
    pub assertions: Vec<Assertion>,
    pub alpha_bar: f64,
    pub alpha_lower: f64,
    pub k0: f64,
    pub k_levels: Vec<f64>,
    pub m: f64,
    pub h: f64,
    pub nodes: usize,
    pub window: f64,
    /// Max change over Omega of the first solve when the window doubles.
    pub window_change: Option<f64>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

fn problem(config: &Config, domain: Domain1D, s: f64) -> Result<ObstacleProblem, String> {
    let k = Kernel::new(config.kernel.n, s).map_err(|e| e.to_string())?;
    ObstacleProblem::new(k, domain, config.domain.h, config.exterior(), config.obstacle(), config.domain.m).map_err(|e| e.to_string())
}

pub fn solve_options(config: &Config) -> SolveOptions {
    SolveOptions { tol: config.sweep.tol, max_iters: config.sweep.max_iters, ..SolveOptions::default() }
}

/// Solves one problem of the configuration at order `s`.
pub fn solve_at(config: &Config, s: f64) -> Result<(ObstacleProblem, SolveReport), String> {
    let p = problem(config, config.domain().map_err(|e| e.to_string())?, s)?;
    let r = solve(&p, &solve_options(config)).map_err(|e| e.to_string())?;
    Ok((p, r))
}

fn profile(p: &ObstacleProblem, r: &SolveReport) -> Profile {
    let psi = r
        .x
        .iter()
        .zip(&r.lower)
        .map(|(&x, &l)| (l > f64::NEG_INFINITY).then(|| p.obstacle.psi.eval(x)))
        .collect();
    Profile { x: r.x.clone(), u: r.u.clone(), psi }
}

fn min_of(v: impl Iterator<Item = f64>) -> Option<f64> {
    v.fold(None, |m, x| Some(m.map_or(x, |m: f64| m.min(x))))
}

fn max_of(v: impl Iterator<Item = f64>) -> Option<f64> {
    v.fold(None, |m, x| Some(m.map_or(x, |m: f64| m.max(x))))
}

fn one_run(config: &Config, s: f64) -> (Row, Run) {
    let start = Instant::now();
    let out = solve_at(config, s);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Ok((p, r)) => {
            let has_a = p.obstacle.region != ObstacleRegion::Empty;
            let row = Row {
                s,
                coincidence_fraction: has_a.then(|| r.coincidence_fraction()),
                min_off_a: min_of(r.u.iter().zip(&r.lower).filter(|(_, l)| **l == f64::NEG_INFINITY).map(|(u, _)| *u)),
                max_on_omega: max_of(r.u.iter().copied()),
                kkt_residual: Some(r.kkt_residual),
                energy: Some(r.energy.total),
                wall_ms,
            };
            let run = Run {
                s,
                status: Some(r.status),
                certified: r.certified,
                iterations: r.iterations,
                min_on_omega: min_of(r.u.iter().copied()),
                apriori: Some(apriori_bounds_check(&r)),
                error: None,
                profile: Some(profile(&p, &r)),
            };
            (row, run)
        }
        Err(e) => (
            Row { s, coincidence_fraction: None, min_off_a: None, max_on_omega: None, kkt_residual: None, energy: None, wall_ms },
            Run { s, status: None, certified: false, iterations: 0, min_on_omega: None, apriori: None, error: Some(e), profile: None },
        ),
    }
}

/// Largest tested order from which on (towards smaller `s`) `ok` holds.
fn threshold(s: &[f64], ok: &[Option<bool>]) -> Option<f64> {
    let mut found = None;
    for (si, v) in s.iter().zip(ok).rev() {
        if *v == Some(true) {
            found = Some(*si);
        } else {
            break;
        }
    }
    found
}

fn monotone(name: &str, vals: &[(f64, Option<f64>)], up: bool, strict: bool) -> Assertion {
    let pts: Vec<(f64, f64)> = vals.iter().filter_map(|(s, v)| v.map(|v| (*s, v))).collect();
    let bad = pts.windows(2).find(|w| {
        let d = w[1].1 - w[0].1;
        let d = if up { d } else { -d };
        if strict {
            d <= 0.0
        } else {
            d < 0.0
        }
    });
    match bad {
        None => Assertion { name: name.into(), pass: true, detail: format!("{} values", pts.len()) },
        Some(w) => Assertion { name: name.into(), pass: false, detail: format!("s={} -> {}: {} -> {}", w[0].0, w[1].0, w[0].1, w[1].1) },
    }
}

fn common_assertions(runs: &[Run]) -> Vec<Assertion> {
    let infeasible: Vec<f64> = runs.iter().filter(|r| r.apriori.as_ref().is_some_and(|a| !a.psi_ok)).map(|r| r.s).collect();
    let over: Vec<String> = runs
        .iter()
        .filter(|r| r.certified && r.apriori.as_ref().is_some_and(|a| !a.bound_ok))
        .map(|r| {
            let a = r.apriori.as_ref().unwrap();
            format!("s={}: sup|u|={} > {}", r.s, a.sup_norm, a.bound)
        })
        .collect();
    let failed: Vec<String> = runs.iter().filter_map(|r| r.error.as_ref().map(|e| format!("s={}: {e}", r.s))).collect();
    vec![
        Assertion { name: "solves_completed".into(), pass: failed.is_empty(), detail: failed.join("; ") },
        Assertion { name: "feasible".into(), pass: infeasible.is_empty(), detail: format!("infeasible at {infeasible:?}") },
        Assertion { name: "apriori_bound".into(), pass: over.is_empty(), detail: over.join("; ") },
    ]
}

fn alpha_of(config: &Config) -> f64 {
    FarField::Subgraph { phi: config.exterior() }.angular_measure()
}

pub fn run_sweep(config: &Config, kind: SweepKind) -> Result<SweepReport, SweepError> {
    config.validate()?;
    let alpha = alpha_of(config);
    match kind {
        SweepKind::Stickiness if !config.sweep.certified_alpha && !(alpha < PI) => {
            return Err(SweepError::Precondition(format!("alpha_bar of the exterior subgraph is {alpha}, not below pi")));
        }
        SweepKind::Stickiness if config.obstacle().region == ObstacleRegion::Empty => {
            return Err(SweepError::Precondition("stickiness needs a nonempty obstacle region".into()));
        }
        SweepKind::Detachment if !config.sweep.certified_alpha && !(alpha > PI) => {
            return Err(SweepError::Precondition(format!("alpha_lower of the exterior subgraph is {alpha}, not above pi")));
        }
        _ => {}
    }
    let domain = config.domain()?;
    let k0 = config.k0()?;
    let k_levels = config.k_levels()?;
    let (m, h, nodes) = {
        let probe = problem(config, domain, 0.5).map_err(|e| SweepError::Config(ConfigError::Invalid(e)))?;
        (probe.m, probe.grid.h, probe.grid.cells + 1)
    };
    let out: Vec<(Row, Run)> = config.sweep.s_values.par_iter().map(|&s| one_run(config, s)).collect();
    let (rows, runs): (Vec<Row>, Vec<Run>) = out.into_iter().unzip();
    let s: Vec<f64> = rows.iter().map(|r| r.s).collect();
    let has_a = config.obstacle().region != ObstacleRegion::Empty;

    let mut assertions = common_assertions(&runs);
    let (contact, levels) = match kind {
        SweepKind::Stickiness => {
            let full: Vec<Option<bool>> = rows.iter().map(|r| r.coincidence_fraction.map(|c| c == 1.0)).collect();
            let levels = k_levels
                .iter()
                .map(|&k| (k, threshold(&s, &rows.iter().map(|r| r.min_off_a.map(|m| m <= -k)).collect::<Vec<_>>())))
                .collect();
            let cf: Vec<(f64, Option<f64>)> = rows.iter().map(|r| (r.s, r.coincidence_fraction)).collect();
            let mins: Vec<(f64, Option<f64>)> = rows.iter().map(|r| (r.s, r.min_off_a)).collect();
            assertions.push(monotone("coincidence_nondecreasing", &cf, true, false));
            let last = rows.last().and_then(|r| r.coincidence_fraction);
            assertions.push(Assertion {
                name: "full_coincidence_at_smallest_s".into(),
                pass: last == Some(1.0),
                detail: format!("{last:?}"),
            });
            assertions.push(monotone("min_off_a_nonincreasing", &mins, false, false));
            let tail = &mins[mins.len().saturating_sub(3)..];
            let mut strict = monotone("min_off_a_strictly_decreasing_last_three", tail, false, true);
            if tail.iter().filter(|p| p.1.is_some()).count() < 3 {
                strict.pass = mins.iter().all(|p| p.1.is_none()) && !mins.is_empty();
                strict.detail = "fewer than three values off A".into();
            }
            assertions.push(strict);
            (threshold(&s, &full), levels)
        }
        SweepKind::Detachment => {
            let none: Vec<Option<bool>> = rows.iter().map(|r| r.coincidence_fraction.map(|c| c == 0.0)).collect();
            let mins: Vec<(f64, Option<f64>)> = runs.iter().map(|r| (r.s, r.min_on_omega)).collect();
            let levels = k_levels
                .iter()
                .map(|&k| (k, threshold(&s, &runs.iter().map(|r| r.min_on_omega.map(|m| m >= k)).collect::<Vec<_>>())))
                .collect();
            assertions.push(monotone("min_on_omega_nondecreasing", &mins, true, false));
            let last = runs.last().and_then(|r| r.min_on_omega);
            for &k in &k_levels {
                assertions.push(Assertion {
                    name: format!("min_on_omega_at_least_{k}_at_smallest_s"),
                    pass: last.is_some_and(|m| m >= k),
                    detail: format!("{last:?}"),
                });
            }
            if has_a {
                let c = rows.last().and_then(|r| r.coincidence_fraction);
                assertions.push(Assertion { name: "no_contact_at_smallest_s".into(), pass: c == Some(0.0), detail: format!("{c:?}") });
            }
            (threshold(&s, &none), levels)
        }
    };

    let window_change = match (config.sweep.window_check, rows.first()) {
        (true, Some(first)) => {
            let wide = Domain1D::new(domain.a, domain.b, 2.0 * domain.w).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            let a = runs[0].profile.as_ref();
            let b = problem(config, wide, first.s).ok().and_then(|p| solve(&p, &solve_options(config)).ok());
            match (a, b) {
                (Some(a), Some(b)) => Some(a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)),
                _ => None,
            }
        }
        _ => None,
    };

    Ok(SweepReport {
        kind,
        rows,
        runs,
        thresholds: Thresholds { contact, levels },
        assertions,
        alpha_bar: alpha,
        alpha_lower: alpha,
        k0,
        k_levels,
        m,
        h,
        nodes,
        window: domain.w,
        window_change,
    })
}
