//! The acceptance suites, numbered 1 to 13. Each returns one [`Outcome`];
//! `check` on the command line and the acceptance test both print them.

use crate::config::Config;
use crate::emit;
use crate::sweep::{run_sweep, SweepKind, SweepReport};
use nlplateau::domain::{Domain1D, ExteriorData, ObstacleRegion, ObstacleSpec, Psi};
use nlplateau::functional::{Basis, Discretization, QuadOptions};
use nlplateau::geometry::*;
use nlplateau::kernel::Kernel;
use nlplateau::solver::{solve, ObstacleProblem, SolveOptions};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const STICKINESS: &str = include_str!("../configs/stickiness.toml");
pub const STICKINESS_EPS0: &str = include_str!("../configs/stickiness_eps0.toml");
pub const DETACHMENT: &str = include_str!("../configs/detachment.toml");

pub const NAMES: [&str; 13] = [
    "kernel identities",
    "gradient consistency",
    "brute-force oracle",
    "a priori bound",
    "alpha exact values",
    "curvature limits",
    "positive-curvature bound",
    "rearrangement inequality",
    "equivalence offset",
    "stickiness sweep",
    "detachment sweep",
    "appendix constructions",
    "determinism",
];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{:>2}] {} ({:.1} s): {}", self.id, self.name, self.seconds, self.detail)
    }
}

/// Shared state: the seed, an output directory and the sweeps already run.
pub struct Suite {
    pub seed: u64,
    pub out: PathBuf,
    sweeps: BTreeMap<&'static str, SweepReport>,
}

impl Suite {
    pub fn new(seed: u64, out: PathBuf) -> Self {
        Suite { seed, out, sweeps: BTreeMap::new() }
    }

    /// Sweeps run so far, by configuration name.
    pub fn sweeps(&self) -> &BTreeMap<&'static str, SweepReport> {
        &self.sweeps
    }

    fn rng(&self, id: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (id as u64) << 32)
    }

    fn config(&self, name: &'static str) -> Result<Config, String> {
        let text = match name {
            "stickiness" => STICKINESS,
            "stickiness_eps0" => STICKINESS_EPS0,
            _ => DETACHMENT,
        };
        let mut c = Config::from_toml(text, Path::new(name)).map_err(|e| e.to_string())?;
        c.output.dir = self.out.join(name);
        Ok(c)
    }

    /// Runs (once) and emits one of the default sweeps.
    fn sweep(&mut self, name: &'static str) -> Result<&SweepReport, String> {
        if !self.sweeps.contains_key(name) {
            let c = self.config(name)?;
            let kind = if name == "detachment" { SweepKind::Detachment } else { SweepKind::Stickiness };
            let r = run_sweep(&c, kind).map_err(|e| e.to_string())?;
            emit::emit_report(&r, &c, &c.output.dir).map_err(|e| e.to_string())?;
            self.sweeps.insert(name, r);
        }
        Ok(&self.sweeps[name])
    }
}

type Check = Result<(bool, String), String>;

pub fn run_criterion(id: u8, suite: &mut Suite) -> Outcome {
    let start = Instant::now();
    let res = match id {
        1 => kernel_identities(),
        2 => gradient_consistency(suite),
        3 => brute_force(),
        4 => apriori(suite),
        5 => alpha_values(),
        6 => curvature_limits(),
        7 => positive_curvature(),
        8 => rearrangement(suite),
        9 => equivalence(suite),
        10 => stickiness(suite),
        11 => detachment(suite),
        12 => appendix(),
        13 => determinism(suite),
        _ => Err(format!("no criterion {id}")),
    };
    let (pass, detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
    let name = NAMES.get((id as usize).wrapping_sub(1)).copied().unwrap_or("unknown");
    Outcome { id, name, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

fn kernel_identities() -> Check {
    let grid: Vec<f64> = (0..1000).map(|i| -50.0 + 100.0 * i as f64 / 999.0).collect();
    let mut worst = [0.0f64; 3];
    let mut bad = Vec::new();
    for s in [0.02, 0.3, 0.5, 0.95] {
        let k = Kernel::new(1, s).map_err(err)?;
        let (lam, lam_small) = (k.big_lambda(), k.spec().lambda_small);
        for (i, &t) in grid.iter().enumerate() {
            let sym = [
                (k.g(t) - k.g(-t)).abs(),
                (k.G(t) + k.G(-t)).abs(),
                (k.GG(t) - k.GG(-t)).abs(),
                (k.gbar(t) + k.gbar(-t) - 2.0 * lam).abs(),
            ];
            worst[0] = sym.iter().fold(worst[0], |a, b| a.max(*b));
            let a = t.abs();
            let lip = [
                k.G(t).abs() - lam,
                k.GG(t) - lam * a,
                lam * a - lam_small - k.GG(t),
                (k.g(t) - 1.0).max(-k.g(t)),
                k.gbar(t) - 2.0 * lam,
                -k.gbar(t),
            ];
            if let Some(j) = grid.get(i + 1) {
                let d = j - t;
                let lipschitz = [(k.G(*j) - k.G(t)).abs() - d, (k.GG(*j) - k.GG(t)).abs() - lam * d];
                worst[1] = lipschitz.iter().chain(&lip).fold(worst[1], |a, b| a.max(*b));
            } else {
                worst[1] = lip.iter().fold(worst[1], |a, b| a.max(*b));
            }
            if i > 0 && i + 1 < grid.len() {
                // midpoint convexity of GG on the uniform grid
                let c = 0.5 * (k.GG(grid[i - 1]) + k.GG(grid[i + 1])) - k.GG(t);
                worst[1] = worst[1].max(-c);
            }
            if a > 1e-3 {
                let e = 1e-5 * (1.0 + a);
                let dgg = (k.GG(t + e) - k.GG(t - e)) / (2.0 * e);
                let dg = (k.G(t + e) - k.G(t - e)) / (2.0 * e);
                let r = ((dgg - k.G(t)) / k.G(t)).abs().max(((dg - k.g(t)) / k.g(t)).abs());
                worst[2] = worst[2].max(r);
                if r > 1e-6 {
                    bad.push(format!("s={s} t={t}"));
                }
            }
        }
    }
    let pass = worst[0] <= 1e-9 && worst[1] <= 1e-9 && worst[2] <= 1e-6;
    Ok((pass, format!("symmetry {:.1e}, bounds/convexity {:.1e}, derivative chain {:.1e} {}", worst[0], worst[1], worst[2], bad.join(" "))))
}

fn gradient_consistency(suite: &Suite) -> Check {
    let mut rng = suite.rng(2);
    let phi = ExteriorData::Cone { c: 0.0, m: 0.0, kappa: 2.0 };
    let omega = Domain1D::new(-1.0, 1.0, 20.0).map_err(err)?;
    let mut worst = 0.0f64;
    for s in [0.3, 0.7] {
        let k = Kernel::new(1, s).map_err(err)?;
        let d = Discretization::new(&k, &omega, 1.0 / 32.0, &phi, 0.0, Basis::Linear, QuadOptions::default()).map_err(err)?;
        let n = d.unknowns();
        for _ in 0..20 {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t = 1e-5;
            let up: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + t * b).collect();
            let um: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - t * b).collect();
            let fd = (d.energy(&up).map_err(err)?.total - d.energy(&um).map_err(err)?.total) / (2.0 * t);
            let pr = d.pairing(&u, &v).map_err(err)?;
            worst = worst.max((fd - pr).abs() / pr.abs());
        }
    }
    Ok((worst <= 1e-6, format!("max relative gap {worst:.2e} over 40 pairs")))
}

// Every energy term but the interior one couples neighbouring nodes only, so
// on a chain it is `sum_e f_e(u_e, u_e+1) - sum_inner f_i(u_i)`.
struct ChainEnergy {
    edges: Vec<Vec<f64>>,
    nodes: Vec<Vec<f64>>,
}

impl ChainEnergy {
    fn new(d: &Discretization, levels: &[f64], n: usize) -> Result<Self, String> {
        let rest = |u: &[f64]| d.energy(u).map(|e| e.total - e.interior).map_err(err);
        let m = levels.len();
        let edges = (0..n - 1)
            .map(|e| {
                (0..m * m)
                    .into_par_iter()
                    .map(|c| {
                        let mut u = vec![levels[0]; n];
                        u[e] = levels[c % m];
                        u[e + 1] = levels[c / m];
                        rest(&u)
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        let nodes = (0..n)
            .map(|i| {
                (0..m)
                    .map(|a| {
                        let mut u = vec![levels[0]; n];
                        u[i] = levels[a];
                        rest(&u)
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(ChainEnergy { edges, nodes })
    }

    fn rest(&self, code: &[usize], m: usize) -> f64 {
        let n = code.len();
        let e: f64 = (0..n - 1).map(|e| self.edges[e][code[e] + m * code[e + 1]]).sum();
        let v: f64 = (1..n - 1).map(|i| self.nodes[i][code[i]]).sum();
        e - v
    }
}

fn exhaustive_min(p: &ObstacleProblem, levels: &[f64]) -> Result<(f64, Vec<f64>), String> {
    let d = p.discretization().map_err(err)?;
    let lower = p.lower_bounds();
    let (n, m) = (lower.len(), levels.len());
    let chain = ChainEnergy::new(&d, levels, n)?;
    let decode = |mut code: usize| {
        let mut c = vec![0; n];
        for v in c.iter_mut() {
            *v = code % m;
            code /= m;
        }
        c
    };
    let field = |c: &[usize]| c.iter().map(|&k| levels[k]).collect::<Vec<f64>>();
    let total = m.pow(n as u32);
    for code in (0..total).step_by(997) {
        let c = decode(code);
        let u = field(&c);
        let direct = d.energy(&u).map_err(err)?.total;
        let split = d.energy_interior(&u).map_err(err)? + chain.rest(&c, m);
        if (direct - split).abs() > 1e-9 * direct.abs().max(1.0) {
            return Err(format!("chain split {split} differs from {direct}"));
        }
    }
    (0..total)
        .into_par_iter()
        .filter_map(|code| {
            let c = decode(code);
            let u = field(&c);
            if u.iter().zip(&lower).any(|(a, b)| a < b) {
                return None;
            }
            Some(d.energy_interior(&u).map(|e| (e + chain.rest(&c, m), u)))
        })
        .min_by(|a, b| match (a, b) {
            (Ok(x), Ok(y)) => x.0.total_cmp(&y.0),
            (Err(_), _) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        })
        .ok_or_else(|| "no feasible field".to_string())?
        .map_err(err)
}

fn brute_force() -> Check {
    let levels = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let step = 0.5;
    let phi = ExteriorData::Affine { c: 0.1, m: 0.6 };
    let omega = Domain1D::new(-1.0, 1.0, 20.0).map_err(err)?;
    let stuck = ObstacleSpec { region: ObstacleRegion::Interval { c: -0.4, d: 0.4 }, psi: Psi::Constant { v: 0.5 }, eps: 1.0 };
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.3, 0.7] {
        for (tag, ob) in [("free", ObstacleSpec::none()), ("obstacle", stuck.clone())] {
            let k = Kernel::new(1, s).map_err(err)?;
            let p = ObstacleProblem::new(k, omega, 0.4, phi.clone(), ob, None).map_err(err)?;
            let r = solve(&p, &SolveOptions::default()).map_err(err)?;
            let (best, arg) = exhaustive_min(&p, &levels)?;
            let dist = r.u.iter().zip(&arg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let ok = r.certified && r.u.len() == 6 && r.energy.total <= best + 1e-9 && dist <= step;
            pass &= ok;
            parts.push(format!("s={s} {tag}: F={:.6} min={best:.6} dist={dist:.3}", r.energy.total));
        }
    }
    Ok((pass, parts.join("; ")))
}

fn apriori(suite: &mut Suite) -> Check {
    let mut checked = 0;
    let mut over = Vec::new();
    for name in ["stickiness", "stickiness_eps0", "detachment"] {
        let r = suite.sweep(name)?;
        for run in r.runs.iter().filter(|r| r.certified) {
            let a = run.apriori.as_ref().ok_or("certified run without a priori record")?;
            checked += 1;
            if !a.bound_ok {
                over.push(format!("{name} s={}: {:.4e} > {}", run.s, a.sup_norm, a.bound));
            }
        }
    }
    let detail = if over.is_empty() { format!("{checked} certified runs within the bound") } else { format!("{checked} certified runs, over: {}", over.join("; ")) };
    Ok((over.is_empty() && checked > 0, detail))
}

fn alpha_values() -> Check {
    let k = Kernel::new(1, 0.5).map_err(err)?;
    let w = Window::centered(2.0, 64).map_err(err)?;
    let seq = [0.1, 0.05, 0.02];
    let subgraph = |phi| PixelSet::raster(w, FarField::Subgraph { phi });
    let half = alpha_at_infinity(k.spec(), &subgraph(ExteriorData::Constant { c: 0.0 }).map_err(err)?, &seq).map_err(err)?;
    let disk = PixelSet::from_fn(w, FarField::Empty, |p| p[0].hypot(p[1]) < 0.75).map_err(err)?;
    let bounded = alpha_at_infinity(k.spec(), &disk, &seq).map_err(err)?;
    let mut pass = half.alpha_bar == PI && half.alpha_lower == PI && bounded.alpha_bar == 0.0 && bounded.alpha_lower == 0.0;
    let mut parts = vec![format!("half-plane {}, bounded {}", half.alpha_bar, bounded.alpha_bar)];
    let mut worst = 0.0f64;
    for (kappa, exact) in [(2.0, 2.0 * 0.5f64.atan()), (1.0, PI / 2.0), (-2.0, PI + 2.0 * 2f64.atan())] {
        let c = alpha_at_infinity(k.spec(), &subgraph(ExteriorData::Cone { c: 0.0, m: 0.0, kappa }).map_err(err)?, &seq).map_err(err)?;
        pass &= (c.alpha_bar - exact).abs() <= 1e-14 && c.exact == c.alpha_bar;
        parts.push(format!("cone {kappa}: {:.6}", c.alpha_bar));
        worst = worst.max(numeric_gap(&c)?);
    }
    worst = worst.max(numeric_gap(&half)?);
    parts.push(format!("numeric at s=0.02 within {:.2}%", 100.0 * worst));
    Ok((pass && worst < 0.01, parts.join(", ")))
}

fn numeric_gap(a: &AlphaEstimate) -> Result<f64, String> {
    let at = a.samples.iter().find(|p| p.0 == 0.02).ok_or("no sample at s = 0.02")?.1;
    Ok((at - a.exact).abs() / a.exact)
}

fn curvature_limits() -> Check {
    let s = 0.02;
    let k = Kernel::new(1, s).map_err(err)?;
    let disk = PixelSet::from_fn(Window::centered(2.0, 512).map_err(err)?, FarField::Empty, |p| p[0].hypot(p[1]) < 1.0).map_err(err)?;
    let h = mean_curvature(k.spec(), &disk, [0.0, -1.0], &default_radii(0.5, 3), 1e-2).map_err(err)?;
    let rel = (s * h.value - 2.0 * PI).abs() / (2.0 * PI);
    let half = PixelSet::raster(Window::centered(2.0, 128).map_err(err)?, FarField::Subgraph { phi: ExteriorData::Constant { c: 0.0 } }).map_err(err)?;
    let mut flat = 0.0f64;
    for s in [0.02, 0.5] {
        let k = Kernel::new(1, s).map_err(err)?;
        for q in [[0.0, 0.0], [0.5, 0.0], [-1.25, 0.0]] {
            flat = flat.max(mean_curvature(k.spec(), &half, q, &default_radii(0.5, 7), 1e-3).map_err(err)?.value.abs());
        }
    }
    Ok((rel < 0.05 && flat <= 1e-10, format!("disk s*H = {:.4} ({:.2}% from 2 pi), half-plane |H| <= {flat:.1e}", s * h.value, 100.0 * rel)))
}

fn positive_curvature() -> Check {
    let w = Window::centered(4.0, 256).map_err(err)?;
    let e = PixelSet::raster(w, FarField::Subgraph { phi: ExteriorData::Cone { c: 0.0, m: 0.0, kappa: 2.0 } }).map_err(err)?;
    let r5 = 5f64.sqrt();
    let mut points = Vec::new();
    for k in [8isize, 24, 40] {
        let (x, y) = (k as f64 * w.h, -2.0 * k as f64 * w.h);
        points.push(TangentPoint { q: [x, y], normal: [2.0 / r5, 1.0 / r5] });
        points.push(TangentPoint { q: [-x, y], normal: [-2.0 / r5, 1.0 / r5] });
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.1, 0.05] {
        let k = Kernel::new(1, s).map_err(err)?;
        let params = CurvatureBoundParams::new(k.spec(), 2.0 * 0.5f64.atan()).map_err(err)?;
        let checks = positive_curvature_check(k.spec(), &e, &params, &points, &default_radii(0.5, 3), 0.05).map_err(err)?;
        let min = checks.iter().map(|c| c.curvature.value / c.bound).fold(f64::INFINITY, f64::min);
        pass &= checks.len() == points.len() && checks.iter().all(|c| c.ball_clear && c.pass);
        parts.push(format!("s={s}: beta/s={:.3}, min H/(beta/s)={min:.3}", params.bound(s)));
    }
    Ok((pass, parts.join("; ")))
}

fn confined_random(w: Window, omega: &Domain1D, m: f64, rng: &mut ChaCha8Rng) -> Result<PixelSet, String> {
    let occ = (0..w.cells())
        .map(|c| {
            let (i, j) = ((c % w.nx) as isize, (c / w.nx) as isize);
            let p = w.center(i, j);
            let r = w.rect(i, j);
            if !omega.contains(p[0]) {
                p[1] < 0.0
            } else if r[3] <= -m {
                true
            } else if r[2] >= m {
                false
            } else {
                rng.random_bool(0.5 - 0.4 * p[1] / m)
            }
        })
        .collect();
    PixelSet::new(w, occ, FarField::Subgraph { phi: ExteriorData::Constant { c: 0.0 } }).map_err(err)
}

fn rearrangement(suite: &Suite) -> Check {
    let mut rng = suite.rng(8);
    let k = Kernel::new(1, 0.5).map_err(err)?;
    let w = Window::centered(4.0, 256).map_err(err)?;
    let omega = Domain1D::with_default_window(-1.0, 1.0).map_err(err)?;
    let m = 1.0;
    let region = Rect { x0: -1.0, x1: 1.0, y0: -m, y1: m };
    let engine = PerimeterEngine::new(k.spec(), w, FarField::Subgraph { phi: ExteriorData::Constant { c: 0.0 } }, &region).map_err(err)?;
    let mut fails = 0;
    let mut min_gain = f64::INFINITY;
    for _ in 0..50 {
        let f = confined_random(w, &omega, m, &mut rng)?;
        let r = vertical_rearrangement(&f, &omega, m).map_err(err)?;
        let pf = engine.perimeter(&f).map_err(err)?;
        let pg = engine.perimeter(&r.subgraph).map_err(err)?;
        let tol = engine.error_estimate(&pf) + engine.error_estimate(&pg);
        min_gain = min_gain.min(pf.total - pg.total);
        fails += (pf.total < pg.total - tol) as usize;
    }
    Ok((fails == 0, format!("50 sets, {fails} violations, min Per(F) - Per(rearranged) = {min_gain:.4}")))
}

fn equivalence(suite: &Suite) -> Check {
    let mut rng = suite.rng(9);
    let k = Kernel::new(1, 0.5).map_err(err)?;
    let setup = EquivalenceSetup {
        omega: Domain1D::with_default_window(-1.0, 1.0).map_err(err)?,
        phi: ExteriorData::Constant { c: 0.0 },
        m: 1.0,
        window: Window::centered(4.0, 256).map_err(err)?,
        opts: QuadOptions::default(),
    };
    let h = setup.window.h;
    let n = ((setup.omega.b - setup.omega.a) / h).round() as usize;
    let levels = (setup.m / h).round() as i64 - 1;
    // admissible fields: grid-aligned values strictly inside the slab
    let mut field = || -> Vec<f64> {
        let mut v = rng.random_range(-levels..=levels);
        (0..n)
            .map(|_| {
                v = (v + rng.random_range(-4..=4)).clamp(-levels, levels);
                v as f64 * h
            })
            .collect()
    };
    let mut worst = 0.0f64;
    let mut offsets = Vec::new();
    for _ in 0..10 {
        let (a, b) = (field(), field());
        let r = equivalence_offset(&k, &setup, &a, &b).map_err(err)?;
        worst = worst.max(r.offset.abs() / r.tolerance);
        offsets.push(r.offset.abs());
    }
    let max = offsets.iter().fold(0.0f64, |a, b| a.max(*b));
    Ok((worst <= 2.0, format!("max |offset| {max:.2e}, max |offset|/tol {worst:.3}")))
}

fn assertions_pass(r: &SweepReport, names: &[&str]) -> (bool, Vec<String>) {
    let mut pass = true;
    let mut failed = Vec::new();
    for a in r.assertions.iter().filter(|a| names.iter().any(|n| a.name.starts_with(n))) {
        if !a.pass {
            pass = false;
            failed.push(format!("{}: {}", a.name, a.detail));
        }
    }
    (pass, failed)
}

fn stickiness(suite: &mut Suite) -> Check {
    let trend = ["solves_completed", "feasible", "coincidence_nondecreasing", "full_coincidence_at_smallest_s", "min_off_a_strictly_decreasing_last_three"];
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["stickiness", "stickiness_eps0"] {
        let r = suite.sweep(name)?;
        let (ok, failed) = assertions_pass(r, &trend);
        pass &= ok;
        let cf: Vec<String> = r.rows.iter().map(|row| format!("{:?}", row.coincidence_fraction.unwrap_or(f64::NAN))).collect();
        let last: Vec<String> = r.rows.iter().rev().take(3).rev().map(|row| format!("{:.3e}", row.min_off_a.unwrap_or(f64::NAN))).collect();
        parts.push(format!("{name}: coincidence [{}], min off A [{}] {}", cf.join(" "), last.join(" "), failed.join("; ")));
    }
    Ok((pass, parts.join(" | ")))
}

fn detachment(suite: &mut Suite) -> Check {
    let r = suite.sweep("detachment")?;
    let (pass, failed) = assertions_pass(r, &["solves_completed", "feasible", "min_on_omega_nondecreasing", "min_on_omega_at_least_", "no_contact_at_smallest_s"]);
    let last = r.runs.last().and_then(|r| r.min_on_omega).unwrap_or(f64::NAN);
    let c = r.rows.last().and_then(|r| r.coincidence_fraction).unwrap_or(f64::NAN);
    Ok((pass, format!("k0 = {}, min u at s=0.02 = {last:.4e}, coincidence {c} {}", r.k0, failed.join("; "))))
}

fn appendix() -> Check {
    let n = 1000;
    let exact = (0..=n).all(|k| ball_inequality_gap_exact(k, n) == (k as i128).pow(4));
    let quad = Psi::Quadratic { c0: 0.1, c1: -0.3, c2: 0.75 };
    let sine = Psi::Sine { amp: 1.0, freq: 1.0, phase: 0.0 };
    let para = [&quad, &sine].iter().all(|p| paraboloid_bound_check(p, (-1.0, 1.0), 0.5, None, None).pass)
        && !paraboloid_bound_check(&quad, (-1.0, 1.0), 0.5, Some(0.75), None).pass;
    let omega = Domain1D::with_default_window(-1.0, 1.0).map_err(err)?;
    let mut dome_ok = true;
    let mut parts = Vec::new();
    for (k, r0) in [(2, 0.2), (3, 0.1), (5, 0.25)] {
        let d = dome_profile(&omega, k, r0, |x| 0.3 + 0.1 * x).map_err(err)?;
        let c = d.check(32);
        dome_ok &= c.boundary_residual < 1e-12 && c.min_gradient >= 1.0 - 1e-6 && c.membership_mismatches == 0;
        parts.push(format!("k={k}: residual {:.1e}, min |grad| {:.6}", c.boundary_residual, c.min_gradient));
    }
    Ok((exact && para && dome_ok, format!("ball inequality exact on {} points: {exact}, paraboloid suite: {para}, {}", n + 1, parts.join(", "))))
}

fn determinism(suite: &mut Suite) -> Check {
    let first = suite.out.join("stickiness").join("rows.csv");
    suite.sweep("stickiness")?;
    let mut c = suite.config("stickiness")?;
    c.output.dir = suite.out.join("stickiness-repeat");
    let r = run_sweep(&c, SweepKind::Stickiness).map_err(err)?;
    emit::emit_report(&r, &c, &c.output.dir).map_err(err)?;
    let a = std::fs::read(&first).map_err(err)?;
    let b = std::fs::read(c.output.dir.join("rows.csv")).map_err(err)?;
    Ok((a == b, format!("{} and {} bytes, identical: {}", a.len(), b.len(), a == b)))
}
