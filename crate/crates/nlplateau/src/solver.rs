//! Discrete obstacle problem: minimize the truncated functional over nodal
//! fields with `u >= eps psi` on the obstacle nodes.
//!
//! The default method is a projected Newton iteration with an
//! epsilon-active set; a projected gradient method with Barzilai-Borwein
//! steps is available for comparison. Both accept a step only if the energy
//! does not increase. Energy changes are summed from per-point differences,
//! and the history is the initial energy plus the accepted changes.
//!
//! The energy has kinks `c |u_i - phi(endpoint)|` at the two endpoint
//! nodes. Optimality is measured with the proximal-gradient residual,
//! which reduces to the projected-gradient residual away from the kinks.
//!
//! The obstacle is never in conflict with the exterior data, since no
//! continuity across the boundary is imposed; there is no infeasibility
//! error.

use crate::domain::{Domain1D, DomainError, ExteriorData, Grid1D, ObstacleSpec};
use crate::functional::{Basis, Discretization, EnergyBreakdown, FunctionalError, Kink, QuadOptions, ScalarField};
use crate::kernel::Kernel;
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error("truncation M = {m} is below sup |eps psi| = {need}")]
    Truncation { m: f64, need: f64 },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("initial field has {got} values, expected {want}")]
    Init { got: usize, want: usize },
}

/// A full instance of the discrete obstacle problem.
#[derive(Debug, Clone)]
pub struct ObstacleProblem {
    pub kernel: Kernel,
    pub domain: Domain1D,
    pub grid: Grid1D,
    pub phi: ExteriorData,
    pub obstacle: ObstacleSpec,
    pub m: f64,
    pub quad: QuadOptions,
}

/// `diam Omega + max{window sup |phi|, sup |eps psi|}`.
pub fn apriori_bound(domain: &Domain1D, phi: &ExteriorData, obstacle: &ObstacleSpec) -> f64 {
    domain.diam() + phi.window_sup(domain).max(obstacle.sup_abs(domain))
}

/// Default truncation height: the a priori bound plus one.
pub fn default_truncation(domain: &Domain1D, phi: &ExteriorData, obstacle: &ObstacleSpec) -> f64 {
    apriori_bound(domain, phi, obstacle) + 1.0
}

impl ObstacleProblem {
    /// `m = None` selects [`default_truncation`].
    pub fn new(
        kernel: Kernel,
        domain: Domain1D,
        h: f64,
        phi: ExteriorData,
        obstacle: ObstacleSpec,
        m: Option<f64>,
    ) -> Result<Self, SolverError> {
        phi.validate()?;
        obstacle.validate(&domain)?;
        let grid = Grid1D::new(&domain, &obstacle, h)?;
        let m = m.unwrap_or_else(|| default_truncation(&domain, &phi, &obstacle));
        let need = obstacle.sup_abs(&domain);
        if m < need {
            return Err(SolverError::Truncation { m, need });
        }
        Ok(Self { kernel, domain, grid, phi, obstacle, m, quad: QuadOptions::default() })
    }

    pub fn with_quadrature(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }

    pub fn apriori_bound(&self) -> f64 {
        apriori_bound(&self.domain, &self.phi, &self.obstacle)
    }

    pub fn discretization(&self) -> Result<Discretization, SolverError> {
        Ok(Discretization::new(&self.kernel, &self.domain, self.grid.h, &self.phi, self.m, Basis::Linear, self.quad)?)
    }

    /// Lower bounds on the unknowns; `-inf` off the obstacle.
    pub fn lower_bounds(&self) -> Vec<f64> {
        self.grid
            .omega_nodes()
            .iter()
            .zip(self.grid.omega_obstacle())
            .map(|(&x, &c)| if c { self.obstacle.lower(x) } else { f64::NEG_INFINITY })
            .collect()
    }

    pub fn field(&self, omega_values: &[f64]) -> Result<ScalarField, SolverError> {
        Ok(ScalarField::from_omega(&self.grid, &self.phi, omega_values)?)
    }
}

/// Pointwise `max(u, eps psi)` on the obstacle nodes.
pub fn project(u: &ScalarField, grid: &Grid1D, obstacle: &ObstacleSpec) -> ScalarField {
    let mut out = u.clone();
    for (j, v) in out.values.iter_mut().enumerate() {
        if grid.obstacle_mask[j] {
            *v = v.max(obstacle.lower(grid.nodes[j]));
        }
    }
    out
}

/// Spacing of floats at `x`.
pub fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return f64::MIN_POSITIVE;
    }
    f64::from_bits(a.to_bits() + 1) - a
}

fn project_vec(u: &mut [f64], lower: &[f64]) {
    for (v, &l) in u.iter_mut().zip(lower) {
        if *v < l {
            *v = l;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ProjectedNewton,
    ProjectedGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Linear interpolation of the exterior data at the two endpoints, projected.
    BoundaryTrace,
    /// Projection of the zero field.
    Zero,
    Given(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub method: Method,
    pub init: Init,
    /// Contact band; `None` gives `1e-6 (1 + sup |eps psi|)`.
    pub contact_delta: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 400, method: Method::ProjectedNewton, init: Init::BoundaryTrace, contact_delta: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    /// Residual at or below the tolerance.
    Certified,
    /// No descent step exists in floating point and the residual is within a
    /// few units of `max_i H_ii ulp(u_i)`, the smallest gradient change a
    /// representable update can make.
    PrecisionLimited,
    MaxIterations,
    /// No descent step found above the precision floor.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Contact {
    Contact,
    Free,
    Ambiguous,
    Unconstrained,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: ScalarField,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub lower: Vec<f64>,
    pub energy: EnergyBreakdown,
    pub gradient: Vec<f64>,
    pub kkt_residual: f64,
    pub tau0: f64,
    pub tol: f64,
    pub certified: bool,
    pub status: SolveStatus,
    pub precision_floor: f64,
    /// Per obstacle node, `u - eps psi <= delta`.
    pub coincidence_mask: Vec<bool>,
    pub contact: Vec<Contact>,
    pub contact_delta: f64,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub sup_norm: f64,
    pub apriori_bound: f64,
    pub ws1_seminorm: f64,
}

impl SolveReport {
    pub fn coincidence_fraction(&self) -> f64 {
        if self.coincidence_mask.is_empty() {
            return 0.0;
        }
        self.coincidence_mask.iter().filter(|&&c| c).count() as f64 / self.coincidence_mask.len() as f64
    }
}

/// `||u - P(u - tau0 g)||_inf / tau0`.
pub fn kkt_residual(u: &[f64], g: &[f64], lower: &[f64], tau0: f64) -> f64 {
    prox_residual(u, g, lower, tau0, &[])
}

/// `||u - prox(u - tau0 g_s)||_inf / tau0`, where `g_s` drops the kink
/// terms from the gradient `g` and the prox carries the kinks and the lower
/// bounds. Zero exactly at minimizers.
pub fn prox_residual(u: &[f64], g: &[f64], lower: &[f64], tau0: f64, kinks: &[Kink]) -> f64 {
    let gs = smooth_gradient(u, g, kinks);
    (0..u.len())
        .map(|i| (u[i] - prox_point(u[i] - tau0 * gs[i], tau0, kinks_at(kinks, i), lower[i])).abs() / tau0)
        .fold(0.0, f64::max)
}

fn kinks_at(kinks: &[Kink], i: usize) -> impl Iterator<Item = &Kink> + Clone {
    kinks.iter().filter(move |k| k.idx == i)
}

fn sign(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum()
    }
}

fn smooth_gradient(u: &[f64], g: &[f64], kinks: &[Kink]) -> Vec<f64> {
    let mut gs = g.to_vec();
    for k in kinks {
        gs[k.idx] -= k.coef * sign(u[k.idx] - k.value);
    }
    gs
}

// argmin over x >= lower of (x - z)^2 / (2 tau) + sum c |x - v|
fn prox_point<'a>(z: f64, tau: f64, kinks: impl Iterator<Item = &'a Kink> + Clone, lower: f64) -> f64 {
    let mut cands = vec![z.max(lower)];
    let mut breaks: Vec<f64> = kinks.clone().map(|k| k.value).collect();
    if breaks.is_empty() {
        return cands[0];
    }
    breaks.sort_by(f64::total_cmp);
    let obj = |x: f64| (x - z).powi(2) / (2.0 * tau) + kinks.clone().map(|k| k.coef * (x - k.value).abs()).sum::<f64>();
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(&breaks);
    edges.push(f64::INFINITY);
    for w in edges.windows(2) {
        let probe = if w[0].is_infinite() {
            w[1] - 1.0
        } else if w[1].is_infinite() {
            w[0] + 1.0
        } else {
            0.5 * (w[0] + w[1])
        };
        let slope: f64 = kinks.clone().map(|k| k.coef * sign(probe - k.value)).sum();
        cands.push((z - tau * slope).clamp(w[0], w[1]).max(lower));
    }
    cands.extend(breaks.iter().map(|&b| b.max(lower)));
    cands.into_iter().min_by(|a, b| obj(*a).total_cmp(&obj(*b))).unwrap()
}

pub fn solve(problem: &ObstacleProblem, opts: &SolveOptions) -> Result<SolveReport, SolverError> {
    let disc = problem.discretization()?;
    solve_with(problem, &disc, opts)
}

/// Solve with a prebuilt discretization of the same problem.
pub fn solve_with(problem: &ObstacleProblem, disc: &Discretization, opts: &SolveOptions) -> Result<SolveReport, SolverError> {
    if !(opts.tol > 0.0) {
        return Err(SolverError::Tolerance(opts.tol));
    }
    let lower = problem.lower_bounds();
    let n = lower.len();
    let x: Vec<f64> = problem.grid.omega_nodes().to_vec();
    let mut u = match &opts.init {
        Init::BoundaryTrace => {
            let (pa, pb) = (problem.phi.eval(problem.domain.a), problem.phi.eval(problem.domain.b));
            let d = problem.domain.diam();
            x.iter().map(|&xi| pa + (pb - pa) * (xi - problem.domain.a) / d).collect()
        }
        Init::Zero => vec![0.0; n],
        Init::Given(v) => {
            if v.len() != n {
                return Err(SolverError::Init { got: v.len(), want: n });
            }
            v.clone()
        }
    };
    project_vec(&mut u, &lower);
    let tau0 = problem.grid.h.powf(problem.kernel.s());
    let (u, iterations, history, stalled) = match opts.method {
        Method::ProjectedNewton => newton(disc, &lower, u, tau0, opts)?,
        Method::ProjectedGradient => gradient_descent(disc, &lower, u, tau0, opts)?,
    };
    finish(problem, disc, &lower, u, tau0, opts, iterations, history, stalled)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &ObstacleProblem,
    disc: &Discretization,
    lower: &[f64],
    u: Vec<f64>,
    tau0: f64,
    opts: &SolveOptions,
    iterations: usize,
    energy_history: Vec<f64>,
    stalled: bool,
) -> Result<SolveReport, SolverError> {
    let ev = disc.evaluate(&u, true)?;
    let res = prox_residual(&u, &ev.gradient, lower, tau0, &disc.kinks());
    let hm = ev.hessian.as_ref().expect("hessian requested");
    let floor = (0..u.len()).map(|i| hm[(i, i)] * ulp(u[i])).fold(0.0, f64::max);
    let status = if res <= opts.tol {
        SolveStatus::Certified
    } else if !stalled {
        SolveStatus::MaxIterations
    } else if res <= 4.0 * floor {
        SolveStatus::PrecisionLimited
    } else {
        SolveStatus::Stalled
    };
    let delta = opts.contact_delta.unwrap_or(1e-6 * (1.0 + problem.obstacle.sup_abs(&problem.domain)));
    let mut coincidence_mask = Vec::new();
    let contact: Vec<Contact> = u
        .iter()
        .zip(lower)
        .map(|(&ui, &li)| {
            if li == f64::NEG_INFINITY {
                return Contact::Unconstrained;
            }
            let gap = ui - li;
            coincidence_mask.push(gap <= delta);
            if gap <= delta {
                Contact::Contact
            } else if gap <= 2.0 * delta {
                Contact::Ambiguous
            } else {
                Contact::Free
            }
        })
        .collect();
    let sup_norm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(SolveReport {
        solution: problem.field(&u)?,
        x: problem.grid.omega_nodes().to_vec(),
        lower: lower.to_vec(),
        energy: ev.energy,
        gradient: ev.gradient,
        kkt_residual: res,
        tau0,
        tol: opts.tol,
        certified: status == SolveStatus::Certified,
        status,
        precision_floor: floor,
        coincidence_mask,
        contact,
        contact_delta: delta,
        iterations,
        energy_history,
        sup_norm,
        apriori_bound: problem.apriori_bound(),
        ws1_seminorm: disc.ws1_seminorm(&u)?,
        u,
    })
}

// Direction from the reduced system on the free set, Jacobi scaled, with
// Levenberg damping if the factorization fails; scaled gradient on the
// active set.
fn direction(hm: &DMatrix<f64>, g: &[f64], active: &[bool]) -> Vec<f64> {
    let n = g.len();
    let mut d = vec![0.0; n];
    let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
    for i in 0..n {
        if active[i] {
            d[i] = -g[i] / hm[(i, i)].max(f64::MIN_POSITIVE);
        }
    }
    if free.is_empty() {
        return d;
    }
    let nf = free.len();
    let scale: Vec<f64> = free.iter().map(|&i| 1.0 / hm[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
    let mut a = DMatrix::zeros(nf, nf);
    for (r, &i) in free.iter().enumerate() {
        for (c, &j) in free.iter().enumerate() {
            a[(r, c)] = scale[r] * hm[(i, j)] * scale[c];
        }
    }
    let rhs = DVector::from_iterator(nf, free.iter().zip(&scale).map(|(&i, &sc)| -g[i] * sc));
    let mut mu = 0.0;
    let y = loop {
        let mut am = a.clone();
        for k in 0..nf {
            am[(k, k)] += mu;
        }
        if let Some(ch) = Cholesky::new(am) {
            let y = ch.solve(&rhs);
            if y.iter().all(|v| v.is_finite()) {
                break y;
            }
        }
        mu = if mu == 0.0 { 1e-12 } else { mu * 10.0 };
        if mu > 1e6 {
            break rhs.clone();
        }
    };
    for (r, &i) in free.iter().enumerate() {
        d[i] = scale[r] * y[r];
    }
    d
}

struct Step {
    u: Vec<f64>,
    /// Energy change from the current iterate.
    df: f64,
    alpha: f64,
}

// Armijo backtracking along the projection arc, optionally extending a full
// step while the energy keeps dropping. Energy changes are computed as
// differences, which stay accurate when the energy itself is large.
#[allow(clippy::too_many_arguments)]
fn arc_search(
    disc: &Discretization,
    lower: &[f64],
    u: &[f64],
    g: &[f64],
    d: &[f64],
    active: &[bool],
    min_alpha: f64,
    extend: bool,
) -> Result<Option<Step>, SolverError> {
    let n = u.len();
    let trial_at = |alpha: f64| {
        let mut t: Vec<f64> = u.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        project_vec(&mut t, lower);
        t
    };
    let mut alpha = 1.0;
    let mut found = None;
    while alpha >= min_alpha {
        let trial = trial_at(alpha);
        let mut pred = 0.0;
        for i in 0..n {
            if active[i] {
                pred += g[i] * (u[i] - trial[i]);
            } else {
                pred -= alpha * g[i] * d[i];
            }
        }
        let df = disc.energy_difference(u, &trial)?;
        if df <= 0.0 && -df >= 1e-4 * pred {
            found = Some(Step { u: trial, df, alpha });
            break;
        }
        alpha *= 0.5;
    }
    if extend {
        if let Some(best) = found.as_mut() {
            if best.alpha == 1.0 {
                for _ in 0..48 {
                    let a2 = best.alpha * 2.0;
                    let trial = trial_at(a2);
                    let df = disc.energy_difference(u, &trial)?;
                    if !(df < best.df) {
                        break;
                    }
                    *best = Step { u: trial, df, alpha: a2 };
                }
            }
        }
    }
    Ok(found)
}

fn newton(
    disc: &Discretization,
    lower: &[f64],
    mut u: Vec<f64>,
    tau0: f64,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, usize, Vec<f64>, bool), SolverError> {
    let n = u.len();
    let mut ev = disc.evaluate(&u, true)?;
    let mut history = vec![ev.energy.total];
    let mut it = 0;
    let mut stalled = false;
    let kinks = disc.kinks();
    while it < opts.max_iters {
        let g = &ev.gradient;
        let res = prox_residual(&u, g, lower, tau0, &kinks);
        if res <= opts.tol {
            break;
        }
        let hm = ev.hessian.as_ref().expect("hessian requested");
        let mm = ev.majorizer.as_ref().expect("majorizer requested");
        let eps_k = (res * tau0).min(1e-3);
        let mut active: Vec<bool> = (0..n).map(|i| lower[i] > f64::NEG_INFINITY && u[i] - lower[i] <= eps_k && g[i] > 0.0).collect();
        // nodes that the proximal step puts on a kink are moved onto it
        let gs = smooth_gradient(&u, g, &kinks);
        let mut snap = Vec::new();
        for k in &kinks {
            let i = k.idx;
            let target = prox_point(u[i] - tau0 * gs[i], tau0, kinks_at(&kinks, i), lower[i]);
            if kinks_at(&kinks, i).any(|kk| kk.value == target) {
                active[i] = true;
                snap.push((i, target - u[i]));
            }
        }
        let with_snap = |mut d: Vec<f64>| {
            for &(i, v) in &snap {
                d[i] = v;
            }
            d
        };
        // a full Newton step, else the majorizer step, else a damped Newton step
        let dn = with_snap(direction(hm, g, &active));
        let mut step = arc_search(disc, lower, &u, g, &dn, &active, 1.0, true)?;
        if step.is_none() {
            let dm = with_snap(direction(mm, g, &active));
            step = arc_search(disc, lower, &u, g, &dm, &active, 1e-12, true)?;
        }
        if step.is_none() {
            step = arc_search(disc, lower, &u, g, &dn, &active, 1e-12, false)?;
        }
        let Some(step) = step else {
            stalled = true;
            break;
        };
        let moved = step.u.iter().zip(&u).any(|(a, b)| a != b);
        u = step.u;
        ev = disc.evaluate(&u, true)?;
        history.push(history.last().unwrap() + step.df);
        it += 1;
        if !moved {
            stalled = true;
            break;
        }
    }
    Ok((u, it, history, stalled))
}

fn gradient_descent(
    disc: &Discretization,
    lower: &[f64],
    mut u: Vec<f64>,
    tau0: f64,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, usize, Vec<f64>, bool), SolverError> {
    let n = u.len();
    let mut ev = disc.evaluate(&u, false)?;
    let mut history = vec![ev.energy.total];
    let mut step = tau0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut it = 0;
    let mut stalled = false;
    let kinks = disc.kinks();
    while it < opts.max_iters {
        let g = ev.gradient.clone();
        if prox_residual(&u, &g, lower, tau0, &kinks) <= opts.tol {
            break;
        }
        let gs = smooth_gradient(&u, &g, &kinks);
        if let Some((up, gp)) = &prev {
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..n {
                let s = u[i] - up[i];
                let y = g[i] - gp[i];
                ss += s * s;
                sy += s * y;
            }
            if sy > 0.0 {
                step = ss / sy;
            }
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..n).map(|i| prox_point(u[i] - step * gs[i], step, kinks_at(&kinks, i), lower[i])).collect();
            let dec: f64 = (0..n).map(|i| (u[i] - trial[i]).powi(2)).sum::<f64>() / step;
            let df = disc.energy_difference(&u, &trial)?;
            if df <= 0.0 && -df >= 1e-4 * dec {
                accepted = Some((trial, df));
                break;
            }
            step *= 0.5;
        }
        let Some((next, df)) = accepted else {
            stalled = true;
            break;
        };
        prev = Some((std::mem::replace(&mut u, next), g));
        ev = disc.evaluate(&u, false)?;
        history.push(history.last().unwrap() + df);
        it += 1;
    }
    Ok((u, it, history, stalled))
}

/// Per-node first-order diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct NodeDiagnostic {
    pub x: f64,
    pub gradient: f64,
    pub contact: Contact,
    pub violation: bool,
}

/// Sign conditions of the variational inequality at each node:
/// supersolution on the obstacle, solution away from contact.
pub fn complementarity_check(report: &SolveReport, ctol: f64) -> Vec<NodeDiagnostic> {
    report
        .x
        .iter()
        .zip(&report.gradient)
        .zip(&report.contact)
        .map(|((&x, &g), &c)| {
            let violation = match c {
                Contact::Contact | Contact::Ambiguous => g < -ctol,
                Contact::Free | Contact::Unconstrained => g.abs() > ctol,
            };
            NodeDiagnostic { x, gradient: g, contact: c, violation }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct AprioriRecord {
    pub sup_norm: f64,
    pub bound: f64,
    pub bound_margin: f64,
    pub bound_ok: bool,
    /// `min over obstacle nodes of u - eps psi`.
    pub psi_margin: f64,
    pub psi_ok: bool,
    pub inf_on_a: f64,
    pub sup_on_a: f64,
    pub inf_psi: f64,
    pub sup_psi: f64,
}

pub fn apriori_bounds_check(report: &SolveReport) -> AprioriRecord {
    let mut psi_margin = f64::INFINITY;
    let (mut inf_a, mut sup_a, mut inf_p, mut sup_p) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (&u, &l) in report.u.iter().zip(&report.lower) {
        if l > f64::NEG_INFINITY {
            psi_margin = psi_margin.min(u - l);
            inf_a = inf_a.min(u);
            sup_a = sup_a.max(u);
            inf_p = inf_p.min(l);
            sup_p = sup_p.max(l);
        }
    }
    AprioriRecord {
        sup_norm: report.sup_norm,
        bound: report.apriori_bound,
        bound_margin: report.apriori_bound - report.sup_norm,
        bound_ok: report.sup_norm <= report.apriori_bound + 1e-8,
        psi_margin,
        psi_ok: psi_margin >= -1e-12,
        inf_on_a: inf_a,
        sup_on_a: sup_a,
        inf_psi: inf_p,
        sup_psi: sup_p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ObstacleRegion, Psi};

    #[test]
    fn projection_is_pointwise_max() {
        let om = Domain1D::new(-1.0, 1.0, 2.0).unwrap();
        let ob = ObstacleSpec { region: ObstacleRegion::Interval { c: -0.5, d: 0.5 }, psi: Psi::Constant { v: 0.0 }, eps: 1.0 };
        let grid = Grid1D::new(&om, &ob, 0.25).unwrap();
        let phi = ExteriorData::Constant { c: -10.0 };
        let u = ScalarField::from_omega(&grid, &phi, &[-10.0; 9]).unwrap();
        let p = project(&u, &grid, &ob);
        for (j, &x) in grid.nodes.iter().enumerate() {
            let want = if grid.obstacle_mask[j] { 0.0 } else { -10.0 };
            assert_eq!(p.values[j], want, "x={x}");
        }
        assert_eq!(project(&p, &grid, &ob), p);
    }

    #[test]
    fn constant_data_gives_constant_solution() {
        let k = Kernel::new(1, 0.5).unwrap();
        let om = Domain1D::new(-1.0, 1.0, 4.0).unwrap();
        let ob = ObstacleSpec { region: ObstacleRegion::Interval { c: -0.5, d: 0.5 }, psi: Psi::Constant { v: 0.2 }, eps: 1.0 };
        let p = ObstacleProblem::new(k, om, 0.25, ExteriorData::Constant { c: 0.7 }, ob, None).unwrap();
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert!(r.certified);
        assert!(r.u.iter().all(|v| (v - 0.7).abs() < 1e-12));
        assert!(r.energy.interior.abs() < 1e-20);
    }
}
