use super::pixel::{FarField, PixelSet};
use super::polar::{angular, breakpoints, ray_mass, rect_integral, slab};
use super::{check_dimension, GeometryError};
use crate::kernel::KernelSpec;
use crate::quad::pairwise_sum;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Truncated curvatures `H^rho` along a radius sequence and their Richardson
/// extrapolants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureEstimate {
    /// The grid corner the evaluation point was snapped to.
    pub q: [f64; 2],
    /// `(rho, H^rho)`
    pub raw: Vec<(f64, f64)>,
    pub extrapolants: Vec<f64>,
    pub value: f64,
    /// Contribution from beyond the symmetric box around `q`.
    pub far: f64,
    /// False when the last two extrapolants differ by more than the tolerance.
    pub converged: bool,
}

/// `rho0 2^{-j}` for `j < levels`. Pixel staircases bias `H^rho` once
/// `rho^2` approaches the cell size, so the last radius should stay above
/// a few `sqrt(h)`.
pub fn default_radii(rho0: f64, levels: usize) -> Vec<f64> {
    (0..levels as i32).map(|j| rho0 * 0.5f64.powi(j)).collect()
}

fn check_radii(r: &[f64], max: f64) -> Result<(), GeometryError> {
    let bad = r.is_empty()
        || r.iter().any(|x| !(*x > 0.0))
        || r.windows(2).any(|w| w[1] >= w[0])
        || r[0] > max;
    if bad {
        return Err(GeometryError::Radii(format!("{r:?} with largest admissible {max}")));
    }
    Ok(())
}

/// Principal-value mean curvature of `E` at the grid corner nearest to `q`.
///
/// Cells are taken in a box symmetric about the corner and paired with their
/// point reflections, so each pair contributes `w (sigma + sigma')` with one
/// weight; the far field beyond the box is integrated along opposite rays
/// together.
pub fn mean_curvature(spec: &KernelSpec, e: &PixelSet, q: [f64; 2], radii: &[f64], tol: f64) -> Result<CurvatureEstimate, GeometryError> {
    check_dimension(spec)?;
    let s = spec.s;
    let w = *e.window();
    let c = w.nearest_corner(q);
    let qc = w.corner(c);
    if !e.corner_on_boundary(c) {
        return Err(GeometryError::NotOnBoundary(qc[0], qc[1]));
    }
    let lx = c.0.max(w.nx as isize - c.0).max(1);
    let ly = c.1.max(w.ny as isize - c.1).max(1);
    let h = w.h;
    check_radii(radii, lx.min(ly) as f64 * h)?;
    let rho0 = radii[0];
    let sigma = |a: isize, b: isize| if e.cell(c.0 + a, c.1 + b) { -1.0 } else { 1.0 };

    // pairs with a nonzero sign sum, split by whether they meet B_{rho0}
    let rows: Vec<(Vec<f64>, Vec<([f64; 4], f64)>)> = (0..ly)
        .into_par_iter()
        .map(|b| {
            let mut fixed = Vec::new();
            let mut near = Vec::new();
            for a in -lx..lx {
                let sum = sigma(a, b) + sigma(-a - 1, -b - 1);
                if sum == 0.0 {
                    continue;
                }
                let r = [a as f64 * h, (a + 1) as f64 * h, b as f64 * h, (b + 1) as f64 * h];
                let dx = if a >= 0 { r[0] } else { -r[1] };
                let dist = dx.hypot(r[2]);
                if dist < rho0 {
                    near.push((r, sum));
                } else {
                    fixed.push(sum * rect_integral(r, (1.0, 0.0), (1.0, 0.0), 0.0, s));
                }
            }
            (fixed, near)
        })
        .collect();
    let fixed: Vec<f64> = rows.iter().map(|r| pairwise_sum(&r.0)).collect();
    let fixed = pairwise_sum(&fixed);
    let near: Vec<([f64; 4], f64)> = rows.into_iter().flat_map(|r| r.1).collect();

    let far = far_beyond_box(e.far(), qc, lx as f64 * h, ly as f64 * h, s);
    let raw: Vec<(f64, f64)> = radii
        .iter()
        .map(|&rho| {
            let terms: Vec<f64> = near.par_iter().map(|(r, sum)| sum * rect_integral(*r, (1.0, 0.0), (1.0, 0.0), rho, s)).collect();
            (rho, fixed + pairwise_sum(&terms) + far)
        })
        .collect();
    let extrapolants: Vec<f64> = raw
        .windows(2)
        .map(|p| {
            let (r0, h0) = p[0];
            let (r1, h1) = p[1];
            let (a, b) = (r0.powf(1.0 - s), r1.powf(1.0 - s));
            (h1 * a - h0 * b) / (a - b)
        })
        .collect();
    let value = extrapolants.last().copied().unwrap_or(raw[0].1);
    let converged = match extrapolants.len() {
        0 | 1 => true,
        n => (extrapolants[n - 1] - extrapolants[n - 2]).abs() <= tol * value.abs().max(1.0),
    };
    Ok(CurvatureEstimate { q: qc, raw, extrapolants, value, far, converged })
}

/// `int_{outside box} (chi_{CF} - chi_F) |Y - q|^{-2-s}` for the box
/// `[q - lx, q + lx] x [q - ly, q + ly]`, with `d` and `-d` summed together.
fn far_beyond_box(far: &FarField, q: [f64; 2], lx: f64, ly: f64, s: f64) -> f64 {
    let bdry = far.boundary();
    let rect = [q[0] - lx, q[0] + lx, q[1] - ly, q[1] + ly];
    let br = breakpoints(&bdry, q, Some(rect), 0.0);
    let exit = |d: [f64; 2]| {
        let tx = if d[0] == 0.0 { f64::INFINITY } else { lx / d[0].abs() };
        let ty = if d[1] == 0.0 { f64::INFINITY } else { ly / d[1].abs() };
        tx.min(ty)
    };
    angular(&br, PI, |d| {
        let t = exit(d);
        let nd = [-d[0], -d[1]];
        let (i1, t1) = ray_mass(far, &bdry, q, d, t, None, s);
        let (i2, t2) = ray_mass(far, &bdry, q, nd, t, None, s);
        [(t1 - 2.0 * i1) + (t2 - 2.0 * i2), 0.0]
    })[0]
}

/// `s int_{C B_1} chi_E |Y|^{-2-s} dY` at one order `s`.
pub fn alpha_numeric(e: &PixelSet, s: f64) -> f64 {
    let w = *e.window();
    let cells: Vec<f64> = (0..w.ny)
        .into_par_iter()
        .map(|j| {
            let terms: Vec<f64> = (0..w.nx)
                .filter(|&i| e.get(i, j))
                .map(|i| rect_integral(w.rect(i as isize, j as isize), (1.0, 0.0), (1.0, 0.0), 1.0, s))
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    let far = e.far();
    let bdry = far.boundary();
    let rect = w.bounds();
    let o = [0.0, 0.0];
    let br = breakpoints(&bdry, o, Some(rect), 1.0);
    let beyond = angular(&br, 2.0 * PI, |d| {
        let skip = slab(&rect, o, d);
        [ray_mass(far, &bdry, o, d, 1.0, skip, s).0, 0.0]
    })[0];
    s * (pairwise_sum(&cells) + beyond)
}

/// Upper and lower mass at infinity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub alpha_bar: f64,
    pub alpha_lower: f64,
    /// Angle occupied by the far field.
    pub exact: f64,
    /// `(s, s int_{C B_1} chi_E |Y|^{-2-s})`
    pub samples: Vec<(f64, f64)>,
    /// Max and min of the samples over the smaller half of the orders.
    pub numeric_bar: f64,
    pub numeric_lower: f64,
    /// Samples disagree with each other by more than one percent of pi.
    pub disagreement: bool,
}

/// `alpha_bar` and `alpha_lower` of `E`. They depend only on the far field,
/// which is analytic, so both are its angular measure; the finite-`s`
/// estimator is sampled along `s_sequence` as a cross-check.
pub fn alpha_at_infinity(spec: &KernelSpec, e: &PixelSet, s_sequence: &[f64]) -> Result<AlphaEstimate, GeometryError> {
    check_dimension(spec)?;
    e.far().validate()?;
    if s_sequence.iter().any(|s| !(*s > 0.0 && *s < 1.0)) || s_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(GeometryError::Radii(format!("orders {s_sequence:?} must decrease inside (0, 1)")));
    }
    let exact = e.far().angular_measure();
    let samples: Vec<(f64, f64)> = s_sequence.iter().map(|&s| (s, alpha_numeric(e, s))).collect();
    let tail = &samples[samples.len() / 2..];
    let numeric_bar = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let numeric_lower = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let disagreement = !tail.is_empty() && numeric_bar - numeric_lower > 0.01 * PI;
    Ok(AlphaEstimate { alpha_bar: exact, alpha_lower: exact, exact, samples, numeric_bar, numeric_lower, disagreement })
}

/// `beta = (omega - 2 alpha_bar) / 4` and the tangent-ball radii `delta_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureBoundParams {
    pub alpha_bar: f64,
    pub beta: f64,
    pub omega: f64,
}

impl CurvatureBoundParams {
    pub fn new(spec: &KernelSpec, alpha_bar: f64) -> Result<Self, GeometryError> {
        let omega = spec.omega;
        if !(alpha_bar < 0.5 * omega) {
            return Err(GeometryError::AlphaTooLarge { alpha_bar, half: 0.5 * omega });
        }
        Ok(CurvatureBoundParams { alpha_bar, beta: (omega - 2.0 * alpha_bar) / 4.0, omega })
    }

    /// `exp(-(1/s) log((omega + 2 beta) / (omega + beta)))`
    pub fn delta(&self, s: f64) -> f64 {
        let ratio = (self.beta / (self.omega + self.beta)).ln_1p();
        (-ratio / s).exp()
    }

    pub fn delta_map(&self, orders: &[f64]) -> Vec<(f64, f64)> {
        orders.iter().map(|&s| (s, self.delta(s))).collect()
    }

    /// `beta / s`
    pub fn bound(&self, s: f64) -> f64 {
        self.beta / s
    }
}

/// A boundary point with the outward unit normal of its exterior tangent ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentPoint {
    pub q: [f64; 2],
    pub normal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureCheck {
    pub q: [f64; 2],
    pub s: f64,
    pub radius: f64,
    /// No occupied cell center inside the ball shrunk by 1.5 cells.
    pub ball_clear: bool,
    pub curvature: CurvatureEstimate,
    pub bound: f64,
    /// `ball_clear` and the curvature is at least `(1 - rel_tol) beta / s`.
    pub pass: bool,
}

/// Evaluates `H^rho` at tangent-ball points and compares it with `beta / s`.
pub fn positive_curvature_check(
    spec: &KernelSpec,
    e: &PixelSet,
    params: &CurvatureBoundParams,
    points: &[TangentPoint],
    radii: &[f64],
    rel_tol: f64,
) -> Result<Vec<CurvatureCheck>, GeometryError> {
    let s = spec.s;
    let radius = params.delta(s);
    let bound = params.bound(s);
    let w = *e.window();
    points
        .iter()
        .map(|tp| {
            let curvature = mean_curvature(spec, e, tp.q, radii, 1e-2)?;
            let q = curvature.q;
            let center = [q[0] + radius * tp.normal[0], q[1] + radius * tp.normal[1]];
            let inner = radius - 1.5 * w.h;
            let mut ball_clear = true;
            if inner > 0.0 {
                let (i0, j0) = w.nearest_corner([center[0] - inner, center[1] - inner]);
                let (i1, j1) = w.nearest_corner([center[0] + inner, center[1] + inner]);
                for j in j0 - 1..=j1 {
                    for i in i0 - 1..=i1 {
                        let p = w.center(i, j);
                        if (p[0] - center[0]).hypot(p[1] - center[1]) < inner && e.cell(i, j) {
                            ball_clear = false;
                        }
                    }
                }
            }
            let pass = ball_clear && curvature.value >= (1.0 - rel_tol) * bound;
            Ok(CurvatureCheck { q, s, radius, ball_clear, curvature, bound, pass })
        })
        .collect()
}
