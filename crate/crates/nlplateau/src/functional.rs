//! Discrete truncated area functional on an interval.
//!
//! The unknowns are the values of u on the closed interval [a, b]: nodal
//! values of a continuous piecewise-linear field, or cell values of a
//! piecewise-constant one. Every quadrature point of the double integral over
//! Omega x Omega evaluates `GG` at a linear form in the unknowns, so energy,
//! gradient and Hessian come out of one loop and are exact derivatives of the
//! same discrete energy.
//!
//! The exchange part integrates, for x in Omega,
//!
//! ```text
//! Phi = int_{(-M-phi)/r}^{q} Gb + int_{-(M-phi)/r}^{-q} Gb,   q = (u(x)-phi(y))/r
//! ```
//!
//! against `r^{-s} dy`, with `r = |x-y|` swept in `z = ln r` up to a large
//! radius and an exact power-law tail beyond it.

use crate::domain::{Domain1D, ExteriorData};
use crate::kernel::Kernel;
use crate::quad;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("test field does not vanish outside the domain (node {0})")]
    ExteriorSupport(usize),
    #[error("field has {got} values, expected {want}")]
    Length { got: usize, want: usize },
    #[error("grid spacing {h} does not divide the domain length {len}")]
    Spacing { h: f64, len: f64 },
    #[error("kernel dimension {0} is not supported by the interval assembly")]
    Dimension(u32),
    #[error("truncation height must be nonnegative, got {0}")]
    Truncation(f64),
}

/// Piecewise-linear nodal values or piecewise-constant cell values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Basis {
    Linear,
    Step,
}

/// Quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadOptions {
    pub r_top: f64,
    pub z_width: f64,
    pub z_points: usize,
    pub tail_points: usize,
    pub boundary_levels: usize,
    pub level_points: usize,
    pub duffy_points: usize,
    /// Added to every per-cell and per-pair point count.
    pub extra: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            r_top: 1e24,
            z_width: 2.0,
            z_points: 8,
            tail_points: 4,
            boundary_levels: 30,
            level_points: 6,
            duffy_points: 12,
            extra: 0,
        }
    }
}

impl QuadOptions {
    /// A visibly coarser rule, used to estimate quadrature error.
    pub fn coarse() -> Self {
        Self { z_width: 3.0, z_points: 6, level_points: 4, duffy_points: 8, boundary_levels: 24, ..Self::default() }
    }

    /// A finer rule.
    pub fn fine() -> Self {
        Self { z_width: 1.0, z_points: 10, level_points: 8, duffy_points: 16, boundary_levels: 36, extra: 2, ..Self::default() }
    }
}

/// Field values on the grid nodes of [a - W, b + W].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Index of the node at `a`.
    pub first: usize,
    pub cells: usize,
    pub exterior: ExteriorData,
}

impl ScalarField {
    /// Exterior nodes get the exterior data; `omega` holds the values on [a, b].
    pub fn from_omega(grid: &crate::domain::Grid1D, phi: &ExteriorData, omega: &[f64]) -> Result<Self, FunctionalError> {
        if omega.len() != grid.cells + 1 {
            return Err(FunctionalError::Length { got: omega.len(), want: grid.cells + 1 });
        }
        let values = grid
            .nodes
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                if j >= grid.first && j <= grid.first + grid.cells {
                    omega[j - grid.first]
                } else {
                    phi.eval(x)
                }
            })
            .collect();
        Ok(Self { nodes: grid.nodes.clone(), values, first: grid.first, cells: grid.cells, exterior: phi.clone() })
    }

    pub fn omega_values(&self) -> &[f64] {
        &self.values[self.first..=self.first + self.cells]
    }

    /// Whether the exterior values agree with the exterior data.
    pub fn exterior_consistent(&self, tol: f64) -> bool {
        self.nodes.iter().zip(&self.values).enumerate().all(|(j, (&x, &v))| {
            (j >= self.first && j <= self.first + self.cells) || (v - self.exterior.eval(x)).abs() <= tol
        })
    }
}

/// Parts of the truncated functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct EnergyBreakdown {
    pub interior: f64,
    pub exchange: f64,
    pub farfield: f64,
    pub total: f64,
    /// Set when `sup |u| > M`; the formula is still evaluated.
    pub truncation_warning: bool,
}

#[derive(Debug, Clone, Copy)]
struct LinPoint {
    w: f64,
    len: u8,
    idx: [u32; 4],
    c: [f64; 4],
}

#[derive(Debug, Clone, Copy)]
struct XPoint {
    i0: u32,
    i1: u32,
    b0: f64,
    b1: f64,
    z0: u32,
    z1: u32,
}

#[derive(Debug, Clone, Copy)]
struct ZPoint {
    wr: f64,
    inv_r: f64,
    phi_r: f64,
    lo: f64,
    hi: f64,
    far: bool,
}

#[derive(Debug, Clone, Copy)]
enum AbsTerm {
    // coef * |u[idx] - value|, exchange part
    Node { coef: f64, idx: u32, value: f64 },
    // coef * |u[i] - u[j]|, interior part
    Pair { coef: f64, i: u32, j: u32 },
}

/// A term `coef |u[idx] - value|` of the discrete energy: the innermost
/// boundary layer, where the exchange integrand is `2 Lambda |u - phi| / r`.
/// The energy is not differentiable where `u[idx] = value`; gradients use
/// the zero subgradient there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kink {
    pub idx: usize,
    pub coef: f64,
    pub value: f64,
}

/// Quadrature of the truncated functional for one kernel, domain, exterior
/// datum and truncation height.
#[derive(Debug, Clone)]
pub struct Discretization {
    kernel: Kernel,
    domain: Domain1D,
    phi: ExteriorData,
    m: f64,
    h: f64,
    cells: usize,
    basis: Basis,
    opts: QuadOptions,
    interior: Vec<LinPoint>,
    xpts: Vec<XPoint>,
    zpts: Vec<ZPoint>,
    abs_terms: Vec<AbsTerm>,
    /// u-independent exchange energy of the innermost boundary layers.
    constant: f64,
}

/// Energy, gradient and optional Hessian at one field.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub energy: EnergyBreakdown,
    pub gradient: Vec<f64>,
    pub hessian: Option<DMatrix<f64>>,
    /// Curvature of a quadratic that lies above the energy and touches it at
    /// the evaluation point, from the weights `G(q)/q`.
    pub majorizer: Option<DMatrix<f64>>,
}

// int_a^{a+len} G, by quadrature when the interval is short against its
// distance from the origin
fn g_span(k: &Kernel, a: f64, len: f64) -> f64 {
    if len == 0.0 {
        return 0.0;
    }
    let half = 0.5 * len;
    let mid = a + half;
    if half.abs() <= 0.25 * (1.0 + mid.abs()) {
        quad::rule(8).iter().map(|&(x, w)| half * w * k.G(mid + half * x)).sum()
    } else {
        k.GG(a + len) - k.GG(a)
    }
}

// G(q)/q, which is at least g(q) since G is concave on the half-line
fn secant(big_g: f64, g: f64, q: f64) -> f64 {
    if q.abs() < 1e-6 {
        g
    } else {
        big_g / q
    }
}

// smallest subgradient of |v|
fn sign(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum()
    }
}

const CHUNK: usize = 256;

impl Discretization {
    pub fn new(
        kernel: &Kernel,
        domain: &Domain1D,
        h: f64,
        phi: &ExteriorData,
        m: f64,
        basis: Basis,
        opts: QuadOptions,
    ) -> Result<Self, FunctionalError> {
        if kernel.spec().n != 1 {
            return Err(FunctionalError::Dimension(kernel.spec().n));
        }
        if !(m >= 0.0) {
            return Err(FunctionalError::Truncation(m));
        }
        let len = domain.diam();
        let cf = len / h;
        let cells = cf.round() as usize;
        if cells == 0 || (cf - cells as f64).abs() > 1e-9 * cf.max(1.0) {
            return Err(FunctionalError::Spacing { h, len });
        }
        let h = len / cells as f64;
        let mut d = Discretization {
            kernel: kernel.clone(),
            domain: *domain,
            phi: phi.clone(),
            m,
            h,
            cells,
            basis,
            opts,
            interior: Vec::new(),
            xpts: Vec::new(),
            zpts: Vec::new(),
            abs_terms: Vec::new(),
            constant: 0.0,
        };
        match basis {
            Basis::Linear => d.build_interior_linear(),
            Basis::Step => d.build_interior_step(),
        }
        d.build_exchange();
        Ok(d)
    }

    pub fn unknowns(&self) -> usize {
        match self.basis {
            Basis::Linear => self.cells + 1,
            Basis::Step => self.cells,
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    pub fn exterior(&self) -> &ExteriorData {
        &self.phi
    }

    pub fn truncation(&self) -> f64 {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn options(&self) -> &QuadOptions {
        &self.opts
    }

    /// Positions of the unknowns: nodes, or cell midpoints for step fields.
    pub fn positions(&self) -> Vec<f64> {
        match self.basis {
            Basis::Linear => (0..=self.cells).map(|i| self.domain.a + i as f64 * self.h).collect(),
            Basis::Step => (0..self.cells).map(|i| self.domain.a + (i as f64 + 0.5) * self.h).collect(),
        }
    }

    /// Boundary kinks of the energy in the unknowns.
    pub fn kinks(&self) -> Vec<Kink> {
        self.abs_terms
            .iter()
            .filter_map(|t| match *t {
                AbsTerm::Node { coef, idx, value } => Some(Kink { idx: idx as usize, coef, value }),
                AbsTerm::Pair { .. } => None,
            })
            .collect()
    }

    pub fn quadrature_size(&self) -> (usize, usize) {
        (self.interior.len(), self.zpts.len())
    }

    fn push_lin(&mut self, w: f64, terms: &[(usize, f64)]) {
        let mut p = LinPoint { w, len: terms.len() as u8, idx: [0; 4], c: [0.0; 4] };
        for (k, &(i, c)) in terms.iter().enumerate() {
            p.idx[k] = i as u32;
            p.c[k] = c;
        }
        self.interior.push(p);
    }

    fn build_interior_linear(&mut self) {
        let s = self.kernel.s();
        let h = self.h;
        let n = self.cells;
        let hs = h.powf(2.0 - s);
        // same cell: the difference quotient is the slope
        let wsame = 2.0 * hs / ((1.0 - s) * (2.0 - s));
        for i in 1..=n {
            self.push_lin(wsame, &[(i - 1, -1.0 / h), (i, 1.0 / h)]);
        }
        // adjacent cells sharing node i, Duffy on the two triangles, both orders
        let rule: Vec<(f64, f64)> = quad::mapped(self.opts.duffy_points, 0.0, 1.0).collect();
        for i in 1..n {
            for &(w, wt) in &rule {
                let base = 2.0 * hs / (2.0 - s) * wt * (1.0 + w).powf(-s);
                let den = h * (1.0 + w);
                self.push_lin(base, &[(i - 1, -1.0 / den), (i, (1.0 - w) / den), (i + 1, w / den)]);
                self.push_lin(base, &[(i - 1, -w / den), (i, (w - 1.0) / den), (i + 1, 1.0 / den)]);
            }
        }
        // separated cells, tensor rule, both orders
        for ci in 0..n {
            for cj in ci + 2..n {
                let gap = cj - ci;
                let np = self.pair_points(gap);
                let ri: Vec<(f64, f64)> = quad::mapped(np, 0.0, 1.0).collect();
                for &(tx, wx) in &ri {
                    let x = self.domain.a + (ci as f64 + tx) * h;
                    for &(ty, wy) in &ri {
                        let y = self.domain.a + (cj as f64 + ty) * h;
                        let r = y - x;
                        let w = 2.0 * wx * wy * h * h * r.powf(-s);
                        // q = (u(x) - u(y)) / (x - y)
                        let inv = 1.0 / (x - y);
                        self.push_lin(
                            w,
                            &[(ci, (1.0 - tx) * inv), (ci + 1, tx * inv), (cj, -(1.0 - ty) * inv), (cj + 1, -ty * inv)],
                        );
                    }
                }
            }
        }
    }

    fn pair_points(&self, gap: usize) -> usize {
        let base = match gap {
            0..=2 => 8,
            3..=4 => 6,
            5..=10 => 4,
            _ => 3,
        };
        base + self.opts.extra
    }

    fn build_interior_step(&mut self) {
        let s = self.kernel.s();
        let h = self.h;
        let n = self.cells;
        let lam = self.kernel.big_lambda();
        // offsets d >= 1 reduce to int k(r) m_d(r) dr with a tent m_d
        let mut rules: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n);
        rules.push(Vec::new());
        let levels = self.opts.boundary_levels + 10;
        let lp = self.opts.level_points + 2;
        for d in 1..n {
            let mut pts = Vec::new();
            let dc = d as f64 * h;
            if d == 1 {
                let mut top = h;
                for _ in 0..levels {
                    for (r, w) in quad::mapped(lp, 0.5 * top, top) {
                        pts.push((r, w * r));
                    }
                    top *= 0.5;
                }
            } else {
                for (r, w) in quad::mapped(self.pair_points(d), dc - h, dc) {
                    pts.push((r, w * (h - (dc - r))));
                }
            }
            for (r, w) in quad::mapped(self.pair_points(d.max(2)), dc, dc + h) {
                pts.push((r, w * (h - (r - dc))));
            }
            rules.push(pts);
        }
        let eps = h * 0.5f64.powi(levels as i32);
        for ci in 0..n {
            for cj in ci + 1..n {
                let d = cj - ci;
                for k in 0..rules[d].len() {
                    let (r, w) = rules[d][k];
                    self.push_lin(2.0 * w * r.powf(-s), &[(ci, 1.0 / r), (cj, -1.0 / r)]);
                }
                if d == 1 {
                    // int_0^eps GG(D/r) r^{1-s} dr ~ Lambda |D| eps^{1-s}/(1-s), both orders
                    let coef = 2.0 * lam * eps.powf(1.0 - s) / (1.0 - s);
                    self.abs_terms.push(AbsTerm::Pair { coef, i: ci as u32, j: cj as u32 });
                }
            }
        }
    }

    fn x_rule(&self) -> Vec<(usize, f64, f64)> {
        // (cell counted from the boundary, xi, weight) for one side
        let h = self.h;
        let mut out = Vec::new();
        let mut top = h;
        for _ in 0..self.opts.boundary_levels {
            for (xi, w) in quad::mapped(self.opts.level_points, 0.5 * top, top) {
                out.push((0, xi, w));
            }
            top *= 0.5;
        }
        for k in 1..self.cells {
            let np = match k {
                1 => 8,
                2..=3 => 6,
                4..=7 => 5,
                _ => 4,
            } + self.opts.extra;
            for (xi, w) in quad::mapped(np, k as f64 * h, (k + 1) as f64 * h) {
                out.push((k, xi, w));
            }
        }
        out
    }

    fn build_exchange(&mut self) {
        let s = self.kernel.s();
        let h = self.h;
        let n = self.cells;
        let lam = self.kernel.big_lambda();
        let m = self.m;
        let (a, b, wwin) = (self.domain.a, self.domain.b, self.domain.w);
        let kinks = self.phi.kinks();
        let xr = self.x_rule();
        let eps = h * 0.5f64.powi(self.opts.boundary_levels as i32);
        let r_top = self.opts.r_top;
        let tail: Vec<(f64, f64)> = quad::mapped(self.opts.tail_points, 0.0, 1.0).collect();
        for side in [1.0f64, -1.0] {
            let edge = if side > 0.0 { b } else { a };
            for &(k, xi, wx) in &xr {
                // cell index counted from the left and position inside it
                let x = edge - side * xi;
                let cell = if side > 0.0 { n - 1 - k } else { k };
                let theta = (x - (a + cell as f64 * h)) / h;
                let (i0, i1, b0, b1) = match self.basis {
                    Basis::Linear => (cell, cell + 1, 1.0 - theta, theta),
                    Basis::Step => (cell, cell, 1.0, 0.0),
                };
                let z0 = self.zpts.len() as u32;
                let mut breaks = vec![xi.ln(), (xi + wwin).ln()];
                for &kp in &kinks {
                    let eta = side * (kp - edge);
                    if eta > 0.0 {
                        breaks.push((xi + eta).ln());
                    }
                }
                breaks.push(r_top.ln());
                breaks.sort_by(f64::total_cmp);
                breaks.dedup_by(|p, q| (*p - *q).abs() < 1e-12);
                let win_z = (xi + wwin).ln();
                for seg in breaks.windows(2) {
                    let (za, zb) = (seg[0], seg[1]);
                    let panels = ((zb - za) / self.opts.z_width).ceil().max(1.0) as usize;
                    let dz = (zb - za) / panels as f64;
                    for p in 0..panels {
                        let lo = za + p as f64 * dz;
                        for (z, wz) in quad::mapped(self.opts.z_points, lo, lo + dz) {
                            let r = z.exp();
                            let y = edge + side * (r - xi);
                            let far = z > win_z;
                            self.push_z(wx * wz * r.powf(1.0 - s), r, y, far);
                        }
                    }
                }
                // beyond r_top: r = r_top v^{-1/s}, r^{-1-s} dr = r_top^{-s}/s dv
                for &(v, wv) in &tail {
                    let r = (r_top.ln() - v.ln() / s).exp().min(1e300);
                    let y = edge + side * (r - xi);
                    self.push_z(wx * wv * r_top.powf(-s) / s * r, r, y, true);
                }
                let z1 = self.zpts.len() as u32;
                self.xpts.push(XPoint { i0: i0 as u32, i1: i1 as u32, b0, b1, z0, z1 });
            }
            // innermost layer of the boundary cell: Phi ~ J / r as r -> 0
            let node = match (self.basis, side > 0.0) {
                (Basis::Linear, true) => n,
                (Basis::Linear, false) => 0,
                (Basis::Step, true) => n - 1,
                (Basis::Step, false) => 0,
            };
            let pb = self.phi.eval(edge);
            let layer = eps.powf(1.0 - s) / (s * (1.0 - s));
            self.abs_terms.push(AbsTerm::Node { coef: 2.0 * lam * layer, idx: node as u32, value: pb });
            self.constant += lam * (2.0 * m - (m + pb).abs() - (m - pb).abs()) * layer;
        }
    }

    fn push_z(&mut self, wr: f64, r: f64, y: f64, far: bool) {
        let phi = self.phi.eval(y);
        let inv_r = 1.0 / r;
        self.zpts.push(ZPoint {
            wr,
            inv_r,
            phi_r: phi * inv_r,
            lo: (-self.m - phi) * inv_r,
            hi: (self.m - phi) * inv_r,
            far,
        });
    }

    fn check_len(&self, u: &[f64]) -> Result<(), FunctionalError> {
        if u.len() != self.unknowns() {
            return Err(FunctionalError::Length { got: u.len(), want: self.unknowns() });
        }
        Ok(())
    }

    // value and its derivative with respect to the two listed unknowns
    fn abs_value(t: &AbsTerm, u: &[f64]) -> (f64, [(usize, f64); 2]) {
        match *t {
            AbsTerm::Node { coef, idx, value } => {
                let v = u[idx as usize] - value;
                (coef * v.abs(), [(idx as usize, coef * sign(v)), (idx as usize, 0.0)])
            }
            AbsTerm::Pair { coef, i, j } => {
                let v = u[i as usize] - u[j as usize];
                let d = coef * sign(v);
                (coef * v.abs(), [(i as usize, d), (j as usize, -d)])
            }
        }
    }

    /// Energy parts, gradient and optionally the Hessian together with a
    /// quadratic majorizer.
    pub fn evaluate(&self, u: &[f64], want_hessian: bool) -> Result<Evaluation, FunctionalError> {
        self.check_len(u)?;
        let nu = self.unknowns();
        let k = &self.kernel;
        let mat = || if want_hessian { Some(DMatrix::zeros(nu, nu)) } else { None };

        type Part = (f64, Vec<f64>, Option<DMatrix<f64>>, Option<DMatrix<f64>>);
        let interior_parts: Vec<Part> = self
            .interior
            .par_chunks(CHUNK * 16)
            .map(|chunk| {
                let mut e = Vec::with_capacity(chunk.len());
                let mut g = vec![0.0; nu];
                let mut hm = mat();
                let mut mm = mat();
                for p in chunk {
                    let l = p.len as usize;
                    let mut q = 0.0;
                    for j in 0..l {
                        q += p.c[j] * u[p.idx[j] as usize];
                    }
                    e.push(p.w * k.GG(q));
                    let big_g = k.G(q);
                    let gq = p.w * big_g;
                    for j in 0..l {
                        g[p.idx[j] as usize] += gq * p.c[j];
                    }
                    if let (Some(hm), Some(mm)) = (hm.as_mut(), mm.as_mut()) {
                        let gs = k.g(q);
                        let hq = p.w * gs;
                        let sq = p.w * secant(big_g, gs, q);
                        for j1 in 0..l {
                            let r = p.idx[j1] as usize;
                            for j2 in 0..l {
                                let cc = p.c[j1] * p.c[j2];
                                let c = p.idx[j2] as usize;
                                hm[(r, c)] += hq * cc;
                                mm[(r, c)] += sq * cc;
                            }
                        }
                    }
                }
                (quad::pairwise_sum(&e), g, hm, mm)
            })
            .collect();

        // near, far, gradient, then diagonal and superdiagonal of both matrices
        type ExPart = (f64, f64, Vec<f64>, [Vec<f64>; 4]);
        let ex_parts: Vec<ExPart> = self
            .xpts
            .par_chunks(CHUNK / 4)
            .map(|chunk| {
                let mut near = Vec::with_capacity(chunk.len());
                let mut far = Vec::with_capacity(chunk.len());
                let mut g = vec![0.0; nu];
                let mut band = [vec![0.0; nu], vec![0.0; nu], vec![0.0; nu], vec![0.0; nu]];
                for xp in chunk {
                    let ux = xp.b0 * u[xp.i0 as usize] + xp.b1 * u[xp.i1 as usize];
                    let (mut en, mut ef, mut gx, mut hx, mut mx) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    for zp in &self.zpts[xp.z0 as usize..xp.z1 as usize] {
                        let q = ux * zp.inv_r - zp.phi_r;
                        let phi = k.gbar_span(zp.lo, (ux + self.m) * zp.inv_r)
                            + k.gbar_span(-zp.hi, (self.m - ux) * zp.inv_r);
                        if zp.far {
                            ef += zp.wr * phi;
                        } else {
                            en += zp.wr * phi;
                        }
                        let big_g = k.G(q);
                        gx += zp.wr * 2.0 * big_g * zp.inv_r;
                        if want_hessian {
                            let gs = k.g(q);
                            let f = zp.wr * 2.0 * zp.inv_r * zp.inv_r;
                            hx += f * gs;
                            mx += f * secant(big_g, gs, q);
                        }
                    }
                    near.push(en);
                    far.push(ef);
                    let (i0, i1) = (xp.i0 as usize, xp.i1 as usize);
                    g[i0] += xp.b0 * gx;
                    g[i1] += xp.b1 * gx;
                    if want_hessian {
                        for (t, v) in [(0, hx), (2, mx)] {
                            band[t][i0] += xp.b0 * xp.b0 * v;
                            band[t][i1] += xp.b1 * xp.b1 * v;
                            if i1 != i0 {
                                band[t + 1][i0] += xp.b0 * xp.b1 * v;
                            }
                        }
                    }
                }
                (quad::pairwise_sum(&near), quad::pairwise_sum(&far), g, band)
            })
            .collect();

        let mut grad = vec![0.0; nu];
        let mut hess = mat();
        let mut major = mat();
        let mut interior_e = Vec::with_capacity(interior_parts.len());
        for (e, g, hm, mm) in interior_parts {
            interior_e.push(e);
            for i in 0..nu {
                grad[i] += g[i];
            }
            if let (Some(acc), Some(hm)) = (hess.as_mut(), hm) {
                *acc += hm;
            }
            if let (Some(acc), Some(mm)) = (major.as_mut(), mm) {
                *acc += mm;
            }
        }
        let mut near_e = Vec::with_capacity(ex_parts.len());
        let mut far_e = Vec::with_capacity(ex_parts.len());
        for (en, ef, g, band) in ex_parts {
            near_e.push(en);
            far_e.push(ef);
            for i in 0..nu {
                grad[i] += g[i];
            }
            for (t, acc) in [(0, hess.as_mut()), (2, major.as_mut())] {
                if let Some(acc) = acc {
                    for i in 0..nu {
                        acc[(i, i)] += band[t][i];
                        if band[t + 1][i] != 0.0 {
                            acc[(i, i + 1)] += band[t + 1][i];
                            acc[(i + 1, i)] += band[t + 1][i];
                        }
                    }
                }
            }
        }
        let mut interior = quad::pairwise_sum(&interior_e);
        let mut exchange = quad::pairwise_sum(&near_e) + self.constant;
        let farfield = quad::pairwise_sum(&far_e);
        let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for t in &self.abs_terms {
            let (v, dv) = Self::abs_value(t, u);
            match t {
                AbsTerm::Node { .. } => exchange += v,
                AbsTerm::Pair { .. } => interior += v,
            }
            for (i, d) in dv {
                grad[i] += d;
            }
            if let Some(mm) = major.as_mut() {
                // |v| <= (v^2 + v0^2) / (2 |v0|)
                let (coef, i, j, arg) = match *t {
                    AbsTerm::Node { coef, idx, value } => (coef, idx as usize, None, u[idx as usize] - value),
                    AbsTerm::Pair { coef, i, j } => (coef, i as usize, Some(j as usize), u[i as usize] - u[j as usize]),
                };
                let w = coef / arg.abs().max(1e-12 * scale);
                mm[(i, i)] += w;
                if let Some(j) = j {
                    mm[(j, j)] += w;
                    mm[(i, j)] -= w;
                    mm[(j, i)] -= w;
                }
            }
        }
        let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Evaluation {
            energy: EnergyBreakdown {
                interior,
                exchange,
                farfield,
                total: interior + exchange + farfield,
                truncation_warning: sup > self.m,
            },
            gradient: grad,
            hessian: hess,
            majorizer: major,
        })
    }

    /// `F(v) - F(u)`, summed from per-point differences so that small
    /// changes of a large energy keep their relative accuracy.
    pub fn energy_difference(&self, u: &[f64], v: &[f64]) -> Result<f64, FunctionalError> {
        self.check_len(u)?;
        self.check_len(v)?;
        let k = &self.kernel;
        let interior: Vec<f64> = self
            .interior
            .par_chunks(CHUNK * 16)
            .map(|chunk| {
                let e: Vec<f64> = chunk
                    .iter()
                    .map(|p| {
                        let (mut qa, mut dq) = (0.0, 0.0);
                        for j in 0..p.len as usize {
                            let i = p.idx[j] as usize;
                            qa += p.c[j] * u[i];
                            dq += p.c[j] * (v[i] - u[i]);
                        }
                        p.w * g_span(k, qa, dq)
                    })
                    .collect();
                quad::pairwise_sum(&e)
            })
            .collect();
        let exchange: Vec<f64> = self
            .xpts
            .par_chunks(CHUNK / 4)
            .map(|chunk| {
                let e: Vec<f64> = chunk
                    .iter()
                    .map(|xp| {
                        let (i0, i1) = (xp.i0 as usize, xp.i1 as usize);
                        let ua = xp.b0 * u[i0] + xp.b1 * u[i1];
                        let du = xp.b0 * (v[i0] - u[i0]) + xp.b1 * (v[i1] - u[i1]);
                        if du == 0.0 {
                            return 0.0;
                        }
                        let mut acc = 0.0;
                        for zp in &self.zpts[xp.z0 as usize..xp.z1 as usize] {
                            acc += zp.wr * 2.0 * g_span(k, ua * zp.inv_r - zp.phi_r, du * zp.inv_r);
                        }
                        acc
                    })
                    .collect();
                quad::pairwise_sum(&e)
            })
            .collect();
        let mut total = quad::pairwise_sum(&interior) + quad::pairwise_sum(&exchange);
        for t in &self.abs_terms {
            total += Self::abs_value(t, v).0 - Self::abs_value(t, u).0;
        }
        Ok(total)
    }

    pub fn energy(&self, u: &[f64]) -> Result<EnergyBreakdown, FunctionalError> {
        Ok(self.evaluate(u, false)?.energy)
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>, FunctionalError> {
        Ok(self.evaluate(u, false)?.gradient)
    }

    /// `A_s` alone.
    pub fn energy_interior(&self, u: &[f64]) -> Result<f64, FunctionalError> {
        self.check_len(u)?;
        let k = &self.kernel;
        let parts: Vec<f64> = self
            .interior
            .par_chunks(CHUNK * 16)
            .map(|chunk| {
                let e: Vec<f64> = chunk
                    .iter()
                    .map(|p| {
                        let mut q = 0.0;
                        for j in 0..p.len as usize {
                            q += p.c[j] * u[p.idx[j] as usize];
                        }
                        p.w * k.GG(q)
                    })
                    .collect();
                quad::pairwise_sum(&e)
            })
            .collect();
        let mut total = quad::pairwise_sum(&parts);
        for t in self.abs_terms.iter().filter(|t| matches!(t, AbsTerm::Pair { .. })) {
            total += Self::abs_value(t, u).0;
        }
        Ok(total)
    }

    /// Discrete `W^{s,1}(Omega)` seminorm, on the same quadrature as `A_s`.
    pub fn ws1_seminorm(&self, u: &[f64]) -> Result<f64, FunctionalError> {
        self.check_len(u)?;
        let terms: Vec<f64> = self
            .interior
            .iter()
            .map(|p| {
                let mut q = 0.0;
                for j in 0..p.len as usize {
                    q += p.c[j] * u[p.idx[j] as usize];
                }
                p.w * q.abs()
            })
            .collect();
        let mut total = quad::pairwise_sum(&terms);
        for t in self.abs_terms.iter().filter(|t| matches!(t, AbsTerm::Pair { .. })) {
            total += Self::abs_value(t, u).0 / self.kernel.big_lambda();
        }
        Ok(total)
    }

    /// Weak curvature pairing of u against a test field on the unknowns.
    pub fn pairing(&self, u: &[f64], v: &[f64]) -> Result<f64, FunctionalError> {
        self.check_len(v)?;
        let g = self.gradient(u)?;
        Ok(g.iter().zip(v).map(|(a, b)| a * b).sum())
    }

    /// Weak curvature pairing on full grid fields; the test field must
    /// vanish on every exterior node.
    pub fn weak_curvature_pairing(&self, u: &ScalarField, v: &ScalarField) -> Result<f64, FunctionalError> {
        for (j, &val) in v.values.iter().enumerate() {
            if (j < v.first || j > v.first + v.cells) && val != 0.0 {
                return Err(FunctionalError::ExteriorSupport(j));
            }
        }
        self.pairing(u.omega_values(), v.omega_values())
    }
}
