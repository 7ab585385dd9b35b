use super::pixel::{FarField, PixelSet, Rect, Window};
use super::polar::{angular, breakpoints, ray_mass, rect_integral, slab};
use super::{check_dimension, GeometryError};
use crate::kernel::KernelSpec;
use crate::quad::pairwise_sum;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

/// Cell-pair interactions on the unit lattice:
/// `K(d) = int_{[0,1]^2} int_{[0,1]^2} |x - y + d|^{-2-s}`, which equals
/// `int_{[-1,1]^2} (1-|z1|)(1-|z2|) |z + d|^{-2-s} dz`.
#[derive(Debug, Clone)]
pub struct PairTable {
    s: f64,
    m: usize,
    vals: Vec<f64>,
}

impl PairTable {
    /// Offsets `|d1|, |d2| < m`.
    pub fn new(s: f64, m: usize) -> Self {
        let canon: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..=a).map(move |b| (a, b))).collect();
        let vals_c: Vec<f64> = canon.par_iter().map(|&(a, b)| unit_pair(a as f64, b as f64, s)).collect();
        let mut vals = vec![0.0; m * m];
        for (&(a, b), v) in canon.iter().zip(vals_c) {
            vals[a * m + b] = v;
            vals[b * m + a] = v;
        }
        PairTable { s, m, vals }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn get(&self, d1: isize, d2: isize) -> f64 {
        self.vals[d1.unsigned_abs() * self.m + d2.unsigned_abs()]
    }
}

fn unit_pair(d1: f64, d2: f64, s: f64) -> f64 {
    if d1 == 0.0 && d2 == 0.0 {
        return 0.0;
    }
    let pieces = |d: f64| [(d - 1.0, d, (1.0 - d, 1.0)), (d, d + 1.0, (1.0 + d, -1.0))];
    let mut total = 0.0;
    for (x0, x1, wx) in pieces(d1) {
        for (y0, y1, wy) in pieces(d2) {
            total += rect_integral([x0, x1, y0, y1], wx, wy, 0.0, s);
        }
    }
    total
}

/// Discrete convolution with the pair table by zero-padded FFT.
struct Convolver {
    nx: usize,
    ny: usize,
    px: usize,
    py: usize,
    khat: Vec<Complex64>,
}

impl Convolver {
    fn new(table: &PairTable, nx: usize, ny: usize) -> Self {
        let (px, py) = (2 * nx, 2 * ny);
        let mut k = vec![Complex64::new(0.0, 0.0); px * py];
        for iy in 0..py {
            let dy = if iy < ny { iy as isize } else if iy > py - ny { iy as isize - py as isize } else { continue };
            for ix in 0..px {
                let dx = if ix < nx { ix as isize } else if ix > px - nx { ix as isize - px as isize } else { continue };
                k[iy * px + ix] = Complex64::new(table.get(dx, dy), 0.0);
            }
        }
        fft2(&mut k, px, py, false);
        Convolver { nx, ny, px, py, khat: k }
    }

    /// `out(a) = sum_b K(a - b) v(b)`
    fn apply(&self, v: &[bool]) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.px * self.py];
        for j in 0..self.ny {
            for i in 0..self.nx {
                if v[j * self.nx + i] {
                    buf[j * self.px + i].re = 1.0;
                }
            }
        }
        fft2(&mut buf, self.px, self.py, false);
        for (b, k) in buf.iter_mut().zip(&self.khat) {
            *b *= k;
        }
        fft2(&mut buf, self.px, self.py, true);
        let scale = 1.0 / (self.px * self.py) as f64;
        let mut out = vec![0.0; self.nx * self.ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                out[j * self.nx + i] = buf[j * self.px + i].re * scale;
            }
        }
        out
    }
}

fn fft2(data: &mut [Complex64], px: usize, py: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (fx, fy) = if inverse {
        (planner.plan_fft_inverse(px), planner.plan_fft_inverse(py))
    } else {
        (planner.plan_fft_forward(px), planner.plan_fft_forward(py))
    };
    fx.process(data);
    let mut t = vec![Complex64::new(0.0, 0.0); px * py];
    for j in 0..py {
        for i in 0..px {
            t[i * py + j] = data[j * px + i];
        }
    }
    fy.process(&mut t);
    for j in 0..py {
        for i in 0..px {
            data[j * px + i] = t[i * py + j];
        }
    }
}

/// `sum_{a in A, b in B} K(a - b)` over window cells, unscaled.
fn lattice_sum(conv: &Convolver, a: &[bool], b: &[bool]) -> f64 {
    if !a.iter().any(|&x| x) || !b.iter().any(|&x| x) {
        return 0.0;
    }
    let cb = conv.apply(b);
    let terms: Vec<f64> = cb.iter().zip(a).map(|(v, &m)| if m { *v } else { 0.0 }).collect();
    pairwise_sum(&terms)
}

/// Cell integrals `int_cell int_{far set beyond the window} |X-Y|^{-2-s}`
/// for the far set and for its complement beyond the window, by a tensor
/// Gauss rule of `g` points per axis in X and rays in Y.
fn far_potentials(w: &Window, far: &FarField, cells: &[(usize, usize)], s: f64, g: usize) -> Vec<[f64; 2]> {
    let bdry = far.boundary();
    let rect = w.bounds();
    let nodes = crate::quad::rule(g);
    cells
        .par_iter()
        .map(|&(i, j)| {
            let r = w.rect(i as isize, j as isize);
            let mut acc = [0.0; 2];
            for &(u, wu) in nodes {
                for &(v, wv) in nodes {
                    let x = [0.5 * (r[0] + r[1]) + 0.5 * w.h * u, 0.5 * (r[2] + r[3]) + 0.5 * w.h * v];
                    let br = breakpoints(&bdry, x, Some(rect), 0.0);
                    let p = angular(&br, 2.0 * PI, |d| {
                        let exit = slab(&rect, x, d).map(|t| t.1).unwrap_or(0.0);
                        let (inside, total) = ray_mass(far, &bdry, x, d, exit, None, s);
                        [inside, total - inside]
                    });
                    let wgt = 0.25 * wu * wv * w.h * w.h;
                    acc[0] += wgt * p[0];
                    acc[1] += wgt * p[1];
                }
            }
            acc
        })
        .collect()
}

fn indices(w: &Window, m: &[bool]) -> Vec<(usize, usize)> {
    (0..w.ny).flat_map(|j| (0..w.nx).map(move |i| (i, j))).filter(|&(i, j)| m[w.index(i, j)]).collect()
}

/// Interaction `L_s(A, B)` of disjoint pixel sets sharing a window.
pub fn interaction(spec: &KernelSpec, a: &PixelSet, b: &PixelSet) -> Result<f64, GeometryError> {
    check_dimension(spec)?;
    let w = *a.window();
    if w != *b.window() {
        return Err(GeometryError::WindowMismatch);
    }
    for j in 0..w.ny {
        for i in 0..w.nx {
            if a.get(i, j) && b.get(i, j) {
                return Err(GeometryError::Overlap((i, j)));
            }
        }
    }
    if !a.is_bounded() && !b.is_bounded() {
        return Err(GeometryError::FarFar);
    }
    let s = spec.s;
    let table = PairTable::new(s, w.nx.max(w.ny));
    let conv = Convolver::new(&table, w.nx, w.ny);
    // both orders, so that swapping the arguments gives the same bits
    let ab = lattice_sum(&conv, a.occupancy(), b.occupancy());
    let ba = lattice_sum(&conv, b.occupancy(), a.occupancy());
    let lattice = 0.5 * w.h.powf(2.0 - s) * (ab + ba);
    let far_part = |near: &PixelSet, far: &PixelSet| {
        if far.is_bounded() {
            return 0.0;
        }
        let cells = indices(&w, near.occupancy());
        let pots = far_potentials(&w, far.far(), &cells, s, 2);
        pairwise_sum(&pots.iter().map(|p| p[0]).collect::<Vec<_>>())
    };
    let total = lattice + (far_part(a, b) + far_part(b, a));
    Ok(total)
}

/// The two terms of the perimeter decomposition and their far-field shares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerimeterBreakdown {
    /// `L_s(E n O, C E)`
    pub inner: f64,
    /// `L_s(E \ O, O \ E)`
    pub outer: f64,
    pub total: f64,
    /// Part of `total` coming from beyond the window.
    pub far: f64,
}

/// Fractional perimeter in a fixed region for sets sharing a window and a far
/// field; the pair table, its transform and the far potentials on the region
/// are computed once.
pub struct PerimeterEngine {
    s: f64,
    window: Window,
    far: FarField,
    region: Vec<bool>,
    table: PairTable,
    conv: Convolver,
    pot: Vec<[f64; 2]>,
    pot_rel_err: f64,
}

impl PerimeterEngine {
    pub fn new(spec: &KernelSpec, window: Window, far: FarField, region: &Rect) -> Result<Self, GeometryError> {
        check_dimension(spec)?;
        far.validate()?;
        let s = spec.s;
        let mask = region.mask(&window)?;
        let table = PairTable::new(s, window.nx.max(window.ny));
        let conv = Convolver::new(&table, window.nx, window.ny);
        let cells = indices(&window, &mask);
        let mut pot = vec![[0.0; 2]; window.cells()];
        let mut pot_rel_err = 0.0;
        if !cells.is_empty() {
            let vals = far_potentials(&window, &far, &cells, s, 2);
            // a refined rule on a few cells measures the error of the default one
            let step = (cells.len() / 8).max(1);
            let probe: Vec<usize> = (0..cells.len()).step_by(step).collect();
            let fine = far_potentials(&window, &far, &probe.iter().map(|&k| cells[k]).collect::<Vec<_>>(), s, 4);
            for (&k, f) in probe.iter().zip(&fine) {
                for q in 0..2 {
                    if f[q] > 0.0 {
                        pot_rel_err = f64::max(pot_rel_err, (vals[k][q] - f[q]).abs() / f[q]);
                    }
                }
            }
            for (&(i, j), v) in cells.iter().zip(vals) {
                pot[window.index(i, j)] = v;
            }
        }
        Ok(PerimeterEngine { s, window, far, region: mask, table, conv, pot, pot_rel_err })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn region(&self) -> &[bool] {
        &self.region
    }

    pub fn pair_table(&self) -> &PairTable {
        &self.table
    }

    fn check(&self, e: &PixelSet) -> Result<(), GeometryError> {
        if *e.window() != self.window || *e.far() != self.far {
            return Err(GeometryError::WindowMismatch);
        }
        Ok(())
    }

    /// `Per_s(E, O) = L_s(E n O, C E) + L_s(E \ O, O \ E)`.
    pub fn perimeter(&self, e: &PixelSet) -> Result<PerimeterBreakdown, GeometryError> {
        self.check(e)?;
        let occ = e.occupancy();
        let o = &self.region;
        let scale = self.window.h.powf(2.0 - self.s);
        let e_in: Vec<bool> = occ.iter().zip(o).map(|(&x, &y)| x && y).collect();
        let not_e: Vec<bool> = occ.iter().map(|&x| !x).collect();
        let o_out: Vec<bool> = occ.iter().zip(o).map(|(&x, &y)| !x && y).collect();
        let e_out: Vec<bool> = occ.iter().zip(o).map(|(&x, &y)| x && !y).collect();
        let far_inner = pairwise_sum(&self.pot.iter().zip(&e_in).map(|(p, &m)| if m { p[1] } else { 0.0 }).collect::<Vec<_>>());
        let far_outer = pairwise_sum(&self.pot.iter().zip(&o_out).map(|(p, &m)| if m { p[0] } else { 0.0 }).collect::<Vec<_>>());
        let inner = scale * lattice_sum(&self.conv, &e_in, &not_e) + far_inner;
        let outer = scale * lattice_sum(&self.conv, &o_out, &e_out) + far_outer;
        Ok(PerimeterBreakdown { inner, outer, total: inner + outer, far: far_inner + far_outer })
    }

    /// The same quantity as one double sum over ordered cell pairs with at
    /// least one cell in O, halved. Quadratic cost; meant for checks.
    pub fn perimeter_direct(&self, e: &PixelSet) -> Result<f64, GeometryError> {
        self.check(e)?;
        let w = self.window;
        let occ = e.occupancy();
        let o = &self.region;
        let rows: Vec<f64> = (0..w.cells())
            .into_par_iter()
            .map(|a| {
                let (ai, aj) = ((a % w.nx) as isize, (a / w.nx) as isize);
                let mut terms = Vec::with_capacity(w.cells());
                for b in 0..w.cells() {
                    if occ[a] != occ[b] && (o[a] || o[b]) {
                        let (bi, bj) = ((b % w.nx) as isize, (b / w.nx) as isize);
                        terms.push(self.table.get(ai - bi, aj - bj));
                    }
                }
                pairwise_sum(&terms)
            })
            .collect();
        let lattice = 0.5 * w.h.powf(2.0 - self.s) * pairwise_sum(&rows);
        let far: Vec<f64> = (0..w.cells())
            .map(|a| match (o[a], occ[a]) {
                (true, true) => self.pot[a][1],
                (true, false) => self.pot[a][0],
                _ => 0.0,
            })
            .collect();
        Ok(lattice + pairwise_sum(&far))
    }

    /// Error estimate of a computed perimeter: the measured relative error of
    /// the far potentials on their share, plus round-off of the lattice sums.
    pub fn error_estimate(&self, p: &PerimeterBreakdown) -> f64 {
        self.pot_rel_err * p.far.abs() + 1e-12 * p.total.abs()
    }
}

/// `Per_s(E, O)` for a rectangle `O` inside the window.
pub fn fractional_perimeter(spec: &KernelSpec, e: &PixelSet, o: &Rect) -> Result<PerimeterBreakdown, GeometryError> {
    PerimeterEngine::new(spec, *e.window(), e.far().clone(), o)?.perimeter(e)
}
