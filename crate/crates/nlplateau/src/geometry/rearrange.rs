use super::perimeter::{PerimeterBreakdown, PerimeterEngine};
use super::pixel::{FarField, PixelSet, Rect, Window};
use super::GeometryError;
use crate::domain::{Domain1D, ExteriorData};
use crate::functional::{Basis, Discretization, QuadOptions};
use crate::kernel::Kernel;
use serde::Serialize;

/// A function constant on each window column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnFunction {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl ColumnFunction {
    pub fn column_of(&self, x: f64) -> Option<usize> {
        let i = ((x - self.x0) / self.h).floor();
        (i >= 0.0 && (i as usize) < self.values.len()).then_some(i as usize)
    }

    pub fn eval(&self, x: f64) -> Option<f64> {
        self.column_of(x).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    /// `w_F` on every window column; columns outside the domain keep `F`.
    pub w: ColumnFunction,
    /// Columns of the window whose centers lie in the domain.
    pub columns: Vec<usize>,
    pub subgraph: PixelSet,
}

fn omega_columns(w: &Window, omega: &Domain1D) -> Vec<usize> {
    (0..w.nx).filter(|&i| omega.contains(w.center(i as isize, 0)[0])).collect()
}

/// Occupancy of the subgraph of a column function: the lowest cells of each
/// column, `(value - y0) / h` of them.
pub fn subgraph_pixels(window: Window, far: FarField, w: &ColumnFunction) -> Result<PixelSet, GeometryError> {
    let mut occ = vec![false; window.cells()];
    for (i, &v) in w.values.iter().enumerate().take(window.nx) {
        let k = (v - window.y0) / window.h;
        let kr = k.round();
        if (k - kr).abs() > 1e-9 * k.abs().max(1.0) || kr < 0.0 || kr > window.ny as f64 {
            return Err(GeometryError::Quantization(v));
        }
        for j in 0..kr as usize {
            occ[window.index(i, j)] = true;
        }
    }
    PixelSet::new(window, occ, far)
}

/// Column-wise measure-preserving replacement of `F` by a subgraph in the
/// columns over the domain.
pub fn vertical_rearrangement(f: &PixelSet, omega: &Domain1D, m: f64) -> Result<Rearrangement, GeometryError> {
    if !(m >= 0.0) {
        return Err(GeometryError::Functional(crate::functional::FunctionalError::Truncation(m)));
    }
    let w = *f.window();
    let columns = omega_columns(&w, omega);
    let mut occ = f.occupancy().to_vec();
    let mut values: Vec<f64> = Vec::with_capacity(w.nx);
    for i in 0..w.nx {
        let count = (0..w.ny).filter(|&j| f.get(i, j)).count();
        values.push(w.y0 + count as f64 * w.h);
    }
    for &i in &columns {
        let x = w.center(i as isize, 0)[0];
        if !f.far().contains([x, w.y0 - 0.5 * w.h]) {
            return Err(GeometryError::Confinement { col: i, row: 0 });
        }
        if f.far().contains([x, w.y1() + 0.5 * w.h]) {
            return Err(GeometryError::Confinement { col: i, row: w.ny - 1 });
        }
        for j in 0..w.ny {
            let r = w.rect(i as isize, j as isize);
            if (r[3] <= -m && !f.get(i, j)) || (r[2] >= m && f.get(i, j)) {
                return Err(GeometryError::Confinement { col: i, row: j });
            }
        }
        let count = ((values[i] - w.y0) / w.h).round() as usize;
        for j in 0..w.ny {
            occ[w.index(i, j)] = j < count;
        }
    }
    let subgraph = f.with_occupancy(occ)?;
    Ok(Rearrangement { w: ColumnFunction { x0: w.x0, h: w.h, values }, columns, subgraph })
}

/// Geometry shared by both sides of the equivalence check.
#[derive(Debug, Clone)]
pub struct EquivalenceSetup {
    pub omega: Domain1D,
    /// Grid-aligned constant exterior data.
    pub phi: ExteriorData,
    pub m: f64,
    pub window: Window,
    pub opts: QuadOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub perimeter: [f64; 2],
    pub functional: [f64; 2],
    /// `Per - F^M` for each field.
    pub kappa: [f64; 2],
    pub offset: f64,
    /// Combined quadrature error estimate of the four evaluations.
    pub tolerance: f64,
}

/// Perimeter of the subgraph in the slab over the domain minus the truncated
/// functional, compared between two step fields with one value per window
/// cell over the domain.
pub fn equivalence_offset(kernel: &Kernel, setup: &EquivalenceSetup, u1: &[f64], u2: &[f64]) -> Result<EquivalenceReport, GeometryError> {
    let spec = kernel.spec();
    super::check_dimension(spec)?;
    let w = setup.window;
    let c = match setup.phi {
        ExteriorData::Constant { c } => c,
        _ => return Err(GeometryError::UnsupportedFarField("equivalence needs constant exterior data".into())),
    };
    let far = FarField::Subgraph { phi: setup.phi.clone() };
    let columns = omega_columns(&w, &setup.omega);
    let region = Rect { x0: setup.omega.a, x1: setup.omega.b, y0: -setup.m, y1: setup.m };
    let engine = PerimeterEngine::new(spec, w, far.clone(), &region)?;
    let disc = Discretization::new(kernel, &setup.omega, w.h, &setup.phi, setup.m, Basis::Step, setup.opts)?;
    let fine = Discretization::new(kernel, &setup.omega, w.h, &setup.phi, setup.m, Basis::Step, QuadOptions::fine())?;
    if disc.unknowns() != columns.len() {
        return Err(GeometryError::WindowMismatch);
    }
    let side = |u: &[f64]| -> Result<(PerimeterBreakdown, f64, f64, f64), GeometryError> {
        if u.len() != columns.len() {
            return Err(GeometryError::Occupancy { got: u.len(), want: columns.len() });
        }
        let mut values = vec![c; w.nx];
        for (k, &i) in columns.iter().enumerate() {
            values[i] = u[k];
        }
        let set = subgraph_pixels(w, far.clone(), &ColumnFunction { x0: w.x0, h: w.h, values })?;
        let per = engine.perimeter(&set)?;
        let per_err = engine.error_estimate(&per);
        let f = disc.energy(u)?.total;
        let f_fine = fine.energy(u)?.total;
        Ok((per, per_err, f, (f - f_fine).abs()))
    };
    let (p1, e1, f1, g1) = side(u1)?;
    let (p2, e2, f2, g2) = side(u2)?;
    let kappa = [p1.total - f1, p2.total - f2];
    let offset = if u1 == u2 { 0.0 } else { kappa[0] - kappa[1] };
    Ok(EquivalenceReport {
        perimeter: [p1.total, p2.total],
        functional: [f1, f2],
        kappa,
        offset,
        tolerance: e1 + e2 + g1 + g2,
    })
}
