//! Base interval, exterior data, obstacle descriptors, grids and tails.

use crate::kernel::Kernel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("invalid interval: a = {a} must be below b = {b}")]
    Interval { a: f64, b: f64 },
    #[error("window half-width must be positive, got {0}")]
    Window(f64),
    #[error("neighborhood with delta = {delta} of an interval of length {len} is empty")]
    EmptyNeighborhood { delta: f64, len: f64 },
    #[error("grid spacing {h} does not divide the interval length {len}")]
    Spacing { h: f64, len: f64 },
    #[error("tail integral diverges: exterior data grows too fast on an unbounded region")]
    Divergent,
    #[error("tail region [{0}, {1}] meets the domain")]
    RegionMeetsDomain(f64, f64),
    #[error("point {0} is not inside the domain")]
    PointOutside(f64),
    #[error("cone exterior data needs a nonzero opening coefficient")]
    FlatCone,
    #[error("obstacle region [{0}, {1}] is not contained in the domain")]
    ObstacleOutside(f64, f64),
    #[error("tabulated data needs at least two samples and a positive spacing")]
    Table,
}

/// Omega = (a, b) together with the half-width of the computational window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain1D {
    pub a: f64,
    pub b: f64,
    pub w: f64,
}

impl Domain1D {
    pub fn new(a: f64, b: f64, w: f64) -> Result<Self, DomainError> {
        if !(a < b) {
            return Err(DomainError::Interval { a, b });
        }
        if !(w > 0.0) {
            return Err(DomainError::Window(w));
        }
        Ok(Self { a, b, w })
    }

    /// Window half-width defaults to ten diameters.
    pub fn with_default_window(a: f64, b: f64) -> Result<Self, DomainError> {
        Self::new(a, b, 10.0 * (b - a))
    }

    pub fn diam(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    pub fn signed_distance(&self, x: f64) -> f64 {
        signed_distance(self, x)
    }
}

/// Negative inside, zero on the endpoints, positive outside.
pub fn signed_distance(omega: &Domain1D, x: f64) -> f64 {
    if x <= omega.a {
        omega.a - x
    } else if x >= omega.b {
        x - omega.b
    } else {
        -(x - omega.a).min(omega.b - x)
    }
}

/// The set of points with signed distance below `delta`.
pub fn delta_neighborhood(omega: &Domain1D, delta: f64) -> Result<Domain1D, DomainError> {
    if delta <= -0.5 * omega.diam() {
        return Err(DomainError::EmptyNeighborhood { delta, len: omega.diam() });
    }
    Ok(Domain1D { a: omega.a - delta, b: omega.b + delta, w: omega.w })
}

/// Data prescribed outside Omega.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExteriorData {
    Constant { c: f64 },
    Affine { c: f64, m: f64 },
    /// `c + m x - kappa |x|`
    Cone { c: f64, m: f64, kappa: f64 },
    /// Samples at `x0 + j h`, linearly interpolated, zero outside the table.
    Tabulated { x0: f64, h: f64, values: Vec<f64> },
}

impl ExteriorData {
    pub fn validate(&self) -> Result<(), DomainError> {
        match self {
            ExteriorData::Cone { kappa, .. } if *kappa == 0.0 => Err(DomainError::FlatCone),
            ExteriorData::Tabulated { h, values, .. } if values.len() < 2 || !(*h > 0.0) => {
                Err(DomainError::Table)
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            ExteriorData::Constant { c } => *c,
            ExteriorData::Affine { c, m } => c + m * y,
            ExteriorData::Cone { c, m, kappa } => c + m * y - kappa * y.abs(),
            ExteriorData::Tabulated { x0, h, values } => {
                let t = (y - x0) / h;
                let last = (values.len() - 1) as f64;
                if !(0.0..=last).contains(&t) {
                    return 0.0;
                }
                let j = (t.floor() as usize).min(values.len() - 2);
                let f = t - j as f64;
                values[j] * (1.0 - f) + values[j + 1] * f
            }
        }
    }

    /// Whether the far field is analytic (everything but tabulated data).
    pub fn is_parametric(&self) -> bool {
        !matches!(self, ExteriorData::Tabulated { .. })
    }

    /// Abscissae where the data is not affine.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            ExteriorData::Cone { .. } => vec![0.0],
            ExteriorData::Tabulated { x0, h, values } => (0..values.len()).map(|j| x0 + j as f64 * h).collect(),
            _ => Vec::new(),
        }
    }

    /// Affine pieces `(lo, hi, c0, c1)` meaning `c0 + c1 x` on (lo, hi).
    pub fn pieces(&self) -> Vec<(f64, f64, f64, f64)> {
        let inf = f64::INFINITY;
        match self {
            ExteriorData::Constant { c } => vec![(-inf, inf, *c, 0.0)],
            ExteriorData::Affine { c, m } => vec![(-inf, inf, *c, *m)],
            ExteriorData::Cone { c, m, kappa } => vec![(-inf, 0.0, *c, m + kappa), (0.0, inf, *c, m - kappa)],
            ExteriorData::Tabulated { x0, h, values } => {
                let mut out = vec![(-inf, *x0, 0.0, 0.0)];
                for j in 0..values.len() - 1 {
                    let lo = x0 + j as f64 * h;
                    let hi = lo + h;
                    let c1 = (values[j + 1] - values[j]) / h;
                    out.push((lo, hi, values[j] - c1 * lo, c1));
                }
                out.push((x0 + (values.len() - 1) as f64 * h, inf, 0.0, 0.0));
                out
            }
        }
    }

    /// `sup |phi|` over [lo, hi]; exact since the data is piecewise affine.
    pub fn sup_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let mut pts = vec![lo, hi];
        pts.extend(self.kinks().into_iter().filter(|k| *k > lo && *k < hi));
        pts.into_iter().map(|y| self.eval(y).abs()).fold(0.0, f64::max)
    }

    /// `sup |phi|` over the window minus Omega.
    pub fn window_sup(&self, omega: &Domain1D) -> f64 {
        self.sup_abs_on(omega.a - omega.w, omega.a).max(self.sup_abs_on(omega.b, omega.b + omega.w))
    }

    /// `sup |phi|` over the neighborhood of radius `delta` minus Omega.
    pub fn ring_sup(&self, omega: &Domain1D, delta: f64) -> f64 {
        self.sup_abs_on(omega.a - delta, omega.a).max(self.sup_abs_on(omega.b, omega.b + delta))
    }
}

/// Where the obstacle acts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObstacleRegion {
    Empty,
    Interval { c: f64, d: f64 },
    Full,
}

/// Obstacle profile on its region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Psi {
    Constant { v: f64 },
    /// `c0 + c1 x + c2 x^2`
    Quadratic { c0: f64, c1: f64, c2: f64 },
    /// `amp sin(freq x + phase)`
    Sine { amp: f64, freq: f64, phase: f64 },
    Tabulated { x0: f64, h: f64, values: Vec<f64> },
}

impl Psi {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Psi::Constant { v } => *v,
            Psi::Quadratic { c0, c1, c2 } => c0 + c1 * x + c2 * x * x,
            Psi::Sine { amp, freq, phase } => amp * (freq * x + phase).sin(),
            Psi::Tabulated { x0, h, values } => {
                let t = ((x - x0) / h).clamp(0.0, (values.len() - 1) as f64);
                let j = (t.floor() as usize).min(values.len().saturating_sub(2));
                let f = t - j as f64;
                if values.len() == 1 {
                    values[0]
                } else {
                    values[j] * (1.0 - f) + values[j + 1] * f
                }
            }
        }
    }

    /// First derivative where defined (piecewise for tables).
    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            Psi::Constant { .. } => 0.0,
            Psi::Quadratic { c1, c2, .. } => c1 + 2.0 * c2 * x,
            Psi::Sine { amp, freq, phase } => amp * freq * (freq * x + phase).cos(),
            Psi::Tabulated { .. } => {
                let e = 1e-7;
                (self.eval(x + e) - self.eval(x - e)) / (2.0 * e)
            }
        }
    }

    /// Exact bound on `|psi''|` when available.
    pub fn second_derivative_bound(&self) -> Option<f64> {
        match self {
            Psi::Constant { .. } => Some(0.0),
            Psi::Quadratic { c2, .. } => Some(2.0 * c2.abs()),
            Psi::Sine { amp, freq, .. } => Some((amp * freq * freq).abs()),
            Psi::Tabulated { .. } => None,
        }
    }

    /// `sup |psi|` over [lo, hi] by dense sampling plus endpoints.
    pub fn sup_abs_on(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Psi::Constant { v } => v.abs(),
            _ => {
                let n = 4096;
                let mut m: f64 = 0.0;
                for j in 0..=n {
                    let x = lo + (hi - lo) * j as f64 / n as f64;
                    m = m.max(self.eval(x).abs());
                }
                if let Psi::Quadratic { c1, c2, .. } = self {
                    if *c2 != 0.0 {
                        let xv = -c1 / (2.0 * c2);
                        if xv > lo && xv < hi {
                            m = m.max(self.eval(xv).abs());
                        }
                    }
                }
                m
            }
        }
    }
}

/// Region, profile and the scale factor applied to the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub region: ObstacleRegion,
    pub psi: Psi,
    pub eps: f64,
}

impl ObstacleSpec {
    pub fn none() -> Self {
        Self { region: ObstacleRegion::Empty, psi: Psi::Constant { v: 0.0 }, eps: 1.0 }
    }

    pub fn validate(&self, omega: &Domain1D) -> Result<(), DomainError> {
        if let ObstacleRegion::Interval { c, d } = self.region {
            if !(c >= omega.a && d <= omega.b && c < d) {
                return Err(DomainError::ObstacleOutside(c, d));
            }
        }
        Ok(())
    }

    /// Closed hull of the region, or None when empty.
    pub fn closed_hull(&self, omega: &Domain1D) -> Option<(f64, f64)> {
        match self.region {
            ObstacleRegion::Empty => None,
            ObstacleRegion::Interval { c, d } => Some((c, d)),
            ObstacleRegion::Full => Some((omega.a, omega.b)),
        }
    }

    /// Whether a grid node carries the constraint. Nodes on the closure of
    /// the region are constrained: a continuous piecewise-linear field that is
    /// above a continuous obstacle a.e. on the region is above it there too.
    pub fn constrains(&self, omega: &Domain1D, x: f64) -> bool {
        match self.closed_hull(omega) {
            None => false,
            Some((c, d)) => x >= c - 1e-12 && x <= d + 1e-12,
        }
    }

    /// Scaled obstacle value.
    pub fn lower(&self, x: f64) -> f64 {
        self.eps * self.psi.eval(x)
    }

    /// `sup |eps psi|` over the region.
    pub fn sup_abs(&self, omega: &Domain1D) -> f64 {
        match self.closed_hull(omega) {
            None => 0.0,
            Some((c, d)) => self.eps.abs() * self.psi.sup_abs_on(c, d),
        }
    }

    /// `sup |psi|` over the region, without the scale factor.
    pub fn sup_abs_unscaled(&self, omega: &Domain1D) -> f64 {
        match self.closed_hull(omega) {
            None => 0.0,
            Some((c, d)) => self.psi.sup_abs_on(c, d),
        }
    }
}

/// Uniform nodes over [a - W, b + W] with both endpoints of Omega on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub h: f64,
    pub nodes: Vec<f64>,
    pub interior_mask: Vec<bool>,
    pub obstacle_mask: Vec<bool>,
    /// Index of the node at `a`.
    pub first: usize,
    /// Number of cells in Omega.
    pub cells: usize,
}

impl Grid1D {
    pub fn new(omega: &Domain1D, obstacle: &ObstacleSpec, h: f64) -> Result<Self, DomainError> {
        let len = omega.diam();
        let cells_f = len / h;
        let cells = cells_f.round() as usize;
        if !(h > 0.0) || cells == 0 || (cells_f - cells as f64).abs() > 1e-9 * cells_f.max(1.0) {
            return Err(DomainError::Spacing { h, len });
        }
        let h = len / cells as f64;
        let ext = (omega.w / h).ceil() as usize;
        let total = cells + 1 + 2 * ext;
        let nodes: Vec<f64> = (0..total).map(|j| omega.a + (j as f64 - ext as f64) * h).collect();
        let interior_mask = (0..total).map(|j| j >= ext && j <= ext + cells).collect();
        let obstacle_mask = (0..total)
            .map(|j| j >= ext && j <= ext + cells && obstacle.constrains(omega, nodes[j]))
            .collect();
        Ok(Self { h, nodes, interior_mask, obstacle_mask, first: ext, cells })
    }

    /// Nodes of the closed interval [a, b], which carry the unknowns.
    pub fn omega_nodes(&self) -> &[f64] {
        &self.nodes[self.first..=self.first + self.cells]
    }

    /// Obstacle flags on the unknowns.
    pub fn omega_obstacle(&self) -> &[bool] {
        &self.obstacle_mask[self.first..=self.first + self.cells]
    }
}

/// An interval of the line, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Tail value with the bound on what the window cut-off may have missed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailValue {
    pub value: f64,
    pub cutoff_error: f64,
}

/// `int_O |phi(y)| |x - y|^{-(n+s)} dy` for a finite union of intervals O.
pub fn tail(k: &Kernel, phi: &ExteriorData, region: &[Interval], omega: &Domain1D, x: f64) -> Result<TailValue, DomainError> {
    if !omega.contains(x) {
        return Err(DomainError::PointOutside(x));
    }
    let e = k.spec().n as f64 + k.s();
    let mut value = 0.0;
    for iv in region {
        if iv.hi > omega.a && iv.lo < omega.b {
            return Err(DomainError::RegionMeetsDomain(iv.lo, iv.hi));
        }
        for (plo, phi_hi, c0, c1) in phi.pieces() {
            let lo = iv.lo.max(plo);
            let hi = iv.hi.min(phi_hi);
            if lo >= hi {
                continue;
            }
            value += abs_linear_power(c0, c1, lo, hi, x, e)?;
        }
    }
    let mut cutoff_error = 0.0;
    if let ExteriorData::Tabulated { x0, h, values } = phi {
        let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let end = x0 + (values.len() - 1) as f64 * h;
        for iv in region {
            // mass the data would carry beyond the table at its sup level
            for (lo, hi) in [(iv.lo, iv.hi.min(*x0)), (iv.lo.max(end), iv.hi)] {
                if lo < hi {
                    cutoff_error += sup * power_integral(lo, hi, x, e, 0.0, 1.0);
                }
            }
        }
    }
    Ok(TailValue { value, cutoff_error })
}

// int_lo^hi (P + Q r) r^{-e} dr in r = |y - x| for an interval on one side of x
fn power_integral(lo: f64, hi: f64, x: f64, e: f64, q: f64, p: f64) -> f64 {
    let (r0, r1) = if lo >= x { (lo - x, hi - x) } else { (x - hi, x - lo) };
    let anti = |r: f64| {
        if r.is_infinite() {
            0.0
        } else {
            p * r.powf(1.0 - e) / (1.0 - e) + q * r.powf(2.0 - e) / (2.0 - e)
        }
    };
    anti(r1) - anti(r0)
}

// int_lo^hi |c0 + c1 y| |x - y|^{-e} dy, [lo, hi] on one side of x
fn abs_linear_power(c0: f64, c1: f64, lo: f64, hi: f64, x: f64, e: f64) -> Result<f64, DomainError> {
    let mut cuts = vec![lo];
    if c1 != 0.0 {
        let root = -c0 / c1;
        if root > lo && root < hi {
            cuts.push(root);
        }
    }
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (l, h) = (w[0], w[1]);
        let mid = if l.is_infinite() {
            h - 1.0
        } else if h.is_infinite() {
            l + 1.0
        } else {
            0.5 * (l + h)
        };
        let sign = if c0 + c1 * mid >= 0.0 { 1.0 } else { -1.0 };
        if c0 + c1 * mid == 0.0 {
            continue;
        }
        // phi = P + Q r with r = |y - x|
        let side = if l >= x { 1.0 } else { -1.0 };
        let p = sign * (c0 + c1 * x);
        let q = sign * c1 * side;
        if (l.is_infinite() || h.is_infinite()) && q != 0.0 {
            return Err(DomainError::Divergent);
        }
        total += power_integral(l, h, x, e, q, p);
    }
    Ok(total)
}
