use super::GeometryError;
use crate::domain::ExteriorData;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Square-celled rectangle `[x0, x0 + nx h] x [y0, y0 + ny h]`. Cell `(i, j)`
/// is column `i` from the left and row `j` from the bottom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn new(x0: f64, y0: f64, h: f64, nx: usize, ny: usize) -> Result<Self, GeometryError> {
        if !(h > 0.0) || nx == 0 || ny == 0 || !x0.is_finite() || !y0.is_finite() {
            return Err(GeometryError::Window);
        }
        Ok(Window { x0, y0, h, nx, ny })
    }

    /// Square window `[-half, half]^2` with `n` cells per side.
    pub fn centered(half: f64, n: usize) -> Result<Self, GeometryError> {
        Window::new(-half, -half, 2.0 * half / n as f64, n, n)
    }

    pub fn x1(&self) -> f64 {
        self.x0 + self.nx as f64 * self.h
    }

    pub fn y1(&self) -> f64 {
        self.y0 + self.ny as f64 * self.h
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Center of cell `(i, j)`; indices may lie outside the window.
    pub fn center(&self, i: isize, j: isize) -> [f64; 2] {
        [self.x0 + (i as f64 + 0.5) * self.h, self.y0 + (j as f64 + 0.5) * self.h]
    }

    /// `[xlo, xhi, ylo, yhi]` of cell `(i, j)`.
    pub fn rect(&self, i: isize, j: isize) -> [f64; 4] {
        let x = self.x0 + i as f64 * self.h;
        let y = self.y0 + j as f64 * self.h;
        [x, x + self.h, y, y + self.h]
    }

    pub fn bounds(&self) -> [f64; 4] {
        [self.x0, self.x1(), self.y0, self.y1()]
    }

    /// Nearest grid corner as integer offsets from `(x0, y0)`.
    pub fn nearest_corner(&self, p: [f64; 2]) -> (isize, isize) {
        (((p[0] - self.x0) / self.h).round() as isize, ((p[1] - self.y0) / self.h).round() as isize)
    }

    pub fn corner(&self, c: (isize, isize)) -> [f64; 2] {
        [self.x0 + c.0 as f64 * self.h, self.y0 + c.1 as f64 * self.h]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1() && p[1] >= self.y0 && p[1] <= self.y1()
    }
}

/// What the set looks like beyond the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FarField {
    Empty,
    /// `{ y < phi(x) }`
    Subgraph { phi: ExteriorData },
    /// Union of angular sectors `{ apex + r (cos t, sin t) : from < t < to }`.
    Sectors { apex: [f64; 2], arcs: Vec<[f64; 2]> },
}

/// Half-line `p + t u`, `t >= 0`, with `u` a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Ray {
    pub p: [f64; 2],
    pub u: [f64; 2],
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

impl FarField {
    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            FarField::Empty => Ok(()),
            FarField::Subgraph { phi } => {
                if !phi.is_parametric() {
                    return Err(GeometryError::UnsupportedFarField("tabulated exterior data".into()));
                }
                phi.validate().map_err(|e| GeometryError::UnsupportedFarField(e.to_string()))
            }
            FarField::Sectors { apex, arcs } => {
                if !apex[0].is_finite() || !apex[1].is_finite() {
                    return Err(GeometryError::UnsupportedFarField("apex is not finite".into()));
                }
                let mut spans: Vec<(f64, f64)> = Vec::new();
                for a in arcs {
                    let len = a[1] - a[0];
                    if !(len > 0.0 && len <= 2.0 * PI) {
                        return Err(GeometryError::UnsupportedFarField(format!("arc {a:?}")));
                    }
                    let lo = a[0].rem_euclid(2.0 * PI);
                    spans.push((lo, lo + len));
                }
                spans.sort_by(|a, b| a.0.total_cmp(&b.0));
                for w in spans.windows(2) {
                    if w[0].1 > w[1].0 + 1e-12 {
                        return Err(GeometryError::UnsupportedFarField("overlapping arcs".into()));
                    }
                }
                if let (Some(first), Some(last)) = (spans.first(), spans.last()) {
                    if spans.len() > 1 && last.1 > first.0 + 2.0 * PI + 1e-12 {
                        return Err(GeometryError::UnsupportedFarField("overlapping arcs".into()));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            FarField::Empty => false,
            FarField::Subgraph { phi } => p[1] < phi.eval(p[0]),
            FarField::Sectors { apex, arcs } => {
                let dx = p[0] - apex[0];
                let dy = p[1] - apex[1];
                if dx == 0.0 && dy == 0.0 {
                    return false;
                }
                let t = dy.atan2(dx);
                arcs.iter().any(|a| {
                    let rel = (t - a[0]).rem_euclid(2.0 * PI);
                    rel > 0.0 && rel < a[1] - a[0]
                })
            }
        }
    }

    /// Angle occupied at infinity; this is the exact value of alpha.
    pub fn angular_measure(&self) -> f64 {
        match self {
            FarField::Empty => 0.0,
            FarField::Subgraph { phi } => {
                let pieces = phi.pieces();
                let left = pieces.first().map(|p| p.3).unwrap_or(0.0);
                let right = pieces.last().map(|p| p.3).unwrap_or(0.0);
                PI + right.atan() - left.atan()
            }
            FarField::Sectors { arcs, .. } => arcs.iter().map(|a| a[1] - a[0]).sum(),
        }
    }

    /// Half-lines that make up the boundary.
    pub(crate) fn boundary(&self) -> Vec<Ray> {
        match self {
            FarField::Empty => Vec::new(),
            FarField::Subgraph { phi } => {
                let pieces = phi.pieces();
                let (first, last) = (pieces[0], pieces[pieces.len() - 1]);
                if pieces.len() == 1 {
                    let p = [0.0, first.2];
                    return vec![Ray { p, u: unit([1.0, first.3]) }, Ray { p, u: unit([-1.0, -first.3]) }];
                }
                // two pieces meeting at the kink
                let k = first.1;
                let p = [k, phi.eval(k)];
                vec![Ray { p, u: unit([-1.0, -first.3]) }, Ray { p, u: unit([1.0, last.3]) }]
            }
            FarField::Sectors { apex, arcs } => arcs
                .iter()
                .flat_map(|a| a.iter().map(|t| Ray { p: *apex, u: [t.cos(), t.sin()] }))
                .collect(),
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] > self.x0 && p[0] < self.x1 && p[1] > self.y0 && p[1] < self.y1
    }

    /// Cells of `w` whose centers lie in the rectangle.
    pub fn mask(&self, w: &Window) -> Result<Vec<bool>, GeometryError> {
        let b = w.bounds();
        if self.x0 < b[0] || self.x1 > b[1] || self.y0 < b[2] || self.y1 > b[3] || !(self.x0 < self.x1 && self.y0 < self.y1) {
            return Err(GeometryError::Region([self.x0, self.x1, self.y0, self.y1]));
        }
        let mut m = vec![false; w.cells()];
        for j in 0..w.ny {
            for i in 0..w.nx {
                m[w.index(i, j)] = self.contains(w.center(i as isize, j as isize));
            }
        }
        Ok(m)
    }
}

/// Discrete stand-in for density-one and density-zero points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellClass {
    Interior,
    Exterior,
    Boundary,
}

/// Window occupancy plus the far field beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSet {
    window: Window,
    occ: Vec<bool>,
    far: FarField,
}

impl PixelSet {
    pub fn new(window: Window, occ: Vec<bool>, far: FarField) -> Result<Self, GeometryError> {
        far.validate()?;
        if occ.len() != window.cells() {
            return Err(GeometryError::Occupancy { got: occ.len(), want: window.cells() });
        }
        let set = PixelSet { window, occ, far };
        set.check_ring()?;
        Ok(set)
    }

    /// Occupancy from a membership test at cell centers.
    pub fn from_fn(window: Window, far: FarField, f: impl Fn([f64; 2]) -> bool) -> Result<Self, GeometryError> {
        let mut occ = vec![false; window.cells()];
        for j in 0..window.ny {
            for i in 0..window.nx {
                occ[window.index(i, j)] = f(window.center(i as isize, j as isize));
            }
        }
        PixelSet::new(window, occ, far)
    }

    /// The far field itself, rasterized over the window.
    pub fn raster(window: Window, far: FarField) -> Result<Self, GeometryError> {
        let f = far.clone();
        PixelSet::from_fn(window, far, move |p| f.contains(p))
    }

    fn check_ring(&self) -> Result<(), GeometryError> {
        let w = &self.window;
        for j in 0..w.ny {
            for i in 0..w.nx {
                if i != 0 && j != 0 && i != w.nx - 1 && j != w.ny - 1 {
                    continue;
                }
                if self.occ[w.index(i, j)] != self.far.contains(w.center(i as isize, j as isize)) {
                    return Err(GeometryError::FarFieldMismatch((i, j)));
                }
            }
        }
        Ok(())
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occ
    }

    pub fn far(&self) -> &FarField {
        &self.far
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.occ[self.window.index(i, j)]
    }

    /// Membership of any cell of the infinite grid; outside the window the
    /// far field is sampled at the cell center.
    pub fn cell(&self, i: isize, j: isize) -> bool {
        let w = &self.window;
        if i >= 0 && j >= 0 && (i as usize) < w.nx && (j as usize) < w.ny {
            self.occ[w.index(i as usize, j as usize)]
        } else {
            self.far.contains(w.center(i, j))
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.far == FarField::Empty
    }

    pub fn count(&self) -> usize {
        self.occ.iter().filter(|&&b| b).count()
    }

    /// Same window and far field, new occupancy.
    pub fn with_occupancy(&self, occ: Vec<bool>) -> Result<Self, GeometryError> {
        PixelSet::new(self.window, occ, self.far.clone())
    }

    pub fn classify(&self, i: isize, j: isize) -> CellClass {
        let mut on = 0;
        for dj in -1..=1 {
            for di in -1..=1 {
                on += self.cell(i + di, j + dj) as usize;
            }
        }
        match on {
            9 => CellClass::Interior,
            0 => CellClass::Exterior,
            _ => CellClass::Boundary,
        }
    }

    /// Whether the grid corner `c` separates occupied from empty cells.
    pub fn corner_on_boundary(&self, c: (isize, isize)) -> bool {
        let cells = [(c.0 - 1, c.1 - 1), (c.0, c.1 - 1), (c.0 - 1, c.1), (c.0, c.1)];
        let on = cells.iter().filter(|&&(i, j)| self.cell(i, j)).count();
        on != 0 && on != 4
    }

    /// Writes `path` (binary PGM, top row first) and a JSON sidecar next to it.
    pub fn write_pgm(&self, path: &Path) -> Result<(), GeometryError> {
        let w = &self.window;
        let mut bytes = format!("P5\n{} {}\n255\n", w.nx, w.ny).into_bytes();
        for j in (0..w.ny).rev() {
            for i in 0..w.nx {
                bytes.push(if self.get(i, j) { 255 } else { 0 });
            }
        }
        let io = |p: &Path, e: std::io::Error| GeometryError::Io { path: p.display().to_string(), msg: e.to_string() };
        std::fs::write(path, bytes).map_err(|e| io(path, e))?;
        let side = sidecar(path);
        let meta = Sidecar { window: *w, far: self.far.clone() };
        let text = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
        std::fs::write(&side, text).map_err(|e| io(&side, e))
    }

    pub fn read_pgm(path: &Path) -> Result<Self, GeometryError> {
        let fmt = |msg: &str| GeometryError::Format { path: path.display().to_string(), msg: msg.into() };
        let io = |p: &Path, e: std::io::Error| GeometryError::Io { path: p.display().to_string(), msg: e.to_string() };
        let bytes = std::fs::read(path).map_err(|e| io(path, e))?;
        let side = sidecar(path);
        let text = std::fs::read_to_string(&side).map_err(|e| io(&side, e))?;
        let meta: Sidecar = serde_json::from_str(&text).map_err(|e| GeometryError::Format { path: side.display().to_string(), msg: e.to_string() })?;
        // header: magic, width, height, maxval, then one whitespace byte
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(fmt("truncated header"));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        pos += 1;
        if fields[0] != "P5" || fields[3] != "255" {
            return Err(fmt("expected P5 with maxval 255"));
        }
        let nx: usize = fields[1].parse().map_err(|_| fmt("width"))?;
        let ny: usize = fields[2].parse().map_err(|_| fmt("height"))?;
        if nx != meta.window.nx || ny != meta.window.ny {
            return Err(fmt("size disagrees with the sidecar"));
        }
        let data = bytes.get(pos..pos + nx * ny).ok_or_else(|| fmt("truncated pixel data"))?;
        let mut occ = vec![false; nx * ny];
        for (row, chunk) in data.chunks(nx).enumerate() {
            let j = ny - 1 - row;
            for (i, &b) in chunk.iter().enumerate() {
                occ[meta.window.index(i, j)] = b >= 128;
            }
        }
        PixelSet::new(meta.window, occ, meta.far)
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    window: Window,
    far: FarField,
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}
