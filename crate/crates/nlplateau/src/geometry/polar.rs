//! Power-law integrals `|Y - P|^{-2-s}` around a pole `P`: over rectangles,
//! along rays, and over directions.

use super::pixel::{FarField, Ray};
use crate::quad;
use std::f64::consts::PI;

/// `int_a^b r^{-1-s} dr`, `b` possibly infinite.
pub(crate) fn radial0(a: f64, b: f64, s: f64) -> f64 {
    if b == f64::INFINITY {
        return a.powf(-s) / s;
    }
    if a == 0.0 {
        return f64::INFINITY;
    }
    -a.powf(-s) * (-s * (b / a).ln()).exp_m1() / s
}

/// `int_a^b r^{k-1-s} dr` for k = 1, 2 and finite b.
fn radial(k: f64, a: f64, b: f64, s: f64) -> f64 {
    let e = k - s;
    if a == 0.0 {
        return b.powf(e) / e;
    }
    a.powf(e) * (e * (b / a).ln()).exp_m1() / e
}

/// Parameter range of `o + t d` inside `[x0, x1] x [y0, y1]`.
pub(crate) fn slab(r: &[f64; 4], o: [f64; 2], d: [f64; 2]) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for k in 0..2 {
        let (a, b) = (r[2 * k] - o[k], r[2 * k + 1] - o[k]);
        if d[k] == 0.0 {
            if a > 0.0 || b < 0.0 {
                return None;
            }
            continue;
        }
        let (t1, t2) = (a / d[k], b / d[k]);
        lo = lo.max(t1.min(t2));
        hi = hi.min(t1.max(t2));
    }
    (hi > lo).then_some((lo, hi))
}

/// Affine weight `c0 + c1 y` in one coordinate measured from the pole.
pub(crate) type Lin = (f64, f64);

/// `int_{R \ B_rho} wx(y1) wy(y2) |y|^{-2-s} dy` with `R = [x0,x1]x[y0,y1]`
/// in coordinates centered at the pole.
pub(crate) fn rect_integral(r: [f64; 4], wx: Lin, wy: Lin, rho: f64, s: f64) -> f64 {
    let dist = {
        let dx = if r[0] > 0.0 { r[0] } else if r[1] < 0.0 { -r[1] } else { 0.0 };
        let dy = if r[2] > 0.0 { r[2] } else if r[3] < 0.0 { -r[3] } else { 0.0 };
        dx.hypot(dy)
    };
    let size = (r[1] - r[0]).max(r[3] - r[2]);
    if dist >= rho {
        if dist >= 16.0 * size {
            return rect_gauss(r, wx, wy, s, 4);
        }
        if dist >= 6.0 * size {
            return rect_gauss(r, wx, wy, s, 8);
        }
    }
    let xs = split(r[0], r[1]);
    let ys = split(r[2], r[3]);
    let mut total = 0.0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            total += rect_polar([xw[0], xw[1], yw[0], yw[1]], wx, wy, rho, s, 16);
        }
    }
    total
}

fn split(a: f64, b: f64) -> Vec<f64> {
    if a < 0.0 && b > 0.0 {
        vec![a, 0.0, b]
    } else {
        vec![a, b]
    }
}

fn rect_gauss(r: [f64; 4], wx: Lin, wy: Lin, s: f64, n: usize) -> f64 {
    let e = -1.0 - 0.5 * s;
    let mut total = 0.0;
    for (x, ax) in quad::mapped(n, r[0], r[1]) {
        let fx = wx.0 + wx.1 * x;
        let mut row = 0.0;
        for (y, ay) in quad::mapped(n, r[2], r[3]) {
            row += ay * (wy.0 + wy.1 * y) * (x * x + y * y).powf(e);
        }
        total += ax * fx * row;
    }
    total
}

/// The pole is outside the closed rectangle or at one of its corners.
fn rect_polar(r: [f64; 4], wx: Lin, wy: Lin, rho: f64, s: f64, n: usize) -> f64 {
    let c = [0.5 * (r[0] + r[1]), 0.5 * (r[2] + r[3])];
    let cn = c[0].hypot(c[1]);
    let ch = [c[0] / cn, c[1] / cn];
    let rel = |p: [f64; 2]| (ch[0] * p[1] - ch[1] * p[0]).atan2(ch[0] * p[0] + ch[1] * p[1]);
    let corners = [[r[0], r[2]], [r[1], r[2]], [r[0], r[3]], [r[1], r[3]]];
    let mut breaks: Vec<f64> = corners.iter().filter(|p| p[0] != 0.0 || p[1] != 0.0).map(|&p| rel(p)).collect();
    let lo = breaks.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = breaks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if rho > 0.0 {
        for &xe in &r[..2] {
            let h2 = rho * rho - xe * xe;
            if h2 >= 0.0 {
                for y in [h2.sqrt(), -h2.sqrt()] {
                    if y > r[2] && y < r[3] {
                        breaks.push(rel([xe, y]));
                    }
                }
            }
        }
        for &ye in &r[2..] {
            let h2 = rho * rho - ye * ye;
            if h2 >= 0.0 {
                for x in [h2.sqrt(), -h2.sqrt()] {
                    if x > r[0] && x < r[1] {
                        breaks.push(rel([x, ye]));
                    }
                }
            }
        }
    }
    breaks.retain(|b| *b >= lo && *b <= hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        for (phi, aw) in quad::mapped(n, w[0], w[1]) {
            let (sn, cs) = phi.sin_cos();
            let d = [ch[0] * cs - ch[1] * sn, ch[0] * sn + ch[1] * cs];
            let Some((t0, t1)) = slab(&r, [0.0, 0.0], d) else { continue };
            let a = t0.max(0.0).max(rho);
            if t1 <= a {
                continue;
            }
            let a0 = wx.0 * wy.0;
            let a1 = wx.0 * wy.1 * d[1] + wx.1 * d[0] * wy.0;
            let a2 = wx.1 * wy.1 * d[0] * d[1];
            let mut v = a1 * radial(1.0, a, t1, s) + a2 * radial(2.0, a, t1, s);
            if a0 != 0.0 {
                v += a0 * radial0(a, t1, s);
            }
            total += aw * v;
        }
    }
    total
}

/// `int r^{-1-s}` along `o + r d` over `[from, inf)` minus `skip`: the part
/// inside the far set and the total.
pub(crate) fn ray_mass(far: &FarField, bdry: &[Ray], o: [f64; 2], d: [f64; 2], from: f64, skip: Option<(f64, f64)>, s: f64) -> (f64, f64) {
    let mut cuts = vec![from];
    for b in bdry {
        let den = d[0] * b.u[1] - d[1] * b.u[0];
        if den == 0.0 {
            continue;
        }
        let w = [b.p[0] - o[0], b.p[1] - o[1]];
        let t = (w[0] * b.u[1] - w[1] * b.u[0]) / den;
        let tau = (w[0] * d[1] - w[1] * d[0]) / den;
        if t > from && tau >= 0.0 {
            cuts.push(t);
        }
    }
    if let Some((a, b)) = skip {
        for t in [a, b] {
            if t > from {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.push(f64::INFINITY);
    let mut inside = 0.0;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = if b.is_finite() { 0.5 * (a + b) } else { a + a.max(1.0) };
        if let Some((p, q)) = skip {
            if mid > p && mid < q {
                continue;
            }
        }
        let m = radial0(a, b, s);
        total += m;
        if far.contains([o[0] + mid * d[0], o[1] + mid * d[1]]) {
            inside += m;
        }
    }
    (inside, total)
}

/// Direction breakpoints seen from `o`: rectangle corners, far-field kinks,
/// crossings of the far boundary with the rectangle edges and with the circle
/// of radius `from`, and (graded) asymptotic directions.
pub(crate) fn breakpoints(bdry: &[Ray], o: [f64; 2], rect: Option<[f64; 4]>, from: f64) -> Vec<(f64, bool)> {
    let dir = |p: [f64; 2]| (p[1] - o[1]).atan2(p[0] - o[0]);
    let mut out = Vec::new();
    let mut pts: Vec<[f64; 2]> = Vec::new();
    if let Some(r) = rect {
        pts.extend([[r[0], r[2]], [r[1], r[2]], [r[0], r[3]], [r[1], r[3]]]);
    }
    for b in bdry {
        out.push((b.u[1].atan2(b.u[0]), true));
        pts.push(b.p);
        if let Some(r) = rect {
            for (k, &e) in r.iter().enumerate() {
                let axis = k / 2;
                if b.u[axis] == 0.0 {
                    continue;
                }
                let t = (e - b.p[axis]) / b.u[axis];
                if t > 0.0 {
                    let q = [b.p[0] + t * b.u[0], b.p[1] + t * b.u[1]];
                    let other = 1 - axis;
                    if q[other] >= r[2 * other] && q[other] <= r[2 * other + 1] {
                        pts.push(q);
                    }
                }
            }
        }
        if from > 0.0 {
            // |p + t u - o| = from
            let w = [b.p[0] - o[0], b.p[1] - o[1]];
            let bb = w[0] * b.u[0] + w[1] * b.u[1];
            let cc = w[0] * w[0] + w[1] * w[1] - from * from;
            let disc = bb * bb - cc;
            if disc >= 0.0 {
                for t in [-bb - disc.sqrt(), -bb + disc.sqrt()] {
                    if t > 0.0 {
                        pts.push([b.p[0] + t * b.u[0], b.p[1] + t * b.u[1]]);
                    }
                }
            }
        }
    }
    for p in pts {
        if p != o {
            out.push((dir(p), false));
        }
    }
    out
}

/// `int_0^period f(d(theta)) dtheta` with composite Gauss rules between the
/// breakpoints, geometrically refined toward the flagged ones.
pub(crate) fn angular<F: FnMut([f64; 2]) -> [f64; 2]>(breaks: &[(f64, bool)], period: f64, mut f: F) -> [f64; 2] {
    let mut b: Vec<(f64, bool)> = breaks.iter().map(|&(t, g)| (t.rem_euclid(period), g)).collect();
    b.sort_by(|x, y| x.0.total_cmp(&y.0));
    b.dedup_by(|x, y| {
        if (x.0 - y.0).abs() < 1e-14 {
            y.1 |= x.1;
            true
        } else {
            false
        }
    });
    if b.is_empty() {
        b.push((0.0, false));
    }
    let first = b[0];
    b.push((first.0 + period, first.1));
    let max_w = PI / 16.0;
    let mut total = [0.0; 2];
    let mut piece = |a: f64, c: f64, ga: bool, gc: bool, total: &mut [f64; 2]| {
        let mut rule = |lo: f64, hi: f64| {
            for (t, w) in quad::mapped(8, lo, hi) {
                let v = f([t.cos(), t.sin()]);
                total[0] += w * v[0];
                total[1] += w * v[1];
            }
        };
        let m = ((c - a) / max_w).ceil().max(1.0) as usize;
        let h = (c - a) / m as f64;
        for k in 0..m {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == m { c } else { lo + h };
            let left = ga && k == 0;
            let right = gc && k + 1 == m;
            match (left, right) {
                (false, false) => rule(lo, hi),
                (true, false) => graded(lo, hi, &mut rule),
                (false, true) => graded(hi, lo, &mut rule),
                (true, true) => {
                    let mid = 0.5 * (lo + hi);
                    graded(lo, mid, &mut rule);
                    graded(hi, mid, &mut rule);
                }
            }
        }
    };
    for w in b.windows(2) {
        if w[1].0 > w[0].0 {
            piece(w[0].0, w[1].0, w[0].1, w[1].1, &mut total);
        }
    }
    total
}

/// Geometric mesh on the interval between `from` (the singular end) and `to`.
fn graded(from: f64, to: f64, rule: &mut impl FnMut(f64, f64)) {
    const Q: f64 = 0.25;
    const LEVELS: i32 = 24;
    let len = to - from;
    let mut outer = 1.0;
    for _ in 0..LEVELS {
        let inner = outer * Q;
        let (p, q) = (from + inner * len, from + outer * len);
        if p < q {
            rule(p, q);
        } else {
            rule(q, p);
        }
        outer = inner;
    }
    let (p, q) = (from, from + outer * len);
    if p < q {
        rule(p, q);
    } else {
        rule(q, p);
    }
}
