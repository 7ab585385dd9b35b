use super::GeometryError;
use crate::domain::{Domain1D, ExteriorData, Psi};
use serde::Serialize;

/// Radius `1/a` of the ball osculating `c + b (x - x0) + (a/2)(x - x0)^2` at
/// its vertex.
pub fn osculating_ball_radius(a: f64) -> Result<f64, GeometryError> {
    if !(a > 0.0) {
        return Err(GeometryError::Opening(a));
    }
    Ok(1.0 / a)
}

/// `(2 - q^2)^2 - (4 - 4 q^2)`
pub fn ball_inequality_gap(q: f64) -> f64 {
    let q2 = q * q;
    (2.0 - q2) * (2.0 - q2) - (4.0 - 4.0 * q2)
}

/// The same gap at `q = k / n` scaled by `n^4`, in integers; equals `k^4`.
pub fn ball_inequality_gap_exact(k: i64, n: i64) -> i128 {
    let (k, n) = (k as i128, n as i128);
    let a = 2 * n * n - k * k;
    a * a - (4 * n * n * n * n - 4 * k * k * n * n)
}

/// Samples the closed ball of radius `1/a` above the vertex of the parabola
/// and returns the largest amount by which a sample dips below it.
pub fn osculating_ball_violation(a: f64, b: f64, c: f64, x0: f64, samples: usize) -> Result<f64, GeometryError> {
    let r = osculating_ball_radius(a)?;
    let xv = x0 - b / a;
    let yv = c - b * b / (2.0 * a);
    let parab = |x: f64| c + b * (x - x0) + 0.5 * a * (x - x0) * (x - x0);
    let n = samples.max(1);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let rr = r * j as f64 / n as f64;
            let (x, y) = (xv + rr * th.cos(), yv + r + rr * th.sin());
            let scale = 1.0 + y.abs().max(parab(x).abs());
            worst = worst.max(parab(x) - y - 1e-12 * scale);
        }
    }
    Ok(worst.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParaboloidCheck {
    pub pass: bool,
    pub pairs: usize,
    /// Hessian bound used.
    pub bound: f64,
    /// Smallest `P(x) - psi(x)` (or `P(x) - phi(x)` outside) over the pairs.
    pub min_slack: f64,
    /// `(x0, x)` of the first violation.
    pub witness: Option<(f64, f64)>,
}

fn estimated_bound(psi: &Psi, lo: f64, hi: f64) -> f64 {
    let n = 4096;
    let e = (hi - lo) / n as f64;
    (1..n)
        .map(|i| {
            let x = lo + i as f64 * e;
            ((psi.eval(x + e) - 2.0 * psi.eval(x) + psi.eval(x - e)) / (e * e)).abs()
        })
        .fold(0.0, f64::max)
}

/// Checks that `psi` stays below its tangent paraboloid with opening
/// `||psi''||` on `[lo, hi]`, over a deterministic lattice of pairs with
/// `|x - x0| <= varrho`. With `exterior` the same paraboloid, based at the
/// domain endpoints, must also dominate the exterior data outside the domain.
pub fn paraboloid_bound_check(
    psi: &Psi,
    region: (f64, f64),
    varrho: f64,
    hessian: Option<f64>,
    exterior: Option<(&ExteriorData, &Domain1D)>,
) -> ParaboloidCheck {
    let (lo, hi) = region;
    let bound = hessian.or_else(|| psi.second_derivative_bound()).unwrap_or_else(|| estimated_bound(psi, lo, hi));
    let m = 32;
    let mut pairs = 0;
    let mut min_slack = f64::INFINITY;
    let mut witness = None;
    let mut visit = |x0: f64, x: f64, value: f64| {
        let d = x - x0;
        let p = psi.eval(x0) + psi.deriv(x0) * d + 0.5 * bound * d * d;
        let slack = p - value;
        pairs += 1;
        min_slack = min_slack.min(slack);
        if slack < -1e-12 * (1.0 + p.abs().max(value.abs())) && witness.is_none() {
            witness = Some((x0, x));
        }
    };
    for i in 0..m {
        let x0 = lo + (hi - lo) * (i as f64 + 0.5) / m as f64;
        for j in 0..=m {
            let x = x0 - varrho + 2.0 * varrho * j as f64 / m as f64;
            if x >= lo && x <= hi {
                visit(x0, x, psi.eval(x));
            }
        }
    }
    if let Some((phi, omega)) = exterior {
        for x0 in [omega.a, omega.b] {
            for j in 0..=2 * m {
                let x = x0 - varrho + varrho * j as f64 / m as f64;
                if !omega.contains(x) && x != omega.a && x != omega.b {
                    visit(x0, x, phi.eval(x));
                }
            }
        }
    }
    ParaboloidCheck { pass: witness.is_none(), pairs, bound, min_slack, witness }
}

fn smooth_step(t: f64) -> f64 {
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        f(t) / (f(t) + f(1.0 - t))
    }
}

/// Upward dome over an interval: top profile blending a field with
/// `(-d)^{1/(k+1)}` near the boundary, and the implicit function
/// `d(x) + (t_+)^{k+1}` of its boundary.
pub struct DomeProfile {
    omega: Domain1D,
    k: u32,
    r0: f64,
    u: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for DomeProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DomeProfile").field("omega", &self.omega).field("k", &self.k).field("r0", &self.r0).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomeCheck {
    pub samples: usize,
    /// Largest `|F|` along the top profile where the cutoff vanishes.
    pub boundary_residual: f64,
    pub min_gradient: f64,
    /// Samples where `F < 0` disagrees with lying under the top profile.
    pub membership_mismatches: usize,
}

pub fn dome_profile(omega: &Domain1D, k: u32, r0: f64, u: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<DomeProfile, GeometryError> {
    if k < 2 {
        return Err(GeometryError::Order(k));
    }
    let inradius = 0.5 * omega.diam();
    if !(r0 > 0.0) || 3.0 * r0 > inradius {
        return Err(GeometryError::TubeRadius { r0, inradius });
    }
    Ok(DomeProfile { omega: *omega, k, r0, u: Box::new(u) })
}

impl DomeProfile {
    pub fn signed_distance(&self, x: f64) -> f64 {
        self.omega.signed_distance(x)
    }

    /// `(-d)^{1/(k+1)}` inside, 0 outside.
    pub fn base(&self, x: f64) -> f64 {
        (-self.signed_distance(x)).max(0.0).powf(1.0 / (self.k + 1) as f64)
    }

    /// Smooth cutoff: 1 where `d <= -2 r0`, 0 where `d >= -r0`.
    pub fn eta(&self, x: f64) -> f64 {
        smooth_step((-self.signed_distance(x) - self.r0) / self.r0)
    }

    pub fn top(&self, x: f64) -> f64 {
        let eta = self.eta(x);
        eta * (self.u)(x) + (1.0 - eta) * self.base(x)
    }

    pub fn implicit(&self, x: f64, t: f64) -> f64 {
        self.signed_distance(x) + t.max(0.0).powi(self.k as i32 + 1)
    }

    /// Half-width of the boundary neighborhood used by `check`.
    pub fn delta(&self) -> f64 {
        0.5 * self.r0.min(1.0)
    }

    pub fn gradient(&self, x: f64, t: f64, step: f64) -> [f64; 2] {
        [
            (self.implicit(x + step, t) - self.implicit(x - step, t)) / (2.0 * step),
            (self.implicit(x, t + step) - self.implicit(x, t - step)) / (2.0 * step),
        ]
    }

    /// Samples `N_delta x (-1, 1)` near both endpoints on an `n x n` lattice
    /// per endpoint.
    pub fn check(&self, n: usize) -> DomeCheck {
        let delta = self.delta();
        let mut out = DomeCheck { samples: 0, boundary_residual: 0.0, min_gradient: f64::INFINITY, membership_mismatches: 0 };
        for end in [self.omega.a, self.omega.b] {
            for i in 0..n {
                let x = end - delta + 2.0 * delta * (i as f64 + 0.5) / n as f64;
                if x == end {
                    continue;
                }
                let inside = self.omega.contains(x);
                if inside {
                    out.boundary_residual = out.boundary_residual.max(self.implicit(x, self.top(x)).abs());
                }
                for j in 0..n {
                    let t = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
                    out.samples += 1;
                    let g = self.gradient(x, t, 1e-7);
                    out.min_gradient = out.min_gradient.min(g[0].hypot(g[1]));
                    let under = inside && t < self.top(x);
                    if under != (self.implicit(x, t) < 0.0) {
                        out.membership_mismatches += 1;
                    }
                }
            }
        }
        out
    }
}
