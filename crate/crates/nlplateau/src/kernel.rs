//! One-dimensional kernel profiles
//!
//! ```text
//! g(t)  = (1 + t^2)^(-(n+1+s)/2)
//! G(t)  = int_0^t g
//! GG(t) = int_0^t G
//! Gb(t) = int_{-inf}^t g
//! ```
//!
//! `G` is held as Chebyshev panels on [0, 4] and as an inverse-power series
//! for the complement `Lambda - G` beyond. `GG` uses the exact identity
//! `GG(t) = t G(t) - (1 - (1+t^2)^(-a/2)) / a` with `a = n - 1 + s`.

use crate::quad;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("fractional order s = {0} outside (0, 1)")]
    Order(f64),
    #[error("dimension n must be at least 1")]
    Dimension,
}

/// Dimension, order and the constants derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    pub n: u32,
    pub s: f64,
    /// Surface measure of the unit sphere in R^{n+1}.
    pub omega: f64,
    /// `G(+inf)`, the Lipschitz constant of `GG`.
    pub big_lambda: f64,
    /// `sup_t (Lambda |t| - GG(t))`.
    pub lambda_small: f64,
}

/// Surface measure of the unit sphere in R^d, d >= 1.
pub fn sphere_measure(d: u32) -> f64 {
    let (mut w, mut k) = if d % 2 == 0 { (2.0 * std::f64::consts::PI, 2) } else { (2.0, 1) };
    while k < d {
        w *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    w
}

const SPLIT: f64 = 4.0;
const PANELS: usize = 8;
const DEG: usize = 24;
const SERIES_TERMS: usize = 40;

#[derive(Debug, Clone)]
pub struct Kernel {
    spec: KernelSpec,
    p: f64,
    a: f64,
    cheb: Vec<[f64; DEG + 1]>,
    // series coefficient of t^{1-p-2k} in C(t) and of t^{2-p-2k} in D(t)
    c_coef: Vec<f64>,
    d_coef: Vec<f64>,
}

fn clenshaw(c: &[f64; DEG + 1], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}

impl Kernel {
    pub fn new(n: u32, s: f64) -> Result<Self, KernelError> {
        if n == 0 {
            return Err(KernelError::Dimension);
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(KernelError::Order(s));
        }
        let p = n as f64 + 1.0 + s;
        let a = p - 2.0;
        let g = |t: f64| (1.0 + t * t).powf(-0.5 * p);
        let width = SPLIT / PANELS as f64;
        let mut cheb = Vec::with_capacity(PANELS);
        let mut start = 0.0;
        for k in 0..PANELS {
            let lo = k as f64 * width;
            let hi = lo + width;
            let mid = 0.5 * (lo + hi);
            let m = DEG + 1;
            let vals: Vec<f64> = (0..m)
                .map(|j| {
                    let x = (std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos();
                    let t = mid + 0.5 * width * x;
                    start + quad::integrate(30, lo, t, g)
                })
                .collect();
            let mut c = [0.0; DEG + 1];
            for (i, ci) in c.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, v) in vals.iter().enumerate() {
                    acc += v * (std::f64::consts::PI * i as f64 * (j as f64 + 0.5) / m as f64).cos();
                }
                *ci = 2.0 * acc / m as f64;
            }
            c[0] *= 0.5;
            start += quad::integrate(30, lo, hi, g);
            cheb.push(c);
        }
        let mut c_coef = Vec::with_capacity(SERIES_TERMS);
        let mut d_coef = Vec::with_capacity(SERIES_TERMS);
        let mut b = 1.0;
        for k in 0..SERIES_TERMS {
            if k > 0 {
                b *= (-0.5 * p - (k as f64 - 1.0)) / k as f64;
            }
            let e1 = p - 1.0 + 2.0 * k as f64;
            let e2 = p - 2.0 + 2.0 * k as f64;
            c_coef.push(b / e1);
            d_coef.push(b / (e1 * e2));
        }
        let mut ker = Kernel {
            spec: KernelSpec { n, s, omega: sphere_measure(n + 1), big_lambda: 0.0, lambda_small: 0.0 },
            p,
            a,
            cheb,
            c_coef,
            d_coef,
        };
        // quadrature up to SPLIT plus the analytic power-law tail
        ker.spec.big_lambda = start + ker.series_c(SPLIT);
        // T = Lambda t - GG is increasing with limit 1/a
        ker.spec.lambda_small = 1.0 / a;
        Ok(ker)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn s(&self) -> f64 {
        self.spec.s
    }

    pub fn big_lambda(&self) -> f64 {
        self.spec.big_lambda
    }

    fn series_c(&self, t: f64) -> f64 {
        let x = 1.0 / (t * t);
        let lead = t.powf(1.0 - self.p);
        let mut acc = 0.0;
        let mut xp = 1.0;
        for &c in &self.c_coef {
            let term = c * xp;
            acc += term;
            if term.abs() < 1e-18 * acc.abs() {
                break;
            }
            xp *= x;
        }
        lead * acc
    }

    fn series_d(&self, t: f64) -> f64 {
        let x = 1.0 / (t * t);
        let lead = t.powf(-self.a);
        let mut acc = 0.0;
        let mut xp = 1.0;
        for &c in &self.d_coef {
            let term = c * xp;
            acc += term;
            if term.abs() < 1e-18 * acc.abs() {
                break;
            }
            xp *= x;
        }
        lead * acc
    }

    fn cheb_g(&self, t: f64) -> f64 {
        let width = SPLIT / PANELS as f64;
        let k = ((t / width) as usize).min(PANELS - 1);
        let lo = k as f64 * width;
        let x = (t - lo) * 2.0 / width - 1.0;
        clenshaw(&self.cheb[k], x)
    }

    pub fn g(&self, t: f64) -> f64 {
        let x = t.abs();
        if x > 1e100 {
            x.powf(-self.p)
        } else {
            (-0.5 * self.p * (x * x).ln_1p()).exp()
        }
    }

    /// Complement `Lambda - G(t)` for `t >= 0`.
    pub fn comp(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        if t < SPLIT {
            self.spec.big_lambda - self.cheb_g(t)
        } else {
            self.series_c(t)
        }
    }

    #[allow(non_snake_case)]
    pub fn G(&self, t: f64) -> f64 {
        let x = t.abs();
        let v = if x < SPLIT { self.cheb_g(x) } else { self.spec.big_lambda - self.series_c(x) };
        v.copysign(t)
    }

    pub fn gbar(&self, t: f64) -> f64 {
        if t < 0.0 {
            self.comp(-t)
        } else {
            2.0 * self.spec.big_lambda - self.comp(t)
        }
    }

    /// `(1 - (1+t^2)^(-a/2)) / a`, the integral of `tau g(tau)` over [0, t].
    fn moment(&self, t: f64) -> f64 {
        let l = if t.abs() > 1e100 { 2.0 * t.abs().ln() } else { (t * t).ln_1p() };
        -(-0.5 * self.a * l).exp_m1() / self.a
    }

    /// `T(t) = Lambda t - GG(t)` for `t >= 0`; increasing from 0 to `lambda`.
    pub fn t_fn(&self, t: f64) -> f64 {
        t * self.comp(t) + self.moment(t)
    }

    /// `D(t) = lambda - T(t) = int_t^inf C` for `t >= 0`.
    pub fn d_fn(&self, t: f64) -> f64 {
        if t >= SPLIT {
            self.series_d(t)
        } else {
            self.spec.lambda_small - self.t_fn(t)
        }
    }

    #[allow(non_snake_case)]
    pub fn GG(&self, t: f64) -> f64 {
        let x = t.abs();
        if x < 1.0 {
            x * self.cheb_g(x) - self.moment(x)
        } else {
            self.spec.big_lambda * x - self.t_fn(x)
        }
    }

    /// `int_c^d Gb(t) dt`, accurate for short intervals far from the origin
    /// and for long intervals of either sign.
    pub fn gbar_integral(&self, c: f64, d: f64) -> f64 {
        if c > d {
            return -self.gbar_integral(d, c);
        }
        self.gbar_span(c, d - c)
    }

    /// `int_c^{c+len} Gb`, with the length supplied separately so that short
    /// intervals far out keep their relative accuracy.
    pub fn gbar_span(&self, c: f64, len: f64) -> f64 {
        if len < 0.0 {
            return -self.gbar_span(c + len, -len);
        }
        if len == 0.0 {
            return 0.0;
        }
        let d = c + len;
        let m = c + 0.5 * len;
        let dist = (1.0 + m * m).sqrt();
        let ratio = len / dist;
        if ratio <= 0.5 {
            let npts = if ratio < 1e-8 {
                1
            } else if ratio < 1e-4 {
                2
            } else if ratio < 1e-2 {
                4
            } else if ratio < 0.1 {
                6
            } else {
                9
            };
            let half = 0.5 * len;
            return quad::rule(npts).iter().map(|&(x, w)| half * w * self.gbar(m + half * x)).sum();
        }
        let lam = self.spec.big_lambda;
        if c >= 0.0 {
            2.0 * lam * len - (self.d_fn(c) - self.d_fn(d))
        } else if d <= 0.0 {
            self.d_fn(-d) - self.d_fn(-c)
        } else {
            self.t_fn(-c) + 2.0 * lam * d - self.t_fn(d)
        }
    }
}
