use nlplateau::domain::*;
use nlplateau::functional::*;
use nlplateau::kernel::Kernel;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ts(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    quadrature::integrate(f, a, b, tol).integral
}

fn unit(w: f64) -> Domain1D {
    Domain1D::new(-1.0, 1.0, w).unwrap()
}

fn disc(s: f64, h: f64, phi: &ExteriorData, m: f64) -> Discretization {
    let k = Kernel::new(1, s).unwrap();
    Discretization::new(&k, &unit(20.0), h, phi, m, Basis::Linear, QuadOptions::default()).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-amp..amp)).collect()
}

// piecewise-linear interpolant of nodal values on [-1, 1]
fn interp(u: &[f64], x: f64) -> f64 {
    let cells = u.len() - 1;
    let h = 2.0 / cells as f64;
    let t = ((x + 1.0) / h).clamp(0.0, cells as f64);
    let i = (t.floor() as usize).min(cells - 1);
    let f = t - i as f64;
    u[i] * (1.0 - f) + u[i + 1] * f
}

// A_s by nested quadrature, splitting at the nodes and at the diagonal
fn interior_oracle(k: &Kernel, u: &[f64]) -> f64 {
    let s = k.s();
    let cells = u.len() - 1;
    let breaks: Vec<f64> = (0..=cells).map(|i| -1.0 + 2.0 * i as f64 / cells as f64).collect();
    let inner = |x: f64| {
        let mut cuts = breaks.clone();
        cuts.push(x);
        cuts.sort_by(f64::total_cmp);
        let ux = interp(u, x);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| ts(|y| {
                let r = (x - y).abs();
                if r == 0.0 { return 0.0; }
                k.GG((ux - interp(u, y)) / r) * r.powf(-s)
            }, w[0], w[1], 1e-13))
            .sum::<f64>()
    };
    breaks.windows(2).map(|w| ts(&inner, w[0], w[1], 1e-11)).sum()
}

// N^M by nested quadrature; the inner Gb integrals in closed form through
// int Gb = Lambda t + GG(t)
fn exchange_oracle(k: &Kernel, u: &[f64], phi: &ExteriorData, m: f64) -> f64 {
    let s = k.s();
    let lam = k.big_lambda();
    let cells = u.len() - 1;
    let breaks: Vec<f64> = (0..=cells).map(|i| -1.0 + 2.0 * i as f64 / cells as f64).collect();
    let big_phi = |x: f64, y: f64| {
        let r = (x - y).abs();
        let p = phi.eval(y);
        let q = (interp(u, x) - p) / r;
        let lo = (-m - p) / r;
        let hi = (m - p) / r;
        (2.0 * lam * m / r + 2.0 * k.GG(q) - k.GG(lo) - k.GG(hi)) * r.powf(-s)
    };
    let inner = |x: f64| {
        // y = 1 + d and y = -1 - d, d = t / (1 - t)
        let side = |sgn: f64| {
            ts(|t: f64| {
                if t <= 0.0 || t >= 1.0 { return 0.0; }
                let d = t / (1.0 - t);
                big_phi(x, sgn * (1.0 + d)) / ((1.0 - t) * (1.0 - t))
            }, 0.0, 1.0, 1e-13)
        };
        side(1.0) + side(-1.0)
    };
    breaks.windows(2).map(|w| ts(&inner, w[0], w[1], 1e-11)).sum()
}

#[test]
fn interior_of_identity_matches_closed_form() {
    let s = 0.5;
    let k = Kernel::new(1, s).unwrap();
    let om = Domain1D::new(0.0, 1.0, 10.0).unwrap();
    let phi = ExteriorData::Constant { c: 0.0 };
    let h = 1.0 / 64.0;
    let d = Discretization::new(&k, &om, h, &phi, 1.0, Basis::Linear, QuadOptions::default()).unwrap();
    let u: Vec<f64> = d.positions();
    // the difference quotient is identically 1
    let want = k.GG(1.0) * 2.0 / ((1.0 - s) * (2.0 - s));
    let got = d.energy_interior(&u).unwrap();
    assert!((got - want).abs() < 5e-3 * want);
    assert!((got - want).abs() < 1e-9 * want, "{got} {want}");
}

#[test]
fn interior_trivial_cases() {
    let phi = ExteriorData::Cone { c: 0.0, m: 0.0, kappa: 2.0 };
    let d = disc(0.5, 1.0 / 16.0, &phi, 5.0);
    let n = d.unknowns();
    assert!(d.energy_interior(&vec![0.7; n]).unwrap().abs() < 1e-20);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = random_field(&mut rng, n, 1.0);
    let v: Vec<f64> = u.iter().map(|x| x + 3.25).collect();
    let (a, b) = (d.energy_interior(&u).unwrap(), d.energy_interior(&v).unwrap());
    assert!(a > 0.0);
    assert!((a - b).abs() < 1e-12 * a);
}

#[test]
fn four_node_grid_matches_nested_quadrature() {
    let s = 0.5;
    let k = Kernel::new(1, s).unwrap();
    let phi = ExteriorData::Cone { c: 0.0, m: 0.0, kappa: 2.0 };
    let m = 5.0;
    let d = Discretization::new(&k, &unit(20.0), 2.0 / 3.0, &phi, m, Basis::Linear, QuadOptions::default()).unwrap();
    for u in [vec![0.3, -0.7, 1.1, 0.2], vec![0.0; 4], vec![-2.0, 1.5, 1.5, -0.5]] {
        let e = d.energy(&u).unwrap();
        let a = interior_oracle(&k, &u);
        let nm = exchange_oracle(&k, &u, &phi, m);
        assert!((e.interior - a).abs() <= 1e-6 * a.max(1e-3), "interior {} vs {a}", e.interior);
        let ex = e.exchange + e.farfield;
        assert!((ex - nm).abs() <= 1e-6 * nm.abs(), "exchange {ex} vs {nm}");
    }
}

#[test]
fn zero_data_exchange_is_geometric() {
    let s = 0.5;
    let k = Kernel::new(1, s).unwrap();
    let phi = ExteriorData::Constant { c: 0.0 };
    let m = 3.0;
    let d = Discretization::new(&k, &unit(20.0), 1.0 / 8.0, &phi, m, Basis::Linear, QuadOptions::default()).unwrap();
    let e = d.energy(&vec![0.0; d.unknowns()]).unwrap();
    assert_eq!(e.interior, 0.0);
    // int_Omega int_{C Omega} (2 Lambda M / r - 2 GG(M / r)) r^{-s}
    let lam = k.big_lambda();
    let side = |x: f64| {
        let r0 = 1.0 - x;
        ts(|t: f64| {
            if t <= 0.0 || t >= 1.0 { return 0.0; }
            let r = r0 + t / (1.0 - t);
            (2.0 * lam * m / r - 2.0 * k.GG(m / r)) * r.powf(-s) / ((1.0 - t) * (1.0 - t))
        }, 0.0, 1.0, 1e-13)
    };
    let want = 2.0 * ts(side, -1.0, 1.0, 1e-11);
    let got = e.exchange + e.farfield;
    assert!((got - want).abs() < 1e-6 * want, "{got} {want}");
}

#[test]
fn truncation_height_enters_as_a_constant() {
    let phi = ExteriorData::Cone { c: 0.2, m: 0.3, kappa: 2.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in [0.3, 0.7] {
        let d1 = disc(s, 1.0 / 16.0, &phi, 50.0);
        let d2 = disc(s, 1.0 / 16.0, &phi, 80.0);
        let n = d1.unknowns();
        let u1 = random_field(&mut rng, n, 2.0);
        let u2 = random_field(&mut rng, n, 2.0);
        let off = |u: &[f64]| d2.energy(u).unwrap().total - d1.energy(u).unwrap().total;
        let (a, b) = (off(&u1), off(&u2));
        assert!((a - b).abs() < 1e-6, "s={s}: {a} {b}");
    }
}

#[test]
fn discrete_energy_is_convex() {
    let phi = ExteriorData::Cone { c: 0.0, m: 0.0, kappa: 2.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for s in [0.1, 0.5, 0.9] {
        let d = disc(s, 1.0 / 16.0, &phi, 45.0);
        let n = d.unknowns();
        for _ in 0..10 {
            let u1 = random_field(&mut rng, n, 3.0);
            let u2 = random_field(&mut rng, n, 3.0);
            let th: f64 = rng.random_range(0.0..1.0);
            let mid: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| th * a + (1.0 - th) * b).collect();
            // differences against u1 keep the comparison at the size of the increments
            let f1 = 0.0;
            let f2 = d.energy_difference(&u1, &u2).unwrap();
            let fm = d.energy_difference(&u1, &mid).unwrap();
            assert!(fm <= th * f1 + (1.0 - th) * f2 + 1e-10, "s={s}: {fm} {}", (1.0 - th) * f2);
        }
    }
}

#[test]
fn pairing_matches_central_differences() {
    let phi = ExteriorData::Cone { c: 0.0, m: 0.0, kappa: 2.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for s in [0.3, 0.7] {
        let d = disc(s, 1.0 / 32.0, &phi, 0.0);
        let n = d.unknowns();
        for _ in 0..20 {
            let u = random_field(&mut rng, n, 1.0);
            let v = random_field(&mut rng, n, 1.0);
            let t = 1e-5;
            let up: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + t * b).collect();
            let um: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - t * b).collect();
            let fd = (d.energy(&up).unwrap().total - d.energy(&um).unwrap().total) / (2.0 * t);
            let pr = d.pairing(&u, &v).unwrap();
            assert!((fd - pr).abs() <= 1e-6 * pr.abs(), "s={s}: {fd} {pr}");
        }
    }
}

#[test]
fn gradient_components_are_hat_pairings() {
    let phi = ExteriorData::Cone { c: 0.0, m: 0.0, kappa: 2.0 };
    let d = disc(0.5, 1.0 / 8.0, &phi, 10.0);
    let n = d.unknowns();
    let u: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let g = d.gradient(&u).unwrap();
    for i in 0..n {
        let mut hat = vec![0.0; n];
        hat[i] = 1.0;
        assert_eq!(d.pairing(&u, &hat).unwrap(), g[i]);
    }
    assert!(d.gradient(&vec![0.0; n]).is_ok());
    let flat = disc(0.5, 1.0 / 8.0, &ExteriorData::Constant { c: 0.4 }, 10.0);
    let g0 = flat.gradient(&vec![0.4; n]).unwrap();
    assert!(g0.iter().all(|x| x.abs() < 1e-9), "{g0:?}");
}

#[test]
fn weak_pairing_rejects_exterior_support() {
    let phi = ExteriorData::Constant { c: 0.0 };
    let k = Kernel::new(1, 0.5).unwrap();
    let om = unit(4.0);
    let grid = Grid1D::new(&om, &ObstacleSpec::none(), 0.25).unwrap();
    let d = Discretization::new(&k, &om, 0.25, &phi, 5.0, Basis::Linear, QuadOptions::default()).unwrap();
    let u = ScalarField::from_omega(&grid, &phi, &vec![0.5; 9]).unwrap();
    let mut v = ScalarField::from_omega(&grid, &phi, &vec![0.0; 9]).unwrap();
    assert!(d.weak_curvature_pairing(&u, &v).unwrap().abs() < 1e-12);
    v.values[0] = 1.0;
    assert_eq!(d.weak_curvature_pairing(&u, &v), Err(FunctionalError::ExteriorSupport(0)));
    let c = ScalarField::from_omega(&grid, &phi, &vec![0.0; 9]).unwrap();
    let mut w = ScalarField::from_omega(&grid, &phi, &vec![0.0; 9]).unwrap();
    w.values[grid.first + 3] = 1.0;
    assert!(d.weak_curvature_pairing(&c, &w).unwrap().abs() < 1e-12);
}

#[test]
fn truncation_at_the_bound_lowers_energy() {
    // bounded data, so truncation from both sides is a contraction toward the data
    let phi = ExteriorData::Constant { c: 0.3 };
    let om = unit(20.0);
    let bound = om.diam() + 0.3;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for basis in [Basis::Linear, Basis::Step] {
        let k = Kernel::new(1, 0.5).unwrap();
        let d = Discretization::new(&k, &om, 1.0 / 16.0, &phi, 3.0 * bound, basis, QuadOptions::default()).unwrap();
        for _ in 0..10 {
            let u = random_field(&mut rng, d.unknowns(), 3.0 * bound);
            let lvl = bound * rng.random_range(1.0..2.0);
            let v: Vec<f64> = u.iter().map(|x| x.clamp(-lvl, lvl)).collect();
            assert!(d.energy_difference(&u, &v).unwrap() <= 1e-9, "{basis:?}");
        }
    }
}

#[test]
fn mesh_refinement_rate() {
    let phi = ExteriorData::Cone { c: 0.0, m: 0.0, kappa: 2.0 };
    let u = |x: f64| 0.5 * (1.5 * x).cos() - 0.3 * x;
    for s in [0.3, 0.7] {
        let vals: Vec<f64> = [8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|&c| {
                let d = disc(s, 1.0 / c, &phi, 10.0);
                let f: Vec<f64> = d.positions().iter().map(|&x| u(x)).collect();
                d.energy(&f).unwrap().total
            })
            .collect();
        let d1 = (vals[1] - vals[0]).abs();
        let d2 = (vals[2] - vals[1]).abs();
        let d3 = (vals[3] - vals[2]).abs();
        let gamma = ((d1 / d2).log2() + (d2 / d3).log2()) / 2.0;
        eprintln!("s={s} F = {vals:?} fitted gamma = {gamma:.3}");
        assert!(gamma > 0.0);
    }
}
