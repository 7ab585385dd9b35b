use nlplateau::kernel::{sphere_measure, Kernel};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

fn ts(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    quadrature::integrate(f, a, b, 1e-14).integral
}

// int_0^inf (1+t^2)^{-p/2} dt
fn lambda_closed(n: u32, s: f64) -> f64 {
    let p = n as f64 + 1.0 + s;
    std::f64::consts::PI.sqrt() * gamma(0.5 * (p - 1.0)) / (2.0 * gamma(0.5 * p))
}

fn grid() -> impl Iterator<Item = f64> {
    (0..1000).map(|i| -50.0 + 100.0 * i as f64 / 999.0)
}

#[test]
fn g_examples() {
    let k = Kernel::new(1, 0.5).unwrap();
    assert_eq!(k.g(0.0), 1.0);
    assert_eq!(k.g(-3.0), k.g(3.0));
    assert!((k.g(1.0) - 2f64.powf(-1.25)).abs() < 1e-15);
}

#[test]
fn omega_matches_gamma_formula() {
    for d in 1..7u32 {
        let f = 2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0);
        assert!((sphere_measure(d) - f).abs() < 1e-12 * f);
    }
    let k = Kernel::new(1, 0.3).unwrap();
    assert!((k.spec().omega - 2.0 * std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn big_lambda_matches_beta_function() {
    for n in [1, 2, 3] {
        for s in [0.01, 0.02, 0.1, 0.3, 0.5, 0.7, 0.97] {
            let k = Kernel::new(n, s).unwrap();
            let want = lambda_closed(n, s);
            assert!((k.big_lambda() - want).abs() < 1e-12 * want, "n={n} s={s}: {} vs {want}", k.big_lambda());
        }
    }
    // the s -> 1 endpoint, where the antiderivative is t / sqrt(1+t^2)
    let k = Kernel::new(1, 1.0 - 1e-9).unwrap();
    assert!((k.big_lambda() - 1.0).abs() < 1e-8);
}

#[test]
fn g_and_gg_match_quadrature() {
    for s in [0.05, 0.5, 0.9] {
        let k = Kernel::new(1, s).unwrap();
        let g = |t: f64| (1.0 + t * t).powf(-0.5 * (2.0 + s));
        for t in [0.1, 1.0, 2.5, 3.99, 4.01, 7.0, 30.0] {
            let want = ts(g, 0.0, t);
            assert!((k.G(t) - want).abs() < 1e-12, "s={s} t={t}");
            assert!((k.G(-t) + want).abs() < 1e-12);
        }
        for t in [0.5, 2.0, 5.0, 12.0] {
            let want = ts(|x| ts(g, 0.0, x), 0.0, t);
            assert!((k.GG(t) - want).abs() < 1e-10 * want.max(1.0), "s={s} t={t}");
        }
    }
}

#[test]
fn gg_at_five_is_bracketed() {
    let k = Kernel::new(1, 0.5).unwrap();
    let (lam, lam_small) = (k.big_lambda(), k.spec().lambda_small);
    let v = k.GG(5.0);
    assert!(v >= 5.0 * lam - lam_small && v <= 5.0 * lam);
    assert_eq!(k.GG(-2.0), k.GG(2.0));
    assert_eq!(k.GG(0.0), 0.0);
}

#[test]
fn gbar_values() {
    let k = Kernel::new(1, 0.5).unwrap();
    let lam = k.big_lambda();
    assert!((k.gbar(0.0) - lam).abs() < 1e-15);
    assert!((k.gbar(1e12) - 2.0 * lam).abs() < 1e-9);
    assert!((k.gbar(1.0) - (2.0 * lam - k.gbar(-1.0))).abs() < 1e-14);
    let g = |t: f64| (1.0 + t * t).powf(-1.25);
    let want = lam + ts(g, 0.0, 1.0);
    assert!((k.gbar(1.0) - want).abs() < 1e-12);
}

#[test]
fn symmetry_identities_on_grid() {
    for n in [1, 2] {
        for s in [0.02, 0.5, 0.95] {
            let k = Kernel::new(n, s).unwrap();
            let lam = k.big_lambda();
            for t in grid() {
                assert!((k.g(t) - k.g(-t)).abs() <= 1e-9);
                assert!((k.G(t) + k.G(-t)).abs() <= 1e-9);
                assert!((k.GG(t) - k.GG(-t)).abs() <= 1e-9);
                assert!((k.gbar(t) + k.gbar(-t) - 2.0 * lam).abs() <= 1e-9);
                assert!(k.G(t).abs() <= lam);
            }
        }
    }
}

#[test]
fn gg_convex_and_lipschitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s in [0.02, 0.3, 0.8] {
        let k = Kernel::new(1, s).unwrap();
        let (lam, lam_small) = (k.big_lambda(), k.spec().lambda_small);
        for _ in 0..2000 {
            let t1 = rng.random_range(-1e3..1e3);
            let t2 = rng.random_range(-1e3..1e3);
            let th: f64 = rng.random_range(0.0..1.0);
            let mid = k.GG(th * t1 + (1.0 - th) * t2);
            assert!(mid <= th * k.GG(t1) + (1.0 - th) * k.GG(t2) + 1e-12 * (1.0 + t1.abs() + t2.abs()));
            assert!((k.GG(t1) - k.GG(t2)).abs() <= lam * (t1 - t2).abs() * (1.0 + 1e-12) + 1e-12);
        }
        for i in 0..=1000 {
            let t = -1e3 + 2.0 * i as f64;
            let v = k.GG(t);
            assert!(v <= lam * t.abs() + 1e-12 * t.abs() && v >= lam * t.abs() - lam_small - 1e-9 * t.abs().max(1.0));
        }
        // lambda - (Lambda t - GG(t)) = int_t^inf (tau - t) g(tau), which vanishes as t grows
        for t in [2.0, 10.0, 100.0] {
            // tau = t w^{-1/a} turns the integrand into a bounded one
            let a = s;
            let p = 2.0 + s;
            let gap = ts(
                |w: f64| {
                    let tau = t * w.powf(-1.0 / a);
                    (1.0 - t / tau) * (1.0 + tau.powi(-2)).powf(-0.5 * p) * t.powf(-a) / a
                },
                0.0,
                1.0,
            );
            let got = lam_small - (lam * t - k.GG(t));
            assert!((got - gap).abs() < 1e-9 * lam_small, "s={s} t={t}: {got} {gap}");
        }
    }
}

#[test]
fn derivative_chain() {
    for s in [0.02, 0.5, 0.95] {
        let k = Kernel::new(1, s).unwrap();
        for t in grid().filter(|t| t.abs() > 1e-3) {
            let e = 1e-5 * (1.0 + t.abs());
            let dgg = (k.GG(t + e) - k.GG(t - e)) / (2.0 * e);
            assert!((dgg - k.G(t)).abs() <= 1e-6 * k.G(t).abs(), "s={s} t={t}");
            let dg = (k.G(t + e) - k.G(t - e)) / (2.0 * e);
            assert!((dg - k.g(t)).abs() <= 1e-6 * k.g(t), "s={s} t={t}");
        }
    }
}
