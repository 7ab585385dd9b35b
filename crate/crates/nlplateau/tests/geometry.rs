use nlplateau::domain::{Domain1D, ExteriorData, Psi};
use nlplateau::functional::QuadOptions;
use nlplateau::geometry::*;
use nlplateau::kernel::Kernel;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn kernel(s: f64) -> Kernel {
    Kernel::new(1, s).unwrap()
}

fn half_plane() -> FarField {
    FarField::Subgraph { phi: ExteriorData::Constant { c: 0.0 } }
}

fn cone(kappa: f64) -> FarField {
    FarField::Subgraph { phi: ExteriorData::Cone { c: 0.0, m: 0.0, kappa } }
}

fn unit_square() -> Rect {
    Rect { x0: -0.5, x1: 0.5, y0: -0.5, y1: 0.5 }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// (2/s) int_{-pi/2}^{pi/2} (2 cos t)^{-s} dt by composite midpoint
fn disk_oracle(s: f64) -> f64 {
    let n = 400_000;
    let dt = PI / n as f64;
    let sum: f64 = (0..n).map(|i| (2.0 * (-PI / 2.0 + (i as f64 + 0.5) * dt).cos()).powf(-s)).sum();
    2.0 / s * sum * dt
}

#[test]
fn interaction_basics() {
    let k = kernel(0.5);
    let w = Window::centered(2.0, 32).unwrap();
    let empty = PixelSet::raster(w, FarField::Empty).unwrap();
    let a = PixelSet::from_fn(w, FarField::Empty, |p| p[0] < -0.5 && p[0] > -1.5 && p[1].abs() < 0.5).unwrap();
    let b = PixelSet::from_fn(w, FarField::Empty, |p| p[0] > 0.25 && p[0] < 1.5 && p[1] > 0.0 && p[1] < 1.0).unwrap();
    assert_eq!(interaction(k.spec(), &empty, &b).unwrap(), 0.0);
    let ab = interaction(k.spec(), &a, &b).unwrap();
    let ba = interaction(k.spec(), &b, &a).unwrap();
    assert!(ab > 0.0);
    assert_eq!(ab, ba);
    assert!(matches!(interaction(k.spec(), &a, &a), Err(GeometryError::Overlap(_))));
    let lower = PixelSet::raster(w, half_plane()).unwrap();
    let upper = PixelSet::raster(w, FarField::Sectors { apex: [0.0, 0.5], arcs: vec![[0.5, 2.6]] }).unwrap();
    assert!(matches!(interaction(k.spec(), &lower, &upper), Err(GeometryError::FarFar)));
}

#[test]
fn refined_cells_reproduce_coarse_interaction() {
    // adjacent and diagonal cell pairs against their 4x4 subdivisions
    let k = kernel(0.3);
    for (di, dj) in [(1isize, 0isize), (1, 1), (2, 1), (0, 3)] {
        let coarse = Window::new(-0.25, -0.25, 0.25, 6, 6).unwrap();
        let fine = Window::new(-0.25, -0.25, 0.0625, 24, 24).unwrap();
        let pick = |w: Window, i: isize, j: isize| {
            PixelSet::from_fn(w, FarField::Empty, move |p| {
                let r = coarse.rect(i, j);
                p[0] > r[0] && p[0] < r[1] && p[1] > r[2] && p[1] < r[3]
            })
            .unwrap()
        };
        let lc = interaction(k.spec(), &pick(coarse, 1, 1), &pick(coarse, 1 + di, 1 + dj)).unwrap();
        let lf = interaction(k.spec(), &pick(fine, 1, 1), &pick(fine, 1 + di, 1 + dj)).unwrap();
        assert!(rel(lc, lf) < 1e-8, "{di},{dj}: {lc} vs {lf}");
    }
}

#[test]
fn squares_at_distance_ten() {
    let s = 0.5;
    let k = kernel(s);
    let w = Window::new(-0.5, -0.5, 0.125, 104, 16).unwrap();
    let inside = |p: [f64; 2], x0: f64| p[0] > x0 && p[0] < x0 + 1.0 && p[1] > 0.0 && p[1] < 1.0;
    let a = PixelSet::from_fn(w, FarField::Empty, move |p| inside(p, 0.0)).unwrap();
    let b = PixelSet::from_fn(w, FarField::Empty, move |p| inside(p, 11.0)).unwrap();
    let got = interaction(k.spec(), &a, &b).unwrap();
    // midpoint rule with 4x the cells
    let m = 32;
    let d = 1.0 / m as f64;
    let pts: Vec<(f64, f64)> = (0..m * m).map(|c| ((c % m) as f64 * d + 0.5 * d, (c / m) as f64 * d + 0.5 * d)).collect();
    let mut oracle = 0.0;
    for &(x1, y1) in &pts {
        for &(x2, y2) in &pts {
            oracle += (11.0 + x2 - x1).hypot(y2 - y1).powf(-2.0 - s);
        }
    }
    oracle *= d.powi(4);
    assert!(rel(got, oracle) < 0.01, "{got} vs {oracle}");
}

#[test]
fn half_plane_perimeter_converges_under_refinement() {
    let k = kernel(0.5);
    let per = |n| {
        let e = PixelSet::raster(Window::centered(2.0, n).unwrap(), half_plane()).unwrap();
        fractional_perimeter(k.spec(), &e, &unit_square()).unwrap()
    };
    let (a, b) = (per(64), per(256));
    assert!(a.total > 0.0 && b.total > 0.0);
    assert!(rel(a.total, b.total) < 0.01, "{} vs {}", a.total, b.total);
}

#[test]
fn perimeter_edge_cases() {
    let k = kernel(0.4);
    let w = Window::centered(2.0, 32).unwrap();
    let empty = PixelSet::raster(w, FarField::Empty).unwrap();
    assert_eq!(fractional_perimeter(k.spec(), &empty, &unit_square()).unwrap().total, 0.0);
    // E is the whole plane outside the square: only the outer term survives
    let all = FarField::Sectors { apex: [0.0, 0.0], arcs: vec![[0.0, 2.0 * PI]] };
    let o = unit_square();
    let e = PixelSet::from_fn(w, all, |p| !o.contains(p)).unwrap();
    let p = fractional_perimeter(k.spec(), &e, &o).unwrap();
    assert_eq!(p.inner, 0.0);
    let inside = PixelSet::from_fn(w, FarField::Empty, |p| o.contains(p)).unwrap();
    let l = interaction(k.spec(), &e, &inside).unwrap();
    assert!(rel(p.total, l) < 1e-10, "{} vs {l}", p.total);
    assert!(matches!(
        fractional_perimeter(k.spec(), &empty, &Rect { x0: -3.0, x1: 0.0, y0: 0.0, y1: 1.0 }),
        Err(GeometryError::Region(_))
    ));
}

#[test]
fn direct_sum_matches_decomposition() {
    let k = kernel(0.6);
    let w = Window::centered(2.0, 24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let base = PixelSet::raster(w, cone(1.0)).unwrap();
    let o = Rect { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 };
    let engine = PerimeterEngine::new(k.spec(), w, cone(1.0), &o).unwrap();
    for _ in 0..3 {
        let occ: Vec<bool> = (0..w.cells())
            .map(|c| {
                let p = w.center((c % w.nx) as isize, (c / w.nx) as isize);
                if o.contains(p) { rng.random_bool(0.5) } else { base.occupancy()[c] }
            })
            .collect();
        let e = base.with_occupancy(occ).unwrap();
        let fast = engine.perimeter(&e).unwrap().total;
        let direct = engine.perimeter_direct(&e).unwrap();
        assert!(rel(fast, direct) < 1e-12, "{fast} vs {direct}");
    }
}

#[test]
fn half_plane_curvature_vanishes() {
    let k = kernel(0.5);
    let e = PixelSet::raster(Window::centered(2.0, 128).unwrap(), half_plane()).unwrap();
    for q in [[0.0, 0.0], [0.5, 0.0], [-1.25, 0.0]] {
        let h = mean_curvature(k.spec(), &e, q, &default_radii(0.5, 7), 1e-3).unwrap();
        assert!(h.value.abs() <= 1e-10, "{h:?}");
        assert!(h.converged);
    }
    let err = mean_curvature(k.spec(), &e, [0.0, 0.5], &default_radii(0.5, 3), 1e-3);
    assert!(matches!(err, Err(GeometryError::NotOnBoundary(..))));
    let err = mean_curvature(k.spec(), &e, [0.0, 0.0], &[0.1, 0.2], 1e-3);
    assert!(matches!(err, Err(GeometryError::Radii(_))));
}

#[test]
fn disk_curvature_matches_polar_oracle() {
    let w = Window::centered(2.0, 512).unwrap();
    let e = PixelSet::from_fn(w, FarField::Empty, |p| p[0].hypot(p[1]) < 1.0).unwrap();
    let s = 0.5;
    let h = mean_curvature(kernel(s).spec(), &e, [0.0, -1.0], &default_radii(0.5, 3), 1e-2).unwrap();
    assert!(rel(h.value, disk_oracle(s)) < 0.02, "{h:?} vs {}", disk_oracle(s));
    let s = 0.02;
    let h = mean_curvature(kernel(s).spec(), &e, [0.0, -1.0], &default_radii(0.5, 3), 1e-2).unwrap();
    assert!(rel(s * h.value, 2.0 * PI) < 0.05, "{}", s * h.value);
}

#[test]
fn alpha_values() {
    let k = kernel(0.5);
    let w = Window::centered(2.0, 64).unwrap();
    let seq = [0.1, 0.05, 0.02];
    let half = alpha_at_infinity(k.spec(), &PixelSet::raster(w, half_plane()).unwrap(), &seq).unwrap();
    assert_eq!(half.alpha_bar, PI);
    assert_eq!(half.alpha_lower, PI);
    let disk = PixelSet::from_fn(w, FarField::Empty, |p| p[0].hypot(p[1]) < 0.75).unwrap();
    let bounded = alpha_at_infinity(k.spec(), &disk, &seq).unwrap();
    assert_eq!(bounded.alpha_bar, 0.0);
    assert!(bounded.samples.iter().all(|p| p.1 == 0.0));
    let c = alpha_at_infinity(k.spec(), &PixelSet::raster(w, cone(1.0)).unwrap(), &seq).unwrap();
    assert!((c.alpha_bar - PI / 2.0).abs() < 1e-15);
    for a in [&half, &c] {
        let at = a.samples.iter().find(|p| p.0 == 0.02).unwrap().1;
        assert!(rel(at, a.exact) < 0.01, "{a:?}");
        assert!(!a.disagreement);
    }
    let tab = FarField::Subgraph { phi: ExteriorData::Tabulated { x0: 0.0, h: 1.0, values: vec![0.0, 1.0] } };
    assert!(matches!(PixelSet::raster(w, tab), Err(GeometryError::UnsupportedFarField(_))));
    assert!(alpha_at_infinity(k.spec(), &disk, &[0.02, 0.1]).is_err());
}

#[test]
fn alpha_is_monotone_and_additive() {
    let k = kernel(0.5);
    let w = Window::centered(2.0, 64).unwrap();
    let mut last = 0.0;
    for kappa in [4.0, 2.0, 1.0, 0.5, -0.5, -2.0] {
        let a = alpha_at_infinity(k.spec(), &PixelSet::raster(w, cone(kappa)).unwrap(), &[0.02]).unwrap();
        assert!(a.alpha_bar > last);
        last = a.alpha_bar;
    }
    let arcs = [[0.2, 0.9], [2.0, 2.5], [4.0, 5.5]];
    let sectors = |arcs: Vec<[f64; 2]>| FarField::Sectors { apex: [0.25, -0.5], arcs };
    let union = alpha_at_infinity(k.spec(), &PixelSet::raster(w, sectors(arcs.to_vec())).unwrap(), &[0.02]).unwrap();
    let parts: f64 = arcs
        .iter()
        .map(|a| alpha_at_infinity(k.spec(), &PixelSet::raster(w, sectors(vec![*a])).unwrap(), &[0.02]).unwrap().alpha_bar)
        .sum();
    assert!((union.alpha_bar - parts).abs() < 1e-14);
    assert!(rel(union.samples[0].1, parts) < 0.01, "{union:?}");
}

#[test]
fn curvature_bound_parameters() {
    let k = kernel(0.1);
    let omega = 2.0 * PI;
    let p = CurvatureBoundParams::new(k.spec(), 0.0).unwrap();
    assert!((p.beta - PI / 2.0).abs() < 1e-15);
    let edge = CurvatureBoundParams::new(k.spec(), PI - 1e-9).unwrap();
    assert!((edge.beta - 5e-10).abs() < 1e-15, "{}", edge.beta);
    let d = edge.delta(0.1);
    let expect = (-(1.0 / 0.1) * (1.0 + edge.beta / (omega + edge.beta)).ln()).exp();
    assert!((d - expect).abs() < 1e-12 && d > 0.999_999 && d < 1.0);
    let abar = 2.0 * 0.5f64.atan();
    let c = CurvatureBoundParams::new(k.spec(), abar).unwrap();
    assert!((c.beta - (2.0 * PI - 4.0 * 0.5f64.atan()) / 4.0).abs() < 1e-15);
    let ds = c.delta_map(&[0.5, 0.2, 0.1, 0.05]);
    assert!(ds.windows(2).all(|w| w[1].1 < w[0].1));
    assert!(ds.iter().all(|p| p.1 > 0.0 && p.1 < 1.0));
    assert!(matches!(CurvatureBoundParams::new(k.spec(), PI), Err(GeometryError::AlphaTooLarge { .. })));
}

#[test]
fn cone_flanks_have_curvature_above_bound() {
    let w = Window::centered(4.0, 256).unwrap();
    let e = PixelSet::raster(w, cone(2.0)).unwrap();
    let normal = [2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt()];
    let points: Vec<TangentPoint> = [8isize, 24, 40]
        .iter()
        .map(|&k| TangentPoint { q: [k as f64 * w.h, -2.0 * k as f64 * w.h], normal })
        .collect();
    for s in [0.1, 0.05] {
        let k = kernel(s);
        let abar = alpha_at_infinity(k.spec(), &e, &[s]).unwrap().alpha_bar;
        let params = CurvatureBoundParams::new(k.spec(), abar).unwrap();
        let checks = positive_curvature_check(k.spec(), &e, &params, &points, &default_radii(0.5, 3), 0.05).unwrap();
        for c in checks {
            assert!(c.ball_clear && c.pass, "{c:?}");
        }
    }
}

fn confined_random(w: Window, omega: &Domain1D, m: f64, rng: &mut ChaCha8Rng) -> PixelSet {
    let occ = (0..w.cells())
        .map(|c| {
            let (i, j) = ((c % w.nx) as isize, (c / w.nx) as isize);
            let p = w.center(i, j);
            let r = w.rect(i, j);
            if !omega.contains(p[0]) {
                p[1] < 0.0
            } else if r[3] <= -m {
                true
            } else if r[2] >= m {
                false
            } else {
                rng.random_bool(0.5 - 0.4 * p[1] / m)
            }
        })
        .collect();
    PixelSet::new(w, occ, half_plane()).unwrap()
}

#[test]
fn rearrangement_examples() {
    let w = Window::centered(2.0, 64).unwrap();
    let omega = Domain1D::with_default_window(-1.0, 1.0).unwrap();
    let u = |x: f64| ((x * 4.0).sin() * 8.0).round() / 16.0;
    let far = half_plane();
    let values: Vec<f64> = (0..w.nx)
        .map(|i| {
            let x = w.center(i as isize, 0)[0];
            if omega.contains(x) { u(x) } else { 0.0 }
        })
        .collect();
    let f = subgraph_pixels(w, far.clone(), &ColumnFunction { x0: w.x0, h: w.h, values: values.clone() }).unwrap();
    let r = vertical_rearrangement(&f, &omega, 1.0).unwrap();
    assert_eq!(r.w.values, values);
    assert_eq!(r.subgraph, f);
    // shuffle one column inside the slab
    let col = r.columns[10];
    let mut occ = f.occupancy().to_vec();
    let (j0, j1) = (w.ny / 2 - 14, w.ny / 2 + 2);
    let mut column: Vec<bool> = (j0..j1).map(|j| occ[w.index(col, j)]).collect();
    column.rotate_left(5);
    for (t, j) in (j0..j1).enumerate() {
        occ[w.index(col, j)] = column[t];
    }
    let g = f.with_occupancy(occ).unwrap();
    assert_ne!(g, f);
    let rg = vertical_rearrangement(&g, &omega, 1.0).unwrap();
    assert_eq!(rg.w.values, values);
    assert_eq!(rg.subgraph, f);
    // occupied cell above the slab
    let mut bad = f.occupancy().to_vec();
    bad[w.index(col, w.ny - 2)] = true;
    let bad = f.with_occupancy(bad).unwrap();
    assert!(matches!(vertical_rearrangement(&bad, &omega, 1.0), Err(GeometryError::Confinement { .. })));
}

#[test]
fn rearrangement_does_not_increase_perimeter() {
    let k = kernel(0.5);
    let w = Window::centered(2.0, 64).unwrap();
    let omega = Domain1D::with_default_window(-1.0, 1.0).unwrap();
    let m = 1.0;
    let region = Rect { x0: -1.0, x1: 1.0, y0: -m, y1: m };
    let engine = PerimeterEngine::new(k.spec(), w, half_plane(), &region).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let f = confined_random(w, &omega, m, &mut rng);
        let r = vertical_rearrangement(&f, &omega, m).unwrap();
        let pf = engine.perimeter(&f).unwrap();
        let pg = engine.perimeter(&r.subgraph).unwrap();
        let tol = engine.error_estimate(&pf) + engine.error_estimate(&pg);
        assert!(pf.total >= pg.total - tol, "{} < {}", pf.total, pg.total);
    }
}

fn equivalence_setup() -> EquivalenceSetup {
    EquivalenceSetup {
        omega: Domain1D::with_default_window(-1.0, 1.0).unwrap(),
        phi: ExteriorData::Constant { c: 0.0 },
        m: 1.0,
        window: Window::centered(2.0, 64).unwrap(),
        opts: QuadOptions::default(),
    }
}

#[test]
fn equivalence_offset_is_independent_of_the_field() {
    let k = kernel(0.5);
    let setup = equivalence_setup();
    let h = setup.window.h;
    let n = 32;
    let flat = vec![0.0; n];
    let same = equivalence_offset(&k, &setup, &flat, &flat).unwrap();
    assert_eq!(same.offset, 0.0);
    let bump: Vec<f64> = (0..n).map(|i| if (12..20).contains(&i) { 3.0 * h } else { 0.0 }).collect();
    let low = vec![-4.0 * h; n];
    for (a, b) in [(&flat, &bump), (&flat, &low), (&bump, &low)] {
        let r = equivalence_offset(&k, &setup, a, b).unwrap();
        assert!(r.offset.abs() <= 2.0 * r.tolerance, "{r:?}");
    }
    let off_grid = vec![0.3 * h; n];
    assert!(matches!(equivalence_offset(&k, &setup, &flat, &off_grid), Err(GeometryError::Quantization(_))));
}

#[test]
fn osculating_ball_and_inequality() {
    assert_eq!(osculating_ball_radius(1.0).unwrap(), 1.0);
    assert_eq!(osculating_ball_radius(2.0).unwrap(), 0.5);
    assert!(matches!(osculating_ball_radius(0.0), Err(GeometryError::Opening(_))));
    for q in [0.0, 0.5, 1.0] {
        assert_eq!(ball_inequality_gap(q), q.powi(4));
    }
    let n = 1000;
    for k in 0..=n {
        assert_eq!(ball_inequality_gap_exact(k, n), (k as i128).pow(4));
    }
    for (a, b, c, x0) in [(1.0, 0.0, 0.0, 0.0), (2.5, -1.0, 0.3, 0.7), (0.2, 3.0, -1.0, -2.0)] {
        assert_eq!(osculating_ball_violation(a, b, c, x0, 64).unwrap(), 0.0);
    }
}

#[test]
fn paraboloid_bounds() {
    let quad = Psi::Quadratic { c0: 0.1, c1: -0.3, c2: 0.75 };
    let exact = paraboloid_bound_check(&quad, (-1.0, 1.0), 0.5, None, None);
    assert!(exact.pass && exact.bound == 1.5, "{exact:?}");
    assert!(exact.min_slack.abs() < 1e-12);
    let sine = Psi::Sine { amp: 1.0, freq: 1.0, phase: 0.0 };
    let r = paraboloid_bound_check(&sine, (-1.0, 1.0), 0.5, None, None);
    assert!(r.pass && r.pairs >= 500 && r.bound == 1.0, "{r:?}");
    let under = paraboloid_bound_check(&quad, (-1.0, 1.0), 0.5, Some(0.75), None);
    assert!(!under.pass);
    let (x0, x) = under.witness.unwrap();
    assert!(quad.eval(x) > quad.eval(x0) + quad.deriv(x0) * (x - x0) + 0.375 * (x - x0).powi(2));
    let omega = Domain1D::with_default_window(-1.0, 1.0).unwrap();
    let low = ExteriorData::Constant { c: -2.0 };
    assert!(paraboloid_bound_check(&sine, (-1.0, 1.0), 0.5, None, Some((&low, &omega))).pass);
    let high = ExteriorData::Constant { c: 2.0 };
    let fail = paraboloid_bound_check(&sine, (-1.0, 1.0), 0.5, None, Some((&high, &omega)));
    assert!(!fail.pass && !omega.contains(fail.witness.unwrap().1));
}

#[test]
fn dome_examples() {
    let omega = Domain1D::with_default_window(-1.0, 1.0).unwrap();
    let d = dome_profile(&omega, 2, 0.2, |x| 0.3 + 0.1 * x).unwrap();
    assert_eq!(d.implicit(-1.0, 0.0), 0.0);
    assert_eq!(d.implicit(1.0, 0.0), 0.0);
    let delta: f64 = 0.125;
    let t = delta.powf(1.0 / 3.0);
    assert!(d.implicit(1.0 - delta, t).abs() < 1e-15);
    assert_eq!(d.eta(0.0), 1.0);
    assert_eq!(d.eta(0.9), 0.0);
    let c = d.check(32);
    assert!(c.samples >= 1000);
    assert!(c.boundary_residual < 1e-14, "{c:?}");
    assert!(c.min_gradient >= 1.0 - 1e-6, "{c:?}");
    assert_eq!(c.membership_mismatches, 0);
    assert!(matches!(dome_profile(&omega, 2, 0.4, |_| 0.0), Err(GeometryError::TubeRadius { .. })));
    assert!(matches!(dome_profile(&omega, 1, 0.1, |_| 0.0), Err(GeometryError::Order(1))));
}

#[test]
fn pgm_round_trip() {
    let w = Window::new(-1.5, -0.75, 0.125, 20, 12).unwrap();
    let e = PixelSet::from_fn(w, cone(0.5), |p| p[1] < -0.5 * p[0].abs() + if p[0].abs() < 0.5 { 0.25 } else { 0.0 }).unwrap();
    let dir = std::env::temp_dir().join(format!("nlplateau-pgm-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("set.pgm");
    e.write_pgm(&path).unwrap();
    let back = PixelSet::read_pgm(&path).unwrap();
    assert_eq!(back, e);
    std::fs::write(&path, b"P2\n1 1\n255\n0\n").unwrap();
    assert!(matches!(PixelSet::read_pgm(&path), Err(GeometryError::Format { .. })));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ring_must_match_far_field() {
    let w = Window::centered(1.0, 8).unwrap();
    let mut occ = PixelSet::raster(w, half_plane()).unwrap().occupancy().to_vec();
    occ[0] = false;
    assert!(matches!(PixelSet::new(w, occ, half_plane()), Err(GeometryError::FarFieldMismatch(_))));
    let e = PixelSet::raster(w, half_plane()).unwrap();
    assert_eq!(e.classify(3, 0), CellClass::Interior);
    assert_eq!(e.classify(3, 7), CellClass::Exterior);
    assert_eq!(e.classify(3, 3), CellClass::Boundary);
}
