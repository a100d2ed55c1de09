use treewave::conditioned::{batch_means, build_gibbs_plan, gibbs_run_pinned, gibbs_trace, GibbsChain};
use treewave::spectral::build_profile;
use treewave::{rng, SpectralPoint};

fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `E[X | X > a, Y > a]` for a standard pair with correlation `rho`.
fn pair_mean(rho: f64, a: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    let w = |x: f64| pdf(x) * q((a - rho * x) / s);
    let top = a.max(0.0) + 12.0;
    simpson(|x| x * w(x), a, top, 8000) / simpson(w, a, top, 8000)
}

#[test]
fn pair_means_match_quadrature() {
    // phi(1) = lambda / d.
    for (d, lambda, alpha) in [(4, 1.0, 0.0), (3, 2.0, 0.5), (3, -1.5, -0.5)] {
        let p = build_profile(&SpectralPoint::new(d, lambda).unwrap(), 8).unwrap();
        let plan = build_gibbs_plan(&p, 2).unwrap();
        let mut r = rng::stream(2, 0);
        let t = gibbs_trace(&plan, alpha, &[], &[0, 1], 200_000, 1_000, 1, &mut r).unwrap();
        let want = pair_mean(lambda / d as f64, alpha);
        for series in &t {
            assert!(series.iter().all(|&x| x > alpha));
            let est = batch_means(series);
            assert!((est.mean - want).abs() < 4.0 * est.stderr, "d={d} l={lambda}: {} +- {} vs {want}", est.mean, est.stderr);
        }
    }
}

/// Exact `E[X_k]` on a three-vertex path conditioned above `a`, by
/// integrating the middle coordinate against both conditional tails.
fn triple_means(phi1: f64, phi2: f64, a: f64) -> (f64, f64) {
    // Given X_2 = y the ends are a correlated pair with common mean m y.
    let c = [[1.0, phi1, phi2], [phi1, 1.0, phi1], [phi2, phi1, 1.0]];
    let m = c[0][1]; // coefficient of y for both ends
    let v11 = c[0][0] - m * m;
    let v13 = c[0][2] - m * m;
    let rho = v13 / v11;
    let s = v11.sqrt();
    let top = a.max(0.0) + 10.0;
    let g = |lo: f64| simpson(|u| pdf(u) * q((lo - rho * u) / (1.0 - rho * rho).sqrt()), lo, lo.max(0.0) + 10.0, 400);
    let g1 = |lo: f64| simpson(|u| u * pdf(u) * q((lo - rho * u) / (1.0 - rho * rho).sqrt()), lo, lo.max(0.0) + 10.0, 400);
    // Standardized lower limit of the ends given y.
    let z = |y: f64| (a - m * y) / s;
    let mass = simpson(|y| pdf(y) * g(z(y)), a, top, 400);
    let mid = simpson(|y| y * pdf(y) * g(z(y)), a, top, 400) / mass;
    let end = simpson(|y| pdf(y) * (m * y * g(z(y)) + s * g1(z(y))), a, top, 400) / mass;
    (end, mid)
}

#[test]
fn triple_means_match_quadrature() {
    for (d, lambda, alpha) in [(3, 0.0, 0.0), (4, 1.0, 0.3)] {
        let p = build_profile(&SpectralPoint::new(d, lambda).unwrap(), 8).unwrap();
        let (end, mid) = triple_means(p.phi(1).unwrap(), p.phi(2).unwrap(), alpha);
        let plan = build_gibbs_plan(&p, 3).unwrap();
        let mut r = rng::stream(4, 1);
        let t = gibbs_trace(&plan, alpha, &[], &[0, 1, 2], 200_000, 1_000, 1, &mut r).unwrap();
        for (series, want) in t.iter().zip([end, mid, end]) {
            let est = batch_means(series);
            assert!((est.mean - want).abs() < 4.0 * est.stderr, "d={d}: {} +- {} vs {want}", est.mean, est.stderr);
        }
    }
}

#[test]
fn pinned_coordinates_never_move() {
    let p = build_profile(&SpectralPoint::new(3, 0.5).unwrap(), 8).unwrap();
    let plan = build_gibbs_plan(&p, 12).unwrap();
    let mut r = rng::stream(8, 0);
    let states = gibbs_run_pinned(&plan, 0.0, &[(0, 1.5), (11, 3.0)], 500, 100, 1, &mut r).unwrap();
    assert_eq!(states.len(), 400);
    for s in &states {
        assert_eq!(s.values[0], 1.5);
        assert_eq!(s.values[11], 3.0);
        assert!(s.values.iter().all(|&v| v > 0.0));
    }
    assert!(GibbsChain::with_pinned(&plan, 0.0, &[(3, -1.0)]).is_err());
}

#[test]
fn runs_are_reproducible() {
    let p = build_profile(&SpectralPoint::new(3, 0.0).unwrap(), 8).unwrap();
    let plan = build_gibbs_plan(&p, 10).unwrap();
    let a = gibbs_trace(&plan, 0.2, &[], &[4], 3000, 100, 5, &mut rng::stream(1, 0)).unwrap();
    let b = gibbs_trace(&plan, 0.2, &[], &[4], 3000, 100, 5, &mut rng::stream(1, 0)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pinning_the_start_leaves_far_tails_unchanged() {
    let alpha = 0.0;
    let p = build_profile(&SpectralPoint::new(3, 0.0).unwrap(), 8).unwrap();
    let plan = build_gibbs_plan(&p, 16).unwrap();
    let far = 10;
    let grid = [alpha + 0.5, alpha + 1.0, alpha + 1.5, alpha + 2.0];
    let free = gibbs_trace(&plan, alpha, &[], &[far], 100_000, 1_000, 1, &mut rng::stream(12, 0)).unwrap();
    // Second pinned value stays below alpha + 2.
    let pinned = gibbs_trace(&plan, alpha, &[(0, 1.0), (1, 1.8)], &[far], 100_000, 1_000, 1, &mut rng::stream(12, 1)).unwrap();
    let a = treewave::conditioned::tail_of_series(&free[0], &grid);
    let b = treewave::conditioned::tail_of_series(&pinned[0], &grid);
    for (u, v) in a.points.iter().zip(&b.points) {
        let se = u.stderr.hypot(v.stderr);
        assert!((u.probability - v.probability).abs() < 4.0 * se, "x={}: {} vs {}", u.x, u.probability, v.probability);
    }
}
