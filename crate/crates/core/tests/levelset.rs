use std::collections::VecDeque;
use treewave::levelset::{
    conditioned_survival, critical_threshold, expdec_alpha, extract_components, haggstrom_alpha, rate_curve,
    survival_direct, survival_smc, survival_smc_curve, transfer_rate, SmcConfig, TransferSpec,
};
use treewave::sampler::{BallSampler, SamplerKind};
use treewave::spectral::build_profile;
use treewave::{CovarianceProfile, SpectralPoint};

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

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let up = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == up {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn profile(d: usize, lambda: f64) -> CovarianceProfile {
    build_profile(&SpectralPoint::new(d, lambda).unwrap(), 16).unwrap()
}

/// `P(X > a, Y > a)` for a standard pair with correlation `rho`.
fn pair_mass(rho: f64, a: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    simpson(|x| pdf(x) * q((a - rho * x) / s), a, a.max(0.0) + 12.0, 4000)
}

/// `P(X_1, X_2, X_3 > a)` on a geodesic, integrating out the middle vertex.
fn triple_mass(phi1: f64, phi2: f64, a: f64) -> f64 {
    let v = 1.0 - phi1 * phi1;
    let rho = (phi2 - phi1 * phi1) / v;
    simpson(|y| pdf(y) * pair_mass(rho, (a - phi1 * y) / v.sqrt()), a, a.max(0.0) + 10.0, 400)
}

#[test]
fn components_agree_with_breadth_first_search() {
    let p = profile(3, 1.0);
    let sampler = BallSampler::new(SamplerKind::Recursive, &p, 5).unwrap();
    for s in sampler.sample_many(30, 4) {
        let ball = s.ball();
        for alpha in [-0.5, 0.0, 0.7] {
            let open: Vec<bool> = s.values().iter().map(|&v| v > alpha).collect();
            let mut seen = vec![false; ball.len()];
            let mut sizes = Vec::new();
            let mut root = (0, None);
            for start in 0..ball.len() {
                if !open[start] || seen[start] {
                    continue;
                }
                seen[start] = true;
                let mut queue = VecDeque::from([start]);
                let (mut size, mut reach) = (0, 0);
                while let Some(u) = queue.pop_front() {
                    size += 1;
                    reach = reach.max(ball.vertex(u).depth());
                    for w in ball.neighbors(u) {
                        if open[w] && !seen[w] {
                            seen[w] = true;
                            queue.push_back(w);
                        }
                    }
                }
                if start == 0 {
                    root = (size, Some(reach));
                }
                sizes.push(size);
            }
            let summary = extract_components(&s, alpha);
            let mut got = summary.sizes();
            got.sort_unstable();
            sizes.sort_unstable();
            assert_eq!(got, sizes);
            assert_eq!(summary.total(), open.iter().filter(|&&o| o).count());
            assert_eq!(summary.root_size(), root.0);
            assert_eq!(summary.root_depth_reach(), root.1);
        }
    }
}

#[test]
fn short_paths_match_quadrature() {
    for (d, lambda, alpha) in [(3, 0.0, 0.0), (3, 1.0, 0.5), (4, -1.0, -0.3)] {
        let p = profile(d, lambda);
        let (phi1, phi2) = (p.phi(1).unwrap(), p.phi(2).unwrap());
        let exact = [q(alpha), pair_mass(phi1, alpha), triple_mass(phi1, phi2, alpha)];
        let curve = survival_smc_curve(&p, 3, alpha, SmcConfig::new(20_000, 8).unwrap(), 6).unwrap();
        for (k, want) in exact.iter().enumerate() {
            let smc = curve.estimate(k + 1).unwrap();
            assert!((smc.p_hat - want).abs() < 4.0 * smc.stderr.max(1e-12), "smc k={}: {} +- {} vs {want}", k + 1, smc.p_hat, smc.stderr);
            let direct = survival_direct(&p, k + 1, alpha, 200_000, 7).unwrap();
            assert!((direct.p_hat - want).abs() < 4.0 * direct.stderr, "direct k={}: {} vs {want}", k + 1, direct.p_hat);
        }
    }
}

#[test]
fn direct_survival_decreases_in_alpha_and_length() {
    let p = profile(3, 0.5);
    let mut prev = 1.0;
    for alpha in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        // Shared seed means shared draws, so monotonicity is exact.
        let e = survival_direct(&p, 8, alpha, 50_000, 3).unwrap();
        assert!(e.p_hat <= prev);
        prev = e.p_hat;
    }
    let curve = survival_smc_curve(&p, 20, 0.0, SmcConfig::new(2_000, 4).unwrap(), 1).unwrap();
    let ps = curve.p_hat();
    assert!(ps.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn averaging_conditioned_survival_recovers_the_marginal() {
    let (d, lambda, alpha, n) = (3, 1.0, 0.0, 6);
    let p = profile(d, lambda);
    let rho = p.phi(1).unwrap();
    let s = (1.0 - rho * rho).sqrt();
    let joint = |x: f64, y: f64| pdf(x) * pdf((y - rho * x) / s) / s;
    let config = SmcConfig::new(1_000, 4).unwrap();
    let (top, cells) = (alpha + 6.0, 24);
    let h = (top - alpha) / cells as f64;
    let weight = |i: usize| if i == 0 || i == cells { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
    let (mut total, mut var) = (0.0, 0.0);
    for i in 0..=cells {
        for j in 0..=cells {
            let (x, y) = (alpha + i as f64 * h, alpha + j as f64 * h);
            let w = weight(i) * weight(j) * h * h / 9.0 * joint(x, y);
            let f = if i == 0 || j == 0 {
                // The level itself has measure zero; nudge inside.
                conditioned_survival(&p, n, alpha, x + 1e-9, y + 1e-9, config, (i * 100 + j) as u64).unwrap()
            } else {
                conditioned_survival(&p, n, alpha, x, y, config, (i * 100 + j) as u64).unwrap()
            };
            total += w * f.p_hat;
            var += (w * f.stderr).powi(2);
        }
    }
    let marginal = survival_smc(&p, n, alpha, SmcConfig::new(50_000, 8).unwrap(), 99).unwrap();
    let se = (var + marginal.stderr.powi(2)).sqrt();
    assert!((total - marginal.p_hat).abs() < 4.0 * se + 1e-4, "{total} vs {} (se {se})", marginal.p_hat);
}

/// Leading eigenvalue of `g -> int_a^inf N(y; -x/2, 3/4) g(y) dy` on a
/// midpoint grid; at `d = 3, lambda = 0` the even and odd vertices of a path
/// form two independent copies of this chain.
fn decoupled_rate(a: f64) -> f64 {
    let (cells, top) = (1500, a.max(0.0) + 9.0);
    let h = (top - a) / cells as f64;
    let xs: Vec<f64> = (0..cells).map(|i| a + (i as f64 + 0.5) * h).collect();
    let kernel = |x: f64, y: f64| pdf((y + 0.5 * x) / 0.75f64.sqrt()) / 0.75f64.sqrt();
    let mut g = vec![1.0; cells];
    let mut ev = 0.0;
    for _ in 0..500 {
        let next: Vec<f64> = xs.iter().map(|&x| xs.iter().zip(&g).map(|(&y, &gy)| kernel(x, y) * gy * h).sum()).collect();
        let norm = next.iter().cloned().fold(0.0, f64::max);
        g = next.iter().map(|v| v / norm).collect();
        if (norm - ev).abs() < 1e-13 {
            break;
        }
        ev = norm;
    }
    ev
}

#[test]
fn transfer_rate_matches_decoupled_chain() {
    let p = profile(3, 0.0);
    for a in [-0.5, 0.0, 0.8] {
        let want = decoupled_rate(a);
        let got = transfer_rate(&p, a, TransferSpec::default()).unwrap();
        assert!((got - want).abs() < 1e-5, "alpha={a}: {got} vs {want}");
    }
}

#[test]
fn rate_curve_shape() {
    let p = profile(4, 1.0);
    let alphas: Vec<f64> = (0..9).map(|i| -8.0 + 1.5 * i as f64).collect();
    let curve = rate_curve(&p, &alphas, TransferSpec::default()).unwrap();
    assert!(curve.in_unit_interval());
    assert!(curve.is_strictly_decreasing());
    assert!(curve.r[0] > 0.999, "r(-8) = {}", curve.r[0]);
}

#[test]
fn threshold_is_bracketed_and_grid_stable() {
    for (d, lambda) in [(3, 0.0), (4, 1.0), (3, -2.0)] {
        let p = profile(d, lambda);
        let coarse = critical_threshold(&p, 1e-6, TransferSpec { m: 64, u_max_offset: 8.0 }).unwrap();
        let fine = critical_threshold(&p, 1e-6, TransferSpec { m: 128, u_max_offset: 8.0 }).unwrap();
        assert!((coarse.alpha_c - fine.alpha_c).abs() < 1e-4);
        assert!(coarse.within_bracket());
        assert!(coarse.haggstrom <= coarse.alpha_c && coarse.alpha_c <= coarse.expdec);
        assert!((coarse.rate_at_alpha_c - 1.0 / (d - 1) as f64).abs() < 1e-4);
    }
}

#[test]
fn analytic_thresholds_match_oracles() {
    for (d, lambda) in [(3, 0.0), (3, 2.0), (5, -1.0)] {
        let p = profile(d, lambda);
        let rho = p.phi(1).unwrap();
        let target = 2.0 / d as f64;
        let want = bisect(|a| pair_mass(rho, a) - target, -8.0, 8.0);
        assert!((haggstrom_alpha(&p).unwrap() - want).abs() < 1e-8);
    }
    // Phi = 3 at d = 3, lambda = 0.
    assert!((expdec_alpha(&build_profile(&SpectralPoint::new(3, 0.0).unwrap(), 200).unwrap()) - 12f64.sqrt()).abs() < 1e-9);
}
