use treewave::sampler::{verify_eigen_residual, verify_sphere_sums, BallSampler, PathSampler, SamplerKind};
use treewave::spectral::build_profile;
use treewave::{rng, SpectralPoint};

/// Empirical covariance of coordinates `i` and `j` across draws.
fn empirical_cov(draws: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let n = draws.len() as f64;
    let mi = draws.iter().map(|x| x[i]).sum::<f64>() / n;
    let mj = draws.iter().map(|x| x[j]).sum::<f64>() / n;
    draws.iter().map(|x| (x[i] - mi) * (x[j] - mj)).sum::<f64>() / n
}

#[test]
fn path_covariance_matches_profile() {
    for (d, lambda) in [(3, 0.0), (4, 1.0), (3, -2.5)] {
        let p = build_profile(&SpectralPoint::new(d, lambda).unwrap(), 12).unwrap();
        let sampler = PathSampler::new(&p).unwrap();
        let draws: Vec<Vec<f64>> = rng::map_streams(3, 40_000, |_, r| sampler.sample(8, r).into_values());
        let n = draws.len() as f64;
        for i in [0, 3, 7] {
            for j in 0..8 {
                let got = empirical_cov(&draws, i, j);
                let want = p.phi(i.abs_diff(j)).unwrap();
                // Var of a product of unit Gaussians is at most 2.
                assert!((got - want).abs() < 5.0 * (2.0 / n).sqrt(), "d={d} l={lambda} ({i},{j}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn ball_samples_satisfy_wave_identities() {
    for kind in [SamplerKind::Dense, SamplerKind::Recursive] {
        for (d, lambda) in [(3, 0.0), (3, 2.0 * 2f64.sqrt()), (5, -1.3)] {
            let p = build_profile(&SpectralPoint::new(d, lambda).unwrap(), 8).unwrap();
            let sampler = BallSampler::new(kind, &p, 3).unwrap();
            for s in sampler.sample_many(20, 9) {
                assert!(verify_eigen_residual(&s) <= s.eigen_tolerance());
                assert!(verify_sphere_sums(&s) <= s.sphere_tolerance());
            }
        }
    }
}

#[test]
fn dense_and_recursive_share_second_moments() {
    let p = build_profile(&SpectralPoint::new(3, 0.7).unwrap(), 8).unwrap();
    let mut results = Vec::new();
    for kind in [SamplerKind::Dense, SamplerKind::Recursive] {
        let sampler = BallSampler::new(kind, &p, 3).unwrap();
        let ball = sampler.ball().clone();
        let draws: Vec<Vec<f64>> = sampler.sample_many(30_000, 21).into_iter().map(|s| s.values().to_vec()).collect();
        let n = draws.len() as f64;
        // Pairs at distances 0..=6 across the ball.
        let last = ball.len() - 1;
        let first_leaf = ball.sphere(3).start;
        for (i, j) in [(0, 0), (0, 1), (0, 5), (0, last), (1, 2), (first_leaf, last), (1, last)] {
            let dist = treewave::tree::distance(3, ball.vertex(i), ball.vertex(j)).unwrap();
            let got = empirical_cov(&draws, i, j);
            let want = p.phi(dist).unwrap();
            assert!((got - want).abs() < 5.0 * (2.0 / n).sqrt(), "{} ({i},{j}) dist {dist}: {got} vs {want}", kind.id());
        }
        results.push(draws.iter().map(|x| x[0] * x[last]).sum::<f64>() / n);
    }
    assert!((results[0] - results[1]).abs() < 5.0 * (4.0 / 30_000.0f64).sqrt());
}

#[test]
fn same_seed_same_sample() {
    let p = build_profile(&SpectralPoint::new(4, 0.5).unwrap(), 6).unwrap();
    let sampler = BallSampler::new(SamplerKind::Recursive, &p, 3).unwrap();
    let a = sampler.sample_many(5, 77);
    let b = sampler.sample_many(5, 77);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.values(), y.values());
    }
}
