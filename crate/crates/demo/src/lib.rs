//! WebAssembly bindings behind the static page in `www/`.
//!
//! Every function takes plain numbers and returns flat `f64` arrays so the
//! page needs no generated glue beyond `wasm-bindgen`'s.

use treewave::levelset::{critical_threshold, extract_components, rate_curve, TransferSpec};
use treewave::rng::stream;
use treewave::sampler::RecursiveBallSampler;
use treewave::spectral::{build_profile, spectral_edge, CovarianceProfile, SpectralPoint};
use treewave::tree::enumerate_ball;
use wasm_bindgen::prelude::*;

/// Largest radius drawn by the page.
const MAX_RADIUS: usize = 7;

fn profile(d: usize, lambda: f64, n: usize) -> Result<CovarianceProfile, JsError> {
    let point = SpectralPoint::new(d, lambda).map_err(|e| JsError::new(&e.to_string()))?;
    build_profile(&point, n.max(2)).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn edge(d: usize) -> f64 {
    spectral_edge(d)
}

/// `phi(0..=n)`.
#[wasm_bindgen]
pub fn covariance_profile(d: usize, lambda: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let p = profile(d, lambda, n)?;
    Ok(p.values()[..=n].to_vec())
}

/// Interleaved `(alpha, r)` pairs on a uniform grid.
#[wasm_bindgen]
pub fn rate_curve_points(
    d: usize,
    lambda: f64,
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    let p = profile(d, lambda, 2)?;
    let steps = steps.max(2);
    let alphas: Vec<f64> = (0..steps)
        .map(|i| alpha_min + (alpha_max - alpha_min) * i as f64 / (steps - 1) as f64)
        .collect();
    let spec = TransferSpec { m: 32, u_max_offset: 8.0 };
    let curve = rate_curve(&p, &alphas, spec).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(alphas.iter().zip(&curve.r).flat_map(|(a, r)| [*a, *r]).collect())
}

/// `[alpha_c, lower bound, upper bound]`.
#[wasm_bindgen]
pub fn threshold(d: usize, lambda: f64) -> Result<Vec<f64>, JsError> {
    let p = profile(d, lambda, 2)?;
    let spec = TransferSpec { m: 32, u_max_offset: 8.0 };
    let t = critical_threshold(&p, 1e-3, spec).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(vec![t.alpha_c, t.haggstrom, t.expdec])
}

/// Parent index of each ball vertex in BFS order (the root points to itself).
#[wasm_bindgen]
pub fn ball_parents(d: usize, radius: usize) -> Result<Vec<u32>, JsError> {
    let ball = enumerate_ball(d, radius.min(MAX_RADIUS)).map_err(|e| JsError::new(&e.to_string()))?;
    Ok((0..ball.len()).map(|i| ball.parent(i).unwrap_or(0) as u32).collect())
}

/// One realization on the ball, then per vertex: value, depth and a flag
/// that is 1 when the vertex lies in the root's `alpha`-component. The
/// result is `3 * |ball|` numbers.
#[wasm_bindgen]
pub fn sample_ball(d: usize, lambda: f64, radius: usize, alpha: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    let radius = radius.min(MAX_RADIUS);
    let p = profile(d, lambda, 2 * radius)?;
    let sampler = RecursiveBallSampler::new(&p, radius).map_err(|e| JsError::new(&e.to_string()))?;
    let sample = sampler.sample(&mut stream(seed, 0));
    let ball = sample.ball();
    let values = sample.values();
    let root_in = values[0] > alpha;
    let mut in_root = vec![false; ball.len()];
    in_root[0] = root_in;
    for i in 1..ball.len() {
        let parent = ball.parent(i).unwrap_or(0);
        in_root[i] = in_root[parent] && values[i] > alpha;
    }
    let summary = extract_components(&sample, alpha);
    debug_assert_eq!(in_root.iter().filter(|&&b| b).count(), summary.root_size());
    Ok((0..ball.len())
        .flat_map(|i| {
            [
                values[i],
                ball.vertex(i).depth() as f64,
                if in_root[i] { 1.0 } else { 0.0 },
            ]
        })
        .collect())
}
