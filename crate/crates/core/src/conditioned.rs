//! Paths conditioned to lie inside an `alpha`-level set.
//!
//! Under the conditioned law each coordinate's full conditional is a
//! lower-truncated Gaussian whose mean is a linear combination of the path
//! values at distance at most two, so a systematic-scan Gibbs sampler is
//! exact in its stationary law.

use crate::error::{invalid, Error, Result};
use crate::gaussian::{assemble_covariance, conditional, standard_truncated};
use crate::spectral::{repulsion_coefficients, CovarianceProfile};
use crate::tree::canonical_path;
use rand::Rng;

/// Agreement required between the closed-form and Schur-complement routes.
const PLAN_TOL: f64 = 1e-10;

/// Full conditional of one path coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanEntry {
    /// Zero-based path positions the conditional mean depends on.
    pub neighbors: Vec<usize>,
    pub coeffs: Vec<f64>,
    pub sigma2: f64,
}

impl PlanEntry {
    pub fn mean(&self, values: &[f64]) -> f64 {
        self.neighbors
            .iter()
            .zip(&self.coeffs)
            .map(|(&j, &c)| c * values[j])
            .sum()
    }

    pub fn coeff_of(&self, position: usize) -> f64 {
        self.neighbors
            .iter()
            .position(|&j| j == position)
            .map_or(0.0, |i| self.coeffs[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsPlan {
    d: usize,
    lambda: f64,
    entries: Vec<PlanEntry>,
}

impl GibbsPlan {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Entry for the zero-based position `k`.
    pub fn entry(&self, k: usize) -> &PlanEntry {
        &self.entries[k]
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }
}

/// Closed-form conditional-mean coefficients where they apply, as
/// `(position, coefficient)` pairs; `None` for very short paths.
fn closed_form_coeffs(profile: &CovarianceProfile, n: usize, k: usize) -> Option<Vec<(usize, f64)>> {
    let d = profile.d() as f64;
    let l = profile.lambda();
    let mirror = |pairs: Vec<(usize, f64)>| -> Vec<(usize, f64)> {
        pairs.into_iter().map(|(j, c)| (n - 1 - j, c)).collect()
    };
    let end = |_: ()| vec![(1, l / (d - 1.0)), (2, -1.0 / (d - 1.0))];
    let next_to_end = |_: ()| {
        let denom = l * l + (d - 1.0) * (d - 1.0);
        vec![
            (0, (d - 1.0) * l / denom),
            (2, d * l / denom),
            (3, -(d - 1.0) / denom),
        ]
    };
    if n >= 5 && k >= 2 && k + 2 < n {
        let c = repulsion_coefficients(profile.point());
        return Some(vec![
            (k - 2, -c.a2 / 2.0),
            (k - 1, c.a1 / 2.0),
            (k + 1, c.a1 / 2.0),
            (k + 2, -c.a2 / 2.0),
        ]);
    }
    if n >= 3 && k == 0 {
        return Some(end(()));
    }
    if n >= 3 && k == n - 1 {
        return Some(mirror(end(())));
    }
    if n >= 4 && k == 1 {
        return Some(next_to_end(()));
    }
    if n >= 4 && k == n - 2 {
        return Some(mirror(next_to_end(())));
    }
    None
}

/// Per-coordinate full conditionals for a path of `n` vertices, computed by
/// Gaussian conditioning on the path neighbors within distance two and
/// checked against the closed forms.
pub fn build_gibbs_plan(profile: &CovarianceProfile, n: usize) -> Result<GibbsPlan> {
    if n == 0 {
        return Err(invalid("path needs at least one vertex"));
    }
    let profile = profile.extended(4)?;
    let path = canonical_path(profile.d(), n)?;
    let mut entries = Vec::with_capacity(n);
    for k in 0..n {
        let lo = k.saturating_sub(2);
        let hi = (k + 2).min(n - 1);
        let window: Vec<usize> = (lo..=hi).collect();
        let cov = assemble_covariance(
            &profile,
            &window.iter().map(|&j| path[j].clone()).collect::<Vec<_>>(),
        )?;
        let local = |j: usize| j - lo;
        let neighbors: Vec<usize> = window.iter().copied().filter(|&j| j != k).collect();
        let given: Vec<usize> = neighbors.iter().map(|&j| local(j)).collect();
        let (coeffs, sigma2) = if given.is_empty() {
            (Vec::new(), 1.0)
        } else {
            let cg = conditional(&cov, &given, &[local(k)])?;
            let coeffs: Vec<f64> = (0..given.len()).map(|i| cg.coeff()[(0, i)]).collect();
            (coeffs, cg.residual()[(0, 0)])
        };
        if !(sigma2 > 0.0) {
            return Err(Error::Inconsistent(format!(
                "conditional variance {sigma2} at position {k} is not positive"
            )));
        }
        let entry = PlanEntry {
            neighbors,
            coeffs,
            sigma2,
        };
        if let Some(closed) = closed_form_coeffs(&profile, n, k) {
            for (j, c) in closed {
                let got = entry.coeff_of(j);
                if (got - c).abs() > PLAN_TOL {
                    return Err(Error::Inconsistent(format!(
                        "position {k}: coefficient on {j} is {got}, closed form gives {c}"
                    )));
                }
            }
        }
        entries.push(entry);
    }
    Ok(GibbsPlan {
        d: profile.d(),
        lambda: profile.lambda(),
        entries,
    })
}

/// One retained Gibbs state; every coordinate exceeds `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedPathState {
    pub sweep: usize,
    pub alpha: f64,
    pub values: Vec<f64>,
}

impl ConditionedPathState {
    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// Systematic-scan Gibbs chain for the conditioned path law, optionally with
/// some coordinates held fixed.
#[derive(Debug, Clone)]
pub struct GibbsChain<'a> {
    plan: &'a GibbsPlan,
    alpha: f64,
    values: Vec<f64>,
    pinned: Vec<bool>,
    sweeps_done: usize,
}

impl<'a> GibbsChain<'a> {
    pub fn new(plan: &'a GibbsPlan, alpha: f64) -> Result<Self> {
        Self::with_pinned(plan, alpha, &[])
    }

    /// Chain with `pinned` `(position, value)` pairs held fixed; each value
    /// must exceed `alpha`.
    pub fn with_pinned(plan: &'a GibbsPlan, alpha: f64, pinned: &[(usize, f64)]) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(invalid("alpha must be finite"));
        }
        let start = alpha.max(0.0) + 1.0;
        let mut values = vec![start; plan.n()];
        let mut mask = vec![false; plan.n()];
        for &(k, v) in pinned {
            if k >= plan.n() {
                return Err(invalid(format!("pinned position {k} outside the path")));
            }
            if !(v > alpha) {
                return Err(invalid(format!("pinned value {v} is not above alpha = {alpha}")));
            }
            values[k] = v;
            mask[k] = true;
        }
        Ok(Self {
            plan,
            alpha,
            values,
            pinned: mask,
            sweeps_done: 0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        for k in 0..self.plan.n() {
            if self.pinned[k] {
                continue;
            }
            let e = &self.plan.entries[k];
            let mean = e.mean(&self.values);
            let sd = e.sigma2.sqrt();
            let x = mean + sd * standard_truncated((self.alpha - mean) / sd, rng);
            if !x.is_finite() {
                return Err(Error::Numerical(format!(
                    "Gibbs update at position {k} produced {x} (mean {mean})"
                )));
            }
            // Rounding in mean + sd * z can land exactly on alpha.
            self.values[k] = if x > self.alpha { x } else { self.alpha.next_up() };
        }
        self.sweeps_done += 1;
        Ok(())
    }
}

/// Runs `sweeps` systematic scans and keeps every `thin`-th state after
/// `burnin` sweeps.
pub fn gibbs_run<R: Rng + ?Sized>(
    plan: &GibbsPlan,
    alpha: f64,
    sweeps: usize,
    burnin: usize,
    thin: usize,
    rng: &mut R,
) -> Result<Vec<ConditionedPathState>> {
    gibbs_run_pinned(plan, alpha, &[], sweeps, burnin, thin, rng)
}

pub fn gibbs_run_pinned<R: Rng + ?Sized>(
    plan: &GibbsPlan,
    alpha: f64,
    pinned: &[(usize, f64)],
    sweeps: usize,
    burnin: usize,
    thin: usize,
    rng: &mut R,
) -> Result<Vec<ConditionedPathState>> {
    if sweeps <= burnin {
        return Err(invalid(format!("sweeps ({sweeps}) must exceed burn-in ({burnin})")));
    }
    if thin == 0 {
        return Err(invalid("thinning interval must be at least 1"));
    }
    let mut chain = GibbsChain::with_pinned(plan, alpha, pinned)?;
    let mut states = Vec::with_capacity((sweeps - burnin) / thin + 1);
    for s in 1..=sweeps {
        chain.sweep(rng)?;
        if s > burnin && (s - burnin) % thin == 0 {
            states.push(ConditionedPathState {
                sweep: s,
                alpha,
                values: chain.values.clone(),
            });
        }
    }
    Ok(states)
}

/// Like [`gibbs_run_pinned`] but keeps only the listed zero-based
/// coordinates; `traces[c][t]` is coordinate `coords[c]` in retained state `t`.
#[allow(clippy::too_many_arguments)]
pub fn gibbs_trace<R: Rng + ?Sized>(
    plan: &GibbsPlan,
    alpha: f64,
    pinned: &[(usize, f64)],
    coords: &[usize],
    sweeps: usize,
    burnin: usize,
    thin: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if sweeps <= burnin {
        return Err(invalid(format!("sweeps ({sweeps}) must exceed burn-in ({burnin})")));
    }
    if thin == 0 {
        return Err(invalid("thinning interval must be at least 1"));
    }
    if let Some(&c) = coords.iter().find(|&&c| c >= plan.n()) {
        return Err(invalid(format!("coordinate {c} outside the path")));
    }
    let mut chain = GibbsChain::with_pinned(plan, alpha, pinned)?;
    let kept = (sweeps - burnin) / thin;
    let mut traces = vec![Vec::with_capacity(kept); coords.len()];
    for s in 1..=sweeps {
        chain.sweep(rng)?;
        if s > burnin && (s - burnin) % thin == 0 {
            for (t, &c) in traces.iter_mut().zip(coords) {
                t.push(chain.values[c]);
            }
        }
    }
    Ok(traces)
}

/// Mean and batch-means standard error of a correlated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Effective sample size implied by the batch-means variance.
    pub ess: f64,
}

const BATCHES: usize = 50;

pub fn batch_means(series: &[f64]) -> BatchEstimate {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n.max(1) as f64;
    if n < 2 * BATCHES {
        let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        return BatchEstimate {
            mean,
            stderr: (var / n.max(1) as f64).sqrt(),
            ess: n as f64,
        };
    }
    let size = n / BATCHES;
    let used = size * BATCHES;
    let batch: Vec<f64> = series[..used]
        .chunks(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let bmean = batch.iter().sum::<f64>() / BATCHES as f64;
    let bvar = batch.iter().map(|b| (b - bmean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let stderr = (bvar / BATCHES as f64).sqrt();
    let ess = if bvar > 0.0 {
        (n as f64 * var / (size as f64 * bvar)).clamp(1.0, n as f64)
    } else {
        n as f64
    };
    BatchEstimate { mean, stderr, ess }
}

/// Batch-means estimate of the mean of coordinate `k` (zero-based).
pub fn coordinate_mean(states: &[ConditionedPathState], k: usize) -> BatchEstimate {
    let series: Vec<f64> = states.iter().map(|s| s.values[k]).collect();
    batch_means(&series)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub x: f64,
    pub probability: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepulsionTail {
    pub points: Vec<TailPoint>,
    /// Effective sample size of the coordinate itself.
    pub ess: f64,
}

/// Empirical `P(psi(v_k) >= x)` over the retained states, with batch-means
/// standard errors (`k` is one-based, as a path position).
pub fn repulsion_tail(
    states: &[ConditionedPathState],
    k: usize,
    x_grid: &[f64],
) -> Result<RepulsionTail> {
    if states.is_empty() {
        return Err(invalid("no states to summarize"));
    }
    let n = states[0].values.len();
    if k == 0 || k > n {
        return Err(invalid(format!("position {k} outside 1..={n}")));
    }
    let series: Vec<f64> = states.iter().map(|s| s.values[k - 1]).collect();
    Ok(tail_of_series(&series, x_grid))
}

/// Empirical `P(X >= x)` along one coordinate trace, with errors as in
/// [`repulsion_tail`].
pub fn tail_of_series(series: &[f64], x_grid: &[f64]) -> RepulsionTail {
    let ess = batch_means(series).ess;
    let points = x_grid
        .iter()
        .map(|&x| {
            let ind: Vec<f64> = series
                .iter()
                .map(|&v| if v >= x { 1.0 } else { 0.0 })
                .collect();
            let b = batch_means(&ind);
            // Never report less than the binomial error at the effective size.
            let binom = (b.mean * (1.0 - b.mean) / ess).sqrt();
            TailPoint {
                x,
                probability: b.mean,
                stderr: b.stderr.max(binom),
            }
        })
        .collect();
    RepulsionTail { points, ess }
}

/// Weighted least-squares slope of `ln p` against `x^2` over the points with
/// `x` in `[lo, hi]` and positive probability; returns `(slope, stderr)`.
pub fn gaussian_tail_slope(points: &[TailPoint], lo: f64, hi: f64) -> Result<(f64, f64)> {
    let used: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|p| p.x >= lo && p.x <= hi && p.probability > 0.0 && p.stderr > 0.0)
        .map(|p| {
            let y = p.probability.ln();
            let sd = p.stderr / p.probability;
            (p.x * p.x, y, 1.0 / (sd * sd))
        })
        .collect();
    if used.len() < 3 {
        return Err(invalid("tail fit needs at least three usable points"));
    }
    let sw: f64 = used.iter().map(|u| u.2).sum();
    let mx = used.iter().map(|u| u.2 * u.0).sum::<f64>() / sw;
    let my = used.iter().map(|u| u.2 * u.1).sum::<f64>() / sw;
    let sxx: f64 = used.iter().map(|u| u.2 * (u.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|u| u.2 * (u.0 - mx) * (u.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, (1.0 / sxx).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::TruncatedGaussian;
    use crate::spectral::{build_profile, SpectralPoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn profile(d: usize, lambda: f64) -> CovarianceProfile {
        build_profile(&SpectralPoint::new(d, lambda).unwrap(), 8).unwrap()
    }

    #[test]
    fn bulk_plan_at_zero() {
        let plan = build_gibbs_plan(&profile(3, 0.0), 9).unwrap();
        let e = plan.entry(4);
        assert!((e.coeff_of(2) + 0.4).abs() < 1e-12);
        assert!((e.coeff_of(6) + 0.4).abs() < 1e-12);
        assert!(e.coeff_of(3).abs() < 1e-12 && e.coeff_of(5).abs() < 1e-12);
        assert!((e.sigma2 - 0.6).abs() < 1e-12);
        let first = plan.entry(0);
        assert!(first.coeff_of(1).abs() < 1e-12);
        assert!((first.coeff_of(2) + 0.5).abs() < 1e-12);
        assert!(plan.entries().iter().all(|e| e.sigma2 < 1.0 && e.sigma2 > 0.0));
    }

    #[test]
    fn plan_matches_closed_forms_on_grid() {
        for d in [3usize, 4, 5, 10] {
            for i in 0..=20 {
                let pt = SpectralPoint::at_edge_fraction(d, -1.0 + 0.1 * i as f64).unwrap();
                let p = build_profile(&pt, 8).unwrap();
                for n in [1, 2, 3, 4, 5, 8] {
                    let plan = build_gibbs_plan(&p, n).unwrap();
                    assert!(plan.entries().iter().all(|e| e.sigma2 > 0.0 && e.sigma2 < 1.0 + 1e-15));
                }
            }
        }
    }

    #[test]
    fn markov_window_equals_full_conditioning() {
        let p = build_profile(&SpectralPoint::new(4, 1.3).unwrap(), 12).unwrap();
        let n = 9;
        let plan = build_gibbs_plan(&p, n).unwrap();
        let cov = assemble_covariance(&p, &canonical_path(4, n).unwrap()).unwrap();
        for k in 0..n {
            let others: Vec<usize> = (0..n).filter(|&j| j != k).collect();
            let cg = conditional(&cov, &others, &[k]).unwrap();
            for (i, &j) in others.iter().enumerate() {
                assert!((cg.coeff()[(0, i)] - plan.entry(k).coeff_of(j)).abs() < 1e-9);
            }
            assert!((cg.residual()[(0, 0)] - plan.entry(k).sigma2).abs() < 1e-9);
        }
    }

    #[test]
    fn single_site_chain_is_truncated_normal() {
        let plan = build_gibbs_plan(&profile(3, 0.0), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let states = gibbs_run(&plan, 0.0, 200_001, 1, 1, &mut rng).unwrap();
        let est = coordinate_mean(&states, 0);
        assert!((est.mean - (2.0 / PI).sqrt()).abs() < 4.0 * est.stderr);
        assert!(states.iter().all(|s| s.values[0] > 0.0));
    }

    #[test]
    fn two_site_chain_at_zero_is_independent() {
        let plan = build_gibbs_plan(&profile(3, 0.0), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let states = gibbs_run(&plan, 0.0, 100_100, 100, 1, &mut rng).unwrap();
        let n = states.len() as f64;
        let (a, b): (Vec<f64>, Vec<f64>) = states.iter().map(|s| (s.values[0], s.values[1])).unzip();
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
        let vb = b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / n;
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() < 4.0 / n.sqrt(), "corr={corr}");
    }

    #[test]
    fn run_argument_checks() {
        let plan = build_gibbs_plan(&profile(3, 0.0), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(gibbs_run(&plan, 0.0, 10, 10, 1, &mut rng).is_err());
        assert!(gibbs_run(&plan, 0.0, 10, 0, 0, &mut rng).is_err());
        assert!(GibbsChain::with_pinned(&plan, 0.0, &[(0, -1.0)]).is_err());
        let states = gibbs_run(&plan, 0.5, 30, 10, 5, &mut rng).unwrap();
        assert_eq!(states.len(), 4);
        assert!(states.iter().all(|s| s.values.iter().all(|&v| v > 0.5)));
    }

    #[test]
    fn tail_below_alpha_is_one() {
        let plan = build_gibbs_plan(&profile(3, 0.0), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let states = gibbs_run(&plan, 0.0, 100_001, 1, 1, &mut rng).unwrap();
        let tail = repulsion_tail(&states, 1, &[-1.0, 0.0, 0.5, 1.0, 1.5]).unwrap();
        assert_eq!(tail.points[0].probability, 1.0);
        assert_eq!(tail.points[1].probability, 1.0);
        for p in &tail.points[2..] {
            let want = 2.0 * crate::normal::upper_tail(p.x);
            assert!((p.probability - want).abs() < 4.0 * p.stderr, "x={}", p.x);
        }
        assert!(repulsion_tail(&states, 2, &[0.0]).is_err());
        let _ = TruncatedGaussian::new(0.0, 1.0, 0.0).unwrap();
    }
}
