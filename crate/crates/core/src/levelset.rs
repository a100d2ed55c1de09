//! Level sets of realizations and the survival of long paths inside them.
//!
//! `P^(n)` is the probability that a fixed path of `n` vertices lies above
//! `alpha`. Its exponential rate `r(alpha)` is the leading eigenvalue of the
//! survival transfer operator on consecutive value pairs, and the critical
//! threshold is where `r(alpha) = 1 / (d - 1)`.

use crate::error::{invalid, Error, Result};
use crate::gaussian::orthant_edge_probability;
use crate::normal;
use crate::quadrature::gauss_legendre_on;
use crate::rng::{map_chunks, map_indices, map_streams, StreamRng};
use crate::sampler::{BallSample, PathSampler};
use crate::spectral::CovarianceProfile;
use rand::Rng;
use rand_distr::StandardNormal;

// ---------------------------------------------------------------------------
// Components
// ---------------------------------------------------------------------------

/// One connected component of `{v : value(v) > alpha}` inside a ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub size: usize,
    pub contains_root: bool,
    /// Largest depth (distance from the root) of a member vertex.
    pub depth_reach: usize,
    /// Whether the component reaches the outer sphere, so may continue
    /// beyond the ball.
    pub touches_boundary: bool,
}

/// Components ordered by decreasing size, ties by first vertex in BFS order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSummary {
    pub alpha: f64,
    pub components: Vec<Component>,
}

impl ComponentSummary {
    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.size).collect()
    }

    pub fn total(&self) -> usize {
        self.components.iter().map(|c| c.size).sum()
    }

    pub fn root_component(&self) -> Option<&Component> {
        self.components.iter().find(|c| c.contains_root)
    }

    pub fn root_size(&self) -> usize {
        self.root_component().map_or(0, |c| c.size)
    }

    pub fn root_depth_reach(&self) -> Option<usize> {
        self.root_component().map(|c| c.depth_reach)
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

pub fn extract_components(sample: &BallSample, alpha: f64) -> ComponentSummary {
    let ball = sample.ball();
    let values = sample.values();
    let above: Vec<bool> = values.iter().map(|&v| v > alpha).collect();
    let mut sets = DisjointSets::new(ball.len());
    for (u, v) in ball.edges() {
        if above[u] && above[v] {
            sets.union(u, v);
        }
    }
    let outer = ball.sphere(ball.radius());
    // Indexed by representative; BFS order fixes first appearance.
    let mut slot = vec![usize::MAX; ball.len()];
    let mut components: Vec<Component> = Vec::new();
    for i in 0..ball.len() {
        if !above[i] {
            continue;
        }
        let rep = sets.find(i);
        if slot[rep] == usize::MAX {
            slot[rep] = components.len();
            components.push(Component {
                size: 0,
                contains_root: false,
                depth_reach: 0,
                touches_boundary: false,
            });
        }
        let c = &mut components[slot[rep]];
        c.size += 1;
        c.contains_root |= i == 0;
        c.depth_reach = c.depth_reach.max(ball.vertex(i).depth());
        c.touches_boundary |= outer.contains(&i);
    }
    // Stable sort keeps BFS order among equal sizes.
    components.sort_by(|a, b| b.size.cmp(&a.size));
    ComponentSummary {
        alpha,
        components,
    }
}

// ---------------------------------------------------------------------------
// Survival estimates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivalMethod {
    Direct,
    Smc,
}

impl SurvivalMethod {
    pub fn id(&self) -> &'static str {
        match self {
            SurvivalMethod::Direct => "direct",
            SurvivalMethod::Smc => "smc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalEstimate {
    pub n: usize,
    pub alpha: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub method: SurvivalMethod,
    /// Some particle system died out; its contribution is zero.
    pub collapsed: bool,
}

impl SurvivalEstimate {
    pub fn relative_stderr(&self) -> f64 {
        if self.p_hat > 0.0 {
            self.stderr / self.p_hat
        } else {
            f64::INFINITY
        }
    }
}

/// `sqrt(a^2 + b^2)`, the error scale for comparing two independent estimates.
pub fn combined_stderr(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

const DIRECT_CHUNK: usize = 1 << 14;

/// Fraction of `reps` exact path draws lying entirely above `alpha`.
pub fn survival_direct(
    profile: &CovarianceProfile,
    n: usize,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<SurvivalEstimate> {
    if n == 0 {
        return Err(invalid("path needs at least one vertex"));
    }
    if reps == 0 {
        return Err(invalid("need at least one replicate"));
    }
    check_alpha(alpha)?;
    let sampler = PathSampler::new(profile)?;
    let hits: usize = map_chunks(seed, reps, DIRECT_CHUNK, |len, rng| {
        let mut buf = vec![0.0; n];
        (0..len)
            .filter(|_| {
                sampler.fill(&mut buf, rng);
                buf.iter().all(|&v| v > alpha)
            })
            .count()
    })
    .into_iter()
    .sum();
    let p = hits as f64 / reps as f64;
    Ok(SurvivalEstimate {
        n,
        alpha,
        p_hat: p,
        stderr: (p * (1.0 - p) / reps as f64).sqrt(),
        method: SurvivalMethod::Direct,
        collapsed: false,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("alpha must be finite, got {alpha}")))
    }
}

/// Particle count and number of independent particle systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmcConfig {
    pub particles: usize,
    /// Independent systems; their spread gives the standard error.
    pub replicates: usize,
}

impl Default for SmcConfig {
    fn default() -> Self {
        Self {
            particles: 20_000,
            replicates: 8,
        }
    }
}

impl SmcConfig {
    pub fn new(particles: usize, replicates: usize) -> Result<Self> {
        if particles < 100 {
            return Err(invalid(format!("need at least 100 particles, got {particles}")));
        }
        if replicates < 2 {
            return Err(invalid(format!("need at least 2 replicates, got {replicates}")));
        }
        Ok(Self {
            particles,
            replicates,
        })
    }
}

/// SMC estimates of `P^(k)` for every `k = 1..=n` from shared particle
/// systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub alpha: f64,
    /// `replicates[r][k - 1]` is system `r`'s estimate of `P^(k)`.
    pub replicates: Vec<Vec<f64>>,
    pub collapsed: bool,
}

fn mean_and_stderr(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = xs.collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SurvivalCurve {
    pub fn n(&self) -> usize {
        self.replicates[0].len()
    }

    pub fn estimate(&self, k: usize) -> Result<SurvivalEstimate> {
        if k == 0 || k > self.n() {
            return Err(invalid(format!("path length {k} outside 1..={}", self.n())));
        }
        let (p, se) = mean_and_stderr(self.replicates.iter().map(|r| r[k - 1]));
        Ok(SurvivalEstimate {
            n: k,
            alpha: self.alpha,
            p_hat: p,
            stderr: se,
            method: SurvivalMethod::Smc,
            collapsed: self.collapsed,
        })
    }

    pub fn p_hat(&self) -> Vec<f64> {
        (1..=self.n()).map(|k| self.estimate(k).map_or(0.0, |e| e.p_hat)).collect()
    }

    /// Least-squares slope of `ln P^(k)` against `k` over `lo..=hi`, with the
    /// standard error taken from the spread of per-system slopes.
    pub fn log_slope(&self, lo: usize, hi: usize) -> Result<(f64, f64)> {
        if lo == 0 || hi > self.n() || hi < lo + 2 {
            return Err(invalid(format!("slope window {lo}..={hi} unusable for n = {}", self.n())));
        }
        let ks: Vec<f64> = (lo..=hi).map(|k| k as f64).collect();
        let fit = |ps: &[f64]| -> Option<f64> {
            let ys: Option<Vec<f64>> = (lo..=hi)
                .map(|k| (ps[k - 1] > 0.0).then(|| ps[k - 1].ln()))
                .collect();
            ys.map(|ys| ols_slope(&ks, &ys))
        };
        let slope = fit(&self.p_hat()).ok_or_else(|| {
            Error::Numerical("survival estimate is zero inside the slope window".into())
        })?;
        let per: Vec<f64> = self.replicates.iter().filter_map(|r| fit(r)).collect();
        let (_, se) = mean_and_stderr(per.into_iter());
        Ok((slope, se))
    }
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Particle pairs `(psi(v_{k-1}), psi(v_k))`.
struct Particles {
    prev: Vec<f64>,
    cur: Vec<f64>,
    scratch_prev: Vec<f64>,
    scratch_cur: Vec<f64>,
    alive: Vec<usize>,
}

impl Particles {
    fn new(count: usize) -> Self {
        Self {
            prev: vec![0.0; count],
            cur: vec![0.0; count],
            scratch_prev: vec![0.0; count],
            scratch_cur: vec![0.0; count],
            alive: Vec::with_capacity(count),
        }
    }

    /// Resamples uniformly among particles with `cur > alpha`; returns the
    /// surviving fraction.
    fn select(&mut self, alpha: f64, rng: &mut StreamRng) -> f64 {
        let count = self.cur.len();
        self.alive.clear();
        self.alive.extend((0..count).filter(|&i| self.cur[i] > alpha));
        let frac = self.alive.len() as f64 / count as f64;
        if self.alive.is_empty() || self.alive.len() == count {
            return frac;
        }
        for i in 0..count {
            let j = self.alive[rng.random_range(0..self.alive.len())];
            self.scratch_prev[i] = self.prev[j];
            self.scratch_cur[i] = self.cur[j];
        }
        std::mem::swap(&mut self.prev, &mut self.scratch_prev);
        std::mem::swap(&mut self.cur, &mut self.scratch_cur);
        frac
    }
}

/// One particle system; returns the running product of surviving fractions
/// for `k = 1..=n` (entries before `first` are 1) and whether it collapsed.
fn smc_system(
    sampler: &PathSampler,
    n: usize,
    alpha: f64,
    particles: usize,
    start: Option<(f64, f64)>,
    rng: &mut StreamRng,
) -> (Vec<f64>, bool) {
    let mut out = vec![0.0; n];
    let mut ps = Particles::new(particles);
    let mut prod = 1.0;
    let first = match start {
        Some((x1, x2)) => {
            ps.prev.fill(x1);
            ps.cur.fill(x2);
            for o in out.iter_mut().take(2) {
                *o = 1.0;
            }
            3
        }
        None => 1,
    };
    let k_phi = sampler.phi1();
    let kernel = *sampler.kernel();
    let step_sd = kernel.sigma2.sqrt();
    let pair_sd = (1.0 - k_phi * k_phi).sqrt();
    for k in first..=n {
        for i in 0..particles {
            let z: f64 = rng.sample(StandardNormal);
            let next = match k {
                1 => z,
                2 => k_phi * ps.cur[i] + pair_sd * z,
                _ => kernel.mean(ps.prev[i], ps.cur[i]) + step_sd * z,
            };
            ps.prev[i] = ps.cur[i];
            ps.cur[i] = next;
        }
        let frac = ps.select(alpha, rng);
        prod *= frac;
        out[k - 1] = prod;
        if frac == 0.0 {
            return (out, true);
        }
    }
    (out, false)
}

fn smc_curve(
    profile: &CovarianceProfile,
    n: usize,
    alpha: f64,
    config: SmcConfig,
    start: Option<(f64, f64)>,
    seed: u64,
) -> Result<SurvivalCurve> {
    if n == 0 {
        return Err(invalid("path needs at least one vertex"));
    }
    check_alpha(alpha)?;
    let config = SmcConfig::new(config.particles, config.replicates)?;
    let sampler = PathSampler::new(profile)?;
    let runs = map_streams(seed, config.replicates, |_, rng| {
        smc_system(&sampler, n, alpha, config.particles, start, rng)
    });
    let collapsed = runs.iter().any(|r| r.1);
    Ok(SurvivalCurve {
        alpha,
        replicates: runs.into_iter().map(|r| r.0).collect(),
        collapsed,
    })
}

/// Sequential Monte Carlo estimates of `P^(k)`, `k = 1..=n`.
pub fn survival_smc_curve(
    profile: &CovarianceProfile,
    n: usize,
    alpha: f64,
    config: SmcConfig,
    seed: u64,
) -> Result<SurvivalCurve> {
    smc_curve(profile, n, alpha, config, None, seed)
}

pub fn survival_smc(
    profile: &CovarianceProfile,
    n: usize,
    alpha: f64,
    config: SmcConfig,
    seed: u64,
) -> Result<SurvivalEstimate> {
    survival_smc_curve(profile, n, alpha, config, seed)?.estimate(n)
}

/// SMC estimate of `F^(n)(x1, x2)`, the survival probability of the path
/// given its first two values.
pub fn conditioned_survival(
    profile: &CovarianceProfile,
    n: usize,
    alpha: f64,
    x1: f64,
    x2: f64,
    config: SmcConfig,
    seed: u64,
) -> Result<SurvivalEstimate> {
    check_alpha(alpha)?;
    if !(x1 > alpha && x2 > alpha) || !x1.is_finite() || !x2.is_finite() {
        return Err(invalid(format!(
            "starting pair ({x1}, {x2}) must lie above alpha = {alpha}"
        )));
    }
    if n <= 2 {
        return Ok(SurvivalEstimate {
            n,
            alpha,
            p_hat: 1.0,
            stderr: 0.0,
            method: SurvivalMethod::Smc,
            collapsed: false,
        });
    }
    smc_curve(profile, n, alpha, config, Some((x1, x2)), seed)?.estimate(n)
}

// ---------------------------------------------------------------------------
// Transfer operator
// ---------------------------------------------------------------------------

/// Quadrature used to discretize the transfer operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSpec {
    /// Gauss-Legendre nodes per coordinate.
    pub m: usize,
    /// Upper cut is `max(alpha, 0) + u_max_offset`.
    pub u_max_offset: f64,
}

impl Default for TransferSpec {
    fn default() -> Self {
        Self {
            m: 64,
            u_max_offset: 8.0,
        }
    }
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;

/// Nystrom discretization of `(Tg)(x, y) = int_alpha^u p(z | x, y) g(y, z) dz`.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    m: usize,
    nodes: Vec<f64>,
    /// `kernel[(i * m + j) * m + k] = w_k p(z_k | x_i, y_j)`.
    kernel: Vec<f64>,
}

impl TransferOperator {
    pub fn new(profile: &CovarianceProfile, alpha: f64, spec: TransferSpec) -> Result<Self> {
        check_alpha(alpha)?;
        if spec.m < 16 {
            return Err(invalid(format!("need at least 16 quadrature nodes, got {}", spec.m)));
        }
        if !(spec.u_max_offset > 0.0) {
            return Err(invalid("u_max offset must be positive"));
        }
        let step = PathSampler::new(profile)?;
        let kernel_coeffs = *step.kernel();
        let u_max = alpha.max(0.0) + spec.u_max_offset;
        if u_max <= alpha {
            return Err(invalid("empty quadrature domain"));
        }
        let m = spec.m;
        let (nodes, weights) = gauss_legendre_on(m, alpha, u_max);
        let mut kernel = vec![0.0; m * m * m];
        for i in 0..m {
            for j in 0..m {
                let mean = kernel_coeffs.mean(nodes[i], nodes[j]);
                let row = &mut kernel[(i * m + j) * m..(i * m + j + 1) * m];
                for k in 0..m {
                    row[k] = weights[k] * normal::density(nodes[k], mean, kernel_coeffs.sigma2);
                }
            }
        }
        Ok(Self { m, nodes, kernel })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn apply(&self, g: &[f64], out: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                let row = &self.kernel[(i * m + j) * m..(i * m + j + 1) * m];
                let gj = &g[j * m..(j + 1) * m];
                out[i * m + j] = row.iter().zip(gj).map(|(a, b)| a * b).sum();
            }
        }
    }

    /// Leading eigenvalue by power iteration.
    pub fn leading_eigenvalue(&self) -> Result<f64> {
        let size = self.m * self.m;
        let mut g = vec![1.0; size];
        let mut next = vec![0.0; size];
        let mut previous = f64::NAN;
        for _ in 0..POWER_MAX_ITER {
            self.apply(&g, &mut next);
            let norm = next.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Numerical(format!("power iteration norm {norm}")));
            }
            // g has unit max-norm, so the growth factor estimates the eigenvalue.
            let mut change = 0.0f64;
            for (a, b) in g.iter_mut().zip(&next) {
                let v = b / norm;
                change = change.max((v - *a).abs());
                *a = v;
            }
            // The eigenvalue alone can stall while the vector still rotates
            // between coordinates, so both must settle.
            if (norm - previous).abs() <= POWER_TOL * norm && change <= POWER_TOL {
                return Ok(norm);
            }
            previous = norm;
        }
        Err(Error::NoConvergence(POWER_MAX_ITER))
    }
}

/// `r(alpha) = lim (P^(n))^(1/n)` as the leading transfer eigenvalue.
pub fn transfer_rate(profile: &CovarianceProfile, alpha: f64, spec: TransferSpec) -> Result<f64> {
    TransferOperator::new(profile, alpha, spec)?.leading_eigenvalue()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub alphas: Vec<f64>,
    pub r: Vec<f64>,
    pub spec: TransferSpec,
}

impl RateCurve {
    pub fn is_strictly_decreasing(&self) -> bool {
        self.r.windows(2).all(|w| w[1] < w[0])
    }

    pub fn in_unit_interval(&self) -> bool {
        self.r.iter().all(|&r| r > 0.0 && r <= 1.0 + 1e-9)
    }
}

/// `transfer_rate` on a grid of thresholds, evaluated in parallel.
pub fn rate_curve(profile: &CovarianceProfile, alphas: &[f64], spec: TransferSpec) -> Result<RateCurve> {
    let r = map_indices(alphas.len(), |i| transfer_rate(profile, alphas[i], spec))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(RateCurve {
        alphas: alphas.to_vec(),
        r,
        spec,
    })
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo)?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Threshold below which a single edge survives with probability above
/// `2 / d`, which forces an infinite component.
pub fn haggstrom_alpha(profile: &CovarianceProfile) -> Result<f64> {
    let target = 2.0 / profile.d() as f64;
    let rho = profile.phi(1)?;
    let f = |a: f64| Ok(orthant_edge_probability(rho, a)? - target);
    let (lo, hi) = (-20.0, 20.0);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::BracketFailure {
            target,
            lo,
            hi,
            r_lo: f_lo + target,
            r_hi: f_hi + target,
        });
    }
    bisect(f, lo, hi, 1e-12)
}

/// `sqrt(2 (d - 1) Phi)`: above it every component is finite.
pub fn expdec_alpha(profile: &CovarianceProfile) -> f64 {
    (2.0 * (profile.d() - 1) as f64 * profile.big_phi()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub alpha_c: f64,
    pub tol: f64,
    pub haggstrom: f64,
    pub expdec: f64,
    /// `transfer_rate(alpha_c)`.
    pub rate_at_alpha_c: f64,
    pub target: f64,
    pub spec: TransferSpec,
}

impl ThresholdResult {
    pub fn within_bracket(&self) -> bool {
        self.haggstrom <= self.alpha_c && self.alpha_c <= self.expdec
    }
}

/// `alpha_c` with `transfer_rate(alpha_c) = 1 / (d - 1)`, by bisection on
/// `[haggstrom - 1, expdec + 1]`.
pub fn critical_threshold(
    profile: &CovarianceProfile,
    tol: f64,
    spec: TransferSpec,
) -> Result<ThresholdResult> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let target = 1.0 / (profile.d() - 1) as f64;
    let haggstrom = haggstrom_alpha(profile)?;
    let expdec = expdec_alpha(profile);
    let (lo, hi) = (haggstrom - 1.0, expdec + 1.0);
    let f = |a: f64| Ok(transfer_rate(profile, a, spec)? - target);
    let (r_lo, r_hi) = (f(lo)? + target, f(hi)? + target);
    if !(r_lo > target && r_hi < target) {
        return Err(Error::BracketFailure {
            target,
            lo,
            hi,
            r_lo,
            r_hi,
        });
    }
    let alpha_c = bisect(f, lo, hi, tol)?;
    Ok(ThresholdResult {
        alpha_c,
        tol,
        haggstrom,
        expdec,
        rate_at_alpha_c: transfer_rate(profile, alpha_c, spec)?,
        target,
        spec,
    })
}

// ---------------------------------------------------------------------------
// Quasi-Bernoulli ratios
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEntry {
    pub n: usize,
    pub m: usize,
    /// `P^(n+m) / (P^(n) P^(m))`.
    pub ratio: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub alpha: f64,
    pub entries: Vec<RatioEntry>,
    /// Smallest `M` with every ratio in `[1/M, M]`.
    pub m_point: f64,
    /// Same with every ratio moved three standard errors outward.
    pub m_upper: f64,
}

/// Path-splitting ratios `P^(n+m) / (P^(n) P^(m))` from one SMC curve.
pub fn survival_ratio_bounds(
    profile: &CovarianceProfile,
    alpha: f64,
    n_list: &[usize],
    m_list: &[usize],
    config: SmcConfig,
    seed: u64,
) -> Result<RatioReport> {
    if n_list.is_empty() || m_list.is_empty() || n_list.iter().chain(m_list).any(|&k| k == 0) {
        return Err(invalid("path lengths must be positive and non-empty"));
    }
    let max = n_list.iter().max().unwrap() + m_list.iter().max().unwrap();
    let curve = survival_smc_curve(profile, max, alpha, config, seed)?;
    let mean = curve.p_hat();
    let ratio_of = |p: &[f64], n: usize, m: usize| p[n + m - 1] / (p[n - 1] * p[m - 1]);
    let mut entries = Vec::new();
    for &n in n_list {
        for &m in m_list {
            let ratio = ratio_of(&mean, n, m);
            if !ratio.is_finite() || ratio <= 0.0 {
                return Err(Error::Numerical(format!(
                    "ratio for (n, m) = ({n}, {m}) is {ratio}; increase particles"
                )));
            }
            let per = curve
                .replicates
                .iter()
                .map(|r| ratio_of(r, n, m))
                .filter(|x| x.is_finite());
            let (_, stderr) = mean_and_stderr(per);
            entries.push(RatioEntry {
                n,
                m,
                ratio,
                stderr,
            });
        }
    }
    let spread = |e: &RatioEntry, k: f64| {
        let hi = e.ratio + k * e.stderr;
        let lo = e.ratio - k * e.stderr;
        let inv = if lo > 0.0 { 1.0 / lo } else { f64::INFINITY };
        hi.max(inv)
    };
    let m_point = entries.iter().map(|e| spread(e, 0.0)).fold(1.0, f64::max);
    let m_upper = entries.iter().map(|e| spread(e, 3.0)).fold(1.0, f64::max);
    Ok(RatioReport {
        alpha,
        entries,
        m_point,
        m_upper,
    })
}
