//! Exact samplers of the wave process on balls and paths, and verifiers of
//! the identities every realization satisfies.

use crate::error::{invalid, Error, Result};
use crate::gaussian::{assemble_covariance, conditional, factor_psd, ConditionalGaussian, PsdFactor};
use crate::rng::map_streams;
use crate::spectral::CovarianceProfile;
use crate::tree::{enumerate_ball, Ball, VertexId};
use rand::Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

/// Which sampler produced a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Dense,
    Recursive,
}

impl SamplerKind {
    pub fn id(&self) -> &'static str {
        match self {
            SamplerKind::Dense => "dense",
            SamplerKind::Recursive => "recursive",
        }
    }
}

/// One realization restricted to a ball.
#[derive(Debug, Clone)]
pub struct BallSample {
    ball: Arc<Ball>,
    profile: Arc<CovarianceProfile>,
    values: Vec<f64>,
}

impl BallSample {
    /// Wraps externally produced values (one per ball vertex, BFS order).
    pub fn new(ball: Arc<Ball>, profile: Arc<CovarianceProfile>, values: Vec<f64>) -> Result<Self> {
        if values.len() != ball.len() {
            return Err(invalid(format!(
                "{} values for a ball of {} vertices",
                values.len(),
                ball.len()
            )));
        }
        if profile.d() != ball.d() {
            return Err(invalid("profile and ball disagree on the degree"));
        }
        Ok(Self {
            ball,
            profile,
            values,
        })
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn profile(&self) -> &CovarianceProfile {
        &self.profile
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value(&self, v: &VertexId) -> Option<f64> {
        self.ball.position(v).map(|i| self.values[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Allowed eigen-residual for this realization: `1e-8 (1 + max |value|)`.
    pub fn eigen_tolerance(&self) -> f64 {
        1e-8 * (1.0 + self.max_abs())
    }

    /// Allowed sphere-sum residual: the eigen tolerance times the size of
    /// the outer sphere.
    pub fn sphere_tolerance(&self) -> f64 {
        let r = self.ball.radius();
        self.eigen_tolerance() * self.ball.sphere(r).len() as f64
    }
}

/// One realization along the canonical path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    values: Vec<f64>,
}

impl PathSample {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn ball_profile(profile: &CovarianceProfile, r: usize) -> Result<Arc<CovarianceProfile>> {
    Ok(Arc::new(profile.extended((2 * r).max(2))?))
}

/// Ground-truth sampler: spectral factor of the full ball covariance.
#[derive(Debug, Clone)]
pub struct DenseBallSampler {
    ball: Arc<Ball>,
    profile: Arc<CovarianceProfile>,
    factor: PsdFactor,
}

impl DenseBallSampler {
    pub fn new(profile: &CovarianceProfile, r: usize) -> Result<Self> {
        let ball = Arc::new(enumerate_ball(profile.d(), r)?);
        let profile = ball_profile(profile, r)?;
        let cov = assemble_covariance(&profile, ball.vertices())?;
        let factor = factor_psd(&cov)?;
        Ok(Self {
            ball,
            profile,
            factor,
        })
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    pub fn rank(&self) -> usize {
        self.factor.rank()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BallSample {
        let values = self.factor.sample(rng).iter().copied().collect();
        BallSample {
            ball: self.ball.clone(),
            profile: self.profile.clone(),
            values,
        }
    }
}

/// Linear-cost sampler: root, then the first shell given the root, then each
/// vertex's outward children given the vertex and its parent.
#[derive(Debug, Clone)]
pub struct RecursiveBallSampler {
    ball: Arc<Ball>,
    profile: Arc<CovarianceProfile>,
    first_shell: ConditionalGaussian,
    children: ConditionalGaussian,
}

impl RecursiveBallSampler {
    pub fn new(profile: &CovarianceProfile, r: usize) -> Result<Self> {
        let d = profile.d();
        let ball = Arc::new(enumerate_ball(d, r)?);
        let profile = ball_profile(profile, r)?;

        let root = VertexId::root();
        let mut shell = vec![root.clone()];
        shell.extend((0..d as u32).map(|c| root.child(c)));
        let cov = assemble_covariance(&profile, &shell)?;
        let first_shell = conditional(&cov, &[0], &(1..=d).collect::<Vec<_>>())?;

        // Block shape is the same at every depth.
        let v = root.child(0);
        let mut block = vec![v.clone(), root];
        block.extend((0..(d - 1) as u32).map(|c| v.child(c)));
        let cov = assemble_covariance(&profile, &block)?;
        let children = conditional(&cov, &[0, 1], &(2..=d).collect::<Vec<_>>())?;

        Ok(Self {
            ball,
            profile,
            first_shell,
            children,
        })
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    /// Conditional law of the `d` first-shell values given the root.
    pub fn first_shell_block(&self) -> &ConditionalGaussian {
        &self.first_shell
    }

    /// Conditional law of the `d - 1` outward children given `(vertex, parent)`.
    pub fn children_block(&self) -> &ConditionalGaussian {
        &self.children
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BallSample {
        let ball = &self.ball;
        let mut values = vec![0.0; ball.len()];
        values[0] = rng.sample(StandardNormal);
        if ball.radius() >= 1 {
            let shell = self.first_shell.sample(&[values[0]], rng);
            for (slot, v) in ball.children(0).zip(shell.iter()) {
                values[slot] = *v;
            }
        }
        for i in 1..ball.interior().end {
            let parent = ball.parent(i).expect("non-root vertex has a parent");
            let block = self.children.sample(&[values[i], values[parent]], rng);
            for (slot, v) in ball.children(i).zip(block.iter()) {
                values[slot] = *v;
            }
        }
        BallSample {
            ball: self.ball.clone(),
            profile: self.profile.clone(),
            values,
        }
    }
}

pub fn sample_ball_dense<R: Rng + ?Sized>(
    profile: &CovarianceProfile,
    r: usize,
    rng: &mut R,
) -> Result<BallSample> {
    Ok(DenseBallSampler::new(profile, r)?.sample(rng))
}

pub fn sample_ball_recursive<R: Rng + ?Sized>(
    profile: &CovarianceProfile,
    r: usize,
    rng: &mut R,
) -> Result<BallSample> {
    Ok(RecursiveBallSampler::new(profile, r)?.sample(rng))
}

/// Either ball sampler behind one interface.
#[derive(Debug, Clone)]
pub enum BallSampler {
    Dense(DenseBallSampler),
    Recursive(RecursiveBallSampler),
}

impl BallSampler {
    pub fn new(kind: SamplerKind, profile: &CovarianceProfile, r: usize) -> Result<Self> {
        Ok(match kind {
            SamplerKind::Dense => BallSampler::Dense(DenseBallSampler::new(profile, r)?),
            SamplerKind::Recursive => BallSampler::Recursive(RecursiveBallSampler::new(profile, r)?),
        })
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            BallSampler::Dense(_) => SamplerKind::Dense,
            BallSampler::Recursive(_) => SamplerKind::Recursive,
        }
    }

    pub fn ball(&self) -> &Arc<Ball> {
        match self {
            BallSampler::Dense(s) => s.ball(),
            BallSampler::Recursive(s) => s.ball(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BallSample {
        match self {
            BallSampler::Dense(s) => s.sample(rng),
            BallSampler::Recursive(s) => s.sample(rng),
        }
    }

    /// `reps` independent realizations, replicate `i` on stream `(seed, i)`.
    pub fn sample_many(&self, reps: usize, seed: u64) -> Vec<BallSample> {
        map_streams(seed, reps, |_, rng| self.sample(rng))
    }
}

/// Coefficients of `psi(v_{k+1})` given `(psi(v_{k-1}), psi(v_k))` along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepKernel {
    /// Coefficient of `psi(v_{k-1})`.
    pub b1: f64,
    /// Coefficient of `psi(v_k)`.
    pub b2: f64,
    pub sigma2: f64,
}

impl StepKernel {
    pub fn mean(&self, prev: f64, cur: f64) -> f64 {
        self.b1 * prev + self.b2 * cur
    }
}

pub fn path_step_kernel(profile: &CovarianceProfile) -> Result<StepKernel> {
    let p1 = profile.phi(1)?;
    let p2 = profile.phi(2)?;
    let det = 1.0 - p1 * p1;
    if det <= 0.0 {
        return Err(Error::Inconsistent(format!(
            "|phi(1)| = {} leaves no room for a path step",
            p1.abs()
        )));
    }
    let b1 = (p2 - p1 * p1) / det;
    let b2 = p1 * (1.0 - p2) / det;
    let sigma2 = 1.0 - b1 * p2 - b2 * p1;
    if !(sigma2 > 0.0) {
        return Err(Error::Inconsistent(format!("path step variance {sigma2} is not positive")));
    }
    Ok(StepKernel { b1, b2, sigma2 })
}

/// Order-two Markov sampler along the canonical path.
#[derive(Debug, Clone, Copy)]
pub struct PathSampler {
    phi1: f64,
    kernel: StepKernel,
}

impl PathSampler {
    pub fn new(profile: &CovarianceProfile) -> Result<Self> {
        Ok(Self {
            phi1: profile.phi(1)?,
            kernel: path_step_kernel(profile)?,
        })
    }

    pub fn kernel(&self) -> &StepKernel {
        &self.kernel
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    /// Fills `out` with one realization of length `out.len()`.
    pub fn fill<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) {
        let n = out.len();
        if n == 0 {
            return;
        }
        out[0] = rng.sample(StandardNormal);
        if n >= 2 {
            let z: f64 = rng.sample(StandardNormal);
            out[1] = self.phi1 * out[0] + (1.0 - self.phi1 * self.phi1).sqrt() * z;
        }
        let sd = self.kernel.sigma2.sqrt();
        for k in 2..n {
            let z: f64 = rng.sample(StandardNormal);
            out[k] = self.kernel.mean(out[k - 2], out[k - 1]) + sd * z;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> PathSample {
        let mut values = vec![0.0; n];
        self.fill(&mut values, rng);
        PathSample { values }
    }
}

pub fn sample_path<R: Rng + ?Sized>(
    profile: &CovarianceProfile,
    n: usize,
    rng: &mut R,
) -> Result<PathSample> {
    if n == 0 {
        return Err(invalid("path needs at least one vertex"));
    }
    Ok(PathSampler::new(profile)?.sample(n, rng))
}

/// `max_k |S_k - |Lambda_k| phi(k) psi(root)|` over the spheres of the ball.
pub fn verify_sphere_sums(sample: &BallSample) -> f64 {
    let ball = sample.ball();
    let root = sample.values[0];
    (0..=ball.radius())
        .map(|k| {
            let range = ball.sphere(k);
            let size = range.len() as f64;
            let sum: f64 = sample.values[range].iter().sum();
            let phi = sample.profile.phi(k).expect("ball profile covers 2r");
            (sum - size * phi * root).abs()
        })
        .fold(0.0, f64::max)
}

/// `max |lambda psi(v) - sum_{u ~ v} psi(u)|` over interior vertices.
pub fn verify_eigen_residual(sample: &BallSample) -> f64 {
    let ball = sample.ball();
    let lambda = sample.profile.lambda();
    ball.interior()
        .map(|i| {
            let around: f64 = ball.neighbors(i).map(|j| sample.values[j]).sum();
            (lambda * sample.values[i] - around).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_profile, SpectralPoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn profile(d: usize, lambda: f64) -> CovarianceProfile {
        build_profile(&SpectralPoint::new(d, lambda).unwrap(), 8).unwrap()
    }

    #[test]
    fn step_kernel_examples() {
        let k = path_step_kernel(&profile(3, 0.0)).unwrap();
        assert!((k.b1 + 0.5).abs() < 1e-15);
        assert!(k.b2.abs() < 1e-15);
        assert!((k.sigma2 - 0.75).abs() < 1e-15);

        let p = profile(3, 2.0 * SQRT_2);
        let k = path_step_kernel(&p).unwrap();
        let cov = assemble_covariance(&p, &crate::tree::canonical_path(3, 3).unwrap()).unwrap();
        let cg = conditional(&cov, &[0, 1], &[2]).unwrap();
        assert!((cg.coeff()[(0, 0)] - k.b1).abs() < 1e-12);
        assert!((cg.coeff()[(0, 1)] - k.b2).abs() < 1e-12);
        assert!((cg.residual()[(0, 0)] - k.sigma2).abs() < 1e-12);
        assert!(k.sigma2 < 1.0);
    }

    #[test]
    fn step_variance_closed_form() {
        // sigma2 = (d-2)(d^2 - lambda^2) / (d (d-1)^2)
        for d in [3usize, 4, 5, 10] {
            for i in 0..=20 {
                let pt = SpectralPoint::at_edge_fraction(d, -1.0 + 0.1 * i as f64).unwrap();
                let k = path_step_kernel(&build_profile(&pt, 4).unwrap()).unwrap();
                let (df, l) = (d as f64, pt.lambda());
                let want = (df - 2.0) * (df * df - l * l) / (df * (df - 1.0) * (df - 1.0));
                assert!((k.sigma2 - want).abs() < 1e-12);
                assert!(k.sigma2 > 0.0 && k.sigma2 < 1.0);
            }
        }
    }

    #[test]
    fn radius_zero_is_single_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_ball_recursive(&profile(3, 0.0), 0, &mut rng).unwrap();
        assert_eq!(s.values().len(), 1);
        let s = sample_ball_dense(&profile(3, 0.0), 0, &mut rng).unwrap();
        assert_eq!(s.values().len(), 1);
    }

    #[test]
    fn recursive_children_sum_is_exact() {
        let sampler = RecursiveBallSampler::new(&profile(3, 0.0), 3).unwrap();
        let block = sampler.children_block();
        for row in 0..2 {
            assert!(block.coeff()[(row, 0)].abs() < 1e-14);
            assert!((block.coeff()[(row, 1)] + 0.5).abs() < 1e-14);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let s = sampler.sample(&mut rng);
            let ball = s.ball();
            for i in 1..ball.interior().end {
                let p = ball.parent(i).unwrap();
                let sum: f64 = ball.children(i).map(|c| s.values()[c]).sum();
                assert!((sum + s.values()[p]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wave_identities_hold_per_draw() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [SamplerKind::Dense, SamplerKind::Recursive] {
            let sampler = BallSampler::new(kind, &profile(3, 0.0), 2).unwrap();
            for _ in 0..50 {
                let s = sampler.sample(&mut rng);
                assert!(verify_eigen_residual(&s) <= s.eigen_tolerance());
                assert!(verify_sphere_sums(&s) <= s.sphere_tolerance());
                let root = s.values()[0];
                let s1: f64 = s.values()[s.ball().sphere(1)].iter().sum();
                let s2: f64 = s.values()[s.ball().sphere(2)].iter().sum();
                assert!(s1.abs() < 1e-10);
                assert!((s2 + 3.0 * root).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn detectors_fire_on_corruption() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = sample_ball_recursive(&profile(3, 0.7), 2, &mut rng).unwrap();
        let last = s.values().len() - 1;
        s.values_mut()[last] += 1.0;
        assert!(verify_sphere_sums(&s) >= 1.0 - s.sphere_tolerance());
        assert!(verify_eigen_residual(&s) >= 1.0 - s.eigen_tolerance());
    }

    #[test]
    fn null_model_is_detected() {
        let p = Arc::new(profile(3, 0.0));
        let ball = Arc::new(enumerate_ball(3, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut flagged = 0;
        for _ in 0..1000 {
            let values = (0..ball.len()).map(|_| rng.sample(StandardNormal)).collect();
            let s = BallSample::new(ball.clone(), p.clone(), values).unwrap();
            if verify_eigen_residual(&s) > 0.1 {
                flagged += 1;
            }
        }
        assert!(flagged >= 990);
    }

    #[test]
    fn path_rejects_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(sample_path(&profile(3, 0.0), 0, &mut rng).is_err());
        assert_eq!(sample_path(&profile(3, 0.0), 1, &mut rng).unwrap().n(), 1);
    }
}
