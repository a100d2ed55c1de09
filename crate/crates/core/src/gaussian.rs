//! Dense Gaussian machinery: covariance assembly, rank-aware factorization,
//! conditioning, lower-truncated normals and bivariate orthant probabilities.
//!
//! Covariances of the wave process on a ball are singular: every interior
//! vertex carries an exact linear constraint. Factorization and conditioning
//! therefore go through a clamped symmetric eigendecomposition rather than
//! Cholesky, with one shared relative tolerance.

use crate::error::{invalid, Error, Result};
use crate::normal;
use crate::quadrature;
use crate::spectral::CovarianceProfile;
use crate::tree::{distance_unchecked, VertexId};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOL: f64 = 1e-9;

/// Eigenvalues below this (absolute) mean the input is not a covariance.
pub const NEGATIVE_TOL: f64 = 1e-6;

/// Standardized truncation point beyond which the exponential-proposal
/// rejection sampler takes over from inversion.
const TAIL_SWITCH: f64 = 4.0;

/// Symmetric covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Wraps `m` after checking that it is square and symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid("covariance must be square"));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(invalid(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Principal submatrix on `idx` (rows and columns in the given order).
    pub fn select(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.0[(idx[i], idx[j])])
    }

    /// Numerical rank at the shared relative tolerance.
    pub fn rank(&self) -> usize {
        let eig = self.0.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        eig.eigenvalues
            .iter()
            .filter(|&&l| l > RANK_TOL * top)
            .count()
    }
}

/// Covariance of the wave process on `vertices`: entry `(m, l)` is
/// `phi(dist(v_m, v_l))`.
pub fn assemble_covariance(
    profile: &CovarianceProfile,
    vertices: &[VertexId],
) -> Result<CovarianceMatrix> {
    let d = profile.d();
    for v in vertices {
        v.validate(d)?;
    }
    let n = vertices.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = profile.phi(0)?;
        for j in 0..i {
            let c = profile.phi(distance_unchecked(&vertices[i], &vertices[j]))?;
            m[(i, j)] = c;
            m[(j, i)] = c;
        }
    }
    Ok(CovarianceMatrix(m))
}

/// `F` with `F F^T = C`, keeping only eigen-directions above tolerance.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    rank: usize,
    factor: DMatrix<f64>,
}

impl PsdFactor {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.factor.nrows()
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.factor * self.factor.transpose()
    }

    /// One draw of `N(0, C)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.rank, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.factor * z
    }
}

struct ClampedEigen {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    keep: Vec<usize>,
}

fn clamped_eigen(m: &DMatrix<f64>) -> Result<ClampedEigen> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigendecomposition produced NaN".into()));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -NEGATIVE_TOL {
        return Err(Error::NotPositiveSemidefinite(min));
    }
    let top = values.iter().cloned().fold(0.0, f64::max);
    let mut keep: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] > RANK_TOL * top)
        .collect();
    keep.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    Ok(ClampedEigen {
        values,
        vectors: eig.eigenvectors,
        keep,
    })
}

pub fn factor_psd(c: &CovarianceMatrix) -> Result<PsdFactor> {
    factor_psd_matrix(c.matrix())
}

pub(crate) fn factor_psd_matrix(m: &DMatrix<f64>) -> Result<PsdFactor> {
    let n = m.nrows();
    if n == 0 {
        return Ok(PsdFactor {
            rank: 0,
            factor: DMatrix::zeros(0, 0),
        });
    }
    let e = clamped_eigen(m)?;
    let factor = DMatrix::from_fn(n, e.keep.len(), |i, j| {
        let k = e.keep[j];
        e.vectors[(i, k)] * e.values[k].sqrt()
    });
    Ok(PsdFactor {
        rank: e.keep.len(),
        factor,
    })
}

/// Moore–Penrose pseudo-inverse with the shared eigenvalue cut.
pub(crate) fn pseudo_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let e = clamped_eigen(m)?;
    let mut inv = DMatrix::zeros(n, n);
    for &k in &e.keep {
        let v = e.vectors.column(k);
        inv += (v * v.transpose()) / e.values[k];
    }
    Ok(inv)
}

/// Law of a target block given a conditioning block:
/// mean `coeff * x_given`, covariance `residual`.
#[derive(Debug, Clone)]
pub struct ConditionalGaussian {
    coeff: DMatrix<f64>,
    residual: DMatrix<f64>,
    residual_factor: PsdFactor,
}

impl ConditionalGaussian {
    pub fn coeff(&self) -> &DMatrix<f64> {
        &self.coeff
    }

    pub fn residual(&self) -> &DMatrix<f64> {
        &self.residual
    }

    pub fn residual_rank(&self) -> usize {
        self.residual_factor.rank()
    }

    pub fn residual_factor(&self) -> &PsdFactor {
        &self.residual_factor
    }

    pub fn mean(&self, given: &[f64]) -> DVector<f64> {
        &self.coeff * DVector::from_column_slice(given)
    }

    /// Draws the target block given the conditioning values.
    pub fn sample<R: Rng + ?Sized>(&self, given: &[f64], rng: &mut R) -> DVector<f64> {
        self.mean(given) + self.residual_factor.sample(rng)
    }
}

/// Conditions `target` on `given` (index sets into `c`):
/// `coeff = C21 C11^+`, `residual = C22 - coeff C12`.
pub fn conditional(
    c: &CovarianceMatrix,
    given: &[usize],
    target: &[usize],
) -> Result<ConditionalGaussian> {
    if target.is_empty() {
        return Err(invalid("conditioning needs a non-empty target"));
    }
    let n = c.size();
    if given.iter().chain(target).any(|&i| i >= n) {
        return Err(invalid("conditioning index out of range"));
    }
    if given.iter().any(|g| target.contains(g)) {
        return Err(invalid("given and target sets overlap"));
    }
    let m = c.matrix();
    let c11 = c.select(given);
    let c21 = DMatrix::from_fn(target.len(), given.len(), |i, j| m[(target[i], given[j])]);
    let c22 = c.select(target);
    let coeff = &c21 * pseudo_inverse(&c11)?;
    let raw = c22 - &coeff * c21.transpose();
    let residual = (&raw + raw.transpose()) * 0.5;
    let residual_factor = factor_psd_matrix(&residual)?;
    Ok(ConditionalGaussian {
        coeff,
        residual,
        residual_factor,
    })
}

/// `N(mean, variance)` restricted to `(lower, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGaussian {
    mean: f64,
    variance: f64,
    lower: f64,
}

impl TruncatedGaussian {
    pub fn new(mean: f64, variance: f64, lower: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(invalid(format!("truncated normal variance {variance} must be positive")));
        }
        if !mean.is_finite() || lower.is_nan() {
            return Err(invalid("truncated normal parameters must be finite"));
        }
        Ok(Self {
            mean,
            variance,
            lower,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    fn standardized_lower(&self) -> f64 {
        (self.lower - self.mean) / self.variance.sqrt()
    }

    /// Mean of the truncated law.
    pub fn truncated_mean(&self) -> f64 {
        let a = self.standardized_lower();
        self.mean + self.variance.sqrt() * inverse_mills(a)
    }

    /// Variance of the truncated law.
    pub fn truncated_variance(&self) -> f64 {
        let a = self.standardized_lower();
        let h = inverse_mills(a);
        let a_h = if a.is_finite() { a * h } else { 0.0 };
        self.variance * (1.0 + a_h - h * h)
    }

    /// Probability mass of `(lower, inf)` under the untruncated law.
    pub fn mass(&self) -> f64 {
        normal::upper_tail(self.standardized_lower())
    }
}

/// `pdf(a) / Q(a)`, stable for large `a`.
fn inverse_mills(a: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return 0.0;
    }
    if a > 30.0 {
        // Asymptotic expansion; Q underflows long before this matters.
        let a2 = a * a;
        return a + 1.0 / a - 2.0 / (a * a2);
    }
    normal::pdf(a) / normal::upper_tail(a)
}

/// Exact draw from a lower-truncated normal.
pub fn sample_truncated<R: Rng + ?Sized>(t: &TruncatedGaussian, rng: &mut R) -> f64 {
    let sd = t.variance.sqrt();
    let a = t.standardized_lower();
    t.mean + sd * standard_truncated(a, rng)
}

/// Draw of `Z | Z > a` for a standard normal `Z`.
pub(crate) fn standard_truncated<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a <= TAIL_SWITCH {
        let mass = normal::upper_tail(a);
        loop {
            let u = 1.0 - rng.random::<f64>();
            let z = normal::upper_quantile(mass * u);
            if z > a && z.is_finite() {
                return z;
            }
        }
    }
    // Exponential proposal with the acceptance-optimal rate.
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let u = 1.0 - rng.random::<f64>();
        let z = a - u.ln() / rate;
        let accept = (-0.5 * (z - rate) * (z - rate)).exp();
        if rng.random::<f64>() < accept && z > a {
            return z;
        }
    }
}

/// `P(X > alpha, Y > alpha)` for a standard bivariate normal with
/// correlation `rho`.
pub fn orthant_edge_probability(rho: f64, alpha: f64) -> Result<f64> {
    if !rho.is_finite() || rho.abs() > 1.0 + 1e-12 {
        return Err(invalid(format!("correlation {rho} outside [-1, 1]")));
    }
    if alpha.is_nan() {
        return Err(invalid("threshold is NaN"));
    }
    if rho >= 1.0 {
        return Ok(normal::upper_tail(alpha));
    }
    if rho <= -1.0 {
        // Y = -X: both exceed alpha iff alpha < X < -alpha.
        return Ok((normal::upper_tail(alpha) - normal::upper_tail(-alpha)).max(0.0));
    }
    let s = (1.0 - rho * rho).sqrt();
    let hi = alpha.max(0.0) + 12.0;
    let lo = alpha.max(-12.0);
    if lo >= hi {
        return Ok(0.0);
    }
    quadrature::integrate(
        |x| normal::pdf(x) * normal::upper_tail((alpha - rho * x) / s),
        lo,
        hi,
        1e-12,
    )
}
