//! Closed-form spectral quantities of the adjacency operator on `T_d`.
//!
//! The spectrum is `[-2 sqrt(d-1), 2 sqrt(d-1)]` with the Kesten–McKay
//! density. For `lambda` in the spectrum the wave process has covariance
//! `phi(|u - v|)`, where
//!
//! ```text
//! phi(n) = (d-1)^(-n/2) * ((d-1)/d * U_n(x) - U_{n-2}(x)/d),   x = lambda / (2 sqrt(d-1))
//! ```
//!
//! with Chebyshev polynomials of the second kind extended to negative index
//! by the three-term recurrence (`U_{-1} = 0`, `U_{-2} = -1`).

use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;
use rand::Rng;
use std::f64::consts::PI;

/// Tolerance for lambda sitting exactly on a spectral edge after rounding.
const EDGE_SLACK: f64 = 1e-12;

/// Agreement required between the closed form and the wave recursion.
const ROUTE_TOL: f64 = 1e-10;

/// Truncation target for `Phi = phi(0) + 2 sum |phi(j)|`.
const BIG_PHI_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    d: usize,
}

impl TreeParams {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidDegree(d));
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Right end of the spectrum, `2 sqrt(d-1)`.
    pub fn spectral_edge(&self) -> f64 {
        spectral_edge(self.d)
    }
}

pub fn spectral_edge(d: usize) -> f64 {
    2.0 * ((d - 1) as f64).sqrt()
}

/// A degree together with a spectral parameter inside the closed spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    d: usize,
    lambda: f64,
}

impl SpectralPoint {
    pub fn new(d: usize, lambda: f64) -> Result<Self> {
        let params = TreeParams::new(d)?;
        let edge = params.spectral_edge();
        if !lambda.is_finite() || lambda.abs() > edge * (1.0 + EDGE_SLACK) {
            return Err(Error::OutOfSpectrum { lambda, edge });
        }
        Ok(Self {
            d,
            lambda: lambda.clamp(-edge, edge),
        })
    }

    /// The point at `fraction * edge`, `fraction` in `[-1, 1]`.
    pub fn at_edge_fraction(d: usize, fraction: f64) -> Result<Self> {
        TreeParams::new(d)?;
        Self::new(d, fraction * spectral_edge(d))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn edge(&self) -> f64 {
        spectral_edge(self.d)
    }

    /// Chebyshev argument `lambda / (2 sqrt(d-1))`, in `[-1, 1]`.
    pub fn chebyshev_arg(&self) -> f64 {
        (self.lambda / self.edge()).clamp(-1.0, 1.0)
    }
}

/// `U_n(x)` by the three-term recurrence, for `n >= -1`.
pub fn chebyshev_u(n: i64, x: f64) -> Result<f64> {
    if n < -1 {
        return Err(invalid(format!("Chebyshev index {n} is below -1")));
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    if n == -1 {
        return Ok(prev);
    }
    for _ in 0..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `U_{-1}(x), U_0(x), ..., U_{n}(x)`.
fn chebyshev_table(n: usize, x: f64) -> Vec<f64> {
    let mut u = Vec::with_capacity(n + 2);
    u.push(0.0);
    u.push(1.0);
    for k in 1..=n {
        let next = 2.0 * x * u[k] - u[k - 1];
        u.push(next);
    }
    u
}

/// Kesten–McKay density `rho(lambda)`.
pub fn spectral_density(point: &SpectralPoint) -> f64 {
    let d = point.d as f64;
    let l = point.lambda;
    let inside = (4.0 * (d - 1.0) - l * l).max(0.0);
    d / (2.0 * PI) * inside.sqrt() / (d * d - l * l)
}

/// Density of `theta` when `lambda = edge * cos(theta)`; smooth on `[0, pi]`.
fn angular_density(d: usize, theta: f64) -> f64 {
    let d = d as f64;
    let s = theta.sin();
    let c = theta.cos();
    d / (2.0 * PI) * 4.0 * (d - 1.0) * s * s / (d * d - 4.0 * (d - 1.0) * c * c)
}

/// Tabulated inverse CDF of the spectral density.
///
/// Nodes are spaced uniformly in `theta` (so they cluster at the edges, where
/// the density vanishes) and the inverse is a monotone piecewise cubic.
#[derive(Debug, Clone)]
pub struct LambdaSampler {
    cdf: Vec<f64>,
    lambda: Vec<f64>,
    slope: Vec<f64>,
}

impl LambdaSampler {
    pub const DEFAULT_NODES: usize = 4096;

    pub fn new(d: usize) -> Result<Self> {
        Self::with_nodes(d, Self::DEFAULT_NODES)
    }

    pub fn with_nodes(d: usize, nodes: usize) -> Result<Self> {
        let params = TreeParams::new(d)?;
        if nodes < 4096 {
            return Err(invalid("inverse-CDF table needs at least 4096 nodes"));
        }
        let edge = params.spectral_edge();
        let (gx, gw) = gauss_legendre(8);
        // theta runs from pi down to 0, so lambda increases.
        let theta: Vec<f64> = (0..=nodes)
            .map(|i| PI * (1.0 - i as f64 / nodes as f64))
            .collect();
        let mut cdf = vec![0.0; nodes + 1];
        for i in 1..=nodes {
            let (hi, lo) = (theta[i - 1], theta[i]);
            let mid = 0.5 * (hi + lo);
            let half = 0.5 * (hi - lo);
            let seg: f64 = gx
                .iter()
                .zip(&gw)
                .map(|(&x, &w)| w * angular_density(d, mid + half * x))
                .sum::<f64>()
                * half;
            cdf[i] = cdf[i - 1] + seg;
        }
        let total = cdf[nodes];
        cdf.iter_mut().for_each(|c| *c /= total);
        cdf[nodes] = 1.0;
        let mut lambda: Vec<f64> = theta.iter().map(|t| edge * t.cos()).collect();
        lambda[0] = -edge;
        lambda[nodes] = edge;
        let slope = fritsch_carlson_slopes(&cdf, &lambda);
        Ok(Self { cdf, lambda, slope })
    }

    /// Inverse CDF at probability `u` in `[0, 1]`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let n = self.cdf.len() - 1;
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, n) - 1;
        let h = self.cdf[i + 1] - self.cdf[i];
        if h <= 0.0 {
            return self.lambda[i];
        }
        let t = (u - self.cdf[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.lambda[i]
            + h10 * h * self.slope[i]
            + h01 * self.lambda[i + 1]
            + h11 * h * self.slope[i + 1]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.random::<f64>())
    }
}

/// Monotone Hermite slopes for data with nondecreasing `y`.
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1)
        .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[i - 1] + delta[i])
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / delta[i];
        let b = m[i + 1] / delta[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * delta[i];
            m[i + 1] = tau * b * delta[i];
        }
    }
    m
}

/// One draw of `lambda` from the spectral density of `T_d`.
///
/// Builds the inverse-CDF table on every call; hold a [`LambdaSampler`] for
/// repeated draws.
pub fn sample_lambda<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<f64> {
    Ok(LambdaSampler::new(d)?.sample(rng))
}

/// Covariance kernel of the wave process at one spectral point.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceProfile {
    point: SpectralPoint,
    phi: Vec<f64>,
    big_phi: f64,
}

impl CovarianceProfile {
    pub fn point(&self) -> &SpectralPoint {
        &self.point
    }

    pub fn d(&self) -> usize {
        self.point.d
    }

    pub fn lambda(&self) -> f64 {
        self.point.lambda
    }

    /// `phi(0), ..., phi(n_max)`.
    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    pub fn n_max(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi(&self, n: usize) -> Result<f64> {
        self.phi.get(n).copied().ok_or(Error::ProfileTooShort {
            requested: n,
            available: self.n_max(),
        })
    }

    /// `Phi = phi(0) + 2 sum_{j >= 1} |phi(j)|`.
    pub fn big_phi(&self) -> f64 {
        self.big_phi
    }

    /// Rigorous envelope `|phi(n)| <= (d-1)^(-n/2) * min(n + 1, 1 / sin(theta))`
    /// where `cos(theta)` is the Chebyshev argument.
    pub fn decay_envelope(&self, n: usize) -> f64 {
        let q = ((self.d() - 1) as f64).powf(-0.5);
        let x = self.point.chebyshev_arg();
        let sin = (1.0 - x * x).max(0.0).sqrt();
        let poly = (n + 1) as f64;
        let bound = if sin > 0.0 { poly.min(1.0 / sin) } else { poly };
        q.powi(n as i32) * bound
    }

    /// A copy covering distances up to at least `n_max`.
    pub fn extended(&self, n_max: usize) -> Result<Self> {
        if n_max <= self.n_max() {
            return Ok(self.clone());
        }
        build_profile(&self.point, n_max)
    }
}

/// Closed-form `phi(0..=n_max)`.
fn phi_closed_form(point: &SpectralPoint, n_max: usize) -> Vec<f64> {
    let d = point.d as f64;
    let q = (d - 1.0).powf(-0.5);
    let u = chebyshev_table(n_max, point.chebyshev_arg());
    // u[k + 1] = U_k, so U_{-2} = -U_0 is handled at n = 0.
    let cheb = |k: i64| -> f64 {
        if k == -2 {
            -1.0
        } else {
            u[(k + 1) as usize]
        }
    };
    let mut scale = 1.0;
    (0..=n_max)
        .map(|n| {
            let n_i = n as i64;
            let v = scale * ((d - 1.0) / d * cheb(n_i) - cheb(n_i - 2) / d);
            scale *= q;
            v
        })
        .collect()
}

/// `phi(0..=n_max)` from `phi(0) = 1`, `d phi(1) = lambda` and
/// `lambda phi(k) = phi(k-1) + (d-1) phi(k+1)`.
pub fn phi_by_recursion(point: &SpectralPoint, n_max: usize) -> Vec<f64> {
    let d = point.d as f64;
    let l = point.lambda;
    let mut phi = Vec::with_capacity(n_max + 1);
    phi.push(1.0);
    if n_max >= 1 {
        phi.push(l / d);
    }
    for k in 1..n_max {
        let next = (l * phi[k] - phi[k - 1]) / (d - 1.0);
        phi.push(next);
    }
    phi
}

/// Builds `phi(0..=n_max)` from the Chebyshev closed form, checks it against
/// the wave recursion, and sums `Phi` until a certified tail bound drops
/// below `1e-12`.
pub fn build_profile(point: &SpectralPoint, n_max: usize) -> Result<CovarianceProfile> {
    if n_max < 2 {
        return Err(invalid(format!("profile needs n_max >= 2, got {n_max}")));
    }
    let d = point.d as f64;
    let q = (d - 1.0).powf(-0.5);

    // Smallest J with 2 * sum_{j > J} (j + 1) q^j below the target.
    let tail = |j: usize| -> f64 {
        let jf = j as f64;
        2.0 * q.powi(j as i32 + 1) * ((jf + 2.0) / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)))
    };
    let mut cutoff = 1;
    while tail(cutoff) >= BIG_PHI_TAIL {
        cutoff += 1;
    }

    let len = n_max.max(cutoff);
    let closed = phi_closed_form(point, len);
    let recursive = phi_by_recursion(point, n_max);
    for (n, (a, b)) in closed.iter().zip(&recursive).enumerate() {
        if (a - b).abs() > ROUTE_TOL {
            return Err(Error::Inconsistent(format!(
                "phi({n}) closed form {a} disagrees with recursion {b}"
            )));
        }
    }
    let big_phi = closed[0] + 2.0 * closed[1..=cutoff].iter().map(|v| v.abs()).sum::<f64>();
    Ok(CovarianceProfile {
        point: *point,
        phi: closed[..=n_max].to_vec(),
        big_phi,
    })
}

/// Coefficients `(a1, a2)` of the bulk conditional mean along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepulsionCoefficients {
    pub a1: f64,
    pub a2: f64,
}

pub fn repulsion_coefficients(point: &SpectralPoint) -> RepulsionCoefficients {
    let d = point.d as f64;
    let l = point.lambda;
    let denom = l * l + (d - 1.0) * (d - 1.0) + 1.0;
    RepulsionCoefficients {
        a1: 2.0 * d * l / denom,
        a2: 2.0 * (d - 1.0) / denom,
    }
}
