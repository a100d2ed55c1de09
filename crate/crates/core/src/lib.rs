//! Invariant Gaussian waves on the `d`-regular tree.
//!
//! The crate covers the whole pipeline for the Gaussian process whose
//! realizations are eigenfunctions of the adjacency operator on `T_d` with
//! unit marginal variance:
//!
//! * [`spectral`]: Chebyshev polynomials, the spectral density and the
//!   covariance kernel `phi(n)` as a function of graph distance.
//! * [`tree`]: vertex addresses, distances, balls and canonical paths.
//! * [`gaussian`]: dense covariance assembly, rank-aware factorization,
//!   Gaussian conditioning, truncated normals and orthant probabilities.
//! * [`sampler`]: exact samplers on balls and paths plus verifiers of the
//!   deterministic wave identities.
//! * [`conditioned`]: Gibbs sampling of paths conditioned to stay above a
//!   level, and tail diagnostics for the conditioned law.
//! * [`levelset`]: level-set components, survival probabilities, the
//!   transfer-operator rate and the critical threshold.

pub mod conditioned;
pub mod error;
pub mod gaussian;
pub mod levelset;
pub mod normal;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod spectral;
pub mod tree;

pub use error::{Error, Result};
pub use spectral::{CovarianceProfile, SpectralPoint, TreeParams};
pub use tree::{Ball, VertexId};
