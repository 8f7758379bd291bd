//! Simulation and analysis toolkit for the non-symmetric spiked matrix-tensor
//! model.
//!
//! Four planted signals `u, v, x, y` are observed through two coupled noisy
//! channels: a rank-one spiked matrix `Y_m = sqrt(Δm) Z + u vᵀ / sqrt(n1)`
//! and a rank-one spiked third-order tensor
//! `Y_t = sqrt(Δt) Z + u ⊗ x ⊗ y / n1`, with aspect ratios
//! `α_k = n_k / n1`. The crate provides:
//!
//! - [`model`]: instance generation (dense or memory-light virtual tensor
//!   backend), deterministic contraction kernels, overlap/MSE metrics;
//! - [`amp`]: the approximate message passing iteration with Bayes and
//!   maximum-likelihood denoisers, the sequential (decimated) variant, and a
//!   gradient-stationarity check for converged ML estimates;
//! - [`se`]: the low-dimensional state evolution recursions tracking AMP,
//!   their Jacobians and spectral radii;
//! - [`phase`]: closed-form recovery thresholds, region classification,
//!   fixed-point solving, stability, free energy and spinodal lines;
//! - [`spectral`]: the two-stage PCA estimator (matrix, then contracted
//!   tensor) and its singular-vector overlap predictions.
//!
//! Everything is reproducible: all randomness is counter-based ([`rng`]), so
//! results are independent of thread count and identical across runs.

pub mod amp;
pub mod error;
pub mod model;
pub mod phase;
pub mod rng;
pub mod se;
pub mod spectral;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
