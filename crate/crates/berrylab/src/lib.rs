//! Simulation and verification laboratory for the planar random wave model.
//!
//! The object of study is the isotropic centered Gaussian field `B_E` on
//! `R^2` whose covariance is `E[B_E(x) B_E(y)] = J_0(2 pi sqrt(E) |x - y|)`.
//! Realizations are almost surely Laplace eigenfunctions,
//! `Delta B_E + 4 pi^2 E B_E = 0`, and the library samples them exactly as
//! finite superpositions of plane waves with equispaced random directions.
//!
//! On top of the sampler sit measurement and verification layers:
//!
//! * [`nodal`] extracts the zero set `B_E^{-1}(0)` on a grid and measures
//!   nodal length over rectangles, dyadic partitions and test functions;
//! * [`chaos2`] evaluates the projection of nodal length onto the second
//!   Wiener chaos, both as a boundary line integral and as a domain integral;
//! * [`cov_theory`] provides semi-analytic oracles for the exact and
//!   asymptotic second-chaos covariances, the Wiener sheet covariance, the
//!   total-disorder matrix and the limiting boundary-supremum law;
//! * [`montecarlo`] runs deterministic, seed-keyed replication experiments
//!   that compare sample statistics against those oracles.
//!
//! All randomness flows through counter-based streams keyed by
//! `(seed, replication)`, so every experiment is reproducible and its output
//! is byte-identical for any thread count.

pub mod chaos2;
pub mod cov_theory;
pub mod error;
pub mod field;
pub mod geometry;
pub mod montecarlo;
pub mod nodal;
pub mod quad;
pub mod rng;
pub mod special;
pub mod testfn;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
