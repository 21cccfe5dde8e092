//! Sampling laboratory for velocity-jump piecewise deterministic Markov
//! processes: the Bouncy Particle Sampler (BPS) and Forward Event-Chain
//! Monte Carlo (FECMC).
//!
//! The crate is organised bottom-up:
//!
//! - [`specialfn`]: `erfcx`, the Rayleigh MGF helper `omega`, Rayleigh and
//!   radial-refresh laws.
//! - [`targets`]: the four potentials (standard Gaussian, equicorrelated
//!   Gaussian, i.i.d. logistic, spherical Student) with gradients, ray
//!   restrictions and normalisation statistics.
//! - [`event_clock`]: exact inversion of the integrated reflection rate,
//!   explicit-bound thinning, and superposition with refreshment.
//! - [`kernels`]: BPS reflection, FECMC stochastic reflection with the naive
//!   orthogonal switch, full refreshment.
//! - [`pdmp`]: the d-dimensional sampler producing event skeletons, the
//!   one-dimensional radial momentum limits and the limiting OU process.
//! - [`diffusivity`]: closed-form diffusion coefficients, Brent optimisation,
//!   resolvent constants and a Green–Kubo Monte Carlo cross-check.
//! - [`estimators`]: exact trajectory integrals, batch means, ESS with BCa
//!   bootstrap intervals.
//!
//! The analytic layer ([`specialfn`], [`diffusivity`] closed forms, [`quadrature`])
//! is generic over [`Scalar`]; simulations run in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod diffusivity;
pub mod error;
pub mod estimators;
pub mod event_clock;
pub mod kernels;
pub mod pdmp;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod specialfn;
pub mod stats;
pub mod targets;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Closed-form diffusivity curve in double precision.
pub type DiffusivityCurve64 = diffusivity::DiffusivityCurve<f64>;
/// Closed-form diffusivity curve in single precision.
pub type DiffusivityCurve32 = diffusivity::DiffusivityCurve<f32>;
/// Resolvent constants in double precision.
pub type ResolventConstants64 = diffusivity::ResolventConstants<f64>;
/// Brent maximiser result in double precision.
pub type Maximum64 = diffusivity::Maximum<f64>;
/// Radial refresh moments in double precision.
pub type RadialMoments64 = specialfn::RadialMoments<f64>;
