//! Diffusion coefficients of the limiting potential process.
//!
//! `σ_F²(ρ)` (FECMC) and `σ_B²(ρ)` (BPS) in closed form through `Ω`, the
//! maximiser of `σ_B²`, the resolvent functions whose Green–Kubo pairing
//! reproduces both, and a Monte Carlo Green–Kubo estimator on simulated
//! radial-momentum paths.

mod closed_form;
mod curve;
mod green_kubo;
mod optimize;
mod resolvent;

pub use closed_form::{
    asymptotic_variances, ou_integrated_variance, sigma2_b, sigma2_f, sigma2_f_zero, SERIES_SWITCH,
};
pub use curve::{log_grid, DiffusivityCurve, Provenance};
pub use green_kubo::{green_kubo_sigma2, GreenKuboConfig, GreenKuboEstimate};
pub use optimize::{maximize_brent, optimize_sigma2_b, Maximum};
pub use resolvent::{resolvent_constants, ResolventConstants};
