use rand::Rng;
use rayon::prelude::*;

use crate::pdmp::{run_limit_r, LimitKind};
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenKuboConfig {
    pub n_paths: usize,
    pub horizon: f64,
    pub lag_step: f64,
    /// Defaults to `min(horizon/3, 40/max(ρ, 0.1))`.
    pub max_lag: Option<f64>,
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl GreenKuboConfig {
    pub fn new(n_paths: usize, horizon: f64, seed: u64) -> Self {
        Self {
            n_paths,
            horizon,
            lag_step: 0.05,
            max_lag: None,
            bootstrap_resamples: 1000,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenKuboEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub horizon: f64,
    pub max_lag: f64,
    /// Set for `R^B` at `ρ = 0`, where the damped integral does not converge
    /// (the `ρ = 0` BPS process is not ergodic).
    pub non_convergent: bool,
    pub per_path: Vec<f64>,
}

/// `σ²(ρ) ≈ 8∫₀^L e^{-ρt}K(t)dt` from stationary `ρ = 0` paths of `R^F` or
/// `R^B`, with `K(t) = Cov[R₀, R_t]`.
///
/// Each path gives its own estimate: `K` on the lag grid from all grid
/// origins of that path (the mean is known to be 0), integrated by the
/// trapezoid rule. The estimate is the mean over paths; the standard error
/// is the bootstrap standard deviation of that mean over paths.
///
/// Killing at rate `ρ` is equivalent to refreshing `R` from `N(0, 1)` at
/// rate `ρ`: after a redraw the path is independent of `R₀`.
pub fn green_kubo_sigma2(
    kind: LimitKind,
    rho: f64,
    cfg: &GreenKuboConfig,
) -> Result<GreenKuboEstimate> {
    if !matches!(kind, LimitKind::RF | LimitKind::RB) {
        return Err(Error::Config(format!(
            "Green-Kubo needs RF or RB, got {kind:?}"
        )));
    }
    if !(rho >= 0.0) {
        return Err(Error::Config(format!("rho must be >= 0, got {rho}")));
    }
    if cfg.n_paths < 2 {
        return Err(Error::Config("Green-Kubo needs at least 2 paths".into()));
    }
    let max_lag = cfg
        .max_lag
        .unwrap_or_else(|| (cfg.horizon / 3.0).min(40.0 / rho.max(0.1)));
    let n_lags = (max_lag / cfg.lag_step).round() as usize;
    if n_lags < 2 || max_lag >= cfg.horizon {
        return Err(Error::Config(format!(
            "lag window {max_lag} incompatible with horizon {} and step {}",
            cfg.horizon, cfg.lag_step
        )));
    }
    let weights: Vec<f64> = (0..=n_lags)
        .map(|l| {
            let w = if l == 0 || l == n_lags { 0.5 } else { 1.0 };
            w * cfg.lag_step * (-rho * l as f64 * cfg.lag_step).exp()
        })
        .collect();

    let per_path: Vec<f64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let path = run_limit_r(
                kind,
                0.0,
                cfg.horizon,
                None,
                derive_seed(cfg.seed, i as u64),
            )?;
            let y = path.sample_grid(cfg.lag_step);
            let n = y.len();
            let mut integral = 0.0;
            for (l, w) in weights.iter().enumerate() {
                let m = n - l;
                let c: f64 = y[..m].iter().zip(&y[l..]).map(|(a, b)| a * b).sum();
                integral += w * c / m as f64;
            }
            Ok(8.0 * integral)
        })
        .collect::<Result<_>>()?;

    let n = per_path.len() as f64;
    let estimate = per_path.iter().sum::<f64>() / n;
    let mut rng = stream(derive_seed(cfg.seed, u64::MAX));
    let boot: Vec<f64> = (0..cfg.bootstrap_resamples)
        .map(|_| {
            (0..per_path.len())
                .map(|_| per_path[rng.random_range(0..per_path.len())])
                .sum::<f64>()
                / n
        })
        .collect();
    let std_error = crate::stats::sample_variance(&boot).sqrt();
    Ok(GreenKuboEstimate {
        estimate,
        std_error,
        n_paths: cfg.n_paths,
        horizon: cfg.horizon,
        max_lag: n_lags as f64 * cfg.lag_step,
        non_convergent: kind == LimitKind::RB && rho == 0.0,
        per_path,
    })
}
