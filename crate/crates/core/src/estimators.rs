//! Trajectory functionals and variance estimators.
//!
//! The two test functions are
//! `h(x) = (U(x) - E_π U)/√Var_π U` (the slowest-mixing direction) and
//! `g(x, v) = ((v|∇U(x)) - 0)/√Var[(V|∇U(X))]`, the normalised time
//! derivative of `U` along the flow. Both are integrated exactly along the
//! piecewise linear trajectory, split at batch boundaries.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::pdmp::{EventSkeleton, TrajectoryObserver};
use crate::quadrature::GaussLegendre;
use crate::stats::{quantile_sorted, sample_variance};
use crate::targets::{NormalizationStats, TargetModel};
use crate::{Error, Result};

/// Gauss–Legendre order for `∫h` on non-Gaussian targets.
pub const H_QUADRATURE_ORDER: usize = 10;
/// Longest sub-interval handed to one Gauss–Legendre rule.
pub const H_QUADRATURE_PIECE: f64 = 0.5;
/// Fast batch length in units of `√d` sampler time.
pub const FAST_BATCH_FACTOR: f64 = 1.5;

/// Integrals of a functional over consecutive batches `[kb, (k+1)b)`.
/// The trailing partial batch is kept in `partial`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchIntegrals {
    pub batch: f64,
    pub sums: Vec<f64>,
    pub partial: f64,
    pub total: f64,
    elapsed: f64,
}

impl BatchIntegrals {
    pub fn new(batch: f64) -> Self {
        assert!(batch > 0.0, "batch length must be positive");
        Self {
            batch,
            sums: Vec::new(),
            partial: 0.0,
            total: 0.0,
            elapsed: 0.0,
        }
    }

    /// Adds the piece `[t0, t0 + dt)`, where `integral(a, b)` integrates the
    /// functional over offsets `[a, b] ⊂ [0, dt]` from `t0`.
    pub fn add_piece(&mut self, t0: f64, dt: f64, mut integral: impl FnMut(f64, f64) -> f64) {
        let end = t0 + dt;
        let mut s = t0;
        while s < end {
            let boundary = (self.sums.len() + 1) as f64 * self.batch;
            let e = boundary.min(end);
            let val = integral(s - t0, e - t0);
            self.partial += val;
            self.total += val;
            if boundary <= end {
                self.sums.push(self.partial);
                self.partial = 0.0;
            }
            s = e;
        }
        self.elapsed = self.elapsed.max(end);
    }

    /// Time covered so far.
    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// Sums consecutive groups of `factor` batches (drops a remainder).
    pub fn coarsen(&self, factor: usize) -> Vec<f64> {
        self.sums
            .chunks_exact(factor)
            .map(|c| c.iter().sum())
            .collect()
    }
}

/// Streams `∫h` and `∫g` of a run into batches.
pub struct FunctionalAccumulator<'a> {
    target: &'a TargetModel,
    stats: NormalizationStats,
    sd_u: f64,
    sd_g: f64,
    rule: GaussLegendre,
    pub h: BatchIntegrals,
    pub g: BatchIntegrals,
}

impl<'a> FunctionalAccumulator<'a> {
    pub fn new(target: &'a TargetModel, h_batch: f64, g_batch: f64) -> Self {
        Self::with_order(target, h_batch, g_batch, H_QUADRATURE_ORDER)
    }

    pub fn with_order(target: &'a TargetModel, h_batch: f64, g_batch: f64, order: usize) -> Self {
        let stats = target.normalization_stats();
        Self {
            target,
            stats,
            sd_u: stats.var_u.sqrt(),
            sd_g: stats.var_radial.sqrt(),
            rule: GaussLegendre::new(order),
            h: BatchIntegrals::new(h_batch),
            g: BatchIntegrals::new(g_batch),
        }
    }

    pub fn averages(&self) -> FunctionalAverages {
        let horizon = self.h.elapsed();
        FunctionalAverages {
            h_bar: self.h.total / horizon,
            g_bar: self.g.total / horizon,
            horizon,
        }
    }
}

impl TrajectoryObserver for FunctionalAccumulator<'_> {
    fn segment(&mut self, t0: f64, x: &[f64], v: &[f64], dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let ray = self.target.ray(x, v);
        let u0 = self.target.potential_unchecked(x) - self.stats.mean_u;
        let sd_u = self.sd_u;
        if self.target.is_gaussian() {
            // U along the ray is u0 + r0·s + slope·s²/2.
            let r0 = ray.rate(0.0);
            let slope = ray.rate(1.0) - r0;
            self.h.add_piece(t0, dt, |a, b| {
                let p = |s: f64| s * (u0 + s * (0.5 * r0 + s * slope / 6.0));
                (p(b) - p(a)) / sd_u
            });
        } else {
            let rule = &self.rule;
            self.h.add_piece(t0, dt, |a, b| {
                let pieces = ((b - a) / H_QUADRATURE_PIECE).ceil().max(1.0) as usize;
                let width = (b - a) / pieces as f64;
                (0..pieces)
                    .map(|j| {
                        let lo = a + j as f64 * width;
                        let hi = if j + 1 == pieces { b } else { lo + width };
                        rule.integrate(|s| u0 + ray.potential_delta(s), lo, hi)
                    })
                    .sum::<f64>()
                    / sd_u
            });
        }
        let sd_g = self.sd_g;
        self.g.add_piece(t0, dt, |a, b| {
            (ray.potential_delta(b) - ray.potential_delta(a)) / sd_g
        });
    }
}

/// Time averages `ĥ_T`, `ĝ_T` of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalAverages {
    pub h_bar: f64,
    pub g_bar: f64,
    pub horizon: f64,
}

/// Batched `∫h` over a recorded skeleton.
pub fn integrate_h(skeleton: &EventSkeleton, target: &TargetModel, batch: f64) -> BatchIntegrals {
    let mut acc = FunctionalAccumulator::new(target, batch, batch);
    skeleton.replay(&mut acc);
    acc.h
}

/// Batched `∫g` over a recorded skeleton (exact potential differences).
pub fn integrate_g(skeleton: &EventSkeleton, target: &TargetModel, batch: f64) -> BatchIntegrals {
    let mut acc = FunctionalAccumulator::new(target, batch, batch);
    skeleton.replay(&mut acc);
    acc.g
}

/// Relative difference between order-10 and order-20 Gauss–Legendre values
/// of `∫h` over a whole skeleton.
pub fn calibrate_h_quadrature(skeleton: &EventSkeleton, target: &TargetModel) -> f64 {
    let horizon = skeleton.end_time().max(1.0);
    let mut lo = FunctionalAccumulator::with_order(target, horizon, horizon, H_QUADRATURE_ORDER);
    let mut hi =
        FunctionalAccumulator::with_order(target, horizon, horizon, 2 * H_QUADRATURE_ORDER);
    skeleton.replay(&mut lo);
    skeleton.replay(&mut hi);
    let scale = hi.h.total.abs().max(horizon * 1e-3);
    (lo.h.total - hi.h.total).abs() / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateLabel {
    Raw,
    Slow,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub batch_size: f64,
    pub batch_count: usize,
    pub label: EstimateLabel,
}

/// Batch-means estimator: the unbiased sample variance of
/// `Y_i = (1/√b)∫_{batch i}`, given the batch integrals.
pub fn batch_means(batch_integrals: &[f64], b: f64) -> Result<VarianceEstimate> {
    if batch_integrals.len() < 2 {
        return Err(Error::Degenerate(format!(
            "batch means needs at least 2 full batches, got {}",
            batch_integrals.len()
        )));
    }
    let scaled: Vec<f64> = batch_integrals.iter().map(|s| s / b.sqrt()).collect();
    Ok(VarianceEstimate {
        value: sample_variance(&scaled),
        batch_size: b,
        batch_count: scaled.len(),
        label: EstimateLabel::Raw,
    })
}

/// Default slow batch length in sampler time: `c·(T/d)^{1/3}·d` with `T` the
/// sampler-time horizon, i.e. `c·T'^{1/3}` in the rescaled time `T' = T/d`.
pub fn default_slow_batch(horizon: f64, d: usize, c: f64) -> f64 {
    let d = d as f64;
    c * (horizon / d).cbrt() * d
}

/// Default fast batch length in sampler time, `1.5·√d`.
pub fn default_fast_batch(d: usize) -> f64 {
    FAST_BATCH_FACTOR * (d as f64).sqrt()
}

/// `ς̂²_slow`: batch means on `h`, converted to rescaled time (divided by `d`).
pub fn slow_estimate(h: &BatchIntegrals, d: usize) -> Result<VarianceEstimate> {
    let mut est = batch_means(&h.sums, h.batch)?;
    est.value /= d as f64;
    est.label = EstimateLabel::Slow;
    Ok(est)
}

/// `ς̂²_fast = 2/ς̂²_g`: batch means on the normalised energy increments.
pub fn fast_proxy_estimate(g: &BatchIntegrals) -> Result<VarianceEstimate> {
    let mut est = batch_means(&g.sums, g.batch)?;
    if !(est.value > 0.0) {
        return Err(Error::Degenerate(
            "energy increments have zero sample variance".into(),
        ));
    }
    est.value = 2.0 / est.value;
    est.label = EstimateLabel::Fast;
    Ok(est)
}

/// `ς̂²_fast` from a recorded skeleton.
pub fn fast_proxy_from_skeleton(
    skeleton: &EventSkeleton,
    target: &TargetModel,
    b_fast: f64,
) -> Result<VarianceEstimate> {
    fast_proxy_estimate(&integrate_g(skeleton, target, b_fast))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMethod {
    Bca,
    Percentile,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssEstimate {
    pub ess: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mse: f64,
    pub replicates: usize,
    pub method: IntervalMethod,
}

/// Bootstrap settings for [`ess_from_replicates`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 2000,
            level: 0.95,
        }
    }
}

pub const MIN_REPLICATES: usize = 20;

/// `ESS = 1/MSE` with `MSE = (1/R)Σ ĥ_r²` over replicate averages of a
/// zero-mean functional, and a BCa bootstrap interval over replicates
/// (jackknife acceleration; percentile interval if that is not finite).
pub fn ess_from_replicates<R: Rng + ?Sized>(
    averages: &[f64],
    cfg: BootstrapConfig,
    rng: &mut R,
) -> Result<EssEstimate> {
    let n = averages.len();
    if n < MIN_REPLICATES {
        return Err(Error::Config(format!(
            "ESS interval needs at least {MIN_REPLICATES} replicates, got {n}"
        )));
    }
    let stat = |sum_sq: f64, count: usize| count as f64 / sum_sq;
    let squares: Vec<f64> = averages.iter().map(|a| a * a).collect();
    let total: f64 = squares.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("all replicate averages are zero".into()));
    }
    let theta = stat(total, n);
    let mse = total / n as f64;

    let mut boot: Vec<f64> = (0..cfg.resamples)
        .map(|_| {
            let s: f64 = (0..n).map(|_| squares[rng.random_range(0..n)]).sum();
            stat(s, n)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let spread = boot[boot.len() - 1] - boot[0];
    if spread <= 1e-12 * theta.abs() {
        return Ok(EssEstimate {
            ess: theta,
            ci_lo: theta,
            ci_hi: theta,
            mse,
            replicates: n,
            method: IntervalMethod::Degenerate,
        });
    }
    let normal = Normal::standard();
    let alpha = 0.5 * (1.0 - cfg.level);
    let percentile = |q: f64| quantile_sorted(&boot, q);

    let below = boot.iter().filter(|&&b| b < theta).count() as f64;
    let ties = boot.iter().filter(|&&b| b == theta).count() as f64;
    let frac = (below + 0.5 * ties) / boot.len() as f64;
    let z0 = normal.inverse_cdf(frac);
    let jack: Vec<f64> = squares.iter().map(|s| stat(total - s, n - 1)).collect();
    let jbar = jack.iter().sum::<f64>() / n as f64;
    let num: f64 = jack.iter().map(|j| (jbar - j).powi(3)).sum();
    let den: f64 = jack.iter().map(|j| (jbar - j).powi(2)).sum();
    let accel = num / (6.0 * den.powf(1.5));

    let adjusted = |z: f64| {
        let zz = z0 + z;
        normal.cdf(z0 + zz / (1.0 - accel * zz))
    };
    let q_lo = adjusted(normal.inverse_cdf(alpha));
    let q_hi = adjusted(normal.inverse_cdf(1.0 - alpha));
    let (ci_lo, ci_hi, method) =
        if z0.is_finite() && accel.is_finite() && q_lo.is_finite() && q_hi.is_finite() {
            (percentile(q_lo), percentile(q_hi), IntervalMethod::Bca)
        } else {
            (
                percentile(alpha),
                percentile(1.0 - alpha),
                IntervalMethod::Percentile,
            )
        };
    Ok(EssEstimate {
        ess: theta,
        ci_lo,
        ci_hi,
        mse,
        replicates: n,
        method,
    })
}
