use serde::{Deserialize, Serialize};

use crate::event_clock::next_affine_event;
use crate::rng::{standard_normal, stream, unit_exponential};
use crate::specialfn::sample_rayleigh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitKind {
    /// FECMC radial momentum: drift `+1`, jumps at rate `x₊` to `-τ`, `τ ~ χ(2)`.
    RF,
    /// BPS radial momentum: drift `+1`, jumps at rate `x₊` to `-x`.
    RB,
    /// Ornstein–Uhlenbeck `dY = -aY dt + σ dB`.
    OU,
    /// Scaled potential of a d-dimensional run.
    Potential,
}

/// A one-dimensional path. For `RF`/`RB` the path is piecewise linear with
/// slope `+1` between knots and `values[k]` is the right limit at
/// `times[k]`; `pre_values[k]` is the left limit (equal unless `jumps[k]`).
/// Other kinds are sampled on a grid with `pre_values == values`.
#[derive(Debug, Clone)]
pub struct LimitProcessPath {
    pub kind: LimitKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub pre_values: Vec<f64>,
    pub jumps: Vec<bool>,
    /// Refreshment rate of an `RF`/`RB` path.
    pub rho: f64,
    /// Grid spacing of a sampled path.
    pub step: Option<f64>,
    pub drift: f64,
    pub diffusion: f64,
}

impl LimitProcessPath {
    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.iter().filter(|&&j| j).count()
    }

    /// Value at time `t` of a piecewise linear `RF`/`RB` path.
    pub fn value_at(&self, t: f64) -> f64 {
        assert!(matches!(self.kind, LimitKind::RF | LimitKind::RB));
        let k = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        self.values[k] + (t - self.times[k])
    }

    /// `RF`/`RB` path sampled at `0, step, …, ⌊horizon/step⌋·step`.
    pub fn sample_grid(&self, step: f64) -> Vec<f64> {
        assert!(matches!(self.kind, LimitKind::RF | LimitKind::RB));
        assert!(step > 0.0);
        let n = (self.horizon() / step).floor() as usize + 1;
        let mut out = Vec::with_capacity(n);
        let mut k = 0;
        for j in 0..n {
            let t = j as f64 * step;
            while k + 1 < self.times.len() && self.times[k + 1] <= t {
                k += 1;
            }
            out.push(self.values[k] + (t - self.times[k]));
        }
        out
    }

    /// `∫₀^T x_t dt` of a piecewise linear path.
    pub fn time_integral(&self) -> f64 {
        self.piecewise_moment(|a, dt| a * dt + 0.5 * dt * dt)
    }

    /// `∫₀^T x_t² dt` of a piecewise linear path.
    pub fn time_integral_sq(&self) -> f64 {
        self.piecewise_moment(|a, dt| a * a * dt + a * dt * dt + dt * dt * dt / 3.0)
    }

    fn piecewise_moment(&self, piece: impl Fn(f64, f64) -> f64) -> f64 {
        assert!(matches!(self.kind, LimitKind::RF | LimitKind::RB));
        (1..self.times.len())
            .map(|k| piece(self.values[k - 1], self.times[k] - self.times[k - 1]))
            .sum()
    }
}

/// Simulates `R^F` or `R^B` on `[0, horizon]`.
///
/// With `rho > 0`, an independent clock at rate `rho` redraws the state from
/// `N(0, 1)`. `x0 = None` starts from the stationary law `N(0, 1)`.
pub fn run_limit_r(
    kind: LimitKind,
    rho: f64,
    horizon: f64,
    x0: Option<f64>,
    seed: u64,
) -> Result<LimitProcessPath> {
    if !matches!(kind, LimitKind::RF | LimitKind::RB) {
        return Err(Error::Config(format!(
            "run_limit_r needs RF or RB, got {kind:?}"
        )));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Config(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if !(rho >= 0.0) {
        return Err(Error::Config(format!("rho must be >= 0, got {rho}")));
    }
    let mut rng = stream(seed);
    let mut x = match x0 {
        Some(x) => x,
        None => standard_normal(&mut rng),
    };
    let mut path = LimitProcessPath {
        kind,
        times: vec![0.0],
        values: vec![x],
        pre_values: vec![x],
        jumps: vec![false],
        rho,
        step: None,
        drift: 1.0,
        diffusion: 0.0,
    };
    let mut t = 0.0;
    loop {
        let jump_dt = next_affine_event(x, 1.0, unit_exponential(&mut rng))?;
        let redraw_dt = if rho > 0.0 {
            unit_exponential(&mut rng) / rho
        } else {
            f64::INFINITY
        };
        let dt = jump_dt.min(redraw_dt);
        if t + dt >= horizon {
            let end = x + (horizon - t);
            path.times.push(horizon);
            path.values.push(end);
            path.pre_values.push(end);
            path.jumps.push(false);
            return Ok(path);
        }
        t += dt;
        let pre = x + dt;
        let is_jump = jump_dt <= redraw_dt;
        x = if !is_jump {
            standard_normal(&mut rng)
        } else {
            match kind {
                LimitKind::RF => -sample_rayleigh(&mut rng),
                _ => -pre,
            }
        };
        path.times.push(t);
        path.values.push(x);
        path.pre_values.push(pre);
        path.jumps.push(is_jump);
    }
}

/// Stationary OU path `dY = -aY dt + σ dB` on the grid `0, step, …` by the
/// exact recursion `Y_{k+1} = e^{-a·step}Y_k + √(σ²(1-e^{-2a·step})/(2a))·ξ_k`.
///
/// `y0 = None` draws `Y₀ ~ N(0, σ²/(2a))`.
pub fn run_ou(
    a: f64,
    sigma: f64,
    horizon: f64,
    step: f64,
    y0: Option<f64>,
    seed: u64,
) -> Result<LimitProcessPath> {
    if !(a > 0.0) {
        return Err(Error::domain(
            "run_ou",
            format!("drift rate must be > 0, got {a}"),
        ));
    }
    if !(step > 0.0) || !(horizon >= 0.0) {
        return Err(Error::domain(
            "run_ou",
            format!("need step > 0 and horizon >= 0, got step {step}, horizon {horizon}"),
        ));
    }
    let mut rng = stream(seed);
    let stationary_sd = sigma / (2.0 * a).sqrt();
    let mut y = match y0 {
        Some(y) => y,
        None => stationary_sd * standard_normal(&mut rng),
    };
    let n = (horizon / step).floor() as usize;
    let decay = (-a * step).exp();
    let noise = stationary_sd * (-(-2.0 * a * step).exp_m1()).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(y);
    for _ in 0..n {
        let xi = if noise > 0.0 {
            standard_normal(&mut rng)
        } else {
            0.0
        };
        y = decay * y + noise * xi;
        values.push(y);
    }
    let times = (0..=n).map(|k| k as f64 * step).collect();
    Ok(LimitProcessPath {
        kind: LimitKind::OU,
        times,
        pre_values: values.clone(),
        jumps: vec![false; n + 1],
        values,
        rho: 0.0,
        step: Some(step),
        drift: a,
        diffusion: sigma,
    })
}
