//! Special functions and the two one-dimensional laws behind every formula:
//! the scaled complementary error function, `Ω(ρ) = √(π/2)·ρ·erfcx(ρ/√2)`,
//! the standard Rayleigh law χ(2) and the FECMC radial refresh law
//! `q(w) = (d-1)·w·(1-w²)^{(d-3)/2}` on `(0, 1)`.
//!
//! All samplers use inversion, so a seeded stream yields the same draws
//! regardless of platform.

use rand::Rng;

use crate::rng::uniform;
use crate::{Error, Result, Scalar};

// Below this the series `e^{x²} - (2/√π)Σ 2^n x^{2n+1}/(2n+1)!!` is used,
// above it the Laplace continued fraction.
const ERFCX_SWITCH: f64 = 2.0;
const ERFCX_MAX_ITER: usize = 10_000;

/// `e^{x²}·erfc(x)` for `x ≥ 0`.
pub fn erfcx<T: Scalar>(x: T) -> Result<T> {
    if x.is_nan() || x < T::zero() {
        return Err(Error::domain(
            "erfcx",
            format!("requires x >= 0, got {x:?}"),
        ));
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    if x < T::lit(ERFCX_SWITCH) {
        Ok(erfcx_series(x))
    } else {
        Ok(erfcx_continued_fraction(x))
    }
}

fn erfcx_series<T: Scalar>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0usize;
    while n < ERFCX_MAX_ITER {
        n += 1;
        term = term * two_x2 / T::from_usize_lossy(2 * n + 1);
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    (x * x).exp() - T::FRAC_2_SQRT_PI() * sum
}

/// Modified Lentz evaluation of `x + (1/2)/(x + (2/2)/(x + (3/2)/(x + …)))`.
fn erfcx_continued_fraction<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let half = T::lit(0.5);
    let mut f = x;
    let mut c = f;
    let mut d = T::zero();
    for j in 1..ERFCX_MAX_ITER {
        let a = half * T::from_usize_lossy(j);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    T::FRAC_2_SQRT_PI() / (T::lit(2.0) * f)
}

/// `Ω(ρ) = √(π/2)·ρ·erfcx(ρ/√2) = ρ·M(ρ)`, with `M` the Gaussian Mills ratio.
pub fn omega<T: Scalar>(rho: T) -> Result<T> {
    if rho.is_nan() || rho < T::zero() {
        return Err(Error::domain(
            "omega",
            format!("requires rho >= 0, got {rho:?}"),
        ));
    }
    let sqrt_half_pi = (T::FRAC_PI_2()).sqrt();
    Ok(sqrt_half_pi * rho * erfcx(rho * T::FRAC_1_SQRT_2())?)
}

/// `E[e^{-ρτ}]` for `τ ~ χ(2)`, equal to `1 - Ω(ρ)`.
pub fn rayleigh_mgf_neg<T: Scalar>(rho: T) -> Result<T> {
    if rho.is_nan() || rho < T::zero() {
        return Err(Error::domain(
            "rayleigh_mgf_neg",
            format!("requires rho >= 0, got {rho:?}"),
        ));
    }
    Ok(T::one() - omega(rho)?)
}

/// Maclaurin coefficients `m_k` of the Mills ratio, `M(ρ) = Σ m_k ρ^k`.
///
/// From `M' = ρM - 1`: `m_0 = √(π/2)`, `m_1 = -1`, `m_{k+1} = m_{k-1}/(k+1)`.
pub fn mills_ratio_coefficients<T: Scalar>(n: usize) -> Vec<T> {
    let mut m = Vec::with_capacity(n.max(2));
    m.push(T::FRAC_PI_2().sqrt());
    m.push(-T::one());
    for k in 1..n.saturating_sub(1) {
        let next = m[k - 1] / T::from_usize_lossy(k + 1);
        m.push(next);
    }
    m.truncate(n);
    m
}

/// The standard Rayleigh law χ(2), density `x·e^{-x²/2}` on `x > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RayleighLaw;

impl RayleighLaw {
    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x * (-0.5 * x * x).exp()
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-0.5 * x * x).exp_m1()
        }
    }

    /// Inverse CDF, `√(-2·ln(1-u))`.
    pub fn quantile(&self, u: f64) -> f64 {
        (-2.0 * (-u).ln_1p()).sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(uniform(rng))
    }

    pub fn mean(&self) -> f64 {
        std::f64::consts::FRAC_PI_2.sqrt()
    }

    /// `E[τ^{2k}] = 2^k·k!`. The sixth moment is 48.
    pub fn even_moment(&self, k: u32) -> f64 {
        (1..=k).fold(1.0, |acc, j| acc * 2.0 * f64::from(j))
    }
}

/// One χ(2) draw by inversion.
pub fn sample_rayleigh<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    RayleighLaw.sample(rng)
}

/// Law of the refreshed radial speed in FECMC, density
/// `(d-1)·w·(1-w²)^{(d-3)/2}` on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialRefreshLaw {
    d: usize,
}

/// Mean and even moments of [`RadialRefreshLaw`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMoments<T> {
    pub mean: T,
    pub m2: T,
    pub m4: T,
    pub m6: T,
}

impl RadialRefreshLaw {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::domain(
                "radial_refresh",
                format!("dimension must be at least 3, got {d}"),
            ));
        }
        Ok(Self { d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn density(&self, w: f64) -> f64 {
        if w <= 0.0 || w >= 1.0 {
            return 0.0;
        }
        let d = self.d as f64;
        (d - 1.0) * w * (0.5 * (d - 3.0) * (-w * w).ln_1p()).exp()
    }

    /// `1 - (1-w²)^{(d-1)/2}`.
    pub fn cdf(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        if w >= 1.0 {
            return 1.0;
        }
        let d = self.d as f64;
        -(0.5 * (d - 1.0) * (-w * w).ln_1p()).exp_m1()
    }

    /// `√(1 - (1-u)^{2/(d-1)})`, evaluated with `expm1`/`ln1p` so large `d`
    /// keeps full relative accuracy.
    pub fn quantile(&self, u: f64) -> f64 {
        let d = self.d as f64;
        (-((2.0 / (d - 1.0)) * (-u).ln_1p()).exp_m1()).sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(uniform(rng))
    }

    pub fn moments<T: Scalar>(&self) -> RadialMoments<T> {
        radial_moments_unchecked(self.d)
    }
}

/// One draw from [`RadialRefreshLaw`] for dimension `d ≥ 3`.
pub fn sample_radial_refresh<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<f64> {
    Ok(RadialRefreshLaw::new(d)?.sample(rng))
}

/// Exact moments: `mean = B(1/2,(d+1)/2)/2`, `m2 = 2/(d+1)`,
/// `m4 = 8/((d+1)(d+3))`, `m6 = 48/((d+1)(d+3)(d+5))`.
pub fn radial_refresh_moments<T: Scalar>(d: usize) -> Result<RadialMoments<T>> {
    RadialRefreshLaw::new(d)?;
    Ok(radial_moments_unchecked(d))
}

fn radial_moments_unchecked<T: Scalar>(d: usize) -> RadialMoments<T> {
    let df = T::from_usize_lossy(d);
    let one = T::one();
    let two = T::lit(2.0);
    let m2 = two / (df + one);
    let m4 = T::lit(8.0) / ((df + one) * (df + T::lit(3.0)));
    let m6 = T::lit(48.0) / ((df + one) * (df + T::lit(3.0)) * (df + T::lit(5.0)));
    RadialMoments {
        mean: half_beta_half(d),
        m2,
        m4,
        m6,
    }
}

/// `B(1/2, (d+1)/2)/2 = (√π/2)·Γ((d+1)/2)/Γ(d/2+1)`, by the recurrence
/// `r(d+2) = r(d)·(d+1)/(d+2)` on the gamma ratio.
fn half_beta_half<T: Scalar>(d: usize) -> T {
    let sqrt_pi = T::PI().sqrt();
    let two = T::lit(2.0);
    let (mut ratio, mut k) = if d % 2 == 1 {
        (two / sqrt_pi, 1usize)
    } else {
        (sqrt_pi / two, 2usize)
    };
    while k < d {
        ratio = ratio * T::from_usize_lossy(k + 1) / T::from_usize_lossy(k + 2);
        k += 2;
    }
    sqrt_pi / two * ratio
}
