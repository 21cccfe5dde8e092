//! Target distributions as potentials `U = -log π + const`.
//!
//! | kind | `U(x)` |
//! |---|---|
//! | standard Gaussian | `|x|²/2` |
//! | equicorrelated Gaussian | `xᵀΣ⁻¹x/2`, `Σ = (1-γ)I + γ𝟙𝟙ᵀ` |
//! | i.i.d. logistic | `Σᵢ [-xᵢ + 2·ln(1+e^{xᵢ})]` |
//! | spherical Student | `((d+ν)/2)·ln(1+|x|²/ν)` |
//!
//! Test functions subtract `E_π[U]`, so these additive constants never show
//! up in estimates.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
use crate::rng::{standard_normal, uniform};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    StdGaussian,
    AnisoGaussian { gamma: f64 },
    IidLogistic,
    Student { nu: f64 },
}

impl TargetKind {
    pub fn label(&self) -> String {
        match self {
            TargetKind::StdGaussian => "std_gaussian".into(),
            TargetKind::AnisoGaussian { gamma } => format!("aniso_gaussian(gamma={gamma})"),
            TargetKind::IidLogistic => "iid_logistic".into(),
            TargetKind::Student { nu } => format!("student(nu={nu})"),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(
            self,
            TargetKind::StdGaussian | TargetKind::AnisoGaussian { .. }
        )
    }
}

// Internal shape. An equicorrelated Gaussian with γ = 0 is stored as
// `Isotropic`, so it runs the exact same arithmetic as the standard Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    Isotropic,
    Equicorrelated { a: f64, b: f64, gamma: f64 },
    Logistic,
    Student { nu: f64 },
}

/// `E_π[U]` and `Var_π[U]`, plus the variance of `(V|∇U(X))` under
/// `π ⊗ Unif(S^{d-1})` used to normalise the radial momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean_u: f64,
    pub var_u: f64,
    pub var_radial: f64,
}

#[derive(Debug, Clone)]
pub struct TargetModel {
    d: usize,
    kind: TargetKind,
    form: Form,
    stats: NormalizationStats,
}

const QUAD_ABS_TOL: f64 = 1e-10;

impl TargetModel {
    pub fn new(kind: TargetKind, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        let form = match kind {
            TargetKind::StdGaussian => Form::Isotropic,
            TargetKind::AnisoGaussian { gamma } => {
                if !(0.0..1.0).contains(&gamma) {
                    return Err(Error::Config(format!(
                        "equicorrelation gamma must lie in [0, 1), got {gamma}"
                    )));
                }
                if gamma == 0.0 {
                    Form::Isotropic
                } else {
                    let a = 1.0 / (1.0 - gamma);
                    let b = -gamma / ((1.0 - gamma) * (1.0 + (d as f64 - 1.0) * gamma));
                    Form::Equicorrelated { a, b, gamma }
                }
            }
            TargetKind::IidLogistic => Form::Logistic,
            TargetKind::Student { nu } => {
                if !(nu > 4.0) || !nu.is_finite() {
                    return Err(Error::Config(format!(
                        "Student target needs nu > 4 so that Var[U] is finite \
                         (the potential test function is normalised by it), got {nu}"
                    )));
                }
                Form::Student { nu }
            }
        };
        let stats = cached_stats(form, d)?;
        Ok(Self {
            d,
            kind,
            form,
            stats,
        })
    }

    pub fn std_gaussian(d: usize) -> Self {
        Self::new(TargetKind::StdGaussian, d).expect("valid standard Gaussian")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    /// True when the potential restricted to a ray is quadratic.
    pub fn is_gaussian(&self) -> bool {
        matches!(self.form, Form::Isotropic | Form::Equicorrelated { .. })
    }

    pub fn normalization_stats(&self) -> NormalizationStats {
        self.stats
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::Dimension {
                expected: self.d,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn potential(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.potential_unchecked(x))
    }

    pub(crate) fn potential_unchecked(&self, x: &[f64]) -> f64 {
        match self.form {
            Form::Isotropic => 0.5 * dot(x, x),
            Form::Equicorrelated { a, b, .. } => {
                let s: f64 = x.iter().sum();
                0.5 * (a * dot(x, x) + b * s * s)
            }
            Form::Logistic => x.iter().map(|&xi| logistic_u(xi)).sum(),
            Form::Student { nu } => 0.5 * (self.d as f64 + nu) * (dot(x, x) / nu).ln_1p(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut g = vec![0.0; self.d];
        self.gradient_into(x, &mut g);
        Ok(g)
    }

    /// Writes `∇U(x)` into `out` (both of length `d`).
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self.form {
            Form::Isotropic => out.copy_from_slice(x),
            Form::Equicorrelated { a, b, .. } => apply_precision(a, b, x, out),
            Form::Logistic => {
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = (0.5 * xi).tanh();
                }
            }
            Form::Student { nu } => {
                let c = (self.d as f64 + nu) / (nu + dot(x, x));
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = c * xi;
                }
            }
        }
    }

    /// `(v|∇U(x))₊`, the state-dependent part of the event rate.
    pub fn reflection_rate(&self, x: &[f64], v: &[f64]) -> f64 {
        self.ray(x, v).rate(0.0).max(0.0)
    }

    /// `U(x + dt·v) - U(x)` in closed form.
    pub fn segment_potential_delta(&self, x: &[f64], v: &[f64], dt: f64) -> f64 {
        self.ray(x, v).potential_delta(dt)
    }

    pub fn ray<'a>(&self, x: &'a [f64], v: &'a [f64]) -> RaySlice<'a> {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(v.len(), self.d);
        let shape = match self.form {
            Form::Isotropic => RayShape::Affine {
                r0: dot(x, v),
                slope: 1.0,
            },
            Form::Equicorrelated { a, b, .. } => {
                let sx: f64 = x.iter().sum();
                let sv: f64 = v.iter().sum();
                RayShape::Affine {
                    r0: a * dot(x, v) + b * sx * sv,
                    slope: a * dot(v, v) + b * sv * sv,
                }
            }
            Form::Logistic => RayShape::Logistic { x, v },
            Form::Student { nu } => {
                let r0 = dot(x, v);
                let x2 = dot(x, x);
                RayShape::Student {
                    r0,
                    q0: nu + x2,
                    m: (nu + x2 - r0 * r0).max(nu),
                    scale: self.d as f64 + nu,
                }
            }
        };
        RaySlice { shape }
    }

    /// A draw from `π` (exact for every kind).
    pub fn sample_stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = vec![0.0; self.d];
        match self.form {
            Form::Isotropic => {
                for xi in x.iter_mut() {
                    *xi = standard_normal(rng);
                }
            }
            Form::Equicorrelated { gamma, .. } => {
                let s = (1.0 - gamma).sqrt();
                for xi in x.iter_mut() {
                    *xi = s * standard_normal(rng);
                }
                let common = gamma.sqrt() * standard_normal(rng);
                for xi in x.iter_mut() {
                    *xi += common;
                }
            }
            Form::Logistic => {
                for xi in x.iter_mut() {
                    let u = uniform(rng);
                    *xi = (u / (1.0 - u)).ln();
                }
            }
            Form::Student { nu } => {
                for xi in x.iter_mut() {
                    *xi = standard_normal(rng);
                }
                let w: f64 = ChiSquared::new(nu).expect("nu > 4").sample(rng);
                let c = (nu / w).sqrt();
                for xi in x.iter_mut() {
                    *xi *= c;
                }
            }
        }
        x
    }

    /// Upper bound of `(v|∇U(x+tv))₊` for `t ∈ [0, horizon]`.
    pub fn segment_bound(&self, x: &[f64], v: &[f64], horizon: f64) -> f64 {
        match self.ray(x, v).shape {
            RayShape::Affine { r0, slope } => (r0 + slope * horizon).max(0.0),
            RayShape::Logistic { v, .. } => v.iter().map(|vi| vi.abs()).sum(),
            RayShape::Student { m, scale, .. } => 0.5 * scale / m.sqrt(),
        }
    }
}

/// `(aI + b𝟙𝟙ᵀ)x`.
pub fn apply_precision(a: f64, b: f64, x: &[f64], out: &mut [f64]) {
    let s: f64 = x.iter().sum();
    for (o, &xi) in out.iter_mut().zip(x) {
        *o = a * xi + b * s;
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-y + 2·ln(1+e^y)`, written without overflow as `|y| + 2·ln1p(e^{-|y|})`.
#[inline]
fn logistic_u(y: f64) -> f64 {
    let a = y.abs();
    a + 2.0 * (-a).exp().ln_1p()
}

/// One-dimensional restriction `t ↦ U(x + t·v)`.
#[derive(Debug, Clone, Copy)]
pub struct RaySlice<'a> {
    shape: RayShape<'a>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum RayShape<'a> {
    /// Gaussian kinds: `dU/dt = r0 + slope·t`.
    Affine {
        r0: f64,
        slope: f64,
    },
    Logistic {
        x: &'a [f64],
        v: &'a [f64],
    },
    /// `dU/dt = scale·(r0+t)/(m + (r0+t)²)`, `q0 = ν + |x|² = m + r0²`.
    Student {
        r0: f64,
        q0: f64,
        m: f64,
        scale: f64,
    },
}

impl<'a> RaySlice<'a> {
    pub(crate) fn shape(&self) -> RayShape<'a> {
        self.shape
    }

    /// Signed directional derivative `(v|∇U(x+tv))`.
    pub fn rate(&self, t: f64) -> f64 {
        match self.shape {
            RayShape::Affine { r0, slope } => r0 + slope * t,
            RayShape::Logistic { x, v } => x
                .iter()
                .zip(v)
                .map(|(&xi, &vi)| vi * (0.5 * (xi + t * vi)).tanh())
                .sum(),
            RayShape::Student { r0, m, scale, .. } => {
                let s = r0 + t;
                scale * s / (m + s * s)
            }
        }
    }

    /// `U(x+tv) - U(x)`.
    pub fn potential_delta(&self, t: f64) -> f64 {
        match self.shape {
            RayShape::Affine { r0, slope } => t * (r0 + 0.5 * slope * t),
            RayShape::Logistic { x, v } => x
                .iter()
                .zip(v)
                .map(|(&xi, &vi)| logistic_u(xi + t * vi) - logistic_u(xi))
                .sum(),
            RayShape::Student { r0, q0, scale, .. } => {
                0.5 * scale * (t * (2.0 * r0 + t) / q0).ln_1p()
            }
        }
    }

    /// Velocity-direction component `r0 = (v|∇U(x))` for affine rays.
    pub fn initial_rate(&self) -> f64 {
        self.rate(0.0)
    }
}

fn cached_stats(form: Form, d: usize) -> Result<NormalizationStats> {
    type Key = (u8, usize, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, NormalizationStats>>> = OnceLock::new();
    let key: Key = match form {
        Form::Isotropic => (0, d, 0),
        Form::Equicorrelated { gamma, .. } => (1, d, gamma.to_bits()),
        Form::Logistic => (2, d, 0),
        Form::Student { nu } => (3, d, nu.to_bits()),
    };
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().expect("stats cache").get(&key) {
        return Ok(*s);
    }
    let stats = compute_stats(form, d)?;
    cache.lock().expect("stats cache").insert(key, stats);
    Ok(stats)
}

fn compute_stats(form: Form, d: usize) -> Result<NormalizationStats> {
    let df = d as f64;
    Ok(match form {
        // 2U is χ²_d after whitening.
        Form::Isotropic => NormalizationStats {
            mean_u: 0.5 * df,
            var_u: 0.5 * df,
            var_radial: 1.0,
        },
        Form::Equicorrelated { a, b, .. } => NormalizationStats {
            mean_u: 0.5 * df,
            var_u: 0.5 * df,
            // E|Σ⁻¹X|²/d = tr(Σ⁻¹)/d.
            var_radial: a + b,
        },
        Form::Logistic => {
            let (m, v) = logistic_coordinate_moments()?;
            NormalizationStats {
                mean_u: df * m,
                var_u: df * v,
                var_radial: 1.0 / 3.0,
            }
        }
        Form::Student { nu } => {
            let (m, v) = student_moments(df, nu)?;
            NormalizationStats {
                mean_u: m,
                var_u: v,
                var_radial: (df + nu) / (df + nu + 2.0),
            }
        }
    })
}

/// Mean and variance of `U` for one logistic coordinate.
fn logistic_coordinate_moments() -> Result<(f64, f64)> {
    let tol = Tolerance::new(QUAD_ABS_TOL * 1e-2, 1e-13);
    // Symmetric density: integrate over [0, ∞) and double.
    let density = |y: f64| (-logistic_u(y)).exp();
    let mean = 2.0 * integrate_to_infinity(|y| logistic_u(y) * density(y), 0.0, tol)?.value;
    let var = 2.0
        * integrate_to_infinity(
            |y| {
                let c = logistic_u(y) - mean;
                c * c * density(y)
            },
            0.0,
            tol,
        )?
        .value;
    Ok((mean, var))
}

/// Mean and variance of `U = ((d+ν)/2)·ln(1+|X|²/ν)` under the Student law.
///
/// With `t = ln(1+|X|²/ν)`, `e^{-t}` is Beta(ν/2, d/2), so `t` has density
/// `e^{-νt/2}(1-e^{-t})^{d/2-1}/B(ν/2, d/2)` on `(0, ∞)`. The integral is
/// split at the scale `ln(1+d/ν)` of the bulk.
fn student_moments(d: f64, nu: f64) -> Result<(f64, f64)> {
    let alpha = 0.5 * nu;
    let beta = 0.5 * d;
    let ln_b = ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta);
    let log_density = |t: f64| {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        -alpha * t + (beta - 1.0) * (-(-t).exp_m1()).ln() - ln_b
    };
    let scale = (d / nu).ln_1p();
    let tol = Tolerance::new(QUAD_ABS_TOL * 1e-2, 1e-12);
    let moment = |k: i32, centre: f64| -> Result<f64> {
        let f = |t: f64| (t - centre).powi(k) * log_density(t).exp();
        let mut total = 0.0;
        // Pieces [0, s], [s, 4s], [4s, ∞).
        total += integrate(f, 0.0, scale, tol)?.value;
        total += integrate(f, scale, 4.0 * scale, tol)?.value;
        total += integrate_to_infinity(f, 4.0 * scale, tol)?.value;
        Ok(total)
    };
    let mass = moment(0, 0.0)?;
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::Quadrature(format!(
            "Student radial density integrates to {mass} (d = {d}, nu = {nu})"
        )));
    }
    let mean_t = moment(1, 0.0)?;
    let var_t = moment(2, mean_t)?;
    let k = 0.5 * (d + nu);
    Ok((k * mean_t, k * k * var_t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_moments_against_frozen_values() {
        let (m, v) = logistic_coordinate_moments().unwrap();
        assert!((m - 2.0).abs() < 1e-11);
        assert!((v - 0.710_131_866_303_547_127).abs() < 1e-11);
    }

    #[test]
    fn student_moments_against_digamma_values() {
        // Oracle: E[U] = k(ψ(k) - ψ(ν/2)), Var[U] = k²(ψ'(ν/2) - ψ'(k)),
        // k = (d+ν)/2, evaluated in 40-digit arithmetic.
        let cases = [
            (
                10.0,
                5.0,
                9.327_006_327_006_327_006,
                19.560_479_591_448_622_418,
            ),
            (
                10.0,
                10.0,
                7.456_349_206_349_206_349,
                11.615_662_005_542_957_924,
            ),
            (
                40.0,
                100.0,
                23.754_199_351_605_271_154,
                28.484_151_955_602_531_516,
            ),
            (
                100.0,
                10.0,
                137.065_338_322_601_494_42,
                613.998_911_002_046_883_35,
            ),
            (
                40.0,
                10_000.0,
                20.041_946_906_145_742_079,
                20.084_008_400_002_119_522,
            ),
            (
                3.0,
                6.0,
                2.097_389_660_674_777_929_5,
                2.960_731_517_136_625_241_2,
            ),
        ];
        for (d, nu, mean, var) in cases {
            let (m, v) = student_moments(d, nu).unwrap();
            assert!(
                (m - mean).abs() < 1e-9 * mean,
                "d={d} nu={nu}: {m} vs {mean}"
            );
            assert!((v - var).abs() < 1e-8 * var, "d={d} nu={nu}: {v} vs {var}");
        }
    }
}
