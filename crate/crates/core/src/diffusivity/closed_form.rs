use std::sync::OnceLock;

use crate::specialfn::{erfcx, mills_ratio_coefficients, omega};
use crate::{Error, Result, Scalar};

/// Below this `ρ` both coefficients are summed from Maclaurin series whose
/// leading cancellations have been removed analytically.
pub const SERIES_SWITCH: f64 = 0.25;

const SERIES_TERMS: usize = 48;

/// `σ_F² = √(32/π)`, the `ρ = 0` FECMC diffusion coefficient.
pub fn sigma2_f_zero<T: Scalar>() -> T {
    (T::lit(32.0) / T::PI()).sqrt()
}

fn check_rho<T: Scalar>(op: &'static str, rho: T) -> Result<()> {
    if rho.is_nan() || rho <= T::zero() || rho.is_infinite() {
        return Err(Error::domain(
            op,
            format!("requires finite rho > 0, got {rho:?}"),
        ));
    }
    Ok(())
}

/// Mills ratio `M(ρ) = Ω(ρ)/ρ = √(π/2)·erfcx(ρ/√2)`.
fn mills<T: Scalar>(rho: T) -> Result<T> {
    Ok(T::FRAC_PI_2().sqrt() * erfcx(rho * T::FRAC_1_SQRT_2())?)
}

fn horner<T: Scalar>(coeffs: &[f64], x: T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// `σ_F²(ρ) = σ_F²·(1 - N²/(ρ⁴Ω(2-Ω)))`, `N = ρ² - ρ√(π/2) + Ω`.
///
/// `N = ρ³·S(ρ)` with `S = Σ_{k≥2} m_k ρ^{k-2}` over the Mills-ratio
/// coefficients, so the correction is `ρS²/(M(2-ρM))` without the `0/0`
/// that the raw form has at small `ρ`.
pub fn sigma2_f<T: Scalar>(rho: T) -> Result<T> {
    check_rho("sigma2_f", rho)?;
    let two = T::lit(2.0);
    let correction = if rho < T::lit(SERIES_SWITCH) {
        let s = horner(&f_series()[..], rho);
        let m = mills(rho)?;
        rho * s * s / (m * (two - rho * m))
    } else {
        let om = omega(rho)?;
        let n = rho * rho - rho * T::FRAC_PI_2().sqrt() + om;
        let r2 = rho * rho;
        n * n / (r2 * r2 * om * (two - om))
    };
    Ok(sigma2_f_zero::<T>() * (T::one() - correction))
}

/// `σ_B²(ρ) = (8/ρ⁴)(ρ³ - ρ²√(8/π) + ρ - √(8/π)((1+ρ²)Ω(ρ) - ρ²)²/Ω(2ρ))`.
///
/// Writing `Ω(ρ) = ρM(ρ)` gives `σ_B² = 8Q/ρ³` with
/// `Q = ρ² - ρ√(8/π) + 1 - √(2/π)·P²/M(2ρ)`, `P = (1+ρ²)M(ρ) - ρ`.
/// `Q = O(ρ⁴)`; below the switch its series from order 4 on is summed.
pub fn sigma2_b<T: Scalar>(rho: T) -> Result<T> {
    check_rho("sigma2_b", rho)?;
    if rho < T::lit(SERIES_SWITCH) {
        // 8·Σ_{k≥4} q_k ρ^{k-3}
        return Ok(T::lit(8.0) * rho * horner(&b_series()[..], rho));
    }
    let om = omega(rho)?;
    let om2 = omega(T::lit(2.0) * rho)?;
    let r2 = rho * rho;
    let c = (T::lit(8.0) / T::PI()).sqrt();
    let p = (T::one() + r2) * om - r2;
    let bracket = r2 * rho - r2 * c + rho - c * p * p / om2;
    Ok(T::lit(8.0) / (r2 * r2) * bracket)
}

/// Coefficients of `S(ρ) = Σ_{k≥2} m_k ρ^{k-2}`.
fn f_series() -> &'static Vec<f64> {
    static S: OnceLock<Vec<f64>> = OnceLock::new();
    S.get_or_init(|| mills_ratio_coefficients::<f64>(SERIES_TERMS + 2)[2..].to_vec())
}

/// Coefficients `q_4, q_5, …` of `Q(ρ)`, built by power-series arithmetic.
fn b_series() -> &'static Vec<f64> {
    static S: OnceLock<Vec<f64>> = OnceLock::new();
    S.get_or_init(|| {
        let q = q_series(SERIES_TERMS + 4);
        q[4..].to_vec()
    })
}

/// Full Maclaurin coefficients of `Q` (orders 0..n); the first four vanish
/// analytically and are only kept for testing.
pub(crate) fn q_series(n: usize) -> Vec<f64> {
    let m = mills_ratio_coefficients::<f64>(n);
    // P = (1+ρ²)M - ρ
    let mut p: Vec<f64> = (0..n)
        .map(|k| m[k] + if k >= 2 { m[k - 2] } else { 0.0 })
        .collect();
    p[1] -= 1.0;
    // M(2ρ)
    let m2: Vec<f64> = (0..n).map(|k| m[k] * 2f64.powi(k as i32)).collect();
    let p2: Vec<f64> = (0..n)
        .map(|k| (0..=k).map(|j| p[j] * p[k - j]).sum())
        .collect();
    // P²/M(2ρ) by series division.
    let mut ratio = vec![0.0; n];
    for k in 0..n {
        let acc: f64 = (1..=k).map(|j| m2[j] * ratio[k - j]).sum();
        ratio[k] = (p2[k] - acc) / m2[0];
    }
    let c = (2.0 / std::f64::consts::PI).sqrt();
    let mut q: Vec<f64> = ratio.iter().map(|r| -c * r).collect();
    q[0] += 1.0;
    q[1] -= (8.0 / std::f64::consts::PI).sqrt();
    q[2] += 1.0;
    q
}

/// `Var[∫₀ᵗ Y_s ds] = (4/a)t - (4/a²)(1 - e^{-at})` for the stationary OU
/// process with variance 2 and rate `a`.
pub fn ou_integrated_variance<T: Scalar>(a: T, t: T) -> Result<T> {
    if a.is_nan() || a <= T::zero() || t.is_nan() || t < T::zero() {
        return Err(Error::domain(
            "ou_integrated_variance",
            format!("requires a > 0 and t >= 0, got a = {a:?}, t = {t:?}"),
        ));
    }
    let at = a * t;
    let four = T::lit(4.0);
    // at - (1 - e^{-at}) = at + expm1(-at), summed as a series when small.
    let g = if at < T::lit(1e-3) {
        let x2 = at * at;
        x2 * (T::lit(0.5) - at / T::lit(6.0) + x2 / T::lit(24.0) - x2 * at / T::lit(120.0))
    } else {
        at + (-at).exp_m1()
    };
    Ok(four * g / (a * a))
}

/// Limiting variances `(ς_h², ς_g²) = (8/σ_F², σ_F²/4)` of the ergodic
/// averages of the normalised potential and its time derivative.
pub fn asymptotic_variances<T: Scalar>() -> (T, T) {
    let s = sigma2_f_zero::<T>();
    (T::lit(8.0) / s, s / T::lit(4.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_series_starts_at_order_four() {
        let q = q_series(12);
        for (k, qk) in q.iter().take(4).enumerate() {
            assert!(qk.abs() < 1e-14, "q_{k} = {qk}");
        }
        assert!((q[4] - 0.5).abs() < 1e-14, "q_4 = {}", q[4]);
    }

    #[test]
    fn series_and_direct_forms_agree_at_switch() {
        let r = SERIES_SWITCH;
        let below = sigma2_b(r * (1.0 - 1e-12)).unwrap();
        let above = sigma2_b(r).unwrap();
        assert!((below - above).abs() < 1e-11 * above);
        let below = sigma2_f(r * (1.0 - 1e-12)).unwrap();
        let above = sigma2_f(r).unwrap();
        assert!((below - above).abs() < 1e-12 * above);
    }
}
