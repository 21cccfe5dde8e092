use crate::specialfn::{erfcx, rayleigh_mgf_neg};
use crate::{Result, Scalar};

/// Constants of the resolvent functions `f_ρ = (ρ - L)⁻¹ x` of the
/// radial-momentum generators.
///
/// Both solutions share the negative branch
/// `f(x) = (k - 1/ρ²)e^{ρx} + x/ρ + 1/ρ²` on `x ≤ 0`, so `f(0) = k`. On
/// `x > 0`, with `A_c(x) = √(π/2)·erfcx((x+c)/√2)` and `B_c = 1 - c·A_c`:
///
/// - FECMC: `f(x) = (1 + Nf)·B_ρ(x)`, `Nf = E[f(-τ)]`, `τ ~ χ(2)`;
/// - BPS: `f(x) = (1 + 1/ρ²)B_ρ(x) + (k - 1/ρ²)e^{-ρx}B_{2ρ}(x)
///   - (x + A_ρ(x) - ρB_ρ(x))/ρ`.
///
/// `σ²(ρ) = 8·E[R·f(R)]` for `R ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventConstants<T> {
    pub rho: T,
    pub k_f: T,
    pub nf_f: T,
    pub k_b: T,
}

/// `k^F = m(-m + ρ² - ρ√(π/2) + 1)/(ρ²(1 - m²))`,
/// `Nf = (k^F - 1/ρ²)m - √(π/2)/ρ + 1/ρ²`,
/// `k^B = (2(1+ρ²)m - m₂ - 1)/(ρ²(1 - m₂))`,
/// with `m = E[e^{-ρτ}]`, `m₂ = E[e^{-2ρτ}]`.
pub fn resolvent_constants<T: Scalar>(rho: T) -> Result<ResolventConstants<T>> {
    if rho.is_nan() || rho <= T::zero() {
        return Err(crate::Error::domain(
            "resolvent_constants",
            format!("requires rho > 0, got {rho:?}"),
        ));
    }
    let one = T::one();
    let r2 = rho * rho;
    let sqrt_half_pi = T::FRAC_PI_2().sqrt();
    let m = rayleigh_mgf_neg(rho)?;
    let m2 = rayleigh_mgf_neg(T::lit(2.0) * rho)?;
    let k_f = m * (-m + r2 - rho * sqrt_half_pi + one) / (r2 * (one - m * m));
    let nf_f = (k_f - one / r2) * m - sqrt_half_pi / rho + one / r2;
    let k_b = (T::lit(2.0) * (one + r2) * m - m2 - one) / (r2 * (one - m2));
    Ok(ResolventConstants {
        rho,
        k_f,
        nf_f,
        k_b,
    })
}

impl<T: Scalar> ResolventConstants<T> {
    fn negative_branch(&self, k: T, x: T) -> T {
        let r2 = self.rho * self.rho;
        (k - r2.recip()) * (self.rho * x).exp() + x / self.rho + r2.recip()
    }

    fn a(c: T, x: T) -> Result<T> {
        Ok(T::FRAC_PI_2().sqrt() * erfcx((x + c) * T::FRAC_1_SQRT_2())?)
    }

    fn b(c: T, x: T) -> Result<T> {
        Ok(T::one() - c * Self::a(c, x)?)
    }

    /// `f^F_ρ(x)`.
    pub fn f_f(&self, x: T) -> Result<T> {
        if x <= T::zero() {
            return Ok(self.negative_branch(self.k_f, x));
        }
        Ok((T::one() + self.nf_f) * Self::b(self.rho, x)?)
    }

    /// `f^B_ρ(x)`.
    pub fn f_b(&self, x: T) -> Result<T> {
        if x <= T::zero() {
            return Ok(self.negative_branch(self.k_b, x));
        }
        let rho = self.rho;
        let inv_r2 = (rho * rho).recip();
        let a1 = Self::a(rho, x)?;
        let b1 = T::one() - rho * a1;
        let b2 = Self::b(T::lit(2.0) * rho, x)?;
        Ok(
            (T::one() + inv_r2) * b1 + (self.k_b - inv_r2) * (-rho * x).exp() * b2
                - (x + a1 - rho * b1) / rho,
        )
    }
}
