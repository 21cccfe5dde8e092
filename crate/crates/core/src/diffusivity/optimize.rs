use super::closed_form::sigma2_b;
use crate::{Error, Result, Scalar};

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum<T> {
    pub arg: T,
    pub value: T,
    pub iterations: usize,
    /// Steps that fell back to golden-section search.
    pub golden_steps: usize,
}

const MAX_ITER: usize = 500;

/// Brent's derivative-free maximisation of `f` on `[lo, hi]`: parabolic
/// interpolation through the three best points, with a golden-section step
/// whenever the parabola is degenerate or leaves the bracket.
///
/// Fails when the maximiser sits on the bracket boundary (no interior
/// maximum).
pub fn maximize_brent<T: Scalar, F: FnMut(T) -> Result<T>>(
    mut f: F,
    lo: T,
    hi: T,
    xtol: T,
) -> Result<Maximum<T>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Optimisation(format!(
            "invalid bracket ({lo:?}, {hi:?})"
        )));
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let cgold = T::lit(0.381_966_011_250_105_1);
    let sqrt_eps = T::epsilon().sqrt();
    let (mut a, mut b) = (lo, hi);
    let mut x = a + cgold * (b - a);
    let (mut w, mut v) = (x, x);
    // Minimise g = -f.
    let mut fx = -f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut d = T::zero();
    let mut e = T::zero();
    let mut golden_steps = 0;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let xm = half * (a + b);
        let tol1 = sqrt_eps * x.abs() + xtol / T::lit(3.0);
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (half * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            golden_steps += 1;
            e = if x >= xm { a - x } else { b - x };
            d = cgold * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = -f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    if iterations >= MAX_ITER {
        return Err(Error::Optimisation(format!(
            "no convergence after {MAX_ITER} iterations, last x = {x:?}"
        )));
    }
    let edge = T::lit(4.0) * (sqrt_eps * x.abs() + xtol);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if x - lo <= edge || hi - x <= edge || -fx < f_lo || -fx < f_hi {
        return Err(Error::Optimisation(format!(
            "no interior maximum in ({lo:?}, {hi:?}): search ended at {x:?} \
             with f = {:?}; f(lo) = {f_lo:?}, f(hi) = {f_hi:?}",
            -fx
        )));
    }
    Ok(Maximum {
        arg: x,
        value: -fx,
        iterations,
        golden_steps,
    })
}

/// Maximiser `ρ*` of `σ_B²` in `(lo, hi)`, to `|Δρ| ≤ 1e-8` in double
/// precision (limited by `√ε` in single precision).
pub fn optimize_sigma2_b<T: Scalar>(lo: T, hi: T) -> Result<Maximum<T>> {
    if !(lo > T::zero()) {
        return Err(Error::Optimisation(format!(
            "bracket must be positive, got lo = {lo:?}"
        )));
    }
    maximize_brent(sigma2_b, lo, hi, T::lit(1e-8))
}
