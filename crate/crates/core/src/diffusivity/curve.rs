use serde::{Deserialize, Serialize};

use super::closed_form::{sigma2_b, sigma2_f};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    ClosedForm,
    GreenKubo { n_paths: usize, horizon: f64 },
}

/// Tabulated `(ρ, σ_F²(ρ), σ_B²(ρ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusivityCurve<T> {
    pub rho: Vec<T>,
    pub sigma2_f: Vec<T>,
    pub sigma2_b: Vec<T>,
    pub provenance: Provenance,
}

impl<T: Scalar> DiffusivityCurve<T> {
    pub fn closed_form(rho: &[T]) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::Config("empty rho grid".into()));
        }
        let sigma2_f = rho.iter().map(|&r| sigma2_f(r)).collect::<Result<_>>()?;
        let sigma2_b = rho.iter().map(|&r| sigma2_b(r)).collect::<Result<_>>()?;
        Ok(Self {
            rho: rho.to_vec(),
            sigma2_f,
            sigma2_b,
            provenance: Provenance::ClosedForm,
        })
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// True when `σ_F²` strictly decreases along an increasing grid.
    pub fn f_strictly_decreasing(&self) -> bool {
        self.sigma2_f.windows(2).all(|w| w[1] < w[0])
    }

    /// True when `σ_F² > σ_B²` at every grid point.
    pub fn f_dominates_b(&self) -> bool {
        self.sigma2_f.iter().zip(&self.sigma2_b).all(|(f, b)| f > b)
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + step * T::from_usize_lossy(i)).exp()
            }
        })
        .collect()
}
