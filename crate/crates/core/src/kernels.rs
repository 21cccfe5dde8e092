//! Velocity-jump kernels: BPS reflection, FECMC stochastic reflection with the
//! naive orthogonal switch, and full refreshment from `Unif(S^{d-1})`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{standard_normal, uniform};
use crate::specialfn::RadialRefreshLaw;
use crate::targets::dot;
use crate::{Error, Result};

/// Default per-reflection probability of the orthogonal switch.
pub const DEFAULT_SWITCH_PROB: f64 = 0.05;

const DEGENERATE_PERP: f64 = 1e-14;
const DEPENDENT_PAIR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bps,
    Fecmc,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Bps => "bps",
            Algorithm::Fecmc => "fecmc",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub algorithm: Algorithm,
    pub rho: f64,
    #[serde(default = "default_switch_prob")]
    pub switch_prob: f64,
}

fn default_switch_prob() -> f64 {
    DEFAULT_SWITCH_PROB
}

impl KernelSpec {
    pub fn bps(rho: f64) -> Self {
        Self {
            algorithm: Algorithm::Bps,
            rho,
            switch_prob: 0.0,
        }
    }

    pub fn fecmc(rho: f64) -> Self {
        Self {
            algorithm: Algorithm::Fecmc,
            rho,
            switch_prob: DEFAULT_SWITCH_PROB,
        }
    }

    pub fn with_switch_prob(mut self, p: f64) -> Self {
        self.switch_prob = p;
        self
    }

    /// Checks parameter ranges and compatibility with dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(Error::Config(format!(
                "refreshment rate must be finite and >= 0, got {}",
                self.rho
            )));
        }
        if !(0.0..=1.0).contains(&self.switch_prob) {
            return Err(Error::Config(format!(
                "switch probability must lie in [0, 1], got {}",
                self.switch_prob
            )));
        }
        match self.algorithm {
            Algorithm::Bps if self.rho <= 0.0 => Err(Error::Config(
                "BPS is not ergodic without refreshment; rho must be > 0".into(),
            )),
            Algorithm::Fecmc if d < 3 => Err(Error::Config(format!(
                "FECMC needs d >= 3 (an orthonormal pair orthogonal to the gradient), got d = {d}"
            ))),
            _ => Ok(()),
        }
    }
}

/// `v - 2(n|v)n` with `n = grad/‖grad‖`; `v` unchanged when `grad = 0`.
pub fn bps_reflect(v: &[f64], grad: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    bps_reflect_in_place(&mut out, grad);
    out
}

pub fn bps_reflect_in_place(v: &mut [f64], grad: &[f64]) {
    let g2 = dot(grad, grad);
    if g2 == 0.0 {
        return;
    }
    let c = 2.0 * dot(v, grad) / g2;
    for (vi, gi) in v.iter_mut().zip(grad) {
        *vi -= c * gi;
    }
}

/// Reusable buffers for [`fecmc_reflect_in_place`].
#[derive(Debug, Clone)]
pub struct FecmcScratch {
    n: Vec<f64>,
    e1: Vec<f64>,
    e2: Vec<f64>,
}

impl FecmcScratch {
    pub fn new(d: usize) -> Self {
        Self {
            n: vec![0.0; d],
            e1: vec![0.0; d],
            e2: vec![0.0; d],
        }
    }
}

/// FECMC stochastic reflection. Returns the new velocity and whether the
/// orthogonal switch was applied.
pub fn fecmc_reflect<R: Rng + ?Sized>(
    v: &[f64],
    grad: &[f64],
    p: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, bool)> {
    let law = RadialRefreshLaw::new(v.len())?;
    let mut out = v.to_vec();
    let mut scratch = FecmcScratch::new(v.len());
    let switched = fecmc_reflect_in_place(&mut out, grad, p, &law, &mut scratch, rng);
    Ok((out, switched))
}

/// In-place FECMC reflection.
///
/// Steps: with probability `p` apply `A = I - (e₁-e₂)(e₁-e₂)ᵀ` to the part
/// of `v` orthogonal to `n`, for a random orthonormal pair `e₁, e₂ ⟂ n`; then
/// draw `w ~ q` and set `v = -w·n + √(1-w²)·v⊥/‖v⊥‖`.
///
/// Panics if `grad = 0`: the reflection rate vanishes there and the kernel
/// is never invoked.
pub fn fecmc_reflect_in_place<R: Rng + ?Sized>(
    v: &mut [f64],
    grad: &[f64],
    p: f64,
    law: &RadialRefreshLaw,
    scratch: &mut FecmcScratch,
    rng: &mut R,
) -> bool {
    let gnorm = dot(grad, grad).sqrt();
    assert!(gnorm > 0.0, "FECMC reflection at a stationary point of U");
    let n = &mut scratch.n;
    for (ni, gi) in n.iter_mut().zip(grad) {
        *ni = gi / gnorm;
    }
    let vpar = dot(v, n);
    for (vi, ni) in v.iter_mut().zip(n.iter()) {
        *vi -= vpar * ni;
    }
    let mut perp = dot(v, v).sqrt();
    if perp < DEGENERATE_PERP {
        random_unit_orthogonal(v, n, rng);
        perp = 1.0;
    }
    let switched = p > 0.0 && uniform(rng) < p;
    if switched {
        orthonormal_pair(&mut scratch.e1, &mut scratch.e2, n, rng);
        let c: f64 = v
            .iter()
            .zip(scratch.e1.iter().zip(scratch.e2.iter()))
            .map(|(vi, (a, b))| vi * (a - b))
            .sum();
        for (vi, (a, b)) in v.iter_mut().zip(scratch.e1.iter().zip(scratch.e2.iter())) {
            *vi -= c * (a - b);
        }
    }
    let w = law.sample(rng);
    let s = (1.0 - w * w).sqrt() / perp;
    for (vi, ni) in v.iter_mut().zip(n.iter()) {
        *vi = s * *vi - w * ni;
    }
    switched
}

/// Fills `out` with a uniform unit vector orthogonal to the unit vector `n`.
fn random_unit_orthogonal<R: Rng + ?Sized>(out: &mut [f64], n: &[f64], rng: &mut R) {
    loop {
        for o in out.iter_mut() {
            *o = standard_normal(rng);
        }
        // Two projection passes keep orthogonality when the remainder is short.
        for _ in 0..2 {
            let c = dot(out, n);
            for (o, ni) in out.iter_mut().zip(n) {
                *o -= c * ni;
            }
        }
        let norm = dot(out, out).sqrt();
        if norm > DEPENDENT_PAIR {
            for o in out.iter_mut() {
                *o /= norm;
            }
            return;
        }
    }
}

/// Uniformly random orthonormal pair in `n^⊥` by Gram–Schmidt on Gaussian
/// vectors, redrawing when the projections are nearly dependent.
pub fn orthonormal_pair<R: Rng + ?Sized>(e1: &mut [f64], e2: &mut [f64], n: &[f64], rng: &mut R) {
    random_unit_orthogonal(e1, n, rng);
    loop {
        for o in e2.iter_mut() {
            *o = standard_normal(rng);
        }
        for _ in 0..2 {
            let cn = dot(e2, n);
            let c1 = dot(e2, e1);
            for ((o, ni), ai) in e2.iter_mut().zip(n).zip(e1.iter()) {
                *o -= cn * ni + c1 * ai;
            }
        }
        let norm = dot(e2, e2).sqrt();
        if norm > DEPENDENT_PAIR {
            for o in e2.iter_mut() {
                *o /= norm;
            }
            return;
        }
    }
}

/// Uniform draw from the unit sphere in `R^d`.
pub fn full_refresh<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let mut v = vec![0.0; d];
    full_refresh_into(&mut v, rng);
    v
}

pub fn full_refresh_into<R: Rng + ?Sized>(v: &mut [f64], rng: &mut R) {
    loop {
        for vi in v.iter_mut() {
            *vi = standard_normal(rng);
        }
        let norm = dot(v, v).sqrt();
        if norm > 0.0 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            return;
        }
    }
}
