//! Next-event times along a ray.
//!
//! Gaussian kinds have an affine rate and Student targets a rate whose
//! integral is a logarithm, so both are inverted exactly. The logistic target
//! uses thinning against the bound `‖v‖₁` (each `|∂ᵢU| < 1`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{uniform, unit_exponential};
use crate::targets::{RayShape, RaySlice, TargetModel};
use crate::{Error, Result};

/// Default first thinning window; it doubles each time no event fires.
pub const THINNING_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Reflection,
    Refreshment,
    Horizon,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClockDiagnostics {
    pub proposals: u64,
    pub bound_violations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventProposal {
    pub dt: f64,
    pub kind: EventKind,
    pub diagnostics: ClockDiagnostics,
}

impl EventProposal {
    fn new(dt: f64, kind: EventKind) -> Self {
        Self {
            dt,
            kind,
            diagnostics: ClockDiagnostics::default(),
        }
    }
}

/// Solves `∫₀ᵗ (r0 + slope·s)₊ ds = e` for `t`.
pub fn next_affine_event(r0: f64, slope: f64, e: f64) -> Result<f64> {
    if !(slope > 0.0) {
        return Err(Error::domain(
            "next_affine_event",
            format!("slope must be positive, got {slope}"),
        ));
    }
    Ok(affine_inverse(r0, slope, e))
}

#[inline]
fn affine_inverse(r0: f64, slope: f64, e: f64) -> f64 {
    if r0 >= 0.0 {
        // (-r0 + √(r0² + 2·slope·e))/slope without cancellation.
        2.0 * e / (r0 + (r0 * r0 + 2.0 * slope * e).sqrt())
    } else {
        -r0 / slope + (2.0 * e / slope).sqrt()
    }
}

/// Integrated positive rate `Λ(t) = ∫₀ᵗ (r0 + slope·s)₊ ds`.
pub fn affine_integrated_rate(r0: f64, slope: f64, t: f64) -> f64 {
    let t0 = if r0 >= 0.0 { 0.0 } else { -r0 / slope };
    if t <= t0 {
        return 0.0;
    }
    let s0 = r0 + slope * t0;
    let dt = t - t0;
    dt * (s0 + 0.5 * slope * dt)
}

/// Exact event time for the spherical Student potential.
///
/// On a unit-speed ray `ν + |x+tv|² = m + (r0+t)²`, so the integrated rate
/// from `t₀ = max(0, -r0)` is `((d+ν)/2)·ln((m + (r0+t)²)/(m + (r0+t₀)²))`,
/// which inverts in closed form.
pub fn next_student_event(ray: &RaySlice<'_>, e: f64) -> f64 {
    match ray.shape() {
        RayShape::Student { r0, m, scale, .. } => student_inverse(r0, m, scale, e),
        _ => panic!("next_student_event called on a non-Student ray"),
    }
}

#[inline]
fn student_inverse(r0: f64, m: f64, scale: f64, e: f64) -> f64 {
    let c = 2.0 * e / scale;
    let em1 = c.exp_m1();
    if r0 < 0.0 {
        -r0 + (m * em1).sqrt()
    } else {
        em1 * (r0 * r0 + m) / ((r0 * r0 * c.exp() + m * em1).sqrt() + r0)
    }
}

/// Integrated positive rate of the Student ray, for residual checks.
pub fn student_integrated_rate(ray: &RaySlice<'_>, t: f64) -> f64 {
    match ray.shape() {
        RayShape::Student { r0, m, scale, .. } => {
            let t0 = (-r0).max(0.0);
            if t <= t0 {
                return 0.0;
            }
            let s0 = r0 + t0;
            let s = r0 + t;
            0.5 * scale * ((s * s - s0 * s0) / (m + s0 * s0)).ln_1p()
        }
        _ => panic!("student_integrated_rate called on a non-Student ray"),
    }
}

/// Thinning over `[0, horizon]` against the constant bound
/// `target.segment_bound(x, v, horizon)`.
///
/// A proposal whose rate exceeds the bound is an invariant breach and panics.
pub fn next_thinned_event<R: Rng + ?Sized>(
    target: &TargetModel,
    x: &[f64],
    v: &[f64],
    horizon: f64,
    rng: &mut R,
) -> EventProposal {
    assert!(horizon > 0.0, "thinning horizon must be positive");
    let bound = target.segment_bound(x, v, horizon);
    let ray = target.ray(x, v);
    let mut diag = ClockDiagnostics::default();
    if bound <= 0.0 {
        return EventProposal {
            dt: horizon,
            kind: EventKind::Horizon,
            diagnostics: diag,
        };
    }
    let mut t = 0.0;
    loop {
        t += unit_exponential(rng) / bound;
        if t >= horizon {
            return EventProposal {
                dt: horizon,
                kind: EventKind::Horizon,
                diagnostics: diag,
            };
        }
        diag.proposals += 1;
        let rate = ray.rate(t).max(0.0);
        if rate > bound * (1.0 + 1e-12) {
            panic!(
                "thinning bound violated: rate {rate} > bound {bound} at t = {t} \
                 for {}",
                target.kind().label()
            );
        }
        if uniform(rng) * bound < rate {
            return EventProposal {
                dt: t,
                kind: EventKind::Reflection,
                diagnostics: diag,
            };
        }
    }
}

/// Time to the next reflection along the current ray, or a `Horizon`
/// proposal when a thinning window of length `window` passes without one.
pub fn next_reflection<R: Rng + ?Sized>(
    target: &TargetModel,
    x: &[f64],
    v: &[f64],
    window: f64,
    rng: &mut R,
) -> EventProposal {
    let ray = target.ray(x, v);
    match ray.shape() {
        RayShape::Affine { r0, slope } => {
            let e = unit_exponential(rng);
            EventProposal::new(affine_inverse(r0, slope, e), EventKind::Reflection)
        }
        RayShape::Student { r0, m, scale, .. } => {
            let e = unit_exponential(rng);
            EventProposal::new(student_inverse(r0, m, scale, e), EventKind::Reflection)
        }
        RayShape::Logistic { .. } => next_thinned_event(target, x, v, window, rng),
    }
}

/// Races a reflection clock against refreshment at rate `rho`.
///
/// An infinite `reflection_dt` with `rho = 0` yields a `Horizon` proposal
/// with infinite `dt`.
pub fn superpose_refresh<R: Rng + ?Sized>(
    reflection_dt: f64,
    rho: f64,
    rng: &mut R,
) -> EventProposal {
    assert!(rho >= 0.0, "refreshment rate must be non-negative");
    let refresh_dt = if rho > 0.0 {
        unit_exponential(rng) / rho
    } else {
        f64::INFINITY
    };
    if refresh_dt < reflection_dt {
        EventProposal::new(refresh_dt, EventKind::Refreshment)
    } else if reflection_dt.is_finite() {
        EventProposal::new(reflection_dt, EventKind::Reflection)
    } else {
        EventProposal::new(f64::INFINITY, EventKind::Horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_examples() {
        assert!((next_affine_event(0.0, 1.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((next_affine_event(-1.0, 1.0, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((next_affine_event(1.0, 1.0, 1.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(next_affine_event(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn superposition_without_refresh_is_reflection() {
        let mut rng = crate::rng::stream(1);
        let p = superpose_refresh(0.7, 0.0, &mut rng);
        assert_eq!(p.kind, EventKind::Reflection);
        assert_eq!(p.dt, 0.7);
        let p = superpose_refresh(f64::INFINITY, 2.0, &mut rng);
        assert_eq!(p.kind, EventKind::Refreshment);
    }
}
