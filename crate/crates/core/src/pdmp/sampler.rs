use rand::Rng;
use serde::{Deserialize, Serialize};

use super::observe::TrajectoryObserver;
use super::skeleton::{EventSkeleton, EventTag, SkeletonHeader};
use crate::event_clock::{
    next_reflection, superpose_refresh, ClockDiagnostics, EventKind, THINNING_WINDOW,
};
use crate::kernels::{
    bps_reflect_in_place, fecmc_reflect_in_place, full_refresh_into, Algorithm, FecmcScratch,
    KernelSpec,
};
use crate::rng::{stream, Stream};
use crate::specialfn::RadialRefreshLaw;
use crate::targets::TargetModel;
use crate::{Error, Result};

/// Hard cap on the number of events in one run.
pub const EVENT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub kernel: KernelSpec,
    pub horizon: f64,
    pub seed: u64,
}

/// Counters from one run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunSummary {
    pub horizon: f64,
    pub reflections: u64,
    pub refreshments: u64,
    pub switches: u64,
    pub thinning: ClockDiagnostics,
}

impl RunSummary {
    pub fn events(&self) -> u64 {
        self.reflections + self.refreshments
    }
}

/// Stationary run over `[0, horizon]` with the full skeleton recorded.
pub fn run_sampler(
    target: &TargetModel,
    kernel: &KernelSpec,
    horizon: f64,
    seed: u64,
) -> Result<EventSkeleton> {
    let header = SkeletonHeader {
        d: target.dim(),
        target: target.kind(),
        kernel: *kernel,
        seed,
    };
    let mut skeleton = EventSkeleton::new(header);
    let mut rng = stream(seed);
    run_sampler_with(target, kernel, horizon, &mut rng, &mut skeleton)?;
    Ok(skeleton)
}

/// Stationary run streaming into `observer`: `X₀ ~ π`, `V₀ ~ Unif(S^{d-1})`.
pub fn run_sampler_with<O: TrajectoryObserver>(
    target: &TargetModel,
    kernel: &KernelSpec,
    horizon: f64,
    rng: &mut Stream,
    observer: O,
) -> Result<RunSummary> {
    kernel.validate(target.dim())?;
    let x = target.sample_stationary(rng);
    let mut v = vec![0.0; target.dim()];
    full_refresh_into(&mut v, rng);
    run_from_state(target, kernel, x, v, horizon, rng, observer)
}

/// Runs from a given state.
pub fn run_from_state<R: Rng + ?Sized, O: TrajectoryObserver>(
    target: &TargetModel,
    kernel: &KernelSpec,
    mut x: Vec<f64>,
    mut v: Vec<f64>,
    horizon: f64,
    rng: &mut R,
    mut observer: O,
) -> Result<RunSummary> {
    let d = target.dim();
    kernel.validate(d)?;
    if x.len() != d || v.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: if x.len() != d { x.len() } else { v.len() },
        });
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::Config(format!(
            "horizon must be finite and >= 0, got {horizon}"
        )));
    }
    let law = match kernel.algorithm {
        Algorithm::Fecmc => Some(RadialRefreshLaw::new(d)?),
        Algorithm::Bps => None,
    };
    let mut scratch = FecmcScratch::new(d);
    let mut grad = vec![0.0; d];
    let mut summary = RunSummary {
        horizon,
        ..Default::default()
    };

    observer.event(0.0, EventTag::Init, &x, &v);
    if horizon == 0.0 {
        return Ok(summary);
    }

    let mut t = 0.0;
    let mut window = THINNING_WINDOW;
    loop {
        if summary.events() >= EVENT_BUDGET {
            return Err(Error::EventBudget {
                events: summary.events(),
                time: t,
            });
        }
        let remaining = horizon - t;
        let refl = next_reflection(target, &x, &v, window.min(remaining), rng);
        summary.thinning.proposals += refl.diagnostics.proposals;
        summary.thinning.bound_violations += refl.diagnostics.bound_violations;
        let refl_dt = match refl.kind {
            EventKind::Reflection => refl.dt,
            _ => f64::INFINITY,
        };
        let raced = superpose_refresh(refl_dt, kernel.rho, rng);
        let (dt, kind) = if refl.kind == EventKind::Horizon && raced.dt >= refl.dt {
            (refl.dt, EventKind::Horizon)
        } else {
            (raced.dt, raced.kind)
        };

        if dt >= remaining {
            observer.segment(t, &x, &v, remaining);
            advance(&mut x, &v, remaining);
            observer.event(horizon, EventTag::HorizonEnd, &x, &v);
            return Ok(summary);
        }

        observer.segment(t, &x, &v, dt);
        advance(&mut x, &v, dt);
        t += dt;

        match kind {
            EventKind::Horizon => {
                window *= 2.0;
            }
            EventKind::Reflection => {
                window = THINNING_WINDOW;
                target.gradient_into(&x, &mut grad);
                let switched = match &law {
                    None => {
                        bps_reflect_in_place(&mut v, &grad);
                        false
                    }
                    Some(law) => fecmc_reflect_in_place(
                        &mut v,
                        &grad,
                        kernel.switch_prob,
                        law,
                        &mut scratch,
                        rng,
                    ),
                };
                summary.reflections += 1;
                summary.switches += u64::from(switched);
                debug_assert!(
                    (crate::targets::dot(&v, &v) - 1.0).abs() < 1e-12,
                    "velocity left the unit sphere"
                );
                observer.event(t, EventTag::Reflection { switched }, &x, &v);
            }
            EventKind::Refreshment => {
                window = THINNING_WINDOW;
                full_refresh_into(&mut v, rng);
                summary.refreshments += 1;
                observer.event(t, EventTag::Refreshment, &x, &v);
            }
        }
    }
}

#[inline]
fn advance(x: &mut [f64], v: &[f64], dt: f64) {
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi += dt * vi;
    }
}
