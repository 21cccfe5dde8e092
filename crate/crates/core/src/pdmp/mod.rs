//! The d-dimensional sampler, its event skeletons, and the one-dimensional
//! limit processes (radial momentum `R^F`, `R^B` and the OU potential limit).

mod limits;
mod observe;
mod sampler;
mod skeleton;

pub use limits::{run_limit_r, run_ou, LimitKind, LimitProcessPath};
pub use observe::{GridObserver, TrajectoryObserver};
pub use sampler::{
    run_from_state, run_sampler, run_sampler_with, RunSummary, SamplerConfig, EVENT_BUDGET,
};
pub use skeleton::{potential_grid, potential_path, EventSkeleton, EventTag, SkeletonHeader};
