use super::skeleton::EventTag;

/// Streaming view of a trajectory.
///
/// The sampler reports every linear piece `x + s·v, s ∈ [0, dt)` starting at
/// time `t0` through `segment`, and every recorded state through `event`.
/// Consecutive segments may occur without an event in between (an empty
/// thinning window), so observers must not assume alternation.
pub trait TrajectoryObserver {
    fn segment(&mut self, _t0: f64, _x: &[f64], _v: &[f64], _dt: f64) {}
    fn event(&mut self, _t: f64, _tag: EventTag, _x: &[f64], _v: &[f64]) {}
}

impl TrajectoryObserver for () {}

impl<O: TrajectoryObserver + ?Sized> TrajectoryObserver for &mut O {
    fn segment(&mut self, t0: f64, x: &[f64], v: &[f64], dt: f64) {
        (**self).segment(t0, x, v, dt)
    }
    fn event(&mut self, t: f64, tag: EventTag, x: &[f64], v: &[f64]) {
        (**self).event(t, tag, x, v)
    }
}

impl<A: TrajectoryObserver, B: TrajectoryObserver> TrajectoryObserver for (A, B) {
    fn segment(&mut self, t0: f64, x: &[f64], v: &[f64], dt: f64) {
        self.0.segment(t0, x, v, dt);
        self.1.segment(t0, x, v, dt);
    }
    fn event(&mut self, t: f64, tag: EventTag, x: &[f64], v: &[f64]) {
        self.0.event(t, tag, x, v);
        self.1.event(t, tag, x, v);
    }
}

/// Samples `f(x, v, s)` (the state `s` time units into a segment) on the
/// grid `0, step, 2·step, …` up to and including the horizon.
pub struct GridObserver<F> {
    step: f64,
    next: usize,
    f: F,
    pub values: Vec<f64>,
}

impl<F: FnMut(&[f64], &[f64], f64) -> f64> GridObserver<F> {
    pub fn new(step: f64, f: F) -> Self {
        assert!(step > 0.0, "grid step must be positive");
        Self {
            step,
            next: 0,
            f,
            values: Vec::new(),
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl<F: FnMut(&[f64], &[f64], f64) -> f64> TrajectoryObserver for GridObserver<F> {
    fn segment(&mut self, t0: f64, x: &[f64], v: &[f64], dt: f64) {
        let end = t0 + dt;
        loop {
            let tk = self.next as f64 * self.step;
            if tk >= end {
                break;
            }
            let s = (tk - t0).max(0.0);
            let value = (self.f)(x, v, s);
            self.values.push(value);
            self.next += 1;
        }
    }

    fn event(&mut self, t: f64, tag: EventTag, x: &[f64], v: &[f64]) {
        if tag == EventTag::HorizonEnd && self.next as f64 * self.step <= t {
            let value = (self.f)(x, v, 0.0);
            self.values.push(value);
            self.next += 1;
        }
    }
}
