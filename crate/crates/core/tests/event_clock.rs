use ecmc_core::event_clock::{
    affine_integrated_rate, next_affine_event, next_reflection, next_student_event,
    next_thinned_event, student_integrated_rate, superpose_refresh, EventKind, THINNING_WINDOW,
};
use ecmc_core::kernels::{full_refresh, KernelSpec};
use ecmc_core::pdmp::run_sampler_with;
use ecmc_core::quadrature::GaussLegendre;
use ecmc_core::rng::{standard_normal, stream, substream, uniform, unit_exponential};
use ecmc_core::specialfn::RayleighLaw;
use ecmc_core::stats::{ks_distance, ks_distance_two_sample, ks_pvalue, mean_and_se};
use ecmc_core::targets::{TargetKind, TargetModel};
use rand::Rng;
use rayon::prelude::*;

fn two_sample_p(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    ks_pvalue(ks_distance_two_sample(a, b), n * m / (n + m))
}

#[test]
fn affine_examples_and_errors() {
    let cases = [
        (0.0, 1.0, 0.5, 1.0),
        (-1.0, 1.0, 0.5, 2.0),
        (1.0, 1.0, 1.5, 1.0),
    ];
    for (r0, slope, e, t) in cases {
        assert!((next_affine_event(r0, slope, e).unwrap() - t).abs() < 1e-15);
    }
    assert!(next_affine_event(0.0, 0.0, 1.0).is_err());
    assert!(next_affine_event(0.0, -2.0, 1.0).is_err());
    assert!(next_affine_event(0.0, f64::NAN, 1.0).is_err());
}

#[test]
fn affine_inversion_residual() {
    let mut rng = stream(21);
    for _ in 0..100_000 {
        let r0 = 10.0 * standard_normal(&mut rng);
        let slope = 0.01 + 5.0 * uniform(&mut rng);
        let e = unit_exponential(&mut rng) * 10f64.powf(4.0 * uniform(&mut rng) - 2.0);
        let t = next_affine_event(r0, slope, e).unwrap();
        let res = (affine_integrated_rate(r0, slope, t) - e).abs();
        assert!(
            res <= 1e-10 * e.max(1.0),
            "r0={r0} slope={slope} e={e}: {res}"
        );
    }
}

#[test]
fn student_inversion_residual_and_monotonicity() {
    let mut rng = stream(22);
    for (d, nu) in [(3usize, 5.0), (10, 10.0), (40, 100.0)] {
        let t = TargetModel::new(TargetKind::Student { nu }, d).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..d).map(|_| 3.0 * standard_normal(&mut rng)).collect();
            let v = full_refresh(d, &mut rng);
            let ray = t.ray(&x, &v);
            let r0: f64 = x.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!((next_student_event(&ray, 0.0) - (-r0).max(0.0)).abs() < 1e-12);
            let mut prev = -1.0;
            for k in 0..20 {
                let e = 0.01 * 1.6f64.powi(k);
                let s = next_student_event(&ray, e);
                assert!(s > prev, "not monotone in E");
                prev = s;
                let res = (student_integrated_rate(&ray, s) - e).abs();
                assert!(res <= 1e-10 * e.max(1.0), "residual {res} at e={e}");
                let quad = ray.potential_delta(s) - ray.potential_delta((-r0).max(0.0));
                assert!((quad - e).abs() <= 1e-9 * e.max(1.0));
            }
        }
    }
}

/// Thinning against the global maximum of `(d+ν)s/(m+s²)`.
fn student_by_thinning(ray_rate: impl Fn(f64) -> f64, bound: f64, rng: &mut impl Rng) -> f64 {
    let mut t = 0.0;
    loop {
        t += unit_exponential(rng) / bound;
        let r = ray_rate(t).max(0.0);
        assert!(r <= bound * (1.0 + 1e-12));
        if uniform(rng) * bound < r {
            return t;
        }
    }
}

#[test]
fn student_event_law_matches_thinning() {
    let (d, nu) = (6usize, 6.0);
    let t = TargetModel::new(TargetKind::Student { nu }, d).unwrap();
    // r₀ = 0 and |x|² = ν.
    let mut x = vec![0.0; d];
    x[0] = nu.sqrt();
    let mut v = vec![0.0; d];
    v[1] = 1.0;
    let ray = t.ray(&x, &v);
    let bound = t.segment_bound(&x, &v, 1.0);
    let mut rng = stream(23);
    let n = 100_000;
    let exact: Vec<f64> = (0..n)
        .map(|_| next_student_event(&ray, unit_exponential(&mut rng)))
        .collect();
    let thin: Vec<f64> = (0..n)
        .map(|_| student_by_thinning(|s| ray.rate(s), bound, &mut rng))
        .collect();
    let p = two_sample_p(&exact, &thin);
    assert!(p > 0.01, "p = {p}");
}

/// Dense table of `Λ(t) = ∫₀ᵗ (v·tanh((x+sv)/2))₊ ds` for the logistic ray,
/// inverted by bisection inside the bracketing cell.
struct LogisticInverse {
    x: f64,
    v: f64,
    step: f64,
    cumulative: Vec<f64>,
    gl: GaussLegendre,
}

impl LogisticInverse {
    fn new(x: f64, v: f64, step: f64, max_lambda: f64) -> Self {
        let gl = GaussLegendre::new(20);
        let mut cumulative = vec![0.0];
        let z = -x / v;
        while *cumulative.last().unwrap() < max_lambda {
            let a = (cumulative.len() - 1) as f64 * step;
            let b = a + step;
            let rate = |s: f64| (v * ((x + s * v) / 2.0).tanh()).max(0.0);
            // Split at the kink where the rate turns positive.
            let piece = if z > a && z < b {
                gl.integrate(rate, a, z) + gl.integrate(rate, z, b)
            } else {
                gl.integrate(rate, a, b)
            };
            cumulative.push(cumulative.last().unwrap() + piece);
        }
        Self {
            x,
            v,
            step,
            cumulative,
            gl,
        }
    }

    fn invert(&self, e: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < e).max(1) - 1;
        let a = k as f64 * self.step;
        let rest = e - self.cumulative[k];
        let (x, v) = (self.x, self.v);
        let rate = |s: f64| (v * ((x + s * v) / 2.0).tanh()).max(0.0);
        let (mut lo, mut hi) = (a, a + self.step);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.gl.integrate(rate, a, mid) < rest {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// First reflection time from `(x, v)` through repeated thinning windows.
fn thinned_first_event(t: &TargetModel, x: &[f64], v: &[f64], rng: &mut impl Rng) -> f64 {
    let mut elapsed = 0.0;
    let mut pos = x.to_vec();
    loop {
        let p = next_thinned_event(t, &pos, v, THINNING_WINDOW, rng);
        assert_eq!(p.diagnostics.bound_violations, 0);
        if p.kind == EventKind::Reflection {
            return elapsed + p.dt;
        }
        elapsed += p.dt;
        for (a, b) in pos.iter_mut().zip(v) {
            *a += p.dt * b;
        }
    }
}

#[test]
fn logistic_thinning_matches_numeric_inversion() {
    let t = TargetModel::new(TargetKind::IidLogistic, 1).unwrap();
    let (x, v) = (-1.5, 1.0);
    let n = 100_000;
    let table = LogisticInverse::new(x, v, 1e-3, 60.0);
    let mut rng = stream(24);
    let oracle: Vec<f64> = (0..n)
        .map(|_| table.invert(unit_exponential(&mut rng)))
        .collect();
    let mut rng = stream(25);
    let thin: Vec<f64> = (0..n)
        .map(|_| thinned_first_event(&t, &[x], &[v], &mut rng))
        .collect();
    let p = two_sample_p(&oracle, &thin);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn gaussian_thinning_matches_exact_inversion() {
    let t = TargetModel::std_gaussian(4);
    let x = [0.3, -1.2, 0.8, 0.1];
    let v = [0.5, 0.5, -0.5, 0.5];
    let mut rng = stream(26);
    let n = 100_000;
    let exact: Vec<f64> = (0..n)
        .map(|_| next_reflection(&t, &x, &v, THINNING_WINDOW, &mut rng).dt)
        .collect();
    let thin: Vec<f64> = (0..n)
        .map(|_| thinned_first_event(&t, &x, &v, &mut rng))
        .collect();
    let p = two_sample_p(&exact, &thin);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn thinning_with_zero_rate_reaches_horizon() {
    let t = TargetModel::new(TargetKind::IidLogistic, 2).unwrap();
    let mut rng = stream(27);
    // Moving away from the mode in every coordinate keeps the rate at 0.
    let p = next_thinned_event(&t, &[-5.0, 5.0], &[1.0, -1.0], 2.0, &mut rng);
    assert!(p.kind == EventKind::Horizon || p.dt < 2.0);
    let x = [-20.0, 20.0];
    let v = [0.6, -0.8];
    for _ in 0..1000 {
        let p = next_thinned_event(&t, &x, &v, 1.0, &mut rng);
        assert_eq!(p.kind, EventKind::Horizon);
        assert_eq!(p.dt, 1.0);
    }
}

#[test]
fn thinning_bound_holds_over_ten_million_proposals() {
    let d = 8;
    let t = TargetModel::new(TargetKind::IidLogistic, d).unwrap();
    let proposals: u64 = (0..64u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(28, c);
            let mut count = 0;
            while count < 10_000_000 / 64 + 1 {
                let x = t.sample_stationary(&mut rng);
                let v = full_refresh(d, &mut rng);
                let p = next_thinned_event(&t, &x, &v, 4.0, &mut rng);
                assert_eq!(p.diagnostics.bound_violations, 0);
                count += p.diagnostics.proposals.max(1);
            }
            count
        })
        .sum();
    assert!(proposals >= 10_000_000);
}

#[test]
fn gaussian_post_jump_wait_is_shifted_rayleigh() {
    let d = 5;
    let t = TargetModel::std_gaussian(d);
    let mut rng = stream(29);
    let law = RayleighLaw;
    let n = 100_000;
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let x = t.sample_stationary(&mut rng);
        let mut v = full_refresh(d, &mut rng);
        let mut r0: f64 = x.iter().zip(&v).map(|(a, b)| a * b).sum();
        if r0 >= 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
            r0 = -r0;
        }
        let dt = next_reflection(&t, &x, &v, THINNING_WINDOW, &mut rng).dt;
        z.push(dt + r0);
    }
    let p = ks_pvalue(ks_distance(&z, |s| law.cdf(s)), n as f64);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn superposition_examples() {
    let mut rng = stream(30);
    for _ in 0..1000 {
        let r = unit_exponential(&mut rng);
        let p = superpose_refresh(r, 0.0, &mut rng);
        assert_eq!((p.kind, p.dt), (EventKind::Reflection, r));
        let p = superpose_refresh(f64::INFINITY, 0.5, &mut rng);
        assert_eq!(p.kind, EventKind::Refreshment);
        assert!(p.dt.is_finite());
    }
    let p = superpose_refresh(f64::INFINITY, 0.0, &mut rng);
    assert_eq!(p.kind, EventKind::Horizon);
}

#[test]
fn refresh_fraction_on_gaussian() {
    let rho = 1.42;
    let target = TargetModel::std_gaussian(100);
    let kernel = KernelSpec::bps(rho);
    let fractions: Vec<f64> = (0..40u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(31, r);
            let s = run_sampler_with(&target, &kernel, 500.0, &mut rng, ()).unwrap();
            s.refreshments as f64 / s.events() as f64
        })
        .collect();
    let (m, se) = mean_and_se(&fractions);
    let expected = rho / (rho + 1.0 / (2.0 * std::f64::consts::PI).sqrt());
    assert!((expected - 0.7807).abs() < 1e-4);
    assert!((m - expected).abs() < 3.0 * se, "{m} ± {se} vs {expected}");
}
