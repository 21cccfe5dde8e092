use ecmc_core::diffusivity::{resolvent_constants, sigma2_b, sigma2_f};
use ecmc_core::estimators::{batch_means, BatchIntegrals};
use ecmc_core::event_clock::{affine_integrated_rate, next_affine_event};
use ecmc_core::kernels::{bps_reflect, fecmc_reflect};
use ecmc_core::rng::stream;
use ecmc_core::specialfn::{erfcx, omega, RadialRefreshLaw};
use ecmc_core::targets::{TargetKind, TargetModel};
use proptest::prelude::*;

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.iter().map(|a| a / n).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn kind_strategy() -> impl Strategy<Value = TargetKind> {
    prop_oneof![
        Just(TargetKind::StdGaussian),
        (0.0..0.95f64).prop_map(|gamma| TargetKind::AnisoGaussian { gamma }),
        Just(TargetKind::IidLogistic),
        (4.5..200.0f64).prop_map(|nu| TargetKind::Student { nu }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn erfcx_is_positive_and_decreasing(x in 0.0..1e4f64, dx in 1e-6..10.0f64) {
        let a: f64 = erfcx(x).unwrap();
        let b: f64 = erfcx(x + dx).unwrap();
        prop_assert!(a > 0.0 && b > 0.0 && b < a);
        prop_assert!(a <= 1.0);
    }

    #[test]
    fn omega_is_increasing_below_one(rho in 1e-6..1e3f64) {
        let a: f64 = omega(rho).unwrap();
        let b: f64 = omega(rho * 1.01).unwrap();
        prop_assert!(a > 0.0 && a < 1.0 && b >= a);
    }

    #[test]
    fn sigma_curves_ordered(rho in 1e-4..50.0f64, f in 1.001..3.0f64) {
        let (sf, sb): (f64, f64) = (sigma2_f(rho).unwrap(), sigma2_b(rho).unwrap());
        prop_assert!(sf > sb && sb > 0.0);
        prop_assert!(sigma2_f(rho * f).unwrap() < sf);
    }

    #[test]
    fn resolvent_negative_branch_is_continuous(rho in 0.05..10.0f64) {
        let c = resolvent_constants(rho).unwrap();
        prop_assert!((c.f_f(0.0).unwrap() - c.k_f).abs() < 1e-12 * (1.0 + c.k_f.abs()));
        prop_assert!((c.f_b(0.0).unwrap() - c.k_b).abs() < 1e-12 * (1.0 + c.k_b.abs()));
        let eps = 1e-9;
        prop_assert!((c.f_f(eps).unwrap() - c.f_f(-eps).unwrap()).abs() < 1e-6);
        prop_assert!((c.f_b(eps).unwrap() - c.f_b(-eps).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn affine_inversion_residual(r0 in -50.0..50.0f64, slope in 1e-3..100.0f64, e in 1e-8..50.0f64) {
        let t = next_affine_event(r0, slope, e).unwrap();
        prop_assert!(t >= 0.0 && t >= -r0 / slope);
        prop_assert!((affine_integrated_rate(r0, slope, t) - e).abs() <= 1e-10 * e.max(1.0));
    }

    #[test]
    fn bps_preserves_norm_and_is_involutive(
        v in prop::collection::vec(-1.0..1.0f64, 6),
        g in prop::collection::vec(-5.0..5.0f64, 6),
    ) {
        let Some(v) = unit(&v) else { return Ok(()) };
        let w = bps_reflect(&v, &g);
        prop_assert!((dot(&w, &w).sqrt() - 1.0).abs() < 1e-12);
        let back = bps_reflect(&w, &g);
        for (a, b) in back.iter().zip(&v) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fecmc_output_is_unit_and_points_downhill(
        v in prop::collection::vec(-1.0..1.0f64, 5),
        g in prop::collection::vec(-5.0..5.0f64, 5),
        p in 0.0..1.0f64,
        seed in any::<u64>(),
    ) {
        let (Some(v), Some(n)) = (unit(&v), unit(&g)) else { return Ok(()) };
        let mut rng = stream(seed);
        let (w, _) = fecmc_reflect(&v, &g, p, &mut rng).unwrap();
        prop_assert!((dot(&w, &w).sqrt() - 1.0).abs() < 1e-12);
        let c = dot(&w, &n);
        prop_assert!(c < 0.0 && c > -1.0);
    }

    #[test]
    fn radial_law_quantile_inverts_cdf(d in 3usize..5000, u in 0.0..0.999_999f64) {
        let law = RadialRefreshLaw::new(d).unwrap();
        let w = law.quantile(u);
        prop_assert!((0.0..1.0).contains(&w));
        prop_assert!((law.cdf(w) - u).abs() < 1e-9);
    }

    #[test]
    fn segment_deltas_telescope(
        kind in kind_strategy(),
        x in prop::collection::vec(-4.0..4.0f64, 4),
        v in prop::collection::vec(-1.0..1.0f64, 4),
        cut in 0.0..1.0f64,
        dt in 0.0..5.0f64,
    ) {
        let Some(v) = unit(&v) else { return Ok(()) };
        let t = TargetModel::new(kind, 4).unwrap();
        let s = cut * dt;
        let mid: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + s * b).collect();
        let whole = t.segment_potential_delta(&x, &v, dt);
        let parts = t.segment_potential_delta(&x, &v, s) + t.segment_potential_delta(&mid, &v, dt - s);
        prop_assert!((whole - parts).abs() < 1e-10 * (1.0 + whole.abs()));
        let end: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + dt * b).collect();
        let direct = t.potential(&end).unwrap() - t.potential(&x).unwrap();
        prop_assert!((whole - direct).abs() < 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn batch_sums_cover_total(
        pieces in prop::collection::vec(0.0..3.0f64, 1..40),
        batch in 0.1..5.0f64,
    ) {
        let mut b = BatchIntegrals::new(batch);
        let mut t = 0.0;
        for dt in &pieces {
            b.add_piece(t, *dt, |s, e| e - s);
            t += dt;
        }
        let full = (t / batch).floor() as usize;
        prop_assert!(b.sums.len() == full || b.sums.len() + 1 == full || b.sums.len() == full + 1);
        let sum: f64 = b.sums.iter().sum::<f64>() + b.partial;
        prop_assert!((sum - t).abs() < 1e-9);
        prop_assert!((b.total - t).abs() < 1e-9);
    }

    #[test]
    fn batch_means_shift_scale(
        ys in prop::collection::vec(-10.0..10.0f64, 2..50),
        shift in -100.0..100.0f64,
        scale in -5.0..5.0f64,
        b in 0.1..100.0f64,
    ) {
        let base = batch_means(&ys, b).unwrap().value;
        prop_assert!(base >= 0.0);
        let shifted: Vec<f64> = ys.iter().map(|y| y + shift).collect();
        let scaled: Vec<f64> = ys.iter().map(|y| y * scale).collect();
        let tol = 1e-9 * (1.0 + base);
        prop_assert!((batch_means(&shifted, b).unwrap().value - base).abs() < tol * 1e3);
        prop_assert!((batch_means(&scaled, b).unwrap().value - scale * scale * base).abs() < tol * 100.0);
    }
}
