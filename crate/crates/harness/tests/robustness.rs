//! FECMC/BPS ESS ratio away from the standard Gaussian, d = 100, T = 100,
//! R = 200. The logistic case takes minutes on one core and is ignored by
//! default; run it with `-- --ignored`.

use ecmc_core::kernels::KernelSpec;
use ecmc_core::targets::TargetKind;
use ecmc_lab::config::{ExperimentConfig, ExperimentKind};
use ecmc_lab::experiments::ess;

fn ratio_at_d100(target: TargetKind) -> f64 {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::EssScan);
    cfg.seed = 20_240_601;
    cfg.target = target;
    cfg.kernels = vec![KernelSpec::fecmc(0.0), KernelSpec::bps(1.42)];
    cfg.dims = vec![100];
    cfg.replicates = 200;
    cfg.horizon = 100.0;
    let res = ess::compute(&cfg).unwrap();
    assert_eq!(res.ratios.len(), 1);
    let r = res.ratios[0].ess_ratio;
    println!("{}: ESS ratio {r:.3}", target.label());
    r
}

#[test]
fn ess_ratio_on_equicorrelated_gaussian() {
    let r = ratio_at_d100(TargetKind::AnisoGaussian { gamma: 0.5 });
    assert!((1.4..=2.3).contains(&r), "ratio {r}");
}

#[test]
#[ignore = "about five minutes in release mode on one core"]
fn ess_ratio_on_logistic() {
    let r = ratio_at_d100(TargetKind::IidLogistic);
    assert!((1.4..=2.3).contains(&r), "ratio {r}");
}
