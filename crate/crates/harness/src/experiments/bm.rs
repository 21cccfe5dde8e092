//! Slow batch means on `h` against the fast energy-increment proxy.

use std::f64::consts::PI;

use anyhow::{ensure, Context, Result};
use ecmc_core::estimators::{
    default_slow_batch, fast_proxy_estimate, slow_estimate, FunctionalAccumulator,
};
use ecmc_core::kernels::KernelSpec;
use ecmc_core::pdmp::run_sampler_with;
use ecmc_core::rng::stream;
use ecmc_core::stats::quantile_sorted;
use ecmc_core::targets::{TargetKind, TargetModel};
use serde::Serialize;
use serde_json::json;

use super::{run_replicates, successes, Outcome, Report};
use crate::config::{BmSettings, ExperimentConfig};
use crate::output::{write_text, Table};
use crate::row;
use crate::seeds::replicate_seed;
use crate::svg::{color, Axis, BoxSpec, Figure, RefLine};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BmRun {
    pub slow: f64,
    pub fast: f64,
    pub slow_batch: f64,
    pub fast_batch: f64,
    pub slow_batches: usize,
    pub fast_batches: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Most extreme values within 1.5 IQR of the quartiles.
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub bias: f64,
    pub mse: f64,
}

impl BoxStats {
    pub fn new(values: &[f64], reference: f64) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let q1 = quantile_sorted(&v, 0.25);
        let q3 = quantile_sorted(&v, 0.75);
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let mean = v.iter().sum::<f64>() / n as f64;
        Self {
            n,
            mean,
            min: v[0],
            q1,
            median: quantile_sorted(&v, 0.5),
            q3,
            max: v[n - 1],
            whisker_lo: v.iter().copied().find(|&x| x >= lo_fence).unwrap_or(v[0]),
            whisker_hi: v
                .iter()
                .rev()
                .copied()
                .find(|&x| x <= hi_fence)
                .unwrap_or(v[n - 1]),
            bias: mean - reference,
            mse: v.iter().map(|x| (x - reference).powi(2)).sum::<f64>() / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    /// `√(2π)` for the standard Gaussian.
    ClosedForm,
    /// Mean slow estimate over long pilot runs.
    Pilot,
}

#[derive(Debug, Clone)]
pub struct BmDim {
    pub d: usize,
    pub reference: f64,
    pub source: ReferenceSource,
    pub runs: Vec<Outcome<BmRun>>,
    pub slow: BoxStats,
    pub fast: BoxStats,
}

#[derive(Debug, Clone)]
pub struct BmResult {
    pub kernel: KernelSpec,
    pub dims: Vec<BmDim>,
}

impl BmResult {
    pub fn dim(&self, d: usize) -> Option<&BmDim> {
        self.dims.iter().find(|x| x.d == d)
    }
}

fn one_run(
    target: &TargetModel,
    kernel: &KernelSpec,
    horizon: f64,
    bm: &BmSettings,
    seed: u64,
) -> Result<BmRun> {
    let d = target.dim();
    let slow_batch = default_slow_batch(horizon, d, bm.slow_c);
    let fast_batch = bm.fast_factor * (d as f64).sqrt();
    let mut acc = FunctionalAccumulator::new(target, slow_batch, fast_batch);
    let mut rng = stream(seed);
    run_sampler_with(target, kernel, horizon, &mut rng, &mut acc)?;
    let slow = slow_estimate(&acc.h, d).context("slow estimate")?;
    let fast = fast_proxy_estimate(&acc.g).context("fast estimate")?;
    Ok(BmRun {
        slow: slow.value,
        fast: fast.value,
        slow_batch,
        fast_batch,
        slow_batches: slow.batch_count,
        fast_batches: fast.batch_count,
    })
}

pub fn compute(cfg: &ExperimentConfig) -> Result<BmResult> {
    ensure!(
        cfg.replicates >= 2,
        "a boxplot needs at least 2 runs per dimension, got {}",
        cfg.replicates
    );
    let kernel = cfg.kernels[0];
    let alg = kernel.algorithm;
    let bm = &cfg.bm;
    let ns = cfg.experiment.seed_namespace();
    let mut dims = Vec::new();
    for &d in &cfg.dims {
        let target = TargetModel::new(cfg.target, d)?;
        let horizon = bm.horizon_factor * d as f64;
        let (reference, source) = if cfg.target == TargetKind::StdGaussian {
            ((2.0 * PI).sqrt(), ReferenceSource::ClosedForm)
        } else {
            let pilot_ns = format!("{ns}_pilot");
            let pilots = run_replicates(
                bm.pilot_runs,
                |r| replicate_seed(cfg.seed, &pilot_ns, d, alg, r),
                |seed| one_run(&target, &kernel, horizon * bm.pilot_factor, bm, seed),
            );
            let ok = successes(&pilots, cfg.min_success, &format!("pilot d={d}"))?;
            let mean = ok.iter().map(|r| r.slow).sum::<f64>() / ok.len() as f64;
            (mean, ReferenceSource::Pilot)
        };
        let runs = run_replicates(
            cfg.replicates,
            |r| replicate_seed(cfg.seed, ns, d, alg, r),
            |seed| one_run(&target, &kernel, horizon, bm, seed),
        );
        let ok = successes(&runs, cfg.min_success, &format!("bm_compare d={d}"))?;
        ensure!(
            ok.len() >= 2,
            "d={d}: fewer than 2 successful runs, boxplot is degenerate"
        );
        let slow: Vec<f64> = ok.iter().map(|r| r.slow).collect();
        let fast: Vec<f64> = ok.iter().map(|r| r.fast).collect();
        dims.push(BmDim {
            d,
            reference,
            source,
            slow: BoxStats::new(&slow, reference),
            fast: BoxStats::new(&fast, reference),
            runs,
        });
    }
    Ok(BmResult { kernel, dims })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let res = compute(cfg)?;
    let mut files = Vec::new();

    let mut runs = Table::new(&[
        "target",
        "d",
        "algorithm",
        "rho",
        "replicate",
        "seed",
        "status",
        "slow",
        "fast",
        "slow_batch",
        "fast_batch",
        "slow_batches",
        "fast_batches",
        "error",
    ]);
    let mut timing = Table::new(&["d", "replicate", "wall_secs"]);
    for dim in &res.dims {
        for o in &dim.runs {
            let v = o.ok();
            runs.push(row![
                cfg.target.label(),
                dim.d,
                res.kernel.algorithm.label(),
                res.kernel.rho,
                o.index,
                o.seed,
                o.status(),
                v.map(|v| v.slow),
                v.map(|v| v.fast),
                v.map(|v| v.slow_batch),
                v.map(|v| v.fast_batch),
                v.map_or(String::new(), |v| v.slow_batches.to_string()),
                v.map_or(String::new(), |v| v.fast_batches.to_string()),
                o.error(),
            ]);
            timing.push(row![dim.d, o.index, o.wall_secs]);
        }
    }
    files.push(runs.write(&cfg.out.join("bm_compare_runs.csv"))?);

    let mut summary = Table::new(&[
        "target",
        "d",
        "estimator",
        "n",
        "mean",
        "min",
        "q1",
        "median",
        "q3",
        "max",
        "whisker_lo",
        "whisker_hi",
        "reference",
        "reference_source",
        "bias",
        "mse",
    ]);
    for dim in &res.dims {
        for (name, s) in [("slow", &dim.slow), ("fast", &dim.fast)] {
            let source = match dim.source {
                ReferenceSource::ClosedForm => "closed_form",
                ReferenceSource::Pilot => "pilot",
            };
            summary.push(row![
                cfg.target.label(),
                dim.d,
                name,
                s.n,
                s.mean,
                s.min,
                s.q1,
                s.median,
                s.q3,
                s.max,
                s.whisker_lo,
                s.whisker_hi,
                dim.reference,
                source,
                s.bias,
                s.mse,
            ]);
        }
    }
    files.push(summary.write(&cfg.out.join("bm_compare_summary.csv"))?);
    files.push(timing.write(&cfg.out.join("bm_compare_timing.csv"))?);
    files.push(write_text(
        &cfg.out.join("bm_compare.svg"),
        &figure(cfg, &res).render(),
    )?);

    Ok(Report {
        experiment: cfg.experiment,
        files,
        summary: json!({
            "dims": res.dims.iter().map(|x| json!({
                "d": x.d,
                "reference": x.reference,
                "reference_source": x.source,
                "slow": x.slow,
                "fast": x.fast,
            })).collect::<Vec<_>>(),
        }),
    })
}

fn figure(cfg: &ExperimentConfig, res: &BmResult) -> Figure {
    let mut fig = Figure::new(
        &format!("Batch-means estimators, {}", cfg.target.label()),
        Axis::linear("dimension d"),
        Axis::linear("estimate"),
    );
    let mut ticks = Vec::new();
    for (i, dim) in res.dims.iter().enumerate() {
        let x = i as f64;
        ticks.push((x, dim.d.to_string()));
        for (offset, s, c) in [(-0.18, &dim.slow, color(1)), (0.18, &dim.fast, color(0))] {
            fig.boxes.push(BoxSpec {
                x: x + offset,
                width: 0.3,
                q1: s.q1,
                median: s.median,
                q3: s.q3,
                whisker_lo: s.whisker_lo,
                whisker_hi: s.whisker_hi,
                color: c,
            });
        }
    }
    fig.x_ticks = Some(ticks);
    fig.legend = vec![("slow".into(), color(1)), ("fast".into(), color(0))];
    if let Some(first) = res.dims.first() {
        fig.ref_lines.push(RefLine {
            y: first.reference,
            label: format!("reference {:.4}", first.reference),
            color: color(7),
        });
    }
    fig
}
