//! ESS sweeps over dimension (`ess_scan`) or over a target deviation
//! parameter at fixed dimension (`deviation_scan`).

use anyhow::{ensure, Result};
use ecmc_core::diffusivity::{sigma2_b, sigma2_f, sigma2_f_zero};
use ecmc_core::estimators::{
    ess_from_replicates, BootstrapConfig, EssEstimate, FunctionalAccumulator, MIN_REPLICATES,
};
use ecmc_core::kernels::{Algorithm, KernelSpec};
use ecmc_core::pdmp::run_sampler_with;
use ecmc_core::rng::stream;
use ecmc_core::targets::{TargetKind, TargetModel};
use serde::Serialize;
use serde_json::json;

use super::{run_replicates, successes, Outcome, Report};
use crate::config::{DeviationParameter, ExperimentConfig, ExperimentKind};
use crate::output::{write_text, Table};
use crate::row;
use crate::seeds::{replicate_seed, BOOTSTRAP_INDEX};
use crate::svg::{color, Axis, Figure, Mark, RefLine, Series};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunValues {
    pub h_bar: f64,
    pub g_bar: f64,
    pub reflections: u64,
    pub refreshments: u64,
}

/// One sweep point: a target, a dimension and a kernel.
#[derive(Debug, Clone)]
pub struct Cell {
    /// Deviation parameter (γ or ν), absent for a plain dimension scan.
    pub param: Option<f64>,
    pub target: TargetKind,
    pub d: usize,
    pub kernel: KernelSpec,
    pub runs: Vec<Outcome<RunValues>>,
    pub ess: EssEstimate,
    /// `T·σ²/8` with the Gaussian-limit diffusivity of the kernel.
    pub theory: f64,
    pub mean_events: f64,
    pub mean_wall_secs: f64,
}

impl Cell {
    pub fn covers_theory(&self) -> bool {
        self.ess.ci_lo <= self.theory && self.theory <= self.ess.ci_hi
    }

    pub fn ess_per_event(&self) -> f64 {
        self.ess.ess / self.mean_events
    }

    pub fn ess_per_cpu_second(&self) -> f64 {
        self.ess.ess / self.mean_wall_secs
    }
}

/// FECMC against BPS at one sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct Ratio {
    pub param: Option<f64>,
    pub d: usize,
    pub fecmc: String,
    pub bps: String,
    pub ess_ratio: f64,
    pub theory_ratio: f64,
    pub per_event_ratio: f64,
    pub cpu_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct EssResult {
    pub cells: Vec<Cell>,
    pub ratios: Vec<Ratio>,
}

impl EssResult {
    pub fn cell(&self, param: Option<f64>, d: usize, algorithm: Algorithm) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.param == param && c.d == d && c.kernel.algorithm == algorithm)
    }
}

/// Gaussian-limit diffusivity `σ²(ρ)` of a kernel.
pub fn theory_sigma2(kernel: &KernelSpec) -> Result<f64> {
    Ok(match (kernel.algorithm, kernel.rho) {
        (Algorithm::Fecmc, 0.0) => sigma2_f_zero(),
        (Algorithm::Fecmc, r) => sigma2_f(r)?,
        (Algorithm::Bps, r) => sigma2_b(r)?,
    })
}

fn sweep(cfg: &ExperimentConfig) -> Vec<(Option<f64>, TargetKind, usize)> {
    match cfg.experiment {
        ExperimentKind::DeviationScan => {
            let dv = &cfg.deviation;
            dv.values
                .iter()
                .map(|&p| {
                    let kind = match dv.parameter {
                        DeviationParameter::Gamma => TargetKind::AnisoGaussian { gamma: p },
                        DeviationParameter::Nu => TargetKind::Student { nu: p },
                    };
                    (Some(p), kind, dv.d)
                })
                .collect()
        }
        _ => cfg.dims.iter().map(|&d| (None, cfg.target, d)).collect(),
    }
}

fn one_run(
    target: &TargetModel,
    kernel: &KernelSpec,
    horizon: f64,
    seed: u64,
) -> Result<RunValues> {
    let mut acc = FunctionalAccumulator::new(target, horizon, horizon);
    let mut rng = stream(seed);
    let summary = run_sampler_with(target, kernel, horizon, &mut rng, &mut acc)?;
    let avg = acc.averages();
    ensure!(avg.h_bar.is_finite(), "non-finite time average");
    Ok(RunValues {
        h_bar: avg.h_bar,
        g_bar: avg.g_bar,
        reflections: summary.reflections,
        refreshments: summary.refreshments,
    })
}

pub fn compute(cfg: &ExperimentConfig) -> Result<EssResult> {
    ensure!(
        cfg.replicates >= MIN_REPLICATES,
        "ESS confidence intervals need at least {MIN_REPLICATES} replicates, got {}",
        cfg.replicates
    );
    let namespace = cfg.experiment.seed_namespace();
    let boot = BootstrapConfig {
        resamples: cfg.bootstrap_resamples,
        level: cfg.confidence,
    };
    let mut cells = Vec::new();
    for (param, kind, d) in sweep(cfg) {
        let target = TargetModel::new(kind, d)?;
        let horizon = cfg.horizon * d as f64;
        for kernel in &cfg.kernels {
            let alg = kernel.algorithm;
            let runs = run_replicates(
                cfg.replicates,
                |r| replicate_seed(cfg.seed, namespace, d, alg, r),
                |seed| one_run(&target, kernel, horizon, seed),
            );
            let what = format!("{} {} d={d}", kind.label(), kernel_label(kernel));
            let ok = successes(&runs, cfg.min_success, &what)?;
            let h: Vec<f64> = ok.iter().map(|v| v.h_bar).collect();
            let mut rng = stream(replicate_seed(cfg.seed, namespace, d, alg, BOOTSTRAP_INDEX));
            let ess = ess_from_replicates(&h, boot, &mut rng)?;
            let n = ok.len() as f64;
            let mean_events = ok
                .iter()
                .map(|v| (v.reflections + v.refreshments) as f64)
                .sum::<f64>()
                / n;
            let mean_wall_secs = runs
                .iter()
                .filter(|o| o.result.is_ok())
                .map(|o| o.wall_secs)
                .sum::<f64>()
                / n;
            cells.push(Cell {
                param,
                target: kind,
                d,
                kernel: *kernel,
                theory: cfg.horizon * theory_sigma2(kernel)? / 8.0,
                runs,
                ess,
                mean_events,
                mean_wall_secs,
            });
        }
    }
    let ratios = ratios(cfg, &cells)?;
    Ok(EssResult { cells, ratios })
}

fn ratios(cfg: &ExperimentConfig, cells: &[Cell]) -> Result<Vec<Ratio>> {
    let (Some(f), Some(b)) = (
        cfg.first_kernel(Algorithm::Fecmc),
        cfg.first_kernel(Algorithm::Bps),
    ) else {
        return Ok(Vec::new());
    };
    let theory_ratio = theory_sigma2(&f)? / theory_sigma2(&b)?;
    let mut out = Vec::new();
    for (param, _, d) in sweep(cfg) {
        let find = |k: &KernelSpec| {
            cells
                .iter()
                .find(|c| c.param == param && c.d == d && c.kernel == *k)
        };
        if let (Some(cf), Some(cb)) = (find(&f), find(&b)) {
            out.push(Ratio {
                param,
                d,
                fecmc: kernel_label(&f),
                bps: kernel_label(&b),
                ess_ratio: cf.ess.ess / cb.ess.ess,
                theory_ratio,
                per_event_ratio: cf.ess_per_event() / cb.ess_per_event(),
                cpu_ratio: cf.ess_per_cpu_second() / cb.ess_per_cpu_second(),
            });
        }
    }
    Ok(out)
}

pub fn kernel_label(k: &KernelSpec) -> String {
    format!("{}(rho={})", k.algorithm.label(), k.rho)
}

fn param_name(cfg: &ExperimentConfig) -> &'static str {
    match (cfg.experiment, cfg.deviation.parameter) {
        (ExperimentKind::DeviationScan, DeviationParameter::Gamma) => "gamma",
        (ExperimentKind::DeviationScan, DeviationParameter::Nu) => "nu",
        _ => "param",
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let res = compute(cfg)?;
    let prefix = cfg.experiment.label();
    let pname = param_name(cfg);
    let mut files = Vec::new();

    let mut runs = Table::new(&[
        "target",
        pname,
        "d",
        "algorithm",
        "rho",
        "replicate",
        "seed",
        "status",
        "h_bar",
        "g_bar",
        "reflections",
        "refreshments",
        "error",
    ]);
    let mut timing = Table::new(&[
        "target",
        pname,
        "d",
        "algorithm",
        "rho",
        "replicate",
        "wall_secs",
    ]);
    for c in &res.cells {
        for o in &c.runs {
            let v = o.ok();
            runs.push(row![
                c.target.label(),
                c.param,
                c.d,
                c.kernel.algorithm.label(),
                c.kernel.rho,
                o.index,
                o.seed,
                o.status(),
                v.map(|v| v.h_bar),
                v.map(|v| v.g_bar),
                v.map_or(String::new(), |v| v.reflections.to_string()),
                v.map_or(String::new(), |v| v.refreshments.to_string()),
                o.error(),
            ]);
            timing.push(row![
                c.target.label(),
                c.param,
                c.d,
                c.kernel.algorithm.label(),
                c.kernel.rho,
                o.index,
                o.wall_secs,
            ]);
        }
    }
    files.push(runs.write(&cfg.out.join(format!("{prefix}_runs.csv")))?);

    let mut summary = Table::new(&[
        "target",
        pname,
        "d",
        "algorithm",
        "rho",
        "horizon",
        "replicates",
        "succeeded",
        "ess",
        "ci_lo",
        "ci_hi",
        "interval",
        "mse",
        "theory_ess",
        "covers_theory",
        "mean_events",
        "ess_per_event",
    ]);
    let mut timing_summary = Table::new(&[
        "target",
        pname,
        "d",
        "algorithm",
        "rho",
        "mean_wall_secs",
        "ess_per_cpu_second",
    ]);
    for c in &res.cells {
        summary.push(row![
            c.target.label(),
            c.param,
            c.d,
            c.kernel.algorithm.label(),
            c.kernel.rho,
            cfg.horizon,
            c.runs.len(),
            c.ess.replicates,
            c.ess.ess,
            c.ess.ci_lo,
            c.ess.ci_hi,
            format!("{:?}", c.ess.method).to_lowercase(),
            c.ess.mse,
            c.theory,
            c.covers_theory(),
            c.mean_events,
            c.ess_per_event(),
        ]);
        timing_summary.push(row![
            c.target.label(),
            c.param,
            c.d,
            c.kernel.algorithm.label(),
            c.kernel.rho,
            c.mean_wall_secs,
            c.ess_per_cpu_second(),
        ]);
    }
    files.push(summary.write(&cfg.out.join(format!("{prefix}_summary.csv")))?);

    let mut ratio = Table::new(&[
        pname,
        "d",
        "fecmc",
        "bps",
        "ess_ratio",
        "theory_ratio",
        "per_event_ratio",
    ]);
    let mut cpu = Table::new(&[pname, "d", "fecmc", "bps", "cpu_ratio"]);
    for r in &res.ratios {
        ratio.push(row![
            r.param,
            r.d,
            r.fecmc.clone(),
            r.bps.clone(),
            r.ess_ratio,
            r.theory_ratio,
            r.per_event_ratio
        ]);
        cpu.push(row![
            r.param,
            r.d,
            r.fecmc.clone(),
            r.bps.clone(),
            r.cpu_ratio
        ]);
    }
    files.push(ratio.write(&cfg.out.join(format!("{prefix}_ratio.csv")))?);
    files.push(timing.write(&cfg.out.join(format!("{prefix}_timing.csv")))?);
    files.push(timing_summary.write(&cfg.out.join(format!("{prefix}_timing_summary.csv")))?);
    files.push(cpu.write(&cfg.out.join(format!("{prefix}_cpu_ratio.csv")))?);
    files.push(write_text(
        &cfg.out.join(format!("{prefix}.svg")),
        &figure(cfg, &res).render(),
    )?);

    Ok(Report {
        experiment: cfg.experiment,
        files,
        summary: json!({
            "cells": res.cells.iter().map(|c| json!({
                "target": c.target.label(),
                "param": c.param,
                "d": c.d,
                "kernel": kernel_label(&c.kernel),
                "ess": c.ess.ess,
                "ci": [c.ess.ci_lo, c.ess.ci_hi],
                "theory": c.theory,
                "covers_theory": c.covers_theory(),
            })).collect::<Vec<_>>(),
            "ratios": res.ratios,
        }),
    })
}

fn figure(cfg: &ExperimentConfig, res: &EssResult) -> Figure {
    let deviation = cfg.experiment == ExperimentKind::DeviationScan;
    let nu = cfg.deviation.parameter == DeviationParameter::Nu;
    let x_axis = match (deviation, nu) {
        (false, _) => Axis::log("dimension d"),
        (true, false) => Axis::linear("equicorrelation gamma"),
        (true, true) => Axis::log("1/nu"),
    };
    let x_of = |c: &Cell| match (c.param, nu) {
        (None, _) => c.d as f64,
        (Some(p), true) => 1.0 / p,
        (Some(p), false) => p,
    };
    let title = if deviation {
        format!("ESS against target deviation, d = {}", cfg.deviation.d)
    } else {
        format!("ESS against dimension, {}", cfg.target.label())
    };
    let mut fig = Figure::new(&title, x_axis, Axis::linear("ESS"));
    for (i, k) in cfg.kernels.iter().enumerate() {
        let cells: Vec<&Cell> = res.cells.iter().filter(|c| c.kernel == *k).collect();
        fig.series.push(Series {
            name: kernel_label(k),
            points: cells.iter().map(|c| (x_of(c), c.ess.ess)).collect(),
            errors: Some(cells.iter().map(|c| (c.ess.ci_lo, c.ess.ci_hi)).collect()),
            mark: Mark::LinePoints,
            color: color(i),
        });
        if let Some(c) = cells.first() {
            fig.ref_lines.push(RefLine {
                y: c.theory,
                label: format!("theory {:.1}", c.theory),
                color: color(i),
            });
        }
    }
    fig
}
