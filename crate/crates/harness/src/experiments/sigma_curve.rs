use anyhow::{Context, Result};
use ecmc_core::diffusivity::{log_grid, optimize_sigma2_b, sigma2_f_zero, DiffusivityCurve};
use serde::Serialize;
use serde_json::json;

use super::Report;
use crate::config::ExperimentConfig;
use crate::output::{write_text, Table};
use crate::row;
use crate::svg::{color, Axis, Figure, Mark, Marker, RefLine, Series};

#[derive(Debug, Clone, Serialize)]
pub struct SigmaCurveResult {
    pub rho: Vec<f64>,
    pub sigma2_f: Vec<f64>,
    pub sigma2_b: Vec<f64>,
    pub sigma2_f_zero: f64,
    pub rho_star: f64,
    pub sigma2_b_star: f64,
    pub f_dominates_b: bool,
    pub f_decreasing: bool,
}

impl SigmaCurveResult {
    /// `σ_F²(0⁺)/σ_B²(ρ*)`.
    pub fn ratio_at_optimum(&self) -> f64 {
        self.sigma2_f_zero / self.sigma2_b_star
    }
}

pub fn compute(cfg: &ExperimentConfig) -> Result<SigmaCurveResult> {
    let s = &cfg.sigma_curve;
    let grid = log_grid(s.rho_min, s.rho_max, s.points);
    let curve = DiffusivityCurve::<f64>::closed_form(&grid).context("sigma curve")?;
    let best = optimize_sigma2_b(s.bracket[0], s.bracket[1]).context("maximising sigma_B^2")?;
    Ok(SigmaCurveResult {
        f_dominates_b: curve.f_dominates_b(),
        f_decreasing: curve.f_strictly_decreasing(),
        rho: curve.rho,
        sigma2_f: curve.sigma2_f,
        sigma2_b: curve.sigma2_b,
        sigma2_f_zero: sigma2_f_zero(),
        rho_star: best.arg,
        sigma2_b_star: best.value,
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let res = compute(cfg)?;
    let mut files = Vec::new();

    let mut curve = Table::new(&["rho", "sigma2_f", "sigma2_b", "sigma_f", "sigma_b", "ratio"]);
    for ((&r, &f), &b) in res.rho.iter().zip(&res.sigma2_f).zip(&res.sigma2_b) {
        curve.push(row![r, f, b, f.sqrt(), b.sqrt(), f / b]);
    }
    files.push(curve.write(&cfg.out.join("sigma_curve.csv"))?);

    let mut summary = Table::new(&["quantity", "value"]);
    summary.push(row!["sigma2_f_zero", res.sigma2_f_zero]);
    summary.push(row!["sigma_f_zero", res.sigma2_f_zero.sqrt()]);
    summary.push(row!["rho_star", res.rho_star]);
    summary.push(row!["sigma2_b_star", res.sigma2_b_star]);
    summary.push(row!["sigma_b_star", res.sigma2_b_star.sqrt()]);
    summary.push(row!["ratio_f_zero_over_b_star", res.ratio_at_optimum()]);
    summary.push(row!["f_dominates_b", res.f_dominates_b]);
    summary.push(row!["f_strictly_decreasing", res.f_decreasing]);
    files.push(summary.write(&cfg.out.join("sigma_curve_summary.csv"))?);

    let mut fig = Figure::new(
        "Diffusivity against refreshment rate",
        Axis::log("refreshment rate rho"),
        Axis::linear("sigma(rho)"),
    );
    let sqrt_series = |v: &[f64]| -> Vec<(f64, f64)> {
        res.rho
            .iter()
            .zip(v)
            .map(|(&r, &s)| (r, s.sqrt()))
            .collect()
    };
    fig.series.push(Series {
        name: "FECMC".into(),
        points: sqrt_series(&res.sigma2_f),
        errors: None,
        mark: Mark::Line,
        color: color(0),
    });
    fig.series.push(Series {
        name: "BPS".into(),
        points: sqrt_series(&res.sigma2_b),
        errors: None,
        mark: Mark::Line,
        color: color(1),
    });
    fig.ref_lines.push(RefLine {
        y: res.sigma2_f_zero.sqrt(),
        label: format!("FECMC rho->0: {:.4}", res.sigma2_f_zero.sqrt()),
        color: color(0),
    });
    fig.markers.push(Marker {
        x: res.rho_star,
        y: res.sigma2_b_star.sqrt(),
        label: format!("rho* = {:.4}", res.rho_star),
    });
    files.push(write_text(&cfg.out.join("sigma_curve.svg"), &fig.render())?);

    Ok(Report {
        experiment: cfg.experiment,
        files,
        summary: json!({
            "sigma2_f_zero": res.sigma2_f_zero,
            "rho_star": res.rho_star,
            "sigma2_b_star": res.sigma2_b_star,
            "ratio": res.ratio_at_optimum(),
            "f_dominates_b": res.f_dominates_b,
        }),
    })
}
