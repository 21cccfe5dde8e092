//! Experiment drivers. Each submodule exposes `compute` (pure, returns typed
//! rows) and `write` (CSV and SVG files); [`run_experiment`] wires them up.

pub mod bm;
pub mod ess;
pub mod limit;
pub mod sigma_curve;
pub mod simulate;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::write_text;

/// What a finished experiment produced.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// One replicate: its index, seed, result and wall-clock time.
#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub index: usize,
    pub seed: u64,
    pub result: std::result::Result<T, String>,
    pub wall_secs: f64,
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        self.result.as_ref().ok()
    }

    pub fn status(&self) -> &'static str {
        if self.result.is_ok() {
            "ok"
        } else {
            "failed"
        }
    }

    pub fn error(&self) -> String {
        self.result.as_ref().err().cloned().unwrap_or_default()
    }
}

/// Runs `n` replicates on the current rayon pool. Output order follows the
/// replicate index, whatever the completion order.
pub fn run_replicates<T, S, F>(n: usize, seed_of: S, run: F) -> Vec<Outcome<T>>
where
    T: Send,
    S: Fn(u64) -> u64 + Sync,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = seed_of(i as u64);
            let start = Instant::now();
            let result = run(seed).map_err(|e| format!("{e:#}"));
            Outcome {
                index: i,
                seed,
                result,
                wall_secs: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// Successful results, or an error when fewer than `min_success` of the
/// replicates succeeded.
pub fn successes<'a, T>(
    outcomes: &'a [Outcome<T>],
    min_success: f64,
    what: &str,
) -> Result<Vec<&'a T>> {
    let ok: Vec<&T> = outcomes.iter().filter_map(Outcome::ok).collect();
    let needed = (min_success * outcomes.len() as f64).ceil() as usize;
    if ok.len() < needed.max(1) {
        let first = outcomes
            .iter()
            .find_map(|o| o.result.as_ref().err())
            .cloned()
            .unwrap_or_default();
        bail!(
            "{what}: only {}/{} replicates succeeded (need {needed}); first error: {first}",
            ok.len(),
            outcomes.len()
        );
    }
    Ok(ok)
}

/// Creates the output directory, sizes the worker pool and runs the
/// configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().context("building worker pool")?;
    let mut report = pool.install(|| match cfg.experiment {
        ExperimentKind::SigmaCurve => sigma_curve::run(cfg),
        ExperimentKind::EssScan | ExperimentKind::DeviationScan => ess::run(cfg),
        ExperimentKind::BmCompare => bm::run(cfg),
        ExperimentKind::LimitCheck => limit::run(cfg),
        ExperimentKind::Simulate => simulate::run(cfg),
    })?;
    let resolved = serde_json::to_string_pretty(cfg)? + "\n";
    report.files.push(write_text(
        &cfg.out.join("config.resolved.json"),
        &resolved,
    )?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcomes(ok: usize, failed: usize) -> Vec<Outcome<f64>> {
        (0..ok + failed)
            .map(|i| Outcome {
                index: i,
                seed: i as u64,
                result: if i < ok {
                    Ok(i as f64)
                } else {
                    Err(format!("run {i} failed"))
                },
                wall_secs: 0.0,
            })
            .collect()
    }

    #[test]
    fn aggregate_needs_eighty_percent() {
        assert_eq!(successes(&outcomes(8, 2), 0.8, "x").unwrap().len(), 8);
        let err = successes(&outcomes(7, 3), 0.8, "x")
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("7/10") && err.contains("run 7 failed"),
            "{err}"
        );
        assert!(successes(&outcomes(0, 0), 0.8, "x").is_err());
    }

    #[test]
    fn replicates_come_back_in_index_order() {
        let out = run_replicates(50, |r| 1000 + r, |s| Ok(s * 2));
        for (i, o) in out.iter().enumerate() {
            assert_eq!(o.index, i);
            assert_eq!(o.result, Ok(2 * (1000 + i as u64)));
        }
    }
}
