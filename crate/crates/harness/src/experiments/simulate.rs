use std::fs::File;
use std::io::BufWriter;

use anyhow::{Context, Result};
use ecmc_core::pdmp::run_sampler;
use ecmc_core::targets::TargetModel;
use serde_json::json;

use super::Report;
use crate::config::ExperimentConfig;
use crate::seeds::replicate_seed;

/// One run of the first configured kernel, dumped as a skeleton CSV.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let s = &cfg.simulate;
    let kernel = cfg.kernels[0];
    let target = TargetModel::new(cfg.target, s.d)?;
    let seed = replicate_seed(
        cfg.seed,
        cfg.experiment.seed_namespace(),
        s.d,
        kernel.algorithm,
        0,
    );
    let skeleton = run_sampler(&target, &kernel, s.horizon, seed)?;
    let path = cfg.out.join("skeleton.csv");
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    skeleton
        .write_csv(BufWriter::new(file))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(Report {
        experiment: cfg.experiment,
        files: vec![path],
        summary: json!({
            "events": skeleton.len(),
            "reflections": skeleton.reflections(),
            "seed": seed,
        }),
    })
}
