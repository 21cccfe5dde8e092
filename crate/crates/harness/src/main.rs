use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ecmc_lab::config::{parse_target, ExperimentConfig, ExperimentKind};
use ecmc_lab::run_experiment;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ecmc-lab",
    version,
    about = "Run BPS/FECMC experiments and write CSV and SVG outputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form diffusivity curves and the BPS optimum.
    SigmaCurve(Common),
    /// ESS against dimension.
    EssScan(Common),
    /// ESS against a target deviation parameter at fixed dimension.
    DeviationScan(Common),
    /// Slow against fast batch-means estimators.
    BmCompare(Common),
    /// Green-Kubo, OU-fit and jump-frequency checks.
    LimitCheck(Common),
    /// Dump one event skeleton.
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; keys absent from the file keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Horizon in rescaled time.
    #[arg(long)]
    horizon: Option<f64>,
    /// `std_gaussian`, `aniso_gaussian:GAMMA`, `iid_logistic` or `student:NU`.
    #[arg(long)]
    target: Option<String>,
    /// Dotted config key override, e.g. `--set bm.slow_c=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the resolved config and exit.
    #[arg(long)]
    dry_run: bool,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::SigmaCurve(c) => (ExperimentKind::SigmaCurve, c),
            Command::EssScan(c) => (ExperimentKind::EssScan, c),
            Command::DeviationScan(c) => (ExperimentKind::DeviationScan, c),
            Command::BmCompare(c) => (ExperimentKind::BmCompare, c),
            Command::LimitCheck(c) => (ExperimentKind::LimitCheck, c),
            Command::Simulate(c) => (ExperimentKind::Simulate, c),
        }
    }
}

fn resolve(kind: ExperimentKind, c: &Common) -> Result<ExperimentConfig> {
    let mut overrides = Vec::new();
    for s in &c.set {
        let (k, v) = s
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got '{s}'"))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let mut push = |k: &str, v: String| overrides.push((k.to_string(), v));
    if let Some(s) = c.seed {
        push("seed", s.to_string());
    }
    if let Some(o) = &c.out {
        push("out", serde_json::to_string(o)?);
    }
    if let Some(t) = c.threads {
        push("threads", t.to_string());
    }
    if let Some(d) = &c.dims {
        push("dims", serde_json::to_string(d)?);
    }
    if let Some(r) = c.replicates {
        push("replicates", r.to_string());
    }
    if let Some(h) = c.horizon {
        push("horizon", serde_json::to_string(&h)?);
    }
    if let Some(t) = &c.target {
        push("target", serde_json::to_string(&parse_target(t)?)?);
    }
    ExperimentConfig::load(kind, c.config.as_deref(), &overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = cli.command.split();
    let result = resolve(kind, &common).and_then(|cfg| {
        if common.dry_run {
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            return Ok(None);
        }
        run_experiment(&cfg).map(Some)
    });
    match result {
        Ok(Some(report)) => {
            println!("{}", json!({ "status": "ok", "report": report }));
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!(
                "{}",
                json!({ "status": "error", "experiment": kind.label(), "error": format!("{e:#}"), "causes": chain })
            );
            ExitCode::FAILURE
        }
    }
}
