//! Experiment configuration.
//!
//! A config is a JSON document. Loading starts from the defaults of the
//! selected experiment, merges the file on top key by key, then applies
//! `key.path=value` overrides and finally the dedicated CLI flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use ecmc_core::kernels::{Algorithm, KernelSpec};
use ecmc_core::targets::TargetKind;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SigmaCurve,
    #[default]
    EssScan,
    DeviationScan,
    BmCompare,
    LimitCheck,
    Simulate,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::SigmaCurve => "sigma_curve",
            ExperimentKind::EssScan => "ess_scan",
            ExperimentKind::DeviationScan => "deviation_scan",
            ExperimentKind::BmCompare => "bm_compare",
            ExperimentKind::LimitCheck => "limit_check",
            ExperimentKind::Simulate => "simulate",
        }
    }

    /// Label mixed into replicate seeds. ESS and deviation scans share one,
    /// so a deviation point that coincides with a plain scan (γ = 0) reuses
    /// its streams.
    pub fn seed_namespace(&self) -> &'static str {
        match self {
            ExperimentKind::EssScan | ExperimentKind::DeviationScan => "ess",
            other => other.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaCurveSettings {
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
    /// Bracket searched for the maximiser of `σ_B²`.
    pub bracket: [f64; 2],
}

impl Default for SigmaCurveSettings {
    fn default() -> Self {
        Self {
            rho_min: 1e-3,
            rho_max: 20.0,
            points: 200,
            bracket: [0.1, 5.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationParameter {
    /// Equicorrelation of the Gaussian target.
    Gamma,
    /// Degrees of freedom of the Student target.
    Nu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationSettings {
    pub parameter: DeviationParameter,
    pub values: Vec<f64>,
    pub d: usize,
}

impl Default for DeviationSettings {
    fn default() -> Self {
        Self {
            parameter: DeviationParameter::Gamma,
            values: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            d: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmSettings {
    /// Sampler-time horizon per run, in units of `d`.
    pub horizon_factor: f64,
    /// Constant `c` of the slow batch length `c·(H/d)^{1/3}·d`.
    pub slow_c: f64,
    /// Fast batch length in units of `√d`.
    pub fast_factor: f64,
    /// Runs used to estimate the reference value on non-Gaussian targets.
    pub pilot_runs: usize,
    /// Horizon of each pilot run relative to a regular run.
    pub pilot_factor: f64,
}

impl Default for BmSettings {
    fn default() -> Self {
        Self {
            horizon_factor: 1e3,
            slow_c: 1.0,
            fast_factor: ecmc_core::estimators::FAST_BATCH_FACTOR,
            pilot_runs: 4,
            pilot_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSettings {
    pub gk_paths: usize,
    pub gk_horizon: f64,
    pub gk_rhos: Vec<f64>,
    pub gk_bootstrap: usize,
    pub ou_d: usize,
    /// Rescaled-time horizon of each OU-fit run.
    pub ou_horizon: f64,
    pub ou_runs: usize,
    pub ou_step: f64,
    pub ou_max_lag: f64,
    pub ou_tolerance: f64,
    pub jump_dims: Vec<usize>,
    /// Sampler-time horizon of each jump-frequency run.
    pub jump_horizon: f64,
    pub jump_runs: usize,
    /// Pass band in standard errors for Monte Carlo checks.
    pub z: f64,
}

impl Default for LimitSettings {
    fn default() -> Self {
        Self {
            gk_paths: 2000,
            gk_horizon: 60.0,
            gk_rhos: vec![0.0, 0.5, 1.423, 3.0],
            gk_bootstrap: 1000,
            ou_d: 100,
            ou_horizon: 2000.0,
            ou_runs: 4,
            ou_step: 0.1,
            ou_max_lag: 2.0,
            ou_tolerance: 0.15,
            jump_dims: vec![10, 100, 1000],
            jump_horizon: 1e4,
            jump_runs: 20,
            z: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSettings {
    pub d: usize,
    /// Sampler-time horizon.
    pub horizon: f64,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        Self {
            d: 10,
            horizon: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; all cores when absent.
    pub threads: Option<usize>,
    pub target: TargetKind,
    pub kernels: Vec<KernelSpec>,
    pub dims: Vec<usize>,
    /// Horizon `T` in rescaled time `t/d`.
    pub horizon: f64,
    pub replicates: usize,
    pub bootstrap_resamples: usize,
    pub confidence: f64,
    /// Fraction of replicates that must succeed for an aggregate row.
    pub min_success: f64,
    pub sigma_curve: SigmaCurveSettings,
    pub deviation: DeviationSettings,
    pub bm: BmSettings,
    pub limit: LimitSettings,
    pub simulate: SimulateSettings,
}

/// Refreshment rate used for BPS in the default configs.
pub const DEFAULT_BPS_RHO: f64 = 1.42;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::EssScan,
            seed: 20_240_601,
            out: PathBuf::from("out"),
            threads: None,
            target: TargetKind::StdGaussian,
            kernels: vec![KernelSpec::fecmc(0.0), KernelSpec::bps(DEFAULT_BPS_RHO)],
            dims: vec![10, 20, 40, 80, 160],
            horizon: 100.0,
            replicates: 200,
            bootstrap_resamples: 2000,
            confidence: 0.95,
            min_success: 0.8,
            sigma_curve: SigmaCurveSettings::default(),
            deviation: DeviationSettings::default(),
            bm: BmSettings::default(),
            limit: LimitSettings::default(),
            simulate: SimulateSettings::default(),
        }
    }
}

impl ExperimentConfig {
    /// Desk-scale defaults for one experiment.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment: kind,
            ..Self::default()
        };
        match kind {
            ExperimentKind::BmCompare => {
                cfg.kernels = vec![KernelSpec::fecmc(0.0)];
                cfg.dims = vec![16, 32, 64];
                cfg.replicates = 20;
            }
            ExperimentKind::Simulate => {
                cfg.kernels = vec![KernelSpec::fecmc(0.0)];
            }
            _ => {}
        }
        cfg
    }

    /// Full-scale ESS sweep: `R = 1000` and dimensions up to 320.
    pub fn full_scale(kind: ExperimentKind) -> Self {
        let mut cfg = Self::defaults(kind);
        cfg.replicates = 1000;
        cfg.dims = vec![10, 20, 40, 80, 160, 320];
        cfg.deviation.d = 100;
        if kind == ExperimentKind::BmCompare {
            cfg.bm.horizon_factor = 1e4;
        }
        cfg
    }

    /// Builds a config from defaults, an optional JSON file, and dotted
    /// `key=value` overrides (values parsed as JSON, else taken as strings).
    pub fn load(
        kind: ExperimentKind,
        file: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<Self> {
        let mut value = serde_json::to_value(Self::defaults(kind))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let file_value: Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            if let Some(k) = file_value.get("experiment") {
                let k: ExperimentKind = serde_json::from_value(k.clone())
                    .with_context(|| format!("'experiment' in {}", path.display()))?;
                ensure!(
                    k == kind,
                    "config {} is for '{}' but the command is '{}'",
                    path.display(),
                    k.label(),
                    kind.label()
                );
            }
            merge(&mut value, file_value);
        }
        for (key, raw) in overrides {
            set_path(&mut value, key, parse_override(raw))?;
        }
        let cfg: Self = serde_json::from_value(value).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks; every numeric field must be positive where it is a
    /// size, rate or horizon.
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.horizon > 0.0 && self.horizon.is_finite(),
            "horizon must be positive"
        );
        ensure!(self.replicates >= 1, "replicates must be positive");
        ensure!(!self.kernels.is_empty(), "at least one kernel is required");
        ensure!(
            self.bootstrap_resamples >= 1,
            "bootstrap_resamples must be positive"
        );
        ensure!(
            self.confidence > 0.0 && self.confidence < 1.0,
            "confidence must lie in (0, 1)"
        );
        ensure!(
            self.min_success > 0.0 && self.min_success <= 1.0,
            "min_success must lie in (0, 1]"
        );
        if let Some(t) = self.threads {
            ensure!(t >= 1, "threads must be positive");
        }
        let uses_dims = matches!(
            self.experiment,
            ExperimentKind::EssScan | ExperimentKind::BmCompare
        );
        if uses_dims {
            ensure!(!self.dims.is_empty(), "dims must not be empty");
            ensure!(
                self.dims.iter().all(|&d| d >= 1),
                "dimensions must be positive"
            );
        }
        let s = &self.sigma_curve;
        ensure!(
            s.rho_min > 0.0 && s.rho_max > s.rho_min,
            "sigma_curve needs 0 < rho_min < rho_max"
        );
        ensure!(s.points >= 1, "sigma_curve.points must be positive");
        ensure!(
            s.bracket[0] > 0.0 && s.bracket[1] > s.bracket[0],
            "invalid sigma_curve.bracket"
        );
        let b = &self.bm;
        ensure!(
            b.horizon_factor > 0.0 && b.slow_c > 0.0 && b.fast_factor > 0.0 && b.pilot_factor > 0.0,
            "bm settings must be positive"
        );
        ensure!(b.pilot_runs >= 1, "bm.pilot_runs must be positive");
        let l = &self.limit;
        ensure!(
            l.gk_paths >= 2 && l.gk_horizon > 0.0,
            "invalid Green-Kubo settings"
        );
        ensure!(
            l.gk_rhos.iter().all(|&r| r >= 0.0),
            "Green-Kubo rates must be >= 0"
        );
        ensure!(
            l.ou_d >= 3 && l.ou_horizon > 0.0 && l.ou_runs >= 1 && l.ou_step > 0.0,
            "invalid OU-fit settings"
        );
        ensure!(l.ou_max_lag >= l.ou_step, "ou_max_lag must cover one step");
        ensure!(
            l.jump_dims.iter().all(|&d| d >= 3),
            "jump_dims must be >= 3"
        );
        ensure!(
            l.jump_horizon > 0.0 && l.jump_runs >= 2,
            "invalid jump-frequency settings"
        );
        ensure!(
            self.simulate.d >= 1 && self.simulate.horizon >= 0.0,
            "invalid simulate settings"
        );
        if self.experiment == ExperimentKind::DeviationScan {
            let dv = &self.deviation;
            ensure!(!dv.values.is_empty(), "deviation.values must not be empty");
            ensure!(dv.d >= 1, "deviation.d must be positive");
            for &p in &dv.values {
                match dv.parameter {
                    DeviationParameter::Gamma => {
                        ensure!((0.0..1.0).contains(&p), "gamma must lie in [0, 1), got {p}")
                    }
                    DeviationParameter::Nu => ensure!(p > 4.0, "nu must exceed 4, got {p}"),
                }
            }
        }
        for k in &self.kernels {
            for &d in &self.dims_in_use() {
                k.validate(d)
                    .with_context(|| format!("kernel {} at d = {d}", k.algorithm))?;
            }
        }
        Ok(())
    }

    /// Dimensions the experiment will actually run.
    pub fn dims_in_use(&self) -> Vec<usize> {
        match self.experiment {
            ExperimentKind::EssScan | ExperimentKind::BmCompare => self.dims.clone(),
            ExperimentKind::DeviationScan => vec![self.deviation.d],
            ExperimentKind::Simulate => vec![self.simulate.d],
            ExperimentKind::SigmaCurve | ExperimentKind::LimitCheck => Vec::new(),
        }
    }

    pub fn first_kernel(&self, algorithm: Algorithm) -> Option<KernelSpec> {
        self.kernels
            .iter()
            .copied()
            .find(|k| k.algorithm == algorithm)
    }
}

/// Parses `std_gaussian`, `aniso_gaussian:γ`, `iid_logistic`, `student:ν`.
pub fn parse_target(spec: &str) -> Result<TargetKind> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let num = |what: &str| -> Result<f64> {
        let a = arg.with_context(|| format!("target '{name}' needs ':{what}'"))?;
        a.parse()
            .with_context(|| format!("bad {what} '{a}' in target '{spec}'"))
    };
    Ok(match name {
        "std_gaussian" => TargetKind::StdGaussian,
        "aniso_gaussian" => TargetKind::AnisoGaussian {
            gamma: num("gamma")?,
        },
        "iid_logistic" => TargetKind::IidLogistic,
        "student" => TargetKind::Student { nu: num("nu")? },
        _ => bail!("unknown target '{spec}'"),
    })
}

fn parse_override(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Recursively merges `patch` into `base`; objects merge key-wise, anything
/// else replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set_path(value: &mut Value, key: &str, new: Value) -> Result<()> {
    let mut cur = value;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), new);
                    return Ok(());
                }
                map.entry((*part).to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .with_context(|| format!("'{part}' in '{key}' is not an index"))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .with_context(|| format!("index {idx} out of range ({len}) in '{key}'"))?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                slot
            }
            _ => bail!("cannot descend into '{part}' of '{key}'"),
        };
    }
    bail!("empty override key")
}
