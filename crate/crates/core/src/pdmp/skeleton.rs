use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::limits::{LimitKind, LimitProcessPath};
use super::observe::{GridObserver, TrajectoryObserver};
use crate::kernels::{Algorithm, KernelSpec};
use crate::targets::{TargetKind, TargetModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventTag {
    Init,
    Reflection { switched: bool },
    Refreshment,
    HorizonEnd,
}

impl EventTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventTag::Init => "init",
            EventTag::Reflection { switched: false } => "reflection",
            EventTag::Reflection { switched: true } => "reflection_switched",
            EventTag::Refreshment => "refreshment",
            EventTag::HorizonEnd => "horizon_end",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "init" => EventTag::Init,
            "reflection" => EventTag::Reflection { switched: false },
            "reflection_switched" => EventTag::Reflection { switched: true },
            "refreshment" => EventTag::Refreshment,
            "horizon_end" => EventTag::HorizonEnd,
            _ => return None,
        })
    }
}

/// Run metadata stored in the first line of the CSV form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonHeader {
    pub d: usize,
    pub target: TargetKind,
    pub kernel: KernelSpec,
    pub seed: u64,
}

/// Event times with the state right after each event. Between entries `k`
/// and `k+1` the position moves along `x_k + s·v_k`.
#[derive(Debug, Clone)]
pub struct EventSkeleton {
    header: SkeletonHeader,
    times: Vec<f64>,
    positions: Vec<f64>,
    velocities: Vec<f64>,
    tags: Vec<EventTag>,
}

impl EventSkeleton {
    pub fn new(header: SkeletonHeader) -> Self {
        Self {
            header,
            times: Vec::new(),
            positions: Vec::new(),
            velocities: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn header(&self) -> &SkeletonHeader {
        &self.header
    }

    pub fn dim(&self) -> usize {
        self.header.d
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn tags(&self) -> &[EventTag] {
        &self.tags
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    pub fn position(&self, k: usize) -> &[f64] {
        let d = self.header.d;
        &self.positions[k * d..(k + 1) * d]
    }

    pub fn velocity(&self, k: usize) -> &[f64] {
        let d = self.header.d;
        &self.velocities[k * d..(k + 1) * d]
    }

    pub fn tag(&self, k: usize) -> EventTag {
        self.tags[k]
    }

    /// Final time (the horizon once the run has ended).
    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn push(&mut self, t: f64, tag: EventTag, x: &[f64], v: &[f64]) {
        debug_assert_eq!(x.len(), self.header.d);
        self.times.push(t);
        self.tags.push(tag);
        self.positions.extend_from_slice(x);
        self.velocities.extend_from_slice(v);
    }

    pub fn count(&self, pred: impl Fn(EventTag) -> bool) -> usize {
        self.tags.iter().filter(|&&t| pred(t)).count()
    }

    pub fn reflections(&self) -> usize {
        self.count(|t| matches!(t, EventTag::Reflection { .. }))
    }

    /// Feeds the trajectory to an observer exactly as the sampler did, up to
    /// the merging of empty thinning windows into one segment.
    pub fn replay<O: TrajectoryObserver>(&self, mut observer: O) {
        for k in 0..self.len() {
            if k > 0 {
                let t0 = self.times[k - 1];
                observer.segment(
                    t0,
                    self.position(k - 1),
                    self.velocity(k - 1),
                    self.times[k] - t0,
                );
            }
            observer.event(
                self.times[k],
                self.tags[k],
                self.position(k),
                self.velocity(k),
            );
        }
    }

    /// Largest `|x_{k+1} - (x_k + Δt·v_k)|_∞` over the skeleton.
    pub fn reconstruction_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.len() {
            let dt = self.times[k] - self.times[k - 1];
            let (x0, v0, x1) = (self.position(k - 1), self.velocity(k - 1), self.position(k));
            for i in 0..self.header.d {
                worst = worst.max((x1[i] - (x0[i] + dt * v0[i])).abs());
            }
        }
        worst
    }

    /// Largest `|‖v_k‖ - 1|`.
    pub fn max_speed_error(&self) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.velocity(k);
                (v.iter().map(|a| a * a).sum::<f64>().sqrt() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Writes the CSV form: a `#` metadata line, a header row
    /// `t,tag,x0..,v0..`, then one row per entry. Floats use the shortest
    /// representation that round-trips.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut writer = writer;
        writeln!(writer, "# {}", format_header(&self.header))?;
        let mut csv = csv::Writer::from_writer(writer);
        let d = self.header.d;
        let mut row: Vec<String> = Vec::with_capacity(2 + 2 * d);
        row.push("t".into());
        row.push("tag".into());
        row.extend((0..d).map(|i| format!("x{i}")));
        row.extend((0..d).map(|i| format!("v{i}")));
        csv.write_record(&row)?;
        for k in 0..self.len() {
            row.clear();
            row.push(self.times[k].to_string());
            row.push(self.tags[k].as_str().into());
            row.extend(self.position(k).iter().map(f64::to_string));
            row.extend(self.velocity(k).iter().map(f64::to_string));
            csv.write_record(&row)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut reader = BufReader::new(reader);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let meta = first
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::Format("missing '#' metadata line".into()))?;
        let header = parse_header(meta.trim())?;
        let d = header.d;
        let mut skeleton = EventSkeleton::new(header);
        let mut csv = csv::Reader::from_reader(reader);
        let columns = csv.headers()?.len();
        if columns != 2 + 2 * d {
            return Err(Error::Format(format!(
                "expected {} columns for d = {d}, found {columns}",
                2 + 2 * d
            )));
        }
        let mut x = vec![0.0; d];
        let mut v = vec![0.0; d];
        for (line, record) in csv.records().enumerate() {
            let record = record?;
            let num = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {}: column {i}: {e}", line + 1)))
            };
            let t = num(0)?;
            let tag = EventTag::parse(&record[1])
                .ok_or_else(|| Error::Format(format!("unknown tag '{}'", &record[1])))?;
            for i in 0..d {
                x[i] = num(2 + i)?;
                v[i] = num(2 + d + i)?;
            }
            skeleton.push(t, tag, &x, &v);
        }
        Ok(skeleton)
    }
}

impl TrajectoryObserver for EventSkeleton {
    fn event(&mut self, t: f64, tag: EventTag, x: &[f64], v: &[f64]) {
        self.push(t, tag, x, v);
    }
}

fn format_header(h: &SkeletonHeader) -> String {
    let target = match h.target {
        TargetKind::StdGaussian => "target=std_gaussian".to_string(),
        TargetKind::AnisoGaussian { gamma } => format!("target=aniso_gaussian gamma={gamma}"),
        TargetKind::IidLogistic => "target=iid_logistic".to_string(),
        TargetKind::Student { nu } => format!("target=student nu={nu}"),
    };
    format!(
        "d={} {target} kernel={} rho={} switch_prob={} seed={}",
        h.d, h.kernel.algorithm, h.kernel.rho, h.kernel.switch_prob, h.seed
    )
}

fn parse_header(s: &str) -> Result<SkeletonHeader> {
    let mut get = std::collections::HashMap::new();
    for token in s.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad metadata token '{token}'")))?;
        get.insert(k, v);
    }
    let field = |k: &str| -> Result<&str> {
        get.get(k)
            .copied()
            .ok_or_else(|| Error::Format(format!("metadata lacks '{k}'")))
    };
    let num = |k: &str| -> Result<f64> {
        field(k)?
            .parse::<f64>()
            .map_err(|e| Error::Format(format!("metadata '{k}': {e}")))
    };
    let target = match field("target")? {
        "std_gaussian" => TargetKind::StdGaussian,
        "aniso_gaussian" => TargetKind::AnisoGaussian {
            gamma: num("gamma")?,
        },
        "iid_logistic" => TargetKind::IidLogistic,
        "student" => TargetKind::Student { nu: num("nu")? },
        other => return Err(Error::Format(format!("unknown target '{other}'"))),
    };
    let algorithm = match field("kernel")? {
        "bps" => Algorithm::Bps,
        "fecmc" => Algorithm::Fecmc,
        other => return Err(Error::Format(format!("unknown kernel '{other}'"))),
    };
    Ok(SkeletonHeader {
        d: field("d")?
            .parse()
            .map_err(|e| Error::Format(format!("metadata 'd': {e}")))?,
        target,
        kernel: KernelSpec {
            algorithm,
            rho: num("rho")?,
            switch_prob: num("switch_prob")?,
        },
        seed: field("seed")?
            .parse()
            .map_err(|e| Error::Format(format!("metadata 'seed': {e}")))?,
    })
}

/// Scaled potential `Y = √2·(U - E_π U)/√(Var_π U)` at each skeleton entry,
/// with time divided by `d`. For Gaussian targets this is `(2U - d)/√d`.
pub fn potential_path(skeleton: &EventSkeleton, target: &TargetModel) -> LimitProcessPath {
    let stats = target.normalization_stats();
    let scale = (2.0 / stats.var_u).sqrt();
    let d = skeleton.dim() as f64;
    let times: Vec<f64> = skeleton.times().iter().map(|t| t / d).collect();
    let values: Vec<f64> = (0..skeleton.len())
        .map(|k| scale * (target.potential_unchecked(skeleton.position(k)) - stats.mean_u))
        .collect();
    LimitProcessPath::potential(times, values, None)
}

/// The scaled potential on a regular grid of rescaled times `0, step, …`.
pub fn potential_grid(
    skeleton: &EventSkeleton,
    target: &TargetModel,
    step: f64,
) -> LimitProcessPath {
    let stats = target.normalization_stats();
    let scale = (2.0 / stats.var_u).sqrt();
    let d = skeleton.dim() as f64;
    let mut grid = GridObserver::new(step * d, |x: &[f64], v: &[f64], s: f64| {
        let u = target.potential_unchecked(x) + target.ray(x, v).potential_delta(s);
        scale * (u - stats.mean_u)
    });
    skeleton.replay(&mut grid);
    let values = grid.values;
    let times = (0..values.len()).map(|k| k as f64 * step).collect();
    LimitProcessPath::potential(times, values, Some(step))
}

impl LimitProcessPath {
    fn potential(times: Vec<f64>, values: Vec<f64>, step: Option<f64>) -> Self {
        Self {
            kind: LimitKind::Potential,
            pre_values: values.clone(),
            jumps: vec![false; values.len()],
            times,
            values,
            rho: 0.0,
            step,
            drift: f64::NAN,
            diffusion: f64::NAN,
        }
    }
}
