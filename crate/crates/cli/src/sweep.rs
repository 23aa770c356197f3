//! Parameter sweeps: axis expansion, per-point evaluation, curve-ready
//! datasets.
//!
//! A sweep specification is the same flat key = value format as every other
//! config file, with one `axis` line per swept parameter:
//!
//! ```text
//! axis = eta log 0.01 1.0 50      # param spacing start stop count
//! nb = 0.01                       # fixed parameters
//! modes = 100
//! protocol = qi2
//! record = error_ratio,snr        # columns to evaluate per point
//! out = dataset.csv
//! ```
//!
//! Axes expand as a cartesian product (last axis fastest); rows are ordered
//! by point index no matter how many workers evaluate them.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;

use qir_core::detection;
use qir_core::hypothesis::{self, PriorPair};
use qir_core::range_delay::{self, DelayWindow, ErrorProfile};
use qir_core::{ChannelParams, Protocol};

use crate::commands::CommonOpts;
use crate::config::Config;
use crate::output::{Format, Manifest, Table, Value};
use crate::{commands, CliError};

/// Guard on the cartesian product size.
const MAX_POINTS: u64 = 10_000_000;

const AXIS_PARAMS: &[&str] = &["nb", "modes", "eta", "p0", "tau_min", "tau_max"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
struct Axis {
    param: String,
    spacing: Spacing,
    start: f64,
    stop: f64,
    count: u64,
}

impl Axis {
    fn parse(spec: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = spec.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(CliError::Usage(format!(
                "axis `{spec}`: expected `<param> <linear|log> <start> <stop> <count>`"
            )));
        }
        let param = parts[0].to_string();
        if !AXIS_PARAMS.contains(&param.as_str()) {
            return Err(CliError::Usage(format!(
                "axis parameter `{param}` not sweepable (choose from {})",
                AXIS_PARAMS.join(", ")
            )));
        }
        let spacing = match parts[1] {
            "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            other => {
                return Err(CliError::Usage(format!(
                    "axis `{param}`: unknown spacing `{other}`"
                )))
            }
        };
        let parse_f64 = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| CliError::Usage(format!("axis `{param}`: `{s}`: {e}")))
        };
        let start = parse_f64(parts[2])?;
        let stop = parse_f64(parts[3])?;
        let count: u64 = parts[4]
            .parse()
            .map_err(|e| CliError::Usage(format!("axis `{param}`: count `{}`: {e}", parts[4])))?;
        if count < 1 {
            return Err(CliError::Usage(format!(
                "axis `{param}`: count must be >= 1"
            )));
        }
        if spacing == Spacing::Log && (start <= 0.0 || stop <= 0.0) {
            return Err(CliError::Usage(format!(
                "axis `{param}`: log spacing requires strictly positive endpoints"
            )));
        }
        Ok(Self {
            param,
            spacing,
            start,
            stop,
            count,
        })
    }

    fn value(&self, index: u64) -> f64 {
        if self.count == 1 {
            return self.start;
        }
        let t = index as f64 / (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => self.start + (self.stop - self.start) * t,
            Spacing::Log => self.start * (self.stop / self.start).powf(t),
        }
    }

    fn render(&self) -> String {
        format!(
            "{} {} {} {} {}",
            self.param,
            match self.spacing {
                Spacing::Linear => "linear",
                Spacing::Log => "log",
            },
            self.start,
            self.stop,
            self.count
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RecordOp {
    PFa,
    PD,
    PMiss,
    Snr,
    PErr,
    ClosedFormError,
    ErrorRatio,
    ZzbMse,
    ZzbRms,
    ZzbRatio,
}

impl RecordOp {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "p_fa" => Ok(Self::PFa),
            "p_d" => Ok(Self::PD),
            "p_miss" => Ok(Self::PMiss),
            "snr" => Ok(Self::Snr),
            "p_err" => Ok(Self::PErr),
            "closed_form_error" => Ok(Self::ClosedFormError),
            "error_ratio" => Ok(Self::ErrorRatio),
            "zzb_mse" => Ok(Self::ZzbMse),
            "zzb_rms" => Ok(Self::ZzbRms),
            "zzb_ratio" => Ok(Self::ZzbRatio),
            other => Err(CliError::Usage(format!(
                "unknown record op `{other}` (choose from p_fa, p_d, p_miss, snr, p_err, closed_form_error, error_ratio, zzb_mse, zzb_rms, zzb_ratio)"
            ))),
        }
    }

    fn column(self) -> &'static str {
        match self {
            Self::PFa => "p_fa",
            Self::PD => "p_d",
            Self::PMiss => "p_miss",
            Self::Snr => "snr",
            Self::PErr => "p_err",
            Self::ClosedFormError => "closed_form_error",
            Self::ErrorRatio => "error_ratio",
            Self::ZzbMse => "zzb_mse",
            Self::ZzbRms => "zzb_rms",
            Self::ZzbRatio => "zzb_ratio",
        }
    }

    fn per_protocol(self) -> bool {
        !matches!(self, Self::ErrorRatio | Self::ZzbRatio)
    }

    fn needs_window(self) -> bool {
        matches!(self, Self::ZzbMse | Self::ZzbRms | Self::ZzbRatio)
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Sweep specification file (axis lines plus fixed parameters).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonOpts,
    /// Comma-separated record ops, overriding the spec's `record` key.
    #[arg(long)]
    pub record: Option<String>,
}

struct PointScope<'a> {
    fixed: &'a Config,
    coords: &'a BTreeMap<&'a str, f64>,
}

impl PointScope<'_> {
    fn get(&self, key: &str) -> Result<Option<f64>, CliError> {
        if let Some(v) = self.coords.get(key) {
            return Ok(Some(*v));
        }
        self.fixed.resolve::<f64>(key, None)
    }

    fn require(&self, key: &str) -> Result<f64, CliError> {
        self.get(key)?.ok_or_else(|| {
            CliError::Usage(format!("sweep needs `{key}` as an axis or fixed parameter"))
        })
    }
}

pub fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let spec_path = args
        .spec
        .clone()
        .or_else(|| args.common.config.clone())
        .ok_or_else(|| CliError::Usage("sweep requires --spec <file>".into()))?;
    let spec = Config::load(&spec_path)?;
    let mut allowed = vec![
        "nb", "modes", "eta", "p0", "tau_min", "tau_max", "protocol", "record", "seed", "trials",
        "out", "format", "workers",
    ];
    allowed.sort_unstable();
    spec.check_keys(&allowed, true)?;

    let axes: Vec<Axis> = spec
        .axes()
        .iter()
        .map(|s| Axis::parse(s))
        .collect::<Result<_, _>>()?;
    if axes.is_empty() {
        return Err(CliError::Usage("sweep spec has no `axis` lines".into()));
    }
    {
        let mut seen: Vec<&str> = Vec::new();
        for axis in &axes {
            if seen.contains(&axis.param.as_str()) {
                return Err(CliError::Usage(format!(
                    "axis `{}` appears twice",
                    axis.param
                )));
            }
            seen.push(&axis.param);
        }
    }
    let total: u64 = axes.iter().map(|a| a.count).product();
    if total > MAX_POINTS {
        return Err(CliError::Usage(format!(
            "sweep would produce {total} points (limit {MAX_POINTS})"
        )));
    }

    let record_raw = args
        .record
        .clone()
        .or_else(|| spec.raw("record").map(str::to_string))
        .ok_or_else(|| CliError::Usage("sweep requires a `record` key".into()))?;
    let records: Vec<RecordOp> = record_raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(RecordOp::parse)
        .collect::<Result<_, _>>()?;
    if records.is_empty() {
        return Err(CliError::Usage("`record` lists no ops".into()));
    }

    let per_protocol = records.iter().any(|op| op.per_protocol());
    let protocols = if per_protocol {
        commands::resolve_protocols(&spec, args.common.protocol.as_deref())?
    } else {
        vec![]
    };
    let seed = commands::resolve_seed(&spec, args.common.seed)?;
    let workers = spec.resolve("workers", args.common.workers)?;
    let format_flag = args.common.format.as_deref();
    let format = {
        let flag = format_flag
            .map(|s| s.parse::<Format>().map_err(CliError::Usage))
            .transpose()?;
        spec.resolve("format", flag)?.unwrap_or(Format::Csv)
    };
    let out = spec.resolve("out", args.common.out.clone())?;

    let mut columns: Vec<&'static str> = vec!["idx"];
    for axis in &axes {
        columns.push(leak_static(&axis.param));
    }
    if per_protocol {
        columns.push("protocol");
    }
    for op in &records {
        columns.push(op.column());
    }
    columns.push("warnings");

    // strides: last axis varies fastest
    let mut strides = vec![1u64; axes.len()];
    for i in (0..axes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * axes[i + 1].count;
    }

    let evaluate_point = |idx: u64| -> Result<Vec<Vec<Value>>, CliError> {
        let mut coords: BTreeMap<&str, f64> = BTreeMap::new();
        for (axis, stride) in axes.iter().zip(&strides) {
            let coordinate = (idx / stride) % axis.count;
            coords.insert(axis.param.as_str(), axis.value(coordinate));
        }
        let scope = PointScope {
            fixed: &spec,
            coords: &coords,
        };
        let params = ChannelParams::new(
            scope.require("nb")?,
            scope.require("modes")?,
            scope.require("eta")?,
        )?;
        let window = if records.iter().any(|op| op.needs_window()) {
            Some(DelayWindow::new(
                scope.require("tau_min")?,
                scope.require("tau_max")?,
            )?)
        } else {
            None
        };
        let priors = PriorPair::from_p0(scope.get("p0")?.unwrap_or(0.5))?;

        let prefix = |protocol: Option<Protocol>| -> Vec<Value> {
            let mut row = vec![Value::U(idx)];
            for axis in &axes {
                row.push(Value::F(coords[axis.param.as_str()]));
            }
            if let Some(p) = protocol {
                row.push(Value::S(p.to_string()));
            }
            row
        };

        let shared_op = |op: RecordOp| -> Result<Value, CliError> {
            let v = match op {
                RecordOp::ErrorRatio => hypothesis::error_ratio(params)?,
                RecordOp::ZzbRatio => range_delay::zzb_ratio(params, window.unwrap())?,
                _ => unreachable!("per-protocol op in shared position"),
            };
            Ok(Value::F(v))
        };

        let mut rows = Vec::new();
        if per_protocol {
            for &protocol in &protocols {
                let mut row = prefix(Some(protocol));
                let report = detection::detection_probabilities(protocol, params);
                for &op in &records {
                    let value = match op {
                        RecordOp::PFa => Value::F(report.probabilities.p_false_alarm),
                        RecordOp::PD => Value::F(report.probabilities.p_detect),
                        RecordOp::PMiss => Value::F(report.probabilities.p_miss),
                        RecordOp::Snr => Value::F(detection::snr(protocol, params)?),
                        RecordOp::PErr => {
                            Value::F(hypothesis::error_probability(protocol, params, priors).p_err)
                        }
                        RecordOp::ClosedFormError => {
                            Value::F(hypothesis::closed_form_error(protocol, params)?.p_err)
                        }
                        RecordOp::ZzbMse => Value::F(
                            range_delay::zzb(
                                protocol,
                                params,
                                window.unwrap(),
                                ErrorProfile::FromParams,
                            )?
                            .mean_square_error,
                        ),
                        RecordOp::ZzbRms => Value::F(
                            range_delay::zzb(
                                protocol,
                                params,
                                window.unwrap(),
                                ErrorProfile::FromParams,
                            )?
                            .rms_error,
                        ),
                        RecordOp::ErrorRatio | RecordOp::ZzbRatio => shared_op(op)?,
                    };
                    row.push(value);
                }
                let mut warnings = Vec::new();
                if !report.low_noise_valid {
                    warnings.push("low_noise_valid=false".to_string());
                }
                if report.clamped {
                    warnings.push("clamped".to_string());
                }
                if let Some(w) = window {
                    if !w.narrow_prior_ok() {
                        warnings.push("narrow_prior_ok=false".to_string());
                    }
                }
                row.push(if warnings.is_empty() {
                    Value::S("none".into())
                } else {
                    Value::S(warnings.join(";"))
                });
                rows.push(row);
            }
        } else {
            let mut row = prefix(None);
            for &op in &records {
                row.push(shared_op(op)?);
            }
            let mut warnings = Vec::new();
            if !params.low_noise_valid() {
                warnings.push("low_noise_valid=false".to_string());
            }
            if let Some(w) = window {
                if !w.narrow_prior_ok() {
                    warnings.push("narrow_prior_ok=false".to_string());
                }
            }
            row.push(if warnings.is_empty() {
                Value::S("none".into())
            } else {
                Value::S(warnings.join(";"))
            });
            rows.push(row);
        }
        Ok(rows)
    };

    let run = || -> Result<Vec<Vec<Vec<Value>>>, CliError> {
        (0..total as usize)
            .into_par_iter()
            .map(|idx| evaluate_point(idx as u64))
            .collect()
    };
    let per_point = match workers {
        None => run()?,
        Some(n) => {
            if n == 0 {
                return Err(CliError::Usage("workers must be >= 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build {n}-worker pool: {e}")))?;
            pool.install(run)?
        }
    };

    let mut table = Table::new(columns);
    let mut union_warnings: Vec<String> = Vec::new();
    for rows in per_point {
        for row in rows {
            if let Some(Value::S(w)) = row.last() {
                if w != "none" {
                    for item in w.split(';') {
                        if !union_warnings.iter().any(|u| u == item) {
                            union_warnings.push(item.to_string());
                        }
                    }
                }
            }
            table.push(row);
        }
    }

    let mut manifest = Manifest::new("sweep");
    for warning in &union_warnings {
        manifest.warn(warning.clone());
    }
    for axis in &axes {
        manifest.set("axis", axis.render());
    }
    let record_names: Vec<&str> = records.iter().map(|op| op.column()).collect();
    manifest.set("record", record_names.join(","));
    if per_protocol {
        manifest.set(
            "protocol",
            if protocols.len() == Protocol::ALL.len() {
                "all".to_string()
            } else {
                protocols[0].to_string()
            },
        );
    }
    for key in ["nb", "modes", "eta", "p0", "tau_min", "tau_max"] {
        if let Some(raw) = spec.raw(key) {
            manifest.set(key, raw);
        }
    }
    manifest.set("seed", seed);
    manifest.set(
        "format",
        match format {
            Format::Csv => "csv",
            Format::Json => "json",
        },
    );

    print!("{}", table.human());
    for warning in manifest.warnings() {
        eprintln!("warning: {warning}");
    }
    if let Some(path) = out.as_ref() {
        crate::output::write_output(path, format, &table, &manifest)?;
        eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
    }
    Ok(())
}

/// Column names must be 'static; axis names come from a tiny closed set, so
/// leaking is bounded and only happens once per process.
fn leak_static(s: &str) -> &'static str {
    match s {
        "nb" => "nb",
        "modes" => "modes",
        "eta" => "eta",
        "p0" => "p0",
        "tau_min" => "tau_min",
        "tau_max" => "tau_max",
        other => Box::leak(other.to_string().into_boxed_str()),
    }
}
