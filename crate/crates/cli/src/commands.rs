//! Subcommand implementations.
//!
//! Every command resolves its parameters as flag > config file > default,
//! prints a human table to stdout, and (with `--out`) writes the dataset
//! atomically together with a `<out>.manifest` sidecar that can be fed back
//! via `--config` to reproduce the run.

use std::path::PathBuf;

use clap::Args;

use qir_core::detection;
use qir_core::hypothesis::{self, PriorPair};
use qir_core::integration_time;
use qir_core::montecarlo::{self, Hypothesis, ShotRule, TrialConfig};
use qir_core::range_delay::{self, DelayWindow, ErrorProfile};
use qir_core::{ChannelParams, Protocol};

use crate::config::Config;
use crate::output::{write_output, Format, Manifest, Table, Value};
use crate::CliError;

const COMMON_KEYS: &[&str] = &[
    "nb", "modes", "eta", "protocol", "seed", "trials", "out", "format", "workers",
];

#[derive(Args, Debug, Clone)]
pub struct CommonOpts {
    /// Mean background photons per mode (N_B).
    #[arg(long)]
    pub nb: Option<f64>,
    /// Time-bandwidth product / mode count (M), real-valued >= 1.
    #[arg(long)]
    pub modes: Option<f64>,
    /// Target reflectivity in [0, 1].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Protocol: ci1, ci2, qi1, qi2 or all.
    #[arg(long)]
    pub protocol: Option<String>,
    /// RNG seed; falls back to QIR_DEFAULT_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trial count.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Write the dataset to this file (plus `<file>.manifest`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: csv (default) or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Flat `key = value` config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results are identical for any
    /// worker count.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl CommonOpts {
    pub fn load_config(&self) -> Result<Config, CliError> {
        match &self.config {
            Some(path) => Config::load(path),
            None => Ok(Config::empty()),
        }
    }
}

pub(crate) fn resolve_seed(cfg: &Config, flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = cfg.resolve("seed", flag)? {
        return Ok(seed);
    }
    match std::env::var("QIR_DEFAULT_SEED") {
        Ok(raw) => raw
            .parse::<u64>()
            .map_err(|e| CliError::Usage(format!("QIR_DEFAULT_SEED = `{raw}`: {e}"))),
        Err(_) => Ok(0),
    }
}

fn resolve_format(cfg: &Config, flag: Option<&str>) -> Result<Format, CliError> {
    let flag = flag
        .map(|s| s.parse::<Format>().map_err(CliError::Usage))
        .transpose()?;
    Ok(cfg.resolve("format", flag)?.unwrap_or(Format::Csv))
}

fn resolve_out(cfg: &Config, flag: Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
    cfg.resolve("out", flag)
}

fn resolve_workers(cfg: &Config, flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let workers = cfg.resolve("workers", flag)?;
    if workers == Some(0) {
        return Err(CliError::Usage("workers must be >= 1".into()));
    }
    Ok(workers)
}

/// Parse `ci1 | ci2 | qi1 | qi2 | all` into a protocol list.
pub(crate) fn resolve_protocols(
    cfg: &Config,
    flag: Option<&str>,
) -> Result<Vec<Protocol>, CliError> {
    let selector = match flag {
        Some(s) => s.to_string(),
        None => cfg.raw("protocol").unwrap_or("all").to_string(),
    };
    if selector.eq_ignore_ascii_case("all") {
        Ok(Protocol::ALL.to_vec())
    } else {
        selector
            .parse::<Protocol>()
            .map(|p| vec![p])
            .map_err(CliError::Usage)
    }
}

fn resolve_channel_params(
    cfg: &Config,
    nb: Option<f64>,
    modes: Option<f64>,
    eta: Option<f64>,
) -> Result<ChannelParams, CliError> {
    let nb = cfg.require("nb", nb)?;
    let modes = cfg.require("modes", modes)?;
    let eta = cfg.require("eta", eta)?;
    Ok(ChannelParams::new(nb, modes, eta)?)
}

/// Run `f` on a dedicated pool when a worker count was requested.
fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build {n}-worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn detection_warnings(report: &detection::DetectionReport) -> Vec<String> {
    let mut warnings = Vec::new();
    if !report.low_noise_valid {
        warnings.push("low_noise_valid=false".to_string());
    }
    if report.clamped {
        warnings.push("clamped".to_string());
    }
    warnings
}

fn warning_cell(warnings: &[String]) -> Value {
    if warnings.is_empty() {
        Value::S("none".into())
    } else {
        Value::S(warnings.join(";"))
    }
}

/// Print to stdout and optionally write the dataset + manifest.
fn finish(
    table: &Table,
    manifest: &Manifest,
    out: Option<&PathBuf>,
    format: Format,
) -> Result<(), CliError> {
    print!("{}", table.human());
    for warning in manifest.warnings() {
        eprintln!("warning: {warning}");
    }
    if let Some(path) = out {
        write_output(path, format, table, manifest)?;
        eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
    }
    Ok(())
}

// ── snr ────────────────────────────────────────────────────────────────

#[derive(Args, Debug)]
pub struct SnrArgs {
    #[command(flatten)]
    pub common: CommonOpts,
}

pub fn cmd_snr(args: SnrArgs) -> Result<(), CliError> {
    let cfg = args.common.load_config()?;
    cfg.check_keys(COMMON_KEYS, false)?;
    let params = resolve_channel_params(&cfg, args.common.nb, args.common.modes, args.common.eta)?;
    let protocols = resolve_protocols(&cfg, args.common.protocol.as_deref())?;
    let seed = resolve_seed(&cfg, args.common.seed)?;
    let format = resolve_format(&cfg, args.common.format.as_deref())?;
    let out = resolve_out(&cfg, args.common.out.clone())?;

    let mut table = Table::new(vec![
        "protocol", "nb", "modes", "eta", "p_fa", "p_d", "snr", "warnings",
    ]);
    let mut manifest = Manifest::new("snr");
    for &protocol in &protocols {
        let report = detection::detection_probabilities(protocol, params);
        let snr = detection::snr(protocol, params)?;
        let warnings = detection_warnings(&report);
        for w in &warnings {
            manifest.warn(w.clone());
        }
        table.push(vec![
            Value::S(protocol.to_string()),
            Value::F(params.n_b()),
            Value::F(params.m_modes()),
            Value::F(params.eta()),
            Value::F(report.probabilities.p_false_alarm),
            Value::F(report.probabilities.p_detect),
            Value::F(snr),
            warning_cell(&warnings),
        ]);
    }

    manifest.set("protocol", selector_string(&protocols));
    manifest.set_f64("nb", params.n_b());
    manifest.set_f64("modes", params.m_modes());
    manifest.set_f64("eta", params.eta());
    manifest.set("seed", seed);
    manifest.set("format", format_name(format));
    finish(&table, &manifest, out.as_ref(), format)
}

fn selector_string(protocols: &[Protocol]) -> String {
    if protocols.len() == Protocol::ALL.len() {
        "all".to_string()
    } else {
        protocols[0].to_string()
    }
}

fn format_name(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

// ── perr ───────────────────────────────────────────────────────────────

#[derive(Args, Debug)]
pub struct PerrArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Prior probability of "target absent" (p1 is the complement).
    #[arg(long)]
    pub p0: Option<f64>,
}

pub fn cmd_perr(args: PerrArgs) -> Result<(), CliError> {
    let cfg = args.common.load_config()?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.push("p0");
    cfg.check_keys(&keys, false)?;
    let params = resolve_channel_params(&cfg, args.common.nb, args.common.modes, args.common.eta)?;
    let protocols = resolve_protocols(&cfg, args.common.protocol.as_deref())?;
    let p0 = cfg.resolve("p0", args.p0)?.unwrap_or(0.5);
    let priors = PriorPair::from_p0(p0)?;
    let seed = resolve_seed(&cfg, args.common.seed)?;
    let format = resolve_format(&cfg, args.common.format.as_deref())?;
    let out = resolve_out(&cfg, args.common.out.clone())?;

    let mut table = Table::new(vec![
        "protocol",
        "nb",
        "modes",
        "eta",
        "p0",
        "p1",
        "p_err",
        "closed_form_used",
        "upper_bound",
        "warnings",
    ]);
    let mut manifest = Manifest::new("perr");
    for &protocol in &protocols {
        // symmetric priors route through the closed form when one exists
        let report = if priors.is_symmetric() {
            hypothesis::closed_form_error(protocol, params)
                .unwrap_or_else(|_| hypothesis::error_probability(protocol, params, priors))
        } else {
            hypothesis::error_probability(protocol, params, priors)
        };
        let warnings = detection_warnings(&detection::detection_probabilities(protocol, params));
        for w in &warnings {
            manifest.warn(w.clone());
        }
        table.push(vec![
            Value::S(protocol.to_string()),
            Value::F(params.n_b()),
            Value::F(params.m_modes()),
            Value::F(params.eta()),
            Value::F(priors.p0()),
            Value::F(priors.p1()),
            Value::F(report.p_err),
            Value::B(report.closed_form_used),
            Value::B(report.upper_bound),
            warning_cell(&warnings),
        ]);
    }

    manifest.set("protocol", selector_string(&protocols));
    manifest.set_f64("nb", params.n_b());
    manifest.set_f64("modes", params.m_modes());
    manifest.set_f64("eta", params.eta());
    manifest.set_f64("p0", priors.p0());
    manifest.set("seed", seed);
    manifest.set("format", format_name(format));
    finish(&table, &manifest, out.as_ref(), format)
}

// ── zzb ────────────────────────────────────────────────────────────────

#[derive(Args, Debug)]
pub struct ZzbArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Lower edge of the prior delay window, seconds.
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Upper edge of the prior delay window, seconds.
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Override the constant error-probability profile (default: the
    /// symmetric-prior error probability of each protocol).
    #[arg(long)]
    pub perr: Option<f64>,
}

pub fn cmd_zzb(args: ZzbArgs) -> Result<(), CliError> {
    let cfg = args.common.load_config()?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend(["tau_min", "tau_max", "perr"]);
    cfg.check_keys(&keys, false)?;
    let params = resolve_channel_params(&cfg, args.common.nb, args.common.modes, args.common.eta)?;
    let protocols = resolve_protocols(&cfg, args.common.protocol.as_deref())?;
    let tau_min = cfg.require("tau_min", args.tau_min)?;
    let tau_max = cfg.require("tau_max", args.tau_max)?;
    let window = DelayWindow::new(tau_min, tau_max)?;
    let perr_override = cfg.resolve("perr", args.perr)?;
    let seed = resolve_seed(&cfg, args.common.seed)?;
    let format = resolve_format(&cfg, args.common.format.as_deref())?;
    let out = resolve_out(&cfg, args.common.out.clone())?;

    let mut table = Table::new(vec![
        "protocol",
        "nb",
        "modes",
        "eta",
        "tau_min",
        "tau_max",
        "delta_tau",
        "p_err",
        "mse",
        "rms",
        "rms_range_m",
        "quad_abs_err_est",
        "warnings",
    ]);
    let mut manifest = Manifest::new("zzb");
    if !window.narrow_prior_ok() {
        manifest.warn("narrow_prior_ok=false");
    }
    for &protocol in &protocols {
        let p_err = match perr_override {
            Some(c) => c,
            None => {
                hypothesis::closed_form_error(protocol, params)
                    .unwrap_or_else(|_| {
                        hypothesis::error_probability(protocol, params, PriorPair::symmetric())
                    })
                    .p_err
            }
        };
        let result = range_delay::zzb(protocol, params, window, ErrorProfile::Constant(p_err))?;
        let mut warnings =
            detection_warnings(&detection::detection_probabilities(protocol, params));
        if !window.narrow_prior_ok() {
            warnings.push("narrow_prior_ok=false".to_string());
        }
        for w in &warnings {
            manifest.warn(w.clone());
        }
        table.push(vec![
            Value::S(protocol.to_string()),
            Value::F(params.n_b()),
            Value::F(params.m_modes()),
            Value::F(params.eta()),
            Value::F(window.tau_min()),
            Value::F(window.tau_max()),
            Value::F(window.delta_tau()),
            Value::F(p_err),
            Value::F(result.mean_square_error),
            Value::F(result.rms_error),
            Value::F(range_delay::delay_to_range(result.rms_error)?),
            Value::F(result.quadrature_abs_error_estimate),
            warning_cell(&warnings),
        ]);
    }

    manifest.set("protocol", selector_string(&protocols));
    manifest.set_f64("nb", params.n_b());
    manifest.set_f64("modes", params.m_modes());
    manifest.set_f64("eta", params.eta());
    manifest.set_f64("tau_min", tau_min);
    manifest.set_f64("tau_max", tau_max);
    if let Some(c) = perr_override {
        manifest.set_f64("perr", c);
    }
    manifest.set("seed", seed);
    manifest.set("format", format_name(format));
    finish(&table, &manifest, out.as_ref(), format)
}

// ── timebudget ─────────────────────────────────────────────────────────

#[derive(Args, Debug)]
pub struct TimebudgetArgs {
    /// One-photon-signal integration time, seconds.
    #[arg(long)]
    pub t1: Option<f64>,
    /// Shared bandwidth (modes per second).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Mean background photons per mode.
    #[arg(long)]
    pub nb: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_timebudget(args: TimebudgetArgs) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::empty(),
    };
    cfg.check_keys(&["t1", "bandwidth", "nb", "seed", "out", "format"], false)?;
    let t1 = cfg.require("t1", args.t1)?;
    let bandwidth = cfg.require("bandwidth", args.bandwidth)?;
    let nb = cfg.require("nb", args.nb)?;
    for (name, value) in [("t1", t1), ("bandwidth", bandwidth), ("nb", nb)] {
        if value <= 0.0 || value.is_nan() {
            return Err(qir_core::Error::InvalidParams(format!(
                "{name} must be positive, got {value}"
            ))
            .into());
        }
    }
    let seed = resolve_seed(&cfg, args.seed)?;
    let format = resolve_format(&cfg, args.format.as_deref())?;
    let out = resolve_out(&cfg, args.out.clone())?;

    let budget = integration_time::TimeBudget::from_one_photon_time(t1, bandwidth, nb);
    let m_matched = integration_time::matched_modes(budget.m_prime(), nb)?;

    let mut table = Table::new(vec![
        "t1",
        "bandwidth",
        "nb",
        "m_prime",
        "m_matched",
        "t2",
        "t2_over_t1",
        "warnings",
    ]);
    table.push(vec![
        Value::F(budget.t1),
        Value::F(budget.bandwidth),
        Value::F(budget.n_b),
        Value::F(budget.m_prime()),
        Value::F(m_matched),
        Value::F(budget.t2),
        Value::F(budget.reduction_factor()),
        Value::S("none".into()),
    ]);

    let mut manifest = Manifest::new("timebudget");
    manifest.set_f64("t1", t1);
    manifest.set_f64("bandwidth", bandwidth);
    manifest.set_f64("nb", nb);
    manifest.set("seed", seed);
    manifest.set("format", format_name(format));
    finish(&table, &manifest, out.as_ref(), format)?;
    // t2 and t2/t1 live two orders of magnitude apart at t1 = 100 s; print
    // both relations so they cannot be conflated.
    println!(
        "note: t2 = sqrt(nb * t1 / bandwidth) = {} s; t2/t1 = sqrt(nb / (t1 * bandwidth)) = {}",
        budget.t2,
        budget.reduction_factor()
    );
    Ok(())
}

// ── mc ─────────────────────────────────────────────────────────────────

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Campaign kind: coincidence (default), perr or delay.
    #[arg(long)]
    pub mode: Option<String>,
    /// Ground truth for coincidence campaigns: h0 or h1.
    #[arg(long)]
    pub hypothesis: Option<String>,
    /// Shots per trial (coincidence campaigns).
    #[arg(long)]
    pub shots: Option<u32>,
    /// Declare a trial positive on at least k positive shots instead of
    /// requiring all of them.
    #[arg(long)]
    pub k: Option<u32>,
    /// Prior probability of "target absent" (perr campaigns).
    #[arg(long)]
    pub p0: Option<f64>,
    /// Delay window lower edge, seconds (delay campaigns).
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Delay window upper edge, seconds (delay campaigns).
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Bin count across the window (delay campaigns).
    #[arg(long)]
    pub bins: Option<u32>,
    /// Bin holding the true delay (delay campaigns; default: middle bin).
    #[arg(long)]
    pub true_bin: Option<u32>,
    /// Pulses per trial (delay campaigns).
    #[arg(long)]
    pub pulses: Option<u32>,
}

pub fn cmd_mc(args: McArgs) -> Result<(), CliError> {
    let cfg = args.common.load_config()?;
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend([
        "mode",
        "hypothesis",
        "shots",
        "k",
        "p0",
        "tau_min",
        "tau_max",
        "bins",
        "true_bin",
        "pulses",
    ]);
    cfg.check_keys(&keys, false)?;
    let mode = args
        .mode
        .clone()
        .or_else(|| cfg.raw("mode").map(str::to_string))
        .unwrap_or_else(|| "coincidence".to_string());
    match mode.as_str() {
        "coincidence" => mc_coincidence(&args, &cfg),
        "perr" => mc_perr(&args, &cfg),
        "delay" => mc_delay(&args, &cfg),
        other => Err(CliError::Usage(format!(
            "unknown mc mode `{other}` (expected coincidence, perr or delay)"
        ))),
    }
}

fn mc_coincidence(args: &McArgs, cfg: &Config) -> Result<(), CliError> {
    let params = resolve_channel_params(cfg, args.common.nb, args.common.modes, args.common.eta)?;
    let protocols = resolve_protocols(cfg, args.common.protocol.as_deref())?;
    let hypothesis = match args
        .hypothesis
        .clone()
        .or_else(|| cfg.raw("hypothesis").map(str::to_string))
    {
        Some(raw) => raw.parse::<Hypothesis>().map_err(CliError::Usage)?,
        None => Hypothesis::H0,
    };
    let shots = cfg.resolve("shots", args.shots)?.unwrap_or(1);
    let k = cfg.resolve("k", args.k)?;
    let rule = match k {
        Some(k) => ShotRule::KOfM(k),
        None => ShotRule::AllShots,
    };
    let trials = cfg
        .resolve("trials", args.common.trials)?
        .unwrap_or(1_000_000);
    let seed = resolve_seed(cfg, args.common.seed)?;
    let workers = resolve_workers(cfg, args.common.workers)?;
    let format = resolve_format(cfg, args.common.format.as_deref())?;
    let out = resolve_out(cfg, args.common.out.clone())?;

    let mut table = Table::new(vec![
        "protocol",
        "nb",
        "modes",
        "eta",
        "hypothesis",
        "shots",
        "rule",
        "trials",
        "seed",
        "positives",
        "frequency",
        "ci95_half_width",
        "closed_form",
        "warnings",
    ]);
    let mut manifest = Manifest::new("mc");

    for &protocol in &protocols {
        let config = TrialConfig {
            protocol,
            params,
            hypothesis,
            num_trials: trials,
            seed,
            shots_per_trial: shots,
            rule,
        };
        let outcome = with_pool(workers, || montecarlo::simulate_coincidence(&config))??;
        let (p_shot, shot_kind) = match hypothesis {
            Hypothesis::H0 => (
                detection::false_alarm_prob(protocol, params),
                detection::ShotKind::FalseAlarm,
            ),
            Hypothesis::H1 => (
                detection::detection_prob(protocol, params),
                detection::ShotKind::Detection,
            ),
        };
        let closed_form = match rule {
            ShotRule::AllShots => detection::m_shot_prob(protocol, params, shots, shot_kind),
            ShotRule::KOfM(k) => binomial_upper_tail(p_shot, shots, k),
        };
        let warnings = detection_warnings(&detection::detection_probabilities(protocol, params));
        for w in &warnings {
            manifest.warn(w.clone());
        }
        table.push(vec![
            Value::S(protocol.to_string()),
            Value::F(params.n_b()),
            Value::F(params.m_modes()),
            Value::F(params.eta()),
            Value::S(match hypothesis {
                Hypothesis::H0 => "h0".into(),
                Hypothesis::H1 => "h1".into(),
            }),
            Value::U(shots as u64),
            Value::S(match rule {
                ShotRule::AllShots => "all".to_string(),
                ShotRule::KOfM(k) => format!("{k}-of-{shots}"),
            }),
            Value::U(outcome.trials),
            Value::U(seed),
            Value::U(outcome.positives),
            Value::F(outcome.frequency),
            Value::F(outcome.ci95_half_width),
            Value::F(closed_form),
            warning_cell(&warnings),
        ]);
    }

    manifest.set("mode", "coincidence");
    manifest.set("protocol", selector_string(&protocols));
    manifest.set_f64("nb", params.n_b());
    manifest.set_f64("modes", params.m_modes());
    manifest.set_f64("eta", params.eta());
    manifest.set(
        "hypothesis",
        match hypothesis {
            Hypothesis::H0 => "h0",
            Hypothesis::H1 => "h1",
        },
    );
    manifest.set("shots", shots);
    if let Some(k) = k {
        manifest.set("k", k);
    }
    manifest.set("trials", trials);
    manifest.set("seed", seed);
    manifest.set("format", format_name(format));
    finish(&table, &manifest, out.as_ref(), format)
}

/// P(at least k positives out of m) for independent shots at `p`.
fn binomial_upper_tail(p: f64, m: u32, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_choose = 0.0f64;
    let mut tail = 0.0;
    for j in 0..=m {
        if j > 0 {
            ln_choose += ((m - j + 1) as f64).ln() - (j as f64).ln();
        }
        if j >= k {
            tail += (ln_choose + j as f64 * ln_p + (m - j) as f64 * ln_q).exp();
        }
    }
    tail.min(1.0)
}

fn mc_perr(args: &McArgs, cfg: &Config) -> Result<(), CliError> {
    let params = resolve_channel_params(cfg, args.common.nb, args.common.modes, args.common.eta)?;
    let protocols = resolve_protocols(cfg, args.common.protocol.as_deref())?;
    let p0 = cfg.resolve("p0", args.p0)?.unwrap_or(0.5);
    let priors = PriorPair::from_p0(p0)?;
    let trials = cfg
        .resolve("trials", args.common.trials)?
        .unwrap_or(1_000_000);
    let seed = resolve_seed(cfg, args.common.seed)?;
    let workers = resolve_workers(cfg, args.common.workers)?;
    let format = resolve_format(cfg, args.common.format.as_deref())?;
    let out = resolve_out(cfg, args.common.out.clone())?;

    let mut table = Table::new(vec![
        "protocol",
        "nb",
        "modes",
        "eta",
        "p0",
        "trials",
        "seed",
        "errors",
        "frequency",
        "ci95_half_width",
        "closed_form",
        "warnings",
    ]);
    let mut manifest = Manifest::new("mc");
    for &protocol in &protocols {
        let outcome = with_pool(workers, || {
            montecarlo::estimate_error_probability(protocol, params, priors, trials, seed)
        })??;
        let closed_form = hypothesis::error_probability(protocol, params, priors).p_err;
        let warnings = detection_warnings(&detection::detection_probabilities(protocol, params));
        for w in &warnings {
            manifest.warn(w.clone());
        }
        table.push(vec![
            Value::S(protocol.to_string()),
            Value::F(params.n_b()),
            Value::F(params.m_modes()),
            Value::F(params.eta()),
            Value::F(priors.p0()),
            Value::U(outcome.trials),
            Value::U(seed),
            Value::U(outcome.positives),
            Value::F(outcome.frequency),
            Value::F(outcome.ci95_half_width),
            Value::F(closed_form),
            warning_cell(&warnings),
        ]);
    }

    manifest.set("mode", "perr");
    manifest.set("protocol", selector_string(&protocols));
    manifest.set_f64("nb", params.n_b());
    manifest.set_f64("modes", params.m_modes());
    manifest.set_f64("eta", params.eta());
    manifest.set_f64("p0", priors.p0());
    manifest.set("trials", trials);
    manifest.set("seed", seed);
    manifest.set("format", format_name(format));
    finish(&table, &manifest, out.as_ref(), format)
}

fn mc_delay(args: &McArgs, cfg: &Config) -> Result<(), CliError> {
    let params = resolve_channel_params(cfg, args.common.nb, args.common.modes, args.common.eta)?;
    let protocols = resolve_protocols(cfg, args.common.protocol.as_deref())?;
    let tau_min = cfg.require("tau_min", args.tau_min)?;
    let tau_max = cfg.require("tau_max", args.tau_max)?;
    let window = DelayWindow::new(tau_min, tau_max)?;
    let bins = cfg.resolve("bins", args.bins)?.unwrap_or(16);
    let true_bin = cfg.resolve("true_bin", args.true_bin)?.unwrap_or(bins / 2);
    let pulses = cfg.resolve("pulses", args.pulses)?.unwrap_or(1);
    let trials = cfg.resolve("trials", args.common.trials)?.unwrap_or(10_000);
    let seed = resolve_seed(cfg, args.common.seed)?;
    let workers = resolve_workers(cfg, args.common.workers)?;
    let format = resolve_format(cfg, args.common.format.as_deref())?;
    let out = resolve_out(cfg, args.common.out.clone())?;

    let mut table = Table::new(vec![
        "protocol", "nb", "modes", "eta", "tau_min", "tau_max", "bins", "true_bin", "pulses",
        "trials", "seed", "rmse", "mse", "rmse_se", "zzb_rms", "warnings",
    ]);
    let mut manifest = Manifest::new("mc");
    if !window.narrow_prior_ok() {
        manifest.warn("narrow_prior_ok=false");
    }
    for &protocol in &protocols {
        let config = montecarlo::DelayEstimationConfig {
            window,
            num_bins: bins,
            true_bin,
            pulses,
            protocol,
            params,
            num_trials: trials,
            seed,
        };
        let outcome = with_pool(workers, || montecarlo::delay_estimation_experiment(&config))??;
        // comparable bound: constant profile at the pulse-matched error
        let p_err = hypothesis::m_shot_symmetric_error(protocol, params, pulses);
        let bound = range_delay::zzb(protocol, params, window, ErrorProfile::Constant(p_err))?;
        let mut warnings =
            detection_warnings(&detection::detection_probabilities(protocol, params));
        if !window.narrow_prior_ok() {
            warnings.push("narrow_prior_ok=false".to_string());
        }
        for w in &warnings {
            manifest.warn(w.clone());
        }
        table.push(vec![
            Value::S(protocol.to_string()),
            Value::F(params.n_b()),
            Value::F(params.m_modes()),
            Value::F(params.eta()),
            Value::F(window.tau_min()),
            Value::F(window.tau_max()),
            Value::U(bins as u64),
            Value::U(true_bin as u64),
            Value::U(pulses as u64),
            Value::U(outcome.trials),
            Value::U(seed),
            Value::F(outcome.rmse),
            Value::F(outcome.mean_square_error),
            Value::F(outcome.rmse_standard_error()),
            Value::F(bound.rms_error),
            warning_cell(&warnings),
        ]);
    }

    manifest.set("mode", "delay");
    manifest.set("protocol", selector_string(&protocols));
    manifest.set_f64("nb", params.n_b());
    manifest.set_f64("modes", params.m_modes());
    manifest.set_f64("eta", params.eta());
    manifest.set_f64("tau_min", tau_min);
    manifest.set_f64("tau_max", tau_max);
    manifest.set("bins", bins);
    manifest.set("true_bin", true_bin);
    manifest.set("pulses", pulses);
    manifest.set("trials", trials);
    manifest.set("seed", seed);
    manifest.set("format", format_name(format));
    finish(&table, &manifest, out.as_ref(), format)
}
