//! Event-level Monte Carlo oracle.
//!
//! Trials are built from single-photon Bernoulli primitives and coincidences
//! are composed by conjunction, so the empirical frequencies validate the
//! closed-form compound probabilities without sharing their algebra. Each
//! trial draws its randomness from `(seed, trial_index)` alone and all
//! aggregation is commutative integer counting, so campaign results are
//! bit-identical for any partitioning of the trial index space.

mod rng;

pub use rng::TrialRng;

use rayon::prelude::*;

use crate::detection::{detection_prob, false_alarm_prob, single_photon_background_rate};
use crate::error::{Error, Result};
use crate::hypothesis::PriorPair;
use crate::params::ChannelParams;
use crate::protocol::Protocol;
use crate::range_delay::DelayWindow;

/// Ground truth of a simulated trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Target absent.
    H0,
    /// Target present.
    H1,
}

impl std::str::FromStr for Hypothesis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "h0" => Ok(Hypothesis::H0),
            "h1" => Ok(Hypothesis::H1),
            other => Err(format!("unknown hypothesis `{other}` (expected h0 or h1)")),
        }
    }
}

/// How the per-shot outcomes of one trial combine into a trial outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotRule {
    /// Positive iff every shot is positive (matches the m-th-power closed forms).
    AllShots,
    /// Positive iff at least `k` of the shots are positive.
    KOfM(u32),
}

/// A coincidence-counting campaign.
#[derive(Debug, Clone, Copy)]
pub struct TrialConfig {
    pub protocol: Protocol,
    pub params: ChannelParams,
    pub hypothesis: Hypothesis,
    pub num_trials: u64,
    pub seed: u64,
    pub shots_per_trial: u32,
    pub rule: ShotRule,
}

impl TrialConfig {
    /// Single-shot campaign under the all-shots rule.
    pub fn single_shot(
        protocol: Protocol,
        params: ChannelParams,
        hypothesis: Hypothesis,
        num_trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            protocol,
            params,
            hypothesis,
            num_trials,
            seed,
            shots_per_trial: 1,
            rule: ShotRule::AllShots,
        }
    }

    fn validate(&self) -> Result<()> {
        check_trial_count(self.num_trials)?;
        if self.shots_per_trial < 1 {
            return Err(Error::InvalidConfig("shots_per_trial must be >= 1".into()));
        }
        if let ShotRule::KOfM(k) = self.rule {
            if k < 1 || k > self.shots_per_trial {
                return Err(Error::InvalidConfig(format!(
                    "k-of-m rule needs 1 <= k <= m, got k = {k}, m = {}",
                    self.shots_per_trial
                )));
            }
        }
        Ok(())
    }
}

/// Aggregated campaign counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub positives: u64,
    pub trials: u64,
    /// `positives / trials`.
    pub frequency: f64,
    /// Half-width of the 95% confidence interval on the frequency: normal
    /// approximation in the bulk, exact (Clopper-Pearson) binomial tails when
    /// fewer than 30 positives or negatives were observed.
    pub ci95_half_width: f64,
}

impl TrialOutcome {
    pub fn from_counts(positives: u64, trials: u64) -> Self {
        let frequency = positives as f64 / trials as f64;
        Self {
            positives,
            trials,
            frequency,
            ci95_half_width: ci95_half_width(positives, trials),
        }
    }
}

fn check_trial_count(num_trials: u64) -> Result<()> {
    if num_trials < 1 {
        return Err(Error::InvalidConfig("num_trials must be >= 1".into()));
    }
    if num_trials > usize::MAX as u64 {
        return Err(Error::InvalidConfig(format!(
            "num_trials {num_trials} exceeds the addressable trial index space"
        )));
    }
    Ok(())
}

/// One coincidence shot. Under the target-present branch the signal returns
/// with probability `eta` and the coincidence fires deterministically;
/// otherwise the background photons must all fire on their own.
#[inline]
fn coincidence_shot(
    rng: &mut TrialRng,
    h1_eta: Option<f64>,
    p_single: f64,
    two_photon: bool,
) -> bool {
    if let Some(eta) = h1_eta {
        if rng.bernoulli(eta) {
            return true;
        }
    }
    let first = rng.bernoulli(p_single);
    let second = if two_photon {
        rng.bernoulli(p_single)
    } else {
        true
    };
    first && second
}

/// Run a coincidence campaign and aggregate the positive-trial count.
pub fn simulate_coincidence(config: &TrialConfig) -> Result<TrialOutcome> {
    config.validate()?;
    let p_single = single_photon_background_rate(config.protocol, config.params);
    let two_photon = config.protocol.signal_photons() == 2;
    let h1_eta = match config.hypothesis {
        Hypothesis::H1 => Some(config.params.eta()),
        Hypothesis::H0 => None,
    };
    let shots = config.shots_per_trial;
    let needed = match config.rule {
        ShotRule::AllShots => shots,
        ShotRule::KOfM(k) => k,
    };
    let seed = config.seed;

    let positives: u64 = (0..config.num_trials as usize)
        .into_par_iter()
        .with_min_len(1024)
        .map(|trial| {
            let mut rng = TrialRng::for_trial(seed, trial as u64);
            let mut fired = 0u32;
            for _ in 0..shots {
                if coincidence_shot(&mut rng, h1_eta, p_single, two_photon) {
                    fired += 1;
                }
            }
            u64::from(fired >= needed)
        })
        .sum();

    Ok(TrialOutcome::from_counts(positives, config.num_trials))
}

/// Estimate the Bayesian error probability of the single-shot rule
/// "declare the target present iff the coincidence fires".
///
/// Each trial samples the true hypothesis from the priors, runs one shot and
/// counts a positive when the decision disagrees with the truth.
pub fn estimate_error_probability(
    protocol: Protocol,
    params: ChannelParams,
    priors: PriorPair,
    num_trials: u64,
    seed: u64,
) -> Result<TrialOutcome> {
    check_trial_count(num_trials)?;
    let p_single = single_photon_background_rate(protocol, params);
    let two_photon = protocol.signal_photons() == 2;
    let eta = params.eta();
    let p1 = priors.p1();

    let errors: u64 = (0..num_trials as usize)
        .into_par_iter()
        .with_min_len(1024)
        .map(|trial| {
            let mut rng = TrialRng::for_trial(seed, trial as u64);
            let truth_present = rng.next_f64() < p1;
            let h1_eta = if truth_present { Some(eta) } else { None };
            let fired = coincidence_shot(&mut rng, h1_eta, p_single, two_photon);
            u64::from(fired != truth_present)
        })
        .sum();

    Ok(TrialOutcome::from_counts(errors, num_trials))
}

/// A toy delay-estimation experiment over a binned window.
#[derive(Debug, Clone, Copy)]
pub struct DelayEstimationConfig {
    pub window: DelayWindow,
    pub num_bins: u32,
    /// Bin holding the true delay, in `0..num_bins`.
    pub true_bin: u32,
    /// Pulses (independent looks) per trial.
    pub pulses: u32,
    pub protocol: Protocol,
    pub params: ChannelParams,
    pub num_trials: u64,
    pub seed: u64,
}

impl DelayEstimationConfig {
    fn validate(&self) -> Result<()> {
        if self.num_bins < 2 {
            return Err(Error::InvalidConfig("num_bins must be >= 2".into()));
        }
        if self.num_bins > 1 << 20 {
            return Err(Error::InvalidConfig("num_bins must be <= 2^20".into()));
        }
        if self.true_bin >= self.num_bins {
            return Err(Error::InvalidConfig(format!(
                "true_bin {} is outside 0..{}",
                self.true_bin, self.num_bins
            )));
        }
        if self.pulses < 1 {
            return Err(Error::InvalidConfig("pulses must be >= 1".into()));
        }
        check_trial_count(self.num_trials)?;
        Ok(())
    }
}

/// Empirical delay-estimation accuracy, aggregated as integer counts of the
/// absolute bin-index error so results are partition-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayEstimationOutcome {
    pub trials: u64,
    /// Window width divided by the bin count, seconds.
    pub bin_width: f64,
    /// `abs_error_histogram[d]` counts trials whose estimate landed `d` bins
    /// from the truth.
    pub abs_error_histogram: Vec<u64>,
    /// Mean squared delay error over bin centers, seconds squared.
    pub mean_square_error: f64,
    /// Root-mean-square delay error, seconds.
    pub rmse: f64,
}

impl DelayEstimationOutcome {
    fn from_histogram(histogram: Vec<u64>, bin_width: f64, trials: u64) -> Self {
        let n = trials as f64;
        let mut second = 0.0;
        for (d, &count) in histogram.iter().enumerate() {
            let err = d as f64 * bin_width;
            second += count as f64 * err * err;
        }
        let mse = second / n;
        Self {
            trials,
            bin_width,
            abs_error_histogram: histogram,
            mean_square_error: mse,
            rmse: mse.sqrt(),
        }
    }

    /// Standard error of the mean-square-error estimate.
    pub fn mse_standard_error(&self) -> f64 {
        if self.trials < 2 {
            return 0.0;
        }
        let n = self.trials as f64;
        let mut fourth = 0.0;
        for (d, &count) in self.abs_error_histogram.iter().enumerate() {
            let err = d as f64 * self.bin_width;
            fourth += count as f64 * err.powi(4);
        }
        let variance = (fourth / n - self.mean_square_error * self.mean_square_error).max(0.0);
        (variance / (n - 1.0)).sqrt()
    }

    /// Standard error of the RMSE via the delta method; zero when no error
    /// event was observed.
    pub fn rmse_standard_error(&self) -> f64 {
        if self.rmse > 0.0 {
            self.mse_standard_error() / (2.0 * self.rmse)
        } else {
            0.0
        }
    }

    /// Largest squared error the experiment can produce, seconds squared.
    pub fn max_square_error(&self) -> f64 {
        let d = (self.abs_error_histogram.len() - 1) as f64 * self.bin_width;
        d * d
    }
}

/// Run the delay-estimation experiment: per trial, every bin accumulates
/// Bernoulli pulse detections (the true bin at the detection probability,
/// the rest at the false-alarm probability); the delay estimate is the
/// center of the argmax bin, ties broken uniformly at random.
pub fn delay_estimation_experiment(
    config: &DelayEstimationConfig,
) -> Result<DelayEstimationOutcome> {
    config.validate()?;
    let bins = config.num_bins as usize;
    let true_bin = config.true_bin as usize;
    let p_detect = detection_prob(config.protocol, config.params);
    let p_false = false_alarm_prob(config.protocol, config.params);
    let pulses = config.pulses;
    let seed = config.seed;
    let bin_width = config.window.delta_tau() / config.num_bins as f64;

    let histogram = (0..config.num_trials as usize)
        .into_par_iter()
        .with_min_len(64)
        .fold(
            || (vec![0u64; bins], vec![0u32; bins]),
            |(mut hist, mut counts), trial| {
                counts.fill(0);
                let mut rng = TrialRng::for_trial(seed, trial as u64);
                for _ in 0..pulses {
                    for (bin, count) in counts.iter_mut().enumerate() {
                        let p = if bin == true_bin { p_detect } else { p_false };
                        if rng.bernoulli(p) {
                            *count += 1;
                        }
                    }
                }
                let estimate = argmax_uniform_ties(&mut rng, &counts);
                hist[estimate.abs_diff(true_bin)] += 1;
                (hist, counts)
            },
        )
        .map(|(hist, _)| hist)
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    Ok(DelayEstimationOutcome::from_histogram(
        histogram,
        bin_width,
        config.num_trials,
    ))
}

fn argmax_uniform_ties(rng: &mut TrialRng, counts: &[u32]) -> usize {
    let max = counts.iter().copied().max().expect("at least two bins");
    let ties = counts.iter().filter(|&&c| c == max).count();
    if ties == 1 {
        counts.iter().position(|&c| c == max).unwrap()
    } else {
        let pick = rng.next_index(ties);
        counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == max)
            .nth(pick)
            .map(|(i, _)| i)
            .unwrap()
    }
}

// ── Binomial confidence intervals ──────────────────────────────────────

const Z_95: f64 = 1.959963984540054;
const ALPHA: f64 = 0.05;
/// Below this many positives (or negatives) the normal approximation is
/// replaced by exact binomial tails.
const EXACT_TAIL_THRESHOLD: u64 = 30;

fn ci95_half_width(positives: u64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let f = positives as f64 / trials as f64;
    let negatives = trials - positives;
    if positives < EXACT_TAIL_THRESHOLD || negatives < EXACT_TAIL_THRESHOLD {
        let (lo, hi) = clopper_pearson(positives, trials, ALPHA);
        (hi - lo) / 2.0
    } else {
        Z_95 * (f * (1.0 - f) / trials as f64).sqrt()
    }
}

/// Exact two-sided Clopper-Pearson interval at level `1 - alpha`.
/// Only called in regimes where one of the tails is short.
pub(crate) fn clopper_pearson(positives: u64, trials: u64, alpha: f64) -> (f64, f64) {
    if positives > trials / 2 {
        // mirror onto the short (failure) side
        let (lo, hi) = clopper_pearson(trials - positives, trials, alpha);
        return (1.0 - hi, 1.0 - lo);
    }
    let half = alpha / 2.0;
    let lo = if positives == 0 {
        0.0
    } else {
        // largest p with P(X >= positives | p) <= half, i.e.
        // P(X <= positives - 1 | p) >= 1 - half
        bisect_cdf(positives - 1, trials, 1.0 - half)
    };
    let hi = if positives == trials {
        1.0
    } else {
        bisect_cdf(positives, trials, half)
    };
    (lo, hi)
}

/// Find `p` with `P(X <= k | n, p) = target`; the CDF is decreasing in `p`.
fn bisect_cdf(k: u64, n: u64, target: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binom_cdf(k, n, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// P(X <= k) for X ~ Binomial(n, p), summed in log space. The short-tail
/// callers guarantee `k` stays small, so the direct sum is cheap even for
/// campaign-sized `n`.
fn binom_cdf(k: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut ln_choose = 0.0;
    let mut sum = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        sum += (ln_choose + i as f64 * ln_p + (n - i) as f64 * ln_q).exp();
    }
    sum.min(1.0)
}
