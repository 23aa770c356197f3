//! Closed-form single-shot detection statistics for the four protocols.
//!
//! Every protocol shares one structure: a detection event is the joint
//! arrival of the protocol's signal photons, the per-photon background rate
//! is `n_b` (classical) or `n_b / m_modes` (idler-gated), and a reflecting
//! target short-circuits the coincidence with probability `eta`. The
//! closed forms are low-noise approximations, so raw false-alarm values can
//! exceed 1 outside that regime; they are clamped and the clamp is reported.

use crate::error::{Error, Result};
use crate::params::ChannelParams;
use crate::protocol::Protocol;

/// Single-shot probability quadruple for one protocol at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbabilities {
    /// p0(+): declaring the target present when it is absent.
    pub p_false_alarm: f64,
    /// p0(-): correctly declaring the target absent.
    pub p_true_negative: f64,
    /// p1(+): declaring the target present when it is present.
    pub p_detect: f64,
    /// p1(-): missing a present target.
    pub p_miss: f64,
}

/// Probability quadruple plus the evaluation flags callers surface as warnings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionReport {
    pub probabilities: DetectionProbabilities,
    /// True when the raw false-alarm formula exceeded 1 and was clamped.
    pub clamped: bool,
    /// Low-noise model validity flag of the parameters.
    pub low_noise_valid: bool,
}

/// Which single-shot probability an m-shot power refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotKind {
    FalseAlarm,
    Detection,
    Miss,
}

/// Per-photon background firing probability: `n_b` for classical light,
/// `n_b / m_modes` when idler gating restricts the accepted mode.
pub fn single_photon_background_rate(protocol: Protocol, params: ChannelParams) -> f64 {
    if protocol.idler_gated() {
        params.n_b() / params.m_modes()
    } else {
        params.n_b()
    }
}

fn raw_false_alarm(protocol: Protocol, params: ChannelParams) -> f64 {
    let single = single_photon_background_rate(protocol, params);
    match protocol.signal_photons() {
        1 => single,
        _ => single * single,
    }
}

fn clamp_unit(raw: f64) -> (f64, bool) {
    if raw > 1.0 {
        (1.0, true)
    } else {
        (raw, false)
    }
}

/// p0(+): probability of a coincidence from background alone.
///
/// `n_b` (Ci1), `n_b^2` (Ci2), `n_b/m` (Qi1) or `(n_b/m)^2` (Qi2), clamped
/// to 1; use [`detection_probabilities`] to observe the clamp flag.
pub fn false_alarm_prob(protocol: Protocol, params: ChannelParams) -> f64 {
    clamp_unit(raw_false_alarm(protocol, params)).0
}

/// p1(+) = (1 - eta) * p0(+) + eta, evaluated as `eta + p0 * (1 - eta)` so
/// a tiny p0 is folded in without cancellation and the eta = 0 and eta = 1
/// endpoints stay exact.
pub fn detection_prob(protocol: Protocol, params: ChannelParams) -> f64 {
    let p0 = false_alarm_prob(protocol, params);
    let eta = params.eta();
    eta + p0 * (1.0 - eta)
}

/// p1(-) = 1 - p1(+), exactly.
pub fn miss_prob(protocol: Protocol, params: ChannelParams) -> f64 {
    1.0 - detection_prob(protocol, params)
}

/// Full quadruple plus clamp and validity flags.
pub fn detection_probabilities(protocol: Protocol, params: ChannelParams) -> DetectionReport {
    let (p_false_alarm, clamped) = clamp_unit(raw_false_alarm(protocol, params));
    let eta = params.eta();
    let p_detect = eta + p_false_alarm * (1.0 - eta);
    DetectionReport {
        probabilities: DetectionProbabilities {
            p_false_alarm,
            p_true_negative: 1.0 - p_false_alarm,
            p_detect,
            p_miss: 1.0 - p_detect,
        },
        clamped,
        low_noise_valid: params.low_noise_valid(),
    }
}

/// Single-shot SNR, defined as p1(+) / p0(+).
///
/// Errors with [`Error::ZeroNoise`] when the false-alarm probability is zero
/// (no background); call [`snr_zero_noise_limit`] to get the limit instead.
pub fn snr(protocol: Protocol, params: ChannelParams) -> Result<f64> {
    let p0 = false_alarm_prob(protocol, params);
    if p0 > 0.0 {
        Ok(detection_prob(protocol, params) / p0)
    } else {
        Err(Error::ZeroNoise)
    }
}

/// SNR with the zero-noise limit taken explicitly: infinity for `eta > 0`
/// (any return dominates a vanishing background) and 1 for `eta = 0`.
pub fn snr_zero_noise_limit(protocol: Protocol, params: ChannelParams) -> f64 {
    match snr(protocol, params) {
        Ok(v) => v,
        Err(_) => {
            if params.eta() > 0.0 {
                f64::INFINITY
            } else {
                1.0
            }
        }
    }
}

/// The m-repetition probability `p(., m) = p(.)^m` (all m shots share the
/// outcome; an at-least-k-of-m rule lives in the Monte Carlo layer only).
///
/// # Panics
///
/// Panics if `m == 0`.
pub fn m_shot_prob(protocol: Protocol, params: ChannelParams, m: u32, kind: ShotKind) -> f64 {
    assert!(m >= 1, "shot count m must be >= 1");
    let single = match kind {
        ShotKind::FalseAlarm => false_alarm_prob(protocol, params),
        ShotKind::Detection => detection_prob(protocol, params),
        ShotKind::Miss => miss_prob(protocol, params),
    };
    match i32::try_from(m) {
        Ok(exponent) => single.powi(exponent),
        // beyond i32 the repeated-multiplication path is pointless anyway
        Err(_) => single.powf(f64::from(m)),
    }
}
