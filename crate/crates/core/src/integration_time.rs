//! Time-bandwidth matching between the one- and two-signal-photon idler-gated
//! protocols at equal SNR, and the resulting integration-time reduction.
//!
//! With equal bandwidths and mode counts `m = t * bandwidth`, matching the
//! two-photon SNR to the one-photon SNR at mode count `m_prime` requires
//! `m = sqrt(n_b * m_prime)`, which translates into
//! `t2 = sqrt(n_b * t1 / bandwidth)` and a reduction factor
//! `t2 / t1 = sqrt(n_b / (t1 * bandwidth))`.

use crate::detection::snr;
use crate::error::{Error, Result};
use crate::params::ChannelParams;
use crate::protocol::Protocol;

/// Integration-time pair for the two protocols at one bandwidth.
///
/// `bandwidth` is a mode-count rate (modes per second), so `m = t * bandwidth`
/// holds by definition; both protocols share it by assumption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBudget {
    /// Integration time of the one-signal-photon protocol, seconds.
    pub t1: f64,
    /// Matched integration time of the two-signal-photon protocol, seconds.
    pub t2: f64,
    /// Shared bandwidth, Hz.
    pub bandwidth: f64,
    /// Mean background photons per mode.
    pub n_b: f64,
}

impl TimeBudget {
    /// Derive the matched two-photon time from a one-photon budget.
    ///
    /// # Panics
    ///
    /// Panics unless `t1`, `bandwidth` and `n_b` are all positive.
    pub fn from_one_photon_time(t1: f64, bandwidth: f64, n_b: f64) -> Self {
        let t2 = integration_time_2p(t1, bandwidth, n_b);
        Self {
            t1,
            t2,
            bandwidth,
            n_b,
        }
    }

    /// `t2 / t1`.
    pub fn reduction_factor(&self) -> f64 {
        self.t2 / self.t1
    }

    /// One-photon mode count `m_prime = t1 * bandwidth`.
    pub fn m_prime(&self) -> f64 {
        self.t1 * self.bandwidth
    }

    /// Matched two-photon mode count `t2 * bandwidth`.
    pub fn m_matched(&self) -> f64 {
        self.t2 * self.bandwidth
    }
}

/// Mode count at which the two-photon protocol matches the one-photon SNR:
/// `m = sqrt(n_b * m_prime)`.
///
/// Errors with [`Error::SubUnityModes`] when the matched count falls below
/// one mode (`n_b * m_prime < 1`).
pub fn matched_modes(m_prime: f64, n_b: f64) -> Result<f64> {
    let m = (n_b * m_prime).sqrt();
    if m >= 1.0 {
        Ok(m)
    } else {
        Err(Error::SubUnityModes(m))
    }
}

/// Matched two-photon integration time `t2 = sqrt(n_b * t1 / bandwidth)`.
///
/// # Panics
///
/// Panics unless all inputs are positive.
pub fn integration_time_2p(t1: f64, bandwidth: f64, n_b: f64) -> f64 {
    assert!(t1 > 0.0, "t1 must be positive");
    assert!(bandwidth > 0.0, "bandwidth must be positive");
    assert!(n_b > 0.0, "n_b must be positive");
    (n_b * t1 / bandwidth).sqrt()
}

/// Relative reduction `t2 / t1 = sqrt(n_b / (t1 * bandwidth))`.
///
/// # Panics
///
/// Panics unless all inputs are positive.
pub fn time_reduction_factor(t1: f64, bandwidth: f64, n_b: f64) -> f64 {
    assert!(t1 > 0.0, "t1 must be positive");
    assert!(bandwidth > 0.0, "bandwidth must be positive");
    assert!(n_b > 0.0, "n_b must be positive");
    (n_b / (t1 * bandwidth)).sqrt()
}

/// Floating-point residual of the SNR-matching identity: the two-photon SNR
/// at `m = sqrt(n_b * m_prime)` minus the one-photon SNR at `m_prime`, both
/// with reflectivity `kappa`. Algebraically both reduce to
/// `(1 - kappa) + kappa * m_prime / n_b`, so the residual is rounding noise.
pub fn snr_match_residual(m_prime: f64, n_b: f64, kappa: f64) -> Result<f64> {
    let m = matched_modes(m_prime, n_b)?;
    let two = ChannelParams::new(n_b, m, kappa)?;
    let one = ChannelParams::new(n_b, m_prime, kappa)?;
    if kappa == 0.0 {
        // both SNRs are exactly 1
        return Ok(0.0);
    }
    Ok(snr(Protocol::Qi2, two)? - snr(Protocol::Qi1, one)?)
}
