//! Ziv-Zakai bound on the mean-square range-delay error, the two-photon to
//! one-photon enhancement ratio, and range/delay conversion.
//!
//! The bound integrates the binary-detection error probability against the
//! kernel `tau' (1 - tau'/delta_tau)` over the prior delay window. With a
//! constant error probability `c` the integral collapses to
//! `c * delta_tau^2 / 6`; an arbitrary profile goes through adaptive Simpson
//! quadrature instead. Profiles are evaluated serially by the quadrature.

use crate::error::{Error, Result};
use crate::hypothesis::{closed_form_error, error_probability, PriorPair};
use crate::params::ChannelParams;
use crate::protocol::Protocol;
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_EVALS, DEFAULT_REL_TOL};

/// Exact SI speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Prior interval for the round-trip delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayWindow {
    tau_min: f64,
    tau_max: f64,
}

impl DelayWindow {
    /// Requires `tau_min >= 0` and `tau_max > tau_min`, both finite.
    pub fn new(tau_min: f64, tau_max: f64) -> Result<Self> {
        if !tau_min.is_finite() || tau_min < 0.0 {
            return Err(Error::InvalidWindow(format!(
                "tau_min must be finite and >= 0, got {tau_min}"
            )));
        }
        if !tau_max.is_finite() || tau_max <= tau_min {
            return Err(Error::InvalidWindow(format!(
                "tau_max must be finite and > tau_min, got tau_min = {tau_min}, tau_max = {tau_max}"
            )));
        }
        Ok(Self { tau_min, tau_max })
    }

    pub fn tau_min(self) -> f64 {
        self.tau_min
    }

    pub fn tau_max(self) -> f64 {
        self.tau_max
    }

    /// Window width `tau_max - tau_min`.
    pub fn delta_tau(self) -> f64 {
        self.tau_max - self.tau_min
    }

    /// Whether the window is narrow relative to its midpoint
    /// (`delta_tau <= 0.1 * (tau_min + tau_max) / 2`). Wide windows are
    /// allowed but callers surface the flag as a warning.
    pub fn narrow_prior_ok(self) -> bool {
        self.delta_tau() <= 0.1 * (self.tau_min + self.tau_max) / 2.0
    }
}

/// Error-probability profile over the window offset `tau' in [0, delta_tau]`.
pub enum ErrorProfile<'a> {
    /// Constant profile equal to the symmetric-prior error probability of
    /// the protocol at the given parameters (closed form for the idler-gated
    /// protocols, the general rule otherwise).
    FromParams,
    /// Explicit constant in [0, 1].
    Constant(f64),
    /// Arbitrary profile; every evaluation must land in [0, 1].
    Custom(&'a dyn Fn(f64) -> f64),
}

/// Bound on the mean-square delay error, in seconds squared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZzbResult {
    pub mean_square_error: f64,
    /// `sqrt(mean_square_error)`, seconds.
    pub rms_error: f64,
    pub protocol: Protocol,
    /// Absolute error estimate of the quadrature; zero on the closed-form path.
    pub quadrature_abs_error_estimate: f64,
}

fn symmetric_error_constant(protocol: Protocol, params: ChannelParams) -> f64 {
    match closed_form_error(protocol, params) {
        Ok(report) => report.p_err,
        Err(_) => error_probability(protocol, params, PriorPair::symmetric()).p_err,
    }
}

fn check_unit(tau_prime: f64, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidProfile { tau_prime, value });
    }
    Ok(value)
}

/// Mean-square-error bound for the given error-probability profile.
///
/// Constant profiles (including [`ErrorProfile::FromParams`]) use the
/// analytic `c * delta_tau^2 / 6`; custom profiles are integrated with
/// adaptive Simpson at relative tolerance 1e-10 capped at 1e6 evaluations.
pub fn zzb(
    protocol: Protocol,
    params: ChannelParams,
    window: DelayWindow,
    profile: ErrorProfile<'_>,
) -> Result<ZzbResult> {
    match profile {
        ErrorProfile::FromParams => {
            constant_zzb(protocol, symmetric_error_constant(protocol, params))
                .map(|r| finish(r, window))
        }
        ErrorProfile::Constant(c) => constant_zzb(protocol, c).map(|r| finish(r, window)),
        ErrorProfile::Custom(f) => quadrature_zzb(protocol, window, &|t| f(t)),
    }
}

/// Same bound but forcing the quadrature path even for constant profiles;
/// used to cross-check the closed form.
pub fn zzb_via_quadrature(
    protocol: Protocol,
    params: ChannelParams,
    window: DelayWindow,
    profile: ErrorProfile<'_>,
) -> Result<ZzbResult> {
    match profile {
        ErrorProfile::FromParams => {
            let c = symmetric_error_constant(protocol, params);
            quadrature_zzb(protocol, window, &move |_| c)
        }
        ErrorProfile::Constant(c) => {
            check_unit(0.0, c)?;
            quadrature_zzb(protocol, window, &move |_| c)
        }
        ErrorProfile::Custom(f) => quadrature_zzb(protocol, window, &|t| f(t)),
    }
}

struct ConstantZzb {
    constant: f64,
    protocol: Protocol,
}

fn constant_zzb(protocol: Protocol, c: f64) -> Result<ConstantZzb> {
    check_unit(0.0, c)?;
    Ok(ConstantZzb {
        constant: c,
        protocol,
    })
}

fn finish(c: ConstantZzb, window: DelayWindow) -> ZzbResult {
    let dt = window.delta_tau();
    let mse = c.constant * dt * dt / 6.0;
    ZzbResult {
        mean_square_error: mse,
        rms_error: mse.sqrt(),
        protocol: c.protocol,
        quadrature_abs_error_estimate: 0.0,
    }
}

fn quadrature_zzb(
    protocol: Protocol,
    window: DelayWindow,
    profile: &dyn Fn(f64) -> f64,
) -> Result<ZzbResult> {
    let dt = window.delta_tau();
    let integrand = |tau_prime: f64| -> Result<f64> {
        let p = check_unit(tau_prime, profile(tau_prime))?;
        Ok(tau_prime * (1.0 - tau_prime / dt) * p)
    };
    let q = adaptive_simpson(integrand, 0.0, dt, DEFAULT_REL_TOL, DEFAULT_MAX_EVALS)?;
    // The kernel is non-negative, so tiny negative round-off is floored.
    let mse = q.value.max(0.0);
    Ok(ZzbResult {
        mean_square_error: mse,
        rms_error: mse.sqrt(),
        protocol,
        quadrature_abs_error_estimate: q.abs_error_estimate,
    })
}

/// Ratio of the two-photon to one-photon bounds under their constant
/// symmetric-prior error profiles. The kernel integral cancels, so this
/// equals [`crate::hypothesis::error_ratio`] up to rounding and is
/// independent of the window.
pub fn zzb_ratio(params: ChannelParams, window: DelayWindow) -> Result<f64> {
    if params.eta() == 0.0 {
        return Err(Error::DegenerateEta);
    }
    let two = zzb(Protocol::Qi2, params, window, ErrorProfile::FromParams)?;
    let one = zzb(Protocol::Qi1, params, window, ErrorProfile::FromParams)?;
    Ok(two.mean_square_error / one.mean_square_error)
}

/// Range from round-trip delay: `R = c * tau / 2`.
pub fn delay_to_range(tau: f64) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::NegativeInput(tau));
    }
    Ok(SPEED_OF_LIGHT * tau / 2.0)
}

/// Round-trip delay from range: `tau = 2 R / c`.
pub fn range_to_delay(range: f64) -> Result<f64> {
    if range < 0.0 {
        return Err(Error::NegativeInput(range));
    }
    Ok(2.0 * range / SPEED_OF_LIGHT)
}
