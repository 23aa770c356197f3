//! Bayesian binary-hypothesis error probabilities for the detection rule
//! "declare the target present iff the coincidence fires".

use crate::detection::{false_alarm_prob, m_shot_prob, miss_prob, ShotKind};
use crate::error::{Error, Result};
use crate::params::ChannelParams;
use crate::protocol::Protocol;

/// Prior probabilities of the two hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorPair {
    p0: f64,
    p1: f64,
}

impl PriorPair {
    /// Tolerance on `p0 + p1 = 1`.
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidPriors(format!(
                "priors must lie in [0, 1], got p0 = {p0}, p1 = {p1}"
            )));
        }
        if (p0 + p1 - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidPriors(format!(
                "priors must sum to 1 within {}, got {}",
                Self::SUM_TOLERANCE,
                p0 + p1
            )));
        }
        Ok(Self { p0, p1 })
    }

    /// The symmetric scenario p0 = p1 = 1/2.
    pub fn symmetric() -> Self {
        Self { p0: 0.5, p1: 0.5 }
    }

    /// Prior of "target absent", with `p1` the complement.
    pub fn from_p0(p0: f64) -> Result<Self> {
        Self::new(p0, 1.0 - p0)
    }

    pub fn p0(self) -> f64 {
        self.p0
    }

    pub fn p1(self) -> f64 {
        self.p1
    }

    pub fn is_symmetric(self) -> bool {
        self.p0 == 0.5 && self.p1 == 0.5
    }
}

/// Error probability together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub p_err: f64,
    pub protocol: Protocol,
    pub priors: PriorPair,
    /// True when produced by [`closed_form_error`] rather than the general rule.
    pub closed_form_used: bool,
    /// True when the value is an upper bound (the two-signal-photon closed
    /// form is restricted to the coincidence measurement, not the optimal one).
    pub upper_bound: bool,
}

/// P_err = p0 * p(declare present | absent) + p1 * p(declare absent | present).
pub fn error_probability(
    protocol: Protocol,
    params: ChannelParams,
    priors: PriorPair,
) -> ErrorReport {
    let p_err = priors.p0() * false_alarm_prob(protocol, params)
        + priors.p1() * miss_prob(protocol, params);
    ErrorReport {
        p_err,
        protocol,
        priors,
        closed_form_used: false,
        upper_bound: false,
    }
}

/// Symmetric-prior closed forms for the idler-gated protocols:
/// `(1 - eta + eta * (n_b/m)) / 2` for Qi1 and
/// `(1 - eta + eta * (n_b/m)^2) / 2` for Qi2 (an upper bound).
/// Both are evaluated as sums of non-negative terms so nothing cancels as
/// eta approaches 1.
///
/// The classical protocols have no published closed form and return
/// [`Error::UnsupportedProtocol`].
pub fn closed_form_error(protocol: Protocol, params: ChannelParams) -> Result<ErrorReport> {
    let ratio = params.n_b() / params.m_modes();
    let eta = params.eta();
    let (p_err, upper_bound) = match protocol {
        Protocol::Qi1 => (0.5 * ((1.0 - eta) + eta * ratio), false),
        Protocol::Qi2 => (0.5 * ((1.0 - eta) + eta * (ratio * ratio)), true),
        other => return Err(Error::UnsupportedProtocol(other)),
    };
    Ok(ErrorReport {
        p_err,
        protocol,
        priors: PriorPair::symmetric(),
        closed_form_used: true,
        upper_bound,
    })
}

/// Symmetric-prior error probability of the m-repetition decision rule whose
/// conditionals are the m-th-power quantities:
/// `(p0(+)^m + p1(-)^m) / 2`. At `m = 1` this is the single-shot symmetric
/// error probability.
pub fn m_shot_symmetric_error(protocol: Protocol, params: ChannelParams, m: u32) -> f64 {
    0.5 * (m_shot_prob(protocol, params, m, ShotKind::FalseAlarm)
        + m_shot_prob(protocol, params, m, ShotKind::Miss))
}

/// Ratio of the two-signal-photon to the one-signal-photon closed-form error,
/// `(1 - eta + eta (n_b/m)^2) / (1 - eta + eta n_b/m)`; strictly below 1
/// whenever `eta > 0` and `0 < n_b/m < 1`.
///
/// Errors with [`Error::DegenerateEta`] at `eta = 0`, where the ratio is
/// identically 1 and no enhancement exists.
pub fn error_ratio(params: ChannelParams) -> Result<f64> {
    if params.eta() == 0.0 {
        return Err(Error::DegenerateEta);
    }
    let two = closed_form_error(Protocol::Qi2, params)?.p_err;
    let one = closed_form_error(Protocol::Qi1, params)?.p_err;
    Ok(two / one)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n_b: f64, m: f64, eta: f64) -> ChannelParams {
        ChannelParams::new(n_b, m, eta).unwrap()
    }

    #[test]
    fn priors_validation() {
        assert!(PriorPair::new(0.3, 0.7).is_ok());
        assert!(PriorPair::new(0.3, 0.6).is_err());
        assert!(PriorPair::new(-0.1, 1.1).is_err());
        assert!(!PriorPair::from_p0(0.25).unwrap().is_symmetric());
        assert!(PriorPair::symmetric().is_symmetric());
        // within tolerance
        assert!(PriorPair::new(0.5, 0.5 + 5e-13).is_ok());
    }

    #[test]
    fn symmetric_error_examples() {
        let p = params(0.01, 100.0, 0.1);
        let qi1 = error_probability(Protocol::Qi1, p, PriorPair::symmetric());
        assert!((qi1.p_err - 0.450005).abs() < 1e-12);
        let qi2 = error_probability(Protocol::Qi2, p, PriorPair::symmetric());
        assert!((qi2.p_err - 0.4500000005).abs() < 1e-12);
        assert!(!qi1.closed_form_used);
    }

    #[test]
    fn perfect_discrimination() {
        let p = params(0.0, 100.0, 1.0);
        for proto in Protocol::ALL {
            let r = error_probability(proto, p, PriorPair::symmetric());
            assert_eq!(r.p_err, 0.0);
        }
    }

    #[test]
    fn closed_forms_match_general_rule() {
        let p = params(0.01, 100.0, 0.1);
        let cf1 = closed_form_error(Protocol::Qi1, p).unwrap();
        assert!((cf1.p_err - 0.450005).abs() < 1e-15);
        assert!(!cf1.upper_bound);
        let cf2 = closed_form_error(Protocol::Qi2, p).unwrap();
        assert!((cf2.p_err - 0.4500000005).abs() < 1e-15);
        assert!(cf2.upper_bound);
        assert!(cf2.closed_form_used);
        // identity with the general rule under symmetric priors
        for proto in [Protocol::Qi1, Protocol::Qi2] {
            let general = error_probability(proto, p, PriorPair::symmetric()).p_err;
            let closed = closed_form_error(proto, p).unwrap().p_err;
            assert!((general - closed).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_rejects_classical() {
        let p = params(0.01, 100.0, 0.1);
        assert_eq!(
            closed_form_error(Protocol::Ci1, p),
            Err(Error::UnsupportedProtocol(Protocol::Ci1))
        );
        assert!(closed_form_error(Protocol::Ci2, p).is_err());
    }

    #[test]
    fn indistinguishable_hypotheses_flip_a_coin() {
        let p = params(0.01, 100.0, 0.0);
        let r = closed_form_error(Protocol::Qi1, p).unwrap();
        assert_eq!(r.p_err, 0.5);
    }

    #[test]
    fn asymmetric_priors() {
        let p = params(0.01, 100.0, 0.1);
        let priors = PriorPair::new(0.2, 0.8).unwrap();
        let r = error_probability(Protocol::Qi1, p, priors);
        let expect = 0.2 * 1.0e-4 + 0.8 * (1.0 - (0.1 + 0.9 * 1.0e-4));
        assert!((r.p_err - expect).abs() < 1e-15);
    }

    #[test]
    fn error_ratio_examples() {
        let p = params(0.01, 100.0, 0.1);
        let r = error_ratio(p).unwrap();
        // frozen from the ratio of the two closed forms
        let expect = 0.4500000005 / 0.450005;
        assert!((r - expect).abs() < 1e-12);
        assert!(r < 1.0);

        // eta = 1 reduces the ratio to n_b/m exactly
        let p1 = params(0.01, 100.0, 1.0);
        let r1 = error_ratio(p1).unwrap();
        assert!((r1 - 1.0e-4).abs() / 1.0e-4 < 1e-12);

        // n_b/m -> 0 limit approaches 1 (and rounds to 1 below ulp resolution)
        let p0 = params(1e-12, 1e4, 0.3);
        let r0 = error_ratio(p0).unwrap();
        assert!(r0 <= 1.0 && (r0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn m_shot_error_reduces_to_single_shot() {
        let p = params(0.01, 100.0, 0.1);
        for proto in Protocol::ALL {
            let single = error_probability(proto, p, PriorPair::symmetric()).p_err;
            assert!((m_shot_symmetric_error(proto, p, 1) - single).abs() < 1e-16);
        }
        // more repetitions shrink the dominant miss term at high eta
        let strong = params(0.01, 100.0, 0.9);
        let one = m_shot_symmetric_error(Protocol::Qi2, strong, 1);
        let ten = m_shot_symmetric_error(Protocol::Qi2, strong, 10);
        assert!(ten < one);
        assert!((ten - 0.5 * (0.1f64 - 1e-9).powi(10)).abs() < 1e-12);
    }

    #[test]
    fn error_ratio_degenerate_eta() {
        let p = params(0.01, 100.0, 0.0);
        assert_eq!(error_ratio(p), Err(Error::DegenerateEta));
    }

    #[test]
    fn monotone_in_eta_and_noise() {
        // symmetric-prior error is non-increasing in eta, non-decreasing in n_b
        for proto in Protocol::ALL {
            let mut last = f64::INFINITY;
            for k in 1..=20 {
                let eta = k as f64 / 20.0;
                let r = error_probability(proto, params(0.05, 50.0, eta), PriorPair::symmetric());
                assert!(r.p_err <= last + 1e-15);
                last = r.p_err;
            }
            let mut last = -f64::INFINITY;
            for k in 0..=20 {
                let n_b = k as f64 * 0.005;
                let r = error_probability(proto, params(n_b, 50.0, 0.3), PriorPair::symmetric());
                assert!(r.p_err >= last - 1e-15);
                last = r.p_err;
            }
        }
    }
}
