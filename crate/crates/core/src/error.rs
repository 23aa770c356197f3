use crate::protocol::Protocol;

/// Errors raised by the library.
///
/// Every message starts with the variant name so front ends can surface a
/// stable identifier without matching on the enum.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Channel or configuration parameters violate a hard invariant.
    #[error("InvalidParams: {0}")]
    InvalidParams(String),

    /// SNR requested at zero background noise, where the ratio is undefined.
    #[error("ZeroNoise: the false-alarm probability is zero at n_b = 0, so the SNR ratio is undefined (request the limit explicitly if you want it)")]
    ZeroNoise,

    /// No closed-form error probability exists for this protocol.
    #[error("UnsupportedProtocol: no closed-form error probability for {0}")]
    UnsupportedProtocol(Protocol),

    /// An enhancement ratio was requested at eta = 0 where it is identically 1.
    #[error("DegenerateEta: the error ratio is identically 1 at eta = 0")]
    DegenerateEta,

    /// The matched time-bandwidth product fell below one mode.
    #[error(
        "SubUnityModes: matched mode count {0} is below 1; increase n_b * m_prime to at least 1"
    )]
    SubUnityModes(f64),

    /// An error-probability profile returned a value outside [0, 1].
    #[error("InvalidProfile: profile returned {value} at tau' = {tau_prime}, outside [0, 1]")]
    InvalidProfile { tau_prime: f64, value: f64 },

    /// A physically non-negative quantity was negative.
    #[error("NegativeInput: {0} is negative")]
    NegativeInput(f64),

    /// The delay window is empty or otherwise malformed.
    #[error("InvalidWindow: {0}")]
    InvalidWindow(String),

    /// Prior probabilities do not form a distribution.
    #[error("InvalidPriors: {0}")]
    InvalidPriors(String),

    /// A Monte Carlo configuration violates its invariants.
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
