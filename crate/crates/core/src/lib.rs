//! Detection statistics and accuracy bounds for photon-counting target
//! detection, comparing classical illumination against idler-gated
//! (entanglement-correlated) illumination with one or two signal photons.
//!
//! The crate provides, layer by layer:
//!
//! - [`detection`]: closed-form single-shot false-alarm, detection and miss
//!   probabilities and the SNR `p1(+)/p0(+)` for the four protocols;
//! - [`hypothesis`]: Bayesian binary-hypothesis error probabilities and the
//!   two-photon/one-photon error ratio;
//! - [`range_delay`]: the Ziv-Zakai lower bound on mean-square range-delay
//!   error, its enhancement ratio, and delay/range conversion;
//! - [`integration_time`]: equal-SNR time-bandwidth matching and the
//!   integration-time reduction it buys;
//! - [`montecarlo`]: an independent event-level Monte Carlo oracle that
//!   rebuilds the same statistics from single-photon Bernoulli draws, with
//!   counter-based per-trial randomness so campaigns are reproducible under
//!   any degree of parallelism.
//!
//! All closed forms live in the low-background regime (`n_b` well below 1,
//! many modes); evaluations outside it are clamped into `[0, 1]` and flagged
//! rather than rejected.
//!
//! # Example
//!
//! ```
//! use qir_core::{detection, hypothesis, ChannelParams, PriorPair, Protocol};
//!
//! let params = ChannelParams::new(0.01, 100.0, 0.1)?;
//! let snr = detection::snr(Protocol::Qi2, params)?;
//! assert!((snr - 1.00000009e7).abs() / 1.00000009e7 < 1e-12);
//!
//! let report = hypothesis::error_probability(Protocol::Qi2, params, PriorPair::symmetric());
//! assert!((report.p_err - 0.4500000005).abs() < 1e-12);
//! # Ok::<(), qir_core::Error>(())
//! ```

pub mod detection;
pub mod error;
pub mod hypothesis;
pub mod integration_time;
pub mod montecarlo;
pub mod params;
pub mod protocol;
pub mod quadrature;
pub mod range_delay;

pub use detection::{DetectionProbabilities, DetectionReport, ShotKind};
pub use error::{Error, Result};
pub use hypothesis::{ErrorReport, PriorPair};
pub use integration_time::TimeBudget;
pub use montecarlo::{
    DelayEstimationConfig, DelayEstimationOutcome, Hypothesis, ShotRule, TrialConfig, TrialOutcome,
    TrialRng,
};
pub use params::ChannelParams;
pub use protocol::Protocol;
pub use range_delay::{DelayWindow, ErrorProfile, ZzbResult, SPEED_OF_LIGHT};
