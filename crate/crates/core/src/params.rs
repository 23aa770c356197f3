use crate::error::{Error, Result};

/// Environment and target parameters shared by every protocol.
///
/// `eta` holds the target reflectivity; the same field doubles as the
/// round-trip transmissivity `kappa` used by the integration-time relations,
/// since both play the identical role of "probability the signal returns".
///
/// `m_modes` is real-valued (not an integer count) so that mode-matched
/// comparisons, which produce non-integer mode counts, stay in-domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    n_b: f64,
    m_modes: f64,
    eta: f64,
}

impl ChannelParams {
    /// Build validated parameters.
    ///
    /// Requires `n_b >= 0`, `m_modes >= 1` and `eta` in `[0, 1]`; all three
    /// must be finite.
    pub fn new(n_b: f64, m_modes: f64, eta: f64) -> Result<Self> {
        if !n_b.is_finite() || n_b < 0.0 {
            return Err(Error::InvalidParams(format!(
                "n_b must be finite and >= 0, got {n_b}"
            )));
        }
        if !m_modes.is_finite() || m_modes < 1.0 {
            return Err(Error::InvalidParams(format!(
                "m_modes must be finite and >= 1, got {m_modes}"
            )));
        }
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParams(format!(
                "eta must lie in [0, 1], got {eta}"
            )));
        }
        Ok(Self { n_b, m_modes, eta })
    }

    /// Mean background photons per mode.
    pub fn n_b(self) -> f64 {
        self.n_b
    }

    /// Time-bandwidth product (number of modes).
    pub fn m_modes(self) -> f64 {
        self.m_modes
    }

    /// Target reflectivity / round-trip transmissivity.
    pub fn eta(self) -> f64 {
        self.eta
    }

    /// Whether the closed forms are used inside their low-noise validity
    /// region: `n_b < 0.1` and `m_modes * n_b < 1` (positivity of the
    /// vacuum weight in the background state).
    ///
    /// Evaluations outside this region still succeed; callers surface the
    /// flag as a warning.
    pub fn low_noise_valid(self) -> bool {
        self.n_b < 0.1 && self.m_modes * self.n_b < 1.0
    }
}
