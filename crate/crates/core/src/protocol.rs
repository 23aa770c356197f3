use std::fmt;
use std::str::FromStr;

/// The four illumination schemes.
///
/// `Ci*` send non-entangled (classical) signal photons; `Qi*` retain an idler
/// photon whose time/frequency correlation gates the signal detections and
/// divides the per-photon background rate by the mode count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Classical illumination, one signal photon.
    Ci1,
    /// Classical illumination, two independent signal photons.
    Ci2,
    /// Idler-gated illumination, one signal photon.
    Qi1,
    /// Idler-gated illumination, two signal photons and one idler.
    Qi2,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::Ci1, Protocol::Ci2, Protocol::Qi1, Protocol::Qi2];

    /// Number of signal photons whose joint arrival constitutes a detection.
    pub fn signal_photons(self) -> u32 {
        match self {
            Protocol::Ci1 | Protocol::Qi1 => 1,
            Protocol::Ci2 | Protocol::Qi2 => 2,
        }
    }

    /// Whether detections are gated by an idler correlation check.
    pub fn idler_gated(self) -> bool {
        matches!(self, Protocol::Qi1 | Protocol::Qi2)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Protocol::Ci1 => "ci1",
            Protocol::Ci2 => "ci2",
            Protocol::Qi1 => "qi1",
            Protocol::Qi2 => "qi2",
        };
        f.write_str(s)
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ci1" => Ok(Protocol::Ci1),
            "ci2" => Ok(Protocol::Ci2),
            "qi1" => Ok(Protocol::Qi1),
            "qi2" => Ok(Protocol::Qi2),
            other => Err(format!(
                "unknown protocol `{other}` (expected ci1, ci2, qi1 or qi2)"
            )),
        }
    }
}
