//! Benchmark-only crate; see `benches/qir_benches.rs`.
//!
//! Shared benchmark fixtures live here so the bench target stays small.

use qir_core::ChannelParams;

/// Canonical low-noise operating point used across the benchmarks.
pub fn canonical_params() -> ChannelParams {
    ChannelParams::new(0.01, 100.0, 0.1).expect("valid canonical parameters")
}
