//! Cross-module identities checked on seeded random parameter grids.

use qir_core::detection::{self, ShotKind};
use qir_core::hypothesis::{self, PriorPair};
use qir_core::integration_time;
use qir_core::range_delay::{self, DelayWindow, ErrorProfile};
use qir_core::{ChannelParams, Protocol, TrialRng};

/// Deterministic grid of valid parameter points with n_b in (0, 0.1),
/// m_modes in [2, 1e4] (log-uniform) and eta in (0, 1).
fn random_grid(seed: u64, points: usize) -> Vec<ChannelParams> {
    let mut rng = TrialRng::for_trial(seed, 0);
    (0..points)
        .map(|_| {
            let n_b = 1e-4 + (0.1 - 1e-4) * rng.next_f64();
            let m = 2.0 * (1e4_f64 / 2.0).powf(rng.next_f64());
            let eta = 1e-3 + (1.0 - 2e-3) * rng.next_f64();
            ChannelParams::new(n_b, m, eta).unwrap()
        })
        .collect()
}

#[test]
fn closed_form_equals_general_rule_on_grid() {
    for params in random_grid(2024, 1000) {
        for protocol in [Protocol::Qi1, Protocol::Qi2] {
            let closed = hypothesis::closed_form_error(protocol, params)
                .unwrap()
                .p_err;
            let general =
                hypothesis::error_probability(protocol, params, PriorPair::symmetric()).p_err;
            assert!(
                (closed - general).abs() <= 1e-15,
                "{protocol} at {params:?}: closed {closed} vs general {general}"
            );
        }
    }
}

#[test]
fn snr_ordering_on_grid() {
    for params in random_grid(7, 1000) {
        let ci1 = detection::snr(Protocol::Ci1, params).unwrap();
        let ci2 = detection::snr(Protocol::Ci2, params).unwrap();
        let qi1 = detection::snr(Protocol::Qi1, params).unwrap();
        let qi2 = detection::snr(Protocol::Qi2, params).unwrap();
        assert!(
            qi2 > qi1 && qi1 > ci1 && qi2 > ci2,
            "ordering broken at {params:?}: ci1 {ci1}, ci2 {ci2}, qi1 {qi1}, qi2 {qi2}"
        );
    }
}

#[test]
fn error_ratio_below_one_on_grid() {
    for params in random_grid(99, 1000) {
        let ratio = hypothesis::error_ratio(params).unwrap();
        assert!(ratio < 1.0, "ratio {ratio} at {params:?}");
    }
}

#[test]
fn symmetric_error_never_exceeds_coin_flip() {
    for params in random_grid(55, 1000) {
        for protocol in Protocol::ALL {
            let report = hypothesis::error_probability(protocol, params, PriorPair::symmetric());
            assert!(
                report.p_err <= 0.5 + 1e-15,
                "{protocol} at {params:?}: p_err {}",
                report.p_err
            );
            assert!(report.p_err >= 0.0);
        }
    }
}

#[test]
fn zzb_ratio_matches_error_ratio_and_window_free() {
    let wide = DelayWindow::new(1e-7, 3e-4).unwrap();
    let narrow = DelayWindow::new(9.5e-6, 1e-5).unwrap();
    for params in random_grid(41, 200) {
        let expect = hypothesis::error_ratio(params).unwrap();
        let a = range_delay::zzb_ratio(params, narrow).unwrap();
        let b = range_delay::zzb_ratio(params, wide).unwrap();
        assert!((a - expect).abs() / expect < 1e-10);
        assert!((a - b).abs() / a < 1e-10);
    }
}

#[test]
fn quadrature_path_tracks_closed_form() {
    let params = ChannelParams::new(0.01, 100.0, 0.1).unwrap();
    for protocol in Protocol::ALL {
        for &delta in &[1e-9, 1e-6, 1e-3, 1.0] {
            let window = DelayWindow::new(0.0, delta).unwrap();
            let closed =
                range_delay::zzb(protocol, params, window, ErrorProfile::FromParams).unwrap();
            let quad =
                range_delay::zzb_via_quadrature(protocol, params, window, ErrorProfile::FromParams)
                    .unwrap();
            let rel = (quad.mean_square_error - closed.mean_square_error).abs()
                / closed.mean_square_error;
            assert!(rel < 1e-8, "{protocol} delta {delta}: rel {rel}");
        }
    }
}

#[test]
fn snr_match_residual_vanishes_on_grid() {
    let mut rng = TrialRng::for_trial(4242, 0);
    for _ in 0..1000 {
        let n_b = 1e-3 + 0.099 * rng.next_f64();
        // keep n_b * m_prime >= 1
        let m_prime = (2.0 / n_b) * (1e7 * n_b / 2.0).powf(rng.next_f64());
        let kappa = 1e-4 + (1.0 - 2e-4) * rng.next_f64();
        let residual = integration_time::snr_match_residual(m_prime, n_b, kappa).unwrap();
        let magnitude = (1.0 - kappa) + kappa * m_prime / n_b;
        assert!(
            residual.abs() / magnitude <= 1e-12,
            "residual {residual} vs magnitude {magnitude} at m'={m_prime}, n_b={n_b}, kappa={kappa}"
        );
    }
}

#[test]
fn time_and_mode_formulations_agree() {
    let mut rng = TrialRng::for_trial(5, 0);
    for _ in 0..300 {
        let t1 = 10f64.powf(-3.0 + 6.0 * rng.next_f64());
        let bandwidth = 10f64.powf(3.0 + 4.0 * rng.next_f64());
        let n_b = 1e-3 + 0.9 * rng.next_f64();
        if n_b * t1 * bandwidth < 1.0 {
            continue;
        }
        let t2 = integration_time::integration_time_2p(t1, bandwidth, n_b);
        let matched = integration_time::matched_modes(t1 * bandwidth, n_b).unwrap();
        assert!((t2 * bandwidth - matched).abs() / matched < 1e-12);
    }
}

#[test]
fn m_shot_is_power_of_single_shot() {
    for params in random_grid(8, 100) {
        for protocol in Protocol::ALL {
            for m in [1u32, 2, 3, 7, 32] {
                let repeated = detection::m_shot_prob(protocol, params, m, ShotKind::Detection);
                let single = detection::m_shot_prob(protocol, params, 1, ShotKind::Detection);
                let power = single.powi(m as i32);
                let denom = power.max(f64::MIN_POSITIVE);
                assert!((repeated - power).abs() / denom < 1e-12);
            }
        }
    }
}
