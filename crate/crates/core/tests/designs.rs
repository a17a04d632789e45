//! Seeded design claims on realistic mmWave channels.

use fdbf_core::beamforming::analog_alternating_projection;
use fdbf_core::harness::config::{DesignSpec, Preset, ScenarioConfig};
use fdbf_core::harness::scenario::{draw_realization, trial_rng, Realization};
use fdbf_core::harness::sweep::{budget, run_design};
use fdbf_core::metrics::{downlink_rate, residual_si_power, uplink_rate};
use fdbf_core::numerics::{dominant_right_singular_vectors, phase_only};

const TRIALS: usize = 12;

fn mmwave(snr_db: f64, sir_db: f64) -> ScenarioConfig {
    ScenarioConfig { snr_db, sir_db, ..ScenarioConfig::preset(Preset::Mmwave) }
}

fn realizations(cfg: &ScenarioConfig, seed: u64) -> Vec<Realization> {
    (0..TRIALS).map(|t| draw_realization(cfg, &mut trial_rng(seed, 0, t)).unwrap()).collect()
}

/// Mean (uplink, downlink) over the realizations.
fn mean_rates(cfg: &ScenarioConfig, design: DesignSpec, reals: &[Realization]) -> (f64, f64) {
    let b = budget(cfg).unwrap();
    let (mut up, mut down) = (0.0, 0.0);
    for r in reals {
        let d = run_design(cfg, design, r, 0).unwrap();
        up += uplink_rate(&d.beams, &r.channels.uplink, &r.channels.si, &b, cfg.si_covariance).unwrap();
        down += downlink_rate(&d.beams, &r.channels.downlink, &b).unwrap();
    }
    (up / reals.len() as f64, down / reals.len() as f64)
}

#[test]
fn full_digital_pushes_si_below_noise() {
    let cfg = mmwave(0.0, -120.0);
    let b = budget(&cfg).unwrap();
    for r in realizations(&cfg, 1) {
        let d = run_design(&cfg, DesignSpec::FullDigital, &r, 0).unwrap();
        let resid = residual_si_power(&d.beams, &r.channels.si, &b).unwrap();
        assert!(resid.to_noise.iter().all(|&x| x < 1.0));
    }
}

#[test]
fn zero_forcing_beats_unconstrained_svd_under_strong_si() {
    let cfg = mmwave(0.0, -120.0);
    let reals = realizations(&cfg, 2);
    let (zf, _) = mean_rates(&cfg, DesignSpec::FullDigital, &reals);
    let (plain, _) = mean_rates(&cfg, DesignSpec::Svd, &reals);
    assert!(zf > plain, "{zf} vs {plain}");
}

#[test]
fn more_inner_iterations_shrink_analog_residual() {
    let cfg = mmwave(0.0, -120.0);
    let r = draw_realization(&cfg, &mut trial_rng(3, 0, 0)).unwrap();
    let ch = &r.channels;
    let k = ch.uplink.strongest_subcarrier();
    let f_rf = phase_only(&dominant_right_singular_vectors(&ch.downlink.subcarriers[0], 2).unwrap()).0;
    let c: Vec<_> = ch.si.subcarriers.iter().map(|h| h * &f_rf).collect();
    let c = c[ch.si.weakest_subcarrier()].clone();
    let a = &ch.uplink.subcarriers[k];
    let resid = |n| {
        let x = analog_alternating_projection(a, &c, 2, n).unwrap().x_rf;
        (x.adjoint() * &c).norm()
    };
    assert!(resid(50) < resid(10));
}

#[test]
fn hybrid_gap_shrinks_with_inner_iterations_and_trails_full_digital() {
    let cfg = mmwave(0.0, -120.0);
    let reals = realizations(&cfg, 4);
    let (up10, down10) = mean_rates(&cfg, DesignSpec::Hybrid(Some(10)), &reals);
    let (up50, down50) = mean_rates(&cfg, DesignSpec::Hybrid(Some(50)), &reals);
    let (_, fd_down) = mean_rates(&cfg, DesignSpec::FullDigital, &reals);
    assert!(down50 - up50 < down10 - up10, "gap {} vs {}", down50 - up50, down10 - up10);
    assert!(down50 < fd_down);
}

#[test]
fn full_digital_tracks_upper_bound() {
    use fdbf_core::beamforming::upper_bound_rate;
    use fdbf_core::metrics::db_to_linear;
    for snr_db in [-10.0, 0.0, 10.0] {
        let cfg = mmwave(snr_db, -120.0);
        let reals = realizations(&cfg, 5);
        let (up, _) = mean_rates(&cfg, DesignSpec::FullDigital, &reals);
        let total = db_to_linear(snr_db) * cfg.n_subcarriers as f64;
        let ub: f64 = reals.iter().map(|r| upper_bound_rate(&r.channels.uplink, total, 2).unwrap()).sum::<f64>()
            / reals.len() as f64;
        assert!(up <= ub + 1e-9);
        assert!(ub - up <= 1.0, "snr {snr_db}: {up} vs {ub}");
    }
}
