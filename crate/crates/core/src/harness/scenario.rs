//! Channel realizations for one trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::beamforming::{LinkChannels, LinkGeometry};
use crate::channel::{synth_channel_with_rays, synth_si_channel, to_frequency, ArrayGeometry, ClusterRaySpec, SiGeometry};
use crate::error::Result;
use crate::harness::config::ScenarioConfig;

#[derive(Debug, Clone)]
pub struct Realization {
    pub channels: LinkChannels,
    pub geometry: LinkGeometry,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for `(master seed, sweep point, trial)`.
pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point as u64) ^ trial as u64)
}

pub fn trial_rng(master: u64, point: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, point, trial))
}

pub fn ray_spec(cfg: &ScenarioConfig) -> ClusterRaySpec {
    ClusterRaySpec {
        n_clusters: cfg.n_clusters,
        rays_per_cluster: cfg.rays_per_cluster,
        angular_spread_deg: cfg.angular_spread_deg,
        pathloss_exponent: cfg.pathloss_exponent,
        n_taps: cfg.n_taps,
        rolloff: cfg.rolloff,
    }
}

pub fn si_geometry(cfg: &ScenarioConfig) -> SiGeometry {
    SiGeometry {
        angle_between_arrays: cfg.si_angle_deg.to_radians(),
        distance_over_lambda: cfg.si_distance_lambda,
        rician_kappa: cfg.kappa_linear(),
        los_tap_zero_only: cfg.los_tap_zero_only,
    }
}

/// Draws uplink, downlink and SI channels, in that order, from `rng`.
pub fn draw_realization(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<Realization> {
    let ue = ArrayGeometry::half_wavelength(cfg.n_ue_antennas);
    let bs_tx = ArrayGeometry::half_wavelength(cfg.n_bs_tx);
    let bs_rx = ArrayGeometry::half_wavelength(cfg.n_bs_rx);
    let spec = ray_spec(cfg);
    let (up, uplink_rays) = synth_channel_with_rays(&ue, &bs_rx, &spec, rng)?;
    let (down, downlink_rays) = synth_channel_with_rays(&bs_tx, &ue, &spec, rng)?;
    let si = synth_si_channel(&bs_tx, &bs_rx, &si_geometry(cfg), &spec, rng)?;
    let k = cfg.n_subcarriers;
    let channels = LinkChannels { uplink: to_frequency(&up, k)?, downlink: to_frequency(&down, k)?, si: to_frequency(&si, k)? };
    Ok(Realization { channels, geometry: LinkGeometry { ue, bs_tx, bs_rx, uplink_rays, downlink_rays } })
}
