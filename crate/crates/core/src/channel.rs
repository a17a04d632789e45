//! Wideband cluster–ray MIMO channels and the full-duplex self-interference channel.
//!
//! Time is measured in units of the signaling interval (`T_s = 1`). Channels are
//! energy-normalized: the ensemble-average tap energy `E[Σ_ℓ ‖H[ℓ]‖_F²]` equals
//! `N_RX · N_TX`, and absolute link budgets enter later through scalar powers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, dft_taps, CMatrix};

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_elements: usize,
    /// Element spacing `d / λ`.
    pub spacing_over_lambda: f64,
}

impl ArrayGeometry {
    pub fn new(n_elements: usize, spacing_over_lambda: f64) -> Result<Self> {
        let g = ArrayGeometry { n_elements, spacing_over_lambda };
        g.validate()?;
        Ok(g)
    }

    pub fn half_wavelength(n_elements: usize) -> Self {
        ArrayGeometry { n_elements, spacing_over_lambda: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 {
            return Err(Error::arg("ArrayGeometry", "n_elements must be >= 1"));
        }
        if !(self.spacing_over_lambda > 0.0) {
            return Err(Error::arg("ArrayGeometry", "spacing_over_lambda must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterRaySpec {
    pub n_clusters: usize,
    pub rays_per_cluster: usize,
    /// Full width of the per-ray angular offset window, degrees.
    pub angular_spread_deg: f64,
    /// Unused by synthesis: absolute pathloss is folded into the SNR axis.
    pub pathloss_exponent: f64,
    pub n_taps: usize,
    /// Raised-cosine roll-off β.
    pub rolloff: f64,
}

impl ClusterRaySpec {
    pub fn validate(&self) -> Result<()> {
        const OP: &str = "ClusterRaySpec";
        if self.n_clusters == 0 || self.rays_per_cluster == 0 || self.n_taps == 0 {
            return Err(Error::arg(OP, "cluster, ray and tap counts must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::arg(OP, format!("rolloff {} outside [0, 1]", self.rolloff)));
        }
        if !(self.angular_spread_deg >= 0.0) {
            return Err(Error::arg(OP, "angular spread must be >= 0"));
        }
        Ok(())
    }

    pub fn n_rays(&self) -> usize {
        self.n_clusters * self.rays_per_cluster
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Absolute angle of arrival (cluster center plus offset), radians.
    pub aoa: f64,
    /// Absolute angle of departure, radians.
    pub aod: f64,
    /// Delay relative to the cluster delay, in symbol intervals.
    pub delay: f64,
    pub gain: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub aoa: f64,
    pub aod: f64,
    pub delay: f64,
    pub rays: Vec<Ray>,
}

impl Cluster {
    /// `Σ |α|²` over the cluster's rays.
    pub fn power(&self) -> f64 {
        self.rays.iter().map(|r| r.gain.norm_sqr()).sum()
    }
}

/// One realization of all per-cluster and per-ray random parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayParams {
    pub clusters: Vec<Cluster>,
}

impl RayParams {
    pub fn n_rays(&self) -> usize {
        self.clusters.iter().map(|c| c.rays.len()).sum()
    }

    /// Cluster indices ordered by decreasing cluster power (ties by index).
    pub fn clusters_by_power(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.clusters.len()).collect();
        idx.sort_by(|&a, &b| {
            self.clusters[b]
                .power()
                .partial_cmp(&self.clusters[a].power())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainChannel {
    pub taps: Vec<CMatrix>,
}

impl TimeDomainChannel {
    pub fn n_rx(&self) -> usize {
        self.taps[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.taps[0].ncols()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_squared()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyChannel {
    pub subcarriers: Vec<CMatrix>,
}

impl FrequencyChannel {
    pub fn n_subcarriers(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn n_rx(&self) -> usize {
        self.subcarriers[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.subcarriers[0].ncols()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.subcarriers.iter().map(|h| h.norm_squared()).collect()
    }

    /// Index of the highest-energy subcarrier; lowest index wins ties.
    pub fn strongest_subcarrier(&self) -> usize {
        argbest(&self.energies(), |a, b| a > b)
    }

    /// Index of the lowest-energy subcarrier; lowest index wins ties.
    pub fn weakest_subcarrier(&self) -> usize {
        argbest(&self.energies(), |a, b| a < b)
    }

    pub fn adjoint(&self) -> FrequencyChannel {
        FrequencyChannel { subcarriers: self.subcarriers.iter().map(|h| h.adjoint()).collect() }
    }
}

fn argbest(vals: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in vals.iter().enumerate().skip(1) {
        if better(v, vals[best]) {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiGeometry {
    /// Angle between the TX and RX array axes, radians.
    pub angle_between_arrays: f64,
    /// Distance between the nearest TX and RX elements, in wavelengths.
    pub distance_over_lambda: f64,
    /// Rician factor κ (linear power ratio LOS : NLOS).
    pub rician_kappa: f64,
    /// Place the LOS term in tap 0 only instead of in every tap.
    pub los_tap_zero_only: bool,
}

impl SiGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_over_lambda > 0.0) {
            return Err(Error::arg("SiGeometry", "distance_over_lambda must be > 0"));
        }
        if !(self.rician_kappa >= 0.0) {
            return Err(Error::arg("SiGeometry", "rician_kappa must be >= 0"));
        }
        Ok(())
    }
}

/// ULA response `(1/√N) [1, e^{j2π(d/λ) sin θ}, …]ᵀ` as an `N × 1` column.
pub fn array_response(geom: &ArrayGeometry, theta: f64) -> CMatrix {
    let n = geom.n_elements;
    let norm = 1.0 / (n as f64).sqrt();
    let step = 2.0 * PI * geom.spacing_over_lambda * theta.sin();
    CMatrix::from_fn(n, 1, |i, _| Complex64::from_polar(norm, step * i as f64))
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Raised-cosine pulse with unit symbol interval.
pub fn raised_cosine(t: f64, rolloff: f64) -> f64 {
    if rolloff == 0.0 {
        return sinc(t);
    }
    let edge = 1.0 / (2.0 * rolloff);
    if ((t.abs() - edge) / edge).abs() < 1e-12 {
        return PI / 4.0 * sinc(edge);
    }
    let denom = 1.0 - (2.0 * rolloff * t).powi(2);
    sinc(t) * (PI * rolloff * t).cos() / denom
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws cluster centers, per-ray offsets, delays and complex gains.
///
/// Centers are uniform on `[0, 2π)`, offsets uniform on `±spread/2`, cluster delays
/// uniform on `[0, L-1]`, ray delays uniform on `[0, 1]`, gains `CN(0, 1)`.
pub fn draw_cluster_rays<R: Rng + ?Sized>(spec: &ClusterRaySpec, rng: &mut R) -> RayParams {
    let half = spec.angular_spread_deg.to_radians() / 2.0;
    let max_delay = spec.n_taps.saturating_sub(1) as f64;
    let offset = |rng: &mut R| if half > 0.0 { rng.random_range(-half..=half) } else { 0.0 };
    let clusters = (0..spec.n_clusters)
        .map(|_| {
            let aoa = rng.random_range(0.0..2.0 * PI);
            let aod = rng.random_range(0.0..2.0 * PI);
            let delay = if max_delay > 0.0 { rng.random_range(0.0..=max_delay) } else { 0.0 };
            let rays = (0..spec.rays_per_cluster)
                .map(|_| {
                    let ra = aoa + offset(rng);
                    let rd = aod + offset(rng);
                    let rdelay = rng.random_range(0.0..=1.0);
                    Ray { aoa: ra, aod: rd, delay: rdelay, gain: complex_gaussian(rng) }
                })
                .collect();
            Cluster { aoa, aod, delay, rays }
        })
        .collect();
    RayParams { clusters }
}

/// `E_τ[Σ_{ℓ<L} p(ℓ - τ)²]` for `τ = τ_c + τ_r`, `τ_c ~ U[0, L-1]`, `τ_r ~ U[0, 1]`.
///
/// Composite Simpson over the trapezoidal density of `τ` on `[0, L]`, with nodes
/// aligned to the integer kinks of the density.
pub fn expected_pulse_energy(n_taps: usize, rolloff: f64) -> f64 {
    let l = n_taps as f64;
    let span = l - 1.0;
    let per_unit = 512;
    let n = per_unit * n_taps;
    let h = l / n as f64;
    let density = |tau: f64| -> f64 {
        if span <= 0.0 {
            return if (0.0..=1.0).contains(&tau) { 1.0 } else { 0.0 };
        }
        let lo = (tau - 1.0).max(0.0);
        let hi = tau.min(span);
        (hi - lo).max(0.0) / span
    };
    let energy = |tau: f64| -> f64 { (0..n_taps).map(|i| raised_cosine(i as f64 - tau, rolloff).powi(2)).sum() };
    let f = |tau: f64| density(tau) * energy(tau);
    let mut acc = f(0.0) + f(l);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// Pathloss normalizer γ making `E[Σ_ℓ ‖H[ℓ]‖_F²] = N_RX · N_TX`.
pub fn normalization_gamma(spec: &ClusterRaySpec) -> f64 {
    spec.n_rays() as f64 * expected_pulse_energy(spec.n_taps, spec.rolloff)
}

/// Builds the tap matrices for a fixed parameter draw.
pub fn channel_from_rays(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    spec: &ClusterRaySpec,
    rays: &RayParams,
) -> TimeDomainChannel {
    let (nr, nt) = (rx.n_elements, tx.n_elements);
    let scale = ((nr * nt) as f64 / normalization_gamma(spec)).sqrt();
    let mut taps = vec![CMatrix::zeros(nr, nt); spec.n_taps];
    for cluster in &rays.clusters {
        for ray in &cluster.rays {
            let outer = array_response(rx, ray.aoa) * array_response(tx, ray.aod).adjoint();
            for (l, tap) in taps.iter_mut().enumerate() {
                let p = raised_cosine(l as f64 - cluster.delay - ray.delay, spec.rolloff);
                if p != 0.0 {
                    *tap += &outer * (ray.gain * (scale * p));
                }
            }
        }
    }
    TimeDomainChannel { taps }
}

pub fn synth_channel_with_rays<R: Rng + ?Sized>(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    spec: &ClusterRaySpec,
    rng: &mut R,
) -> Result<(TimeDomainChannel, RayParams)> {
    tx.validate()?;
    rx.validate()?;
    spec.validate()?;
    let rays = draw_cluster_rays(spec, rng);
    Ok((channel_from_rays(tx, rx, spec, &rays), rays))
}

pub fn synth_channel<R: Rng + ?Sized>(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    spec: &ClusterRaySpec,
    rng: &mut R,
) -> Result<TimeDomainChannel> {
    synth_channel_with_rays(tx, rx, spec, rng).map(|(h, _)| h)
}

/// Element positions (in wavelengths) for the co-located TX/RX arrays.
///
/// The TX array lies on the negative x axis starting at the origin. The RX array
/// starts at `(D, 0)` and extends along direction `(cos ω, sin ω)`, so the nearest
/// elements are `D` apart and the array axes meet at angle ω.
fn si_element_positions(tx: &ArrayGeometry, rx: &ArrayGeometry, geom: &SiGeometry) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let tx_pos = (0..tx.n_elements).map(|q| [-(q as f64) * tx.spacing_over_lambda, 0.0]).collect();
    let (s, c) = geom.angle_between_arrays.sin_cos();
    let rx_pos = (0..rx.n_elements)
        .map(|p| {
            let r = p as f64 * rx.spacing_over_lambda;
            [geom.distance_over_lambda + r * c, r * s]
        })
        .collect();
    (tx_pos, rx_pos)
}

/// Near-field LOS leakage `(1/d) e^{-j2π d/λ}` per element pair, scaled to
/// `‖H_los‖_F² = N_RX · N_TX`. Rows index RX elements.
pub fn si_los_matrix(tx: &ArrayGeometry, rx: &ArrayGeometry, geom: &SiGeometry) -> CMatrix {
    let (tx_pos, rx_pos) = si_element_positions(tx, rx, geom);
    let raw = CMatrix::from_fn(rx.n_elements, tx.n_elements, |p, q| {
        let d = ((rx_pos[p][0] - tx_pos[q][0]).powi(2) + (rx_pos[p][1] - tx_pos[q][1]).powi(2)).sqrt();
        Complex64::from_polar(1.0 / d, -2.0 * PI * d)
    });
    let target = ((rx.n_elements * tx.n_elements) as f64).sqrt();
    &raw * c64(target / raw.norm())
}

/// Combines a LOS matrix with an NLOS draw following the Rician split.
pub fn combine_si(los: &CMatrix, nlos: &TimeDomainChannel, geom: &SiGeometry) -> TimeDomainChannel {
    let k = geom.rician_kappa;
    let (a_los, a_nlos) = if k.is_infinite() { (1.0, 0.0) } else { ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt()) };
    let taps = nlos
        .taps
        .iter()
        .enumerate()
        .map(|(l, h)| {
            let mut tap = h * c64(a_nlos);
            if l == 0 || !geom.los_tap_zero_only {
                tap += los * c64(a_los);
            }
            tap
        })
        .collect();
    TimeDomainChannel { taps }
}

/// Self-interference channel between the BS transmit and receive arrays.
pub fn synth_si_channel<R: Rng + ?Sized>(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    geom: &SiGeometry,
    spec: &ClusterRaySpec,
    rng: &mut R,
) -> Result<TimeDomainChannel> {
    geom.validate()?;
    let nlos = synth_channel(tx, rx, spec, rng)?;
    let los = si_los_matrix(tx, rx, geom);
    Ok(combine_si(&los, &nlos, geom))
}

pub fn to_frequency(td: &TimeDomainChannel, n_subcarriers: usize) -> Result<FrequencyChannel> {
    if n_subcarriers < td.taps.len() {
        return Err(Error::arg(
            "to_frequency",
            format!("{} taps exceed {n_subcarriers} subcarriers", td.taps.len()),
        ));
    }
    let subcarriers = (0..n_subcarriers)
        .map(|k| dft_taps(&td.taps, k, n_subcarriers))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyChannel { subcarriers })
}
