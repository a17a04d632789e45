//! Spectral efficiency, energy efficiency and outage statistics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::DigitalBeamformerSet;
use crate::channel::FrequencyChannel;
use crate::error::{Error, Result};
use crate::numerics::{identity, logdet_capacity, CMatrix};

/// Relative diagonal loading applied to the uplink SI-plus-noise covariance.
pub const COVARIANCE_FLOOR: f64 = 1e-12;

/// Linear transmit powers and noise variances.
///
/// `rho_u` and `rho_d` scale each stream on each subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub rho_u: f64,
    pub rho_d: f64,
    pub rho_s: f64,
    pub sigma_u2: f64,
    pub sigma_d2: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl LinkBudget {
    /// Unit noise, per-subcarrier SNR split evenly over `n_streams`, and
    /// `rho_s = rho_u · 10^(-SIR_dB/10)`.
    pub fn from_snr_sir_db(snr_db: f64, sir_db: f64, n_streams: usize) -> Result<Self> {
        if n_streams == 0 {
            return Err(Error::arg("LinkBudget", "n_streams must be >= 1"));
        }
        let rho = db_to_linear(snr_db) / n_streams as f64;
        let budget = LinkBudget { rho_u: rho, rho_d: rho, rho_s: rho * db_to_linear(-sir_db), sigma_u2: 1.0, sigma_d2: 1.0 };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.rho_u, self.rho_d, self.rho_s, self.sigma_u2, self.sigma_d2];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::arg("LinkBudget", format!("powers must be finite and nonnegative: {self:?}")));
        }
        Ok(())
    }
}

/// Which precoder shapes the SI term of the uplink covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiCovarianceForm {
    /// `W_BS* H_s F_BS`: the interference the BS transmit stream actually causes.
    #[default]
    BsPrecoder,
    /// `W_BS* H_s F_UE` as literally printed; only defined when array sizes allow.
    UePrecoder,
}

fn check_len(op: &'static str, beams: usize, ch: &FrequencyChannel) -> Result<()> {
    if beams != ch.n_subcarriers() || beams == 0 {
        return Err(Error::dim(op, format!("{beams} beamformer sets vs {} subcarriers", ch.n_subcarriers())));
    }
    Ok(())
}

fn product(op: &'static str, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::dim(op, format!("{:?} · {:?}", a.shape(), b.shape())));
    }
    Ok(a * b)
}

fn rate(op: &'static str, effective: &CMatrix, cov: &CMatrix, rho: f64) -> Result<f64> {
    logdet_capacity(&effective.adjoint(), cov, rho).map_err(|e| match e {
        Error::Dimension { detail, .. } => Error::dim(op, detail),
        other => other,
    })
}

/// `(1/K) Σ_k log2 det(I + ρ_u Q_u[k]⁻¹ E E*)` with `E = W_BS* H_u F_UE` and
/// `Q_u = ρ_s (W_BS* H_s F)(·)* + σ_u² W_BS* W_BS`.
pub fn uplink_rate(
    beams: &DigitalBeamformerSet,
    h_u: &FrequencyChannel,
    h_s: &FrequencyChannel,
    budget: &LinkBudget,
    form: SiCovarianceForm,
) -> Result<f64> {
    const OP: &str = "uplink_rate";
    budget.validate()?;
    check_len(OP, beams.n_subcarriers(), h_u)?;
    check_len(OP, beams.n_subcarriers(), h_s)?;
    let mut total = 0.0;
    for k in 0..beams.n_subcarriers() {
        let w = &beams.w_bs[k];
        let wh = w.adjoint();
        let e = product(OP, &product(OP, &wh, &h_u.subcarriers[k])?, &beams.f_ue[k])?;
        let f_si = match form {
            SiCovarianceForm::BsPrecoder => &beams.f_bs[k],
            SiCovarianceForm::UePrecoder => &beams.f_ue[k],
        };
        let si = product(OP, &product(OP, &wh, &h_s.subcarriers[k])?, f_si)?;
        let mut q = &si * si.adjoint() * Complex64::new(budget.rho_s, 0.0) + &wh * w * Complex64::new(budget.sigma_u2, 0.0);
        let ns = q.nrows();
        let load = COVARIANCE_FLOOR * q.trace().re / ns as f64;
        q += identity(ns) * Complex64::new(load, 0.0);
        total += rate(OP, &e, &q, budget.rho_u)?;
    }
    Ok(total / beams.n_subcarriers() as f64)
}

/// As [`uplink_rate`] with `Q_d = σ_d² W_UE* W_UE` and `E = W_UE* H_d F_BS`.
pub fn downlink_rate(beams: &DigitalBeamformerSet, h_d: &FrequencyChannel, budget: &LinkBudget) -> Result<f64> {
    const OP: &str = "downlink_rate";
    budget.validate()?;
    check_len(OP, beams.n_subcarriers(), h_d)?;
    let mut total = 0.0;
    for k in 0..beams.n_subcarriers() {
        let wh = beams.w_ue[k].adjoint();
        let e = product(OP, &product(OP, &wh, &h_d.subcarriers[k])?, &beams.f_bs[k])?;
        let q = &wh * &beams.w_ue[k] * Complex64::new(budget.sigma_d2, 0.0);
        total += rate(OP, &e, &q, budget.rho_d)?;
    }
    Ok(total / beams.n_subcarriers() as f64)
}

/// Residual SI after beamforming on each subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSi {
    /// `ρ_s ‖W_BS* H_s F_BS‖_F²`.
    pub power: Vec<f64>,
    /// `power / σ_u²`.
    pub to_noise: Vec<f64>,
}

pub fn residual_si_power(beams: &DigitalBeamformerSet, h_s: &FrequencyChannel, budget: &LinkBudget) -> Result<ResidualSi> {
    const OP: &str = "residual_si_power";
    check_len(OP, beams.n_subcarriers(), h_s)?;
    let mut power = Vec::with_capacity(beams.n_subcarriers());
    for k in 0..beams.n_subcarriers() {
        let r = product(OP, &product(OP, &beams.w_bs[k].adjoint(), &h_s.subcarriers[k])?, &beams.f_bs[k])?;
        power.push(budget.rho_s * r.norm_squared());
    }
    let to_noise = power.iter().map(|p| p / budget.sigma_u2).collect();
    Ok(ResidualSi { power, to_noise })
}

/// Receiver component powers in milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub p_lna: f64,
    pub p_sp: f64,
    pub p_c: f64,
    pub p_ps: f64,
    pub p_m: f64,
    pub p_lo: f64,
    pub p_lpf: f64,
    pub p_bbamp: f64,
    pub p_adc: f64,
}

impl PowerModel {
    pub fn with_adc(p_adc: f64) -> Self {
        PowerModel {
            p_lna: 39.0,
            p_sp: 19.5,
            p_c: 19.5,
            p_ps: 2.0,
            p_m: 16.8,
            p_lo: 5.0,
            p_lpf: 14.0,
            p_bbamp: 5.0,
            p_adc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p_lna, self.p_sp, self.p_c, self.p_ps, self.p_m, self.p_lo, self.p_lpf, self.p_bbamp, self.p_adc];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::arg("PowerModel", format!("component powers must be positive: {self:?}")));
        }
        Ok(())
    }

    /// Mixer, LO, low-pass filter and baseband amplifier of one RF chain.
    pub fn rf_chain(&self) -> f64 {
        self.p_m + self.p_lo + self.p_lpf + self.p_bbamp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    FullDigital,
    Hybrid,
}

/// Receiver power consumption in milliwatts.
pub fn total_power_mw(arch: Architecture, n_rx: usize, n_rf: usize, pm: &PowerModel) -> f64 {
    let n = n_rx as f64;
    let adc = 2.0 * pm.p_adc;
    match arch {
        Architecture::FullDigital => n * (pm.p_lna + pm.rf_chain() + adc),
        Architecture::Hybrid => {
            let l = n_rf as f64;
            n * (pm.p_lna + pm.p_sp + l * pm.p_ps) + l * (pm.rf_chain() + pm.p_c + adc)
        }
    }
}

/// Spectral efficiency divided by receiver power in watts.
pub fn energy_efficiency(se: f64, arch: Architecture, n_rx: usize, n_rf: usize, pm: &PowerModel) -> f64 {
    se / (total_power_mw(arch, n_rx, n_rf, pm) * 1e-3)
}

/// Fraction of samples strictly below `rate`.
pub fn outage_probability(samples: &[f64], rate: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::arg("outage_probability", "empty ensemble"));
    }
    Ok(samples.iter().filter(|&&s| s < rate).count() as f64 / samples.len() as f64)
}

/// Lower empirical ε-quantile: `sorted[⌊ε N⌋]`.
pub fn epsilon_rate(samples: &[f64], epsilon: f64) -> Result<f64> {
    const OP: &str = "epsilon_rate";
    if samples.is_empty() {
        return Err(Error::arg(OP, "empty ensemble"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::arg(OP, format!("epsilon {epsilon} outside (0, 1)")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = ((epsilon * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
    Ok(sorted[idx])
}

/// Coordinates of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCoordinates {
    pub snr_db: f64,
    pub sir_db: f64,
    pub n_rf: usize,
    pub n_bs_antennas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub se_up: f64,
    pub se_down: f64,
    pub se_sum: f64,
    /// Mean over subcarriers of `ρ_s ‖W_BS* H_s F_BS‖_F² / σ_u²`; absent without beamformers.
    pub residual_si_power: Option<f64>,
    pub zf_infeasible: usize,
    pub degenerate_phase_entries: usize,
    /// Error category and message when the design failed; rates are then 0.
    pub failure: Option<String>,
}

impl TrialRecord {
    pub fn failed(trial: usize, err: &Error) -> Self {
        TrialRecord {
            trial,
            se_up: 0.0,
            se_down: 0.0,
            se_sum: 0.0,
            residual_si_power: None,
            zf_infeasible: 0,
            degenerate_phase_entries: 0,
            failure: Some(format!("{}: {err}", err.category().as_str())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub coords: SweepCoordinates,
    pub records: Vec<TrialRecord>,
}

impl EnsembleResult {
    pub fn se_up(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.se_up).collect()
    }

    pub fn se_down(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.se_down).collect()
    }

    pub fn se_sum(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.se_sum).collect()
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failure.is_some()).count()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}
