//! Seeded Monte Carlo sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    baseline_anglesearch, baseline_beamsteering, baseline_svd, full_digital_design, hybrid_design, upper_bound_rate,
    DigitalBeamformerSet, DigitalDesign, Initialization, SolverConfig,
};
use crate::error::{Error, Result};
use crate::harness::config::{DesignSpec, InitKind, Preset, ScenarioConfig, SweepAxis};
use crate::harness::scenario::{draw_realization, trial_rng, trial_seed, Realization};
use crate::metrics::{
    db_to_linear, downlink_rate, energy_efficiency, epsilon_rate, mean, outage_probability, residual_si_power,
    uplink_rate, Architecture, EnsembleResult, LinkBudget, PowerModel, SweepCoordinates, TrialRecord,
};

/// Floor applied before converting residual SI power to dB.
pub const RESIDUAL_DB_FLOOR: f64 = 1e-30;
/// Outage level used for the `*_p10` columns.
pub const EPSILON: f64 = 0.1;

/// One sweep point: the resolved scenario at an axis value, for one variant.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub axis_index: usize,
    pub axis_value: f64,
    pub variant: Option<Preset>,
    pub cfg: ScenarioConfig,
}

pub fn sweep_points(cfg: &ScenarioConfig) -> Vec<SweepPoint> {
    let variants: Vec<Option<Preset>> =
        if cfg.variants.is_empty() { vec![None] } else { cfg.variants.iter().copied().map(Some).collect() };
    let mut points = Vec::new();
    for variant in variants {
        for (axis_index, &v) in cfg.axis_values().iter().enumerate() {
            let mut c = cfg.clone();
            if let Some(p) = variant {
                c.apply_variant(p);
            }
            match cfg.sweep {
                SweepAxis::Snr => c.snr_db = v,
                SweepAxis::Sir => c.sir_db = v,
                SweepAxis::NRf => {
                    c.n_rf = v as usize;
                    c.n_streams = c.n_streams.min(c.n_rf);
                }
                SweepAxis::BsAntennas => {
                    c.n_bs_tx = v as usize;
                    c.n_bs_rx = v as usize;
                }
            }
            points.push(SweepPoint { axis_index, axis_value: v, variant, cfg: c });
        }
    }
    points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutagePoint {
    pub rate: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSummary {
    pub se_up_mean: f64,
    pub se_down_mean: f64,
    pub se_sum_mean: f64,
    pub se_up_p10: f64,
    pub se_down_p10: f64,
    pub ee_bits_per_joule_hz: f64,
    pub outage_at_targets: Vec<OutagePoint>,
    /// Mean over trials of `10 log10(residual SI / σ_u²)`; absent for the upper bound.
    pub resid_si_db_mean: Option<f64>,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub variant: Option<Preset>,
    pub design: DesignSpec,
    pub summary: RowSummary,
    pub ensemble: EnsembleResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ScenarioConfig,
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

fn architecture(d: DesignSpec) -> Architecture {
    match d {
        DesignSpec::FullDigital | DesignSpec::UpperBound => Architecture::FullDigital,
        _ => Architecture::Hybrid,
    }
}

pub fn solver_config(cfg: &ScenarioConfig, design: DesignSpec, seed: u64) -> SolverConfig {
    let n_inner = match design {
        DesignSpec::Hybrid(Some(n)) => n,
        _ => cfg.n_inner,
    };
    SolverConfig {
        n_outer: cfg.n_outer,
        n_inner,
        n_streams: cfg.n_streams,
        n_rf: cfg.n_rf,
        n_rf_ue: cfg.n_rf_ue,
        init: match cfg.init {
            InitKind::Svd => Initialization::Svd,
            InitKind::Random => Initialization::RandomUnitary { seed },
        },
        null_target: cfg.null_target,
    }
}

pub fn budget(cfg: &ScenarioConfig) -> Result<LinkBudget> {
    LinkBudget::from_snr_sir_db(cfg.snr_db, cfg.sir_db, cfg.n_streams)
}

/// Runs one design on one realization and returns the composed beamformers.
pub fn run_design(cfg: &ScenarioConfig, design: DesignSpec, real: &Realization, seed: u64) -> Result<DigitalDesign> {
    let solver = solver_config(cfg, design, seed);
    let ch = &real.channels;
    match design {
        DesignSpec::FullDigital => full_digital_design(ch, &solver),
        DesignSpec::Hybrid(_) => {
            let h = hybrid_design(ch, &solver)?;
            Ok(DigitalDesign { beams: h.beams.composed, report: h.report })
        }
        DesignSpec::BeamSteering => baseline_beamsteering(ch, &real.geometry, &solver),
        DesignSpec::Svd => baseline_svd(ch, &solver),
        DesignSpec::AngleSearch => baseline_anglesearch(ch, &real.geometry, &solver),
        DesignSpec::UpperBound => Err(Error::arg("run_design", "the upper bound has no beamformers")),
    }
}

fn rates(cfg: &ScenarioConfig, beams: &DigitalBeamformerSet, real: &Realization, b: &LinkBudget) -> Result<(f64, f64, f64)> {
    let ch = &real.channels;
    let up = uplink_rate(beams, &ch.uplink, &ch.si, b, cfg.si_covariance)?;
    let down = downlink_rate(beams, &ch.downlink, b)?;
    let resid = residual_si_power(beams, &ch.si, b)?;
    Ok((up, down, mean(&resid.to_noise)))
}

fn evaluate(cfg: &ScenarioConfig, design: DesignSpec, real: &Realization, seed: u64, trial: usize) -> Result<TrialRecord> {
    let b = budget(cfg)?;
    if design == DesignSpec::UpperBound {
        // bound takes the SNR summed over subcarriers
        let total_snr = db_to_linear(cfg.snr_db) * cfg.n_subcarriers as f64;
        let up = upper_bound_rate(&real.channels.uplink, total_snr, cfg.n_streams)?;
        let down = upper_bound_rate(&real.channels.downlink, total_snr, cfg.n_streams)?;
        return Ok(TrialRecord {
            trial,
            se_up: up,
            se_down: down,
            se_sum: up + down,
            residual_si_power: None,
            zf_infeasible: 0,
            degenerate_phase_entries: 0,
            failure: None,
        });
    }
    let d = run_design(cfg, design, real, seed)?;
    let (up, down, resid) = rates(cfg, &d.beams, real, &b)?;
    Ok(TrialRecord {
        trial,
        se_up: up,
        se_down: down,
        se_sum: up + down,
        residual_si_power: Some(resid),
        zf_infeasible: d.report.zf_infeasible,
        degenerate_phase_entries: d.report.degenerate_phase_entries,
        failure: None,
    })
}

fn run_trial(point: &SweepPoint, master: u64, trial: usize) -> Vec<TrialRecord> {
    let cfg = &point.cfg;
    let mut rng = trial_rng(master, point.axis_index, trial);
    let real = match draw_realization(cfg, &mut rng) {
        Ok(r) => r,
        Err(e) => return cfg.designs.iter().map(|_| TrialRecord::failed(trial, &e)).collect(),
    };
    let design_seed = trial_seed(master ^ 0xD1B5_4A32_D192_ED03, point.axis_index, trial);
    cfg.designs
        .iter()
        .map(|&d| evaluate(cfg, d, &real, design_seed, trial).unwrap_or_else(|e| TrialRecord::failed(trial, &e)))
        .collect()
}

pub fn summarize(cfg: &ScenarioConfig, design: DesignSpec, ensemble: &EnsembleResult) -> Result<RowSummary> {
    let up = ensemble.se_up();
    let down = ensemble.se_down();
    let trials = ensemble.records.len();
    let (se_up_p10, se_down_p10) =
        if trials == 0 { (0.0, 0.0) } else { (epsilon_rate(&up, EPSILON)?, epsilon_rate(&down, EPSILON)?) };
    let outage_at_targets = cfg
        .outage_targets
        .iter()
        .map(|&rate| {
            let probability = if trials == 0 { 0.0 } else { outage_probability(&up, rate)? };
            Ok(OutagePoint { rate, probability })
        })
        .collect::<Result<Vec<_>>>()?;
    let resid_db: Vec<f64> = ensemble
        .records
        .iter()
        .filter_map(|r| r.residual_si_power)
        .map(|p| 10.0 * p.max(RESIDUAL_DB_FLOOR).log10())
        .collect();
    let se_up_mean = mean(&up);
    let pm = PowerModel::with_adc(cfg.p_adc_mw);
    Ok(RowSummary {
        se_up_mean,
        se_down_mean: mean(&down),
        se_sum_mean: mean(&ensemble.se_sum()),
        se_up_p10,
        se_down_p10,
        ee_bits_per_joule_hz: energy_efficiency(se_up_mean, architecture(design), cfg.n_bs_rx, cfg.n_rf, &pm),
        outage_at_targets,
        resid_si_db_mean: if resid_db.is_empty() { None } else { Some(mean(&resid_db)) },
        trials,
        failures: ensemble.failures(),
    })
}

fn run_point(point: &SweepPoint, master: u64) -> Result<Vec<SweepRow>> {
    let cfg = &point.cfg;
    let per_trial: Vec<Vec<TrialRecord>> = (0..cfg.trials).into_par_iter().map(|t| run_trial(point, master, t)).collect();
    let coords = SweepCoordinates { snr_db: cfg.snr_db, sir_db: cfg.sir_db, n_rf: cfg.n_rf, n_bs_antennas: cfg.n_bs_rx };
    cfg.designs
        .iter()
        .enumerate()
        .map(|(j, &design)| {
            let ensemble = EnsembleResult { coords, records: per_trial.iter().map(|recs| recs[j].clone()).collect() };
            let summary = summarize(cfg, design, &ensemble)?;
            Ok(SweepRow { axis_value: point.axis_value, variant: point.variant, design, summary, ensemble })
        })
        .collect()
}

/// Executes every (variant × axis point × design) cell. Output depends only on `cfg`.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let work = || -> Result<Vec<SweepRow>> {
        let mut rows = Vec::new();
        for point in sweep_points(cfg) {
            rows.extend(run_point(&point, cfg.seed)?);
        }
        Ok(rows)
    };
    let rows = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(SweepResult { config: cfg.clone(), axis: cfg.sweep, rows })
}
