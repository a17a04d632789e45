//! Scenario configuration: presets, figure recipes and flat TOML overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::beamforming::AnalogNullTarget;
use crate::error::{Error, Result};
use crate::metrics::SiCovarianceForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Mmwave,
    Sub6,
    Variant1,
    Variant2,
    Variant3,
    Variant4,
}

impl Preset {
    pub const ALL: [Preset; 6] =
        [Preset::Mmwave, Preset::Sub6, Preset::Variant1, Preset::Variant2, Preset::Variant3, Preset::Variant4];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Mmwave => "mmwave",
            Preset::Sub6 => "sub6",
            Preset::Variant1 => "variant1",
            Preset::Variant2 => "variant2",
            Preset::Variant3 => "variant3",
            Preset::Variant4 => "variant4",
        }
    }

    /// `(BS antennas per array, ADC power in mW, carrier label)` for the variants.
    fn variant_params(self) -> Option<(usize, f64, &'static str)> {
        match self {
            Preset::Variant1 => Some((32, 250.0, "28 GHz")),
            Preset::Variant2 => Some((64, 400.0, "39 GHz")),
            Preset::Variant3 => Some((64, 450.0, "39 GHz")),
            Preset::Variant4 => Some((128, 550.0, "73 GHz")),
            _ => None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::config("preset", format!("unknown preset `{s}`")))
    }
}

/// One beamforming scheme evaluated at every sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignSpec {
    FullDigital,
    /// Hybrid design; `None` uses the scenario's `n_inner`.
    Hybrid(Option<usize>),
    BeamSteering,
    Svd,
    AngleSearch,
    UpperBound,
}

impl fmt::Display for DesignSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignSpec::FullDigital => f.write_str("full-digital"),
            DesignSpec::Hybrid(None) => f.write_str("hybrid"),
            DesignSpec::Hybrid(Some(n)) => write!(f, "hybrid:{n}"),
            DesignSpec::BeamSteering => f.write_str("beamsteering"),
            DesignSpec::Svd => f.write_str("svd"),
            DesignSpec::AngleSearch => f.write_str("anglesearch"),
            DesignSpec::UpperBound => f.write_str("upper-bound"),
        }
    }
}

impl FromStr for DesignSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("designs", format!("unknown design `{s}`"));
        Ok(match s {
            "full-digital" => DesignSpec::FullDigital,
            "hybrid" => DesignSpec::Hybrid(None),
            "beamsteering" => DesignSpec::BeamSteering,
            "svd" => DesignSpec::Svd,
            "anglesearch" => DesignSpec::AngleSearch,
            "upper-bound" => DesignSpec::UpperBound,
            other => {
                let n = other.strip_prefix("hybrid:").ok_or_else(bad)?;
                let n: usize = n.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(Error::config("designs", "hybrid inner iterations must be >= 1"));
                }
                DesignSpec::Hybrid(Some(n))
            }
        })
    }
}

impl Serialize for DesignSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DesignSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Snr,
    Sir,
    NRf,
    BsAntennas,
}

impl SweepAxis {
    pub fn column_name(self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr_db",
            SweepAxis::Sir => "sir_db",
            SweepAxis::NRf => "n_rf",
            SweepAxis::BsAntennas => "bs_antennas",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Svd,
    Random,
}

/// Fully resolved scenario. Serialized field names are the config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Preset,
    /// Figure recipe the defaults came from, if any.
    pub recipe: Option<String>,
    pub carrier_label: String,
    pub n_ue_antennas: usize,
    pub n_bs_tx: usize,
    pub n_bs_rx: usize,
    pub n_subcarriers: usize,
    /// Channel taps `L`; bounded by the cyclic prefix `K/4`.
    pub n_taps: usize,
    pub n_clusters: usize,
    pub rays_per_cluster: usize,
    pub angular_spread_deg: f64,
    pub pathloss_exponent: f64,
    pub rolloff: f64,
    pub n_rf: usize,
    pub n_rf_ue: Option<usize>,
    pub n_streams: usize,
    pub si_angle_deg: f64,
    pub si_distance_lambda: f64,
    pub rician_kappa_db: f64,
    pub los_tap_zero_only: bool,
    pub snr_db: f64,
    pub sir_db: f64,
    pub sweep: SweepAxis,
    /// Explicit axis values; when empty the range `sweep_start..=sweep_stop` is used.
    pub sweep_values: Vec<f64>,
    pub sweep_start: f64,
    pub sweep_step: f64,
    pub sweep_stop: f64,
    /// Hardware variants evaluated at every axis point; empty means the preset alone.
    pub variants: Vec<Preset>,
    pub designs: Vec<DesignSpec>,
    pub n_outer: usize,
    pub n_inner: usize,
    pub null_target: AnalogNullTarget,
    pub si_covariance: SiCovarianceForm,
    pub init: InitKind,
    pub p_adc_mw: f64,
    pub outage_targets: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; `None` uses available parallelism.
    pub workers: Option<usize>,
}

impl ScenarioConfig {
    pub fn preset(p: Preset) -> Self {
        let mut cfg = ScenarioConfig {
            preset: p,
            recipe: None,
            carrier_label: "28 GHz".into(),
            n_ue_antennas: 4,
            n_bs_tx: 16,
            n_bs_rx: 16,
            n_subcarriers: 16,
            n_taps: 4,
            n_clusters: 4,
            rays_per_cluster: 10,
            angular_spread_deg: 2.0,
            pathloss_exponent: 3.0,
            rolloff: 1.0,
            n_rf: 2,
            n_rf_ue: None,
            n_streams: 2,
            si_angle_deg: 90.0,
            si_distance_lambda: 2.0,
            rician_kappa_db: 5.0,
            los_tap_zero_only: false,
            snr_db: 0.0,
            sir_db: -120.0,
            sweep: SweepAxis::Snr,
            sweep_values: Vec::new(),
            sweep_start: -10.0,
            sweep_step: 5.0,
            sweep_stop: 10.0,
            variants: Vec::new(),
            designs: vec![DesignSpec::Hybrid(None), DesignSpec::FullDigital, DesignSpec::UpperBound],
            n_outer: 10,
            n_inner: 50,
            null_target: AnalogNullTarget::AllSubcarriers,
            si_covariance: SiCovarianceForm::BsPrecoder,
            init: InitKind::Svd,
            p_adc_mw: 250.0,
            outage_targets: vec![2.0, 4.0, 6.0, 8.0],
            trials: 1000,
            seed: 1,
            workers: None,
        };
        match p {
            Preset::Mmwave => {}
            Preset::Sub6 => {
                cfg.carrier_label = "3.5 GHz".into();
                cfg.n_ue_antennas = 2;
                cfg.n_bs_tx = 8;
                cfg.n_bs_rx = 8;
                cfg.n_subcarriers = 32;
                cfg.n_taps = 8;
                cfg.n_clusters = 10;
                cfg.rays_per_cluster = 20;
            }
            _ => cfg.apply_variant(p),
        }
        cfg
    }

    /// Overrides BS array size, ADC power and carrier label with a variant's values.
    pub fn apply_variant(&mut self, p: Preset) {
        if let Some((antennas, adc, label)) = p.variant_params() {
            self.n_bs_tx = antennas;
            self.n_bs_rx = antennas;
            self.p_adc_mw = adc;
            self.carrier_label = label.into();
        }
    }

    pub fn cp_length(&self) -> usize {
        self.n_subcarriers / 4
    }

    pub fn kappa_linear(&self) -> f64 {
        10f64.powf(self.rician_kappa_db / 10.0)
    }

    /// Axis values in sweep order.
    pub fn axis_values(&self) -> Vec<f64> {
        if !self.sweep_values.is_empty() {
            return self.sweep_values.clone();
        }
        let n = ((self.sweep_stop - self.sweep_start) / self.sweep_step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.sweep_start + i as f64 * self.sweep_step).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_ue_antennas", self.n_ue_antennas),
            ("n_bs_tx", self.n_bs_tx),
            ("n_bs_rx", self.n_bs_rx),
            ("n_subcarriers", self.n_subcarriers),
            ("n_taps", self.n_taps),
            ("n_clusters", self.n_clusters),
            ("rays_per_cluster", self.rays_per_cluster),
            ("n_rf", self.n_rf),
            ("n_streams", self.n_streams),
            ("n_outer", self.n_outer),
            ("n_inner", self.n_inner),
            ("trials", self.trials),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::config(key, "must be >= 1"));
            }
        }
        if self.n_taps > self.cp_length() {
            return Err(Error::config(
                "n_taps",
                format!("{} taps exceed the cyclic prefix K/4 = {}", self.n_taps, self.cp_length()),
            ));
        }
        if self.n_streams > self.n_rf {
            return Err(Error::config("n_streams", format!("N_s = {} exceeds N_RF = {}", self.n_streams, self.n_rf)));
        }
        if self.n_streams > self.n_ue_antennas {
            return Err(Error::config("n_streams", "more streams than user antennas"));
        }
        if self.n_rf > self.n_bs_tx.min(self.n_bs_rx) {
            return Err(Error::config("n_rf", "more RF chains than BS antennas"));
        }
        if let Some(n) = self.n_rf_ue {
            if n < self.n_streams.min(self.n_rf) || n > self.n_ue_antennas {
                return Err(Error::config("n_rf_ue", format!("{n} outside [N_s, user antennas]")));
            }
        }
        let finite = [
            ("angular_spread_deg", self.angular_spread_deg),
            ("pathloss_exponent", self.pathloss_exponent),
            ("rolloff", self.rolloff),
            ("si_angle_deg", self.si_angle_deg),
            ("si_distance_lambda", self.si_distance_lambda),
            ("rician_kappa_db", self.rician_kappa_db),
            ("snr_db", self.snr_db),
            ("sir_db", self.sir_db),
            ("p_adc_mw", self.p_adc_mw),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        if self.angular_spread_deg < 0.0 {
            return Err(Error::config("angular_spread_deg", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::config("rolloff", "must lie in [0, 1]"));
        }
        if self.si_distance_lambda <= 0.0 {
            return Err(Error::config("si_distance_lambda", "must be > 0"));
        }
        if self.p_adc_mw <= 0.0 {
            return Err(Error::config("p_adc_mw", "must be > 0"));
        }
        if self.designs.is_empty() {
            return Err(Error::config("designs", "at least one design is required"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be >= 1"));
        }
        if self.outage_targets.iter().any(|r| !r.is_finite()) {
            return Err(Error::config("outage_targets", "must be finite"));
        }
        if self.sweep_values.is_empty() {
            let ok = self.sweep_step > 0.0 && self.sweep_start.is_finite() && self.sweep_stop >= self.sweep_start;
            if !ok {
                return Err(Error::config("sweep_step", "need sweep_step > 0 and sweep_stop >= sweep_start"));
            }
        }
        if self.sweep_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sweep_values", "must be finite"));
        }
        if matches!(self.sweep, SweepAxis::NRf | SweepAxis::BsAntennas) {
            let key = if self.sweep_values.is_empty() { "sweep_start" } else { "sweep_values" };
            for v in self.axis_values() {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(Error::config(key, format!("{v} is not a positive count")));
                }
            }
        }
        Ok(())
    }
}

/// Named figure recipe: a preset plus overrides.
pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    pub preset: Preset,
    pub overrides: &'static str,
}

pub const RECIPES: &[Recipe] = &[
    Recipe {
        name: "fig4",
        description: "SE vs SNR, hybrid (N_inner 10/50), full-digital and upper bound",
        preset: Preset::Mmwave,
        overrides: r#"
sweep = "snr"
sweep_start = -10.0
sweep_step = 2.0
sweep_stop = 10.0
designs = ["hybrid:10", "hybrid:50", "full-digital", "upper-bound"]
"#,
    },
    Recipe {
        name: "fig5",
        description: "SE vs SIR at SNR 0 dB for N_inner 10/50/100",
        preset: Preset::Mmwave,
        overrides: r#"
snr_db = 0.0
sweep = "sir"
sweep_start = -160.0
sweep_step = 20.0
sweep_stop = -40.0
designs = ["hybrid:10", "hybrid:50", "hybrid:100", "full-digital", "upper-bound"]
"#,
    },
    Recipe {
        name: "fig6",
        description: "sum SE vs SNR, proposed vs beam steering, SVD and angle search",
        preset: Preset::Sub6,
        overrides: r#"
sweep = "snr"
sweep_start = -10.0
sweep_step = 5.0
sweep_stop = 10.0
designs = ["hybrid", "beamsteering", "svd", "anglesearch"]
"#,
    },
    Recipe {
        name: "fig7",
        description: "outage at SNR 0 dB with 16 and 64 BS antennas",
        preset: Preset::Mmwave,
        overrides: r#"
snr_db = 0.0
sweep = "bs-antennas"
sweep_values = [16.0, 64.0]
designs = ["hybrid:50", "full-digital", "upper-bound"]
outage_targets = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0]
"#,
    },
    Recipe {
        name: "fig8",
        description: "uplink energy efficiency vs BS RF chains for the four variants",
        preset: Preset::Variant1,
        overrides: r#"
snr_db = 0.0
sweep = "n-rf"
sweep_start = 1.0
sweep_step = 1.0
sweep_stop = 8.0
variants = ["variant1", "variant2", "variant3", "variant4"]
designs = ["hybrid:50"]
"#,
    },
];

pub fn recipe(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::ConfigParse(e.to_string()))
}

/// Resolves a preset or recipe name to its full default configuration.
pub fn base_config(name: &str) -> Result<ScenarioConfig> {
    if let Some(r) = recipe(name) {
        let mut cfg = overlay(ScenarioConfig::preset(r.preset), &parse_table(r.overrides)?)?;
        cfg.recipe = Some(r.name.to_string());
        return Ok(cfg);
    }
    Ok(ScenarioConfig::preset(name.parse()?))
}

fn overlay(base: ScenarioConfig, user: &toml::Table) -> Result<ScenarioConfig> {
    let mut table = toml::Table::try_from(&base).map_err(|e| Error::ConfigParse(e.to_string()))?;
    for (k, v) in user {
        table.insert(k.clone(), v.clone());
    }
    table
        .try_into::<ScenarioConfig>()
        .map_err(|e| Error::ConfigParse(e.to_string()))
}

/// Parses flat TOML text. `preset` selects defaults (a band preset, variant or
/// figure recipe); `preset_override` takes precedence over the file's value.
pub fn parse_config(text: &str, preset_override: Option<&str>) -> Result<ScenarioConfig> {
    let mut user = parse_table(text)?;
    let file_preset = match user.remove("preset") {
        Some(toml::Value::String(s)) => Some(s),
        Some(_) => return Err(Error::config("preset", "must be a string")),
        None => None,
    };
    let name = preset_override.map(str::to_string).or(file_preset).unwrap_or_else(|| "mmwave".into());
    let cfg = overlay(base_config(&name)?, &user)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, preset_override: Option<&str>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, preset_override)
}

/// Flat TOML echo of a resolved configuration; parses back to the same value.
pub fn to_toml(cfg: &ScenarioConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::ConfigParse(e.to_string()))
}
