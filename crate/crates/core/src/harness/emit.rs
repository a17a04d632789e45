//! CSV and JSON emission.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::to_toml;
use crate::harness::sweep::{SweepResult, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "sweep_axis",
    "sweep_value",
    "variant",
    "design",
    "se_up_mean",
    "se_down_mean",
    "se_sum_mean",
    "se_up_p10",
    "se_down_p10",
    "ee_bits_per_joule_hz",
    "outage_at_targets",
    "resid_si_db_mean",
    "trials",
    "failures",
];

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn csv_record(axis: &str, row: &SweepRow) -> Vec<String> {
    let s = &row.summary;
    let outage = s
        .outage_at_targets
        .iter()
        .map(|o| format!("{}={}", fmt_sig12(o.rate), fmt_sig12(o.probability)))
        .collect::<Vec<_>>()
        .join(";");
    vec![
        axis.to_string(),
        fmt_sig12(row.axis_value),
        row.variant.map(|v| v.to_string()).unwrap_or_default(),
        row.design.to_string(),
        fmt_sig12(s.se_up_mean),
        fmt_sig12(s.se_down_mean),
        fmt_sig12(s.se_sum_mean),
        fmt_sig12(s.se_up_p10),
        fmt_sig12(s.se_down_p10),
        fmt_sig12(s.ee_bits_per_joule_hz),
        outage,
        s.resid_si_db_mean.map(fmt_sig12).unwrap_or_default(),
        s.trials.to_string(),
        s.failures.to_string(),
    ]
}

pub fn to_csv(res: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for row in &res.rows {
        w.write_record(csv_record(res.axis.column_name(), row)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Pretty JSON; per-trial records are kept only when `full` is set.
pub fn to_json(res: &SweepResult, full: bool) -> Result<String> {
    if full {
        return Ok(serde_json::to_string_pretty(res)?);
    }
    let mut slim = res.clone();
    for row in &mut slim.rows {
        row.ensemble.records.clear();
    }
    Ok(serde_json::to_string_pretty(&slim)?)
}

pub fn from_json(text: &str) -> Result<SweepResult> {
    Ok(serde_json::from_str(text)?)
}

/// Path of the resolved-config sidecar written next to `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".config.toml");
    out.with_file_name(name)
}

/// Writes the results and a TOML echo of the resolved configuration.
pub fn emit_results(res: &SweepResult, format: Format, full: bool, out: &Path) -> Result<()> {
    let body = match format {
        Format::Csv => to_csv(res)?,
        Format::Json => to_json(res, full)?,
    };
    std::fs::write(out, body)?;
    std::fs::write(sidecar_path(out), to_toml(&res.config)?)?;
    Ok(())
}
