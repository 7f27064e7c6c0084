//! QNM parameter files: JSON objects (or arrays of them) with keys
//! `label, omega_c_eV, gamma_c_eV, phi0_rad | tan_2phi0, f_amp_re, f_amp_im, notes`.

use std::path::{Path, PathBuf};

use qnm_usc_core::qnm::QnmParams;
use qnm_usc_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Overrides the directory searched for bundled parameter files.
pub const DATA_ENV: &str = "QNM_USC_DATA";

const BUNDLED: [(&str, &str); 3] = [
    ("modes.json", include_str!("../data/modes.json")),
    ("second_modes.json", include_str!("../data/second_modes.json")),
    ("coupling_estimates.json", include_str!("../data/coupling_estimates.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QnmRecord {
    pub label: String,
    #[serde(rename = "omega_c_eV")]
    pub omega_c_ev: f64,
    #[serde(rename = "gamma_c_eV")]
    pub gamma_c_ev: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tan_2phi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_amp_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_amp_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl QnmRecord {
    pub fn to_params(&self) -> Result<QnmParams, CliError> {
        let ctx = |e| CliError::config(format!("QNM `{}`: {e}", self.label));
        let p = match (self.phi0_rad, self.tan_2phi0) {
            (Some(phi0), None) => QnmParams::new(self.label.clone(), self.omega_c_ev, self.gamma_c_ev, phi0),
            (None, Some(t)) => QnmParams::from_tan_2phi0(self.label.clone(), self.omega_c_ev, self.gamma_c_ev, t),
            _ => {
                return Err(CliError::config(format!(
                    "QNM `{}`: exactly one of phi0_rad and tan_2phi0 is required",
                    self.label
                )))
            }
        }
        .map_err(ctx)?;
        Ok(match (self.f_amp_re, self.f_amp_im) {
            (None, None) => p,
            (re, im) => p.with_field(C64::new(re.unwrap_or(0.0), im.unwrap_or(0.0))),
        })
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

/// Row of the coupling-estimate table: which mode, which dipole, and the value
/// printed alongside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingRow {
    pub label: String,
    pub file: String,
    pub d_over_d0: f64,
    pub eta_reported: f64,
}

pub fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_ENV).map(PathBuf::from)
}

/// Resolves `name`: an existing path (relative to `base` when given), then the
/// `QNM_USC_DATA` directory, then the bundled copies.
pub fn read_text(name: &str, base: Option<&Path>) -> Result<(String, String), CliError> {
    let direct = match base {
        Some(b) if Path::new(name).is_relative() => b.join(name),
        _ => PathBuf::from(name),
    };
    if direct.is_file() {
        let text = std::fs::read_to_string(&direct).map_err(|e| CliError::io(&direct, e))?;
        return Ok((text, direct.display().to_string()));
    }
    if let Some(dir) = data_dir() {
        let p = dir.join(name);
        if p.is_file() {
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
            return Ok((text, p.display().to_string()));
        }
    }
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, t)| (t.to_string(), format!("bundled:{n}")))
        .ok_or_else(|| CliError::config(format!("QNM file `{name}` not found")))
}

pub fn parse_records(text: &str, source: &str) -> Result<Vec<QnmRecord>, CliError> {
    let parsed: OneOrMany<QnmRecord> =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("{source}: {e}")))?;
    let records = match parsed {
        OneOrMany::One(r) => vec![r],
        OneOrMany::Many(v) => v,
    };
    if records.is_empty() {
        return Err(CliError::config(format!("{source}: no QNM records")));
    }
    for r in &records {
        r.to_params()?;
    }
    Ok(records)
}

pub fn load_records(name: &str, base: Option<&Path>) -> Result<Vec<QnmRecord>, CliError> {
    let (text, source) = read_text(name, base)?;
    parse_records(&text, &source)
}

/// One record by label, or the only record when `label` is `None`.
pub fn load_record(name: &str, label: Option<&str>, base: Option<&Path>) -> Result<QnmRecord, CliError> {
    let records = load_records(name, base)?;
    match label {
        Some(l) => records
            .into_iter()
            .find(|r| r.label == l)
            .ok_or_else(|| CliError::config(format!("no QNM labelled `{l}` in {name}"))),
        None if records.len() == 1 => Ok(records.into_iter().next().unwrap()),
        None => Err(CliError::config(format!("{name} holds {} modes; set `label`", records.len()))),
    }
}

pub fn load_coupling_rows(name: &str, base: Option<&Path>) -> Result<Vec<CouplingRow>, CliError> {
    let (text, source) = read_text(name, base)?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{source}: {e}")))
}
