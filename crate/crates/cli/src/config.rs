//! TOML scenario files.
//!
//! ```toml
//! schema_version = 1
//!
//! [[scenario]]
//! name = "fig6"
//! kind = "linewidth_sweep"
//! qnm = { omega_c_eV = 1.0, q = 20.0, phi0_rad = 0.0 }
//! params = { phi0 = [-0.02, 0.0, 0.02], eta_range = { start = 0.01, stop = 0.1, points = 10 } }
//! ```
//!
//! Every key is checked against the schema for its scenario kind before typed
//! parsing, so a bad file reports all offending keys at once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Spectrum,
    LinewidthSweep,
    Purcell,
    Criteria,
    Hopfield,
    Classical,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::LinewidthSweep => "linewidth_sweep",
            Kind::Purcell => "purcell",
            Kind::Criteria => "criteria",
            Kind::Hopfield => "hopfield",
            Kind::Classical => "classical",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Kind::Spectrum, Kind::LinewidthSweep, Kind::Purcell, Kind::Criteria, Kind::Hopfield, Kind::Classical]
            .into_iter()
            .find(|k| k.name() == s)
    }

    /// Keys accepted under `params`.
    fn param_keys(self) -> &'static [&'static str] {
        match self {
            Kind::Spectrum => &[
                "eta", "phi0", "omega0_over_omega_c", "model", "n_fock", "keep", "bath", "spectral", "exponent",
                "zeta", "pump_fraction", "secular", "negative_rates", "grid", "grid_points", "normalize", "lineshape",
            ],
            Kind::LinewidthSweep => &[
                "eta", "eta_range", "phi0", "n_fock", "keep", "bath", "spectral", "exponent", "zeta",
                "pump_fraction", "secular", "negative_rates", "grid_points", "lineshape",
            ],
            Kind::Hopfield => &[
                "eta", "phi0", "n_fock", "n_matter", "keep", "bath", "spectral", "exponent", "zeta",
                "pump_fraction", "pump_target", "secular", "negative_rates", "grid", "grid_points", "normalize",
                "lineshape",
            ],
            Kind::Classical => &["eta", "phi0", "omega0_over_omega_c", "e0", "variants", "grid"],
            Kind::Purcell => &["grid", "g_eV", "d_over_d0"],
            Kind::Criteria => &["coupling_table"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QnmSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, rename = "omega_c_eV", skip_serializing_if = "Option::is_none")]
    pub omega_c_ev: Option<f64>,
    #[serde(default, rename = "gamma_c_eV", skip_serializing_if = "Option::is_none")]
    pub gamma_c_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tan_2phi0: Option<f64>,
}

const QNM_KEYS: &[&str] = &["file", "label", "omega_c_eV", "gamma_c_eV", "q", "phi0_rad", "tan_2phi0"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Lower edge in units of `ω_c`.
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        qnm_usc_core::spectra::linspace(self.start, self.stop, self.points)
    }
}

/// Scalar or list; `phi0 = 0.0` and `phi0 = [0.0, 0.01]` are both accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Union of all kind-specific parameters; which ones are legal is decided by
/// [`Kind::param_keys`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub eta: Option<OneOrMany>,
    pub eta_range: Option<RangeSpec>,
    pub phi0: Option<OneOrMany>,
    pub omega0_over_omega_c: Option<f64>,
    pub model: Option<String>,
    pub n_fock: Option<usize>,
    pub n_matter: Option<usize>,
    pub keep: Option<usize>,
    pub bath: Option<String>,
    pub spectral: Option<String>,
    pub exponent: Option<i32>,
    pub zeta: Option<bool>,
    pub pump_fraction: Option<f64>,
    pub pump_target: Option<String>,
    pub secular: Option<bool>,
    pub negative_rates: Option<String>,
    pub grid: Option<GridSpec>,
    pub grid_points: Option<usize>,
    pub normalize: Option<bool>,
    pub lineshape: Option<String>,
    pub e0: Option<f64>,
    pub variants: Option<Vec<String>>,
    #[serde(rename = "g_eV")]
    pub g_ev: Option<f64>,
    pub d_over_d0: Option<f64>,
    pub coupling_table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    /// Output file stem; defaults to `name`.
    #[serde(default)]
    pub output: Option<String>,
    pub qnm: QnmSpec,
    #[serde(default)]
    pub params: Params,
}

impl Scenario {
    pub fn stem(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: i64,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<Scenario>,
    /// Directory of the config file, for relative QNM file paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn table_keys<'a>(
    v: &'a toml::Value,
    path: &str,
    allowed: &[&str],
    bad: &mut Vec<String>,
) -> Option<&'a toml::map::Map<String, toml::Value>> {
    let t = v.as_table()?;
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            bad.push(format!("{path}{k}"));
        }
    }
    Some(t)
}

/// Every key that the schema does not allow at its position.
fn unknown_keys(root: &toml::Value) -> Vec<String> {
    let mut bad = Vec::new();
    let Some(top) = table_keys(root, "", &["schema_version", "scenario"], &mut bad) else {
        return bad;
    };
    let Some(list) = top.get("scenario").and_then(|s| s.as_array()) else {
        return bad;
    };
    for (i, sc) in list.iter().enumerate() {
        let prefix = format!("scenario[{i}].");
        let Some(t) = table_keys(sc, &prefix, &["name", "kind", "output", "qnm", "params"], &mut bad) else {
            continue;
        };
        if let Some(q) = t.get("qnm") {
            table_keys(q, &format!("{prefix}qnm."), QNM_KEYS, &mut bad);
        }
        let kind = t.get("kind").and_then(|k| k.as_str()).and_then(Kind::parse);
        if let (Some(kind), Some(p)) = (kind, t.get("params")) {
            let pp = format!("{prefix}params.");
            if let Some(pt) = table_keys(p, &pp, kind.param_keys(), &mut bad) {
                if let Some(g) = pt.get("grid") {
                    table_keys(g, &format!("{pp}grid."), &["lo", "hi", "points"], &mut bad);
                }
                if let Some(r) = pt.get("eta_range") {
                    table_keys(r, &format!("{pp}eta_range."), &["start", "stop", "points"], &mut bad);
                }
            }
        }
    }
    bad
}

pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Config, CliError> {
    let root: toml::Value = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    let bad = unknown_keys(&root);
    if !bad.is_empty() {
        return Err(CliError::UnknownKeys(bad));
    }
    let mut cfg: Config = root.try_into().map_err(|e: toml::de::Error| CliError::config(e.to_string()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CliError::config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    let mut names = std::collections::BTreeSet::new();
    for sc in &cfg.scenarios {
        if !names.insert(sc.stem().to_string()) {
            return Err(CliError::config(format!("duplicate output name `{}`", sc.stem())));
        }
    }
    cfg.base_dir = base_dir.map(Path::to_path_buf);
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, path.parent())
}
