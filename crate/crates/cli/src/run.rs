//! Scenario execution.

use std::path::Path;

use qnm_usc_core::fit::{local_maxima, LineShape};
use qnm_usc_core::liouvillian::{BathCoupling, NegativeRatePolicy, PumpModel, PumpTarget};
use qnm_usc_core::perturbative::{bs_linewidths, symmetric_phase};
use qnm_usc_core::qnm::{
    broadband_threshold, dipole_coupling_from_field, eta_from_field, eta_max_first_order, free_space_rate_ev,
    lorentzian_norm, purcell_rate_single, zeta_factor, QnmParams,
};
use qnm_usc_core::simulation::{
    hopfield_window, polariton_window, Gauge, Model, SpectralSpec, SpectrumScenario,
};
use qnm_usc_core::spectra::{
    classical_spectrum, default_grid, linspace, shape_rms, ClassicalVariant, SpectrumResult, DEFAULT_GRID_POINTS,
};
use qnm_usc_core::units::D0;
use qnm_usc_core::{Warning, C64};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{GridSpec, Kind, Params, QnmSpec, Scenario};
use crate::data::{load_coupling_rows, load_record, load_records, QnmRecord};
use crate::error::{CliError, Context};
use crate::output::{to_json, Artifact, Cell, Table};

/// Command-line overrides applied on top of every scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub n_fock: Option<usize>,
    pub keep: Option<usize>,
    pub secular: bool,
    #[serde(serialize_with = "ser_policy")]
    pub policy: Option<NegativeRatePolicy>,
}

fn ser_policy<S: serde::Serializer>(p: &Option<NegativeRatePolicy>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.serialize_str(policy_name(*p)),
        None => s.serialize_none(),
    }
}

pub const SWEEP_AXES: [&str; 5] = ["eta", "phi0", "omega0_over_omega_c", "pump_fraction", "q"];

fn policy_name(p: NegativeRatePolicy) -> &'static str {
    match p {
        NegativeRatePolicy::Reject => "reject",
        NegativeRatePolicy::ClampZero => "clamp",
        NegativeRatePolicy::Allow => "allow",
    }
}

fn parse_policy(s: &str) -> Result<NegativeRatePolicy, CliError> {
    match s {
        "reject" => Ok(NegativeRatePolicy::Reject),
        "clamp" => Ok(NegativeRatePolicy::ClampZero),
        "allow" => Ok(NegativeRatePolicy::Allow),
        _ => Err(CliError::config(format!("negative_rates must be reject, clamp or allow (got `{s}`)"))),
    }
}

fn parse_bath(s: &str) -> Result<BathCoupling, CliError> {
    BathCoupling::ALL
        .into_iter()
        .find(|b| b.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| CliError::config(format!("bath must be one of a, Q, P, Q+P, Q-P (got `{s}`)")))
}

fn parse_lineshape(s: &str) -> Result<LineShape, CliError> {
    match s {
        "dispersive" => Ok(LineShape::Dispersive),
        "absorptive" => Ok(LineShape::Absorptive),
        _ => Err(CliError::config(format!("lineshape must be dispersive or absorptive (got `{s}`)"))),
    }
}

fn parse_variant(s: &str) -> Result<ClassicalVariant, CliError> {
    [ClassicalVariant::Bare, ClassicalVariant::Qnm, ClassicalVariant::QnmNegFreq]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| CliError::config(format!("classical variant must be bare, qnm or qnm_negfreq (got `{s}`)")))
}

/// Resolves a scenario's `qnm` table to parameters plus the record echoed into metadata.
pub fn resolve_qnm(spec: &QnmSpec, base: Option<&Path>) -> Result<(QnmParams, QnmRecord), CliError> {
    let inline = spec.omega_c_ev.is_some()
        || spec.gamma_c_ev.is_some()
        || spec.q.is_some()
        || spec.phi0_rad.is_some()
        || spec.tan_2phi0.is_some();
    let record = match (&spec.file, inline) {
        (Some(file), false) => load_record(file, spec.label.as_deref(), base)?,
        (None, true) => {
            let omega_c = spec.omega_c_ev.ok_or_else(|| CliError::config("inline qnm needs omega_c_eV"))?;
            let gamma_c = match (spec.gamma_c_ev, spec.q) {
                (Some(g), None) => g,
                (None, Some(q)) if q > 0.0 => omega_c / (2.0 * q),
                (None, Some(q)) => return Err(CliError::config(format!("q = {q} must be positive"))),
                _ => return Err(CliError::config("inline qnm needs exactly one of gamma_c_eV and q")),
            };
            QnmRecord {
                label: spec.label.clone().unwrap_or_else(|| "inline".into()),
                omega_c_ev: omega_c,
                gamma_c_ev: gamma_c,
                phi0_rad: spec.phi0_rad,
                tan_2phi0: spec.tan_2phi0,
                f_amp_re: None,
                f_amp_im: None,
                notes: None,
            }
        }
        _ => return Err(CliError::config("qnm needs either `file` (with optional `label`) or inline parameters")),
    };
    Ok((record.to_params()?, record))
}

/// Fully resolved master-equation spectrum settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSettings {
    pub model: String,
    /// `|η_c|` (or `|λ_c|` for the Hopfield model); its phase is the QNM phase.
    pub eta: f64,
    pub phi0: f64,
    pub q: f64,
    pub omega0_over_omega_c: f64,
    pub n_fock: usize,
    pub n_matter: usize,
    pub keep: usize,
    pub bath: String,
    pub spectral: String,
    pub exponent: Option<i32>,
    pub zeta: Option<bool>,
    pub pump_fraction: f64,
    pub pump_target: String,
    pub secular: bool,
    pub negative_rates: String,
    /// `None`: the default window for the point, recomputed per sweep value.
    pub grid: Option<GridSpec>,
    pub grid_points: usize,
    pub normalize: bool,
    pub lineshape: String,
}

fn single(name: &str, v: &Option<crate::config::OneOrMany>) -> Result<Option<f64>, CliError> {
    match v.as_ref().map(|x| x.values()) {
        None => Ok(None),
        Some(vals) if vals.len() == 1 => Ok(Some(vals[0])),
        Some(_) => Err(CliError::config(format!("`{name}` takes a single value for this scenario kind"))),
    }
}

impl SpectrumSettings {
    pub fn resolve(kind: Kind, params: &Params, p: &QnmParams, ov: &Overrides) -> Result<Self, CliError> {
        let hop = kind == Kind::Hopfield;
        let model = if hop { "hopfield".to_string() } else { params.model.clone().unwrap_or_else(|| "tls".into()) };
        let default_scenario = match model.as_str() {
            "tls" | "tls_dipole" => SpectrumScenario::tls(p.clone(), C64::new(0.0, 0.0)),
            "hopfield" => SpectrumScenario::hopfield(p.clone(), C64::new(0.0, 0.0)),
            "empty" => SpectrumScenario::empty_cavity(p.clone()),
            other => {
                return Err(CliError::config(format!("model must be tls, tls_dipole or empty (got `{other}`)")))
            }
        };
        let eta = single("eta", &params.eta)?.unwrap_or(0.0);
        let spectral = params.spectral.clone().unwrap_or_else(|| "ab_initio".into());
        let s = Self {
            model,
            eta,
            phi0: single("phi0", &params.phi0)?.unwrap_or(p.phi0()),
            q: p.quality(),
            omega0_over_omega_c: params.omega0_over_omega_c.unwrap_or(1.0),
            n_fock: ov.n_fock.or(params.n_fock).unwrap_or(default_scenario.n_fock),
            n_matter: ov.n_fock.or(params.n_matter).unwrap_or(default_scenario.n_matter),
            keep: ov.keep.or(params.keep).unwrap_or(default_scenario.keep),
            bath: params.bath.clone().unwrap_or_else(|| "a".into()),
            exponent: (spectral == "power_law").then(|| params.exponent.unwrap_or(-1)),
            zeta: (spectral == "power_law").then(|| params.zeta.unwrap_or(true)),
            spectral,
            pump_fraction: params.pump_fraction.unwrap_or(1e-4),
            pump_target: params.pump_target.clone().unwrap_or_else(|| "cavity".into()),
            secular: ov.secular || params.secular.unwrap_or(false),
            negative_rates: match ov.policy {
                Some(pol) => policy_name(pol).into(),
                None => params.negative_rates.clone().unwrap_or_else(|| "reject".into()),
            },
            grid: params.grid,
            grid_points: params.grid_points.unwrap_or(DEFAULT_GRID_POINTS),
            normalize: params.normalize.unwrap_or(true),
            lineshape: params.lineshape.clone().unwrap_or_else(|| "dispersive".into()),
        };
        // Fail early on every enumerated option.
        s.scenario(p)?;
        parse_lineshape(&s.lineshape)?;
        if let Some(g) = s.grid {
            check_grid(&g)?;
        }
        Ok(s)
    }

    fn qnm(&self, base: &QnmParams) -> Result<QnmParams, CliError> {
        QnmParams::from_quality(base.label.clone(), base.omega_c(), self.q, self.phi0)
            .context(|| "sweep value".into())
    }

    pub fn scenario(&self, base: &QnmParams) -> Result<SpectrumScenario, CliError> {
        let p = self.qnm(base)?;
        let eta = C64::from_polar(self.eta, p.phi0());
        let mut sc = match self.model.as_str() {
            "tls" => SpectrumScenario::tls(p.clone(), eta),
            "tls_dipole" => SpectrumScenario { model: Model::Tls(Gauge::Dipole), ..SpectrumScenario::tls(p.clone(), eta) },
            "hopfield" => SpectrumScenario::hopfield(p.clone(), eta),
            "empty" => SpectrumScenario { eta, ..SpectrumScenario::empty_cavity(p.clone()) },
            other => return Err(CliError::config(format!("unknown model `{other}`"))),
        };
        if !(self.omega0_over_omega_c > 0.0) {
            return Err(CliError::config("omega0_over_omega_c must be positive"));
        }
        if !(self.pump_fraction >= 0.0) {
            return Err(CliError::config("pump_fraction must be non-negative"));
        }
        sc.omega0 = self.omega0_over_omega_c * p.omega_c();
        sc.n_fock = self.n_fock;
        sc.n_matter = self.n_matter;
        sc.keep = self.keep;
        sc.bath = parse_bath(&self.bath)?;
        sc.spectral = match self.spectral.as_str() {
            "ab_initio" => SpectralSpec::AbInitio,
            "flat" => SpectralSpec::Flat,
            "power_law" => SpectralSpec::PowerLaw {
                exponent: self.exponent.unwrap_or(-1),
                zeta: self.zeta.unwrap_or(true),
            },
            other => {
                return Err(CliError::config(format!("spectral must be ab_initio, flat or power_law (got `{other}`)")))
            }
        };
        sc.pump = match self.pump_target.as_str() {
            "cavity" => PumpModel::cavity(self.pump_fraction),
            "matter" => PumpModel { target: PumpTarget::Matter, fraction: self.pump_fraction },
            other => return Err(CliError::config(format!("pump_target must be cavity or matter (got `{other}`)"))),
        };
        sc.secular = self.secular;
        sc.policy = parse_policy(&self.negative_rates)?;
        Ok(sc)
    }

    /// Frequency grid in eV.
    pub fn grid(&self, base: &QnmParams) -> Result<Vec<f64>, CliError> {
        let p = self.qnm(base)?;
        Ok(match self.grid {
            Some(g) => linspace(g.lo * p.omega_c(), g.hi * p.omega_c(), g.points),
            None if self.model == "hopfield" => {
                let (lo, hi) = hopfield_window(&p, self.eta);
                linspace(lo, hi, self.grid_points)
            }
            None => default_grid(&p, self.eta, self.grid_points),
        })
    }

    pub fn apply_axis(&mut self, axis: &str, value: f64) -> Result<(), CliError> {
        match axis {
            "eta" => self.eta = value,
            "phi0" => self.phi0 = value,
            "omega0_over_omega_c" => self.omega0_over_omega_c = value,
            "pump_fraction" => self.pump_fraction = value,
            "q" => self.q = value,
            _ => {
                return Err(CliError::config(format!(
                    "`{axis}` is not a sweepable axis (use one of {})",
                    SWEEP_AXES.join(", ")
                )))
            }
        }
        Ok(())
    }
}

fn check_grid(g: &GridSpec) -> Result<(), CliError> {
    if !(g.lo > 0.0 && g.hi > g.lo && g.points >= 2) {
        return Err(CliError::config(format!(
            "grid needs 0 < lo < hi and at least 2 points (got lo = {}, hi = {}, points = {})",
            g.lo, g.hi, g.points
        )));
    }
    Ok(())
}

/// Collects warnings once each, in order of first appearance. Only the
/// top-level log echoes them to the logger; per-point logs are merged into it.
#[derive(Debug, Default, Clone)]
pub struct WarningLog(Vec<String>, bool);

impl WarningLog {
    fn quiet() -> Self {
        Self(Vec::new(), true)
    }

    pub fn add(&mut self, w: impl ToString) {
        let s = w.to_string();
        if !self.0.contains(&s) {
            if !self.1 {
                log::warn!("{s}");
            }
            self.0.push(s);
        }
    }

    pub fn extend(&mut self, ws: &[Warning]) {
        for w in ws {
            self.add(w);
        }
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

/// Spectrum on `grid` with the frequency solves spread over the current rayon pool.
pub fn compute_spectrum(sc: &SpectrumScenario, grid: &[f64]) -> Result<SpectrumResult, CliError> {
    let ctx = || "spectrum".to_string();
    let prep = sc.prepare().context(ctx)?;
    let values = grid
        .par_iter()
        .map(|&w| prep.solver.evaluate(w))
        .collect::<Result<Vec<f64>, _>>()
        .context(ctx)?;
    prep.finish(grid.to_vec(), values).context(ctx)
}

#[derive(Debug, Clone, Serialize)]
pub struct PointError {
    pub index: usize,
    pub point: serde_json::Value,
    pub kind: &'static str,
    pub message: String,
}

impl PointError {
    fn new(index: usize, point: serde_json::Value, e: &CliError) -> Self {
        Self { index, point, kind: e.kind(), message: e.to_string() }
    }
}

/// Summary of one spectrum: global peak and the two-peak fit.
#[derive(Debug, Clone, Copy)]
struct PeakSummary {
    peak: f64,
    omega_minus: f64,
    omega_plus: f64,
    gamma_minus: f64,
    gamma_plus: f64,
    rms: f64,
}

fn summarize(
    s: &SpectrumResult,
    p: &QnmParams,
    settings: &SpectrumSettings,
    warnings: &mut WarningLog,
) -> Result<PeakSummary, CliError> {
    let shape = parse_lineshape(&settings.lineshape)?;
    let window = if settings.model == "hopfield" {
        hopfield_window(p, settings.eta)
    } else {
        polariton_window(p, settings.eta)
    };
    let fit = qnm_usc_core::fit::fit_two_peaks(&s.omega, &s.values, Some(window), shape);
    let nan = f64::NAN;
    let (wc, k) = (p.omega_c(), p.kappa());
    Ok(match fit {
        Ok(f) => PeakSummary {
            peak: s.peak_omega() / wc,
            omega_minus: f.omega_minus / wc,
            omega_plus: f.omega_plus / wc,
            gamma_minus: f.gamma_minus / k,
            gamma_plus: f.gamma_plus / k,
            rms: f.residual_rms,
        },
        Err(e) => {
            warnings.add(format!("two-peak fit skipped: {e}"));
            PeakSummary {
                peak: s.peak_omega() / wc,
                omega_minus: nan,
                omega_plus: nan,
                gamma_minus: nan,
                gamma_plus: nan,
                rms: nan,
            }
        }
    })
}

fn base_meta(sc: &Scenario, record: &QnmRecord, ov: &Overrides) -> serde_json::Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": sc.name,
        "kind": sc.kind.name(),
        "qnm": record,
        "overrides": ov,
    })
}

fn insert(meta: &mut serde_json::Value, key: &str, v: serde_json::Value) {
    if let Some(o) = meta.as_object_mut() {
        o.insert(key.into(), v);
    }
}

pub struct RunContext<'a> {
    pub base_dir: Option<&'a Path>,
    pub overrides: Overrides,
}

pub fn run_scenario(sc: &Scenario, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
    if sc.kind == Kind::Criteria {
        return run_criteria(sc, ctx);
    }
    let (p, record) = resolve_qnm(&sc.qnm, ctx.base_dir)?;
    let mut meta = base_meta(sc, &record, &ctx.overrides);
    let mut warnings = WarningLog::default();
    let table = match sc.kind {
        Kind::Spectrum => run_spectrum(sc, &p, ctx, &mut meta, &mut warnings)?,
        Kind::LinewidthSweep => run_linewidths(sc, &p, ctx, &mut meta, &mut warnings)?,
        Kind::Hopfield => run_hopfield(sc, &p, ctx, &mut meta, &mut warnings)?,
        Kind::Classical => run_classical(sc, &p, &mut meta, &mut warnings)?,
        Kind::Purcell => run_purcell(sc, &p, &mut meta)?,
        Kind::Criteria => unreachable!(),
    };
    insert(&mut meta, "warnings", to_json(&warnings.into_inner()));
    Ok(vec![Artifact { stem: sc.stem().to_string(), table, meta }])
}

/// Checks a scenario without computing anything heavy.
pub fn validate_scenario(sc: &Scenario, ctx: &RunContext) -> Result<(), CliError> {
    if sc.kind == Kind::Criteria {
        if let Some(t) = &sc.params.coupling_table {
            load_coupling_rows(t, ctx.base_dir)?;
        }
        criteria_records(sc, ctx.base_dir)?;
        return Ok(());
    }
    let (p, _) = resolve_qnm(&sc.qnm, ctx.base_dir)?;
    match sc.kind {
        Kind::Spectrum | Kind::Hopfield => {
            SpectrumSettings::resolve(sc.kind, &sc.params, &p, &ctx.overrides)?;
        }
        Kind::LinewidthSweep => {
            linewidth_axes(&sc.params)?;
            let mut params = sc.params.clone();
            params.eta = None;
            params.phi0 = None;
            SpectrumSettings::resolve(sc.kind, &params, &p, &ctx.overrides)?;
        }
        Kind::Classical => {
            classical_settings(&sc.params, &p)?;
        }
        Kind::Purcell => {
            purcell_grid(&sc.params, &p)?;
        }
        Kind::Criteria => unreachable!(),
    }
    Ok(())
}

fn run_spectrum(
    sc: &Scenario,
    p: &QnmParams,
    ctx: &RunContext,
    meta: &mut serde_json::Value,
    warnings: &mut WarningLog,
) -> Result<Table, CliError> {
    let settings = SpectrumSettings::resolve(sc.kind, &sc.params, p, &ctx.overrides)?;
    let scenario = settings.scenario(p)?;
    let grid = settings.grid(p)?;
    let s = compute_spectrum(&scenario, &grid)?;
    warnings.extend(&s.warnings);
    let q = settings.qnm(p)?;
    let summary = summarize(&s, &q, &settings, warnings)?;
    let shown = if settings.normalize { s.peak_normalized().context(|| "normalize".into())? } else { s.clone() };
    let col = if settings.normalize { "S_normalized" } else { "S_raw" };
    let mut t = Table::new(&["omega_over_omega_c", "omega_eV", col]);
    for (w, v) in shown.omega.iter().zip(&shown.values) {
        t.push(vec![(w / q.omega_c()).into(), (*w).into(), (*v).into()]);
    }
    insert(meta, "params", to_json(&settings));
    insert(meta, "fock_convergence", fock_meta(&scenario, warnings)?);
    insert(meta, "summary", summary_json(&summary));
    Ok(t)
}

/// Level shift under doubled truncation, relative to `ω_c`, above which a warning is raised.
const FOCK_WARN: f64 = 1e-3;

fn fock_meta(sc: &SpectrumScenario, warnings: &mut WarningLog) -> Result<serde_json::Value, CliError> {
    let d = sc.fock_convergence().context(|| "fock convergence".into())?;
    if d > FOCK_WARN * sc.qnm.omega_c() {
        warnings.add(format!(
            "kept dressed levels move by {d:.3e} eV when the truncation is doubled; raise n_fock or lower keep"
        ));
    }
    Ok(json!({ "n_fock": sc.n_fock, "n_matter": sc.n_matter, "doubled_max_level_shift_eV": d }))
}

fn summary_json(s: &PeakSummary) -> serde_json::Value {
    let f = |v: f64| if v.is_finite() { json!(v) } else { serde_json::Value::Null };
    json!({
        "peak_omega_over_omega_c": f(s.peak),
        "omega_minus_over_omega_c": f(s.omega_minus),
        "omega_plus_over_omega_c": f(s.omega_plus),
        "Gamma_minus_over_kappa": f(s.gamma_minus),
        "Gamma_plus_over_kappa": f(s.gamma_plus),
        "fit_residual_rms": f(s.rms),
    })
}

/// `(phi0 values, eta values)` of a linewidth sweep.
fn linewidth_axes(params: &Params) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let phis = params.phi0.as_ref().map(|v| v.values()).unwrap_or_else(|| vec![0.0]);
    let etas = match (&params.eta, &params.eta_range) {
        (Some(e), None) => e.values(),
        (None, Some(r)) => r.values(),
        _ => return Err(CliError::config("linewidth_sweep needs exactly one of `eta` and `eta_range`")),
    };
    let (phis, mut w1) = sorted_unique(&phis);
    let (etas, w2) = sorted_unique(&etas);
    w1.extend(w2);
    for w in w1 {
        log::warn!("{w}");
    }
    if etas.is_empty() {
        return Err(CliError::config("linewidth_sweep has no eta values"));
    }
    Ok((phis, etas))
}

/// Sorted, deduplicated copy plus a warning when anything changed.
pub fn sorted_unique(values: &[f64]) -> (Vec<f64>, Vec<String>) {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut w = Vec::new();
    if v.as_slice() != values {
        w.push(format!("axis values sorted and deduplicated ({} given, {} kept)", values.len(), v.len()));
    }
    (v, w)
}

fn run_linewidths(
    sc: &Scenario,
    p: &QnmParams,
    ctx: &RunContext,
    meta: &mut serde_json::Value,
    warnings: &mut WarningLog,
) -> Result<Table, CliError> {
    let (phis, etas) = linewidth_axes(&sc.params)?;
    let mut params = sc.params.clone();
    params.eta = None;
    params.phi0 = None;
    let base = SpectrumSettings::resolve(sc.kind, &params, p, &ctx.overrides)?;
    let points: Vec<(f64, f64)> = phis.iter().flat_map(|&phi| etas.iter().map(move |&eta| (phi, eta))).collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(phi0, eta)| {
            let mut s = base.clone();
            s.phi0 = phi0;
            s.eta = eta;
            let mut w = WarningLog::quiet();
            let r = (|| {
                let q = s.qnm(p)?;
                let spec = compute_spectrum(&s.scenario(p)?, &s.grid(p)?)?;
                w.extend(&spec.warnings);
                Ok::<_, CliError>((q.clone(), summarize(&spec, &q, &s, &mut w)?))
            })();
            (r, w)
        })
        .collect();
    let mut t = Table::new(&[
        "phi0_rad",
        "eta",
        "Gamma_minus_over_kappa",
        "Gamma_plus_over_kappa",
        "Gamma_minus_bs_over_kappa",
        "Gamma_plus_bs_over_kappa",
        "omega_minus_over_omega_c",
        "omega_plus_over_omega_c",
        "fit_residual_rms",
    ]);
    let mut errors = Vec::new();
    for (i, ((phi0, eta), (r, w))) in points.iter().zip(results).enumerate() {
        for s in w.into_inner() {
            warnings.add(s);
        }
        match r {
            Ok((q, s)) => {
                let (gm, gp) = bs_linewidths(&q, *eta);
                t.push(vec![
                    (*phi0).into(),
                    (*eta).into(),
                    s.gamma_minus.into(),
                    s.gamma_plus.into(),
                    (gm / q.kappa()).into(),
                    (gp / q.kappa()).into(),
                    s.omega_minus.into(),
                    s.omega_plus.into(),
                    s.rms.into(),
                ]);
            }
            Err(e) => errors.push(PointError::new(i, json!({ "phi0": phi0, "eta": eta }), &e)),
        }
    }
    let mut resolved = to_json(&base);
    if let Some(o) = resolved.as_object_mut() {
        o.insert("phi0".into(), to_json(&phis));
        o.insert("eta".into(), to_json(&etas));
    }
    insert(meta, "params", resolved);
    insert(meta, "errors", to_json(&errors));
    Ok(t)
}

fn run_hopfield(
    sc: &Scenario,
    p: &QnmParams,
    ctx: &RunContext,
    meta: &mut serde_json::Value,
    warnings: &mut WarningLog,
) -> Result<Table, CliError> {
    let settings = SpectrumSettings::resolve(sc.kind, &sc.params, p, &ctx.overrides)?;
    let scenario = settings.scenario(p)?;
    let q = settings.qnm(p)?;
    let grid = settings.grid(p)?;
    let quantum = compute_spectrum(&scenario, &grid)?;
    warnings.extend(&quantum.warnings);
    let lambda = C64::from_polar(settings.eta, q.phi0());
    let ctx_c = || "classical spectrum".to_string();
    let neg = classical_spectrum(&q, lambda, q.omega_c(), 1.0, ClassicalVariant::QnmNegFreq, &grid).context(ctx_c)?;
    let pos = classical_spectrum(&q, lambda, q.omega_c(), 1.0, ClassicalVariant::Qnm, &grid).context(ctx_c)?;
    let norm = |s: &SpectrumResult| s.peak_normalized().context(|| "normalize".into());
    let (qn, nn, pn) = (norm(&quantum)?, norm(&neg)?, norm(&pos)?);
    let mut t = Table::new(&[
        "omega_over_omega_c",
        "omega_eV",
        "S_quantum_normalized",
        "S_classical_qnm_negfreq_normalized",
        "S_classical_qnm_normalized",
    ]);
    for (i, w) in grid.iter().enumerate() {
        t.push(vec![
            (w / q.omega_c()).into(),
            (*w).into(),
            qn.values[i].into(),
            nn.values[i].into(),
            pn.values[i].into(),
        ]);
    }
    let peaks = |s: &SpectrumResult| -> Vec<f64> {
        let mut m: Vec<f64> = local_maxima(&s.values).iter().take(2).map(|&(i, _)| s.omega[i] / q.omega_c()).collect();
        m.sort_by(f64::total_cmp);
        m
    };
    insert(meta, "params", to_json(&settings));
    insert(meta, "fock_convergence", fock_meta(&scenario, warnings)?);
    insert(
        meta,
        "summary",
        json!({
            "quantum_peaks_over_omega_c": peaks(&quantum),
            "classical_negfreq_peaks_over_omega_c": peaks(&neg),
            "classical_qnm_peaks_over_omega_c": peaks(&pos),
            "shape_rms_vs_negfreq": shape_rms(&quantum, &neg).context(ctx_c)?,
            "shape_rms_vs_qnm": shape_rms(&quantum, &pos).context(ctx_c)?,
        }),
    );
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
struct ClassicalSettings {
    eta: f64,
    phi0: f64,
    omega0_over_omega_c: f64,
    e0: f64,
    variants: Vec<String>,
    grid: GridSpec,
}

fn classical_settings(params: &Params, p: &QnmParams) -> Result<(ClassicalSettings, QnmParams), CliError> {
    let phi0 = single("phi0", &params.phi0)?.unwrap_or(p.phi0());
    let q = p.with_phi0(phi0).context(|| "phi0".into())?;
    let eta = single("eta", &params.eta)?.unwrap_or(0.0);
    let grid = match params.grid {
        Some(g) => g,
        None => {
            let d = default_grid(&q, eta, DEFAULT_GRID_POINTS);
            GridSpec { lo: d[0] / q.omega_c(), hi: d[d.len() - 1] / q.omega_c(), points: d.len() }
        }
    };
    check_grid(&grid)?;
    let variants = params.variants.clone().unwrap_or_else(|| vec!["bare".into(), "qnm".into(), "qnm_negfreq".into()]);
    for v in &variants {
        parse_variant(v)?;
    }
    let s = ClassicalSettings {
        eta,
        phi0,
        omega0_over_omega_c: params.omega0_over_omega_c.unwrap_or(1.0),
        e0: params.e0.unwrap_or(1.0),
        variants,
        grid,
    };
    Ok((s, q))
}

fn run_classical(
    sc: &Scenario,
    p: &QnmParams,
    meta: &mut serde_json::Value,
    warnings: &mut WarningLog,
) -> Result<Table, CliError> {
    let (s, q) = classical_settings(&sc.params, p)?;
    let grid = linspace(s.grid.lo * q.omega_c(), s.grid.hi * q.omega_c(), s.grid.points);
    let eta = C64::from_polar(s.eta, q.phi0());
    let mut cols = vec!["omega_over_omega_c".to_string(), "omega_eV".to_string()];
    let mut curves = Vec::new();
    for v in &s.variants {
        let variant = parse_variant(v)?;
        let r = classical_spectrum(&q, eta, s.omega0_over_omega_c * q.omega_c(), s.e0, variant, &grid)
            .context(|| format!("classical {v}"))?;
        warnings.extend(&r.warnings);
        let r = r.peak_normalized().context(|| "normalize".into())?;
        // The bare curve may skip its pole point; realign onto the full grid.
        let mut vals = vec![f64::NAN; grid.len()];
        let mut j = 0;
        for (i, w) in grid.iter().enumerate() {
            if j < r.omega.len() && r.omega[j] == *w {
                vals[i] = r.values[j];
                j += 1;
            }
        }
        cols.push(format!("S_{}_normalized", v));
        curves.push(vals);
    }
    let names: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&names);
    for (i, w) in grid.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(w / q.omega_c()).into(), (*w).into()];
        row.extend(curves.iter().map(|c| Cell::Num(c[i])));
        t.push(row);
    }
    insert(meta, "params", to_json(&s));
    Ok(t)
}

fn purcell_grid(params: &Params, p: &QnmParams) -> Result<GridSpec, CliError> {
    let g = params.grid.unwrap_or_else(|| {
        let half = 10.0 / p.quality();
        GridSpec { lo: (1.0 - half).max(0.02), hi: 1.0 + half, points: 1001 }
    });
    check_grid(&g)?;
    Ok(g)
}

fn run_purcell(sc: &Scenario, p: &QnmParams, meta: &mut serde_json::Value) -> Result<Table, CliError> {
    let grid = purcell_grid(&sc.params, p)?;
    let d_over_d0 = sc.params.d_over_d0.unwrap_or(1.0);
    let (g, g_source) = match (sc.params.g_ev, p.f_amp()) {
        (Some(g), _) => (g, "config"),
        (None, Some(f)) => (dipole_coupling_from_field(p, f.norm(), d_over_d0 * D0), "field"),
        (None, None) => {
            return Err(CliError::config("purcell needs `g_eV` or a QNM with a tabulated field amplitude"))
        }
    };
    let peak = purcell_rate_single(p, g, p.omega_c());
    let mut t = Table::new(&[
        "omega0_over_omega_c",
        "zeta",
        "gamma_qnm_eV",
        "lorentzian_eV",
        "gamma_over_lorentzian",
        "purcell_factor",
    ]);
    for w in linspace(grid.lo * p.omega_c(), grid.hi * p.omega_c(), grid.points) {
        let rate = purcell_rate_single(p, g, w);
        let l = lorentzian_norm(p, peak, w);
        t.push(vec![
            (w / p.omega_c()).into(),
            zeta_factor(p, w).into(),
            rate.into(),
            l.into(),
            (rate / l).into(),
            (rate / free_space_rate_ev(d_over_d0, w)).into(),
        ]);
    }
    insert(meta, "params", json!({ "grid": grid, "g_eV": g, "g_source": g_source, "d_over_d0": d_over_d0 }));
    Ok(t)
}

fn criteria_records(sc: &Scenario, base: Option<&Path>) -> Result<Vec<QnmRecord>, CliError> {
    match (&sc.qnm.file, &sc.qnm.label) {
        (Some(f), None) => load_records(f, base),
        _ => Ok(vec![resolve_qnm(&sc.qnm, base)?.1]),
    }
}

/// Broadband and single-mode criteria for every mode; with a coupling table,
/// also the field-based coupling estimates.
fn run_criteria(sc: &Scenario, ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
    let records = criteria_records(sc, ctx.base_dir)?;
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": sc.name,
        "kind": sc.kind.name(),
    });
    let mut t = Table::new(&["label", "Q_c", "tan_2phi0", "eta1", "Omega_BB", "phi0_symmetric_rad"]);
    let mut flags = Vec::new();
    for r in &records {
        let p = r.to_params()?;
        let bb = broadband_threshold(&p);
        if bb.degenerate {
            flags.push(format!("{}: {}", r.label, Warning::DegenerateBroadbandDenominator));
        }
        t.push(vec![
            r.label.as_str().into(),
            p.quality().into(),
            p.tan_2phi0().into(),
            eta_max_first_order(&p).unwrap_or(f64::INFINITY).into(),
            bb.value.into(),
            symmetric_phase(p.quality()).into(),
        ]);
    }
    let mut m = meta;
    if let Some(o) = m.as_object_mut() {
        o.insert("qnm_records".into(), to_json(&records));
        o.insert("warnings".into(), to_json(&flags));
    }
    let mut out = vec![Artifact { stem: sc.stem().to_string(), table: t, meta: m.clone() }];
    if let Some(table) = &sc.params.coupling_table {
        let rows = load_coupling_rows(table, ctx.base_dir)?;
        let mut c = Table::new(&["label", "f_abs_m^-3/2", "omega_c_eV", "d_over_d0", "eta_estimate", "eta_reported"]);
        for row in &rows {
            let rec = load_record(&row.file, Some(&row.label), ctx.base_dir)?;
            let p = rec.to_params()?;
            let f = p.f_amp().ok_or_else(|| CliError::config(format!("{} has no field amplitude", row.label)))?;
            let eta = eta_from_field(f.norm(), p.omega_c(), row.d_over_d0).context(|| row.label.clone())?;
            c.push(vec![
                row.label.as_str().into(),
                f.norm().into(),
                p.omega_c().into(),
                row.d_over_d0.into(),
                eta.into(),
                row.eta_reported.into(),
            ]);
        }
        let mut cm = m;
        if let Some(o) = cm.as_object_mut() {
            o.insert("coupling_table".into(), to_json(&rows));
        }
        out.push(Artifact { stem: format!("{}_coupling", sc.stem()), table: c, meta: cm });
    }
    Ok(out)
}

/// Runs `sc` once per axis value. Points are evaluated in parallel on the
/// current pool; rows come back in axis order and failed points are recorded.
pub fn sweep(sc: &Scenario, axis: &str, values: &[f64], ctx: &RunContext) -> Result<Vec<Artifact>, CliError> {
    if !matches!(sc.kind, Kind::Spectrum | Kind::Hopfield) {
        return Err(CliError::config(format!(
            "scenario kind `{}` cannot be swept (use spectrum or hopfield)",
            sc.kind.name()
        )));
    }
    if !SWEEP_AXES.contains(&axis) {
        return Err(CliError::config(format!("`{axis}` is not a sweepable axis (use one of {})", SWEEP_AXES.join(", "))));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::config("sweep values must be finite numbers"));
    }
    let (values, notes) = sorted_unique(values);
    if values.is_empty() {
        return Err(CliError::config("sweep has no values"));
    }
    let (p, record) = resolve_qnm(&sc.qnm, ctx.base_dir)?;
    let base = SpectrumSettings::resolve(sc.kind, &sc.params, &p, &ctx.overrides)?;
    let results: Vec<_> = values
        .par_iter()
        .map(|&v| {
            let mut w = WarningLog::quiet();
            let r = (|| {
                let mut s = base.clone();
                s.apply_axis(axis, v)?;
                let q = s.qnm(&p)?;
                let spec = compute_spectrum(&s.scenario(&p)?, &s.grid(&p)?)?;
                w.extend(&spec.warnings);
                let summary = summarize(&spec, &q, &s, &mut w)?;
                let shown = if s.normalize { spec.peak_normalized().context(|| "normalize".into())? } else { spec };
                Ok::<_, CliError>((q, summary, shown))
            })();
            (r, w)
        })
        .collect();
    let mut warnings = WarningLog::default();
    for n in notes {
        warnings.add(n);
    }
    let mut summary = Table::new(&[
        axis,
        "peak_omega_over_omega_c",
        "omega_minus_over_omega_c",
        "omega_plus_over_omega_c",
        "Gamma_minus_over_kappa",
        "Gamma_plus_over_kappa",
        "fit_residual_rms",
    ]);
    let mut spectra = Table::new(&[axis, "omega_over_omega_c", "omega_eV", "S"]);
    let mut errors = Vec::new();
    for (i, (v, (r, w))) in values.iter().zip(results).enumerate() {
        for s in w.into_inner() {
            warnings.add(s);
        }
        match r {
            Ok((q, s, spec)) => {
                summary.push(vec![
                    (*v).into(),
                    s.peak.into(),
                    s.omega_minus.into(),
                    s.omega_plus.into(),
                    s.gamma_minus.into(),
                    s.gamma_plus.into(),
                    s.rms.into(),
                ]);
                for (w, y) in spec.omega.iter().zip(&spec.values) {
                    spectra.push(vec![(*v).into(), (w / q.omega_c()).into(), (*w).into(), (*y).into()]);
                }
            }
            Err(e) => {
                log::warn!("sweep point {axis} = {v} failed: {e}");
                errors.push(PointError::new(i, json!({ axis: v }), &e));
            }
        }
    }
    let mut meta = base_meta(sc, &record, &ctx.overrides);
    insert(&mut meta, "params", to_json(&base));
    insert(&mut meta, "sweep", json!({ "axis": axis, "values": values }));
    insert(&mut meta, "errors", to_json(&errors));
    insert(&mut meta, "warnings", to_json(&warnings.into_inner()));
    let stem = format!("{}_sweep_{axis}", sc.stem());
    Ok(vec![
        Artifact { stem: stem.clone(), table: summary, meta: meta.clone() },
        Artifact { stem: format!("{stem}_spectra"), table: spectra, meta },
    ])
}
