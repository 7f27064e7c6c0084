//! Lorentzian peak fitting by Levenberg–Marquardt.
//!
//! Each peak is `A (Γ/2)² / ((ω − ω_p)² + (Γ/2)²)`, so `A` is the peak height and
//! `Γ` the full width at half maximum. [`LineShape::Dispersive`] adds a term
//! `B (Γ/2)(ω − ω_p) / ((ω − ω_p)² + (Γ/2)²)` per peak, the lineshape of a single
//! Liouvillian pole with a complex residue.

use alloc::string::String;
use alloc::vec::Vec;
use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt, TerminationReason};
use nalgebra::{DMatrix, DVector, Dyn, Owned};

use crate::{Error, Result};

pub const FIT_GTOL: f64 = 1e-10;
pub const FIT_PATIENCE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineShape {
    #[default]
    Absorptive,
    Dispersive,
}

impl LineShape {
    fn stride(self) -> usize {
        match self {
            LineShape::Absorptive => 3,
            LineShape::Dispersive => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    pub amplitude: f64,
    pub center: f64,
    /// Full width at half maximum.
    pub width: f64,
}

impl Lorentzian {
    pub fn eval(&self, omega: f64) -> f64 {
        let h = 0.5 * self.width;
        let d = omega - self.center;
        self.amplitude * h * h / (d * d + h * h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthFit {
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub amp_minus: f64,
    pub amp_plus: f64,
    /// Dispersive weights; zero for [`LineShape::Absorptive`].
    pub disp_minus: f64,
    pub disp_plus: f64,
    /// RMS residual relative to the largest data value in the window.
    pub residual_rms: f64,
}

struct LorentzianSum<'a> {
    omega: &'a [f64],
    data: &'a [f64],
    shape: LineShape,
    params: DVector<f64>,
}

impl LorentzianSum<'_> {
    fn peaks(&self) -> usize {
        self.params.len() / self.shape.stride()
    }

    fn model(&self, w: f64) -> f64 {
        let (p, k) = (&self.params, self.shape.stride());
        (0..self.peaks())
            .map(|i| {
                let (a, c, g) = (p[k * i], p[k * i + 1], p[k * i + 2]);
                let b = if k == 4 { p[k * i + 3] } else { 0.0 };
                let h = 0.5 * g;
                let d = w - c;
                (a * h * h + b * h * d) / (d * d + h * h)
            })
            .sum()
    }
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for LorentzianSum<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.params.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.params.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        Some(DVector::from_iterator(
            self.omega.len(),
            self.omega.iter().zip(self.data).map(|(&w, &y)| self.model(w) - y),
        ))
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let (p, k) = (&self.params, self.shape.stride());
        let mut jac = DMatrix::zeros(self.omega.len(), p.len());
        for (r, &w) in self.omega.iter().enumerate() {
            for i in 0..self.peaks() {
                let (a, c, g) = (p[k * i], p[k * i + 1], p[k * i + 2]);
                let b = if k == 4 { p[k * i + 3] } else { 0.0 };
                let h = 0.5 * g;
                let d = w - c;
                let den = d * d + h * h;
                let num = a * h * h + b * h * d;
                // d/dc and d/dh of num/den; dh/dg = 1/2.
                let dc = (-b * h * den + 2.0 * d * num) / (den * den);
                let dh = ((2.0 * a * h + b * d) * den - 2.0 * h * num) / (den * den);
                jac[(r, k * i)] = h * h / den;
                jac[(r, k * i + 1)] = dc;
                jac[(r, k * i + 2)] = 0.5 * dh;
                if k == 4 {
                    jac[(r, k * i + 3)] = h * d / den;
                }
            }
        }
        Some(jac)
    }
}

fn window_slice<'a>(omega: &'a [f64], values: &'a [f64], window: Option<(f64, f64)>) -> Result<(&'a [f64], &'a [f64])> {
    if omega.len() != values.len() {
        return Err(Error::InvalidDimension(alloc::format!(
            "grid has {} points but data has {}",
            omega.len(),
            values.len()
        )));
    }
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let start = omega.partition_point(|&w| w < lo);
    let end = omega.partition_point(|&w| w <= hi);
    if end < start + 8 {
        return Err(Error::Empty("fit window holds fewer than 8 grid points"));
    }
    Ok((&omega[start..end], &values[start..end]))
}

/// Local maxima as `(index, value)`, largest first.
pub fn local_maxima(values: &[f64]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .map(|i| (i, values[i]))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// FWHM estimate from the half-height crossings around `peak`.
fn half_width_guess(omega: &[f64], values: &[f64], peak: usize) -> f64 {
    let half = 0.5 * values[peak];
    let mut left = peak;
    while left > 0 && values[left] > half {
        left -= 1;
    }
    let mut right = peak;
    while right + 1 < values.len() && values[right] > half {
        right += 1;
    }
    let span = omega[right] - omega[left];
    let one_sided = 2.0 * (omega[right] - omega[peak]).min(omega[peak] - omega[left]);
    let guess = if one_sided > 0.0 { one_sided.min(span) } else { span };
    guess.max(omega[1] - omega[0])
}

fn run_fit(omega: &[f64], values: &[f64], guesses: &[Lorentzian], shape: LineShape) -> Result<(Vec<(Lorentzian, f64)>, f64)> {
    let scale = values.iter().copied().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::PeaksUnresolved("spectrum in the fit window is zero or non-finite".into()));
    }
    let data: Vec<f64> = values.iter().map(|v| v / scale).collect();
    let k = shape.stride();
    let mut init = Vec::with_capacity(k * guesses.len());
    for g in guesses {
        init.extend_from_slice(&[g.amplitude / scale, g.center, g.width]);
        if k == 4 {
            init.push(0.0);
        }
    }
    let problem = LorentzianSum { omega, data: &data, shape, params: DVector::from_vec(init) };
    let (solved, report) = LevenbergMarquardt::new()
        .with_gtol(FIT_GTOL)
        .with_patience(FIT_PATIENCE)
        .minimize(problem);
    let residual_rms = libm::sqrt(2.0 * report.objective_function / omega.len() as f64);
    let ok = report.termination.was_successful()
        || matches!(report.termination, TerminationReason::NoImprovementPossible(_));
    if !ok || !residual_rms.is_finite() {
        return Err(Error::FitNotConverged { residual_rms, reason: termination_text(&report.termination) });
    }
    let p = solved.params;
    let peaks = (0..guesses.len())
        .map(|i| {
            let l = Lorentzian { amplitude: p[k * i] * scale, center: p[k * i + 1], width: p[k * i + 2].abs() };
            // h enters the dispersive term linearly, so flipping the width sign flips B.
            let b = if k == 4 { p[k * i + 3] * scale * p[k * i + 2].signum() } else { 0.0 };
            (l, b)
        })
        .collect();
    Ok((peaks, residual_rms))
}

fn termination_text(t: &TerminationReason) -> String {
    alloc::format!("{t:?}")
}

/// Fit two Lorentzians seeded from the two largest local maxima in `window`.
pub fn fit_two_lorentzians(omega: &[f64], values: &[f64], window: Option<(f64, f64)>) -> Result<LinewidthFit> {
    fit_two_peaks(omega, values, window, LineShape::Absorptive)
}

pub fn fit_two_peaks(
    omega: &[f64],
    values: &[f64],
    window: Option<(f64, f64)>,
    shape: LineShape,
) -> Result<LinewidthFit> {
    let (w, v) = window_slice(omega, values, window)?;
    let maxima = local_maxima(v);
    if maxima.len() < 2 {
        return Err(Error::PeaksUnresolved(alloc::format!(
            "found {} local maximum in the window; reduce |eta| or widen the window",
            maxima.len()
        )));
    }
    let guesses: Vec<Lorentzian> = maxima[..2]
        .iter()
        .map(|&(i, val)| Lorentzian { amplitude: val, center: w[i], width: half_width_guess(w, v, i) })
        .collect();
    let (mut peaks, residual_rms) = run_fit(w, v, &guesses, shape)?;
    peaks.sort_by(|a, b| a.0.center.total_cmp(&b.0.center));
    let ((lo, disp_minus), (hi, disp_plus)) = (peaks[0], peaks[1]);
    if !(hi.center > lo.center) || lo.width <= 0.0 || hi.width <= 0.0 {
        return Err(Error::PeaksUnresolved("fit collapsed onto a single peak".into()));
    }
    Ok(LinewidthFit {
        omega_minus: lo.center,
        omega_plus: hi.center,
        gamma_minus: lo.width,
        gamma_plus: hi.width,
        amp_minus: lo.amplitude,
        amp_plus: hi.amplitude,
        disp_minus,
        disp_plus,
        residual_rms,
    })
}

/// Single-Lorentzian fit seeded from the global maximum in `window`.
pub fn fit_lorentzian(omega: &[f64], values: &[f64], window: Option<(f64, f64)>) -> Result<(Lorentzian, f64)> {
    let (w, v) = window_slice(omega, values, window)?;
    let (i, val) = v
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::Empty("spectrum"))?;
    let guess = Lorentzian { amplitude: val, center: w[i], width: half_width_guess(w, v, i) };
    let (peaks, rms) = run_fit(w, v, &[guess], LineShape::Absorptive)?;
    Ok((peaks[0].0, rms))
}
