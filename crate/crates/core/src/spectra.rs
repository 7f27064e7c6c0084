//! Steady-state emission spectra and the classical single-QNM comparison.
//!
//! The quantum spectrum is the one-sided transform of `⟨X†(0)X(τ)⟩` with
//! `X = Σ_α c^det_α σ_α`. By the regression theorem
//! `S(ω) = Re Tr[X (−L − iω)^{-1} vec(ρ_ss X†)]`. `L` is reduced once to
//! Hessenberg form, `L = Q H Q†`, after which each frequency costs one
//! `O(n²)` Hessenberg solve.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::dressed::TransitionSet;
use crate::liouvillian::{Liouvillian, SteadyState};
use crate::qnm::{qnm_expansion_coefficient, QnmParams};
use crate::{Error, Result, Warning, C64};

pub const DEFAULT_GRID_POINTS: usize = 2000;
/// Lower grid edge never drops below this fraction of `ω_c`.
pub const GRID_FLOOR: f64 = 0.02;
/// Negative excursions beyond `−NEGATIVE_TOLERANCE · max` are flagged.
pub const NEGATIVE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    Peak,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    pub warnings: Vec<Warning>,
}

impl SpectrumResult {
    pub fn raw(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::InvalidDimension(alloc::format!(
                "{} grid points but {} values",
                omega.len(),
                values.len()
            )));
        }
        if omega.is_empty() {
            return Err(Error::Empty("spectrum grid"));
        }
        check_ascending(&omega)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut warnings = Vec::new();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -NEGATIVE_TOLERANCE * max.abs() {
            warnings.push(Warning::NegativeSpectrum { min_value: min });
        }
        Ok(Self { omega, values, normalization: Normalization::Raw, warnings })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copy scaled to unit maximum.
    pub fn peak_normalized(&self) -> Result<Self> {
        let max = self.max();
        if !(max > 0.0) {
            return Err(Error::param("spectrum", "maximum is not positive; cannot normalize"));
        }
        Ok(Self {
            omega: self.omega.clone(),
            values: self.values.iter().map(|v| v / max).collect(),
            normalization: Normalization::Peak,
            warnings: self.warnings.clone(),
        })
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Grid frequency of the global maximum.
    pub fn peak_omega(&self) -> f64 {
        let i = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.omega[i]
    }
}

fn check_ascending(omega: &[f64]) -> Result<()> {
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite);
    }
    if omega.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("omega_grid", "must be strictly ascending"));
    }
    Ok(())
}

/// `points` equally spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

/// `[ω_c(1 − 3|η| − 6/Q), ω_c(1 + 3|η| + 6/Q)]`, lower edge floored at `0.02 ω_c`.
pub fn default_grid(p: &QnmParams, eta_abs: f64, points: usize) -> Vec<f64> {
    let spread = 3.0 * eta_abs + 6.0 / p.quality();
    let lo = (p.omega_c() * (1.0 - spread)).max(GRID_FLOOR * p.omega_c());
    let hi = p.omega_c() * (1.0 + spread);
    linspace(lo, hi, points)
}

/// Prepared resolvent for repeated frequency evaluation.
#[derive(Debug, Clone)]
pub struct ResolventSpectrum {
    n: usize,
    /// Hessenberg factor, row-major.
    h: Vec<C64>,
    /// Detection functional in the Hessenberg basis.
    u: Vec<C64>,
    /// `Q† vec(ρ X†)`.
    w: Vec<C64>,
    scale: f64,
}

/// `X[j, k] = c^det_α` for every transition.
pub fn detection_matrix(ts: &TransitionSet, c_det: &[C64]) -> Result<DMatrix<C64>> {
    if c_det.len() != ts.len() {
        return Err(Error::InvalidDimension(alloc::format!(
            "{} detection elements for {} transitions",
            c_det.len(),
            ts.len()
        )));
    }
    let m = ts.levels;
    let mut x = DMatrix::<C64>::zeros(m, m);
    for (t, c) in ts.iter().zip(c_det) {
        x[(t.j, t.k)] += *c;
    }
    Ok(x)
}

impl ResolventSpectrum {
    pub fn new(l: &Liouvillian, ss: &SteadyState, ts: &TransitionSet, c_det: &[C64]) -> Result<Self> {
        let m = l.levels();
        if ts.levels != m || ss.rho.nrows() != m {
            return Err(Error::InvalidDimension(alloc::format!(
                "Liouvillian acts on {m} levels, transitions on {}, steady state on {}",
                ts.levels,
                ss.rho.nrows()
            )));
        }
        let x = detection_matrix(ts, c_det)?;
        let source = &ss.rho * x.adjoint();
        let v = DVector::from_column_slice(source.as_slice());
        let n = m * m;
        let (q, h) = l.matrix().clone().hessenberg().unpack();
        let w: Vec<C64> = (q.adjoint() * v).iter().copied().collect();
        // Tr[X Y] = Σ_{jk} X[j,k] Y[k,j], and Y[k,j] sits at k + j·m
        let mut u = alloc::vec![C64::new(0.0, 0.0); n];
        for j in 0..m {
            for k in 0..m {
                let xjk = x[(j, k)];
                if xjk == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = k + j * m;
                for (i, ui) in u.iter_mut().enumerate() {
                    *ui += xjk * q[(row, i)];
                }
            }
        }
        let mut rows = alloc::vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in r.saturating_sub(1)..n {
                rows[r * n + c] = h[(r, c)];
            }
        }
        let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        Ok(Self { n, h: rows, u, w, scale })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `S(ω)`; fails when `H + iω` is numerically singular.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        let mut a = Vec::new();
        let y = self.solve(omega, &mut a)?;
        let s: C64 = self.u.iter().zip(&y).map(|(u, y)| u * y).sum();
        Ok(-s.re)
    }

    pub fn evaluate_grid(&self, omega: &[f64]) -> Result<Vec<f64>> {
        omega.iter().map(|&w| self.evaluate(w)).collect()
    }

    /// Solves `(H + iω) y = w` by Gaussian elimination with adjacent-row pivoting.
    fn solve(&self, omega: f64, a: &mut Vec<C64>) -> Result<Vec<C64>> {
        let n = self.n;
        a.clear();
        a.extend_from_slice(&self.h);
        for i in 0..n {
            a[i * n + i] += C64::new(0.0, omega);
        }
        let mut b = self.w.clone();
        let tiny = 1e-14 * self.scale;
        for i in 0..n.saturating_sub(1) {
            let below = a[(i + 1) * n + i];
            if below == C64::new(0.0, 0.0) {
                continue;
            }
            if below.norm() > a[i * n + i].norm() {
                let (upper, lower) = a.split_at_mut((i + 1) * n);
                upper[i * n + i..i * n + n].swap_with_slice(&mut lower[i..n]);
                b.swap(i, i + 1);
            }
            let pivot = a[i * n + i];
            let factor = a[(i + 1) * n + i] / pivot;
            let (upper, lower) = a.split_at_mut((i + 1) * n);
            let src = &upper[i * n + i..i * n + n];
            for (dst, s) in lower[i..n].iter_mut().zip(src) {
                *dst -= factor * s;
            }
            b[i + 1] = b[i + 1] - factor * b[i];
        }
        for i in (0..n).rev() {
            let row = &a[i * n..(i + 1) * n];
            let mut acc = b[i];
            for c in (i + 1)..n {
                acc -= row[c] * b[c];
            }
            let d = row[i];
            if d.norm() <= tiny {
                return Err(Error::SingularSystem(alloc::format!(
                    "resolvent is singular at omega = {omega} eV; an undamped transition sits on the grid \
                     (check the negative-rate policy and the dissipator)"
                )));
            }
            b[i] = acc / d;
        }
        Ok(b)
    }
}

/// Quantum emission spectrum on `omega` (raw units).
pub fn emission_spectrum(
    l: &Liouvillian,
    ss: &SteadyState,
    ts: &TransitionSet,
    c_det: &[C64],
    omega: &[f64],
) -> Result<SpectrumResult> {
    check_ascending(omega)?;
    if omega.iter().any(|&w| w <= 0.0) {
        return Err(Error::param("omega_grid", "frequencies must be positive"));
    }
    let solver = ResolventSpectrum::new(l, ss, ts, c_det)?;
    SpectrumResult::raw(omega.to_vec(), solver.evaluate_grid(omega)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalVariant {
    /// Bare polarizability `α0`.
    Bare,
    /// Single positive-frequency QNM.
    Qnm,
    /// QNM plus its negative-frequency partner.
    QnmNegFreq,
}

impl ClassicalVariant {
    pub fn name(self) -> &'static str {
        match self {
            ClassicalVariant::Bare => "bare",
            ClassicalVariant::Qnm => "qnm",
            ClassicalVariant::QnmNegFreq => "qnm_negfreq",
        }
    }
}

/// Green-function factor (up to a common real constant) for the chosen expansion.
fn propagator(p: &QnmParams, eta_phase: C64, omega: f64, variant: ClassicalVariant) -> C64 {
    let a = qnm_expansion_coefficient(p, omega);
    match variant {
        ClassicalVariant::Bare | ClassicalVariant::Qnm => a * eta_phase,
        ClassicalVariant::QnmNegFreq => a * eta_phase + qnm_expansion_coefficient(p, -omega).conj() * eta_phase.conj(),
    }
}

/// Classical scattered intensity `|G(r_det, 0, ω) α(ω) E0|²` for a point dipole.
///
/// `eta` carries the projected QNM phase; `e0` is the drive amplitude. The
/// detector shares the dipole's projected phase.
pub fn classical_spectrum(
    p: &QnmParams,
    eta: C64,
    omega0: f64,
    e0: f64,
    variant: ClassicalVariant,
    omega: &[f64],
) -> Result<SpectrumResult> {
    check_ascending(omega)?;
    if !(omega0 > 0.0) {
        return Err(Error::param("omega0", "must be positive"));
    }
    let s_c = libm::cos(2.0 * p.phi0());
    let eta2 = eta * eta;
    let eta_abs2 = eta.norm_sqr();
    let phase = if eta_abs2 > 0.0 { eta2 / eta_abs2 } else { C64::from_polar(1.0, 2.0 * p.phi0()) };
    let mut grid = Vec::with_capacity(omega.len());
    let mut values = Vec::with_capacity(omega.len());
    let mut warnings = Vec::new();
    for &w in omega {
        let bare = omega0 * omega0 - w * w;
        let g = propagator(p, phase, w, variant);
        let alpha = match variant {
            ClassicalVariant::Bare => {
                if bare == 0.0 {
                    warnings.push(Warning::SkippedPolePoint { omega: w });
                    continue;
                }
                C64::new(2.0 * omega0 / bare, 0.0)
            }
            _ => {
                let coupling = g * (4.0 * omega0 * p.omega_c() * eta_abs2 / s_c);
                C64::new(2.0 * omega0, 0.0) / (C64::new(bare, 0.0) - coupling)
            }
        };
        let field = g * alpha * e0;
        grid.push(w);
        values.push(field.norm_sqr());
    }
    let mut out = SpectrumResult::raw(grid, values)?;
    out.warnings.extend(warnings);
    Ok(out)
}

/// RMS difference of two peak-normalized spectra on the same grid.
pub fn shape_rms(a: &SpectrumResult, b: &SpectrumResult) -> Result<f64> {
    if a.omega != b.omega {
        return Err(Error::param("omega_grid", "spectra must share a grid"));
    }
    let an = a.peak_normalized()?;
    let bn = b.peak_normalized()?;
    let sum: f64 = an.values.iter().zip(&bn.values).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(sum / a.values.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dressed::{detection_operator_elements, diagonalize, transitions, TransitionOperators, DROP_TOL};
    use crate::fit::fit_lorentzian;
    use crate::hamiltonian::{coulomb_single_mode, empty_cavity, CouplingConfig, TlsSpace};
    use crate::liouvillian::{build, steady_state, BathCoupling, NegativeRatePolicy, PumpModel};
    use crate::opalg::annihilation;
    use crate::qnm::SpectralDensityModel;
    use approx::assert_relative_eq;

    struct Setup {
        l: Liouvillian,
        ss: SteadyState,
        ts: TransitionSet,
        c_det: Vec<C64>,
    }

    fn tls_setup(eta: C64, q: f64, phi0: f64, keep: usize, pump: f64) -> Setup {
        let n = 16;
        let p = QnmParams::from_quality("c", 1.0, q, phi0).unwrap();
        let cfg = CouplingConfig::new(eta, 1.0, 1.0, n);
        let ds = diagonalize(&coulomb_single_mode(&cfg).unwrap(), keep).unwrap();
        let ts = transitions(&ds, &TransitionOperators::cavity(TlsSpace::new(n).unwrap().a(), eta), DROP_TOL).unwrap();
        let l = build(
            ds.kept_energies(),
            &ts,
            BathCoupling::A,
            &SpectralDensityModel::ab_initio(p),
            Some(&PumpModel::cavity(pump)),
            false,
            NegativeRatePolicy::ClampZero,
        )
        .unwrap();
        let ss = steady_state(&l).unwrap();
        let c_det = detection_operator_elements(&ts, eta);
        Setup { l, ss, ts, c_det }
    }

    /// `Re ∫_0^T e^{iωτ} Tr[X e^{Lτ} vec(ρX†)] dτ`, RK4 on the rotated system with the
    /// integral carried as an extra state.
    fn time_domain(s: &Setup, omega: f64, t_max: f64, dt: f64) -> f64 {
        let m = s.l.levels();
        let x = detection_matrix(&s.ts, &s.c_det).unwrap();
        let src = &s.ss.rho * x.adjoint();
        let mut y = DVector::from_column_slice(src.as_slice());
        let gen = s.l.matrix() + DMatrix::<C64>::identity(m * m, m * m) * C64::new(0.0, omega);
        let functional = DVector::from_fn(m * m, |i, _| {
            let (k, j) = (i % m, i / m);
            x[(j, k)]
        });
        let f = |y: &DVector<C64>| functional.dot(y);
        let steps = (t_max / dt).ceil() as usize;
        let mut integral = C64::new(0.0, 0.0);
        let h = C64::from(dt);
        for _ in 0..steps {
            let k1 = &gen * &y;
            let y2 = &y + &k1 * (h * 0.5);
            let k2 = &gen * &y2;
            let y3 = &y + &k2 * (h * 0.5);
            let k3 = &gen * &y3;
            let y4 = &y + &k3 * h;
            let k4 = &gen * &y4;
            integral += (f(&y) + f(&y2) * 2.0 + f(&y3) * 2.0 + f(&y4)) * (h / 6.0);
            y += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * (h / 6.0);
        }
        integral.re
    }

    #[test]
    fn resolvent_matches_time_domain() {
        let s = tls_setup(C64::new(0.1, 0.0), 10.0, 0.0, 6, 0.01);
        let solver = ResolventSpectrum::new(&s.l, &s.ss, &s.ts, &s.c_det).unwrap();
        for omega in [0.9, 0.95, 1.08] {
            let direct = solver.evaluate(omega).unwrap();
            // slowest coherence decays near 0.02; 1500 time units leave e^{-30}
            let td = time_domain(&s, omega, 1500.0, 0.01);
            assert!((direct - td).abs() <= 1e-6 * direct.abs().max(1e-300) + 1e-12, "{omega}: {direct} vs {td}");
        }
    }

    #[test]
    fn resolvent_matches_dense_solve() {
        let s = tls_setup(C64::from_polar(0.3, 0.2), 15.0, 0.01, 8, 0.01);
        let solver = ResolventSpectrum::new(&s.l, &s.ss, &s.ts, &s.c_det).unwrap();
        let m = s.l.levels();
        let x = detection_matrix(&s.ts, &s.c_det).unwrap();
        let v = DVector::from_column_slice((&s.ss.rho * x.adjoint()).as_slice());
        for omega in [0.6, 0.8, 1.25] {
            let a = -(s.l.matrix() + DMatrix::<C64>::identity(m * m, m * m) * C64::new(0.0, omega));
            let y = a.lu().solve(&v).unwrap();
            let ym = DMatrix::from_column_slice(m, m, y.as_slice());
            let dense = (&x * ym).trace().re;
            let fast = solver.evaluate(omega).unwrap();
            assert_relative_eq!(fast, dense, max_relative = 1e-9);
        }
    }

    #[test]
    fn empty_cavity_lorentzian() {
        let p = QnmParams::from_quality("c", 1.0, 20.0, 0.02).unwrap();
        let ds = diagonalize(&empty_cavity(1.0, 8).unwrap(), 6).unwrap();
        let eta = C64::new(0.1, 0.0);
        let ts = transitions(&ds, &TransitionOperators::cavity(annihilation(8).unwrap(), eta), DROP_TOL).unwrap();
        let l = build(
            ds.kept_energies(),
            &ts,
            BathCoupling::A,
            &SpectralDensityModel::ab_initio(p.clone()),
            Some(&PumpModel::cavity(0.01)),
            false,
            NegativeRatePolicy::Reject,
        )
        .unwrap();
        let ss = steady_state(&l).unwrap();
        let grid = linspace(0.7, 1.3, 1201);
        let spec = emission_spectrum(&l, &ss, &ts, &detection_operator_elements(&ts, eta), &grid).unwrap();
        let (fit, _) = fit_lorentzian(&spec.omega, &spec.values, None).unwrap();
        assert!((fit.width - p.kappa()).abs() < 0.01 * p.kappa(), "{}", fit.width);
        assert!((fit.center - 1.0).abs() < 1e-6);
    }

    #[test]
    fn global_phase_invariance() {
        let grid = linspace(0.5, 1.5, 200);
        let a = tls_setup(C64::new(0.3, 0.0), 13.0, 0.02, 8, 0.01);
        let b = tls_setup(C64::from_polar(0.3, 1.3), 13.0, 0.02, 8, 0.01);
        let sa = emission_spectrum(&a.l, &a.ss, &a.ts, &a.c_det, &grid).unwrap();
        let sb = emission_spectrum(&b.l, &b.ss, &b.ts, &b.c_det, &grid).unwrap();
        let max = sa.max();
        for (x, y) in sa.values.iter().zip(&sb.values) {
            assert!((x - y).abs() < 1e-8 * max, "{x} vs {y} (max {max})");
        }
    }

    #[test]
    fn weak_pump_scales_linearly() {
        let grid = linspace(0.8, 1.2, 400);
        let one = tls_setup(C64::new(0.05, 0.0), 20.0, 0.0, 8, 1e-4);
        let two = tls_setup(C64::new(0.05, 0.0), 20.0, 0.0, 8, 2e-4);
        let i1 = emission_spectrum(&one.l, &one.ss, &one.ts, &one.c_det, &grid).unwrap().integral();
        let i2 = emission_spectrum(&two.l, &two.ss, &two.ts, &two.c_det, &grid).unwrap().integral();
        assert!((i2 / i1 - 2.0).abs() < 0.02, "{}", i2 / i1);
    }

    #[test]
    fn default_grid_edges() {
        let p = QnmParams::from_quality("c", 1.0, 20.0, 0.0).unwrap();
        let g = default_grid(&p, 0.1, 2000);
        assert_eq!(g.len(), 2000);
        assert_relative_eq!(g[0], 1.0 - 0.3 - 0.3, epsilon = 1e-12);
        assert_relative_eq!(g[1999], 1.6, epsilon = 1e-12);
        let wide = default_grid(&p, 0.5, 10);
        assert_relative_eq!(wide[0], GRID_FLOOR);
    }

    #[test]
    fn result_validation() {
        assert!(SpectrumResult::raw(alloc::vec![1.0, 1.0], alloc::vec![0.0, 0.0]).is_err());
        assert!(SpectrumResult::raw(alloc::vec![1.0, 2.0], alloc::vec![0.0, f64::NAN]).is_err());
        let s = SpectrumResult::raw(alloc::vec![1.0, 2.0, 3.0], alloc::vec![1.0, 4.0, -1.0]).unwrap();
        assert!(matches!(s.warnings[0], Warning::NegativeSpectrum { .. }));
        let n = s.peak_normalized().unwrap();
        assert_eq!(n.max(), 1.0);
        assert_eq!(n.normalization, Normalization::Peak);
    }

    #[test]
    fn classical_reduces_to_bare_without_coupling() {
        let p = QnmParams::from_quality("c", 1.0, 16.0, 0.0).unwrap();
        let grid = linspace(0.5, 0.9, 50);
        let zero = C64::new(0.0, 0.0);
        let q = classical_spectrum(&p, zero, 1.0, 1.0, ClassicalVariant::Qnm, &grid).unwrap();
        let b = classical_spectrum(&p, zero, 1.0, 1.0, ClassicalVariant::Bare, &grid).unwrap();
        for (x, y) in q.values.iter().zip(&b.values) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
        let pole = classical_spectrum(&p, zero, 0.7, 1.0, ClassicalVariant::Bare, &[0.6, 0.7, 0.8]).unwrap();
        assert_eq!(pole.omega, alloc::vec![0.6, 0.8]);
        assert!(matches!(pole.warnings[0], Warning::SkippedPolePoint { .. }));
    }

    #[test]
    fn lossless_negfreq_poles_are_hopfield_polaritons() {
        // high Q approximates the lossless limit; poles at (1 ± √5)/2 ± 1 for λ = 0.5
        let p = QnmParams::from_quality("c", 1.0, 2000.0, 0.0).unwrap();
        let grid = linspace(0.3, 2.0, 170_001);
        let s = classical_spectrum(&p, C64::new(0.5, 0.0), 1.0, 1.0, ClassicalVariant::QnmNegFreq, &grid).unwrap();
        let peaks = crate::fit::local_maxima(&s.values);
        let mut top: Vec<f64> = peaks[..2].iter().map(|(i, _)| s.omega[*i]).collect();
        top.sort_by(|a, b| a.total_cmp(b));
        let golden = (1.0 + libm::sqrt(5.0)) / 2.0;
        assert!((top[0] - (golden - 1.0)).abs() < 1e-3, "{top:?}");
        assert!((top[1] - golden).abs() < 1e-3, "{top:?}");
    }
}
