//! QNM parameters and the closed-form scalar quantities built from them:
//! the ζ-factor, spectral densities, broadband and single-mode validity
//! criteria, Purcell rates, and coupling estimates.
//!
//! Frequencies are `ħω` in eV unless a function says otherwise.

use alloc::string::String;
use core::f64::consts::{FRAC_PI_8, PI};

use crate::units::{ev_to_rad_per_s, rad_per_s_to_ev, D0, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::{Error, Result, C64};

/// One quasinormal mode: complex eigenfrequency `ω_c - iγ_c`, projected phase
/// `φ0` at the emitter, and optionally the projected field `d̂·f̃_c(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QnmParams {
    pub label: String,
    omega_c: f64,
    gamma_c: f64,
    phi0: f64,
    f_amp: Option<C64>,
}

impl QnmParams {
    pub fn new(label: impl Into<String>, omega_c: f64, gamma_c: f64, phi0: f64) -> Result<Self> {
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::param("omega_c", "must be finite and positive"));
        }
        if !(gamma_c.is_finite() && gamma_c > 0.0) {
            return Err(Error::param("gamma_c", "must be finite and positive"));
        }
        if !(phi0.is_finite() && phi0.abs() < FRAC_PI_8) {
            return Err(Error::param(
                "phi0",
                alloc::format!("|phi0| = {} must be below pi/8 (small-phase regime)", phi0.abs()),
            ));
        }
        Ok(Self { label: label.into(), omega_c, gamma_c, phi0, f_amp: None })
    }

    /// Builds from the tabulated combination `tan(2φ0)`.
    pub fn from_tan_2phi0(
        label: impl Into<String>,
        omega_c: f64,
        gamma_c: f64,
        tan_2phi0: f64,
    ) -> Result<Self> {
        Self::new(label, omega_c, gamma_c, 0.5 * libm::atan(tan_2phi0))
    }

    /// Builds from a quality factor, `γ_c = ω_c / (2 Q_c)`.
    pub fn from_quality(label: impl Into<String>, omega_c: f64, q: f64, phi0: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::param("q", "must be finite and positive"));
        }
        Self::new(label, omega_c, omega_c / (2.0 * q), phi0)
    }

    /// Attaches the projected field value (m^-3/2).
    pub fn with_field(mut self, f_amp: C64) -> Self {
        self.f_amp = Some(f_amp);
        self
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn gamma_c(&self) -> f64 {
        self.gamma_c
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn f_amp(&self) -> Option<C64> {
        self.f_amp
    }

    /// Empty-cavity photon decay rate `κ_c = 2γ_c`.
    pub fn kappa(&self) -> f64 {
        2.0 * self.gamma_c
    }

    /// `Q_c = ω_c / (2γ_c)`.
    pub fn quality(&self) -> f64 {
        self.omega_c / (2.0 * self.gamma_c)
    }

    pub fn tan_2phi0(&self) -> f64 {
        libm::tan(2.0 * self.phi0)
    }

    /// `ω̃_c = ω_c - iγ_c`.
    pub fn complex_frequency(&self) -> C64 {
        C64::new(self.omega_c, -self.gamma_c)
    }

    /// Same mode with a different phase; used for phase scans.
    pub fn with_phi0(&self, phi0: f64) -> Result<Self> {
        let mut p = Self::new(self.label.clone(), self.omega_c, self.gamma_c, phi0)?;
        p.f_amp = self.f_amp;
        Ok(p)
    }
}

/// `ζ_c(φ0, ω) = 1 - 2 Q_c tan(2φ0) (ω/ω_c - 1)`.
pub fn zeta_factor(p: &QnmParams, omega: f64) -> f64 {
    1.0 - 2.0 * p.quality() * p.tan_2phi0() * (omega / p.omega_c - 1.0)
}

/// Functional form of the loss spectral density `Λ²(ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    /// `(γ_c/π)(ω_c/ω) ζ_c`, identical to `PowerLaw(-1)` with ζ enabled.
    AbInitio,
    /// `(κ_c/2π)(ω/ω_c)^n`, optionally times `ζ_c`.
    PowerLaw(i32),
    /// `κ_c/2π`.
    Flat,
}

/// Sign-tagged spectral density value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralValue {
    NonNegative(f64),
    Negative(f64),
}

impl SpectralValue {
    fn tag(v: f64) -> Self {
        if v < 0.0 { SpectralValue::Negative(v) } else { SpectralValue::NonNegative(v) }
    }

    pub fn value(self) -> f64 {
        match self {
            SpectralValue::NonNegative(v) | SpectralValue::Negative(v) => v,
        }
    }

    pub fn is_negative(self) -> bool {
        matches!(self, SpectralValue::Negative(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensityModel {
    kind: SpectralKind,
    zeta_enabled: bool,
    params: QnmParams,
}

impl SpectralDensityModel {
    pub fn ab_initio(params: QnmParams) -> Self {
        Self { kind: SpectralKind::AbInitio, zeta_enabled: true, params }
    }

    /// `PowerLaw(-1)` with ζ is the ab initio density and is stored as such.
    pub fn power_law(params: QnmParams, exponent: i32, zeta_enabled: bool) -> Self {
        if exponent == -1 && zeta_enabled {
            return Self::ab_initio(params);
        }
        Self { kind: SpectralKind::PowerLaw(exponent), zeta_enabled, params }
    }

    pub fn flat(params: QnmParams) -> Self {
        Self { kind: SpectralKind::Flat, zeta_enabled: false, params }
    }

    pub fn kind(&self) -> SpectralKind {
        self.kind
    }

    pub fn zeta_enabled(&self) -> bool {
        self.zeta_enabled
    }

    pub fn params(&self) -> &QnmParams {
        &self.params
    }

    /// `Λ²(ω)` for `ω > 0`.
    pub fn evaluate(&self, omega: f64) -> SpectralValue {
        let p = &self.params;
        let base = p.kappa() / (2.0 * PI);
        let v = match self.kind {
            SpectralKind::Flat => base,
            SpectralKind::AbInitio => (p.gamma_c / PI) * (p.omega_c / omega) * zeta_factor(p, omega),
            SpectralKind::PowerLaw(n) => {
                let shape = libm::pow(omega / p.omega_c, n as f64);
                let zeta = if self.zeta_enabled { zeta_factor(p, omega) } else { 1.0 };
                base * shape * zeta
            }
        };
        SpectralValue::tag(v)
    }
}

impl core::fmt::Display for SpectralDensityModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.kind {
            SpectralKind::AbInitio => write!(f, "ab_initio"),
            SpectralKind::Flat => write!(f, "flat"),
            SpectralKind::PowerLaw(n) => {
                write!(f, "power_law(n={n}, zeta={})", self.zeta_enabled)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadbandThreshold {
    pub value: f64,
    /// `1 - 4 Q tan 2φ0` was exactly zero.
    pub degenerate: bool,
}

/// `Ω_BB = 0.1 · min{1, |1 - 4 Q_c tan 2φ0|⁻¹}`.
pub fn broadband_threshold(p: &QnmParams) -> BroadbandThreshold {
    let denom = (1.0 - 4.0 * p.quality() * p.tan_2phi0()).abs();
    if denom == 0.0 {
        return BroadbandThreshold { value: 0.1, degenerate: true };
    }
    BroadbandThreshold { value: 0.1 * (1.0f64).min(1.0 / denom), degenerate: false }
}

/// First-order single-mode validity bound `|η^(1)| = 1/|2 Q_c tan 2φ0|`.
///
/// `None` when `φ0 = 0`: the bound is then not set by the phase.
pub fn eta_max_first_order(p: &QnmParams) -> Option<f64> {
    let x = 2.0 * p.quality() * p.tan_2phi0();
    if x == 0.0 { None } else { Some(1.0 / x.abs()) }
}

/// Prefactor of the coupling estimate, eV^-1/2 m^3/2.
pub const ETA_FIELD_PREFACTOR: f64 = 9.5e-14;

/// Normalized coupling estimate `|η_c| ≈ 9.5e-14 (d/d0) |f̃_c| / √(ħω_c)`.
///
/// `f_amp_modulus` must be in m^-3/2 and `omega_c` in eV; units are not checked.
pub fn eta_from_field(f_amp_modulus: f64, omega_c: f64, d_over_d0: f64) -> Result<f64> {
    for (name, v) in [("f_amp_modulus", f_amp_modulus), ("omega_c", omega_c), ("d_over_d0", d_over_d0)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(name, "must be finite and positive"));
        }
    }
    Ok(ETA_FIELD_PREFACTOR * d_over_d0 * f_amp_modulus / libm::sqrt(omega_c))
}

/// `A_c(ω) = ω / (2(ω̃_c - ω))`.
pub fn qnm_expansion_coefficient(p: &QnmParams, omega: f64) -> C64 {
    C64::new(omega, 0.0) / ((p.complex_frequency() - omega) * 2.0)
}

/// Lorentzian factor `(κ²/4)/((κ²/4) + (ω - ω_c)²)`.
fn lorentzian_shape(p: &QnmParams, omega: f64) -> f64 {
    let hw2 = p.gamma_c * p.gamma_c;
    let d = omega - p.omega_c;
    hw2 / (hw2 + d * d)
}

/// Weak-coupling single-QNM decay rate
/// `(4|g|²/κ_c)(ω0/ω_c) L(ω0) ζ_c(φ0, ω0)`, in the units of `g_dipole_mag` (and
/// `p`). Negative when `ζ_c < 0`.
pub fn purcell_rate_single(p: &QnmParams, g_dipole_mag: f64, omega0: f64) -> f64 {
    4.0 * g_dipole_mag * g_dipole_mag / p.kappa()
        * (omega0 / p.omega_c)
        * lorentzian_shape(p, omega0)
        * zeta_factor(p, omega0)
}

/// Multimode rate `Σ_μ (2 d² |f̃_μ|² / (ħ ε0)) Im{A_μ(ω0) e^{2iφ_μ}}` in s⁻¹.
///
/// Each mode carries its projected field (m^-3/2); its phase is `φ_μ`. `dipole`
/// is in C·m and `omega0` in eV.
pub fn purcell_rate_multimode(modes: &[(QnmParams, C64)], dipole: f64, omega0: f64) -> Result<f64> {
    if modes.is_empty() {
        return Err(Error::Empty("mode list"));
    }
    let rate = modes
        .iter()
        .map(|(p, field)| {
            let phase = C64::from_polar(1.0, 2.0 * field.arg());
            let im = (qnm_expansion_coefficient(p, omega0) * phase).im;
            2.0 * dipole * dipole * field.norm_sqr() / (HBAR * EPSILON_0) * im
        })
        .sum();
    Ok(rate)
}

/// Dipole-gauge coupling magnitude `|g̃_c^d| = ω_c |η_c|` (eV) from the projected
/// field, using the spatially specified amplitude `√(cos 2φ0) |f̃_c|`.
pub fn dipole_coupling_from_field(p: &QnmParams, field_modulus: f64, dipole: f64) -> f64 {
    let omega = ev_to_rad_per_s(p.omega_c);
    let eta = libm::sqrt(libm::cos(2.0 * p.phi0)) * dipole * field_modulus
        / libm::sqrt(2.0 * EPSILON_0 * HBAR * omega);
    p.omega_c * eta
}

/// `L_c(ω) = γ_peak (κ²/4)/((κ²/4) + (ω - ω_c)²)`.
pub fn lorentzian_norm(p: &QnmParams, gamma_at_peak: f64, omega: f64) -> f64 {
    gamma_at_peak * lorentzian_shape(p, omega)
}

/// Free-space emission rate `|d|² ω³ / (3π ε0 ħ c³)` in s⁻¹, with `dipole` in
/// C·m and `omega` in rad/s.
pub fn free_space_rate(dipole: f64, omega: f64) -> f64 {
    dipole * dipole * omega * omega * omega
        / (3.0 * PI * EPSILON_0 * HBAR * SPEED_OF_LIGHT * SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}

/// Free-space rate for a dipole of `d_over_d0` reference units at `omega_ev`,
/// returned in eV.
pub fn free_space_rate_ev(d_over_d0: f64, omega_ev: f64) -> f64 {
    rad_per_s_to_ev(free_space_rate(d_over_d0 * D0, ev_to_rad_per_s(omega_ev)))
}

/// Pole-approximated quantization factor `S_c ≈ cos(2φ0)`.
pub fn pole_quantization_factor(p: &QnmParams) -> f64 {
    libm::cos(2.0 * p.phi0)
}

/// Near-field detection scale `√(cos 2φ0)` of the spatially specified field.
pub fn detection_scale(p: &QnmParams) -> f64 {
    libm::sqrt(pole_quantization_factor(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tabulated(q: f64, tan2: f64) -> QnmParams {
        // only Q and tan(2φ0) matter for the criteria
        let omega_c = 1.0;
        QnmParams::from_tan_2phi0("t", omega_c, omega_c / (2.0 * q), tan2).unwrap()
    }

    fn round_sig(x: f64, sig: i32) -> f64 {
        let mag = libm::floor(libm::log10(x.abs()));
        let scale = libm::pow(10.0, (sig - 1) as f64 - mag);
        libm::round(x * scale) / scale
    }

    #[test]
    fn construction_guards() {
        assert!(QnmParams::new("x", 1.0, 0.0, 0.0).is_err());
        assert!(QnmParams::new("x", -1.0, 0.1, 0.0).is_err());
        assert!(QnmParams::new("x", 1.0, 0.1, 0.4).is_err());
        assert!(QnmParams::new("x", 1.0, 0.1, -0.39).is_ok());
        let p = QnmParams::new("ellipsoid", 2.620, 0.04996, 0.0).unwrap();
        assert_relative_eq!(p.quality(), 26.22, epsilon = 5e-3);
        assert_relative_eq!(p.kappa(), 0.09992);
    }

    #[test]
    fn zeta_examples() {
        let p = tabulated(26.22, 0.0191);
        assert_eq!(zeta_factor(&p, p.omega_c()), 1.0);
        let p0 = tabulated(26.22, 0.0);
        assert_eq!(zeta_factor(&p0, 1.7), 1.0);
        assert_relative_eq!(zeta_factor(&p, 1.1), 0.89984, epsilon = 1e-5);
    }

    #[test]
    fn zeta_is_affine_in_frequency() {
        let p = tabulated(26.22, 0.0191);
        let h = 0.01;
        for k in 0..20 {
            let w = 0.5 + 0.1 * k as f64;
            let second = zeta_factor(&p, w + h) - 2.0 * zeta_factor(&p, w) + zeta_factor(&p, w - h);
            assert!(second.abs() < 1e-13);
        }
    }

    #[test]
    fn spectral_density_examples() {
        let p = tabulated(26.22, 0.0191);
        let base = p.kappa() / (2.0 * PI);
        let ab = SpectralDensityModel::ab_initio(p.clone());
        let flat = SpectralDensityModel::flat(p.clone());
        assert_relative_eq!(ab.evaluate(1.0).value(), base, max_relative = 1e-15);
        assert_relative_eq!(flat.evaluate(0.3).value(), base);
        assert_relative_eq!(ab.evaluate(1.1).value() / base, 0.8180, epsilon = 1e-4);
        // all models agree on resonance
        for n in -2..=2 {
            for z in [false, true] {
                let m = SpectralDensityModel::power_law(p.clone(), n, z);
                assert_relative_eq!(m.evaluate(1.0).value(), base, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn ab_initio_identity_is_structural() {
        let p = tabulated(13.0, 0.03);
        let m = SpectralDensityModel::power_law(p.clone(), -1, true);
        assert_eq!(m.kind(), SpectralKind::AbInitio);
        let explicit = SpectralDensityModel::power_law(p.clone(), -1, false);
        assert_eq!(explicit.kind(), SpectralKind::PowerLaw(-1));
        for w in [0.7, 1.0, 1.3] {
            let a = SpectralDensityModel::ab_initio(p.clone()).evaluate(w).value();
            let b = (p.kappa() / (2.0 * PI)) * (p.omega_c() / w) * zeta_factor(&p, w);
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn spectral_density_tags_negative_values() {
        let p = tabulated(20.0, libm::tan(0.04));
        let m = SpectralDensityModel::ab_initio(p);
        assert!(!m.evaluate(1.2).is_negative());
        assert!(m.evaluate(3.0).is_negative());
    }

    #[test]
    fn tabulated_mode_criteria() {
        // (Q, tan 2φ0, |η^(1)|, Ω_BB)
        let rows = [
            (26.22, 0.0191, 1.0, 0.1),
            (159.3, 0.00708, 0.44, 0.028),
            (1549.0, -0.00435, 0.074, 0.0036),
            (1.012e5, -5.63e-5, 0.088, 0.0042),
            (9.34, 0.0237, 2.3, 0.1),
        ];
        for (q, t, eta1, bb) in rows {
            let p = tabulated(q, t);
            assert_relative_eq!(round_sig(eta_max_first_order(&p).unwrap(), 2), eta1, max_relative = 1e-12);
            assert_relative_eq!(round_sig(broadband_threshold(&p).value, 2), bb, max_relative = 1e-12);
        }
        let bowtie = broadband_threshold(&tabulated(159.3, 0.00708)).value;
        assert_relative_eq!(bowtie, 0.0285, epsilon = 1e-4);
        let ell = broadband_threshold(&tabulated(26.22, 0.0191)).value;
        assert_relative_eq!(ell, 0.0997, epsilon = 1e-4);
    }

    #[test]
    fn broadband_edge_cases() {
        let p = tabulated(20.0, 0.0);
        assert_eq!(broadband_threshold(&p).value, 0.1);
        assert_eq!(eta_max_first_order(&p), None);
        // Q = 0.5, tan 2φ0 = 0.5 makes 1 - 4 Q tan 2φ0 vanish
        let p = QnmParams::from_tan_2phi0("d", 1.0, 1.0, 0.5).unwrap();
        if 1.0 - 4.0 * p.quality() * p.tan_2phi0() == 0.0 {
            let t = broadband_threshold(&p);
            assert!(t.degenerate);
            assert_eq!(t.value, 0.1);
        }
        let p = QnmParams::from_tan_2phi0("d", 1.0, 2.0, 0.5).unwrap();
        let t = broadband_threshold(&p);
        // 4 Q tan = 4 * 0.25 * 0.5 = 0.5 → |1 - 0.5| ≤ 1 → 0.1
        assert_eq!(t.value, 0.1);
        assert!(!t.degenerate);
    }

    #[test]
    fn eta_from_field_examples() {
        let cyl = eta_from_field(9.009e10, 2.070, 1.0).unwrap();
        assert_relative_eq!(cyl, 0.00595, epsilon = 1e-5);
        let bowtie = eta_from_field(2.235e9, 0.7987, 1.0).unwrap();
        assert_relative_eq!(bowtie, 2.37e-4, epsilon = 1e-6);
        let ell = eta_from_field(2.670e11, 2.620, 1.0).unwrap();
        assert_relative_eq!(ell, 0.0157, epsilon = 1e-4);
        assert!(eta_from_field(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn eta_prefactor_matches_si_constants() {
        // d0 / sqrt(2 ε0 · 1 eV) in eV^-1/2 m^3/2
        let exact = D0 / libm::sqrt(2.0 * EPSILON_0 * crate::units::ELEMENTARY_CHARGE);
        assert_relative_eq!(exact, ETA_FIELD_PREFACTOR, max_relative = 0.03);
    }

    #[test]
    fn expansion_coefficient_examples() {
        let p = QnmParams::from_quality("q", 1.3, 26.0, 0.0).unwrap();
        let a = qnm_expansion_coefficient(&p, p.omega_c());
        assert_relative_eq!(a.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(a.im, p.quality(), max_relative = 1e-12);
        assert!(qnm_expansion_coefficient(&p, 1e-12).norm() < 1e-10);
        let im = (a * C64::from_polar(1.0, 2.0 * p.phi0())).im;
        assert_relative_eq!(im, p.quality(), max_relative = 1e-12);
    }

    #[test]
    fn expansion_coefficient_imaginary_part_closed_form() {
        // Im{A e^{2iφ}} = ω γ cos 2φ ζ / (2[(ω - ω_c)² + γ²])
        let p = QnmParams::from_quality("q", 2.0, 15.0, 0.03).unwrap();
        for w in [1.5, 1.9, 2.0, 2.2, 3.1] {
            let lhs = (qnm_expansion_coefficient(&p, w) * C64::from_polar(1.0, 2.0 * p.phi0())).im;
            let g = p.gamma_c();
            let rhs = w * g * libm::cos(2.0 * p.phi0()) * zeta_factor(&p, w)
                / (2.0 * ((w - p.omega_c()).powi(2) + g * g));
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn purcell_single_examples() {
        let p = QnmParams::from_quality("q", 1.0, 20.0, 0.02).unwrap();
        let g = 0.01;
        assert_relative_eq!(purcell_rate_single(&p, g, 1.0), 4.0 * g * g / p.kappa(), max_relative = 1e-14);
        let peak = purcell_rate_single(&p, g, p.omega_c());
        for w in [0.6, 0.9, 1.0, 1.05, 1.4] {
            let ratio = purcell_rate_single(&p, g, w) / lorentzian_norm(&p, peak, w);
            assert_relative_eq!(ratio, (w / p.omega_c()) * zeta_factor(&p, w), max_relative = 1e-12);
        }
        let p0 = p.with_phi0(0.0).unwrap();
        let peak0 = purcell_rate_single(&p0, g, 1.0);
        let r = purcell_rate_single(&p0, g, 1.2) / lorentzian_norm(&p0, peak0, 1.2);
        assert_relative_eq!(r, 1.2, max_relative = 1e-12);
    }

    #[test]
    fn multimode_reduces_to_single_mode() {
        let p = QnmParams::from_tan_2phi0("ell", 2.620, 0.04996, 0.0191).unwrap();
        let field = C64::from_polar(2.670e11, p.phi0());
        let d = D0;
        let g = dipole_coupling_from_field(&p, field.norm(), d);
        for w in [2.55, 2.60, 2.62, 2.66] {
            let multi = purcell_rate_multimode(&[(p.clone(), field)], d, w).unwrap();
            let single_ev = purcell_rate_single(&p, g, w);
            let single = ev_to_rad_per_s(single_ev);
            assert_relative_eq!(multi, single, max_relative = 1e-10);
        }
    }

    #[test]
    fn multimode_linearity_and_tail() {
        let p = QnmParams::from_quality("a", 1.0, 20.0, 0.01).unwrap();
        let f = C64::from_polar(1e10, 0.01);
        let one = purcell_rate_multimode(&[(p.clone(), f)], D0, 1.01).unwrap();
        let two = purcell_rate_multimode(&[(p.clone(), f), (p.clone(), f)], D0, 1.01).unwrap();
        assert_relative_eq!(two, 2.0 * one, max_relative = 1e-14);

        let far = QnmParams::from_quality("b", 1.4, 15.0, 0.003).unwrap();
        let ff = C64::from_polar(1e10, 0.003);
        let both = purcell_rate_multimode(&[(p.clone(), f), (far.clone(), ff)], D0, 1.0).unwrap();
        let main = purcell_rate_multimode(&[(p, f)], D0, 1.0).unwrap();
        let frac = (both - main).abs() / main;
        let bound = far.gamma_c() / (1.4 - 1.0);
        assert!(frac < bound, "far-mode fraction {frac} vs bound {bound}");
        assert!(purcell_rate_multimode(&[], D0, 1.0).is_err());
    }

    #[test]
    fn lorentzian_examples() {
        let p = QnmParams::from_quality("q", 1.0, 10.0, 0.0).unwrap();
        let k = p.kappa();
        assert_eq!(lorentzian_norm(&p, 3.0, 1.0), 3.0);
        assert_relative_eq!(lorentzian_norm(&p, 3.0, 1.0 + k / 2.0), 1.5, max_relative = 1e-14);
        assert_relative_eq!(lorentzian_norm(&p, 3.0, 1.0 - k / 2.0), 1.5, max_relative = 1e-14);
        assert_relative_eq!(lorentzian_norm(&p, 3.0, 1.0 + 3.0 * k), 3.0 / 37.0, max_relative = 1e-13);
    }

    #[test]
    fn free_space_rate_scaling_and_value() {
        let w = ev_to_rad_per_s(1.0);
        let g = free_space_rate(D0, w);
        assert_relative_eq!(free_space_rate(2.0 * D0, w), 4.0 * g, max_relative = 1e-14);
        assert_relative_eq!(free_space_rate(D0, 2.0 * w), 8.0 * g, max_relative = 1e-14);
        // independent evaluation with rounded constants: e = 1.602e-19, ħ = 1.0546e-34,
        // ε0 = 8.854e-12, c = 2.998e8 → 3.796e8 s^-1
        let (e, hb, eps, c) = (1.602e-19f64, 1.0546e-34f64, 8.854e-12f64, 2.998e8f64);
        let d = e * 1e-9;
        let om = e / hb;
        let oracle = d * d * om * om * om / (3.0 * PI * eps * hb * c * c * c);
        assert_relative_eq!(g, oracle, max_relative = 2e-3);
        assert_relative_eq!(g, 3.796e8, max_relative = 1e-3);
    }

    #[test]
    fn detection_scale_examples() {
        let p = QnmParams::from_quality("q", 1.0, 10.0, 0.0).unwrap();
        assert_eq!(detection_scale(&p), 1.0);
        let p = p.with_phi0(0.02).unwrap();
        assert_relative_eq!(detection_scale(&p), 0.99960, epsilon = 1e-5);
        let mut last = 1.0;
        for k in 1..40 {
            let phi = k as f64 * FRAC_PI_8 / 40.0;
            let s = pole_quantization_factor(&p.with_phi0(phi).unwrap());
            assert!(s < last);
            last = s;
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn broadband_threshold_bounded(q in 1.0f64..1e5, t in -0.05f64..0.05) {
                let p = tabulated(q, t);
                let bb = broadband_threshold(&p).value;
                prop_assert!(bb <= 0.1);
                let d = (1.0 - 4.0 * q * p.tan_2phi0()).abs();
                prop_assert_eq!(bb == 0.1, d <= 1.0);
            }

            #[test]
            fn purcell_over_lorentzian_identity(q in 2.0f64..500.0, phi in -0.3f64..0.3, w in 0.2f64..3.0) {
                let p = QnmParams::from_quality("q", 1.0, q, phi).unwrap();
                let peak = purcell_rate_single(&p, 0.02, 1.0);
                let ratio = purcell_rate_single(&p, 0.02, w) / lorentzian_norm(&p, peak, w);
                let expected = w * zeta_factor(&p, w);
                prop_assert!((ratio - expected).abs() <= 1e-12 * expected.abs().max(1e-300) || (ratio - expected).abs() < 1e-13);
            }
        }
    }
}
