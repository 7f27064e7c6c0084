//! Resonant (`ω0 = ω_c`) Bloch–Siegert estimates for the two dominant polaritons.

use crate::qnm::QnmParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsResult {
    pub e_minus: f64,
    pub e_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
}

/// `E_± = ω0 ± |η| ω0 √(1 + 9|η|²/4)`, relative to the ground state.
pub fn bs_energies(omega0: f64, eta_abs: f64) -> (f64, f64) {
    let split = omega0 * eta_abs * libm::sqrt(1.0 + 2.25 * eta_abs * eta_abs);
    (omega0 - split, omega0 + split)
}

/// `Γ_± = (κ/2)[1 ± (|η|/2)(1 − 4Q tan 2φ0)]`; `+` is the blue peak.
pub fn bs_linewidths(p: &QnmParams, eta_abs: f64) -> (f64, f64) {
    let half = 0.5 * p.kappa();
    let asym = 0.5 * eta_abs * (1.0 - 4.0 * p.quality() * p.tan_2phi0());
    (half * (1.0 - asym), half * (1.0 + asym))
}

pub fn bloch_siegert(p: &QnmParams, eta_abs: f64) -> BsResult {
    let (e_minus, e_plus) = bs_energies(p.omega_c(), eta_abs);
    let (gamma_minus, gamma_plus) = bs_linewidths(p, eta_abs);
    BsResult { e_minus, e_plus, gamma_minus, gamma_plus }
}

/// Phase with `4Q tan 2φ0* = 1`, where the two linewidths stay equal.
pub fn symmetric_phase(quality: f64) -> f64 {
    0.5 * libm::atan(1.0 / (4.0 * quality))
}

/// Small-angle form `1/(8Q)`.
pub fn symmetric_phase_small_angle(quality: f64) -> f64 {
    1.0 / (8.0 * quality)
}
