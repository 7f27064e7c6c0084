//! SI constants (CODATA 2018 exact or recommended values).

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reference dipole moment `d0 = 1 e·nm`, in C·m.
pub const D0: f64 = ELEMENTARY_CHARGE * 1e-9;

/// Angular frequency (rad/s) of a photon energy given in eV.
pub fn ev_to_rad_per_s(energy_ev: f64) -> f64 {
    energy_ev * ELEMENTARY_CHARGE / HBAR
}

/// Photon energy (eV) for an angular frequency in rad/s.
pub fn rad_per_s_to_ev(omega: f64) -> f64 {
    omega * HBAR / ELEMENTARY_CHARGE
}
