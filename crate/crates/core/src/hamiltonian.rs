//! Single-mode system Hamiltonians on the truncated cavity ⊗ emitter space.
//!
//! * [`coulomb_single_mode`]: Coulomb gauge with the exact `cos Φ̂`, `sin Φ̂`
//!   coupling, `Φ̂ = 2(η a + η* a†)`.
//! * [`dipole_gauge_qrm`]: dipole-gauge quantum Rabi model with
//!   `g^d = -i ω_c η`.
//! * [`hopfield_coulomb`]: Coulomb-gauge Hopfield model (cavity ⊗ matter boson).
//!
//! The longitudinal coupling is not modeled, and `χ_cc = ω_c` throughout. Energies
//! are in eV. Constant offsets are irrelevant: dressed energies are measured from
//! the ground state.

use crate::opalg::{annihilation, hermitian_function, kron, number, pauli, OperatorMatrix, PauliAxis};
use crate::{Error, Result, C64};

/// Default Fock truncation for TLS runs with `|η| ≤ 0.5`.
pub const DEFAULT_N_FOCK: usize = 20;
/// Default cavity and matter truncations for Hopfield runs.
pub const DEFAULT_HOPFIELD_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    /// Complex normalized coupling `η_c`.
    pub eta: C64,
    /// Emitter (TLS or matter oscillator) frequency, eV.
    pub omega0: f64,
    /// Cavity frequency, eV.
    pub omega_c: f64,
    pub n_fock: usize,
    /// Matter-boson truncation (Hopfield only).
    pub n_matter: usize,
}

impl CouplingConfig {
    pub fn new(eta: C64, omega0: f64, omega_c: f64, n_fock: usize) -> Self {
        Self { eta, omega0, omega_c, n_fock, n_matter: DEFAULT_HOPFIELD_N }
    }

    pub fn with_matter(mut self, n_matter: usize) -> Self {
        self.n_matter = n_matter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_fock < 2 {
            return Err(Error::InvalidDimension(alloc::format!(
                "n_fock must be at least 2, got {}",
                self.n_fock
            )));
        }
        if !(self.eta.norm() < 1.0) {
            return Err(Error::param("eta", "|eta| must be below 1 (deep-strong coupling excluded)"));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::param("omega0", "must be finite and positive"));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::param("omega_c", "must be finite and positive"));
        }
        Ok(())
    }

    /// Coulomb-gauge JC-limit coupling `g^C = η ω0`.
    pub fn coulomb_coupling(&self) -> C64 {
        self.eta * self.omega0
    }

    /// Dipole-gauge coupling `g^d = -i ω_c η`.
    pub fn dipole_coupling(&self) -> C64 {
        C64::new(0.0, -1.0) * self.eta * self.omega_c
    }
}

/// Operators of the cavity ⊗ TLS space.
#[derive(Debug, Clone)]
pub struct TlsSpace {
    n_fock: usize,
}

impl TlsSpace {
    pub fn new(n_fock: usize) -> Result<Self> {
        annihilation(n_fock)?;
        Ok(Self { n_fock })
    }

    pub fn dim(&self) -> usize {
        2 * self.n_fock
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    /// `a ⊗ I₂`.
    pub fn a(&self) -> OperatorMatrix {
        kron(&annihilation(self.n_fock).expect("validated"), &OperatorMatrix::identity(2))
    }

    /// `I_F ⊗ σ`.
    pub fn sigma(&self, axis: PauliAxis) -> OperatorMatrix {
        kron(&OperatorMatrix::identity(self.n_fock), &pauli(axis))
    }

    /// Parity `exp(iπ a†a) ⊗ σ_z`.
    pub fn parity(&self) -> OperatorMatrix {
        let signs: alloc::vec::Vec<f64> =
            (0..self.n_fock).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        kron(&OperatorMatrix::from_real_diagonal(&signs), &pauli(PauliAxis::Z))
    }
}

/// Operators of the cavity ⊗ matter-boson space.
#[derive(Debug, Clone)]
pub struct HopfieldSpace {
    n_fock: usize,
    n_matter: usize,
}

impl HopfieldSpace {
    pub fn new(n_fock: usize, n_matter: usize) -> Result<Self> {
        annihilation(n_fock)?;
        annihilation(n_matter)?;
        Ok(Self { n_fock, n_matter })
    }

    pub fn dim(&self) -> usize {
        self.n_fock * self.n_matter
    }

    /// `a ⊗ I_M`.
    pub fn a(&self) -> OperatorMatrix {
        kron(&annihilation(self.n_fock).expect("validated"), &OperatorMatrix::identity(self.n_matter))
    }

    /// `I_F ⊗ b`.
    pub fn b(&self) -> OperatorMatrix {
        kron(&OperatorMatrix::identity(self.n_fock), &annihilation(self.n_matter).expect("validated"))
    }

    /// Matter drive operator `i(b - b†)`.
    pub fn matter_drive(&self) -> OperatorMatrix {
        let b = self.b();
        (&b - &b.adjoint()).scale(C64::new(0.0, 1.0))
    }
}

fn field_phase(eta: C64, a: &OperatorMatrix) -> OperatorMatrix {
    (&a.scale(eta) + &a.adjoint().scale(eta.conj())).scale_real(2.0)
}

/// `ω_c a†a + (ω0/2)[cos Φ̂ σ_z + sin Φ̂ σ_y]`, `Φ̂ = 2(η a + η* a†)`.
pub fn coulomb_single_mode(cfg: &CouplingConfig) -> Result<OperatorMatrix> {
    cfg.validate()?;
    let a = annihilation(cfg.n_fock)?;
    let phi = field_phase(cfg.eta, &a);
    let cos_phi = hermitian_function(&phi, libm::cos)?;
    let sin_phi = hermitian_function(&phi, libm::sin)?;
    let cavity = kron(&number(cfg.n_fock)?.scale_real(cfg.omega_c), &OperatorMatrix::identity(2));
    let coupling = &kron(&cos_phi, &pauli(PauliAxis::Z)) + &kron(&sin_phi, &pauli(PauliAxis::Y));
    Ok(&cavity + &coupling.scale_real(0.5 * cfg.omega0))
}

/// `ω_c a†a + (ω0/2)σ_z + (g a + g* a†)σ_x` with `g = -i ω_c η`.
pub fn dipole_gauge_qrm(cfg: &CouplingConfig) -> Result<OperatorMatrix> {
    cfg.validate()?;
    let space = TlsSpace::new(cfg.n_fock)?;
    let a = space.a();
    let g = cfg.dipole_coupling();
    let cavity = kron(&number(cfg.n_fock)?.scale_real(cfg.omega_c), &OperatorMatrix::identity(2));
    let tls = space.sigma(PauliAxis::Z).scale_real(0.5 * cfg.omega0);
    let field = &a.scale(g) + &a.adjoint().scale(g.conj());
    let coupling = &field * &space.sigma(PauliAxis::X);
    Ok(&(&cavity + &tls) + &coupling)
}

/// Coulomb-gauge Hopfield Hamiltonian on cavity ⊗ matter:
/// `ω_c a†a + ω0 b†b + ω0 X̂² + iω0 (b - b†) X̂`, `X̂ = λ a + λ* a†`.
pub fn hopfield_coulomb(cfg: &CouplingConfig, lambda_c: C64) -> Result<OperatorMatrix> {
    if cfg.n_fock < 2 || cfg.n_matter < 2 {
        return Err(Error::InvalidDimension(alloc::format!(
            "Hopfield truncations must be at least 2, got n_fock = {}, n_matter = {}",
            cfg.n_fock,
            cfg.n_matter
        )));
    }
    if !(cfg.omega0 > 0.0 && cfg.omega_c > 0.0) {
        return Err(Error::param("omega", "frequencies must be positive"));
    }
    let space = HopfieldSpace::new(cfg.n_fock, cfg.n_matter)?;
    let a = space.a();
    let b = space.b();
    let x = &a.scale(lambda_c) + &a.adjoint().scale(lambda_c.conj());
    let cavity = &a.adjoint() * &a;
    let matter = &b.adjoint() * &b;
    let mut h = &cavity.scale_real(cfg.omega_c) + &matter.scale_real(cfg.omega0);
    h = &h + &(&x * &x).scale_real(cfg.omega0);
    h = &h + &(&space.matter_drive() * &x).scale_real(cfg.omega0);
    Ok(h)
}

/// Bare cavity `ω_c a†a` on `n_fock` levels.
pub fn empty_cavity(omega_c: f64, n_fock: usize) -> Result<OperatorMatrix> {
    Ok(number(n_fock)?.scale_real(omega_c))
}

/// Collective coupling in the thermodynamic limit, `λ_c = √N η′`.
pub fn lambda_from_dicke(eta_single: C64, n_tls: usize) -> Result<C64> {
    if n_tls == 0 {
        return Err(Error::param("n_tls", "must be at least 1"));
    }
    Ok(eta_single * libm::sqrt(n_tls as f64))
}
