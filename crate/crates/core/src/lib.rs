//! Dissipative single-mode cavity QED in the ultrastrong-coupling and broadband
//! regimes, with loss described by a quasinormal-mode (QNM) spectral density.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure numerics:
//! operator algebra on the truncated cavity ⊗ emitter space, the gauge-correct
//! system Hamiltonians, dressed-state transitions, the non-secular dressed-state
//! master equation with an incoherent pump, quantum-regression emission spectra,
//! two-Lorentzian linewidth fits, closed-form Purcell and broadband criteria,
//! perturbative Bloch–Siegert results, and the classical polarizability spectra
//! used for the bosonic (Hopfield) comparison.
//!
//! Conventions, fixed crate-wide:
//!
//! * Frequencies and rates are energies `ħω` in eV (so `ħ = 1`). SI units appear
//!   only in [`qnm::free_space_rate`], [`qnm::purcell_rate_multimode`] and
//!   [`qnm::eta_from_field`].
//! * Tensor products put the cavity factor first and the emitter (TLS or matter
//!   boson) second. The TLS basis is ordered `(|e⟩, |g⟩)`, so `σ_z|e⟩ = +|e⟩`.
//! * Density matrices are vectorized column-major: `ρ[r, c]` lives at `r + c·M`.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dressed;
pub mod error;
pub mod fit;
pub mod hamiltonian;
pub mod liouvillian;
pub mod opalg;
pub mod perturbative;
pub mod qnm;
pub mod simulation;
pub mod spectra;
pub mod units;

pub use error::{Error, Result, Warning};

/// Complex double used for every operator entry.
pub type C64 = num_complex::Complex<f64>;
