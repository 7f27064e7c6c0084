//! Dressed-state basis and transition matrix elements.
//!
//! A transition `α = (j, k)` has `j < k` and `ω_α = E_k − E_j > 0`; it stands for
//! the lowering operator `σ_α = |j⟩⟨k|`. Hermitian-conjugate partners are
//! implicit.

use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::opalg::{kron, pauli, OperatorMatrix, PauliAxis, HERMITIAN_TOLERANCE};
use crate::{Error, Result, C64};

pub const DEFAULT_KEEP_TLS: usize = 24;
pub const DEFAULT_KEEP_HOPFIELD: usize = 30;
/// Transitions at or below this frequency (eV) are treated as degenerate.
pub const OMEGA_FLOOR: f64 = 1e-9;
/// Transitions whose matrix elements are all below this magnitude are dropped.
pub const DROP_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DressedSystem {
    energies: Vec<f64>,
    states: DMatrix<C64>,
    kept: usize,
}

impl DressedSystem {
    /// All eigenenergies, ascending, ground state at zero.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn kept_energies(&self) -> &[f64] {
        &self.energies[..self.kept]
    }

    /// Eigenvectors as columns.
    pub fn states(&self) -> &DMatrix<C64> {
        &self.states
    }

    pub fn kept(&self) -> usize {
        self.kept
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `⟨j|O|k⟩` for `j, k` among the kept levels.
    pub fn project(&self, op: &OperatorMatrix) -> Result<DMatrix<C64>> {
        if op.dim() != self.dim() {
            return Err(Error::InvalidDimension(alloc::format!(
                "operator dimension {} does not match Hilbert space dimension {}",
                op.dim(),
                self.dim()
            )));
        }
        let u = self.states.columns(0, self.kept);
        Ok(u.adjoint() * op.matrix() * u)
    }
}

/// Full Hermitian eigensolve; the lowest `keep` levels feed the transition set.
pub fn diagonalize(h: &OperatorMatrix, keep: usize) -> Result<DressedSystem> {
    h.check_hermitian(HERMITIAN_TOLERANCE)?;
    let d = h.dim();
    if keep < 2 || keep > d {
        return Err(Error::InvalidDimension(alloc::format!(
            "keep must lie in [2, {d}], got {keep}"
        )));
    }
    let eig = SymmetricEigen::try_new(h.hermitian_part().into_matrix(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigensolver("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e0 = eig.eigenvalues[order[0]];
    let energies = order.iter().map(|&i| eig.eigenvalues[i] - e0).collect();
    let states = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(DressedSystem { energies, states, kept: keep })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub j: usize,
    pub k: usize,
    /// `ω_k − ω_j`, eV.
    pub omega: f64,
    /// `⟨j|a|k⟩`.
    pub c_a: C64,
    /// `⟨j|a†|k⟩`, needed for quadrature bath operators.
    pub c_adag: C64,
    /// `⟨j|x_det|k⟩`.
    pub c_det: C64,
    /// `⟨j|drive|k⟩`.
    pub c_drive: C64,
}

/// Operators whose dressed-basis elements are tabulated per transition.
#[derive(Debug, Clone)]
pub struct TransitionOperators {
    pub a: OperatorMatrix,
    pub det: OperatorMatrix,
    pub drive: OperatorMatrix,
}

impl TransitionOperators {
    /// Cavity annihilation `a`, detection `iη a − iη* a†`, cavity drive `a`.
    pub fn cavity(a: OperatorMatrix, eta: C64) -> Self {
        let det = detection_operator(&a, eta);
        Self { drive: a.clone(), a, det }
    }

    pub fn with_drive(mut self, drive: OperatorMatrix) -> Self {
        self.drive = drive;
        self
    }
}

/// `x_det = iη a − iη* a†`.
pub fn detection_operator(a: &OperatorMatrix, eta: C64) -> OperatorMatrix {
    let i = C64::new(0.0, 1.0);
    &a.scale(i * eta) - &a.adjoint().scale(i * eta.conj())
}

#[derive(Debug, Clone, Default)]
pub struct TransitionSet {
    pub transitions: Vec<Transition>,
    /// Number of kept dressed levels the transitions index into.
    pub levels: usize,
}

impl TransitionSet {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Transition> {
        self.transitions.iter()
    }
}

pub fn transitions(ds: &DressedSystem, ops: &TransitionOperators, drop_tol: f64) -> Result<TransitionSet> {
    let a = ds.project(&ops.a)?;
    let det = ds.project(&ops.det)?;
    let drive = ds.project(&ops.drive)?;
    let e = ds.kept_energies();
    let m = ds.kept();
    let mut out = Vec::new();
    for j in 0..m {
        for k in (j + 1)..m {
            let omega = e[k] - e[j];
            if omega <= OMEGA_FLOOR {
                continue;
            }
            let t = Transition {
                j,
                k,
                omega,
                c_a: a[(j, k)],
                c_adag: a[(k, j)].conj(),
                c_det: det[(j, k)],
                c_drive: drive[(j, k)],
            };
            let largest = t.c_a.norm().max(t.c_adag.norm()).max(t.c_det.norm()).max(t.c_drive.norm());
            if largest >= drop_tol {
                out.push(t);
            }
        }
    }
    Ok(TransitionSet { transitions: out, levels: m })
}

/// `⟨j|iη a − iη* a†|k⟩` per transition, from the stored `a` and `a†` elements.
pub fn detection_operator_elements(ts: &TransitionSet, eta: C64) -> Vec<C64> {
    let i = C64::new(0.0, 1.0);
    ts.iter().map(|t| i * eta * t.c_a - i * eta.conj() * t.c_adag).collect()
}

/// Dipole-gauge cavity operator `a + iη* σ_x` on cavity ⊗ TLS.
pub fn dipole_gauge_shifted_a(eta: C64, n_fock: usize) -> Result<OperatorMatrix> {
    let a = kron(&crate::opalg::annihilation(n_fock)?, &OperatorMatrix::identity(2));
    let shift = kron(&OperatorMatrix::identity(n_fock), &pauli(PauliAxis::X));
    Ok(&a + &shift.scale(C64::new(0.0, 1.0) * eta.conj()))
}
