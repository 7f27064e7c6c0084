//! Dense operator algebra on truncated Fock ⊗ TLS spaces.

use alloc::format;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;

use crate::{Error, Result, C64};

/// Relative tolerance used when an operator must be Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// A dense `D × D` complex operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<C64>);

impl OperatorMatrix {
    /// Wraps a square matrix with finite entries.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidDimension(format!(
                "operator must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Diagonal operator with real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j { C64::new(diag[i], 0.0) } else { C64::zero() }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |H - H†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                defect = defect.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        defect
    }

    /// Checks Hermiticity against `rel_tol · max|H|`.
    pub fn check_hermitian(&self, rel_tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        let tolerance = rel_tol * self.max_abs().max(f64::MIN_POSITIVE);
        if defect > tolerance {
            Err(Error::NotHermitian { defect, tolerance })
        } else {
            Ok(())
        }
    }

    /// `(H + H†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Largest entrywise distance to another operator of the same size.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-&self.0)
    }
}

/// Bosonic lowering operator on `n_fock` levels: `⟨m-1|a|m⟩ = √m`.
pub fn annihilation(n_fock: usize) -> Result<OperatorMatrix> {
    if n_fock < 2 {
        return Err(Error::InvalidDimension(format!(
            "Fock truncation must be at least 2, got {n_fock}"
        )));
    }
    let mut m = DMatrix::zeros(n_fock, n_fock);
    for k in 1..n_fock {
        m[(k - 1, k)] = C64::new(libm::sqrt(k as f64), 0.0);
    }
    Ok(OperatorMatrix(m))
}

/// Bosonic raising operator `a†`.
pub fn creation(n_fock: usize) -> Result<OperatorMatrix> {
    annihilation(n_fock).map(|a| a.adjoint())
}

/// Number operator `a†a = diag(0, 1, …, n_fock-1)`.
pub fn number(n_fock: usize) -> Result<OperatorMatrix> {
    if n_fock < 2 {
        return Err(Error::InvalidDimension(format!(
            "Fock truncation must be at least 2, got {n_fock}"
        )));
    }
    let diag: alloc::vec::Vec<f64> = (0..n_fock).map(|k| k as f64).collect();
    Ok(OperatorMatrix::from_real_diagonal(&diag))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Pauli matrix in the `(|e⟩, |g⟩)` basis.
pub fn pauli(axis: PauliAxis) -> OperatorMatrix {
    let (o, l, i) = (C64::zero(), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let m = match axis {
        PauliAxis::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        PauliAxis::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        PauliAxis::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    };
    OperatorMatrix(m)
}

/// TLS raising operator `σ+ = |e⟩⟨g|`.
pub fn sigma_plus() -> OperatorMatrix {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    OperatorMatrix(m)
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix(a.0.kronecker(&b.0))
}

/// Spectral calculus `f(H) = U f(Λ) U†` for Hermitian `H`.
pub fn hermitian_function<F>(h: &OperatorMatrix, f: F) -> Result<OperatorMatrix>
where
    F: Fn(f64) -> f64,
{
    h.check_hermitian(HERMITIAN_TOLERANCE)?;
    let eig = SymmetricEigen::new(h.hermitian_part().0);
    let u = &eig.eigenvectors;
    let n = h.dim();
    let mut scaled = u.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let fl = f(lambda);
        for i in 0..n {
            scaled[(i, j)] *= fl;
        }
    }
    Ok(OperatorMatrix(scaled * u.adjoint()))
}
