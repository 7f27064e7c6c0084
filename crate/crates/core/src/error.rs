use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operator is not Hermitian: max|H - H^dag| = {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("operator entries must be finite")]
    NonFinite,

    #[error(
        "unphysical negative decay rates at transition frequencies {omegas:?} eV: \
         the single-mode spectral density is negative there (single-mode breakdown)"
    )]
    NegativeRates { omegas: Vec<f64> },

    #[error("steady state is not unique: null space of the Liouvillian has dimension {0}")]
    DegenerateSteadyState(usize),

    #[error("linear solve failed: {0}")]
    SingularSystem(String),

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),

    #[error("peaks unresolved: {0}")]
    PeaksUnresolved(String),

    #[error("fit did not converge (residual rms {residual_rms:.3e}): {reason}")]
    FitNotConverged { residual_rms: f64, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors that come from the physics of the model (as opposed to
    /// bad input or a numerical failure).
    pub fn is_physics(&self) -> bool {
        matches!(self, Error::NegativeRates { .. } | Error::DegenerateSteadyState(_))
    }

    /// True for numerical failures (singular solves, non-convergence).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem(_)
                | Error::Eigensolver(_)
                | Error::PeaksUnresolved(_)
                | Error::FitNotConverged { .. }
        )
    }
}

/// Non-fatal conditions recorded alongside results.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// `|1 - 4 Q tan 2φ0| = 0`, the broadband threshold fell back to 0.1.
    DegenerateBroadbandDenominator,
    /// A negative spectral density at this transition frequency was set to zero.
    ClampedNegativeRate { omega: f64, density: f64 },
    /// A negative spectral density was kept as is (study mode).
    AllowedNegativeRate { omega: f64, density: f64 },
    /// The steady state has an eigenvalue below the PSD tolerance.
    NonPositiveSteadyState { min_eigenvalue: f64 },
    /// Spectrum values dipped below `-1e-8 · max`.
    NegativeSpectrum { min_value: f64 },
    /// A grid point sat on the bare dipole pole and was skipped.
    SkippedPolePoint { omega: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DegenerateBroadbandDenominator => {
                write!(f, "|1 - 4 Q tan(2 phi0)| = 0; broadband threshold left at 0.1")
            }
            Warning::ClampedNegativeRate { omega, density } => write!(
                f,
                "negative spectral density {density:.3e} at omega = {omega:.6} eV clamped to zero"
            ),
            Warning::AllowedNegativeRate { omega, density } => write!(
                f,
                "negative spectral density {density:.3e} at omega = {omega:.6} eV kept (allow mode)"
            ),
            Warning::NonPositiveSteadyState { min_eigenvalue } => write!(
                f,
                "steady state has eigenvalue {min_eigenvalue:.3e} below -1e-8"
            ),
            Warning::NegativeSpectrum { min_value } => {
                write!(f, "spectrum has negative excursion {min_value:.3e}")
            }
            Warning::SkippedPolePoint { omega } => {
                write!(f, "grid point omega = {omega} eV sits on the bare pole; skipped")
            }
        }
    }
}
