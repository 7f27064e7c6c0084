//! End-to-end pipeline: Hamiltonian → dressed states → master equation →
//! steady state → emission spectrum.

use alloc::vec::Vec;

use crate::dressed::{
    diagonalize, dipole_gauge_shifted_a, transitions, TransitionOperators, DEFAULT_KEEP_HOPFIELD, DEFAULT_KEEP_TLS,
    DROP_TOL,
};
use crate::fit::{fit_two_peaks, LineShape, LinewidthFit};
use crate::hamiltonian::{
    coulomb_single_mode, dipole_gauge_qrm, empty_cavity, hopfield_coulomb, CouplingConfig, HopfieldSpace, TlsSpace,
    DEFAULT_HOPFIELD_N, DEFAULT_N_FOCK,
};
use crate::liouvillian::{build, steady_state, BathCoupling, Liouvillian, NegativeRatePolicy, PumpModel, PumpTarget, SteadyState};
use crate::opalg::{annihilation, OperatorMatrix};
use crate::qnm::{QnmParams, SpectralDensityModel};
use crate::spectra::{ResolventSpectrum, SpectrumResult};
use crate::{Error, Result, Warning, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    #[default]
    Coulomb,
    Dipole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Cavity ⊗ two-level system.
    Tls(Gauge),
    /// Cavity ⊗ matter boson (Coulomb gauge); `eta` is the collective `λ_c`.
    Hopfield,
    /// Bare cavity; `eta` only enters detection.
    EmptyCavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralSpec {
    AbInitio,
    PowerLaw { exponent: i32, zeta: bool },
    Flat,
}

impl SpectralSpec {
    pub fn model(self, p: QnmParams) -> SpectralDensityModel {
        match self {
            SpectralSpec::AbInitio => SpectralDensityModel::ab_initio(p),
            SpectralSpec::PowerLaw { exponent, zeta } => SpectralDensityModel::power_law(p, exponent, zeta),
            SpectralSpec::Flat => SpectralDensityModel::flat(p),
        }
    }
}

/// Everything needed to produce one quantum emission spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumScenario {
    pub qnm: QnmParams,
    pub eta: C64,
    /// Emitter frequency, eV.
    pub omega0: f64,
    pub model: Model,
    pub n_fock: usize,
    pub n_matter: usize,
    pub keep: usize,
    pub bath: BathCoupling,
    pub spectral: SpectralSpec,
    pub pump: PumpModel,
    pub secular: bool,
    pub policy: NegativeRatePolicy,
}

impl SpectrumScenario {
    /// Resonant TLS defaults: Coulomb gauge, ab initio density, `Π = a`, cavity pump at `κ/100`.
    pub fn tls(qnm: QnmParams, eta: C64) -> Self {
        let omega0 = qnm.omega_c();
        Self {
            qnm,
            eta,
            omega0,
            model: Model::Tls(Gauge::Coulomb),
            n_fock: DEFAULT_N_FOCK,
            n_matter: DEFAULT_HOPFIELD_N,
            keep: DEFAULT_KEEP_TLS,
            bath: BathCoupling::A,
            spectral: SpectralSpec::AbInitio,
            pump: PumpModel::cavity(0.01),
            secular: false,
            policy: NegativeRatePolicy::Reject,
        }
    }

    pub fn hopfield(qnm: QnmParams, lambda: C64) -> Self {
        Self {
            model: Model::Hopfield,
            n_fock: DEFAULT_HOPFIELD_N,
            n_matter: DEFAULT_HOPFIELD_N,
            keep: DEFAULT_KEEP_HOPFIELD,
            ..Self::tls(qnm, lambda)
        }
    }

    pub fn empty_cavity(qnm: QnmParams) -> Self {
        Self { model: Model::EmptyCavity, keep: 6, ..Self::tls(qnm, C64::new(0.0, 0.0)) }
    }

    /// Detection amplitude; the bare cavity uses unit weight when `η = 0`.
    fn detection_eta(&self) -> C64 {
        if self.model == Model::EmptyCavity && self.eta.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            self.eta
        }
    }

    /// System Hamiltonian and transition operators at the given truncation.
    fn system(&self, n_fock: usize, n_matter: usize) -> Result<(OperatorMatrix, TransitionOperators)> {
        let cfg = CouplingConfig::new(self.eta, self.omega0, self.qnm.omega_c(), n_fock).with_matter(n_matter);
        let det_eta = self.detection_eta();
        match self.model {
            Model::Tls(gauge) => {
                if self.pump.target == PumpTarget::Matter {
                    return Err(Error::param("pump target", "matter drive requires the Hopfield model"));
                }
                let space = TlsSpace::new(n_fock)?;
                let (h, a) = match gauge {
                    Gauge::Coulomb => (coulomb_single_mode(&cfg)?, space.a()),
                    Gauge::Dipole => (dipole_gauge_qrm(&cfg)?, dipole_gauge_shifted_a(self.eta, n_fock)?),
                };
                Ok((h, TransitionOperators::cavity(a, det_eta)))
            }
            Model::Hopfield => {
                let space = HopfieldSpace::new(n_fock, n_matter)?;
                let h = hopfield_coulomb(&cfg, self.eta)?;
                let ops = TransitionOperators::cavity(space.a(), det_eta);
                let ops = match self.pump.target {
                    PumpTarget::Cavity => ops,
                    PumpTarget::Matter => ops.with_drive(space.matter_drive()),
                };
                Ok((h, ops))
            }
            Model::EmptyCavity => {
                if self.pump.target == PumpTarget::Matter {
                    return Err(Error::param("pump target", "matter drive requires the Hopfield model"));
                }
                Ok((
                    empty_cavity(self.qnm.omega_c(), n_fock)?,
                    TransitionOperators::cavity(annihilation(n_fock)?, det_eta),
                ))
            }
        }
    }

    /// Largest shift of the kept dressed energies when every truncation is
    /// doubled, eV.
    pub fn fock_convergence(&self) -> Result<f64> {
        let (h1, _) = self.system(self.n_fock, self.n_matter)?;
        let (h2, _) = self.system(2 * self.n_fock, 2 * self.n_matter)?;
        let keep = self.keep.min(h1.dim());
        let e1 = diagonalize(&h1, keep)?;
        let e2 = diagonalize(&h2, keep)?;
        Ok(e1
            .kept_energies()
            .iter()
            .zip(e2.kept_energies())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn prepare(&self) -> Result<PreparedSpectrum> {
        let (h, ops) = self.system(self.n_fock, self.n_matter)?;
        let keep = self.keep.min(h.dim());
        let ds = diagonalize(&h, keep)?;
        let ts = transitions(&ds, &ops, DROP_TOL)?;
        let sd = self.spectral.model(self.qnm.clone());
        let l = build(ds.kept_energies(), &ts, self.bath, &sd, Some(&self.pump), self.secular, self.policy)?;
        let ss = steady_state(&l)?;
        let c_det: Vec<C64> = ts.iter().map(|t| t.c_det).collect();
        let solver = ResolventSpectrum::new(&l, &ss, &ts, &c_det)?;
        let mut warnings = l.warnings.clone();
        warnings.extend(ss.warnings.iter().cloned());
        Ok(PreparedSpectrum {
            energies: ds.kept_energies().to_vec(),
            transitions: ts.len(),
            steady: ss,
            liouvillian: l,
            solver,
            warnings,
        })
    }

    pub fn spectrum(&self, omega: &[f64]) -> Result<SpectrumResult> {
        self.prepare()?.spectrum(omega)
    }
}

#[derive(Debug, Clone)]
pub struct PreparedSpectrum {
    /// Kept dressed energies, eV.
    pub energies: Vec<f64>,
    pub transitions: usize,
    pub steady: SteadyState,
    pub liouvillian: Liouvillian,
    pub solver: ResolventSpectrum,
    pub warnings: Vec<Warning>,
}

impl PreparedSpectrum {
    pub fn spectrum(&self, omega: &[f64]) -> Result<SpectrumResult> {
        if omega.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::param("omega_grid", "frequencies must be positive"));
        }
        let values = self.solver.evaluate_grid(omega)?;
        self.finish(omega.to_vec(), values)
    }

    /// Wraps externally computed values (for callers that evaluate the solver in parallel).
    pub fn finish(&self, omega: Vec<f64>, values: Vec<f64>) -> Result<SpectrumResult> {
        let mut s = SpectrumResult::raw(omega, values)?;
        let mut w = self.warnings.clone();
        w.append(&mut s.warnings);
        s.warnings = w;
        Ok(s)
    }
}

/// Window around the resonant lossless Hopfield polaritons `√(1 + λ²) ± λ`
/// (in units of `ω_c`), padded by `0.2 ω_c` on each side.
pub fn hopfield_window(p: &QnmParams, lambda_abs: f64) -> (f64, f64) {
    let centre = libm::sqrt(1.0 + lambda_abs * lambda_abs);
    let lo = (centre - lambda_abs - 0.2).max(crate::spectra::GRID_FLOOR);
    (p.omega_c() * lo, p.omega_c() * (centre + lambda_abs + 0.2))
}

/// Fit window that holds the two dominant polaritons `≈ ω_c(1 ± |η|)`.
pub fn polariton_window(p: &QnmParams, eta_abs: f64) -> (f64, f64) {
    let pad = 4.0 * p.kappa();
    let lo = p.omega_c() * (1.0 - 1.6 * eta_abs) - pad;
    let hi = p.omega_c() * (1.0 + 1.6 * eta_abs) + pad;
    (lo.max(1e-6), hi)
}

/// Two-peak fit over [`polariton_window`]. Non-secular spectra carry a dispersive
/// admixture from cross-transition terms, so [`LineShape::Dispersive`] is the
/// appropriate choice for them.
pub fn dominant_linewidths(s: &SpectrumResult, p: &QnmParams, eta_abs: f64, shape: LineShape) -> Result<LinewidthFit> {
    fit_two_peaks(&s.omega, &s.values, Some(polariton_window(p, eta_abs)), shape)
}
