//! Dressed-state master equation: unitary part, bath dissipator, incoherent pump,
//! steady state.
//!
//! Density matrices on the `M` kept levels are vectorized column-major,
//! `vec(ρ)[r + c·M] = ρ[r, c]`, so a superoperator is an `M² × M²` matrix.
//!
//! For transitions `α, α'` the bath term is
//! `K[σ_α ρ σ_α'† − σ_α'† σ_α ρ] + K*[σ_α' ρ σ_α† − ρ σ_α† σ_α']` with
//! `K = π c_α c_α'* Λ²(ω_α)`, so a single channel decays at `Γ_α = 2π|c_α|²Λ²(ω_α)`
//! (the full width of its line).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dressed::{Transition, TransitionSet, DROP_TOL};
use crate::qnm::{QnmParams, SpectralDensityModel, SpectralValue};
use crate::{Error, Result, Warning, C64};

/// Steady-state eigenvalues below this are reported.
pub const PSD_TOLERANCE: f64 = -1e-8;
/// Relative size of QR diagonal entries counted as zero when sizing the null space.
pub const NULLITY_TOLERANCE: f64 = 1e-10;

/// Cavity operator coupled to the reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BathCoupling {
    /// `a`.
    #[default]
    A,
    /// `Q = a + a†`.
    Q,
    /// `P = i(a† − a)`.
    P,
    /// `(Q + P)/√2`.
    QPlusP,
    /// `(Q − P)/√2`.
    QMinusP,
}

impl BathCoupling {
    pub const ALL: [BathCoupling; 5] =
        [BathCoupling::A, BathCoupling::Q, BathCoupling::P, BathCoupling::QPlusP, BathCoupling::QMinusP];

    /// Weights `(u, v)` with `Π = u a + v a†`.
    pub fn weights(self) -> (C64, C64) {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        match self {
            BathCoupling::A => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            BathCoupling::Q => (C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
            BathCoupling::P => (C64::new(0.0, -1.0), C64::new(0.0, 1.0)),
            BathCoupling::QPlusP => (C64::new(s, -s), C64::new(s, s)),
            BathCoupling::QMinusP => (C64::new(s, s), C64::new(s, -s)),
        }
    }

    /// `⟨j|Π|k⟩`.
    pub fn element(self, t: &Transition) -> C64 {
        let (u, v) = self.weights();
        u * t.c_a + v * t.c_adag
    }

    pub fn name(self) -> &'static str {
        match self {
            BathCoupling::A => "a",
            BathCoupling::Q => "Q",
            BathCoupling::P => "P",
            BathCoupling::QPlusP => "Q+P",
            BathCoupling::QMinusP => "Q-P",
        }
    }
}

/// What to do when `Λ²(ω_α) < 0` for a transition that couples to the bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeRatePolicy {
    #[default]
    Reject,
    ClampZero,
    Allow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PumpTarget {
    /// Raising elements of `a`, `Λ²_inc ∝ ω_c/ω`.
    #[default]
    Cavity,
    /// Raising elements of `i(b − b†)`, `Λ²_inc ∝ ω²/ω_c²`.
    Matter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpModel {
    pub target: PumpTarget,
    /// `γ_inc / κ_c`.
    pub fraction: f64,
}

impl PumpModel {
    pub fn cavity(fraction: f64) -> Self {
        Self { target: PumpTarget::Cavity, fraction }
    }

    pub fn matter(fraction: f64) -> Self {
        Self { target: PumpTarget::Matter, fraction }
    }

    /// `Λ²_inc(ω)`, already scaled by `γ_inc/κ_c`.
    pub fn density(&self, p: &QnmParams, omega: f64) -> f64 {
        let shape = match self.target {
            PumpTarget::Cavity => p.omega_c() / omega,
            PumpTarget::Matter => (omega * omega) / (p.omega_c() * p.omega_c()),
        };
        self.fraction * p.kappa() * shape / (2.0 * PI)
    }
}

/// One additive superoperator contribution.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    pub matrix: DMatrix<C64>,
    pub warnings: Vec<Warning>,
}

impl SuperOperator {
    pub fn zeros(levels: usize) -> Self {
        let n = levels * levels;
        Self { matrix: DMatrix::zeros(n, n), warnings: Vec::new() }
    }

    pub fn levels(&self) -> usize {
        libm::round(libm::sqrt(self.matrix.nrows() as f64)) as usize
    }
}

#[inline]
fn vec_index(r: usize, c: usize, m: usize) -> usize {
    r + c * m
}

/// `coef[L ρ L'† − L'† L ρ] + coef*[L' ρ L† − ρ L† L']`, `L = |p⟩⟨q|`, `L' = |p'⟩⟨q'|`.
fn add_pair(s: &mut DMatrix<C64>, m: usize, coef: C64, (p, q): (usize, usize), (pp, qp): (usize, usize)) {
    let conj = coef.conj();
    s[(vec_index(p, pp, m), vec_index(q, qp, m))] += coef;
    s[(vec_index(pp, p, m), vec_index(qp, q, m))] += conj;
    if p == pp {
        for c in 0..m {
            s[(vec_index(qp, c, m), vec_index(q, c, m))] -= coef;
            s[(vec_index(c, qp, m), vec_index(c, q, m))] -= conj;
        }
    }
}

/// Bath dissipator over all ordered transition pairs (only `α = α'` when `secular`).
pub fn dissipator(
    ts: &TransitionSet,
    pi_op: BathCoupling,
    sd: &SpectralDensityModel,
    secular: bool,
    policy: NegativeRatePolicy,
) -> Result<SuperOperator> {
    let m = ts.levels;
    let mut out = SuperOperator::zeros(m);
    let mut channels: Vec<(Transition, C64, f64)> = Vec::with_capacity(ts.len());
    let mut negative = Vec::new();
    for t in ts.iter() {
        let c = pi_op.element(t);
        if c.norm() < DROP_TOL {
            continue;
        }
        let density = match sd.evaluate(t.omega) {
            SpectralValue::NonNegative(v) => v,
            SpectralValue::Negative(v) => match policy {
                NegativeRatePolicy::Reject => {
                    negative.push(t.omega);
                    continue;
                }
                NegativeRatePolicy::ClampZero => {
                    out.warnings.push(Warning::ClampedNegativeRate { omega: t.omega, density: v });
                    0.0
                }
                NegativeRatePolicy::Allow => {
                    out.warnings.push(Warning::AllowedNegativeRate { omega: t.omega, density: v });
                    v
                }
            },
        };
        channels.push((*t, c, density));
    }
    if !negative.is_empty() {
        return Err(Error::NegativeRates { omegas: negative });
    }
    for (a_idx, (ta, ca, density)) in channels.iter().enumerate() {
        if *density == 0.0 {
            continue;
        }
        for (b_idx, (tb, cb, _)) in channels.iter().enumerate() {
            if secular && a_idx != b_idx {
                continue;
            }
            let coef = *ca * cb.conj() * (PI * density);
            add_pair(&mut out.matrix, m, coef, (ta.j, ta.k), (tb.j, tb.k));
        }
    }
    Ok(out)
}

/// Incoherent pump generated by `Σ_α c_α* σ_α†`, the adjoint of the drive operator's
/// lowering part.
pub fn incoherent_pump(ts: &TransitionSet, pump: &PumpModel, params: &QnmParams, secular: bool) -> Result<SuperOperator> {
    if !(pump.fraction >= 0.0 && pump.fraction.is_finite()) {
        return Err(Error::param("pump fraction", "must be finite and non-negative"));
    }
    let m = ts.levels;
    let mut out = SuperOperator::zeros(m);
    if pump.fraction == 0.0 {
        return Ok(out);
    }
    let channels: Vec<&Transition> = ts.iter().filter(|t| t.c_drive.norm() >= DROP_TOL).collect();
    for (a_idx, ta) in channels.iter().enumerate() {
        let density = pump.density(params, ta.omega);
        for (b_idx, tb) in channels.iter().enumerate() {
            if secular && a_idx != b_idx {
                continue;
            }
            // raising operator Σ c_α* σ_α†, so the weights are conjugated
            let coef = ta.c_drive.conj() * tb.c_drive * (PI * density);
            add_pair(&mut out.matrix, m, coef, (ta.k, ta.j), (tb.k, tb.j));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    levels: usize,
    matrix: DMatrix<C64>,
    pub warnings: Vec<Warning>,
}

impl Liouvillian {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `L(ρ)` for an `M × M` matrix.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let m = self.levels;
        let v = DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        DMatrix::from_column_slice(m, m, out.as_slice())
    }

    /// Largest `|Tr L(E_rc)|` over the matrix units, relative to `max |L|`.
    /// Zero for an exactly trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let m = self.levels;
        let scale = self.matrix.camax().max(f64::MIN_POSITIVE);
        (0..m * m)
            .map(|col| (0..m).map(|r| self.matrix[(vec_index(r, r, m), col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
            / scale
    }
}

/// `L(ρ) = −i[diag(E), ρ] + Σ terms`.
pub fn assemble(energies: &[f64], terms: &[SuperOperator]) -> Result<Liouvillian> {
    let m = energies.len();
    if m == 0 {
        return Err(Error::Empty("energies"));
    }
    let n = m * m;
    let mut matrix = DMatrix::<C64>::zeros(n, n);
    let mut warnings = Vec::new();
    for term in terms {
        if term.matrix.nrows() != n || term.matrix.ncols() != n {
            return Err(Error::InvalidDimension(alloc::format!(
                "superoperator is {}x{}, expected {n}x{n}",
                term.matrix.nrows(),
                term.matrix.ncols()
            )));
        }
        matrix += &term.matrix;
        warnings.extend(term.warnings.iter().cloned());
    }
    for c in 0..m {
        for r in 0..m {
            let i = vec_index(r, c, m);
            matrix[(i, i)] += C64::new(0.0, -(energies[r] - energies[c]));
        }
    }
    Ok(Liouvillian { levels: m, matrix, warnings })
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DMatrix<C64>,
    pub min_eigenvalue: f64,
    pub warnings: Vec<Warning>,
}

impl SteadyState {
    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn vectorized(&self) -> DVector<C64> {
        DVector::from_column_slice(self.rho.as_slice())
    }
}

/// Dimension of the numerical null space of `L`.
pub fn nullity(l: &Liouvillian) -> usize {
    let qr = l.matrix.clone().col_piv_qr();
    let r = qr.r();
    let scale = r[(0, 0)].norm();
    if scale == 0.0 {
        return r.nrows();
    }
    (0..r.nrows()).filter(|&i| r[(i, i)].norm() <= NULLITY_TOLERANCE * scale).count()
}

/// Solve `L(ρ) = 0`, `Tr ρ = 1` with the trace constraint replacing the first row.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let null = nullity(l);
    if null != 1 {
        return Err(Error::DegenerateSteadyState(null));
    }
    let m = l.levels;
    let n = m * m;
    let mut a = l.matrix.clone();
    for c in 0..n {
        a[(0, c)] = C64::new(0.0, 0.0);
    }
    for r in 0..m {
        a[(0, vec_index(r, r, m))] = C64::new(1.0, 0.0);
    }
    let mut rhs = DVector::<C64>::zeros(n);
    rhs[0] = C64::new(1.0, 0.0);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("bordered steady-state system is singular".into()))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem("steady-state solution is not finite".into()));
    }
    let raw = DMatrix::from_column_slice(m, m, x.as_slice());
    let mut rho = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let tr = rho.trace();
    rho /= tr;
    let min_eigenvalue = SymmetricEigen::new(rho.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if min_eigenvalue < PSD_TOLERANCE {
        warnings.push(Warning::NonPositiveSteadyState { min_eigenvalue });
    }
    Ok(SteadyState { rho, min_eigenvalue, warnings })
}

/// Builds the full Liouvillian for a transition set: bath dissipator plus optional pump.
pub fn build(
    energies: &[f64],
    ts: &TransitionSet,
    pi_op: BathCoupling,
    sd: &SpectralDensityModel,
    pump: Option<&PumpModel>,
    secular: bool,
    policy: NegativeRatePolicy,
) -> Result<Liouvillian> {
    let mut terms = vec![dissipator(ts, pi_op, sd, secular, policy)?];
    if let Some(pump) = pump {
        terms.push(incoherent_pump(ts, pump, sd.params(), secular)?);
    }
    assemble(energies, &terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dressed::{diagonalize, transitions, TransitionOperators};
    use crate::hamiltonian::{coulomb_single_mode, empty_cavity, CouplingConfig, TlsSpace};
    use crate::opalg::annihilation;
    use approx::assert_relative_eq;

    fn cavity_set(n_fock: usize, keep: usize) -> (Vec<f64>, TransitionSet) {
        let ds = diagonalize(&empty_cavity(1.0, n_fock).unwrap(), keep).unwrap();
        let ops = TransitionOperators::cavity(annihilation(n_fock).unwrap(), C64::new(0.0, 0.0));
        (ds.kept_energies().to_vec(), transitions(&ds, &ops, DROP_TOL).unwrap())
    }

    fn tls_set(eta: C64, keep: usize) -> (Vec<f64>, TransitionSet) {
        let cfg = CouplingConfig::new(eta, 1.0, 1.0, 14);
        let ds = diagonalize(&coulomb_single_mode(&cfg).unwrap(), keep).unwrap();
        let ops = TransitionOperators::cavity(TlsSpace::new(14).unwrap().a(), eta);
        (ds.kept_energies().to_vec(), transitions(&ds, &ops, DROP_TOL).unwrap())
    }

    fn params(phi0: f64) -> QnmParams {
        QnmParams::from_quality("c", 1.0, 20.0, phi0).unwrap()
    }

    fn random_hermitian(m: usize, seed: u64) -> DMatrix<C64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(m, m, |_, _| C64::new(next(), next()));
        &a + a.adjoint()
    }

    #[test]
    fn single_channel_decays_at_kappa() {
        let (e, ts) = cavity_set(4, 2);
        let p = params(0.0);
        let l = build(&e, &ts, BathCoupling::A, &SpectralDensityModel::flat(p.clone()), None, true, NegativeRatePolicy::Reject)
            .unwrap();
        let mut rho = DMatrix::<C64>::zeros(2, 2);
        rho[(1, 1)] = C64::new(1.0, 0.0);
        let d = l.apply(&rho);
        assert_relative_eq!(d[(0, 0)].re, p.kappa(), max_relative = 1e-12);
        assert_relative_eq!(d[(1, 1)].re, -p.kappa(), max_relative = 1e-12);
        // coherence decays at κ/2
        let mut coh = DMatrix::<C64>::zeros(2, 2);
        coh[(0, 1)] = C64::new(1.0, 0.0);
        let dc = l.apply(&coh);
        assert_relative_eq!(dc[(0, 1)].re, -p.kappa() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn ab_initio_matches_flat_for_empty_cavity() {
        let (e, ts) = cavity_set(6, 4);
        let p = params(0.02);
        let flat = dissipator(&ts, BathCoupling::A, &SpectralDensityModel::flat(p.clone()), false, NegativeRatePolicy::Reject)
            .unwrap();
        let ab = dissipator(&ts, BathCoupling::A, &SpectralDensityModel::ab_initio(p), false, NegativeRatePolicy::Reject)
            .unwrap();
        assert!((flat.matrix - ab.matrix).camax() < 1e-14);
        let _ = e;
    }

    #[test]
    fn trace_is_preserved() {
        for (eta, secular) in [(0.0, false), (0.1, false), (0.4, true), (0.4, false)] {
            let (e, ts) = tls_set(C64::from_polar(eta, 0.3), 8);
            let p = params(0.0);
            for pi_op in BathCoupling::ALL {
                let l = build(
                    &e,
                    &ts,
                    pi_op,
                    &SpectralDensityModel::ab_initio(p.clone()),
                    Some(&PumpModel::cavity(0.01)),
                    secular,
                    NegativeRatePolicy::ClampZero,
                )
                .unwrap();
                for seed in 0..3 {
                    let rho = random_hermitian(8, seed);
                    assert!(l.apply(&rho).trace().norm() < 1e-12 * l.matrix().camax().max(1.0));
                }
            }
        }
    }

    #[test]
    fn generator_preserves_hermiticity() {
        let (e, ts) = tls_set(C64::from_polar(0.3, 0.8), 8);
        let l = build(
            &e,
            &ts,
            BathCoupling::QPlusP,
            &SpectralDensityModel::ab_initio(params(0.01)),
            Some(&PumpModel::cavity(0.01)),
            false,
            NegativeRatePolicy::ClampZero,
        )
        .unwrap();
        let d = l.apply(&random_hermitian(8, 9));
        assert!((&d - d.adjoint()).camax() < 1e-12);
    }

    #[test]
    fn secular_is_diagonal_restriction() {
        let (_, ts) = tls_set(C64::new(0.2, 0.0), 6);
        let sd = SpectralDensityModel::flat(params(0.0));
        let full = dissipator(&ts, BathCoupling::A, &sd, false, NegativeRatePolicy::Reject).unwrap();
        let sec = dissipator(&ts, BathCoupling::A, &sd, true, NegativeRatePolicy::Reject).unwrap();
        let mut diag_only = SuperOperator::zeros(ts.levels);
        for t in ts.iter() {
            let single = TransitionSet { transitions: vec![*t], levels: ts.levels };
            diag_only.matrix += dissipator(&single, BathCoupling::A, &sd, false, NegativeRatePolicy::Reject).unwrap().matrix;
        }
        assert!((&sec.matrix - &diag_only.matrix).camax() == 0.0);
        assert!((&full.matrix - &sec.matrix).camax() > 1e-6);
    }

    #[test]
    fn unitary_part_only() {
        let e = [0.0, 0.7, 1.9];
        let l = assemble(&e, &[]).unwrap();
        let eig = l.matrix().clone().schur().eigenvalues().unwrap();
        for z in eig.iter() {
            assert!(z.re.abs() < 1e-14);
            let w = z.im.abs();
            assert!([0.0, 0.7, 1.2, 1.9].iter().any(|x| (w - x).abs() < 1e-12), "{w}");
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(assemble(&[0.0, 1.0], &[SuperOperator::zeros(3)]).is_err());
    }

    #[test]
    fn zero_pump_is_zero() {
        let (_, ts) = cavity_set(5, 4);
        let s = incoherent_pump(&ts, &PumpModel::cavity(0.0), &params(0.0), false).unwrap();
        assert_eq!(s.matrix.camax(), 0.0);
        assert!(incoherent_pump(&ts, &PumpModel::cavity(-1.0), &params(0.0), false).is_err());
    }

    #[test]
    fn unpumped_steady_state_is_ground() {
        let (e, ts) = tls_set(C64::new(0.2, 0.0), 8);
        let l = build(&e, &ts, BathCoupling::A, &SpectralDensityModel::flat(params(0.0)), None, false, NegativeRatePolicy::Reject)
            .unwrap();
        let ss = steady_state(&l).unwrap();
        assert_relative_eq!(ss.rho[(0, 0)].re, 1.0, epsilon = 1e-10);
        assert!(ss.rho.iter().enumerate().skip(1).all(|(_, z)| z.norm() < 1e-10));
    }

    #[test]
    fn pumped_cavity_photon_number() {
        let (e, ts) = cavity_set(10, 8);
        let p = params(0.0);
        let l = build(
            &e,
            &ts,
            BathCoupling::A,
            &SpectralDensityModel::ab_initio(p),
            Some(&PumpModel::cavity(0.01)),
            false,
            NegativeRatePolicy::Reject,
        )
        .unwrap();
        let ss = steady_state(&l).unwrap();
        let n_bar: f64 = (0..8).map(|n| n as f64 * ss.rho[(n, n)].re).sum();
        assert!((n_bar - 0.01 / 0.99).abs() < 1e-8, "{n_bar}");
        let off: f64 = (0..8).flat_map(|r| (0..8).map(move |c| (r, c))).filter(|(r, c)| r != c).map(|(r, c)| ss.rho[(r, c)].norm()).fold(0.0, f64::max);
        assert!(off < 1e-12);
    }

    #[test]
    fn steady_state_invariants() {
        for phi0 in [-0.02, 0.0, 0.02] {
            let (e, ts) = tls_set(C64::new(0.3, 0.0), 10);
            let l = build(
                &e,
                &ts,
                BathCoupling::A,
                &SpectralDensityModel::ab_initio(params(phi0)),
                Some(&PumpModel::cavity(0.01)),
                false,
                NegativeRatePolicy::ClampZero,
            )
            .unwrap();
            let ss = steady_state(&l).unwrap();
            assert!((ss.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
            assert!((&ss.rho - ss.rho.adjoint()).camax() < 1e-10);
            assert!(ss.min_eigenvalue > PSD_TOLERANCE);
            assert!(l.apply(&ss.rho).camax() < 1e-9);
        }
    }

    #[test]
    fn negative_rate_policies() {
        let (e, ts) = tls_set(C64::new(0.3, 0.0), 12);
        let sd = SpectralDensityModel::ab_initio(params(0.02));
        match dissipator(&ts, BathCoupling::A, &sd, false, NegativeRatePolicy::Reject) {
            Err(Error::NegativeRates { omegas }) => assert!(omegas.iter().all(|w| *w > 1.6)),
            other => panic!("expected negative-rate error, got {other:?}"),
        }
        let clamped = dissipator(&ts, BathCoupling::A, &sd, false, NegativeRatePolicy::ClampZero).unwrap();
        assert!(clamped.warnings.iter().all(|w| matches!(w, Warning::ClampedNegativeRate { .. })));
        assert!(!clamped.warnings.is_empty());
        let allowed = dissipator(&ts, BathCoupling::A, &sd, false, NegativeRatePolicy::Allow).unwrap();
        assert!(matches!(allowed.warnings[0], Warning::AllowedNegativeRate { .. }));
        let _ = e;
    }

    #[test]
    fn spectral_abscissa_is_non_positive() {
        let (e, ts) = tls_set(C64::new(0.3, 0.0), 6);
        let l = build(
            &e,
            &ts,
            BathCoupling::A,
            &SpectralDensityModel::ab_initio(params(0.0)),
            Some(&PumpModel::cavity(0.01)),
            true,
            NegativeRatePolicy::Reject,
        )
        .unwrap();
        let eig = l.matrix().clone().schur().eigenvalues().unwrap();
        let abscissa = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(abscissa <= 1e-10, "{abscissa}");
    }

    #[test]
    fn dressed_state_phases_do_not_change_populations() {
        let (e, ts) = tls_set(C64::from_polar(0.3, 0.4), 8);
        let p = params(0.02);
        let pops = |ts: &TransitionSet| -> Vec<f64> {
            let l = build(
                &e,
                ts,
                BathCoupling::QPlusP,
                &SpectralDensityModel::ab_initio(p.clone()),
                Some(&PumpModel::cavity(0.01)),
                false,
                NegativeRatePolicy::ClampZero,
            )
            .unwrap();
            let ss = steady_state(&l).unwrap();
            (0..8).map(|i| ss.rho[(i, i)].re).collect()
        };
        let mut rotated = ts.clone();
        for t in rotated.transitions.iter_mut() {
            let f = C64::from_polar(1.0, 0.7 * (t.k * t.k) as f64 - 0.7 * (t.j * t.j) as f64);
            t.c_a *= f;
            t.c_adag *= f;
            t.c_drive *= f;
        }
        for (x, y) in pops(&ts).iter().zip(pops(&rotated).iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn bath_weights_reproduce_operators() {
        let a = annihilation(4).unwrap();
        let ad = a.adjoint();
        let q = &a + &ad;
        let p = (&ad - &a).scale(C64::new(0.0, 1.0));
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let expected = [a.clone(), q.clone(), p.clone(), (&q + &p).scale_real(s), (&q - &p).scale_real(s)];
        for (variant, op) in BathCoupling::ALL.iter().zip(expected.iter()) {
            let (u, v) = variant.weights();
            let built = &a.scale(u) + &ad.scale(v);
            assert!(built.max_abs_diff(op) < 1e-15, "{}", variant.name());
        }
    }
}
