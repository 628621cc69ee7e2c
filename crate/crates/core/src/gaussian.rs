//! Gaussian state representation, physicality checks, symplectic spectra and
//! von Neumann entropy.
//!
//! Conventions used throughout the crate:
//!
//! - quadratures are mode-interleaved, `(x₁, p₁, x₂, p₂, …)`;
//! - the vacuum covariance is the identity, so a thermal mode with mean
//!   photon number `n̄` has covariance `(2n̄ + 1)·I`;
//! - the displacement of mode `k` is `(⟨a + a†⟩, ⟨−i(a − a†)⟩)`, so a
//!   coherent state `|α⟩` has `d = (2 Re α, 2 Im α)`;
//! - entropies are in bits.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on eigenvalues of `V + iΩ`, and relative tolerance on
/// the symmetry residual of `V`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Symplectic eigenvalues further than this below one are reported as an
/// unphysical state rather than clamped.
pub const UNPHYSICAL_TOL: f64 = 1e-6;

pub const CHECK_SYMMETRY: &str = "V symmetric";
pub const CHECK_PSD: &str = "V+iΩ PSD";

/// `x log₂ x` with the limit `0 log₂ 0 = 0`.
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// The symplectic form `Ω = ⊕ [[0, 1], [−1, 0]]` on `m` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(modes: usize) -> Self {
        let mut matrix = DMatrix::zeros(2 * modes, 2 * modes);
        for k in 0..modes {
            matrix[(2 * k, 2 * k + 1)] = 1.0;
            matrix[(2 * k + 1, 2 * k)] = -1.0;
        }
        Self { modes, matrix }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `i·Ω` as a complex Hermitian matrix.
    pub fn times_i(&self) -> DMatrix<Complex64> {
        self.matrix.map(|x| Complex64::new(0.0, x))
    }
}

/// One failed physicality check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub measured: f64,
    pub threshold: f64,
}

/// Outcome of a physicality check. `ok` holds exactly when there are no
/// violations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    ok: bool,
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn has_violation(&self, check: &str) -> bool {
        self.violations.iter().any(|v| v.check == check)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(
                f,
                "{} violated (measured {:e}, threshold {:e})",
                v.check, v.measured, v.threshold
            )?;
        }
        Ok(())
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_hermitian_eigenvalue(h: DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn check_finite(what: &'static str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(idx) => Err(Error::NonFinite { what, idx }),
        None => Ok(()),
    }
}

/// Checks that `(V, d)` describes a physical `m`-mode Gaussian state.
pub fn validate_state(v: &DMatrix<f64>, d: &DVector<f64>, modes: usize) -> Result<ValidationReport> {
    validate_state_with_tol(v, d, modes, DEFAULT_TOL)
}

pub fn validate_state_with_tol(
    v: &DMatrix<f64>,
    d: &DVector<f64>,
    modes: usize,
    tol: f64,
) -> Result<ValidationReport> {
    if modes == 0 {
        return Err(Error::Shape("mode count must be positive".into()));
    }
    let n = 2 * modes;
    if v.nrows() != n || v.ncols() != n {
        return Err(Error::Shape(format!(
            "covariance is {}x{}, expected {n}x{n}",
            v.nrows(),
            v.ncols()
        )));
    }
    if d.len() != n {
        return Err(Error::Shape(format!(
            "displacement has length {}, expected {n}",
            d.len()
        )));
    }
    check_finite("covariance", v.as_slice())?;
    check_finite("displacement", d.as_slice())?;

    let mut violations = Vec::new();
    let residual = (v - v.transpose()).norm();
    let sym_threshold = tol * v.norm();
    if residual > sym_threshold {
        violations.push(Violation {
            check: CHECK_SYMMETRY.into(),
            measured: residual,
            threshold: sym_threshold,
        });
    }

    let sym = (v + v.transpose()) * 0.5;
    let h = sym.map(|x| Complex64::new(x, 0.0)) + SymplecticForm::new(modes).times_i();
    let min_eig = min_hermitian_eigenvalue(h);
    if min_eig < -tol {
        violations.push(Violation {
            check: CHECK_PSD.into(),
            measured: min_eig,
            threshold: -tol,
        });
    }
    Ok(ValidationReport::from_violations(violations))
}

/// An `m`-mode Gaussian state `ρ(V, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    cov: DMatrix<f64>,
    disp: DVector<f64>,
}

impl GaussianState {
    /// Builds a state after checking shape and physicality.
    pub fn new(cov: DMatrix<f64>, disp: DVector<f64>) -> Result<Self> {
        Self::with_tolerance(cov, disp, DEFAULT_TOL)
    }

    pub fn with_tolerance(cov: DMatrix<f64>, disp: DVector<f64>, tol: f64) -> Result<Self> {
        if !disp.len().is_multiple_of(2) || disp.is_empty() {
            return Err(Error::Shape(format!(
                "displacement length {} is not a positive even number",
                disp.len()
            )));
        }
        let report = validate_state_with_tol(&cov, &disp, disp.len() / 2, tol)?;
        if !report.is_ok() {
            return Err(Error::InvalidState(report));
        }
        Ok(Self { cov, disp })
    }

    /// Caller guarantees shape consistency and physicality.
    pub(crate) fn from_parts_unchecked(cov: DMatrix<f64>, disp: DVector<f64>) -> Self {
        debug_assert_eq!(cov.nrows(), disp.len());
        Self { cov, disp }
    }

    pub fn modes(&self) -> usize {
        self.disp.len() / 2
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.disp
    }

    /// The reduced covariance `V⁽ⁱ⁾` and displacement `d⁽ⁱ⁾` of mode `i`.
    pub fn mode_block(&self, i: usize) -> (Matrix2<f64>, Vector2<f64>) {
        let v = self.cov.fixed_view::<2, 2>(2 * i, 2 * i).into_owned();
        let d = self.disp.fixed_rows::<2>(2 * i).into_owned();
        (v, d)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_state(&self.cov, &self.disp, self.modes())
            .expect("shape fixed at construction")
    }
}

/// Symplectic eigenvalues `ν₁ ≥ … ≥ ν_m ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.values.iter().all(|&nu| nu <= 1.0 + tol)
    }

    /// `∏ νᵢ²`, which equals `det V`.
    pub fn product_squared(&self) -> f64 {
        self.values.iter().map(|nu| nu * nu).product()
    }
}

/// Raw symplectic eigenvalues of a positive definite covariance matrix,
/// descending, without clamping.
///
/// `iΩV` is similar to the Hermitian `i·V^{1/2} Ω V^{1/2}`, so its eigenvalue
/// moduli are the singular values of the real antisymmetric
/// `K = V^{1/2} Ω V^{1/2}`, each appearing twice.
pub fn symplectic_eigenvalues_general(cov: &DMatrix<f64>) -> Vec<f64> {
    let n = cov.nrows();
    let modes = n / 2;
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let k = &root * SymplecticForm::new(modes).matrix() * &root;
    let mut sv: Vec<f64> = k.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

/// Symplectic spectrum of a state. One-mode states use `ν = √det V`.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<SymplecticSpectrum> {
    let raw = if state.modes() == 1 {
        let v = state.covariance();
        let det = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
        vec![det.max(0.0).sqrt()]
    } else {
        symplectic_eigenvalues_general(state.covariance())
    };
    let mut values = Vec::with_capacity(raw.len());
    for nu in raw {
        if nu < 1.0 - UNPHYSICAL_TOL {
            return Err(Error::Unphysical(format!(
                "symplectic eigenvalue {nu} below 1"
            )));
        }
        values.push(if (1.0 - DEFAULT_TOL..1.0).contains(&nu) { 1.0 } else { nu });
    }
    Ok(SymplecticSpectrum { values })
}

/// Entropy in bits of a one-mode Gaussian state with symplectic eigenvalue `ν`.
pub fn g_function(nu: f64) -> Result<f64> {
    if !(nu >= 1.0) {
        return Err(Error::Domain(format!(
            "symplectic eigenvalue must be >= 1, got {nu}"
        )));
    }
    Ok(xlog2x((nu + 1.0) / 2.0) - xlog2x((nu - 1.0) / 2.0))
}

/// Von Neumann entropy `Σᵢ g(νᵢ)` in bits.
pub fn entropy(state: &GaussianState) -> Result<f64> {
    spectrum_entropy(&symplectic_eigenvalues(state)?)
}

pub fn spectrum_entropy(spectrum: &SymplecticSpectrum) -> Result<f64> {
    spectrum.values().iter().map(|&nu| g_function(nu)).sum()
}

/// `a ⊗ b`: direct sum of covariances, concatenated displacements.
pub fn tensor(a: &GaussianState, b: &GaussianState) -> GaussianState {
    let (na, nb) = (a.cov.nrows(), b.cov.nrows());
    let mut cov = DMatrix::zeros(na + nb, na + nb);
    cov.view_mut((0, 0), (na, na)).copy_from(&a.cov);
    cov.view_mut((na, na), (nb, nb)).copy_from(&b.cov);
    let disp = DVector::from_iterator(na + nb, a.disp.iter().chain(b.disp.iter()).copied());
    GaussianState::from_parts_unchecked(cov, disp)
}

/// Tensor product of a non-empty sequence of states.
pub fn tensor_all<'a, I>(states: I) -> Option<GaussianState>
where
    I: IntoIterator<Item = &'a GaussianState>,
{
    let mut iter = states.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, s| tensor(&acc, s)))
}

/// Reduced state on the given (zero-based) modes, in the order given.
pub fn reduce(state: &GaussianState, modes: &[usize]) -> Result<GaussianState> {
    if modes.is_empty() {
        return Err(Error::Usage("empty mode set".into()));
    }
    for (i, &k) in modes.iter().enumerate() {
        if k >= state.modes() {
            return Err(Error::Usage(format!(
                "mode index {k} out of range for {} modes",
                state.modes()
            )));
        }
        if modes[..i].contains(&k) {
            return Err(Error::Usage(format!("duplicate mode index {k}")));
        }
    }
    let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| state.cov[(idx[r], idx[c])]);
    let disp = DVector::from_fn(idx.len(), |r, _| state.disp[idx[r]]);
    Ok(GaussianState::from_parts_unchecked(cov, disp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vacuum(m: usize) -> GaussianState {
        GaussianState::new(DMatrix::identity(2 * m, 2 * m), DVector::zeros(2 * m)).unwrap()
    }

    fn iso(x: f64) -> GaussianState {
        GaussianState::new(DMatrix::identity(2, 2) * x, DVector::zeros(2)).unwrap()
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let w = SymplecticForm::new(3);
        let sq = w.matrix() * w.matrix();
        assert_eq!(sq, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(w.matrix().transpose(), -w.matrix().clone());
    }

    #[test]
    fn validate_examples() {
        let r = validate_state(&DMatrix::identity(2, 2), &DVector::zeros(2), 1).unwrap();
        assert!(r.is_ok());

        let r = validate_state(&(DMatrix::identity(2, 2) * 0.5), &DVector::zeros(2), 1).unwrap();
        assert!(!r.is_ok());
        let v = &r.violations()[0];
        assert_eq!(v.check, CHECK_PSD);
        assert!((v.measured + 0.5).abs() < 1e-12);

        let r = validate_state(&(DMatrix::identity(2, 2) * 3.0), &DVector::zeros(2), 1).unwrap();
        assert!(r.is_ok());
    }

    #[test]
    fn validate_rejects_asymmetric() {
        let v = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 2.0]);
        let r = validate_state(&v, &DVector::zeros(2), 1).unwrap();
        assert!(r.has_violation(CHECK_SYMMETRY));
    }

    #[test]
    fn validate_errors() {
        assert!(matches!(
            validate_state(&DMatrix::identity(3, 3), &DVector::zeros(2), 1),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            validate_state(&DMatrix::identity(2, 2), &DVector::zeros(4), 1),
            Err(Error::Shape(_))
        ));
        let mut v = DMatrix::identity(2, 2);
        v[(0, 1)] = f64::NAN;
        assert!(matches!(
            validate_state(&v, &DVector::zeros(2), 1),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            GaussianState::new(DMatrix::identity(2, 2) * 0.5, DVector::zeros(2)),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn spectra_examples() {
        assert_eq!(symplectic_eigenvalues(&iso(3.0)).unwrap().values(), &[3.0]);
        let e2 = 1f64.exp().powi(2);
        let sq = GaussianState::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![e2, 1.0 / e2])),
            DVector::zeros(2),
        )
        .unwrap();
        let nu = symplectic_eigenvalues(&sq).unwrap().values()[0];
        assert!((nu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn general_path_agrees_with_one_mode_closed_form() {
        let v = DMatrix::from_row_slice(2, 2, &[2.3, 0.4, 0.4, 1.7]);
        let closed = (2.3f64 * 1.7 - 0.16).sqrt();
        let general = symplectic_eigenvalues_general(&v);
        assert!((general[0] - closed).abs() < 1e-12);
    }

    #[test]
    fn g_values() {
        assert_eq!(g_function(1.0).unwrap(), 0.0);
        assert!((g_function(3.0).unwrap() - 2.0).abs() < 1e-15);
        // 40-digit reference for 1.5·log₂1.5 − 0.5·log₂0.5
        assert!((g_function(2.0).unwrap() - 1.377_443_751_081_734_3).abs() < 1e-14);
        assert!(matches!(g_function(0.999), Err(Error::Domain(_))));
        assert!(g_function(f64::NAN).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&vacuum(1)).unwrap(), 0.0);
        assert!((entropy(&iso(3.0)).unwrap() - 2.0).abs() < 1e-12);
        let two = tensor(&iso(3.0), &iso(3.0));
        assert!((entropy(&two).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_and_reduce() {
        let vv = tensor(&vacuum(1), &vacuum(1));
        assert_eq!(vv, vacuum(2));

        let t = tensor(&iso(3.0), &iso(5.0));
        assert_eq!(
            t.covariance(),
            &DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 3.0, 5.0, 5.0]))
        );
        assert_eq!(reduce(&t, &[1]).unwrap(), iso(5.0));
        assert_eq!(reduce(&t, &[0]).unwrap(), iso(3.0));
        assert_eq!(reduce(&iso(2.0), &[0]).unwrap(), iso(2.0));

        assert!(matches!(reduce(&t, &[]), Err(Error::Usage(_))));
        assert!(matches!(reduce(&t, &[0, 0]), Err(Error::Usage(_))));
        assert!(matches!(reduce(&t, &[2]), Err(Error::Usage(_))));
    }

    #[test]
    fn reduce_reorders_modes() {
        let t = tensor(&iso(3.0), &iso(5.0));
        let swapped = reduce(&t, &[1, 0]).unwrap();
        assert_eq!(swapped, tensor(&iso(5.0), &iso(3.0)));
    }
}
