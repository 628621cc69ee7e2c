//! Truncated number-basis density matrices of one-mode Gaussian states.
//!
//! Matrix elements come from the Gaussian integral over the characteristic
//! function. Writing the integrand exponent as a quadratic form
//! `−½ xᵗ A x + B x` in six real variables with sources `u, v`, the
//! generating function is
//!
//! ```text
//! J(u, v) = (2π)³ / √det A · exp ξ(u, v),
//! ξ = ½ [ (u, v) B₂ (u, v)ᵗ + B₁ (u, v)ᵗ + B₀ ],
//! ρ_mn = 8 / √det A · ∂ᵐ_u ∂ⁿ_v exp ξ |₀ / √(m! n!).
//! ```
//!
//! Because `ξ` is quadratic, the derivatives obey a three-term recurrence,
//! which is run here on the factorial-normalised table
//! `h(m, n) = ∂ᵐ_u ∂ⁿ_v exp ξ |₀ / √(m! n!)` so that nothing overflows.

use nalgebra::{DMatrix, Matrix2, SMatrix, SymmetricEigen, Vector2};
use num_complex::Complex64;

use crate::coherence::thermal_entropy;
use crate::error::{Error, Result};
use crate::gaussian::{xlog2x, GaussianState};

pub type Matrix6c = SMatrix<Complex64, 6, 6>;

/// Largest supported cutoff.
pub const MAX_CUTOFF: usize = 200;

/// Trace deficit above which a matrix is flagged as under-resolved.
pub const TRACE_DEFICIT_WARN: f64 = 0.01;

/// Largest trace deficit accepted by [`oracle_coherence`].
pub const COHERENCE_MAX_DEFICIT: f64 = 1e-4;

/// Most negative eigenvalue tolerated before a truncated matrix is rejected.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-8;

const DET_A_REL_TOL: f64 = 1e-9;
const XI_CROSS_CHECK_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn one_mode_blocks(state: &GaussianState) -> Result<(Matrix2<f64>, Vector2<f64>)> {
    if state.modes() != 1 {
        return Err(Error::Usage(format!(
            "oracle is one-mode only, got {} modes",
            state.modes()
        )));
    }
    Ok(state.mode_block(0))
}

/// Closed form `det A = 16 (det V + V₁₁ + V₂₂ + 1)`.
pub fn det_a_closed_form(v: &Matrix2<f64>) -> f64 {
    16.0 * (v.determinant() + v[(0, 0)] + v[(1, 1)] + 1.0)
}

/// The 6×6 complex symmetric matrix of the quadratic form in
/// `(x_α, y_α, x_β, y_β, x_λ, y_λ)`, and its determinant.
///
/// The determinant is computed by LU and must agree with
/// [`det_a_closed_form`] to 1e-9 relative.
pub fn build_a(v: &Matrix2<f64>) -> Result<(Matrix6c, f64)> {
    let (v11, v12, v22) = (v[(0, 0)], 0.5 * (v[(0, 1)] + v[(1, 0)]), v[(1, 1)]);
    let o = c(0.0);
    let one = c(1.0);
    let two = c(2.0);
    #[rustfmt::skip]
    let a = Matrix6c::from_row_slice(&[
        two,  o,    -one, -I,   one,          I,
        o,    two,  I,    -one, -I,           one,
        -one, I,    two,  o,    -one,         I,
        -I,   -one, o,    two,  -I,           -one,
        one,  -I,   -one, -I,   c(1.0 + v22), c(-v12),
        I,    one,  I,    -one, c(-v12),      c(1.0 + v11),
    ]);
    let det = a.lu().determinant();
    let closed = det_a_closed_form(v);
    let scale = closed.abs().max(1.0);
    if (det.re - closed).abs() > DET_A_REL_TOL * scale || det.im.abs() > DET_A_REL_TOL * scale {
        return Err(Error::Consistency(format!(
            "numeric det A = {det} disagrees with closed form {closed}"
        )));
    }
    if !(det.re > 0.0) {
        return Err(Error::Consistency(format!("det A = {det} is not positive")));
    }
    Ok((a, det.re))
}

/// Source row vector `B(u, v) = (u, iu, v, −iv, −id₂, id₁)`.
pub fn source_vector(d: &Vector2<f64>, u: f64, v: f64) -> SMatrix<Complex64, 1, 6> {
    SMatrix::<Complex64, 1, 6>::from_row_slice(&[
        c(u),
        I * u,
        c(v),
        -I * v,
        -I * d[1],
        I * d[0],
    ])
}

/// `½ B A⁻¹ Bᵗ` by direct linear solve.
pub fn xi_by_solve(a: &Matrix6c, d: &Vector2<f64>, u: f64, v: f64) -> Result<Complex64> {
    let b = source_vector(d, u, v);
    let x = a
        .lu()
        .solve(&b.transpose())
        .ok_or_else(|| Error::Consistency("A is singular".into()))?;
    Ok(0.5 * (b * x)[(0, 0)])
}

/// Coefficients of the exponent `ξ(u, v)` of the generating function.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticFormCoefficients {
    pub b2: [[Complex64; 2]; 2],
    pub b1: [Complex64; 2],
    pub b0: Complex64,
    pub det_a: f64,
}

impl QuadraticFormCoefficients {
    /// `ξ(u, v)` from the coefficients.
    pub fn xi(&self, u: f64, v: f64) -> Complex64 {
        let x = [u, v];
        let mut quad = c(0.0);
        for r in 0..2 {
            for s in 0..2 {
                quad += self.b2[r][s] * x[r] * x[s];
            }
        }
        0.5 * (quad + self.b1[0] * u + self.b1[1] * v + self.b0)
    }

    /// `max(|(B₁)₁|, |(B₁)₂|, |(B₂)₁₁|, |(B₂)₂₂|)`: all four vanish exactly
    /// when `ρ₀₁ = ρ₀₂ = ρ₁₀ = ρ₂₀ = 0`.
    pub fn diagonality_measure(&self) -> f64 {
        [self.b1[0], self.b1[1], self.b2[0][0], self.b2[1][1]]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Closed-form `B₂`, `B₁`, `B₀`, cross-checked against `½ B A⁻¹ Bᵗ` at a
/// handful of source points.
pub fn quadratic_coeffs(v: &Matrix2<f64>, d: &Vector2<f64>) -> Result<QuadraticFormCoefficients> {
    let (a, det_a) = build_a(v)?;
    let (v11, v12, v22) = (v[(0, 0)], 0.5 * (v[(0, 1)] + v[(1, 0)]), v[(1, 1)]);
    let (d1, d2) = (d[0], d[1]);
    let den = 1.0 + v11 + v22 + v11 * v22 - v12 * v12;

    let off = c((v11 * v22 - v12 * v12 - 1.0) / den);
    let b2 = [
        [Complex64::new(v11 - v22, 2.0 * v12) / den, off],
        [off, Complex64::new(v11 - v22, -2.0 * v12) / den],
    ];
    let b1 = [
        2.0 * (Complex64::new(1.0 + v22, -v12) * d1 + I * Complex64::new(1.0 + v11, v12) * d2)
            / den,
        2.0 * (Complex64::new(1.0 + v22, v12) * d1 - I * Complex64::new(1.0 + v11, -v12) * d2)
            / den,
    ];
    let b0 = c(-((1.0 + v22) * d1 * d1 - 2.0 * v12 * d1 * d2 + (1.0 + v11) * d2 * d2) / den);
    let coeffs = QuadraticFormCoefficients { b2, b1, b0, det_a };

    for (u, w) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, -0.75)] {
        let direct = xi_by_solve(&a, d, u, w)?;
        let closed = coeffs.xi(u, w);
        if (direct - closed).norm() > XI_CROSS_CHECK_TOL * closed.norm().max(1.0) {
            return Err(Error::Consistency(format!(
                "ξ({u}, {w}) = {closed} from coefficients but {direct} from A⁻¹"
            )));
        }
    }
    Ok(coeffs)
}

/// Factorial-normalised derivative table `h(m, n)` for `m ≤ rows`, `n ≤ cols`.
fn derivative_table(q: &QuadraticFormCoefficients, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let xu = 0.5 * q.b1[0];
    let xv = 0.5 * q.b1[1];
    let (xuu, xuv, xvv) = (q.b2[0][0], q.b2[0][1], q.b2[1][1]);
    let sq: Vec<f64> = (0..=rows.max(cols) + 1).map(|k| (k as f64).sqrt()).collect();

    let mut h = DMatrix::from_element(rows + 1, cols + 1, c(0.0));
    h[(0, 0)] = (0.5 * q.b0).exp();
    for n in 0..cols {
        let mut acc = xv * h[(0, n)];
        if n > 0 {
            acc += sq[n] * xvv * h[(0, n - 1)];
        }
        h[(0, n + 1)] = acc / sq[n + 1];
    }
    for m in 0..rows {
        for n in 0..=cols {
            let mut acc = xu * h[(m, n)];
            if m > 0 {
                acc += sq[m] * xuu * h[(m - 1, n)];
            }
            if n > 0 {
                acc += sq[n] * xuv * h[(m, n - 1)];
            }
            h[(m + 1, n)] = acc / sq[m + 1];
        }
    }
    h
}

fn check_cutoff(k: usize) -> Result<()> {
    if k > MAX_CUTOFF {
        return Err(Error::Range(format!(
            "number-basis index {k} exceeds the supported cutoff {MAX_CUTOFF}"
        )));
    }
    Ok(())
}

/// `⟨m|ρ|n⟩` for a one-mode state.
pub fn fock_element(state: &GaussianState, m: usize, n: usize) -> Result<Complex64> {
    check_cutoff(m.max(n))?;
    let (v, d) = one_mode_blocks(state)?;
    let q = quadratic_coeffs(&v, &d)?;
    let h = derivative_table(&q, m, n);
    Ok(h[(m, n)] * (8.0 / q.det_a.sqrt()))
}

/// Truncated density matrix `ρ_mn`, `0 ≤ m, n ≤ cutoff`.
#[derive(Clone, Debug)]
pub struct FockMatrix {
    pub cutoff: usize,
    pub elements: DMatrix<Complex64>,
    /// `|1 − Σ ρ_nn|`
    pub trace_deficit: f64,
    /// Set when the trace deficit exceeds [`TRACE_DEFICIT_WARN`].
    pub under_resolved: bool,
}

impl FockMatrix {
    pub fn hermiticity_residual(&self) -> f64 {
        let e = &self.elements;
        (e - e.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..=self.cutoff).map(|k| self.elements[(k, k)].re).collect()
    }

    /// Eigenvalues of the truncated matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.elements + self.elements.adjoint()) * c(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Default cutoff `max(20, ⌈10 (n̄ + 1)⌉)`, capped at [`MAX_CUTOFF`].
pub fn default_cutoff(state: &GaussianState) -> usize {
    let nbar = crate::coherence::mean_photon_numbers(state)
        .first()
        .copied()
        .unwrap_or(0.0);
    let k = (10.0 * (nbar + 1.0)).ceil();
    (k.max(20.0) as usize).min(MAX_CUTOFF)
}

pub fn fock_matrix(state: &GaussianState, cutoff: usize) -> Result<FockMatrix> {
    check_cutoff(cutoff)?;
    let (v, d) = one_mode_blocks(state)?;
    let q = quadratic_coeffs(&v, &d)?;
    let elements = derivative_table(&q, cutoff, cutoff) * c(8.0 / q.det_a.sqrt());
    let trace: f64 = (0..=cutoff).map(|k| elements[(k, k)].re).sum();
    let trace_deficit = (1.0 - trace).abs();
    let fm = FockMatrix {
        cutoff,
        elements,
        trace_deficit,
        under_resolved: trace_deficit > TRACE_DEFICIT_WARN,
    };
    let herm = fm.hermiticity_residual();
    if herm > HERMITICITY_TOL {
        return Err(Error::Consistency(format!(
            "truncated matrix is not Hermitian (residual {herm:e})"
        )));
    }
    Ok(fm)
}

/// `Σ n ρ_nn`.
pub fn oracle_mean_photon(fm: &FockMatrix) -> Result<f64> {
    if fm.trace_deficit > TRACE_DEFICIT_WARN {
        return Err(Error::Truncation(format!(
            "trace deficit {:e} exceeds {TRACE_DEFICIT_WARN}",
            fm.trace_deficit
        )));
    }
    Ok(fm
        .diagonal()
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum())
}

/// Von Neumann entropy (bits) of the truncated matrix.
pub fn oracle_entropy(fm: &FockMatrix) -> Result<f64> {
    let ev = fm.eigenvalues();
    if let Some(&lowest) = ev.first() {
        if lowest < -NEGATIVE_EIGEN_TOL {
            return Err(Error::Truncation(format!(
                "truncated matrix has eigenvalue {lowest:e}"
            )));
        }
    }
    Ok(-ev.iter().map(|&p| xlog2x(p.max(0.0))).sum::<f64>())
}

/// `S(ρ ‖ thermal(n̄_ref))` with `S(ρ)` from the truncated spectrum and the
/// cross term in closed form from the oracle's own mean photon number.
pub fn oracle_relative_entropy(fm: &FockMatrix, reference_nbar: f64) -> Result<f64> {
    let entropy = oracle_entropy(fm)?;
    let occ = oracle_mean_photon(fm)?;
    let cross = if occ == 0.0 {
        0.0
    } else if reference_nbar == 0.0 {
        return Ok(f64::INFINITY);
    } else {
        occ * reference_nbar.log2()
    } - (occ + 1.0) * (reference_nbar + 1.0).log2();
    Ok(-entropy - cross)
}

/// Relative entropy of coherence computed from the truncated matrix.
pub fn oracle_coherence(fm: &FockMatrix) -> Result<f64> {
    if fm.trace_deficit > COHERENCE_MAX_DEFICIT {
        return Err(Error::Truncation(format!(
            "trace deficit {:e} exceeds {COHERENCE_MAX_DEFICIT}",
            fm.trace_deficit
        )));
    }
    let entropy = oracle_entropy(fm)?;
    let occ = oracle_mean_photon(fm)?;
    Ok(-entropy + thermal_entropy(occ))
}

/// `max |ρ_mn|` over `m ≠ n`.
pub fn diagonality_residual(fm: &FockMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for m in 0..=fm.cutoff {
        for n in 0..=fm.cutoff {
            if m != n {
                worst = worst.max(fm.elements[(m, n)].norm());
            }
        }
    }
    worst
}
