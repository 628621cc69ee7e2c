//! Constructors for named Gaussian states.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{tensor_all, GaussianState};

/// Counter-clockwise phase-space rotation by `theta`.
pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

fn check_nbar(nbar: f64) -> Result<()> {
    finite("mean photon number", nbar)?;
    if nbar < 0.0 {
        return Err(Error::Domain(format!(
            "mean photon number must be >= 0, got {nbar}"
        )));
    }
    Ok(())
}

fn one_mode(v: Matrix2<f64>, d: [f64; 2]) -> GaussianState {
    GaussianState::from_parts_unchecked(
        DMatrix::from_iterator(2, 2, v.iter().copied()),
        DVector::from_row_slice(&d),
    )
}

pub fn make_vacuum(modes: usize) -> GaussianState {
    GaussianState::from_parts_unchecked(
        DMatrix::identity(2 * modes, 2 * modes),
        DVector::zeros(2 * modes),
    )
}

/// Thermal state: `V = (2n̄ + 1)·I`, `d = 0`.
pub fn make_thermal(nbar: f64) -> Result<GaussianState> {
    check_nbar(nbar)?;
    Ok(one_mode(Matrix2::identity() * (2.0 * nbar + 1.0), [0.0, 0.0]))
}

/// Product of thermal states with the given mean photon numbers.
pub fn make_thermal_product(nbars: &[f64]) -> Result<GaussianState> {
    let parts = nbars
        .iter()
        .map(|&n| make_thermal(n))
        .collect::<Result<Vec<_>>>()?;
    tensor_all(&parts).ok_or_else(|| Error::Usage("no modes given".into()))
}

/// Coherent state `|α⟩`: `V = I`, `d = (2 Re α, 2 Im α)`.
pub fn make_coherent(alpha: Complex64) -> Result<GaussianState> {
    finite("Re α", alpha.re)?;
    finite("Im α", alpha.im)?;
    Ok(one_mode(Matrix2::identity(), [2.0 * alpha.re, 2.0 * alpha.im]))
}

/// Squeezed vacuum `V = R(θ)·diag(e^{2r}, e^{−2r})·R(θ)ᵗ`. Positive `r`
/// stretches `x` and squeezes `p` at `θ = 0`.
pub fn make_squeezed(r: f64, theta: f64) -> Result<GaussianState> {
    make_displaced_squeezed_thermal(0.0, r, theta, Complex64::new(0.0, 0.0))
}

/// `V = (2n̄ + 1)·R(θ)·diag(e^{2r}, e^{−2r})·R(θ)ᵗ`, `d = (2 Re α, 2 Im α)`.
pub fn make_displaced_squeezed_thermal(
    nbar: f64,
    r: f64,
    theta: f64,
    alpha: Complex64,
) -> Result<GaussianState> {
    check_nbar(nbar)?;
    finite("squeezing", r)?;
    finite("angle", theta)?;
    finite("Re α", alpha.re)?;
    finite("Im α", alpha.im)?;
    let rot = rotation(theta);
    let diag = Matrix2::new((2.0 * r).exp(), 0.0, 0.0, (-2.0 * r).exp());
    let mut v = rot * diag * rot.transpose() * (2.0 * nbar + 1.0);
    // exact symmetry
    let off = 0.5 * (v[(0, 1)] + v[(1, 0)]);
    v[(0, 1)] = off;
    v[(1, 0)] = off;
    Ok(one_mode(v, [2.0 * alpha.re, 2.0 * alpha.im]))
}

/// Two-mode squeezed vacuum:
/// `V = [[cosh 2r·I, sinh 2r·Z], [sinh 2r·Z, cosh 2r·I]]`, `Z = diag(1, −1)`.
pub fn make_two_mode_squeezed(r: f64) -> Result<GaussianState> {
    finite("squeezing", r)?;
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    #[rustfmt::skip]
    let v = DMatrix::from_row_slice(4, 4, &[
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ]);
    Ok(GaussianState::from_parts_unchecked(v, DVector::zeros(4)))
}

/// A named state recipe.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Vacuum { modes: usize },
    Thermal { nbar: f64 },
    Coherent { alpha: Complex64 },
    Squeezed { r: f64, theta: f64 },
    DisplacedSqueezedThermal { nbar: f64, r: f64, theta: f64, alpha: Complex64 },
    TwoModeSqueezed { r: f64 },
    Explicit { modes: usize, cov: DMatrix<f64>, disp: DVector<f64> },
    Tensor(Vec<StateSpec>),
}

impl StateSpec {
    pub fn build(&self) -> Result<GaussianState> {
        self.build_with_tol(crate::gaussian::DEFAULT_TOL)
    }

    /// Builds the state; `tol` applies to explicit covariances only.
    pub fn build_with_tol(&self, tol: f64) -> Result<GaussianState> {
        match self {
            StateSpec::Vacuum { modes } => {
                if *modes == 0 {
                    return Err(Error::Domain("vacuum needs at least one mode".into()));
                }
                Ok(make_vacuum(*modes))
            }
            StateSpec::Thermal { nbar } => make_thermal(*nbar),
            StateSpec::Coherent { alpha } => make_coherent(*alpha),
            StateSpec::Squeezed { r, theta } => make_squeezed(*r, *theta),
            StateSpec::DisplacedSqueezedThermal { nbar, r, theta, alpha } => {
                make_displaced_squeezed_thermal(*nbar, *r, *theta, *alpha)
            }
            StateSpec::TwoModeSqueezed { r } => make_two_mode_squeezed(*r),
            StateSpec::Explicit { modes, cov, disp } => {
                if disp.len() != 2 * modes {
                    return Err(Error::Shape(format!(
                        "displacement has length {}, expected {}",
                        disp.len(),
                        2 * modes
                    )));
                }
                GaussianState::with_tolerance(cov.clone(), disp.clone(), tol)
            }
            StateSpec::Tensor(parts) => {
                let built = parts
                    .iter()
                    .map(|p| p.build_with_tol(tol))
                    .collect::<Result<Vec<_>>>()?;
                tensor_all(&built).ok_or_else(|| Error::Usage("empty tensor product".into()))
            }
        }
    }
}
