//! Relative entropy of coherence of Gaussian states with respect to the
//! Fock basis.
//!
//! The closest incoherent Gaussian state is the product of thermal states
//! whose mean photon numbers match those of the input mode by mode, which
//! gives
//!
//! ```text
//! C(ρ) = −S(ρ) + Σᵢ [(n̄ᵢ + 1) log₂(n̄ᵢ + 1) − n̄ᵢ log₂ n̄ᵢ],
//! n̄ᵢ  = ¼ (V₁₁⁽ⁱ⁾ + V₂₂⁽ⁱ⁾ + d₁⁽ⁱ⁾² + d₂⁽ⁱ⁾² − 2).
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    spectrum_entropy, symplectic_eigenvalues, xlog2x, GaussianState, SymplecticSpectrum,
};
use crate::states::make_thermal_product;

/// Negative coherence values down to this magnitude are float noise and
/// are reported as zero.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

/// Default tolerance for [`is_incoherent`].
pub const INCOHERENT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceReport {
    pub coherence_bits: f64,
    pub entropy_bits: f64,
    pub mean_photons: Vec<f64>,
    pub symplectic: SymplecticSpectrum,
    pub closest_incoherent: GaussianState,
}

/// Serializable view of a [`CoherenceReport`].
#[derive(Clone, Debug, Serialize)]
pub struct CoherenceSummary<'a> {
    pub coherence_bits: f64,
    pub entropy_bits: f64,
    pub mean_photons: &'a [f64],
    pub symplectic_eigenvalues: &'a [f64],
}

impl CoherenceReport {
    pub fn summary(&self) -> CoherenceSummary<'_> {
        CoherenceSummary {
            coherence_bits: self.coherence_bits,
            entropy_bits: self.entropy_bits,
            mean_photons: &self.mean_photons,
            symplectic_eigenvalues: self.symplectic.values(),
        }
    }
}

/// `(n + 1) log₂(n + 1) − n log₂ n`, the entropy of a thermal mode with
/// mean photon number `n`.
pub fn thermal_entropy(nbar: f64) -> f64 {
    xlog2x(nbar + 1.0) - xlog2x(nbar)
}

/// Mean photon number of every mode.
pub fn mean_photon_numbers(state: &GaussianState) -> Vec<f64> {
    (0..state.modes())
        .map(|i| {
            let (v, d) = state.mode_block(i);
            let n = 0.25 * (v[(0, 0)] + v[(1, 1)] + d[0] * d[0] + d[1] * d[1] - 2.0);
            // trace(V⁽ⁱ⁾) ≥ 2 for physical states; remove rounding below zero
            n.max(0.0)
        })
        .collect()
}

/// Coherence in bits together with the quantities it is built from.
pub fn coherence(state: &GaussianState) -> Result<CoherenceReport> {
    let symplectic = symplectic_eigenvalues(state)?;
    let entropy_bits = spectrum_entropy(&symplectic)?;
    let mean_photons = mean_photon_numbers(state);
    let raw = -entropy_bits + mean_photons.iter().map(|&n| thermal_entropy(n)).sum::<f64>();
    let coherence_bits = if (-NEGATIVE_CLAMP..0.0).contains(&raw) { 0.0 } else { raw };
    let closest_incoherent = make_thermal_product(&mean_photons)?;
    Ok(CoherenceReport {
        coherence_bits,
        entropy_bits,
        mean_photons,
        symplectic,
        closest_incoherent,
    })
}

/// Product of thermal states minimising the relative entropy to `state`.
pub fn closest_incoherent_state(state: &GaussianState) -> Result<GaussianState> {
    make_thermal_product(&mean_photon_numbers(state))
}

/// `S(ρ ‖ ⊗ᵢ thermal(n̄ᵢ))` in bits. Returns `+∞` when a reference mode is
/// the vacuum but the state populates that mode.
pub fn relative_entropy_to_incoherent(state: &GaussianState, nbars: &[f64]) -> Result<f64> {
    if nbars.len() != state.modes() {
        return Err(Error::ModeMismatch(nbars.len(), state.modes()));
    }
    if let Some(&bad) = nbars.iter().find(|n| !(**n >= 0.0) || !n.is_finite()) {
        return Err(Error::Domain(format!(
            "reference mean photon numbers must be finite and >= 0, got {bad}"
        )));
    }
    let entropy = spectrum_entropy(&symplectic_eigenvalues(state)?)?;
    let mut cross = 0.0;
    for (&occ, &reference) in mean_photon_numbers(state).iter().zip(nbars) {
        // tr[ρ log₂ δ] restricted to one mode
        let log_ratio = if occ == 0.0 {
            0.0
        } else if reference == 0.0 {
            return Ok(f64::INFINITY);
        } else {
            occ * reference.log2()
        };
        cross += log_ratio - (occ + 1.0) * (reference + 1.0).log2();
    }
    Ok(-entropy - cross)
}

/// Whether the state is a product of thermal states, up to `tol`: zero
/// displacement and `V = diag(v₁, v₁, v₂, v₂, …)`.
pub fn is_incoherent(state: &GaussianState, tol: f64) -> bool {
    if state.displacement().amax() > tol {
        return false;
    }
    let v = state.covariance();
    let dim = v.nrows();
    for r in 0..dim {
        for c in 0..dim {
            if r != c && v[(r, c)].abs() > tol {
                return false;
            }
        }
    }
    (0..state.modes()).all(|i| (v[(2 * i, 2 * i)] - v[(2 * i + 1, 2 * i + 1)]).abs() <= tol)
}
