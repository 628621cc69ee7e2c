//! Random states and channels for property sweeps.
//!
//! One-mode states are `V = (2n̄ + 1)·R(θ) diag(e^{2r}, e^{−2r}) R(θ)ᵗ` with
//! `n̄ ∈ [0, 2]`, `r ∈ [−1, 1]`, `θ ∈ [0, 2π)` and displacement components
//! in `[−2, 2]`. Multimode states are products of those followed by a
//! random symplectic transformation.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::channels::{make_incoherent_channel, GaussianChannel, IncoherentModeParams};
use crate::gaussian::{tensor_all, GaussianState};
use crate::states::{make_displaced_squeezed_thermal, make_thermal_product, rotation};

pub fn random_one_mode_state<R: Rng + ?Sized>(rng: &mut R) -> GaussianState {
    let nbar = rng.gen_range(0.0..=2.0);
    let r = rng.gen_range(-1.0..=1.0);
    let theta = rng.gen_range(0.0..TAU);
    // d = (2 Re α, 2 Im α) with components in [−2, 2]
    let alpha = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
    make_displaced_squeezed_thermal(nbar, r, theta, alpha).expect("parameters in range")
}

/// Random one-mode state without displacement.
pub fn random_centered_state<R: Rng + ?Sized>(rng: &mut R) -> GaussianState {
    let nbar = rng.gen_range(0.0..=2.0);
    let r = rng.gen_range(-1.0..=1.0);
    let theta = rng.gen_range(0.0..TAU);
    make_displaced_squeezed_thermal(nbar, r, theta, Complex64::new(0.0, 0.0))
        .expect("parameters in range")
}

/// Beam splitter of angle `phi` between modes `j` and `k`.
fn beam_splitter(modes: usize, j: usize, k: usize, phi: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    let (sn, cs) = phi.sin_cos();
    for q in 0..2 {
        let (a, b) = (2 * j + q, 2 * k + q);
        s[(a, a)] = cs;
        s[(a, b)] = sn;
        s[(b, a)] = -sn;
        s[(b, b)] = cs;
    }
    s
}

fn phase_layer<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        let r = rotation(rng.gen_range(0.0..TAU));
        s.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&r);
    }
    s
}

fn passive<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> DMatrix<f64> {
    let mut s = phase_layer(rng, modes);
    for j in 0..modes {
        for k in j + 1..modes {
            s = beam_splitter(modes, j, k, rng.gen_range(0.0..TAU)) * s;
            s = phase_layer(rng, modes) * s;
        }
    }
    s
}

/// Random symplectic matrix: passive · local squeezing · passive, with
/// squeezing parameters in `[−0.5, 0.5]`.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> DMatrix<f64> {
    let mut squeeze = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        let s: f64 = rng.gen_range(-0.5..=0.5);
        squeeze[(2 * i, 2 * i)] = s.exp();
        squeeze[(2 * i + 1, 2 * i + 1)] = (-s).exp();
    }
    passive(rng, modes) * squeeze * passive(rng, modes)
}

/// `V → S V Sᵗ`, `d → S d` for a symplectic `S`.
pub fn transform(state: &GaussianState, s: &DMatrix<f64>) -> GaussianState {
    let cov = s * state.covariance() * s.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    let disp: DVector<f64> = s * state.displacement();
    GaussianState::from_parts_unchecked(cov, disp)
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> GaussianState {
    let parts: Vec<GaussianState> = (0..modes).map(|_| random_one_mode_state(rng)).collect();
    let product = tensor_all(&parts).expect("at least one mode");
    if modes == 1 {
        return product;
    }
    let s = random_symplectic(rng, modes);
    transform(&product, &s)
}

pub fn random_thermal_product<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> GaussianState {
    let nbars: Vec<f64> = (0..modes).map(|_| rng.gen_range(0.0..=5.0)).collect();
    make_thermal_product(&nbars).expect("non-negative")
}

pub fn random_incoherent_params<R: Rng + ?Sized>(
    rng: &mut R,
    modes: usize,
) -> (Vec<IncoherentModeParams>, Vec<usize>) {
    let params = (0..modes)
        .map(|_| {
            let mut p = IncoherentModeParams {
                t: rng.gen_range(0.0..=1.6),
                theta: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                reflect: rng.gen_bool(0.3),
                w: 0.0,
            };
            p.w = p.noise_bound() + rng.gen_range(0.0..=1.0);
            p
        })
        .collect();
    let mut perm: Vec<usize> = (0..modes).collect();
    perm.shuffle(rng);
    (params, perm)
}

pub fn random_incoherent_channel<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> GaussianChannel {
    let (params, perm) = random_incoherent_params(rng, modes);
    make_incoherent_channel(&params, &perm).expect("noise at or above bound")
}
