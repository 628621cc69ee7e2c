//! Seeded sweep over the library's invariants, exposed as `selftest` in the
//! CLI. Trials are independent and run in parallel; each trial derives its
//! own generator from `(seed, check, trial)` so results do not depend on
//! scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{apply, classify_incoherent};
use crate::coherence::{coherence, is_incoherent, mean_photon_numbers, INCOHERENT_TOL};
use crate::fock::{fock_matrix, oracle_coherence, oracle_mean_photon};
use crate::gaussian::{symplectic_eigenvalues, tensor};
use crate::sampling::*;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed deviation, in the check's own units.
    pub worst: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn trial_rng(seed: u64, check: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(check);
    rng
}

/// Runs `trial` for each index and aggregates `(failed, deviation)` pairs.
fn sweep<F>(name: &'static str, check: u64, seed: u64, trials: usize, trial: F) -> CheckOutcome
where
    F: Fn(&mut ChaCha8Rng) -> (bool, f64) + Sync,
{
    let results: Vec<(bool, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| trial(&mut trial_rng(seed, check, i)))
        .collect();
    CheckOutcome {
        name,
        trials,
        failures: results.iter().filter(|(failed, _)| *failed).count(),
        worst: results.iter().map(|(_, dev)| *dev).fold(0.0, f64::max),
    }
}

pub fn check_monotonicity(seed: u64, trials: usize) -> CheckOutcome {
    sweep("monotonicity under incoherent channels", 1, seed, trials, |rng| {
        let modes = rng.gen_range(1..=2);
        let s = random_state(rng, modes);
        let ch = random_incoherent_channel(rng, modes);
        let before = coherence(&s).map(|r| r.coherence_bits);
        let after = apply(&ch, &s).and_then(|o| coherence(&o)).map(|r| r.coherence_bits);
        match (before, after) {
            (Ok(b), Ok(a)) => (a > b + 1e-9, (a - b).max(0.0)),
            _ => (true, f64::INFINITY),
        }
    })
}

pub fn check_additivity(seed: u64, trials: usize) -> CheckOutcome {
    sweep("additivity on products", 2, seed, trials, |rng| {
        let (ma, mb) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let a = random_state(rng, ma);
        let b = random_state(rng, mb);
        let parts = (coherence(&a), coherence(&b), coherence(&tensor(&a, &b)));
        match parts {
            (Ok(ca), Ok(cb), Ok(cab)) => {
                let dev = (cab.coherence_bits - ca.coherence_bits - cb.coherence_bits).abs();
                (dev > 1e-10, dev)
            }
            _ => (true, f64::INFINITY),
        }
    })
}

pub fn check_faithfulness(seed: u64, trials: usize) -> CheckOutcome {
    sweep("faithfulness", 3, seed, trials, |rng| {
        let modes = rng.gen_range(1..=2);
        let s = match rng.gen_range(0..3) {
            0 => random_state(rng, modes),
            1 => random_thermal_product(rng, modes),
            _ => {
                let base = random_thermal_product(rng, modes);
                let eps = if rng.gen_bool(0.5) { 1e-12 } else { 1e-3 };
                let (v, d) = (base.covariance().clone(), base.displacement().clone());
                let mut dv = nalgebra::DMatrix::from_fn(v.nrows(), v.ncols(), |_, _| {
                    rng.gen_range(-eps..=eps)
                });
                dv = (&dv + dv.transpose()) * 0.5;
                let dd = nalgebra::DVector::from_fn(d.len(), |_, _| rng.gen_range(-eps..=eps));
                match crate::gaussian::GaussianState::new(v + dv, d + dd) {
                    Ok(s) => s,
                    Err(_) => base,
                }
            }
        };
        match coherence(&s) {
            Ok(r) => {
                let zero = r.coherence_bits <= 1e-10;
                (zero != is_incoherent(&s, INCOHERENT_TOL), 0.0)
            }
            Err(_) => (true, f64::INFINITY),
        }
    })
}

pub fn check_spectrum_invariance(seed: u64, trials: usize) -> CheckOutcome {
    sweep("symplectic spectrum invariance", 4, seed, trials, |rng| {
        let modes = rng.gen_range(1..=3);
        let s = random_state(rng, modes);
        let moved = transform(&s, &random_symplectic(rng, modes));
        match (symplectic_eigenvalues(&s), symplectic_eigenvalues(&moved)) {
            (Ok(a), Ok(b)) => {
                let dev = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                (dev > 1e-8, dev)
            }
            _ => (true, f64::INFINITY),
        }
    })
}

/// Closed forms against the number-basis oracle, one-mode states with
/// `n̄ ≤ 2`, cutoff 100.
pub fn check_oracle(seed: u64, trials: usize) -> CheckOutcome {
    sweep("closed form vs number-basis oracle", 5, seed, trials, |rng| {
        let s = loop {
            let s = random_one_mode_state(rng);
            if mean_photon_numbers(&s)[0] <= 2.0 {
                break s;
            }
        };
        let analytic = match coherence(&s) {
            Ok(r) => r,
            Err(_) => return (true, f64::INFINITY),
        };
        let fm = match fock_matrix(&s, 100) {
            Ok(fm) => fm,
            Err(_) => return (true, f64::INFINITY),
        };
        match (oracle_mean_photon(&fm), oracle_coherence(&fm)) {
            (Ok(n), Ok(c)) => {
                let dn = (n - analytic.mean_photons[0]).abs();
                let dc = (c - analytic.coherence_bits).abs();
                (dn > 1e-6 || dc > 1e-4, dn.max(dc))
            }
            _ => (true, f64::INFINITY),
        }
    })
}

pub fn check_classifier(seed: u64, trials: usize) -> CheckOutcome {
    sweep("incoherent channels preserve thermal products", 6, seed, trials, |rng| {
        let modes = rng.gen_range(1..=3);
        let ch = random_incoherent_channel(rng, modes);
        if classify_incoherent(&ch).is_err() {
            return (true, f64::INFINITY);
        }
        let s = random_thermal_product(rng, modes);
        match apply(&ch, &s) {
            Ok(out) => (!is_incoherent(&out, INCOHERENT_TOL), 0.0),
            Err(_) => (true, f64::INFINITY),
        }
    })
}

pub fn run_all(seed: u64, trials: usize) -> Vec<CheckOutcome> {
    vec![
        check_monotonicity(seed, trials),
        check_additivity(seed, trials),
        check_faithfulness(seed, trials),
        check_spectrum_invariance(seed, trials),
        check_oracle(seed, trials.min(50)),
        check_classifier(seed, trials),
    ]
}
