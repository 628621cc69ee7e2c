//! Coherence of multimode Gaussian states in the Fock basis.
//!
//! - [`gaussian`]: states `ρ(V, d)`, physicality checks, symplectic spectra, entropy.
//! - [`states`]: named state constructors.
//! - [`channels`]: Gaussian channels and the incoherent-channel classifier.
//! - [`coherence`]: closed-form relative entropy of coherence.
//! - [`fock`]: truncated number-basis oracle for one-mode states.
//! - [`io`], [`cli`]: JSON/CSV documents and the command-line front end.

#![forbid(unsafe_code)]

pub mod channels;
pub mod cli;
pub mod coherence;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod io;
pub mod sampling;
pub mod selftest;
pub mod states;

pub use channels::{apply, classify_incoherent, compose, GaussianChannel};
pub use coherence::{coherence, CoherenceReport};
pub use error::{Error, Result};
pub use gaussian::{GaussianState, SymplecticSpectrum, ValidationReport};
