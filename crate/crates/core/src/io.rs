//! JSON documents describing states and channels, and CSV trajectory rows.
//!
//! State documents:
//!
//! ```json
//! {"kind": "vacuum", "modes": 1}
//! {"kind": "thermal", "nbar": 1.0}
//! {"kind": "coherent", "alpha": [1.0, 0.0]}
//! {"kind": "squeezed", "r": 1.0, "theta": 0.0}
//! {"kind": "displaced-squeezed-thermal", "nbar": 0.5, "r": 0.3, "theta": 0.0, "alpha": [0.2, 0.1]}
//! {"kind": "two-mode-squeezed", "r": 1.0}
//! {"kind": "explicit", "modes": 1, "V": [[1, 0], [0, 1]], "d": [0, 0]}
//! {"kind": "tensor", "parts": [ ... ]}
//! ```
//!
//! Channel documents:
//!
//! ```json
//! {"kind": "loss", "eta": 0.5, "modes": 1}
//! {"kind": "amplifier", "gain": 2.0}
//! {"kind": "rotation", "theta": 0.3}
//! {"kind": "incoherent", "modes": [{"t": 0.6, "theta": 0, "reflect": false, "w": 0.64}], "perm": [0]}
//! {"kind": "explicit", "T": [[1, 0], [0, 1]], "N": [[0, 0], [0, 0]], "dbar": [1, 0]}
//! ```

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{make_incoherent_channel, GaussianChannel, IncoherentModeParams};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, DEFAULT_TOL};
use crate::states::StateSpec;

fn one() -> usize {
    1
}

fn is_one(x: &usize) -> bool {
    *x == 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpecDocument {
    Vacuum {
        #[serde(default = "one", skip_serializing_if = "is_one")]
        modes: usize,
    },
    Thermal {
        nbar: f64,
    },
    Coherent {
        alpha: [f64; 2],
    },
    Squeezed {
        r: f64,
        #[serde(default)]
        theta: f64,
    },
    DisplacedSqueezedThermal {
        nbar: f64,
        r: f64,
        #[serde(default)]
        theta: f64,
        #[serde(default)]
        alpha: [f64; 2],
    },
    TwoModeSqueezed {
        r: f64,
    },
    /// `modes` defaults to half the size of `V`, `d` to zero.
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modes: Option<usize>,
        #[serde(rename = "V")]
        v: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<Vec<f64>>,
    },
    Tensor {
        parts: Vec<StateSpecDocument>,
    },
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Shape(format!(
            "{name} must be square: row {i} has {} entries, expected {n}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

impl StateSpecDocument {
    pub fn to_spec(&self) -> Result<StateSpec> {
        let alpha = |a: &[f64; 2]| Complex64::new(a[0], a[1]);
        Ok(match self {
            Self::Vacuum { modes } => StateSpec::Vacuum { modes: *modes },
            Self::Thermal { nbar } => StateSpec::Thermal { nbar: *nbar },
            Self::Coherent { alpha: a } => StateSpec::Coherent { alpha: alpha(a) },
            Self::Squeezed { r, theta } => StateSpec::Squeezed { r: *r, theta: *theta },
            Self::DisplacedSqueezedThermal { nbar, r, theta, alpha: a } => {
                StateSpec::DisplacedSqueezedThermal {
                    nbar: *nbar,
                    r: *r,
                    theta: *theta,
                    alpha: alpha(a),
                }
            }
            Self::TwoModeSqueezed { r } => StateSpec::TwoModeSqueezed { r: *r },
            Self::Explicit { modes, v, d } => StateSpec::Explicit {
                modes: modes.unwrap_or(v.len() / 2),
                cov: matrix_from_rows("V", v)?,
                disp: match d {
                    Some(d) => DVector::from_column_slice(d),
                    None => DVector::zeros(v.len()),
                },
            },
            Self::Tensor { parts } => {
                StateSpec::Tensor(parts.iter().map(|p| p.to_spec()).collect::<Result<_>>()?)
            }
        })
    }

    pub fn build(&self) -> Result<GaussianState> {
        self.build_with_tol(DEFAULT_TOL)
    }

    pub fn build_with_tol(&self, tol: f64) -> Result<GaussianState> {
        self.to_spec()?.build_with_tol(tol)
    }

    /// Explicit document reproducing `state` bit for bit.
    pub fn from_state(state: &GaussianState) -> Self {
        Self::Explicit {
            modes: Some(state.modes()),
            v: matrix_to_rows(state.covariance()),
            d: Some(state.displacement().iter().copied().collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelSpecDocument {
    Loss {
        eta: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        modes: usize,
    },
    Amplifier {
        gain: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        modes: usize,
    },
    Rotation {
        theta: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        modes: usize,
    },
    Incoherent {
        modes: Vec<IncoherentModeParams>,
        perm: Vec<usize>,
    },
    Explicit {
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
        #[serde(rename = "N")]
        n: Vec<Vec<f64>>,
        dbar: Vec<f64>,
    },
}

impl ChannelSpecDocument {
    pub fn build(&self) -> Result<GaussianChannel> {
        self.build_with_tol(DEFAULT_TOL)
    }

    pub fn build_with_tol(&self, tol: f64) -> Result<GaussianChannel> {
        match self {
            Self::Loss { eta, modes } => GaussianChannel::loss(*eta)?.replicate(*modes),
            Self::Amplifier { gain, modes } => GaussianChannel::amplifier(*gain)?.replicate(*modes),
            Self::Rotation { theta, modes } => GaussianChannel::rotation(*theta)?.replicate(*modes),
            Self::Incoherent { modes, perm } => make_incoherent_channel(modes, perm),
            Self::Explicit { t, n, dbar } => GaussianChannel::with_tolerance(
                matrix_from_rows("T", t)?,
                matrix_from_rows("N", n)?,
                DVector::from_column_slice(dbar),
                tol,
            ),
        }
    }

    pub fn from_channel(ch: &GaussianChannel) -> Self {
        Self::Explicit {
            t: matrix_to_rows(ch.t()),
            n: matrix_to_rows(ch.n()),
            dbar: ch.dbar().iter().copied().collect(),
        }
    }
}

/// A single channel, or a list applied in order (first element first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelInput {
    One(ChannelSpecDocument),
    Sequence(Vec<ChannelSpecDocument>),
}

impl ChannelInput {
    pub fn build_with_tol(&self, tol: f64) -> Result<GaussianChannel> {
        match self {
            Self::One(doc) => doc.build_with_tol(tol),
            Self::Sequence(docs) => {
                let mut iter = docs.iter();
                let first = iter
                    .next()
                    .ok_or_else(|| Error::Usage("empty channel list".into()))?
                    .build_with_tol(tol)?;
                iter.try_fold(first, |acc, doc| {
                    crate::channels::compose(&doc.build_with_tol(tol)?, &acc)
                })
            }
        }
    }
}

/// One row of a trajectory: step, coherence, entropy, per-mode mean photon
/// numbers and symplectic eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub coherence: f64,
    pub entropy: f64,
    pub mean_photons: Vec<f64>,
    pub symplectic: Vec<f64>,
}

pub fn csv_header(modes: usize) -> String {
    let mut h = String::from("step,C,S");
    for i in 1..=modes {
        let _ = write!(h, ",nbar_{i}");
    }
    for i in 1..=modes {
        let _ = write!(h, ",nu_{i}");
    }
    h
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl TrajectoryRow {
    pub fn to_csv(&self) -> String {
        let mut line = format!(
            "{},{},{}",
            self.step,
            format_float(self.coherence),
            format_float(self.entropy)
        );
        for x in self.mean_photons.iter().chain(&self.symplectic) {
            line.push(',');
            line.push_str(&format_float(*x));
        }
        line
    }
}
