//! Gaussian channels `(T, N, d̄)` acting as `d → T d + d̄`, `V → T V Tᵗ + N`,
//! and the classifier for channels that preserve the set of thermal products.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    min_hermitian_eigenvalue, GaussianState, SymplecticForm, ValidationReport, Violation,
    DEFAULT_TOL,
};
use crate::states::rotation;

pub const CHECK_NOISE_SYMMETRY: &str = "N symmetric";
pub const CHECK_CHANNEL_PSD: &str = "N+iΩ−iTΩTᵗ PSD";
pub const CHECK_NOISE_PSD: &str = "N ≥ 0";
pub const CHECK_NOISE_DET: &str = "det N ≥ (det T−1)²";

/// Tolerance used by [`classify_incoherent`].
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianChannel {
    t: DMatrix<f64>,
    n: DMatrix<f64>,
    dbar: DVector<f64>,
}

fn check_shapes(t: &DMatrix<f64>, n: &DMatrix<f64>, dbar: &DVector<f64>) -> Result<usize> {
    let dim = dbar.len();
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::Shape(format!(
            "displacement length {dim} is not a positive even number"
        )));
    }
    for (name, m) in [("T", t), ("N", n)] {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Shape(format!(
                "{name} is {}x{}, expected {dim}x{dim}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    for (what, xs) in [("T", t.as_slice()), ("N", n.as_slice()), ("d̄", dbar.as_slice())] {
        if let Some(idx) = xs.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: match what {
                    "T" => "channel T",
                    "N" => "channel N",
                    _ => "channel displacement",
                },
                idx,
            });
        }
    }
    Ok(dim / 2)
}

/// Checks complete positivity of `(T, N, d̄)`: `N` symmetric and
/// `N + iΩ − iTΩTᵗ ≥ 0`. One-mode channels additionally report the
/// equivalent pair `N ≥ 0`, `det N ≥ (det T − 1)²`.
pub fn validate_channel(
    t: &DMatrix<f64>,
    n: &DMatrix<f64>,
    dbar: &DVector<f64>,
) -> Result<ValidationReport> {
    validate_channel_with_tol(t, n, dbar, DEFAULT_TOL)
}

pub fn validate_channel_with_tol(
    t: &DMatrix<f64>,
    n: &DMatrix<f64>,
    dbar: &DVector<f64>,
    tol: f64,
) -> Result<ValidationReport> {
    let modes = check_shapes(t, n, dbar)?;
    let mut violations = Vec::new();

    let residual = (n - n.transpose()).norm();
    let threshold = tol * n.norm().max(1.0);
    if residual > threshold {
        violations.push(Violation {
            check: CHECK_NOISE_SYMMETRY.into(),
            measured: residual,
            threshold,
        });
    }

    let nsym = (n + n.transpose()) * 0.5;
    let omega = SymplecticForm::new(modes);
    let twisted = omega.matrix() - t * omega.matrix() * t.transpose();
    let h = DMatrix::from_fn(2 * modes, 2 * modes, |r, c| {
        Complex64::new(nsym[(r, c)], twisted[(r, c)])
    });
    let min_eig = min_hermitian_eigenvalue(h);
    if min_eig < -tol {
        violations.push(Violation {
            check: CHECK_CHANNEL_PSD.into(),
            measured: min_eig,
            threshold: -tol,
        });
    }

    if modes == 1 {
        let n_min = nsym.symmetric_eigenvalues().min();
        if n_min < -tol {
            violations.push(Violation {
                check: CHECK_NOISE_PSD.into(),
                measured: n_min,
                threshold: -tol,
            });
        }
        let det_n = nsym.determinant();
        let bound = (t.determinant() - 1.0).powi(2);
        if det_n < bound - tol * bound.max(1.0) {
            violations.push(Violation {
                check: CHECK_NOISE_DET.into(),
                measured: det_n,
                threshold: bound,
            });
        }
    }
    Ok(ValidationReport::from_violations(violations))
}

impl GaussianChannel {
    pub fn new(t: DMatrix<f64>, n: DMatrix<f64>, dbar: DVector<f64>) -> Result<Self> {
        Self::with_tolerance(t, n, dbar, DEFAULT_TOL)
    }

    pub fn with_tolerance(
        t: DMatrix<f64>,
        n: DMatrix<f64>,
        dbar: DVector<f64>,
        tol: f64,
    ) -> Result<Self> {
        let report = validate_channel_with_tol(&t, &n, &dbar, tol)?;
        if !report.is_ok() {
            return Err(Error::InvalidChannel(report));
        }
        Ok(Self { t, n, dbar })
    }

    pub(crate) fn from_parts_unchecked(t: DMatrix<f64>, n: DMatrix<f64>, dbar: DVector<f64>) -> Self {
        Self { t, n, dbar }
    }

    pub fn identity(modes: usize) -> Self {
        let dim = 2 * modes;
        Self::from_parts_unchecked(
            DMatrix::identity(dim, dim),
            DMatrix::zeros(dim, dim),
            DVector::zeros(dim),
        )
    }

    /// Pure-loss channel of transmissivity `eta ∈ [0, 1]`.
    pub fn loss(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("loss transmissivity must lie in [0, 1], got {eta}")));
        }
        Ok(Self::isotropic(eta.sqrt(), 1.0 - eta))
    }

    /// Quantum-limited amplifier of gain `gain ≥ 1`.
    pub fn amplifier(gain: f64) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::Domain(format!("amplifier gain must be >= 1, got {gain}")));
        }
        Ok(Self::isotropic(gain.sqrt(), gain - 1.0))
    }

    /// Phase rotation by `theta`.
    pub fn rotation(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!("rotation angle must be finite, got {theta}")));
        }
        let r = rotation(theta);
        Ok(Self::from_parts_unchecked(
            DMatrix::from_iterator(2, 2, r.iter().copied()),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
        ))
    }

    /// Identity channel followed by a displacement `d̄`.
    pub fn displacement(dbar: DVector<f64>) -> Result<Self> {
        let dim = dbar.len();
        Self::new(DMatrix::identity(dim, dim), DMatrix::zeros(dim, dim), dbar)
    }

    fn isotropic(t: f64, w: f64) -> Self {
        Self::from_parts_unchecked(
            DMatrix::identity(2, 2) * t,
            DMatrix::identity(2, 2) * w,
            DVector::zeros(2),
        )
    }

    /// `self ⊕ other`, acting independently on the two groups of modes.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dbar.len(), other.dbar.len());
        let block = |x: &DMatrix<f64>, y: &DMatrix<f64>| {
            let mut m = DMatrix::zeros(a + b, a + b);
            m.view_mut((0, 0), (a, a)).copy_from(x);
            m.view_mut((a, a), (b, b)).copy_from(y);
            m
        };
        Self::from_parts_unchecked(
            block(&self.t, &other.t),
            block(&self.n, &other.n),
            DVector::from_iterator(a + b, self.dbar.iter().chain(other.dbar.iter()).copied()),
        )
    }

    /// The same channel applied independently to each of `copies` groups.
    pub fn replicate(&self, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::Usage("channel must act on at least one mode".into()));
        }
        let mut acc = self.clone();
        for _ in 1..copies {
            acc = acc.direct_sum(self);
        }
        Ok(acc)
    }

    pub fn modes(&self) -> usize {
        self.dbar.len() / 2
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn n(&self) -> &DMatrix<f64> {
        &self.n
    }

    pub fn dbar(&self) -> &DVector<f64> {
        &self.dbar
    }

    pub fn validate(&self) -> ValidationReport {
        validate_channel(&self.t, &self.n, &self.dbar).expect("shape fixed at construction")
    }
}

/// `V' = T V Tᵗ + N`, `d' = T d + d̄`.
pub fn apply(ch: &GaussianChannel, state: &GaussianState) -> Result<GaussianState> {
    if ch.modes() != state.modes() {
        return Err(Error::ModeMismatch(ch.modes(), state.modes()));
    }
    let mut cov = &ch.t * state.covariance() * ch.t.transpose() + &ch.n;
    let sym = (&cov + cov.transpose()) * 0.5;
    cov = sym;
    let disp = &ch.t * state.displacement() + &ch.dbar;
    Ok(GaussianState::from_parts_unchecked(cov, disp))
}

/// `outer ∘ inner`.
pub fn compose(outer: &GaussianChannel, inner: &GaussianChannel) -> Result<GaussianChannel> {
    if outer.modes() != inner.modes() {
        return Err(Error::ModeMismatch(outer.modes(), inner.modes()));
    }
    Ok(GaussianChannel::from_parts_unchecked(
        &outer.t * &inner.t,
        &outer.t * &inner.n * outer.t.transpose() + &outer.n,
        &outer.t * &inner.dbar + &outer.dbar,
    ))
}

/// Parameters of one output mode of an incoherent channel: the block
/// `t·O` with `O = R(θ)` or `O = R(θ)·diag(1, −1)` when `reflect`, and
/// noise `w·I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct IncoherentModeParams {
    pub t: f64,
    pub theta: f64,
    pub reflect: bool,
    pub w: f64,
}

impl IncoherentModeParams {
    pub fn orthogonal(&self) -> Matrix2<f64> {
        let r = rotation(self.theta);
        if self.reflect {
            r * Matrix2::new(1.0, 0.0, 0.0, -1.0)
        } else {
            r
        }
    }

    pub fn det_sign(&self) -> f64 {
        if self.reflect {
            -1.0
        } else {
            1.0
        }
    }

    /// Least admissible noise `|t² det O − 1|`.
    pub fn noise_bound(&self) -> f64 {
        (self.t * self.t * self.det_sign() - 1.0).abs()
    }
}

/// Certificate that a channel maps thermal products to thermal products.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncoherentDecomposition {
    /// `permutation[j] = i`: input mode `j` feeds output mode `i`.
    pub permutation: Vec<usize>,
    /// Indexed by output mode.
    pub modes: Vec<IncoherentBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncoherentBlock {
    pub t: f64,
    pub orthogonal: [[f64; 2]; 2],
    pub det_o: f64,
    pub theta: f64,
    pub w: f64,
}

impl IncoherentBlock {
    pub fn params(&self) -> IncoherentModeParams {
        IncoherentModeParams {
            t: self.t,
            theta: self.theta,
            reflect: self.det_o < 0.0,
            w: self.w,
        }
    }
}

impl IncoherentDecomposition {
    /// Reassembles `(T, N, 0)`.
    pub fn to_channel(&self) -> GaussianChannel {
        let m = self.modes.len();
        let mut t = DMatrix::zeros(2 * m, 2 * m);
        let mut n = DMatrix::zeros(2 * m, 2 * m);
        for (col, &row) in self.permutation.iter().enumerate() {
            let b = &self.modes[row];
            for r in 0..2 {
                for c in 0..2 {
                    t[(2 * row + r, 2 * col + c)] = b.t * b.orthogonal[r][c];
                }
            }
        }
        for (i, b) in self.modes.iter().enumerate() {
            n[(2 * i, 2 * i)] = b.w;
            n[(2 * i + 1, 2 * i + 1)] = b.w;
        }
        GaussianChannel::from_parts_unchecked(t, n, DVector::zeros(2 * m))
    }
}

/// Why a channel is not incoherent. Variants are listed in the order
/// the conditions are checked.
#[derive(Clone, Debug, PartialEq)]
pub enum IncoherenceRejection {
    NonzeroDisplacement { norm: f64 },
    BlockStructure { detail: String },
    NotScaledOrthogonal { row: usize, col: usize, residual: f64 },
    NoiseNotIsotropic { residual: f64 },
    NoiseBelowBound { mode: usize, w: f64, bound: f64 },
}

impl IncoherenceRejection {
    /// Which of the four conditions failed: `'a'` displacement, `'b'` block
    /// structure of `T`, `'c'` shape of `N`, `'d'` noise bound.
    pub fn condition(&self) -> char {
        match self {
            Self::NonzeroDisplacement { .. } => 'a',
            Self::BlockStructure { .. } | Self::NotScaledOrthogonal { .. } => 'b',
            Self::NoiseNotIsotropic { .. } => 'c',
            Self::NoiseBelowBound { .. } => 'd',
        }
    }
}

impl fmt::Display for IncoherenceRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonzeroDisplacement { norm } => write!(f, "d̄ ≠ 0 (‖d̄‖ = {norm:e})"),
            Self::BlockStructure { detail } => {
                write!(f, "T is not a block permutation: {detail}")
            }
            Self::NotScaledOrthogonal { row, col, residual } => write!(
                f,
                "block not scaled-orthogonal at block ({row}, {col}) (‖BBᵗ − t²I‖ = {residual:e})"
            ),
            Self::NoiseNotIsotropic { residual } => {
                write!(f, "N is not of the form diag(w₁I, …, w_mI) (residual {residual:e})")
            }
            Self::NoiseBelowBound { mode, w, bound } => write!(
                f,
                "noise below bound on mode {mode}: w = {w}, |t² det O − 1| = {bound}"
            ),
        }
    }
}

fn block(m: &DMatrix<f64>, row: usize, col: usize) -> Matrix2<f64> {
    m.fixed_view::<2, 2>(2 * row, 2 * col).into_owned()
}

/// Decides whether a channel maps every thermal product to a thermal
/// product, returning its decomposition or the first failed condition.
pub fn classify_incoherent(
    ch: &GaussianChannel,
) -> std::result::Result<IncoherentDecomposition, IncoherenceRejection> {
    let tol = CLASSIFY_TOL;
    let m = ch.modes();

    let dnorm = ch.dbar.norm();
    if dnorm > tol {
        return Err(IncoherenceRejection::NonzeroDisplacement { norm: dnorm });
    }

    let zero_threshold = tol * ch.t.norm();
    let mut assigned: Vec<Option<usize>> = vec![None; m];
    let mut col_used = vec![false; m];
    for (row, slot) in assigned.iter_mut().enumerate() {
        let nonzero: Vec<usize> = (0..m)
            .filter(|&col| block(&ch.t, row, col).norm() > zero_threshold)
            .collect();
        match nonzero.as_slice() {
            [] => {}
            [col] => {
                if col_used[*col] {
                    return Err(IncoherenceRejection::BlockStructure {
                        detail: format!("block column {col} feeds more than one output mode"),
                    });
                }
                col_used[*col] = true;
                *slot = Some(*col);
            }
            cols => {
                return Err(IncoherenceRejection::BlockStructure {
                    detail: format!("block row {row} has nonzero blocks in columns {cols:?}"),
                });
            }
        }
    }
    // rows whose block vanishes take the remaining columns, own column first
    for row in 0..m {
        if assigned[row].is_none() {
            let col = if !col_used[row] {
                row
            } else {
                (0..m).find(|&c| !col_used[c]).expect("counts match")
            };
            col_used[col] = true;
            assigned[row] = Some(col);
        }
    }

    let mut permutation = vec![0; m];
    let mut blocks = Vec::with_capacity(m);
    for (row, col) in assigned.iter().map(|c| c.expect("all rows assigned")).enumerate() {
        permutation[col] = row;
        let b = block(&ch.t, row, col);
        let bbt = b * b.transpose();
        let t2 = 0.5 * bbt.trace();
        let residual = (bbt - Matrix2::identity() * t2).norm();
        if residual > tol * t2.max(1.0) {
            return Err(IncoherenceRejection::NotScaledOrthogonal { row, col, residual });
        }
        let t = t2.sqrt();
        let (orthogonal, det_o) = if b.norm() <= zero_threshold || t == 0.0 {
            (Matrix2::identity(), 1.0)
        } else {
            let o = b / t;
            (o, if b.determinant() < 0.0 { -1.0 } else { 1.0 })
        };
        blocks.push(IncoherentBlock {
            t,
            orthogonal: [
                [orthogonal[(0, 0)], orthogonal[(0, 1)]],
                [orthogonal[(1, 0)], orthogonal[(1, 1)]],
            ],
            det_o,
            theta: orthogonal[(1, 0)].atan2(orthogonal[(0, 0)]),
            w: 0.0,
        });
    }

    let nscale = ch.n.norm().max(1.0);
    let mut residual: f64 = 0.0;
    for r in 0..2 * m {
        for c in 0..2 * m {
            if r != c {
                residual = residual.max(ch.n[(r, c)].abs());
            }
        }
    }
    for i in 0..m {
        residual = residual.max((ch.n[(2 * i, 2 * i)] - ch.n[(2 * i + 1, 2 * i + 1)]).abs());
    }
    if residual > tol * nscale {
        return Err(IncoherenceRejection::NoiseNotIsotropic { residual });
    }

    for (i, b) in blocks.iter_mut().enumerate() {
        b.w = 0.5 * (ch.n[(2 * i, 2 * i)] + ch.n[(2 * i + 1, 2 * i + 1)]);
        let bound = (b.t * b.t * b.det_o - 1.0).abs();
        if b.w < bound - tol {
            return Err(IncoherenceRejection::NoiseBelowBound { mode: i, w: b.w, bound });
        }
    }

    Ok(IncoherentDecomposition {
        permutation,
        modes: blocks,
    })
}

/// Builds an incoherent channel from per-output-mode parameters and a
/// block permutation (`permutation[j] = i` sends input mode `j` to output
/// mode `i`).
pub fn make_incoherent_channel(
    params: &[IncoherentModeParams],
    permutation: &[usize],
) -> Result<GaussianChannel> {
    let m = params.len();
    if m == 0 {
        return Err(Error::Usage("incoherent channel needs at least one mode".into()));
    }
    if permutation.len() != m {
        return Err(Error::Shape(format!(
            "permutation has length {}, expected {m}",
            permutation.len()
        )));
    }
    let mut seen = vec![false; m];
    for &row in permutation {
        if row >= m || seen[row] {
            return Err(Error::Domain(format!("{permutation:?} is not a permutation")));
        }
        seen[row] = true;
    }
    for (i, p) in params.iter().enumerate() {
        if !(p.t.is_finite() && p.theta.is_finite() && p.w.is_finite()) {
            return Err(Error::Domain(format!("mode {i}: parameters must be finite")));
        }
        if p.t < 0.0 {
            return Err(Error::Domain(format!("mode {i}: t must be >= 0, got {}", p.t)));
        }
        let bound = p.noise_bound();
        if p.w < bound - CLASSIFY_TOL {
            return Err(Error::Domain(format!(
                "mode {i}: w = {} is below the bound |t² det O − 1| = {bound}",
                p.w
            )));
        }
    }
    let mut t = DMatrix::zeros(2 * m, 2 * m);
    let mut n = DMatrix::zeros(2 * m, 2 * m);
    for (col, &row) in permutation.iter().enumerate() {
        let p = &params[row];
        let b = p.orthogonal() * p.t;
        t.view_mut((2 * row, 2 * col), (2, 2)).copy_from(&b);
    }
    for (i, p) in params.iter().enumerate() {
        n[(2 * i, 2 * i)] = p.w;
        n[(2 * i + 1, 2 * i + 1)] = p.w;
    }
    Ok(GaussianChannel::from_parts_unchecked(t, n, DVector::zeros(2 * m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_coherent, make_thermal, make_vacuum};
    use std::f64::consts::PI;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    #[test]
    fn validate_examples() {
        assert!(GaussianChannel::identity(1).validate().is_ok());
        assert!(GaussianChannel::identity(3).validate().is_ok());
        let loss = GaussianChannel::loss(0.5).unwrap();
        assert!(loss.validate().is_ok());

        let r = validate_channel(
            &(DMatrix::identity(2, 2) * 2.0),
            &DMatrix::zeros(2, 2),
            &DVector::zeros(2),
        )
        .unwrap();
        assert!(!r.is_ok());
        assert!(r.has_violation(CHECK_CHANNEL_PSD));
        assert!(r.has_violation(CHECK_NOISE_DET));
    }

    #[test]
    fn validate_shape_errors() {
        assert!(matches!(
            validate_channel(&DMatrix::identity(2, 2), &DMatrix::zeros(4, 4), &DVector::zeros(2)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            GaussianChannel::new(DMatrix::identity(2, 2) * 2.0, DMatrix::zeros(2, 2), DVector::zeros(2)),
            Err(Error::InvalidChannel(_))
        ));
    }

    #[test]
    fn one_mode_cross_check_agrees() {
        // amplifier-like with too little noise: both criteria must flag it
        let r = validate_channel(
            &(DMatrix::identity(2, 2) * 2f64.sqrt()),
            &(DMatrix::identity(2, 2) * 0.9),
            &DVector::zeros(2),
        )
        .unwrap();
        assert!(r.has_violation(CHECK_CHANNEL_PSD) && r.has_violation(CHECK_NOISE_DET));
        assert!(GaussianChannel::amplifier(2.0).unwrap().validate().is_ok());
    }

    #[test]
    fn apply_examples() {
        let c = make_coherent(Complex64::new(0.7, -0.2)).unwrap();
        assert_eq!(apply(&GaussianChannel::identity(1), &c).unwrap(), c);

        let eta = 0.5;
        let out = apply(&GaussianChannel::loss(eta).unwrap(), &c).unwrap();
        let expected = make_coherent(Complex64::new(0.7, -0.2) * eta.sqrt()).unwrap();
        assert!(close(out.covariance(), expected.covariance(), 1e-15));
        assert!((out.displacement() - expected.displacement()).norm() < 1e-15);

        let amp = apply(&GaussianChannel::amplifier(2.0).unwrap(), &make_vacuum(1)).unwrap();
        assert!(close(amp.covariance(), make_thermal(1.0).unwrap().covariance(), 1e-14));

        assert!(matches!(
            apply(&GaussianChannel::identity(2), &c),
            Err(Error::ModeMismatch(2, 1))
        ));
    }

    #[test]
    fn compose_examples() {
        let ch = GaussianChannel::loss(0.3).unwrap();
        assert_eq!(compose(&GaussianChannel::identity(1), &ch).unwrap(), ch);
        let c = compose(&GaussianChannel::loss(0.6).unwrap(), &GaussianChannel::loss(0.5).unwrap())
            .unwrap();
        let direct = GaussianChannel::loss(0.3).unwrap();
        assert!(close(c.t(), direct.t(), 1e-15));
        assert!(close(c.n(), direct.n(), 1e-15));
        assert!(compose(&GaussianChannel::identity(2), &ch).is_err());
    }

    #[test]
    fn classify_loss() {
        let d = classify_incoherent(&GaussianChannel::loss(0.36).unwrap()).unwrap();
        assert_eq!(d.permutation, vec![0]);
        assert!((d.modes[0].t - 0.6).abs() < 1e-15);
        assert!((d.modes[0].w - 0.64).abs() < 1e-15);
        assert_eq!(d.modes[0].det_o, 1.0);
    }

    #[test]
    fn classify_rejects_displacement() {
        let ch = GaussianChannel::displacement(DVector::from_vec(vec![1.0, 0.0])).unwrap();
        let rej = classify_incoherent(&ch).unwrap_err();
        assert_eq!(rej.condition(), 'a');
        assert!(rej.to_string().contains("d̄ ≠ 0"));
    }

    #[test]
    fn classify_rejects_beamsplitter() {
        let c = (0.5f64).sqrt();
        #[rustfmt::skip]
        let t = DMatrix::from_row_slice(4, 4, &[
            c, 0.0, c, 0.0,
            0.0, c, 0.0, c,
            -c, 0.0, c, 0.0,
            0.0, -c, 0.0, c,
        ]);
        let ch = GaussianChannel::new(t, DMatrix::zeros(4, 4), DVector::zeros(4)).unwrap();
        let rej = classify_incoherent(&ch).unwrap_err();
        assert_eq!(rej.condition(), 'b');
    }

    #[test]
    fn classify_rejects_anisotropic_block() {
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let ch = GaussianChannel::new(t, DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let rej = classify_incoherent(&ch).unwrap_err();
        assert!(matches!(rej, IncoherenceRejection::NotScaledOrthogonal { .. }));
        assert!(rej.to_string().contains("block not scaled-orthogonal"));
    }

    #[test]
    fn classify_rejects_anisotropic_noise() {
        let ch = GaussianChannel::new(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]),
            DVector::zeros(2),
        )
        .unwrap();
        assert_eq!(classify_incoherent(&ch).unwrap_err().condition(), 'c');
    }

    #[test]
    fn classify_rejects_noise_below_bound() {
        // physical but not incoherent: phase-conjugating block with too little noise
        let p = IncoherentModeParams { t: 1.0, theta: 0.0, reflect: true, w: 2.0 };
        let ch = make_incoherent_channel(&[p], &[0]).unwrap();
        assert!(classify_incoherent(&ch).is_ok());
        let low = GaussianChannel::from_parts_unchecked(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DMatrix::identity(2, 2) * 1.5,
            DVector::zeros(2),
        );
        let rej = classify_incoherent(&low).unwrap_err();
        assert_eq!(rej.condition(), 'd');
    }

    #[test]
    fn classify_zero_block() {
        let ch = GaussianChannel::loss(0.0).unwrap();
        let d = classify_incoherent(&ch).unwrap();
        assert_eq!(d.modes[0].t, 0.0);
        assert_eq!(d.modes[0].det_o, 1.0);
        assert_eq!(d.modes[0].w, 1.0);
    }

    #[test]
    fn make_examples() {
        let p = IncoherentModeParams { t: 1.0, theta: 0.7, reflect: false, w: 0.0 };
        let ch = make_incoherent_channel(&[p], &[0]).unwrap();
        assert!(ch.validate().is_ok());
        let d = classify_incoherent(&ch).unwrap();
        assert!((d.modes[0].theta - 0.7).abs() < 1e-14);

        let p = IncoherentModeParams { t: 2f64.sqrt(), theta: 0.0, reflect: false, w: 1.0 };
        let ch = make_incoherent_channel(&[p], &[0]).unwrap();
        let amp = GaussianChannel::amplifier(2.0).unwrap();
        assert!(close(ch.t(), amp.t(), 1e-15) && close(ch.n(), amp.n(), 1e-15));

        let p = IncoherentModeParams { t: 0.6, theta: 0.0, reflect: false, w: 0.5 };
        match make_incoherent_channel(&[p], &[0]) {
            Err(Error::Domain(msg)) => assert!(msg.contains("0.64"), "{msg}"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn make_rejects_bad_permutation() {
        let p = IncoherentModeParams { t: 1.0, theta: 0.0, reflect: false, w: 0.0 };
        assert!(make_incoherent_channel(&[p, p], &[0, 0]).is_err());
        assert!(make_incoherent_channel(&[p, p], &[0]).is_err());
        assert!(make_incoherent_channel(&[], &[]).is_err());
    }

    #[test]
    fn two_mode_swap_round_trip() {
        let a = IncoherentModeParams { t: 0.8, theta: -2.0, reflect: true, w: 1.9 };
        let b = IncoherentModeParams { t: 1.3, theta: PI - 0.1, reflect: false, w: 0.7 };
        let ch = make_incoherent_channel(&[a, b], &[1, 0]).unwrap();
        assert!(ch.validate().is_ok());
        let d = classify_incoherent(&ch).unwrap();
        assert_eq!(d.permutation, vec![1, 0]);
        for (got, want) in d.modes.iter().map(|b| b.params()).zip([a, b]) {
            assert!((got.t - want.t).abs() < 1e-12);
            assert!((got.theta - want.theta).abs() < 1e-12);
            assert_eq!(got.reflect, want.reflect);
            assert!((got.w - want.w).abs() < 1e-15);
        }
        let back = d.to_channel();
        assert!(close(back.t(), ch.t(), 1e-12) && close(back.n(), ch.n(), 1e-15));
    }
}
