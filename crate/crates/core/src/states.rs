//! Pure states, density matrices, the Bell basis and Schmidt form.
//!
//! Two-qubit basis order is `|00⟩, |01⟩, |10⟩, |11⟩` with the first label
//! on the high-order (Alice) factor.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eigh, kron, re, Complex, ComplexMatrix, Tolerance, ONE, ZERO};

/// Norm and validation slack for states.
pub const STATE_EPS: f64 = 1e-9;

/// Normalized state vector.
#[derive(Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex>,
}

impl PureState {
    /// Validates `Σ|cᵢ|² = 1` within 1e-9.
    pub fn new(amplitudes: Vec<Complex>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch("empty state vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > STATE_EPS {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sq > 1e-300) || !norm_sq.is_finite() {
            return Err(Error::NotNormalized { norm_sq });
        }
        let k = 1.0 / norm_sq.sqrt();
        Self::new(amplitudes.into_iter().map(|z| z * k).collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| re(x)).collect())
    }

    /// Single qubit `α|0⟩ + β|1⟩`.
    pub fn qubit(alpha: Complex, beta: Complex) -> Result<Self> {
        Self::new(vec![alpha, beta])
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize) -> Complex {
        self.amplitudes[i]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Equality up to a global phase.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        self.dim() == other.dim() && (1.0 - self.inner(other).norm()).abs() <= tol
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut v = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                v.push(a * b);
            }
        }
        PureState { amplitudes: v }
    }

    /// Global phase fixed so the first non-negligible amplitude is real and
    /// positive.
    pub fn canonical_phase(&self) -> PureState {
        let pivot = self
            .amplitudes
            .iter()
            .find(|z| z.norm() > STATE_EPS)
            .copied()
            .unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        PureState {
            amplitudes: self.amplitudes.iter().map(|z| z * phase).collect(),
        }
    }

    pub fn ket(&self) -> ComplexMatrix {
        ComplexMatrix::column(&self.amplitudes)
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
        }
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PureState(")?;
        for (i, z) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

/// Unit-trace positive semidefinite Hermitian operator.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerance::default())
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let eig = eigh(&matrix, tol)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol.eps() {
            return Err(Error::TraceNotOne { trace });
        }
        if eig.values[0] < -tol.eps() {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: eig.values[0],
            });
        }
        Ok(Self { matrix })
    }

    /// Normalizes a positive operator with nonzero trace, as produced by an
    /// unnormalized measurement branch.
    pub fn from_unnormalized(matrix: ComplexMatrix) -> Result<Self> {
        let trace = matrix.trace().re;
        if !(trace > 0.0) {
            return Err(Error::TraceNotOne { trace });
        }
        Self::new(matrix.scale_real(1.0 / trace))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// Dominant eigenvector and its eigenvalue.
    pub fn principal_state(&self) -> Result<(f64, PureState)> {
        let eig = eigh(&self.matrix, Tolerance::default())?;
        let top = eig.values.len() - 1;
        let v = PureState::normalized(eig.vector(top))?;
        Ok((eig.values[top], v.canonical_phase()))
    }

    /// Returns the pure state if `Tr ρ² = 1` within 1e-9.
    pub fn as_pure(&self) -> Result<PureState> {
        let purity = self.purity();
        if (purity - 1.0).abs() > STATE_EPS {
            return Err(Error::MixedConditional { purity });
        }
        Ok(self.principal_state()?.1)
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({:?})", self.matrix)
    }
}

/// Real Schmidt coefficients of `a|00⟩ + b|11⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtPair {
    a: f64,
    b: f64,
}

impl SchmidtPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "Schmidt coefficient must be non-negative",
            });
        }
        if !(b >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "b",
                value: b,
                reason: "Schmidt coefficient must be non-negative",
            });
        }
        let norm_sq = a * a + b * b;
        if (norm_sq - 1.0).abs() > STATE_EPS {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { a, b })
    }

    /// `a = √a2`, `b = √(1 − a2)`.
    pub fn from_a_squared(a2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a2) {
            return Err(Error::InvalidParameter {
                name: "a2",
                value: a2,
                reason: "a² must lie in [0, 1]",
            });
        }
        Self::new(a2.sqrt(), (1.0 - a2).sqrt())
    }

    pub fn maximal() -> Self {
        Self {
            a: FRAC_1_SQRT_2,
            b: FRAC_1_SQRT_2,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Same pair with `a ≥ b`.
    pub fn ordered(&self) -> Self {
        if self.a >= self.b {
            *self
        } else {
            Self {
                a: self.b,
                b: self.a,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn bell_state(label: BellLabel) -> PureState {
    let h = FRAC_1_SQRT_2;
    let v = match label {
        BellLabel::PhiPlus => [h, 0.0, 0.0, h],
        BellLabel::PhiMinus => [h, 0.0, 0.0, -h],
        BellLabel::PsiPlus => [0.0, h, h, 0.0],
        BellLabel::PsiMinus => [0.0, h, -h, 0.0],
    };
    PureState {
        amplitudes: v.iter().map(|&x| re(x)).collect(),
    }
}

/// `a|00⟩ + b|11⟩`.
pub fn partially_entangled(s: SchmidtPair) -> PureState {
    PureState {
        amplitudes: vec![re(s.a), ZERO, ZERO, re(s.b)],
    }
}

/// Schmidt coefficients of a two-qubit pure state, `a ≥ b`.
pub fn schmidt_coeffs(psi: &PureState) -> Result<SchmidtPair> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "Schmidt coefficients need a two-qubit state, got dimension {}",
            psi.dim()
        )));
    }
    let m = ComplexMatrix::new(2, 2, psi.amplitudes().to_vec())?;
    let gram = &m * &m.adjoint();
    let eig = eigh(&gram, Tolerance::default())?;
    let a = eig.values[1].max(0.0).sqrt();
    let b = eig.values[0].max(0.0).sqrt();
    // renormalize away rounding so the pair invariant holds exactly enough
    let k = (a * a + b * b).sqrt();
    SchmidtPair::new(a / k, b / k)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(target: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if target.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of a dimension-{} target against a dimension-{} state",
            target.dim(),
            rho.dim()
        )));
    }
    let v = target.ket();
    let val = (&(&v.adjoint() * rho.matrix()) * &v).get(0, 0);
    Ok(val.re.clamp(0.0, 1.0))
}

/// `p|Ψ⁻⟩⟨Ψ⁻| + (1 − p)|00⟩⟨00|`.
pub fn mixed_resource(p: f64) -> Result<DensityMatrix> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "singlet weight must lie in (0, 1)",
        });
    }
    Ok(mixed_resource_unchecked(p))
}

pub(crate) fn mixed_resource_unchecked(p: f64) -> DensityMatrix {
    let singlet = bell_state(BellLabel::PsiMinus).projector();
    let zero = PureState::basis(4, 0).projector();
    DensityMatrix {
        matrix: &singlet.scale_real(p) + &zero.scale_real(1.0 - p),
    }
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v: Vec<Complex> = (0..dim)
            .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// The six axis states of the Bloch sphere. Averaging any function that is
/// quadratic in `|φ⟩⟨φ|` over them equals its uniform average over all
/// pure qubit states.
pub fn octahedron_states() -> [PureState; 6] {
    let h = FRAC_1_SQRT_2;
    let i = Complex::new(0.0, h);
    let mk = |a: Complex, b: Complex| PureState {
        amplitudes: vec![a, b],
    };
    [
        mk(ONE, ZERO),
        mk(ZERO, ONE),
        mk(re(h), re(h)),
        mk(re(h), re(-h)),
        mk(re(h), i),
        mk(re(h), -i),
    ]
}
