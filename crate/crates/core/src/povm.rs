//! Generalized measurements.
//!
//! A [`Povm`] is a list of positive operators summing to the identity. The
//! state update for outcome `i` uses the positive square root `Mᵢ = √Aᵢ`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, min_eigenvalue, re, sqrt_psd, Complex, ComplexMatrix, Tolerance, ZERO,
};
use crate::states::{bell_state, BellLabel, DensityMatrix, SchmidtPair, STATE_EPS};

/// Probability floor below which an outcome is treated as impossible.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Ordered positive operators summing to the identity, with unique labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        Self::with_tolerance(elements, labels, Tolerance::default())
    }

    pub fn with_tolerance(
        elements: Vec<ComplexMatrix>,
        labels: Vec<String>,
        tol: Tolerance,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        if labels.len() != elements.len() {
            return Err(Error::InvalidPovm(format!(
                "{} labels for {} elements",
                labels.len(),
                elements.len()
            )));
        }
        let unique: HashSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::InvalidPovm("labels must be unique".into()));
        }
        let dim = elements[0].rows();
        if elements.iter().any(|e| !e.is_square() || e.rows() != dim) {
            return Err(Error::InvalidPovm(
                "elements must be square with a common dimension".into(),
            ));
        }
        for (e, label) in elements.iter().zip(&labels) {
            let min = min_eigenvalue(e, tol)
                .map_err(|err| Error::InvalidPovm(format!("element {label}: {err}")))?;
            if min < -tol.eps() {
                return Err(Error::InvalidPovm(format!(
                    "element {label} has eigenvalue {min:e}"
                )));
            }
        }
        let residual = completeness_residual(&elements);
        if residual > tol.eps() {
            return Err(Error::InvalidPovm(format!(
                "elements sum to the identity only within {residual:e}"
            )));
        }
        Ok(Self { elements, labels })
    }

    /// Builds labels `A1..An`.
    pub fn numbered(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let labels = (1..=elements.len()).map(|i| format!("A{i}")).collect();
        Self::new(elements, labels)
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    /// `max |Σ Aᵢ − I|`.
    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.elements)
    }

    /// Smallest eigenvalue over all elements.
    pub fn min_eigenvalue(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| min_eigenvalue(e, Tolerance::default()).unwrap_or(f64::NEG_INFINITY))
            .fold(f64::INFINITY, f64::min)
    }

    /// `Tr(Aᵢ ρ)` for each element.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "POVM on dimension {} applied to a dimension-{} state",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(self
            .elements
            .iter()
            .map(|a| (a * rho.matrix()).trace().re.clamp(0.0, 1.0))
            .collect())
    }
}

/// `max |Σ Aᵢ − I|` for an arbitrary operator list.
pub fn completeness_residual(elements: &[ComplexMatrix]) -> f64 {
    let dim = elements[0].rows();
    let sum = elements
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, e| &acc + e);
    sum.max_abs_diff(&ComplexMatrix::identity(dim))
}

/// Operators `Mᵢ` with `Σ Mᵢ†Mᵢ = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::IncompleteKraus {
                residual: f64::INFINITY,
            });
        }
        let dim = operators[0].cols();
        if operators.iter().any(|m| m.cols() != dim) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must share an input dimension".into(),
            ));
        }
        let residual = kraus_residual(&operators);
        if residual > Tolerance::DEFAULT_EPS {
            return Err(Error::IncompleteKraus { residual });
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn completeness_residual(&self) -> f64 {
        kraus_residual(&self.operators)
    }

    /// Effects `Mᵢ†Mᵢ` as a POVM.
    pub fn effects(&self) -> Result<Povm> {
        Povm::numbered(self.operators.iter().map(|m| &m.adjoint() * m).collect())
    }

    /// Samples an outcome by inverse CDF over `pᵢ = Tr(Mᵢ ρ Mᵢ†)`.
    pub fn apply(&self, rho: &DensityMatrix, draw: f64) -> Result<(usize, f64, DensityMatrix)> {
        if rho.dim() != self.operators[0].cols() {
            return Err(Error::DimensionMismatch(format!(
                "Kraus set on dimension {} applied to a dimension-{} state",
                self.operators[0].cols(),
                rho.dim()
            )));
        }
        let branches: Vec<ComplexMatrix> = self
            .operators
            .iter()
            .map(|m| m.conjugate(rho.matrix()))
            .collect();
        let probs: Vec<f64> = branches.iter().map(|b| b.trace().re.max(0.0)).collect();
        let index = select_outcome(&probs, draw)?;
        let post = DensityMatrix::from_unnormalized(branches[index].clone())?;
        Ok((index, probs[index], post))
    }
}

fn kraus_residual(operators: &[ComplexMatrix]) -> f64 {
    let dim = operators[0].cols();
    operators
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, m| {
            &acc + &(&m.adjoint() * m)
        })
        .max_abs_diff(&ComplexMatrix::identity(dim))
}

/// Inverse-CDF selection. Outcomes below [`PROBABILITY_FLOOR`] are never
/// chosen; a draw past the accumulated total falls to the last possible one.
pub fn select_outcome(probs: &[f64], draw: f64) -> Result<usize> {
    let possible: Vec<usize> = (0..probs.len())
        .filter(|&i| probs[i] > PROBABILITY_FLOOR)
        .collect();
    let Some(&last) = possible.last() else {
        return Err(Error::Internal(
            "every outcome has vanishing probability".into(),
        ));
    };
    let mut acc = 0.0;
    for &i in &possible {
        acc += probs[i];
        if draw < acc {
            return Ok(i);
        }
    }
    Ok(last)
}

/// One sampled measurement result.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub label: String,
    pub probability: f64,
    pub post_state: DensityMatrix,
}

/// The four-outcome POVM that, applied to one half of a singlet, leaves the
/// other half in `(β,−α)`, `(α,β)`, `(α,−β)` or `(β,α)`.
///
/// `A1..A4` are the effects induced by the Bell projectors
/// `Φ⁺, Ψ⁻, Ψ⁺, Φ⁻` (see [`TELEPOVM_BELL_ORDER`]) with an ancilla in
/// `α|0⟩ + β|1⟩`.
pub fn teleportation_povm(alpha: Complex, beta: Complex) -> Result<Povm> {
    check_unit_qubit(alpha, beta)?;
    let (a2, b2) = (re(alpha.norm_sqr()), re(beta.norm_sqr()));
    let ba = beta * alpha.conj();
    let ab = beta.conj() * alpha;
    let half = |rows: [[Complex; 2]; 2]| ComplexMatrix::from_rows(&rows).scale_real(0.5);
    let elements = vec![
        half([[a2, ba], [ab, b2]]),
        half([[b2, -ab], [-ba, a2]]),
        half([[b2, ab], [ba, a2]]),
        half([[a2, -ba], [-ab, b2]]),
    ];
    Povm::numbered(elements)
}

/// Bell projector order that induces `A1..A4` of [`teleportation_povm`].
pub const TELEPOVM_BELL_ORDER: [BellLabel; 4] = [
    BellLabel::PhiPlus,
    BellLabel::PsiMinus,
    BellLabel::PsiPlus,
    BellLabel::PhiMinus,
];

pub fn check_unit_qubit(alpha: Complex, beta: Complex) -> Result<()> {
    let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
    if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > STATE_EPS {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// Unambiguous discrimination of `(a, b)` from `(a, −b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationPovm {
    povm: Povm,
    degenerate: bool,
}

impl DiscriminationPovm {
    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    /// True when `b = 0`: the two states coincide and every outcome is
    /// inconclusive.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Outcome 0 identifies `(a, b)`, outcome 1 identifies `(a, −b)`.
    pub fn is_conclusive(&self, index: usize) -> bool {
        !self.degenerate && index < 2
    }
}

/// Optimal unambiguous discrimination of `(a, b)` and `(a, −b)` for `a ≥ b`:
///
/// ```text
/// A1 = 1/(2a²) [[b²,  ab], [ ab, a²]]
/// A2 = 1/(2a²) [[b², −ab], [−ab, a²]]
/// A3 = diag(1 − b²/a², 0)
/// ```
///
/// A conclusive answer occurs with probability `2b² = 1 − (a² − b²)`. For
/// `b = 0` the result is `{diag(1,0), diag(0,1)}`, both inconclusive.
pub fn discrimination_povm(s: SchmidtPair) -> Result<DiscriminationPovm> {
    let (a, b) = (s.a(), s.b());
    if a < b {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            reason: "discrimination requires a ≥ b",
        });
    }
    if b <= PROBABILITY_FLOOR {
        let povm = Povm::new(
            vec![
                ComplexMatrix::real_diag(&[1.0, 0.0]),
                ComplexMatrix::real_diag(&[0.0, 1.0]),
            ],
            vec!["inconclusive".into(), "inconclusive_complement".into()],
        )?;
        return Ok(DiscriminationPovm {
            povm,
            degenerate: true,
        });
    }
    let k = 1.0 / (2.0 * a * a);
    let a1 = ComplexMatrix::from_real_rows(&[[b * b, a * b], [a * b, a * a]]).scale_real(k);
    let a2 = ComplexMatrix::from_real_rows(&[[b * b, -a * b], [-a * b, a * a]]).scale_real(k);
    let a3 = ComplexMatrix::real_diag(&[1.0 - (b * b) / (a * a), 0.0]);
    let povm = Povm::new(
        vec![a1, a2, a3],
        vec!["plus".into(), "minus".into(), "inconclusive".into()],
    )?;
    Ok(DiscriminationPovm {
        povm,
        degenerate: false,
    })
}

/// The discrimination operators without the `1/(2a²)` factor on the
/// conclusive elements. They are positive but only sum to the identity when
/// `a² = ½`; kept to document that difference.
pub fn discrimination_operators_unnormalized(s: SchmidtPair) -> Vec<ComplexMatrix> {
    let (a, b) = (s.a(), s.b());
    vec![
        ComplexMatrix::from_real_rows(&[[b * b, a * b], [a * b, a * a]]),
        ComplexMatrix::from_real_rows(&[[b * b, -a * b], [-a * b, a * a]]),
        ComplexMatrix::real_diag(&[1.0 - (b * b) / (a * a), 0.0]),
    ]
}

/// Projective measurement in the computational basis.
pub fn rectilinear_povm() -> Povm {
    Povm::new(
        vec![
            ComplexMatrix::real_diag(&[1.0, 0.0]),
            ComplexMatrix::real_diag(&[0.0, 1.0]),
        ],
        vec!["0".into(), "1".into()],
    )
    .expect("rectilinear projectors")
}

/// Projective measurement onto `(|0⟩ ± |1⟩)/√2`.
pub fn diagonal_povm() -> Povm {
    Povm::new(
        vec![
            ComplexMatrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]]),
            ComplexMatrix::from_real_rows(&[[0.5, -0.5], [-0.5, 0.5]]),
        ],
        vec!["+".into(), "-".into()],
    )
    .expect("diagonal projectors")
}

/// Bell-basis projectors in the given order.
pub fn bell_projectors(order: &[BellLabel]) -> Vec<ComplexMatrix> {
    order.iter().map(|&l| bell_state(l).projector()).collect()
}

/// Effective POVM on the system when an ancilla in `rho_aux` is attached
/// and a projective measurement is made on system ⊗ ancilla:
///
/// `(Aₖ)ₘₙ = Σᵣₛ (Pₖ)₍ₘᵣ₎₍ₙₛ₎ (ρ_aux)ₛᵣ`
///
/// with the system on the high-order factor.
pub fn induced_povm(projectors: &[ComplexMatrix], rho_aux: &DensityMatrix) -> Result<Povm> {
    let tol = Tolerance::default().eps();
    let Some(first) = projectors.first() else {
        return Err(Error::InvalidProjectors("empty projector set".into()));
    };
    let total = first.rows();
    let d_aux = rho_aux.dim();
    if total % d_aux != 0 || projectors.iter().any(|p| !p.is_square() || p.rows() != total) {
        return Err(Error::DimensionMismatch(format!(
            "projectors of dimension {total} do not factor over an ancilla of dimension {d_aux}"
        )));
    }
    for (i, p) in projectors.iter().enumerate() {
        if p.hermitian_deviation() > tol {
            return Err(Error::InvalidProjectors(format!("projector {i} is not Hermitian")));
        }
        if (p * p).max_abs_diff(p) > tol {
            return Err(Error::InvalidProjectors(format!("projector {i} is not idempotent")));
        }
        for (j, q) in projectors.iter().enumerate().skip(i + 1) {
            if (p * q).max_abs() > tol {
                return Err(Error::InvalidProjectors(format!(
                    "projectors {i} and {j} are not orthogonal"
                )));
            }
        }
    }
    let residual = completeness_residual(projectors);
    if residual > tol {
        return Err(Error::InvalidProjectors(format!(
            "projectors sum to the identity only within {residual:e}"
        )));
    }

    let d_sys = total / d_aux;
    let aux = rho_aux.matrix();
    let elements = projectors
        .iter()
        .map(|p| {
            let mut data = vec![ZERO; d_sys * d_sys];
            for m in 0..d_sys {
                for n in 0..d_sys {
                    let mut acc = ZERO;
                    for r in 0..d_aux {
                        for s in 0..d_aux {
                            acc += p.get(m * d_aux + r, n * d_aux + s) * aux.get(s, r);
                        }
                    }
                    data[m * d_sys + n] = acc;
                }
            }
            ComplexMatrix::new(d_sys, d_sys, data)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::numbered(elements)
}

/// Canonical Kraus operators `Mᵢ = √Aᵢ`.
pub fn kraus_from_povm(p: &Povm) -> Result<KrausSet> {
    let ops = p
        .elements()
        .iter()
        .map(|a| sqrt_psd(a, Tolerance::default()))
        .collect::<Result<Vec<_>>>()?;
    KrausSet::new(ops)
}

/// Two-outcome filter `{V₁, √(I − V₁V₁†)}`.
pub fn filter_pair(v1: &ComplexMatrix) -> Result<KrausSet> {
    if !v1.is_square() {
        return Err(Error::DimensionMismatch("filter operator must be square".into()));
    }
    let gram = v1 * &v1.adjoint();
    let eig = eigh(&gram, Tolerance::default())?;
    let largest = eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    if largest > 1.0 + 1e-12 {
        return Err(Error::FilterNotContractive {
            singular_value: largest,
        });
    }
    let defect = &ComplexMatrix::identity(v1.rows()) - &gram;
    let v2 = sqrt_psd(&defect, Tolerance::default())?;
    KrausSet::new(vec![v1.clone(), v2])
}

/// Samples one outcome of `p` on `rho` using a caller-supplied uniform draw
/// in `[0, 1)`.
pub fn measure(p: &Povm, rho: &DensityMatrix, draw: f64) -> Result<MeasurementOutcome> {
    let probs = p.probabilities(rho)?;
    let index = select_outcome(&probs, draw)?;
    let m = sqrt_psd(&p.elements()[index], Tolerance::default())?;
    let post_state = DensityMatrix::from_unnormalized(m.conjugate(rho.matrix()))?;
    Ok(MeasurementOutcome {
        index,
        label: p.labels()[index].clone(),
        probability: probs[index],
        post_state,
    })
}
