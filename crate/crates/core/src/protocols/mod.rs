//! End-to-end teleportation protocols.
//!
//! Particles are ordered as: the qubit to teleport (1), Alice's half of the
//! resource (2), Bob's half (3). When a reference system is entangled with
//! particle 1 it sits above all three.

mod conclusive;
mod quasi;
mod standard;

pub use conclusive::{
    conclusive_success_probability, conclusive_teleport, two_step_bell, Parity, ParityStage,
    TwoStepBell,
};
pub use quasi::{
    average_teleport_fidelity, bilocal_filter, bilocal_kraus, filter_success_probability,
    filtered_singlet_weight, max_teleport_fidelity, plan_filter, quasi_conclusive_teleport,
    sampled_average_teleport_fidelity, FilterOutcome, FilterParams, QuasiConclusive,
};
pub use standard::{
    bell_probabilities, naive_partial_teleport, naive_phi_plus_fidelity,
    naive_phi_plus_probability, standard_teleport, teleport_entangled_half, teleport_with_table,
};

use crate::error::{Error, Result};
use crate::linalg::{unitarity_deviation, Complex, ComplexMatrix, Tolerance, ZERO};
use crate::povm::select_outcome;
use crate::states::{bell_state, fidelity, BellLabel, DensityMatrix, PureState};

/// Bob's rotation for each Bell outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTable {
    entries: Vec<(BellLabel, ComplexMatrix)>,
}

impl CorrectionTable {
    /// Rotations for a shared singlet:
    ///
    /// ```text
    /// Φ⁺: [[0, 1], [−1, 0]]   Φ⁻: [[0, 1], [1, 0]]
    /// Ψ⁺: [[−1, 0], [0, 1]]   Ψ⁻: I
    /// ```
    pub fn singlet() -> Self {
        let m = |rows: [[f64; 2]; 2]| ComplexMatrix::from_real_rows(&rows);
        Self {
            entries: vec![
                (BellLabel::PhiPlus, m([[0.0, 1.0], [-1.0, 0.0]])),
                (BellLabel::PhiMinus, m([[0.0, 1.0], [1.0, 0.0]])),
                (BellLabel::PsiPlus, m([[-1.0, 0.0], [0.0, 1.0]])),
                (BellLabel::PsiMinus, m([[1.0, 0.0], [0.0, 1.0]])),
            ],
        }
    }

    /// Rotations for a resource in the given Bell state. The singlet uses
    /// [`CorrectionTable::singlet`]; the others are derived by inverting
    /// the map from the input qubit to Bob's conditional state.
    pub fn for_bell(resource: BellLabel) -> Self {
        if resource == BellLabel::PsiMinus {
            return Self::singlet();
        }
        Self {
            entries: derive_corrections(&bell_state(resource)),
        }
    }

    /// Table of the Bell state closest to `resource` in fidelity.
    pub fn for_resource(resource: &DensityMatrix) -> Result<Self> {
        if resource.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "teleportation resource must be two qubits, got dimension {}",
                resource.dim()
            )));
        }
        let mut best = (BellLabel::PsiMinus, f64::NEG_INFINITY);
        // the singlet wins ties
        for label in [
            BellLabel::PsiMinus,
            BellLabel::PhiPlus,
            BellLabel::PhiMinus,
            BellLabel::PsiPlus,
        ] {
            let f = fidelity(&bell_state(label), resource)?;
            if f > best.1 + 1e-12 {
                best = (label, f);
            }
        }
        Ok(Self::for_bell(best.0))
    }

    pub fn correction(&self, outcome: BellLabel) -> &ComplexMatrix {
        &self
            .entries
            .iter()
            .find(|(l, _)| *l == outcome)
            .expect("table covers every Bell outcome")
            .1
    }

    pub fn entries(&self) -> &[(BellLabel, ComplexMatrix)] {
        &self.entries
    }

    /// Largest unitarity defect over the table.
    pub fn unitarity_deviation(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, u)| unitarity_deviation(u))
            .fold(0.0, f64::max)
    }
}

/// Inverts, for each Bell outcome, the linear map taking the input qubit to
/// Bob's conditional state `T = 2 (⟨B|₁₂ ⊗ I₃)(· ⊗ |R⟩₂₃)`.
fn derive_corrections(resource: &PureState) -> Vec<(BellLabel, ComplexMatrix)> {
    BellLabel::ALL
        .iter()
        .map(|&outcome| {
            let b = bell_state(outcome);
            let mut t = vec![ZERO; 4];
            for bob in 0..2 {
                for j in 0..2 {
                    let acc: Complex = (0..2)
                        .map(|y| b.amplitude(j * 2 + y).conj() * resource.amplitude(y * 2 + bob))
                        .sum();
                    t[bob * 2 + j] = acc * 2.0;
                }
            }
            let t = ComplexMatrix::new(2, 2, t).expect("2x2 map");
            (outcome, t.adjoint())
        })
        .collect()
}

/// One branch of a protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolRecord {
    pub outcome_label: String,
    pub probability: f64,
    /// Bob's conditional state before his correction; `None` when the
    /// branch cannot occur.
    pub bob_state_pre: Option<DensityMatrix>,
    pub correction: Option<ComplexMatrix>,
    pub bob_state_post: Option<DensityMatrix>,
    /// Fidelity of the post-correction state with the input; 0 for an
    /// impossible branch.
    pub fidelity: f64,
    /// Whether Bob keeps the state.
    pub success: bool,
    /// Classical bits Alice sends on this branch.
    pub classical_bits: u8,
}

/// Sum of branch probabilities flagged successful.
pub fn success_probability(records: &[ProtocolRecord]) -> f64 {
    records
        .iter()
        .filter(|r| r.success)
        .map(|r| r.probability)
        .sum()
}

/// `Σ pᵢ Fᵢ` over all branches.
pub fn mean_fidelity(records: &[ProtocolRecord]) -> f64 {
    records.iter().map(|r| r.probability * r.fidelity).sum()
}

/// Picks a branch by inverse CDF over the record probabilities.
pub fn sample_record(records: &[ProtocolRecord], draw: f64) -> Result<&ProtocolRecord> {
    let probs: Vec<f64> = records.iter().map(|r| r.probability).collect();
    Ok(&records[select_outcome(&probs, draw)?])
}

/// Builds a record from an unnormalized branch operator on Bob's side.
pub(crate) fn record_from_branch(
    label: String,
    unnormalized_bob: ComplexMatrix,
    correction: Option<ComplexMatrix>,
    target: &PureState,
    success: bool,
    classical_bits: u8,
) -> Result<ProtocolRecord> {
    let probability = unnormalized_bob.trace().re.max(0.0);
    if probability < crate::povm::PROBABILITY_FLOOR {
        return Ok(ProtocolRecord {
            outcome_label: label,
            probability: 0.0,
            bob_state_pre: None,
            correction,
            bob_state_post: None,
            fidelity: 0.0,
            success: false,
            classical_bits,
        });
    }
    let hermitian = (&unnormalized_bob + &unnormalized_bob.adjoint()).scale_real(0.5);
    let pre = DensityMatrix::from_unnormalized(hermitian)?;
    let post = match &correction {
        Some(u) => {
            let m = u.conjugate(pre.matrix());
            DensityMatrix::with_tolerance(m, Tolerance::default())?
        }
        None => pre.clone(),
    };
    let f = fidelity(target, &post)?;
    Ok(ProtocolRecord {
        outcome_label: label,
        probability,
        bob_state_pre: Some(pre),
        correction,
        bob_state_post: Some(post),
        fidelity: f,
        success,
        classical_bits,
    })
}
