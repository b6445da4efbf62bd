use super::{record_from_branch, ProtocolRecord};
use crate::error::{Error, Result};
use crate::linalg::{kron, reduce, sqrt_psd, ComplexMatrix, Tolerance};
use crate::povm::discrimination_povm;
use crate::states::{bell_state, partially_entangled, BellLabel, PureState, SchmidtPair};

/// Which two-dimensional subspace of particles 1, 2 the first stage finds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// span{|00⟩, |11⟩}
    Even,
    /// span{|10⟩, |01⟩}
    Odd,
}

impl Parity {
    pub const ALL: [Parity; 2] = [Parity::Even, Parity::Odd];

    pub fn name(&self) -> &'static str {
        match self {
            Parity::Even => "00|11",
            Parity::Odd => "10|01",
        }
    }

    /// 4×2 isometry whose columns span the subspace, in the order used for
    /// the discrimination POVM.
    fn isometry(&self) -> ComplexMatrix {
        let (first, second) = match self {
            Parity::Even => (0, 3),
            Parity::Odd => (2, 1),
        };
        let mut rows = [[0.0; 2]; 4];
        rows[first][0] = 1.0;
        rows[second][1] = 1.0;
        ComplexMatrix::from_real_rows(&rows)
    }

    fn bell_pair(&self) -> [BellLabel; 2] {
        match self {
            Parity::Even => [BellLabel::PhiPlus, BellLabel::PhiMinus],
            Parity::Odd => [BellLabel::PsiPlus, BellLabel::PsiMinus],
        }
    }

    /// Bob's correction after the discrimination identified `(a, b)`
    /// (`plus`) or `(a, −b)`.
    fn correction(&self, plus: bool) -> ComplexMatrix {
        let rows = match (self, plus) {
            (Parity::Even, true) => [[1.0, 0.0], [0.0, 1.0]],
            (Parity::Even, false) => [[1.0, 0.0], [0.0, -1.0]],
            (Parity::Odd, true) => [[0.0, 1.0], [1.0, 0.0]],
            (Parity::Odd, false) => [[0.0, 1.0], [-1.0, 0.0]],
        };
        ComplexMatrix::from_real_rows(&rows)
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityStage {
    pub parity: Parity,
    pub probability: f64,
    /// Joint probabilities of this parity and each Bell vector inside it.
    pub outcomes: Vec<(BellLabel, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStepBell {
    pub stages: Vec<ParityStage>,
}

impl TwoStepBell {
    /// Composite outcome probabilities in [`BellLabel::ALL`] order.
    pub fn joint_probabilities(&self) -> Vec<(BellLabel, f64)> {
        BellLabel::ALL
            .iter()
            .map(|&l| {
                let p = self
                    .stages
                    .iter()
                    .flat_map(|s| s.outcomes.iter())
                    .find(|(o, _)| *o == l)
                    .map(|(_, p)| *p)
                    .unwrap_or(0.0);
                (l, p)
            })
            .collect()
    }
}

fn check_three_qubits(joint: &PureState) -> Result<()> {
    if joint.dim() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "three-qubit state expected, got dimension {}",
            joint.dim()
        )));
    }
    Ok(())
}

fn expectation(op12: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    let full = kron(op12, &ComplexMatrix::identity(2));
    (&full * rho).trace().re
}

/// Bell measurement on particles 1, 2 done as a parity measurement followed
/// by a projective measurement inside the chosen subspace.
pub fn two_step_bell(joint: &PureState) -> Result<TwoStepBell> {
    check_three_qubits(joint)?;
    let rho = joint.projector();
    let stages = Parity::ALL
        .iter()
        .map(|&parity| {
            let s = parity.isometry();
            let probability = expectation(&(&s * &s.adjoint()), &rho);
            let outcomes = parity
                .bell_pair()
                .iter()
                .map(|&l| {
                    // the subspace Bell vector, embedded back in four dimensions
                    let inner = &s.adjoint() * &bell_state(l).ket();
                    let v = &s * &inner;
                    let proj = &v * &v.adjoint();
                    (l, expectation(&proj, &rho))
                })
                .collect();
            ParityStage {
                parity,
                probability,
                outcomes,
            }
        })
        .collect();
    Ok(TwoStepBell { stages })
}

/// Conclusive teleportation of `phi` over `a|00⟩ + b|11⟩` with `a ≥ b`.
///
/// Six branches labelled `"<parity>:<outcome>"`, even subspace first; four
/// when `b = 0`. Successful branches cost 3 bits, inconclusive ones 1.
pub fn conclusive_teleport(phi: &PureState, s: SchmidtPair) -> Result<Vec<ProtocolRecord>> {
    if phi.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "teleported state must be a qubit, got dimension {}",
            phi.dim()
        )));
    }
    let disc = discrimination_povm(s)?;
    let joint = phi.tensor(&partially_entangled(s)).projector();
    let mut records = Vec::new();
    for parity in Parity::ALL {
        let iso = parity.isometry();
        for (i, (a, label)) in disc
            .povm()
            .elements()
            .iter()
            .zip(disc.povm().labels())
            .enumerate()
        {
            let root = sqrt_psd(a, Tolerance::default())?;
            let k = kron(&iso.conjugate(&root), &ComplexMatrix::identity(2));
            let bob = reduce(&k.conjugate(&joint), &[4, 2], &[1])?;
            let conclusive = disc.is_conclusive(i);
            let correction = conclusive.then(|| parity.correction(i == 0));
            records.push(record_from_branch(
                format!("{parity}:{label}"),
                bob,
                correction,
                phi,
                conclusive,
                if conclusive { 3 } else { 1 },
            )?);
        }
    }
    Ok(records)
}

/// `1 − (a² − b²)` for `a ≥ b`.
pub fn conclusive_success_probability(s: SchmidtPair) -> f64 {
    let s = s.ordered();
    1.0 - (s.a() * s.a() - s.b() * s.b())
}
