//! ρ-ensembles and their generation at a distance.
//!
//! A measurement by Alice on her half of a shared pure state prepares a
//! specific ensemble for Bob's reduced state. Every choice of measurement
//! realizes the same density matrix.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace, re, Complex, ComplexMatrix, Subsystem, ONE, ZERO};
use crate::povm::{check_unit_qubit, diagonal_povm, rectilinear_povm, Povm, PROBABILITY_FLOOR};
use crate::states::{partially_entangled, DensityMatrix, PureState, SchmidtPair};

/// Pure states with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::InvalidEnsemble("no members".into()));
        };
        let dim = first.dim();
        if members.iter().any(|(_, s)| s.dim() != dim) {
            return Err(Error::InvalidEnsemble("states differ in dimension".into()));
        }
        if members.iter().any(|(p, _)| !(*p >= 0.0)) {
            return Err(Error::InvalidEnsemble("negative probability".into()));
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidEnsemble(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }
}

/// `Σ pᵢ |ψᵢ⟩⟨ψᵢ|`.
pub fn ensemble_density(e: &Ensemble) -> DensityMatrix {
    let rho = weighted_projector_sum(e.members.iter().map(|(p, s)| (*p, s)), e.dim());
    DensityMatrix::new(rho).expect("a valid ensemble realizes a valid density matrix")
}

fn weighted_projector_sum<'a>(
    items: impl Iterator<Item = (f64, &'a PureState)>,
    dim: usize,
) -> ComplexMatrix {
    items.fold(ComplexMatrix::zeros(dim, dim), |acc, (p, s)| {
        &acc + &s.projector().scale_real(p)
    })
}

/// The four maximally-mixed qubit ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleName {
    /// Rectilinear basis, ½ each.
    E1,
    /// Diagonal basis, ½ each.
    E2,
    /// Both bases, ¼ each.
    E3,
    /// `(α,β), (α,−β), (β,α), (β,−α)`, ¼ each.
    E4,
}

pub fn canonical_ensemble(name: EnsembleName, alpha: Complex, beta: Complex) -> Result<Ensemble> {
    let h = FRAC_1_SQRT_2;
    let q = |a: Complex, b: Complex| PureState::qubit(a, b);
    let members = match name {
        EnsembleName::E1 => vec![(0.5, q(ONE, ZERO)?), (0.5, q(ZERO, ONE)?)],
        EnsembleName::E2 => vec![(0.5, q(re(h), re(h))?), (0.5, q(re(h), re(-h))?)],
        EnsembleName::E3 => vec![
            (0.25, q(ONE, ZERO)?),
            (0.25, q(ZERO, ONE)?),
            (0.25, q(re(h), re(h))?),
            (0.25, q(re(h), re(-h))?),
        ],
        EnsembleName::E4 => {
            check_unit_qubit(alpha, beta)?;
            vec![
                (0.25, q(alpha, beta)?),
                (0.25, q(alpha, -beta)?),
                (0.25, q(beta, alpha)?),
                (0.25, q(beta, -alpha)?),
            ]
        }
    };
    Ensemble::new(members)
}

/// One of Bob's conditional states.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringBranch {
    pub label: String,
    pub probability: f64,
    /// Phase-fixed conditional state. For an impossible branch this is a
    /// placeholder `|0⟩` and `impossible` is set.
    pub bob_state: PureState,
    pub impossible: bool,
}

/// Bob's ensemble generated by Alice's measurement, indexed like the POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringResult {
    pub branches: Vec<SteeringBranch>,
}

impl SteeringResult {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// `Σ pᵢ |bobᵢ⟩⟨bobᵢ|`.
    pub fn aggregate(&self) -> ComplexMatrix {
        let dim = self.branches[0].bob_state.dim();
        weighted_projector_sum(
            self.branches
                .iter()
                .filter(|b| !b.impossible)
                .map(|b| (b.probability, &b.bob_state)),
            dim,
        )
    }

    /// The possible branches as an ensemble.
    pub fn ensemble(&self) -> Result<Ensemble> {
        Ensemble::new(
            self.branches
                .iter()
                .filter(|b| !b.impossible)
                .map(|b| (b.probability, b.bob_state.clone()))
                .collect(),
        )
    }
}

/// Applies `alice_povm` to the high-order factor of `shared` and returns
/// Bob's conditional pure states. Every POVM element must give a pure
/// conditional state (rank-one elements always do).
pub fn steer(shared: &PureState, alice_povm: &Povm) -> Result<SteeringResult> {
    let d_a = alice_povm.dim();
    if shared.dim() % d_a != 0 || shared.dim() == d_a {
        return Err(Error::DimensionMismatch(format!(
            "shared state of dimension {} cannot host an Alice factor of dimension {d_a}",
            shared.dim()
        )));
    }
    let d_b = shared.dim() / d_a;
    let joint = shared.projector();
    let id_b = ComplexMatrix::identity(d_b);
    let branches = alice_povm
        .elements()
        .iter()
        .zip(alice_povm.labels())
        .map(|(a, label)| {
            let lifted = kron(a, &id_b);
            let conditional = partial_trace(&(&lifted * &joint), (d_a, d_b), Subsystem::A)?;
            // Tr_A[(A⊗I)ρ] is Hermitian in exact arithmetic
            let conditional = (&conditional + &conditional.adjoint()).scale_real(0.5);
            let probability = conditional.trace().re.max(0.0);
            if probability < PROBABILITY_FLOOR {
                return Ok(SteeringBranch {
                    label: label.clone(),
                    probability: 0.0,
                    bob_state: PureState::basis(d_b, 0),
                    impossible: true,
                });
            }
            let bob = DensityMatrix::from_unnormalized(conditional)?;
            Ok(SteeringBranch {
                label: label.clone(),
                probability,
                bob_state: bob.as_pure()?,
                impossible: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SteeringResult { branches })
}

/// How Bob's B92 pair is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum B92Convention {
    /// Alice measures in the diagonal basis; Bob holds `a|0⟩ ± b|1⟩`.
    #[default]
    Diagonal,
    /// The diagonal pair rotated by a Hadamard on Bob's side:
    /// `((a+b), (a−b))/√2` and `((a−b), (a+b))/√2`.
    HadamardRotated,
}

/// Two-state ensemble with overlap `|a² − b²|` generated from
/// `a|00⟩ + b|11⟩` by a measurement on Alice's half.
pub fn b92_generation(s: SchmidtPair) -> Result<SteeringResult> {
    b92_generation_with(s, B92Convention::default())
}

pub fn b92_generation_with(s: SchmidtPair, convention: B92Convention) -> Result<SteeringResult> {
    let mut result = steer(&partially_entangled(s), &diagonal_povm())?;
    if convention == B92Convention::HadamardRotated {
        let h = FRAC_1_SQRT_2;
        let hadamard = ComplexMatrix::from_real_rows(&[[h, h], [h, -h]]);
        for b in &mut result.branches {
            let rotated = &hadamard * &b.bob_state.ket();
            b.bob_state = PureState::normalized(rotated.entries().to_vec())?.canonical_phase();
        }
    }
    Ok(result)
}

/// Computational-basis steering, probabilities `a²` and `b²`.
pub fn rectilinear_steering(s: SchmidtPair) -> Result<SteeringResult> {
    steer(&partially_entangled(s), &rectilinear_povm())
}
