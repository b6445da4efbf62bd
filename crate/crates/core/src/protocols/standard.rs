use super::{record_from_branch, CorrectionTable, ProtocolRecord};
use crate::error::{Error, Result};
use crate::linalg::{kron, kron_all, reduce, ComplexMatrix};
use crate::states::{bell_state, partially_entangled, BellLabel, DensityMatrix, PureState, SchmidtPair};

/// Bits Alice sends to name one of four Bell outcomes.
const BELL_BITS: u8 = 2;

/// Bell measurement on particles 1 and 2 followed by Bob's correction.
///
/// `joint` is the state of `reference ⊗ 1 ⊗ 2 ⊗ 3` with the reference of
/// dimension `d_ref` (1 for a bare qubit). Returns per outcome the
/// unnormalized state of `reference ⊗ 3` before correction.
fn bell_branches(
    joint: &ComplexMatrix,
    d_ref: usize,
) -> Result<Vec<(BellLabel, ComplexMatrix)>> {
    let id_ref = ComplexMatrix::identity(d_ref);
    let id_bob = ComplexMatrix::identity(2);
    BellLabel::ALL
        .iter()
        .map(|&label| {
            let p = kron_all([&id_ref, &bell_state(label).projector(), &id_bob]);
            let projected = p.conjugate(joint);
            Ok((label, reduce(&projected, &[d_ref, 4, 2], &[0, 2])?))
        })
        .collect()
}

fn run_bell_protocol(
    input: &PureState,
    resource: &DensityMatrix,
    table: &CorrectionTable,
) -> Result<Vec<ProtocolRecord>> {
    if input.dim() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "input of dimension {} does not end in a qubit",
            input.dim()
        )));
    }
    if resource.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "resource must be two qubits, got dimension {}",
            resource.dim()
        )));
    }
    let d_ref = input.dim() / 2;
    let joint = kron(&input.projector(), resource.matrix());
    let lift = |u: &ComplexMatrix| kron(&ComplexMatrix::identity(d_ref), u);
    bell_branches(&joint, d_ref)?
        .into_iter()
        .map(|(label, bob)| {
            record_from_branch(
                label.name().to_string(),
                bob,
                Some(lift(table.correction(label))),
                input,
                true,
                BELL_BITS,
            )
        })
        .collect()
}

/// Teleports `phi` through a two-qubit pure resource, using the corrections
/// of the closest Bell state. Four branches in [`BellLabel::ALL`] order.
pub fn standard_teleport(phi: &PureState, resource: &PureState) -> Result<Vec<ProtocolRecord>> {
    if phi.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "teleported state must be a qubit, got dimension {}",
            phi.dim()
        )));
    }
    if resource.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "resource must be two qubits, got dimension {}",
            resource.dim()
        )));
    }
    let rho = resource.density();
    let table = CorrectionTable::for_resource(&rho)?;
    run_bell_protocol(phi, &rho, &table)
}

/// Teleports `phi` through a possibly mixed resource with an explicit
/// correction table.
pub fn teleport_with_table(
    phi: &PureState,
    resource: &DensityMatrix,
    table: &CorrectionTable,
) -> Result<Vec<ProtocolRecord>> {
    if phi.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "teleported state must be a qubit, got dimension {}",
            phi.dim()
        )));
    }
    run_bell_protocol(phi, resource, table)
}

/// Teleports the low-order qubit of `joint` (a reference system entangled
/// with that qubit). Fidelities compare the final `reference ⊗ Bob` state
/// with `joint`.
pub fn teleport_entangled_half(
    joint: &PureState,
    resource: &PureState,
) -> Result<Vec<ProtocolRecord>> {
    if joint.dim() < 4 {
        return Err(Error::DimensionMismatch(
            "entangled input needs a reference system".into(),
        ));
    }
    let rho = resource.density();
    let table = CorrectionTable::for_resource(&rho)?;
    run_bell_protocol(joint, &rho, &table)
}

/// Standard protocol over `a|00⟩ + b|11⟩` with the `Φ⁺` corrections.
pub fn naive_partial_teleport(phi: &PureState, s: SchmidtPair) -> Result<Vec<ProtocolRecord>> {
    teleport_with_table(
        phi,
        &partially_entangled(s).density(),
        &CorrectionTable::for_bell(BellLabel::PhiPlus),
    )
}

/// `(|α|²a² + |β|²b²)/2`.
pub fn naive_phi_plus_probability(phi: &PureState, s: SchmidtPair) -> f64 {
    let (pa, pb) = (phi.amplitude(0).norm_sqr(), phi.amplitude(1).norm_sqr());
    (pa * s.a() * s.a() + pb * s.b() * s.b()) / 2.0
}

/// `(|α|²a + |β|²b)² / (|α|²a² + |β|²b²)`.
pub fn naive_phi_plus_fidelity(phi: &PureState, s: SchmidtPair) -> f64 {
    let (pa, pb) = (phi.amplitude(0).norm_sqr(), phi.amplitude(1).norm_sqr());
    let num = pa * s.a() + pb * s.b();
    num * num / (pa * s.a() * s.a() + pb * s.b() * s.b())
}

/// Single-shot Bell-outcome probabilities on particles 1, 2 of a three-qubit
/// state.
pub fn bell_probabilities(joint: &PureState) -> Result<Vec<(BellLabel, f64)>> {
    if joint.dim() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "three-qubit state expected, got dimension {}",
            joint.dim()
        )));
    }
    Ok(bell_branches(&joint.projector(), 1)?
        .into_iter()
        .map(|(l, m)| (l, m.trace().re))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{re, ONE, ZERO};
    use crate::protocols::mean_fidelity;
    use crate::states::random_pure_state;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn singlet() -> PureState {
        bell_state(BellLabel::PsiMinus)
    }

    #[test]
    fn basis_input_over_singlet() {
        let records = standard_teleport(&PureState::basis(2, 0), &singlet()).unwrap();
        assert_eq!(records.len(), 4);
        for r in &records {
            assert!((r.probability - 0.25).abs() < 1e-12);
            assert!((r.fidelity - 1.0).abs() < 1e-12);
            assert!(r.success);
            assert_eq!(r.classical_bits, 2);
        }
    }

    #[test]
    fn bob_states_before_correction() {
        // (−β, α), (β, α), (−α, β), (−α, −β) for Φ⁺, Φ⁻, Ψ⁺, Ψ⁻
        let (a, b) = (re(0.6), re(0.8));
        let phi = PureState::qubit(a, b).unwrap();
        let records = standard_teleport(&phi, &singlet()).unwrap();
        let expected = [(-b, a), (b, a), (-a, b), (-a, -b)];
        for (r, (x, y)) in records.iter().zip(expected) {
            let target = PureState::qubit(x, y).unwrap();
            let pre = r.bob_state_pre.as_ref().unwrap();
            assert!((crate::states::fidelity(&target, pre).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entangled_half_is_teleported() {
        let pair = bell_state(BellLabel::PhiPlus);
        let records = teleport_entangled_half(&pair, &singlet()).unwrap();
        assert_eq!(records.len(), 4);
        for r in &records {
            assert!((r.probability - 0.25).abs() < 1e-12);
            assert!((r.fidelity - 1.0).abs() < 1e-12);
        }
        assert!(teleport_entangled_half(&PureState::basis(2, 0), &singlet()).is_err());
    }

    #[test]
    fn dimension_errors() {
        assert!(standard_teleport(&PureState::basis(4, 0), &singlet()).is_err());
        assert!(standard_teleport(&PureState::basis(2, 0), &PureState::basis(2, 0)).is_err());
        assert!(bell_probabilities(&PureState::basis(4, 0)).is_err());
    }

    #[test]
    fn naive_basis_input() {
        for a2 in [0.5, 0.7, 0.9, 1.0] {
            let s = SchmidtPair::from_a_squared(a2).unwrap();
            let records = naive_partial_teleport(&PureState::basis(2, 0), s).unwrap();
            let phi_plus = &records[0];
            assert_eq!(phi_plus.outcome_label, "phi+");
            assert!((phi_plus.fidelity - 1.0).abs() < 1e-12);
            assert!((phi_plus.probability - a2 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn naive_balanced_input_spot_value() {
        let h = FRAC_1_SQRT_2;
        let phi = PureState::from_real(&[h, h]).unwrap();
        let s = SchmidtPair::from_a_squared(0.8).unwrap();
        let records = naive_partial_teleport(&phi, s).unwrap();
        assert!((records[0].fidelity - 0.9).abs() < 1e-12);
        assert!((records[0].probability - 0.25).abs() < 1e-12);
        assert!((naive_phi_plus_fidelity(&phi, s) - 0.9).abs() < 1e-12);
        assert!((naive_phi_plus_probability(&phi, s) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn naive_reduces_to_standard_at_maximal_entanglement() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let phi = random_pure_state(2, &mut rng);
        let records = naive_partial_teleport(&phi, SchmidtPair::maximal()).unwrap();
        assert!(records.iter().all(|r| (r.fidelity - 1.0).abs() < 1e-12));
        assert!((mean_fidelity(&records) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn naive_impossible_branches() {
        let records = naive_partial_teleport(&PureState::qubit(ONE, ZERO).unwrap(), SchmidtPair::new(1.0, 0.0).unwrap()).unwrap();
        assert!(records[2].bob_state_pre.is_none());
        assert_eq!(records[2].probability, 0.0);
        let total: f64 = records.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn singlet_teleportation_is_exact(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = random_pure_state(2, &mut rng);
            let records = standard_teleport(&phi, &singlet()).unwrap();
            let total: f64 = records.iter().map(|r| r.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            for r in &records {
                prop_assert!((r.probability - 0.25).abs() < 1e-10);
                prop_assert!(r.fidelity >= 1.0 - 1e-10);
            }
        }

        #[test]
        fn every_bell_resource_teleports(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = random_pure_state(2, &mut rng);
            for label in BellLabel::ALL {
                let records = standard_teleport(&phi, &bell_state(label)).unwrap();
                for r in &records {
                    prop_assert!(r.fidelity >= 1.0 - 1e-10);
                }
            }
        }

        #[test]
        fn naive_matches_closed_forms(seed in any::<u64>(), a2 in 0.5..1.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = random_pure_state(2, &mut rng);
            let s = SchmidtPair::from_a_squared(a2).unwrap();
            let records = naive_partial_teleport(&phi, s).unwrap();
            prop_assert!((records[0].probability - naive_phi_plus_probability(&phi, s)).abs() < 1e-10);
            prop_assert!((records[0].fidelity - naive_phi_plus_fidelity(&phi, s)).abs() < 1e-10);
        }
    }
}
