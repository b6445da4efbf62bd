use rand::Rng;

use super::{mean_fidelity, teleport_with_table, CorrectionTable, ProtocolRecord};
use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::povm::{filter_pair, KrausSet};
use crate::states::{
    bell_state, fidelity, mixed_resource, octahedron_states, random_pure_state, BellLabel,
    DensityMatrix, PureState,
};

/// Largest filter index the planner will return.
const MAX_FILTER_INDEX: f64 = 9_007_199_254_740_992.0; // 2^53

/// Local filter `diag(λ, 1)` indexed by `n = 1/λ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    n: f64,
    lambda: f64,
}

impl FilterParams {
    pub fn from_n(n: f64) -> Result<Self> {
        if !(n.is_finite() && n >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n,
                reason: "filter index must be a finite number ≥ 1",
            });
        }
        Ok(Self {
            n,
            lambda: 1.0 / n.sqrt(),
        })
    }

    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "filter strength must lie in (0, 1]",
            });
        }
        Ok(Self {
            n: 1.0 / (lambda * lambda),
            lambda,
        })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `diag(λ, 1)`
    pub fn operator(&self) -> ComplexMatrix {
        ComplexMatrix::real_diag(&[self.lambda, 1.0])
    }
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub state: DensityMatrix,
    pub success_prob: f64,
}

/// All four joint outcomes of the two local filters; operator 0 is the one
/// where both succeed.
pub fn bilocal_kraus(fp: FilterParams) -> Result<KrausSet> {
    let local = filter_pair(&fp.operator())?;
    let ops = local.operators();
    let mut joint = Vec::with_capacity(4);
    for v in ops {
        for w in ops {
            joint.push(kron(v, w));
        }
    }
    KrausSet::new(joint)
}

/// Applies `V₁ ⊗ W₁` with `V₁ = W₁ = diag(λ, 1)` and keeps the state only
/// if both filters pass.
pub fn bilocal_filter(rho: &DensityMatrix, fp: FilterParams) -> Result<FilterOutcome> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "bilocal filter acts on two qubits, got dimension {}",
            rho.dim()
        )));
    }
    let v = fp.operator();
    let k = kron(&v, &v);
    let m = k.conjugate(rho.matrix());
    let success_prob = m.trace().re;
    Ok(FilterOutcome {
        state: DensityMatrix::from_unnormalized(m)?,
        success_prob,
    })
}

fn check_weight(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "singlet weight must lie in (0, 1)",
        });
    }
    Ok(())
}

/// `p' = 1/(1 + (1 − p)/(np))`
pub fn filtered_singlet_weight(p: f64, n: f64) -> f64 {
    1.0 / (1.0 + (1.0 - p) / (n * p))
}

/// `(1/n²)[1 + (n − 1)p]`
pub fn filter_success_probability(p: f64, n: f64) -> f64 {
    (1.0 + (n - 1.0) * p) / (n * n)
}

/// `(2F + 1)/3`
pub fn max_teleport_fidelity(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter {
            name: "F",
            value: f,
            reason: "singlet fraction must lie in [0, 1]",
        });
    }
    Ok((2.0 * f + 1.0) / 3.0)
}

/// Smallest integer `n` for which the filtered state of weight `p` reaches
/// average teleportation fidelity `1 − ε`.
pub fn plan_filter(p: f64, epsilon: f64) -> Result<u64> {
    check_weight(p)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "fidelity gap must lie in (0, 1)",
        });
    }
    let reaches = |n: f64| (2.0 * filtered_singlet_weight(p, n) + 1.0) / 3.0 >= 1.0 - epsilon;
    let required = 1.0 - 1.5 * epsilon;
    if required <= p || reaches(1.0) {
        return Ok(1);
    }
    let estimate = ((1.0 - p) * required / (p * (1.0 - required))).ceil();
    if !estimate.is_finite() || estimate > MAX_FILTER_INDEX {
        return Err(Error::Capability(format!(
            "epsilon = {epsilon} needs a filter index beyond 2^53"
        )));
    }
    let mut n = estimate.max(1.0);
    while n > 1.0 && reaches(n - 1.0) {
        n -= 1.0;
    }
    while !reaches(n) {
        n += 1.0;
        if n > MAX_FILTER_INDEX {
            return Err(Error::Capability(format!(
                "epsilon = {epsilon} needs a filter index beyond 2^53"
            )));
        }
    }
    Ok(n as u64)
}

/// Teleportation fidelity averaged uniformly over pure inputs, computed
/// exactly from the six octahedron states.
pub fn average_teleport_fidelity(resource: &DensityMatrix, table: &CorrectionTable) -> Result<f64> {
    let states = octahedron_states();
    let mut total = 0.0;
    for phi in &states {
        total += mean_fidelity(&teleport_with_table(phi, resource, table)?);
    }
    Ok(total / states.len() as f64)
}

/// Same average estimated from `samples` Haar-random inputs.
pub fn sampled_average_teleport_fidelity<R: Rng + ?Sized>(
    resource: &DensityMatrix,
    table: &CorrectionTable,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: 0.0,
            reason: "need at least one sample",
        });
    }
    let mut total = 0.0;
    for _ in 0..samples {
        let phi = random_pure_state(2, rng);
        total += mean_fidelity(&teleport_with_table(&phi, resource, table)?);
    }
    Ok(total / samples as f64)
}

#[derive(Debug, Clone)]
pub struct QuasiConclusive {
    pub filter: FilterParams,
    pub filtered_state: DensityMatrix,
    pub singlet_fraction: f64,
    pub records: Vec<ProtocolRecord>,
    /// Probability that both filters pass; teleportation only runs then.
    pub overall_success_prob: f64,
    pub average_fidelity: f64,
    pub predicted_fidelity: f64,
}

/// Filters `p|Ψ⁻⟩⟨Ψ⁻| + (1 − p)|00⟩⟨00|` with the smallest index reaching
/// average fidelity `1 − ε`, then teleports `phi` over the result.
pub fn quasi_conclusive_teleport(phi: &PureState, p: f64, epsilon: f64) -> Result<QuasiConclusive> {
    let n = plan_filter(p, epsilon)?;
    let filter = FilterParams::from_n(n as f64)?;
    let out = bilocal_filter(&mixed_resource(p)?, filter)?;
    let table = CorrectionTable::for_bell(BellLabel::PsiMinus);
    let singlet_fraction = fidelity(&bell_state(BellLabel::PsiMinus), &out.state)?;
    let records = teleport_with_table(phi, &out.state, &table)?;
    let average_fidelity = average_teleport_fidelity(&out.state, &table)?;
    let predicted_fidelity = max_teleport_fidelity(singlet_fraction)?;
    if average_fidelity < 1.0 - epsilon - 1e-9 {
        return Err(Error::Internal(format!(
            "planned n = {n} gives average fidelity {average_fidelity}, below 1 − {epsilon}"
        )));
    }
    Ok(QuasiConclusive {
        filter,
        filtered_state: out.state,
        singlet_fraction,
        records,
        overall_success_prob: out.success_prob,
        average_fidelity,
        predicted_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::mixed_resource_unchecked;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    const NS: [f64; 5] = [1.0, 2.0, 4.0, 16.0, 256.0];

    #[test]
    fn filter_params() {
        let f = FilterParams::from_n(4.0).unwrap();
        assert_eq!(f.lambda(), 0.5);
        let g = FilterParams::from_lambda(0.5).unwrap();
        assert_eq!(g.n(), 4.0);
        assert!(FilterParams::from_n(0.5).is_err());
        assert!(FilterParams::from_n(f64::INFINITY).is_err());
        assert!(FilterParams::from_lambda(0.0).is_err());
        assert!(FilterParams::from_lambda(1.5).is_err());
    }

    #[test]
    fn spot_values() {
        let out = bilocal_filter(&mixed_resource(0.5).unwrap(), FilterParams::from_n(4.0).unwrap()).unwrap();
        assert!((out.success_prob - 0.15625).abs() < 1e-12);
        assert!(out.state.matrix().approx_eq(mixed_resource_unchecked(0.8).matrix(), 1e-12));
        assert!((filtered_singlet_weight(0.5, 4.0) - 0.8).abs() < 1e-15);
        assert_eq!(filter_success_probability(0.5, 4.0), 0.15625);
    }

    #[test]
    fn identity_filter() {
        let rho = mixed_resource(0.3).unwrap();
        let out = bilocal_filter(&rho, FilterParams::from_n(1.0).unwrap()).unwrap();
        assert!((out.success_prob - 1.0).abs() < 1e-15);
        assert!(out.state.matrix().approx_eq(rho.matrix(), 1e-15));
    }

    #[test]
    fn singlet_is_a_fixed_point() {
        let singlet = bell_state(BellLabel::PsiMinus).density();
        for n in NS {
            let out = bilocal_filter(&singlet, FilterParams::from_n(n).unwrap()).unwrap();
            assert!((out.success_prob - 1.0 / n).abs() < 1e-12);
            assert!(out.state.matrix().approx_eq(singlet.matrix(), 1e-12));
        }
    }

    #[test]
    fn filter_grid_matches_closed_forms() {
        for p in PS {
            let rho = mixed_resource(p).unwrap();
            for n in NS {
                let out = bilocal_filter(&rho, FilterParams::from_n(n).unwrap()).unwrap();
                let pp = filtered_singlet_weight(p, n);
                assert!(out.state.matrix().approx_eq(mixed_resource_unchecked(pp).matrix(), 1e-12));
                assert!((out.success_prob - filter_success_probability(p, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monotone_in_n() {
        for p in PS {
            for w in NS.windows(2) {
                assert!(filtered_singlet_weight(p, w[1]) > filtered_singlet_weight(p, w[0]));
                assert!(filter_success_probability(p, w[1]) < filter_success_probability(p, w[0]));
            }
        }
    }

    #[test]
    fn bilocal_kraus_is_complete() {
        let k = bilocal_kraus(FilterParams::from_n(3.0).unwrap()).unwrap();
        assert_eq!(k.len(), 4);
        assert!(k.completeness_residual() < 1e-12);
    }

    #[test]
    fn fidelity_bound() {
        assert_eq!(max_teleport_fidelity(1.0).unwrap(), 1.0);
        assert_eq!(max_teleport_fidelity(0.25).unwrap(), 0.5);
        assert!((max_teleport_fidelity(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(max_teleport_fidelity(1.1).is_err());
        assert!(max_teleport_fidelity(-0.1).is_err());
    }

    #[test]
    fn planner_spot_values() {
        assert_eq!(plan_filter(0.5, 0.5).unwrap(), 1);
        assert_eq!(plan_filter(0.5, 0.01).unwrap(), 66);
        assert!((filter_success_probability(0.5, 66.0) - 7.69e-3).abs() < 1e-5);
        assert!(plan_filter(0.0, 0.1).is_err());
        assert!(plan_filter(0.5, 0.0).is_err());
        assert!(matches!(plan_filter(0.5, 1e-18), Err(Error::Capability(_))));
    }

    #[test]
    fn planner_is_minimal() {
        for p in PS {
            for eps in [0.3, 0.1, 0.01, 0.001] {
                let n = plan_filter(p, eps).unwrap() as f64;
                let fid = |n: f64| (2.0 * filtered_singlet_weight(p, n) + 1.0) / 3.0;
                assert!(fid(n) >= 1.0 - eps);
                if n > 1.0 {
                    assert!(fid(n - 1.0) < 1.0 - eps);
                }
            }
        }
    }

    #[test]
    fn average_fidelity_matches_bound() {
        let table = CorrectionTable::singlet();
        for p in PS {
            for n in NS {
                let out = bilocal_filter(&mixed_resource(p).unwrap(), FilterParams::from_n(n).unwrap()).unwrap();
                let exact = average_teleport_fidelity(&out.state, &table).unwrap();
                let bound = max_teleport_fidelity(filtered_singlet_weight(p, n)).unwrap();
                assert!((exact - bound).abs() < 1e-9, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn sampled_average_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = mixed_resource(0.6).unwrap();
        let table = CorrectionTable::singlet();
        let sampled = sampled_average_teleport_fidelity(&rho, &table, 2000, &mut rng).unwrap();
        let exact = average_teleport_fidelity(&rho, &table).unwrap();
        assert!((sampled - exact).abs() < 0.02);
        assert!(sampled_average_teleport_fidelity(&rho, &table, 0, &mut rng).is_err());
    }

    #[test]
    fn quasi_protocol_shrinks_success() {
        let phi = PureState::basis(2, 0);
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let q = quasi_conclusive_teleport(&phi, 0.5, eps).unwrap();
            assert!(q.average_fidelity >= 1.0 - eps);
            assert!((q.average_fidelity - q.predicted_fidelity).abs() < 1e-9);
            assert!(q.overall_success_prob < last);
            last = q.overall_success_prob;
            assert_eq!(q.records.len(), 4);
        }
    }

    #[test]
    fn quasi_loose_tolerance_needs_no_filter() {
        let q = quasi_conclusive_teleport(&PureState::basis(2, 1), 0.5, 0.9).unwrap();
        assert_eq!(q.filter.n(), 1.0);
        assert!((q.overall_success_prob - 1.0).abs() < 1e-15);
    }
}
