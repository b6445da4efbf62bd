use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::table::{Table, Value};
use super::{Command, QuasiSweep, ResourceArg, RunConfig, SteerPovm};
use crate::error::Result;
use crate::linalg::{min_eigenvalue, reduce, ComplexMatrix, Tolerance};
use crate::povm::{
    bell_projectors, completeness_residual, diagonal_povm, discrimination_operators_unnormalized, discrimination_povm,
    induced_povm, kraus_from_povm, rectilinear_povm, select_outcome, teleportation_povm,
    TELEPOVM_BELL_ORDER,
};
use crate::protocols::{
    average_teleport_fidelity, bilocal_filter, conclusive_success_probability,
    conclusive_teleport, filter_success_probability, filtered_singlet_weight,
    max_teleport_fidelity, naive_partial_teleport, naive_phi_plus_fidelity,
    naive_phi_plus_probability, quasi_conclusive_teleport, standard_teleport, CorrectionTable,
    FilterParams, ProtocolRecord,
};
use crate::states::{
    bell_state, fidelity, mixed_resource, partially_entangled, BellLabel, PureState, SchmidtPair,
};
use crate::steering::steer;

/// Trial indices occupy the low 40 bits of the ChaCha stream id.
pub const MAX_TRIALS: u64 = 1 << 40;

const PSD_TOL: f64 = 1e-9;
const UNAMBIGUOUS_TOL: f64 = 1e-10;

/// Generator for one Monte Carlo trial, independent of execution order.
pub fn trial_rng(seed: u64, point: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) | trial);
    rng
}

/// Outcome counts of `trials` independent draws from `probs`.
fn sample_counts(probs: &[f64], seed: u64, point: usize, trials: u64) -> Result<Vec<u64>> {
    let k = probs.len();
    (0..trials)
        .into_par_iter()
        .try_fold(
            || vec![0u64; k],
            |mut acc, t| {
                let draw: f64 = trial_rng(seed, point, t).gen();
                acc[select_outcome(probs, draw)?] += 1;
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
}

fn record_counts(records: &[ProtocolRecord], cfg: &RunConfig, point: usize) -> Result<Vec<u64>> {
    let probs: Vec<f64> = records.iter().map(|r| r.probability).collect();
    sample_counts(&probs, cfg.seed, point, cfg.trials)
}

/// Builds the table for `config`. No I/O.
pub fn run(config: &RunConfig) -> Result<Table> {
    match &config.command {
        Command::Teleport { phi, resource } => teleport(config, phi, *resource),
        Command::Naive { phi, a2 } => naive(config, phi, a2),
        Command::Conclusive { phi, a2 } => conclusive(config, phi, a2),
        Command::Quasi { phi, p, filter } => quasi(config, phi, p, filter),
        Command::Steer { phi, a2, povms } => steering(config, phi, a2, povms),
        Command::PovmCheck { phi, a2 } => povm_check(phi, a2),
    }
}

fn bell_label(r: ResourceArg) -> BellLabel {
    match r {
        ResourceArg::PsiMinus => BellLabel::PsiMinus,
        ResourceArg::PsiPlus => BellLabel::PsiPlus,
        ResourceArg::PhiMinus => BellLabel::PhiMinus,
        ResourceArg::PhiPlus => BellLabel::PhiPlus,
    }
}

fn teleport(cfg: &RunConfig, phi: &PureState, resource: ResourceArg) -> Result<Table> {
    let label = bell_label(resource);
    let records = standard_teleport(phi, &bell_state(label))?;
    let counts = record_counts(&records, cfg, 0)?;
    let mut t = Table::new(&[
        "resource",
        "outcome",
        "probability",
        "fidelity",
        "classical_bits",
        "trials",
        "count",
        "frequency",
    ]);
    for (r, c) in records.iter().zip(counts) {
        t.push(vec![
            label.name().into(),
            r.outcome_label.as_str().into(),
            r.probability.into(),
            r.fidelity.into(),
            (r.classical_bits as u64).into(),
            cfg.trials.into(),
            c.into(),
            (c as f64 / cfg.trials as f64).into(),
        ]);
    }
    Ok(t)
}

fn naive(cfg: &RunConfig, phi: &PureState, a2s: &[f64]) -> Result<Table> {
    let mut t = Table::new(&[
        "a2",
        "outcome",
        "probability",
        "fidelity",
        "formula_probability",
        "formula_fidelity",
        "trials",
        "count",
        "frequency",
    ]);
    for (point, &a2) in a2s.iter().enumerate() {
        let s = SchmidtPair::from_a_squared(a2)?;
        let records = naive_partial_teleport(phi, s)?;
        let counts = record_counts(&records, cfg, point)?;
        for (r, c) in records.iter().zip(counts) {
            let phi_plus = r.outcome_label == BellLabel::PhiPlus.name();
            t.push(vec![
                a2.into(),
                r.outcome_label.as_str().into(),
                r.probability.into(),
                r.fidelity.into(),
                phi_plus.then(|| naive_phi_plus_probability(phi, s)).into(),
                phi_plus.then(|| naive_phi_plus_fidelity(phi, s)).into(),
                cfg.trials.into(),
                c.into(),
                (c as f64 / cfg.trials as f64).into(),
            ]);
        }
    }
    Ok(t)
}

fn conclusive(cfg: &RunConfig, phi: &PureState, a2s: &[f64]) -> Result<Table> {
    let mut t = Table::new(&[
        "a2",
        "success_prob",
        "trials",
        "successes",
        "empirical_rate",
        "sigma",
        "z_score",
        "wrong_outcomes",
        "min_success_fidelity",
    ]);
    for (point, &a2) in a2s.iter().enumerate() {
        let s = SchmidtPair::from_a_squared(a2)?;
        let records = conclusive_teleport(phi, s)?;
        let counts = record_counts(&records, cfg, point)?;
        let mut successes = 0u64;
        let mut wrong = 0u64;
        let mut min_fid: Option<f64> = None;
        for (r, &c) in records.iter().zip(&counts) {
            if !r.success || c == 0 {
                continue;
            }
            successes += c;
            if r.fidelity < 1.0 - UNAMBIGUOUS_TOL {
                wrong += c;
            }
            min_fid = Some(min_fid.map_or(r.fidelity, |m| m.min(r.fidelity)));
        }
        let p = conclusive_success_probability(s);
        let n = cfg.trials as f64;
        let rate = successes as f64 / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        let z = (sigma > 0.0).then(|| (rate - p) / sigma);
        t.push(vec![
            a2.into(),
            p.into(),
            cfg.trials.into(),
            successes.into(),
            rate.into(),
            sigma.into(),
            z.into(),
            wrong.into(),
            min_fid.into(),
        ]);
    }
    Ok(t)
}

fn quasi(cfg: &RunConfig, phi: &PureState, ps: &[f64], filter: &QuasiSweep) -> Result<Table> {
    let mut t = Table::new(&[
        "p",
        "epsilon",
        "n",
        "lambda",
        "p_prime",
        "success_prob",
        "singlet_fraction",
        "max_fidelity",
        "avg_fidelity",
        "trials",
        "successes",
        "empirical_success_rate",
    ]);
    let targets: Vec<(Option<f64>, Option<f64>)> = match filter {
        QuasiSweep::N(ns) => ns.iter().map(|&n| (None, Some(n))).collect(),
        QuasiSweep::Epsilon(es) => es.iter().map(|&e| (Some(e), None)).collect(),
    };
    let singlet = bell_state(BellLabel::PsiMinus);
    let mut point = 0;
    for &p in ps {
        let rho = mixed_resource(p)?;
        for &(epsilon, n) in &targets {
            let (fp, state, avg) = match (epsilon, n) {
                (Some(eps), _) => {
                    let q = quasi_conclusive_teleport(phi, p, eps)?;
                    (q.filter, q.filtered_state, q.average_fidelity)
                }
                (None, Some(n)) => {
                    let fp = FilterParams::from_n(n)?;
                    let out = bilocal_filter(&rho, fp)?;
                    let avg = average_teleport_fidelity(&out.state, &CorrectionTable::singlet())?;
                    (fp, out.state, avg)
                }
                (None, None) => unreachable!("one of n or epsilon is set"),
            };
            let p_prime = filtered_singlet_weight(p, fp.n());
            let success = filter_success_probability(p, fp.n());
            let counts = sample_counts(&[success, 1.0 - success], cfg.seed, point, cfg.trials)?;
            point += 1;
            let row: Vec<Value> = vec![
                p.into(),
                epsilon.into(),
                fp.n().into(),
                fp.lambda().into(),
                p_prime.into(),
                success.into(),
                fidelity(&singlet, &state)?.into(),
                max_teleport_fidelity(p_prime)?.into(),
                avg.into(),
                cfg.trials.into(),
                counts[0].into(),
                (counts[0] as f64 / cfg.trials as f64).into(),
            ];
            t.push(row);
        }
    }
    Ok(t)
}

fn steering(cfg: &RunConfig, phi: &PureState, a2s: &[f64], povms: &[SteerPovm]) -> Result<Table> {
    let mut t = Table::new(&[
        "a2",
        "povm",
        "outcome",
        "probability",
        "impossible",
        "bob_0_re",
        "bob_0_im",
        "bob_1_re",
        "bob_1_im",
        "hjw_residual",
        "trials",
        "count",
        "frequency",
    ]);
    let tele = teleportation_povm(phi.amplitude(0), phi.amplitude(1))?;
    let mut point = 0;
    for &a2 in a2s {
        let shared = partially_entangled(SchmidtPair::from_a_squared(a2)?);
        let bob = reduce(&shared.projector(), &[2, 2], &[1])?;
        for &kind in povms {
            let (name, povm) = match kind {
                SteerPovm::Rectilinear => ("rectilinear", rectilinear_povm()),
                SteerPovm::Diagonal => ("diagonal", diagonal_povm()),
                SteerPovm::Telepovm => ("telepovm", tele.clone()),
            };
            let result = steer(&shared, &povm)?;
            let residual = result.aggregate().max_abs_diff(&bob);
            let probs: Vec<f64> = result.branches.iter().map(|b| b.probability).collect();
            let counts = sample_counts(&probs, cfg.seed, point, cfg.trials)?;
            point += 1;
            for (b, c) in result.branches.iter().zip(counts) {
                let amp = |i: usize| (!b.impossible).then(|| b.bob_state.amplitude(i));
                t.push(vec![
                    a2.into(),
                    name.into(),
                    b.label.as_str().into(),
                    b.probability.into(),
                    b.impossible.into(),
                    amp(0).map(|z| z.re).into(),
                    amp(0).map(|z| z.im).into(),
                    amp(1).map(|z| z.re).into(),
                    amp(1).map(|z| z.im).into(),
                    residual.into(),
                    cfg.trials.into(),
                    c.into(),
                    (c as f64 / cfg.trials as f64).into(),
                ]);
            }
        }
    }
    Ok(t)
}

fn povm_check(phi: &PureState, a2s: &[f64]) -> Result<Table> {
    let mut t = Table::new(&[
        "builder",
        "a2",
        "elements",
        "completeness_residual",
        "min_eigenvalue",
        "psd_ok",
        "complete_ok",
    ]);
    let tol = Tolerance::default();
    let mut push = |name: &str, a2: Option<f64>, elements: &[ComplexMatrix]| -> Result<()> {
        let residual = completeness_residual(elements);
        let min_eig = elements
            .iter()
            .map(|e| min_eigenvalue(e, tol))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        t.push(vec![
            name.into(),
            a2.into(),
            elements.len().into(),
            residual.into(),
            min_eig.into(),
            (min_eig >= -PSD_TOL).into(),
            (residual < PSD_TOL).into(),
        ]);
        Ok(())
    };
    let tele = teleportation_povm(phi.amplitude(0), phi.amplitude(1))?;
    let induced = induced_povm(&bell_projectors(&TELEPOVM_BELL_ORDER), &phi.density())?;
    let kraus = kraus_from_povm(&tele)?;
    push("rectilinear", None, rectilinear_povm().elements())?;
    push("diagonal", None, diagonal_povm().elements())?;
    push("telepovm", None, tele.elements())?;
    push("induced", None, induced.elements())?;
    push("kraus", None, kraus.effects()?.elements())?;
    for &a2 in a2s {
        let s = SchmidtPair::from_a_squared(a2)?;
        push("discrimination", Some(a2), discrimination_povm(s)?.povm().elements())?;
        push(
            "discrimination_unnormalized",
            Some(a2),
            &discrimination_operators_unnormalized(s),
        )?;
    }
    Ok(t)
}
