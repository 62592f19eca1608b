// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use ptomo_core::linalg::{self, CMat};
use ptomo_core::markov::{characterize_gates, compare, markov_fidelities};
use ptomo_core::memory::{cmi, joint_distribution, maximize_cmi, mutual_information, MaximizeOptions, MemoryProbeConfig, PLACEMENTS};
use ptomo_core::quantum::{gates, process_fidelity, DensityMatrix, LinearMap, QuantumChannel};
use ptomo_core::sim::{ControlSequence, ControlStep, EnvInit, SEModel, StepSource, Surrogate};
use ptomo_core::stats::BoxStats;
use ptomo_core::tomography::{
    depolarizing_in_span, generate_haar_basis, sequence_for_id, split_tensor, Dataset, ProcessTensor, SplitPlan,
};

fn exact_tensor(model: &SEModel, pool_seed: u64, n: usize) -> ProcessTensor {
    let pool = generate_haar_basis(n + 1, pool_seed).unwrap();
    let ds = Dataset::simulate(model, &pool.unitaries, None, 0).unwrap();
    let order: Vec<usize> = (0..=n).collect();
    split_tensor(&pool.unitaries, &ds.states().unwrap(), &order, n).unwrap()
}

fn quick() -> MaximizeOptions {
    MaximizeOptions { restarts: 6, ..MaximizeOptions::default() }
}

#[test]
fn swap_memory_saturates_the_single_barrier_bound() {
    let pt = exact_tensor(&SEModel::swap_memory().unwrap(), 1, 10);
    let b = maximize_cmi(&pt, &[1], &quick()).unwrap();
    assert!(b.cmi_bits >= 0.95, "{}", b.cmi_bits);
    assert!(b.cmi_bits <= 1.0);
}

#[test]
fn markovian_process_has_no_memory() {
    let model = Surrogate::coupled_neighbor(EnvInit::Plus).with_reset(true).model(3).unwrap();
    let pt = exact_tensor(&model, 2, 10);
    for pl in PLACEMENTS {
        let b = maximize_cmi(&pt, pl, &quick()).unwrap();
        assert!(b.cmi_bits <= 2e-2, "{pl:?}: {}", b.cmi_bits);
        assert!(b.cmi_bits < 1e-9, "{pl:?}: {}", b.cmi_bits);
    }
}

#[test]
fn barrier_span_matches_pauli_average() {
    let model = Surrogate::coupled_neighbor(EnvInit::Plus).model(3).unwrap();
    let pt = exact_tensor(&model, 3, 10);
    let x: Vec<f64> = (0..12).map(|k| 0.37 * k as f64 + 0.1).collect();
    for pl in PLACEMENTS {
        let cfg = MemoryProbeConfig::from_params(pl, &x[..MemoryProbeConfig::parameter_count(pl)]);
        let (_, span) = depolarizing_in_span();
        let mut states = [CMat::zeros(2, 2), CMat::zeros(2, 2)];
        for (i, st) in states.iter_mut().enumerate() {
            let base = cfg.sequence(i, 3);
            let mut acc = CMat::zeros(2, 2);
            // all Pauli substitutions at the barrier slots
            let combos: Vec<Vec<usize>> = match pl.len() {
                1 => (0..4).map(|a| vec![a]).collect(),
                _ => (0..16).map(|a| vec![a / 4, a % 4]).collect(),
            };
            for combo in combos {
                let mut seq = base.clone();
                let mut w = 1.0;
                for (&slot, &k) in pl.iter().zip(&combo) {
                    seq = seq.with_step(slot, ControlStep::unitary(&span.terms[k].1, StepSource::Other));
                    w *= span.terms[k].0;
                }
                acc += pt.contract(&seq).unwrap().scale(w);
            }
            *st = DensityMatrix::project_physical(&acc).into_matrix();
        }
        let oracle = mutual_information(&joint_distribution(&states, &cfg));
        assert!((cmi(&pt, &cfg).unwrap() - oracle).abs() < 1e-9);
    }
}

#[test]
fn coupled_neighbor_memory_pattern() {
    let opts = MaximizeOptions { restarts: 10, ..MaximizeOptions::default() };
    let plus = exact_tensor(&Surrogate::coupled_neighbor(EnvInit::Plus).model(3).unwrap(), 4, 10);
    let zero = exact_tensor(&Surrogate::coupled_neighbor(EnvInit::Zero).model(3).unwrap(), 4, 10);
    let b_plus: Vec<f64> = PLACEMENTS.iter().map(|pl| maximize_cmi(&plus, pl, &opts).unwrap().cmi_bits).collect();
    let b_zero: Vec<f64> = PLACEMENTS.iter().map(|pl| maximize_cmi(&zero, pl, &opts).unwrap().cmi_bits).collect();
    // both barriers bound below either single barrier
    assert!(b_plus[2] <= b_plus[0].min(b_plus[1]), "{b_plus:?}");
    assert!(b_zero[2] <= b_zero[0].min(b_zero[1]), "{b_zero:?}");
    // coherent neighbour carries more memory
    assert!(b_plus[0] >= b_zero[0], "{b_plus:?} {b_zero:?}");
    assert!(b_plus.iter().chain(&b_zero).all(|&b| (0.0..=1.0).contains(&b)));
}

#[test]
fn closed_system_gates_are_recovered_exactly() {
    let pool = generate_haar_basis(28, 5).unwrap();
    let model = SEModel::closed(vec![linalg::identity(2); 3]).unwrap();
    let mm = characterize_gates(&model, &pool.unitaries, None, 0).unwrap();
    for (ch, u) in mm.gates.iter().zip(&pool.unitaries) {
        assert!(process_fidelity(ch, &QuantumChannel::from_unitary(u)).unwrap() >= 1.0 - 1e-9);
    }
}

#[test]
fn coupled_idle_matches_traced_simulator() {
    let model = Surrogate::coupled_neighbor(EnvInit::Plus).model(3).unwrap();
    let pool = generate_haar_basis(28, 6).unwrap();
    let mm = characterize_gates(&model, &pool.unitaries, None, 0).unwrap();
    assert_eq!(mm.idles.len(), 1);
    // oracle: ρ ↦ tr_E[U (ρ ⊗ ρ_E) U†] evaluated on matrix units
    let u = &model.intervals[0];
    let env = linalg::partial_trace(model.initial_se.matrix(), &[2, 2], &[1]);
    let mut choi = CMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let out = linalg::partial_trace(&(u * linalg::kron(&linalg::unit(2, i, j), &env) * u.adjoint()), &[2, 2], &[0]);
            choi += linalg::kron(&linalg::unit(2, i, j), &out);
        }
    }
    assert!(linalg::max_abs_diff(&mm.idles[0].choi, &choi) < 1e-9);
    let f = process_fidelity(&mm.idles[0], &QuantumChannel::identity(2)).unwrap();
    assert!(f < 1.0 - 1e-4, "{f}");
    for ch in mm.gates.iter().chain(&mm.idles).chain(&mm.preparations) {
        assert!(ch.tp_error() < 1e-8 && ch.min_choi_eigenvalue() > -1e-8);
    }
}

#[test]
fn markov_equals_tensor_without_environment() {
    let pool = generate_haar_basis(28, 7).unwrap();
    let model = SEModel::closed(vec![gates::rx(0.3), gates::ry(0.2), gates::rz(0.1)]).unwrap();
    let ds = Dataset::simulate(&model, &pool.unitaries, None, 0).unwrap();
    let states = ds.states().unwrap();
    let order: Vec<usize> = (0..28).collect();
    let plan = SplitPlan::new(&pool.unitaries, &order, 20).unwrap();
    let pt = plan.fidelities(&|id| states[id as usize].clone()).unwrap();
    let mm = characterize_gates(&model, &pool.unitaries, None, 0).unwrap();
    let mk = markov_fidelities(&mm, &pool.unitaries, &plan.heldout_ids, &|id| states[id as usize].clone()).unwrap();
    for (a, b) in pt.iter().zip(&mk) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn composition_order_matters_for_non_commuting_gates() {
    let model = Surrogate::coupled_neighbor(EnvInit::Zero).model(3).unwrap();
    let pool = vec![gates::h(), gates::s(), gates::z(), gates::x()];
    let mm = characterize_gates(&model, &pool, None, 0).unwrap();
    let step = |k: usize| ControlStep::unitary(&pool[k], StepSource::Basis(k));
    let prep = ControlStep::unitary(&gates::id(), StepSource::Preparation(2));
    let pred = |a: usize, b: usize| mm.predict(&ControlSequence::new(vec![prep.clone(), step(a), step(b)])).unwrap();
    let diff = |a: &DensityMatrix, b: &DensityMatrix| linalg::max_abs_diff(a.matrix(), b.matrix());
    // H and S do not commute
    assert!(diff(&pred(0, 1), &pred(1, 0)) > 1e-3);
    // S and Z commute as gates; only the idles between them could differ
    let model_closed = SEModel::closed(vec![linalg::identity(2); 3]).unwrap();
    let mc = characterize_gates(&model_closed, &pool, None, 0).unwrap();
    let pc = |a: usize, b: usize| mc.predict(&ControlSequence::new(vec![prep.clone(), step(a), step(b)])).unwrap();
    assert!(diff(&pc(1, 2), &pc(2, 1)) < 1e-9);
    assert!(diff(&pc(0, 1), &pc(1, 0)) > 1e-3);
}

#[test]
fn markov_predictions_are_physical_and_unknown_gates_rejected() {
    let pool = generate_haar_basis(28, 8).unwrap();
    let model = Surrogate::coupled_neighbor(EnvInit::Plus).model(3).unwrap();
    let mm = characterize_gates(&model, &pool.unitaries, Some(2000), 3).unwrap();
    for id in (0..3136).step_by(97) {
        let p = mm.predict(&sequence_for_id(&pool.unitaries, id)).unwrap();
        assert!(linalg::eigvalsh(p.matrix())[0] >= -1e-12);
        assert!((linalg::trace(p.matrix()).re - 1.0).abs() < 1e-12);
    }
    let bad = sequence_for_id(&pool.unitaries, 0).with_step(1, ControlStep::map(LinearMap::identity(2)));
    assert!(mm.predict(&bad).is_err());
}

#[test]
fn comparison_medians_match_sort_oracle() {
    let tensor = [0.999, 0.981, 0.9995, 0.97, 0.993, 0.9999, 0.962];
    let markov = [0.99, 0.975, 0.991, 0.95, 0.99, 0.992, 0.96];
    let c = compare(&tensor, &markov).unwrap();
    let oracle_median = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s[s.len() / 2]
    };
    assert_eq!(c.tensor.median, oracle_median(&tensor));
    assert_eq!(c.markov.median, oracle_median(&markov));
    let d: Vec<f64> = tensor.iter().zip(&markov).map(|(a, b)| a - b).collect();
    assert_eq!(c.deltas, d);
    assert_eq!(c.delta, BoxStats::new(&d).unwrap());
}
