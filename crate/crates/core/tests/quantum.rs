// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use proptest::prelude::*;
use ptomo_core::linalg::{self, c, CMat};
use ptomo_core::quantum::{
    fidelity, gates, pauli, process_fidelity, trace_distance, unitarity, DensityMatrix, LinearMap, QuantumChannel, UnitaryParams,
};
use ptomo_core::rng;
use ptomo_core::tomography::haar_unitary;

fn random_state(d: usize, seed: u64, rank: usize) -> DensityMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let mut g = rng::stream(seed, 11);
    let a = CMat::from_fn(d, rank, |_, _| {
        let re: f64 = StandardNormal.sample(&mut g);
        let im: f64 = StandardNormal.sample(&mut g);
        c(re, im)
    });
    let m = &a * a.adjoint();
    let t = linalg::trace(&m).re;
    DensityMatrix::new(linalg::hermitian_part(&m.unscale(t))).unwrap()
}

#[test]
fn euler_angle_named_gates() {
    let close = |a: &CMat, b: &CMat| linalg::max_abs_diff(a, b) < 1e-15;
    assert!(close(&UnitaryParams::new(0.0, 0.0, 0.0).matrix(), &linalg::identity(2)));
    assert!(close(&UnitaryParams::new(PI, 0.0, PI).matrix(), &gates::x()));
    assert!(close(&UnitaryParams::new(PI / 2.0, 0.0, PI).matrix(), &gates::h()));
}

#[test]
fn fidelity_distance_purity_values() {
    let zero = DensityMatrix::basis(2, 0);
    let one = DensityMatrix::basis(2, 1);
    let mixed = DensityMatrix::maximally_mixed(2);
    assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
    assert!((fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-15);
    assert!((trace_distance(&zero, &mixed).unwrap() - 0.5).abs() < 1e-15);
    assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
    let skew = DensityMatrix::new(linalg::from_rows(2, &[c(0.75, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)])).unwrap();
    assert!((ptomo_core::quantum::purity(&skew) - 0.625).abs() < 1e-15);
}

#[test]
fn half_y_mixture_of_haar_unitary_has_unitarity_one_third() {
    // independent transfer-matrix oracle: R_ij = tr[σ_i N(σ_j)]/2
    let mut g = rng::stream(42, 0);
    for _ in 0..20 {
        let e = haar_unitary(2, &mut g);
        let ye = gates::y() * &e;
        let ch = QuantumChannel::from_kraus(&[e.scale(0.5f64.sqrt()), ye.scale(0.5f64.sqrt())]).unwrap();
        let mut sum = 0.0;
        for i in 1..4 {
            for j in 1..4 {
                let out = ch.apply_matrix(&pauli(j));
                let r = linalg::trace_prod(&pauli(i), &out).re / 2.0;
                sum += r * r;
            }
        }
        let oracle = sum / 3.0;
        assert!((oracle - 1.0 / 3.0).abs() < 1e-12);
        assert!((unitarity(&ch).unwrap() - oracle).abs() < 1e-12);
    }
}

#[test]
fn completely_depolarizing_channel_has_zero_unitarity() {
    let kraus: Vec<CMat> = (0..4).map(|k| pauli(k).scale(0.5)).collect();
    let ch = QuantumChannel::from_kraus(&kraus).unwrap();
    assert!(unitarity(&ch).unwrap().abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn euler_gates_are_unitary(t in -10.0f64..10.0, p in -10.0f64..10.0, l in -10.0f64..10.0) {
        let u = UnitaryParams::new(t, p, l).matrix();
        prop_assert!(linalg::unitarity_error(&u) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fuchs_van_de_graaf(seed in any::<u64>(), ra in 1usize..=2, rb in 1usize..=2, d in prop::sample::select(vec![2usize, 4])) {
        let a = random_state(d, seed, ra);
        let b = random_state(d, seed ^ 0x9e37_79b9, rb);
        let f = fidelity(&a, &b).unwrap();
        let t = trace_distance(&a, &b).unwrap();
        prop_assert!(1.0 - f.sqrt() <= t + 1e-7);
        prop_assert!(t <= (1.0 - f).sqrt() + 1e-7);
    }

    #[test]
    fn partial_trace_is_linear(seed in any::<u64>(), w in 0.0f64..1.0) {
        let a = random_state(4, seed, 4);
        let b = random_state(4, seed.wrapping_add(1), 2);
        let mix = a.matrix().scale(w) + b.matrix().scale(1.0 - w);
        for keep in [0usize, 1] {
            let lhs = linalg::partial_trace(&mix, &[2, 2], &[keep]);
            let rhs = linalg::partial_trace(a.matrix(), &[2, 2], &[keep]).scale(w)
                + linalg::partial_trace(b.matrix(), &[2, 2], &[keep]).scale(1.0 - w);
            prop_assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-10);
            prop_assert!((linalg::trace(&lhs).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_channels_are_perfectly_coherent(t in 0.0f64..7.0, p in 0.0f64..7.0, l in 0.0f64..7.0) {
        let ch = UnitaryParams::new(t, p, l).channel();
        prop_assert!((unitarity(&ch).unwrap() - 1.0).abs() < 1e-9);
        prop_assert!((process_fidelity(&ch, &ch).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn superoperator_round_trip(seed in any::<u64>(), w in 0.0f64..1.0) {
        let mut g = rng::stream(seed, 3);
        let u = haar_unitary(2, &mut g);
        let v = haar_unitary(2, &mut g);
        let ch = QuantumChannel::from_kraus(&[u.scale(w.sqrt()), v.scale((1.0 - w).sqrt())]).unwrap();
        let back = LinearMap::from_superop(2, 2, &ch.superop()).unwrap();
        prop_assert!(linalg::max_abs_diff(&back.choi, &ch.choi) < 1e-12);
    }

    #[test]
    fn projection_yields_valid_states(seed in any::<u64>(), scale in 0.1f64..3.0) {
        let rho = random_state(4, seed, 3);
        let h = rho.matrix() - linalg::identity(4).scale(0.2) ;
        let p = DensityMatrix::project_physical(&h.scale(scale));
        let vals = linalg::eigvalsh(p.matrix());
        prop_assert!(vals[0] >= -1e-12);
        prop_assert!((linalg::trace(p.matrix()).re - 1.0).abs() < 1e-12);
        let again = DensityMatrix::project_physical(p.matrix());
        prop_assert!(linalg::max_abs_diff(again.matrix(), p.matrix()) < 1e-12);
    }
}
