use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use temporal_cert::matrixcore::{min_eigenvalue, trace_norm, CMatrix, HermMatrix};
use temporal_cert::qsim::random::{haar_unitary, random_channel, random_density, random_observable};
use temporal_cert::qsim::{
    causality_monotone, isometry_in_time_check, isometry_residual, lemma1_residual, pauli,
    pauli_channel, pauli_corr_lemma_check, pdm_correlation, pdm_general, pdm_two_events,
    pseudo_bell, seq_corr_channel, seq_corr_simple, state_independence_spread, BlochObservable,
    DensityMatrix, EventScenario, KrausChannel, MeasurementEvent, Pauli, PauliChannelParams,
};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Two-event PDM from projective measurements: outcome-weighted
/// post-measurement states pushed through the channel.
fn oracle_two_event_pdm(rho: &CMatrix, ch: &KrausChannel) -> CMatrix {
    let id = CMatrix::identity(2);
    let mut r = CMatrix::zeros(4);
    for i in 0..4 {
        // Σ_a a·P_a ρ P_a, or ρ itself for the trivial measurement.
        let signed = if i == 0 {
            rho.clone()
        } else {
            let s = pauli(i);
            let plus = id.add(&s).scale_real(0.5);
            let minus = id.sub(&s).scale_real(0.5);
            plus.matmul(rho).matmul(&plus).sub(&minus.matmul(rho).matmul(&minus))
        };
        let evolved = ch.apply(&signed);
        for j in 0..4 {
            let t = evolved.matmul(&pauli(j)).trace().re;
            r = r.add(&pauli(i).kron(&pauli(j)).scale(c(t)));
        }
    }
    r.scale_real(0.25)
}

fn r_ex() -> CMatrix {
    let mut m = CMatrix::zeros(4);
    m[(0, 0)] = c(1.0);
    m[(1, 2)] = c(0.5);
    m[(2, 1)] = c(0.5);
    m
}

fn random_register_state(qubits: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let d = 1 << qubits;
    let g = CMatrix::from_fn(d, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let p = g.matmul(&g.adjoint());
    let tr = p.trace().re;
    p.scale_real(1.0 / tr)
}

#[test]
fn example_pdm_regression() {
    let r = pdm_two_events(&DensityMatrix::zero(), &KrausChannel::identity());
    assert!(r.matrix().as_cmatrix().max_abs_diff(&r_ex()) <= 1e-12);
    let ev = r.eigenvalues().unwrap();
    for (got, want) in ev.iter().zip([-0.5, 0.0, 0.5, 1.0]) {
        assert!((got - want).abs() <= 1e-12, "{ev:?}");
    }
    assert!((causality_monotone(&r).unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn corner_channels_give_pseudo_bell_matrices() {
    let corners = [(0.0, 0.0, 1), (0.0, PI, 2), (PI, 0.0, 3), (PI, PI, 4)];
    for (u, v, k) in corners {
        let ch = pauli_channel(PauliChannelParams::new(u, v).unwrap());
        let r = pdm_two_events(&DensityMatrix::maximally_mixed(), &ch);
        let want = pseudo_bell(k).unwrap();
        let diff = r.matrix().as_cmatrix().max_abs_diff(want.matrix().as_cmatrix());
        assert!(diff <= 1e-12, "corner ({u}, {v}) vs R^({k}): {diff}");
    }
}

#[test]
fn lemma1_over_two_hundred_scenarios() {
    let r = lemma1_residual(7, 200);
    assert_eq!(r.scenarios, 200);
    assert!(r.max_residual <= 1e-10, "{}", r.max_residual);
}

#[test]
fn isometry_over_one_hundred_scenarios() {
    let r = isometry_residual(7, 100);
    assert_eq!(r.scenarios, 100);
    assert!(r.max_residual <= 1e-10, "{}", r.max_residual);
}

#[test]
fn isometry_for_each_pauli_v() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rho = random_density(&mut rng);
    let ch = random_channel(&mut rng);
    let a = random_observable(&mut rng);
    let b = random_observable(&mut rng);
    let u = haar_unitary(&mut rng);
    for v in [Pauli::X, Pauli::Y, Pauli::Z] {
        let (before, after) = isometry_in_time_check(&rho, &ch, &a, &b, v, &u).unwrap();
        assert!((before - after).abs() <= 1e-10);
    }
    assert!(isometry_in_time_check(&rho, &ch, &a, &b, Pauli::I, &u).is_err());
    let not_unitary = CMatrix::identity(2).scale_real(1.1);
    assert!(isometry_in_time_check(&rho, &ch, &a, &b, Pauli::X, &not_unitary).is_err());
}

#[test]
fn state_independence_without_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let a = random_observable(&mut rng);
        let b = random_observable(&mut rng);
        assert!(state_independence_spread(5, 50, &a, &b) <= 1e-12);
        let r = seq_corr_simple(&DensityMatrix::maximally_mixed(), &a, &b);
        assert!((r - a.dot(&b)).abs() <= 1e-12);
    }
}

#[test]
fn spatial_events_give_a_density_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for qubits in 2..=3 {
        for _ in 0..10 {
            let state = random_register_state(qubits, &mut rng);
            let events = (0..qubits).map(|q| MeasurementEvent { qubit: q, time: 0 }).collect();
            let s = EventScenario { qubits, state: state.clone(), events };
            let r = pdm_general(&s).unwrap();
            assert!(min_eigenvalue(r.matrix()).unwrap() >= -1e-10);
            // Simultaneous events on every qubit reproduce the state itself.
            assert!(r.matrix().as_cmatrix().max_abs_diff(&state) <= 1e-12);
        }
    }
}

#[test]
fn repeated_event_on_one_qubit_is_not_psd() {
    let s = EventScenario {
        qubits: 1,
        state: DensityMatrix::zero().matrix().clone(),
        events: vec![
            MeasurementEvent { qubit: 0, time: 0 },
            MeasurementEvent { qubit: 0, time: 1 },
        ],
    };
    let r = pdm_general(&s).unwrap();
    assert!(r.matrix().as_cmatrix().max_abs_diff(&r_ex()) <= 1e-12);
    assert!(min_eigenvalue(r.matrix()).unwrap() < -0.4);
}

#[test]
fn scenario_validation() {
    let good = r#"{"qubits":1,"state":[[[1,0],[0,0]],[[0,0],[0,0]]],"events":[{"qubit":0,"time":0}]}"#;
    assert!(EventScenario::from_json_str(good).is_ok());
    for bad in [
        r#"{"qubits":1,"state":[[[1,0],[0,0]],[[0,0],[0,0]]],"events":[{"qubit":1,"time":0}]}"#,
        r#"{"qubits":2,"state":[[[1,0],[0,0]],[[0,0],[0,0]]],"events":[{"qubit":0,"time":0}]}"#,
        r#"{"qubits":1,"state":[[[2,0],[0,0]],[[0,0],[0,0]]],"events":[{"qubit":0,"time":0}]}"#,
        r#"{"qubits":1,"state":[[[1,0],[0,0]],[[0,0],[0,0]]],"events":[{"qubit":0,"time":0}],"x":1}"#,
    ] {
        assert!(EventScenario::from_json_str(bad).is_err(), "{bad}");
    }
}

#[test]
fn channel_validation() {
    let half = CMatrix::identity(2).scale_real(0.5);
    assert!(KrausChannel::new(vec![half.clone()]).is_err());
    assert!(KrausChannel::new(vec![half.clone(), half.clone(), half.clone(), half]).is_ok());
    assert!(KrausChannel::new(vec![]).is_err());
    assert!(PauliChannelParams::new(0.1, 7.0).is_err());
}

#[test]
fn bloch_observable_validation() {
    assert!(BlochObservable::new([1.0, 0.0, 0.0]).is_ok());
    assert!(BlochObservable::new([1.0, 1.0, 0.0]).is_err());
    assert!(BlochObservable::from_direction([0.0, 0.0, 0.0]).is_err());
    let a = BlochObservable::from_direction([3.0, 0.0, 4.0]).unwrap();
    assert!((a.bloch()[2] - 0.8).abs() < 1e-15);
}

fn trace_preserving_deviation(ch: &KrausChannel) -> f64 {
    ch.kraus()
        .iter()
        .fold(CMatrix::zeros(2), |acc, k| acc.add(&k.adjoint().matmul(k)))
        .max_abs_diff(&CMatrix::identity(2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_event_pdm_matches_projective_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng);
        let ch = random_channel(&mut rng);
        let r = pdm_two_events(&rho, &ch);
        let oracle = oracle_two_event_pdm(rho.matrix(), &ch);
        prop_assert!(r.matrix().as_cmatrix().max_abs_diff(&oracle) <= 1e-12);
        prop_assert!((r.matrix().trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pdm_correlation_equals_sequential_correlation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng);
        let ch = random_channel(&mut rng);
        let a = random_observable(&mut rng);
        let b = random_observable(&mut rng);
        let r = pdm_two_events(&rho, &ch);
        let lhs = pdm_correlation(&r, &a, &b).unwrap();
        prop_assert!((lhs - seq_corr_channel(&rho, &a, &b, &ch)).abs() <= 1e-10);
        for k in Pauli::AXES {
            for l in Pauli::AXES {
                let (lhs, rhs) = pauli_corr_lemma_check(&rho, &ch, k, l).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn constructed_channels_preserve_trace(seed in any::<u64>(), u in 0.0..(2.0 * PI), v in 0.0..PI, p in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pauli_ch = pauli_channel(PauliChannelParams::new(u, v).unwrap());
        let random_ch = random_channel(&mut rng);
        let mixed = KrausChannel::mixture(&pauli_ch, p, &random_ch).unwrap();
        let conj = random_ch.conjugated(&haar_unitary(&mut rng), &haar_unitary(&mut rng)).unwrap();
        for ch in [&pauli_ch, &random_ch, &mixed, &conj, &KrausChannel::depolarizing()] {
            prop_assert!(trace_preserving_deviation(ch) <= 1e-10);
        }
    }

    #[test]
    fn pauli_channel_action(u in 0.0..(2.0 * PI), v in 0.0..PI) {
        let ch = pauli_channel(PauliChannelParams::new(u, v).unwrap());
        let s = |i| pauli(i);
        let close = |a: &CMatrix, b: &CMatrix| a.max_abs_diff(b) <= 1e-12;
        prop_assert!(close(&ch.apply(&s(0)), &s(0).add(&s(3).scale_real(u.sin() * v.sin()))));
        prop_assert!(close(&ch.apply(&s(1)), &s(1).scale_real(u.cos())));
        prop_assert!(close(&ch.apply(&s(2)), &s(2).scale_real(v.cos())));
        prop_assert!(close(&ch.apply(&s(3)), &s(3).scale_real(u.cos() * v.cos())));
    }

    #[test]
    fn pdm_trace_norm_bounds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = pdm_two_events(&random_density(&mut rng), &random_channel(&mut rng));
        let h: &HermMatrix = r.matrix();
        let tn = trace_norm(h).unwrap();
        prop_assert!(tn >= 1.0 - 1e-12);
        prop_assert!((causality_monotone(&r).unwrap() - (tn - 1.0)).abs() <= 1e-12);
    }

    #[test]
    fn state_independence_for_random_pairs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_observable(&mut rng);
        let b = random_observable(&mut rng);
        prop_assert!(state_independence_spread(rng.random(), 50, &a, &b) <= 1e-12);
    }
}
