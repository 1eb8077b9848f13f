mod common;

use std::f64::consts::PI;

use common::*;
use dqsim::gates::{self, C64};
use dqsim::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: C64, re: f64, im: f64) -> bool {
    (a - C64::new(re, im)).norm() < 1e-12
}

#[test]
fn gate_tables() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = gates::h();
    assert!(close(h[0], s, 0.0) && close(h[3], -s, 0.0));
    let y = gates::y();
    assert!(close(y[1], 0.0, -1.0) && close(y[2], 0.0, 1.0));
    let rx = gates::rx(PI);
    assert!(close(rx[0], 0.0, 0.0) && close(rx[1], 0.0, -1.0));
    let ry = gates::ry(PI / 2.0);
    assert!(close(ry[1], -s, 0.0) && close(ry[2], s, 0.0));
    let rz = gates::rz(PI / 2.0);
    assert!(close(rz[0], s, -s) && close(rz[3], s, s));
    let p = gates::phase(PI / 4.0);
    assert!(close(p[0], 1.0, 0.0) && close(p[3], s, s));
}

#[test]
fn bell_state_and_histogram_keys() {
    let mut c = Circuit::new(2, 2);
    c.h(0).cx(0, 1).measure_all();
    let h = run(&c, 4000, None, 3).unwrap();
    assert_eq!(h.shots, 4000);
    assert_eq!(h.count("00") + h.count("11"), 4000);
    assert!((h.probability("00") - 0.5).abs() < 0.05);

    // clbit 0 leftmost
    let mut c = Circuit::new(2, 2);
    c.x(0).measure_all();
    assert_eq!(exact_distribution(&c, None).unwrap()["10"], 1.0);
}

#[test]
fn teleportation_with_feed_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let mut prep = Circuit::new(1, 0);
        product_prep(&mut prep, &[0], &mut rng);
        let want = statevector(&prep).unwrap();
        let mut c = Circuit::new(3, 2);
        c.compose(&prep, &[0]).unwrap();
        c.h(1).cx(1, 2).cx(0, 1).h(0).measure(0, 0).measure(1, 1);
        c.push(Instruction::new(Operation::X, vec![2]).with_condition(1, true));
        c.push(Instruction::new(Operation::Z, vec![2]).with_condition(0, true));
        let rho = final_state(&c, None, &[2]).unwrap();
        assert!((rho.fidelity_pure(&want) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn capacity_and_auto_backend() {
    let mut c = Circuit::new(12, 12);
    for q in 0..12 {
        c.h(q);
    }
    for q in 0..11 {
        c.cx(q, q + 1);
    }
    c.measure_all();
    assert!(matches!(exact_distribution(&c, None), Err(Error::Capacity(_))));
    let h = run(&c, 200, Some(&NoiseParams::new(0.001, 0.01, 0.0)), 1).unwrap();
    assert_eq!(h.shots, 200);
}

#[test]
fn statevector_rejects_measurements() {
    let mut c = Circuit::new(1, 1);
    c.measure(0, 0);
    assert!(matches!(statevector(&c), Err(Error::Contract(_))));
}

#[test]
fn reset_reuses_a_qubit() {
    let mut c = Circuit::new(1, 1);
    c.x(0).reset(0).h(0).h(0).measure(0, 0);
    assert!((exact_distribution(&c, None).unwrap()["0"] - 1.0).abs() < 1e-12);
    let noisy = NoiseParams { eps_reset: Some(0.1), ..NoiseParams::noiseless() };
    let mut c = Circuit::new(1, 1);
    c.x(0).reset(0).measure(0, 0);
    assert!((exact_distribution(&c, Some(&noisy)).unwrap()["1"] - 0.1).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statevector_matches_dense_oracle(seed in any::<u64>(), n in 1usize..=7, gates in 0usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(n, 0);
        let qubits: Vec<usize> = (0..n).collect();
        product_prep(&mut c, &qubits, &mut rng);
        if n >= 2 {
            random_gates(&mut c, n, gates, &mut rng);
        }
        let psi = statevector(&c).unwrap();
        let u = dense_unitary(&c);
        for (i, a) in psi.amplitudes().iter().enumerate() {
            prop_assert!((a - u[(i, 0)]).norm() < 1e-10);
        }
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_density_stays_physical(seed in any::<u64>(), eps in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(4, 4);
        random_gates(&mut c, 4, 10, &mut rng);
        c.measure(1, 1);
        c.push(Instruction::new(Operation::H, vec![2]).with_condition(1, true));
        random_gates(&mut c, 4, 5, &mut rng);
        let noise = NoiseParams::new(eps / 3.0, eps, eps / 4.0);
        let rho = final_state(&c, Some(&noise), &[0, 1, 2, 3]).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn same_seed_same_histogram(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(3, 3);
        random_gates(&mut c, 3, 8, &mut rng);
        c.measure_all();
        let noise = NoiseParams::new(0.01, 0.02, 0.01);
        let traj = Simulator::new(SimConfig { backend: Backend::Trajectory, ..SimConfig::default() });
        prop_assert_eq!(run(&c, 500, Some(&noise), seed).unwrap(), run(&c, 500, Some(&noise), seed).unwrap());
        prop_assert_eq!(traj.run(&c, 500, Some(&noise), seed).unwrap(), traj.run(&c, 500, Some(&noise), seed).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn backends_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(3, 3);
        random_gates(&mut c, 3, 10, &mut rng);
        c.measure(0, 0);
        c.push(Instruction::new(Operation::X, vec![2]).with_condition(0, rng.random_bool(0.5)));
        c.measure(1, 1).measure(2, 2);
        let noise = NoiseParams::new(0.02, 0.05, 0.03);
        let traj = Simulator::new(SimConfig { backend: Backend::Trajectory, ..SimConfig::default() });
        let exact = exact_distribution(&c, Some(&noise)).unwrap();
        let sampled = traj.run(&c, 40_000, Some(&noise), seed).unwrap().distribution();
        prop_assert!(total_variation(&exact, &sampled) < 0.02);
    }
}
