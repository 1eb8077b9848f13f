//! Acceptance criteria 1-12. Each test prints one PASS/FAIL line.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::*;
use dqsim::algorithms::distribution::{
    hellinger_fidelity, load_normal_distribution, normal_probabilities, probabilities_from_distribution,
};
use dqsim::algorithms::mlae::MlaeSchedule;
use dqsim::algorithms::qae::{a_true, build_a_sin2, build_grover_q, grover_circuit};
use dqsim::algorithms::qft::build_qft;
use dqsim::algorithms::qpe::{build_qpe, example_qpe, qpe_node_map, QftMode};
use dqsim::dynamic::build_dynamic_qft_with;
use dqsim::experiments::distload::{distload, DistloadConfig};
use dqsim::experiments::qae::{qae, qae_circuit, QaeConfig};
use dqsim::experiments::qpe_sweep::{qpe_sweep, QpeSweepConfig, Variant};
use dqsim::experiments::{mean_std, parse_config};
use dqsim::link::account_run;
use dqsim::noise::{comm_depolarization, comm_time, depolarize_1q, depolarize_2q};
use dqsim::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_node_cnot(prep: &Circuit, control: usize, target: usize) -> (Circuit, DistributedCircuit) {
    let mut c = prep.clone();
    c.cx(control, target);
    let nodes = NodeMap::new([("A", vec![0]), ("B", vec![1])]);
    let dc = create_distributed_circuit(&c, &nodes).unwrap();
    (c, dc)
}

#[test]
fn criterion_01_gadget_truth_table() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut preps = Vec::new();
    for input in 0..4 {
        let mut c = Circuit::new(2, 0);
        for q in 0..2 {
            if input >> q & 1 == 1 {
                c.x(q);
            }
        }
        preps.push(c);
    }
    for _ in 0..50 {
        let mut c = Circuit::new(2, 0);
        product_prep(&mut c, &[0, 1], &mut rng);
        preps.push(c);
    }
    let mut worst_tv: f64 = 0.0;
    let mut worst_state: f64 = 0.0;
    for prep in &preps {
        for (ctl, tgt) in [(0, 1), (1, 0)] {
            let (ideal, dc) = two_node_cnot(prep, ctl, tgt);
            assert!(dc.gate_app);
            assert_eq!(dc.gadgets.len(), 1);
            let want = statevector(&ideal).unwrap();
            let got = final_state(&dc.circuit, None, &[0, 1]).unwrap();
            let want_rho = DensityMatrix::from_statevector(&want);
            worst_state = worst_state.max(max_abs_diff(&got.to_matrix(), &want_rho.to_matrix()));
            let p: Distribution = want.probabilities().iter().enumerate().map(|(i, &v)| (format!("{i}"), v)).collect();
            let q: Distribution = got.probabilities().iter().enumerate().map(|(i, &v)| (format!("{i}"), v)).collect();
            worst_tv = worst_tv.max(total_variation(&p, &q));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_tv <= 1e-9 && worst_state <= 1e-9;
    report(1, pass, format!("gadget on 4 basis + 50 product inputs, both directions: max TV {worst_tv:.2e}, max |rho diff| {worst_state:.2e} ({secs:.2}s)"));
    assert!(pass);
}

#[test]
fn criterion_02_distribution_preserving_compilation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut gadgets = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=5);
        let k = rng.random_range(2..=3.min(n));
        let mut c = Circuit::new(n, n);
        random_gates(&mut c, n, rng.random_range(1..=8), &mut rng);
        c.measure_all();
        let nodes = random_node_map(n, k, &mut rng);
        let dc = create_distributed_circuit(&c, &nodes).unwrap();
        assert!(dc.gate_app);
        gadgets += dc.gadgets.len();
        let p = exact_distribution(&c, None).unwrap();
        let q = exact_distribution(&dc.circuit, None).unwrap();
        worst = worst.max(total_variation(&p, &q));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-9;
    report(2, pass, format!("200 random circuits on 2-3 nodes ({gadgets} gadgets): max TV {worst:.2e} ({secs:.2}s)"));
    assert!(pass);
}

#[test]
fn criterion_03_dynamic_qft_equivalence() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        for inverse in [true, false] {
            let dynamic = build_dynamic_qft_with(n, inverse, &|_, _| None);
            let static_qft = build_qft(n, inverse);
            for input in 0..1usize << n {
                let mut s = Circuit::new(n, n);
                let mut d = Circuit::new(n, n);
                for q in (0..n).filter(|q| input >> q & 1 == 1) {
                    s.x(q);
                    d.x(q);
                }
                for i in &static_qft.instructions {
                    s.push(i.clone());
                }
                s.measure_all();
                for i in &dynamic.instructions {
                    d.push(i.clone());
                }
                let p = exact_distribution(&s, None).unwrap();
                let q = exact_distribution(&d, None).unwrap();
                worst = worst.max(total_variation(&p, &q));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-9;
    report(3, pass, format!("n = 2..5, all basis inputs, inverse and forward: max TV {worst:.2e} ({secs:.2}s)"));
    assert!(pass);
}

#[test]
fn criterion_04_qpe_exact_cases() {
    let start = Instant::now();
    let z = gates::mat2_to_matrix(&gates::z());
    let mut prep = Circuit::new(1, 0);
    prep.x(0);
    let mut p_z = f64::INFINITY;
    for mode in [QftMode::Static, QftMode::Dynamic] {
        let c = build_qpe(&z, 3, &prep, mode).unwrap();
        p_z = p_z.min(exact_distribution(&c, None).unwrap().get("100").copied().unwrap_or(0.0));
    }
    let local = exact_distribution(&example_qpe(3, QftMode::Static).unwrap(), None).unwrap();
    let dc = create_distributed_circuit(&example_qpe(3, QftMode::Dynamic).unwrap(), &qpe_node_map(3, 2)).unwrap();
    let dist = exact_distribution(&dc.circuit, None).unwrap();
    let p_ex = local["100"].min(dist["100"]);
    let secs = start.elapsed().as_secs_f64();
    let pass = p_z >= 1.0 - 1e-6 && p_ex >= 0.999 && dc.gate_app;
    report(4, pass, format!("Z on |1>: P(100) = {p_z:.9}; RX(pi)(x)RY(pi) local/distributed: P(100) = {p_ex:.9} ({secs:.2}s)"));
    assert!(pass);
}

#[test]
fn criterion_05_noise_channels() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rho = random_density(3, &mut rng);
        let eps = rng.random_range(0.0..1.0);
        let a = rng.random_range(0..3);
        let b = (a + rng.random_range(1..3)) % 3;
        let mut one = rho.clone();
        depolarize_1q(&mut one, a, eps).unwrap();
        worst = worst.max(max_abs_diff(&one.to_matrix(), &depolarize_oracle(&rho.to_matrix(), 3, &[a], eps)));
        let mut two = rho.clone();
        depolarize_2q(&mut two, a, b, eps).unwrap();
        worst = worst.max(max_abs_diff(&two.to_matrix(), &depolarize_oracle(&rho.to_matrix(), 3, &[a, b], eps)));
    }
    let noise = NoiseParams::new(0.01, 0.03, 0.02);
    let traj = Simulator::new(SimConfig { backend: Backend::Trajectory, ..SimConfig::default() });
    let mut worst_tv: f64 = 0.0;
    for i in 0..10 {
        let mut c = Circuit::new(4, 4);
        random_gates(&mut c, 4, 12, &mut rng);
        if i % 2 == 1 {
            // feed-forward from a mid-circuit readout
            c.measure(0, 0);
            c.push(Instruction::new(Operation::X, vec![1]).with_condition(0, true));
            c.h(0);
            random_gates(&mut c, 4, 4, &mut rng);
            for q in 1..4 {
                c.measure(q, q);
            }
        } else {
            c.measure_all();
        }
        let exact = exact_distribution(&c, Some(&noise)).unwrap();
        let sampled = traj.run(&c, 100_000, Some(&noise), 50 + i).unwrap().distribution();
        worst_tv = worst_tv.max(total_variation(&exact, &sampled));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && worst_tv <= 0.01;
    report(5, pass, format!("channels vs closed form: max diff {worst:.2e}; trajectory vs density at 1e5 shots: max TV {worst_tv:.4} ({secs:.2}s)"));
    assert!(pass);
}

#[test]
fn criterion_06_gate_count_fidelity() {
    let start = Instant::now();
    let noise = NoiseParams::new(0.001, 0.01, 0.0025);
    let mut lines = Vec::new();
    let mut pass = true;
    for n in 1..=5 {
        let mut c = Circuit::new(2, 0);
        c.push(Instruction::new(Operation::H, vec![0]).with_noise(NoiseTag::Noiseless));
        for _ in 0..n {
            c.cx(0, 1);
        }
        let dc = create_distributed_circuit(&c, &NodeMap::new([("A", vec![0]), ("B", vec![1])])).unwrap();
        assert_eq!(dc.nonlocal_count, n);
        let target = statevector(&c).unwrap();
        let f = final_state(&dc.circuit, Some(&noise), &[0, 1]).unwrap().fidelity_pure(&target);
        let model = (1.0f64 - 0.016).powi(n as i32);
        let rel = (f - model).abs() / model;
        pass &= rel <= 0.1;
        lines.push(format!("N={n}: F={f:.5} model={model:.5} rel={rel:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    report(6, pass, format!("{} ({secs:.2}s)", lines.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_07_dqpe_advantage() {
    let start = Instant::now();
    let cfg: QpeSweepConfig = parse_config(
        r#"{"version": 1, "n": 5, "scenarios": [{"eps_m": "eps_g/4", "eps_d": "eps_g/10"}],
            "eps_g": [0.002, 0.005, 0.01, 0.02], "shots": 20000, "replications": 20}"#,
    )
    .unwrap();
    let rows = qpe_sweep(&cfg, 7).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for &g in &cfg.eps_g {
        let row = |v: Variant| rows.iter().find(|r| r.variant == v && r.eps_g == g).unwrap();
        let (q, d) = (row(Variant::Local), row(Variant::Distributed));
        let band = 3.0 * (q.p_std.powi(2) + d.p_std.powi(2)).sqrt();
        let gap = d.p_mean - q.p_mean;
        pass &= gap > band;
        lines.push(format!("eps_g={g}: DQPE {:.4} QPE {:.4} gap {gap:.4} > 3sigma {band:.4}", d.p_mean, q.p_mean));
    }
    let secs = start.elapsed().as_secs_f64();
    report(7, pass, format!("{} ({secs:.2}s)", lines.join("; ")));
    assert!(pass);
}

#[test]
fn criterion_08_grover_law() {
    let start = Instant::now();
    let (n, c) = (2, PI / 3.0);
    let a = build_a_sin2(n, c).unwrap();
    let q = build_grover_q(&a, n).unwrap();
    let theta = a_true(n, c).sqrt().asin();
    let mut worst: f64 = 0.0;
    for m in 0..=3u64 {
        let p = exact_distribution(&grover_circuit(&a, &q, m).unwrap(), None).unwrap();
        let want = ((2 * m + 1) as f64 * theta).sin().powi(2);
        worst = worst.max((p.get("1").copied().unwrap_or(0.0) - want).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-8;
    report(8, pass, format!("n = 2, c = pi/3, M = 0..3: max |P(1) - sin^2((2M+1)theta)| = {worst:.2e} ({secs:.2}s)"));
    assert!(pass);
}

#[test]
fn criterion_09_mlae_cramer_rao() {
    let start = Instant::now();
    let cfg = QaeConfig {
        nodes: vec![2],
        replications: 100,
        schedule: Some(MlaeSchedule::exponential(7, 100).unwrap()),
        p: vec![1.0],
        ..parse_config(r#"{"version": 1}"#).unwrap()
    };
    let rows = qae(&cfg, 9).unwrap();
    let r = cfg.replications as f64;
    let rms: Vec<f64> = rows
        .iter()
        .map(|row| (row.estimation_error_mean.powi(2) + row.estimation_error_std.powi(2) * (r - 1.0) / r).sqrt())
        .collect();
    let mut pass = true;
    let mut lines = Vec::new();
    for (j, row) in rows.iter().enumerate() {
        if j > 0 {
            // decreasing within three standard errors
            let prev = &rows[j - 1];
            let se = (prev.estimation_error_std.powi(2) + row.estimation_error_std.powi(2)).sqrt() / r.sqrt();
            pass &= row.estimation_error_mean <= prev.estimation_error_mean + 3.0 * se;
        }
        lines.push(format!(
            "M<={}: err {:.5} rms/crb {:.2}",
            row.n_grover,
            row.estimation_error_mean,
            rms[j] / row.cramer_rao_bound
        ));
    }
    let full = rows.len() - 1;
    pass &= rms[full] <= 2.0 * rows[full].cramer_rao_bound;
    let (first, last) = (rows[0].estimation_error_mean, rows[full].estimation_error_mean);
    // 0.0088 -> 0.0005 in order of magnitude
    pass &= (1e-3..1e-1).contains(&first) && (5e-5..5e-3).contains(&last);
    let secs = start.elapsed().as_secs_f64();
    report(9, pass, format!("{} ({secs:.2}s)", lines.join("; ")));
    assert!(pass);
}

#[test]
fn criterion_10_entanglement_accounting() {
    let start = Instant::now();
    let dc = qae_circuit(3, PI / 3.0, 2, 3).unwrap();
    let n = dc.gadgets.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut pass = true;
    let mut lines = Vec::new();
    for p in [1.0, 0.8, 0.5] {
        let link = LinkParams::new(p, 1).unwrap();
        let ks: Vec<f64> = (0..10_000).map(|_| account_run(&dc, &link, &mut rng).unwrap().total_trials as f64).collect();
        let (mean, _) = mean_std(&ks);
        let sigma = (n * (1.0 - p) / (p * p) / ks.len() as f64).sqrt();
        if p == 1.0 {
            pass &= ks.iter().all(|&k| k == n);
        } else {
            pass &= (mean - n / p).abs() <= 3.0 * sigma;
        }
        lines.push(format!("p={p}: mean k {mean:.3} vs N/p {:.3}", n / p));
    }
    let secs = start.elapsed().as_secs_f64();
    report(10, pass, format!("N = {n} gadgets, 1e4 runs: {} ({secs:.2}s)", lines.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_11_distribution_loading() {
    let start = Instant::now();
    let target = normal_probabilities(8, 1.0, 2.0).unwrap();
    let mut c = load_normal_distribution(8, 1.0, 2.0).unwrap();
    c.num_clbits = 8;
    c.measure_all();
    let ideal = hellinger_fidelity(&probabilities_from_distribution(&exact_distribution(&c, None).unwrap(), 8).unwrap(), &target)
        .unwrap();
    let cfg = DistloadConfig {
        shots: 10_000,
        replications: 20,
        ..parse_config(r#"{"version": 1}"#).unwrap()
    };
    let rows = distload(&cfg, 11).unwrap();
    let mut pass = ideal >= 1.0 - 1e-6;
    let mut lines = Vec::new();
    for &eps in &cfg.eps {
        let series: Vec<_> = rows.iter().filter(|r| r.eps == eps).collect();
        for w in series.windows(2) {
            let r = cfg.replications as f64;
            let se = (w[0].fidelity_std.powi(2) + w[1].fidelity_std.powi(2)).sqrt() / r.sqrt();
            pass &= w[1].fidelity_mean <= w[0].fidelity_mean + 3.0 * se;
        }
        let f: Vec<String> = series.iter().map(|r| format!("{:.4}", r.fidelity_mean)).collect();
        lines.push(format!("eps={eps}: {}", f.join(" >= ")));
    }
    let secs = start.elapsed().as_secs_f64();
    report(11, pass, format!("noiseless F = {ideal:.9}; nodes 1,2,4,8: {} ({secs:.2}s)", lines.join("; ")));
    assert!(pass);
}

const T2: f64 = 50e-6;

fn comm_eps() -> f64 {
    comm_depolarization(comm_time(10.0, 2e8), T2).unwrap()
}

#[test]
fn criterion_12_comm_decoherence_formula() {
    let eps = comm_eps();
    let direct = 1.0 - (-5e-8f64 / T2).exp();
    let pass = (eps - direct).abs() <= 1e-15 && (eps - 1e-3).abs() / 1e-3 < 5e-3;
    report(12, pass, format!("1 - exp(-t/T2) = {eps:.6e} (direct {direct:.6e}); agrees with 1e-3 to 3 significant figures"));
    assert!(pass);
}

/// The literal target value 9.9995e-4 and a 4-significant-figure match with
/// 1e-3 do not follow from the formula: 1 - exp(-1e-3) = 9.995002e-4.
#[test]
#[ignore = "literal target not reachable from 1 - exp(-t/T2); run with --ignored to see it fail"]
fn criterion_12_literal_value() {
    let eps = comm_eps();
    let pass = (eps - 9.9995e-4).abs() < 5e-9 && format!("{eps:.3e}") == "1.000e-3";
    report(12, pass, format!("literal 9.9995e-4 to 4 significant figures: got {eps:.6e}"));
    assert!(pass);
}
