use dqsim::experiments::distload::{distload, DistloadConfig};
use dqsim::experiments::qae::{qae, QaeConfig};
use dqsim::experiments::qpe_sweep::{qpe_sweep, QpeSweepConfig, Variant};
use dqsim::experiments::resources::{resources, ResourcesConfig};
use dqsim::experiments::run::{run, RunConfig};
use dqsim::experiments::{mean_std, parse_config, write_csv};
use dqsim::Error;

fn csv<T: serde::Serialize>(rows: &[T]) -> String {
    let mut out = Vec::new();
    write_csv(rows, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

const SNIPPET: &str = r#"{"version": 1, "shots": 2000,
    "circuit": {"qubits": 3, "clbits": 3, "ops": [
        {"kind": "h", "qubits": [0]}, {"kind": "h", "qubits": [1]}, {"kind": "cx", "qubits": [0, 2]},
        {"kind": "measure", "qubits": [0], "clbit": 0}, {"kind": "measure", "qubits": [1], "clbit": 1},
        {"kind": "measure", "qubits": [2], "clbit": 2}]},
    "nodes": {"nodes": {"1": [0, 1], "2": [2]}, "coupling_p": 0.5}}"#;

#[test]
fn configs_fail_closed() {
    let e = parse_config::<QpeSweepConfig>(r#"{"version": 1, "n": 5, "shotz": 10}"#).unwrap_err();
    assert!(matches!(&e, Error::Config(m) if m.contains("shotz") && m.contains("line 1")), "{e}");
    let e = parse_config::<DistloadConfig>(r#"{"version": 2}"#).unwrap_err();
    assert!(matches!(&e, Error::Config(m) if m.contains("version 2")), "{e}");
    let e = parse_config::<QpeSweepConfig>(r#"{"version": 1, "n": 5, "scenarios": [{"eps_m": "eps_g/3", "eps_d": "eps_g"}]}"#)
        .unwrap_err();
    assert!(matches!(e, Error::Config(_)));
    let bad_n: QpeSweepConfig = parse_config(r#"{"version": 1, "n": 4}"#).unwrap();
    assert!(matches!(qpe_sweep(&bad_n, 0), Err(Error::Config(_))));
    assert!(parse_config::<RunConfig>(r#"{"version": 1}"#).is_err());
}

#[test]
fn run_snippet() {
    let cfg: RunConfig = parse_config(SNIPPET).unwrap();
    let inputs = cfg.resolve(None).unwrap();
    let out = run(&inputs, false, 4).unwrap();
    assert!(out.report.gate_app);
    assert_eq!(out.report.nonlocal_count, 1);
    assert_eq!(out.histogram.shots, 2000);
    assert!(out.histogram.counts.keys().all(|k| k.len() == 3 && k[..1] == k[2..]));
    let link = out.report.link.unwrap();
    assert_eq!(link.gadget_count, 1);
    assert!((link.k_mean - 2.0).abs() < 0.15, "{}", link.k_mean);
    assert_eq!(run(&inputs, false, 4).unwrap().histogram, out.histogram);

    let mut mono = inputs.clone();
    mono.nodes = None;
    let out = run(&mono, false, 4).unwrap();
    assert_eq!(out.report.nonlocal_count, 0);
    assert!(out.report.link.is_none());
    assert!(matches!(run(&inputs, true, 4), Err(Error::Config(_))));
}

#[test]
fn qpe_sweep_rows() {
    let cfg: QpeSweepConfig =
        parse_config(r#"{"version": 1, "n": 3, "eps_g": [0, 0.01, 0.02], "shots": 5000, "replications": 5}"#).unwrap();
    let rows = qpe_sweep(&cfg, 1).unwrap();
    assert_eq!(rows.len(), 4 * 2 * 3);
    for r in rows.iter().filter(|r| r.eps_g == 0.0) {
        assert!((r.p_exact - 1.0).abs() < 1e-12);
        assert_eq!(r.p_mean, 1.0);
    }
    // The DQPE gain grows with the counting register.
    let five: QpeSweepConfig =
        parse_config(r#"{"version": 1, "n": 5, "eps_g": [0, 0.01, 0.02], "shots": 5000, "replications": 5}"#).unwrap();
    let rows5 = qpe_sweep(&five, 1).unwrap();
    let gap = |rows: &[dqsim::experiments::qpe_sweep::QpeRow], m: &str, d: &str, g: f64| {
        let p = |v: Variant| {
            rows.iter()
                .find(|r| r.variant == v && r.eps_g == g && r.scenario_eps_m == m && r.scenario_eps_d == d)
                .unwrap()
                .p_exact
        };
        p(Variant::Distributed) - p(Variant::Local)
    };
    for (m, d) in [("0", "eps_g/10"), ("eps_g/4", "eps_g/10")] {
        for g in [0.01, 0.02] {
            assert!(gap(&rows5, m, d, g) > 0.0);
            assert!(gap(&rows5, m, d, g) > gap(&rows, m, d, g), "{m} {d} {g}");
        }
    }
    assert_eq!(csv(&rows), csv(&qpe_sweep(&cfg, 1).unwrap()));
    assert_ne!(csv(&rows), csv(&qpe_sweep(&cfg, 2).unwrap()));
    assert!(csv(&rows).starts_with("n,scenario_eps_m,scenario_eps_d,variant,eps_g"));
}

#[test]
fn qae_rows() {
    let cfg: QaeConfig = parse_config(r#"{"version": 1, "shots": 200, "replications": 40}"#).unwrap();
    let rows = qae(&cfg, 3).unwrap();
    assert_eq!(rows.len(), 2 * 7);
    assert_eq!(csv(&rows), csv(&qae(&cfg, 3).unwrap()));
    let (one, two): (Vec<_>, Vec<_>) = rows.iter().partition(|r| r.nodes == 1);
    assert!(one.iter().all(|r| r.nonlocal_count == 0 && r.k == "0;0;0"));
    for (a, b) in one.iter().zip(&two) {
        assert_eq!(a.n_grover, b.n_grover);
        assert_eq!(a.cramer_rao_bound, b.cramer_rao_bound);
        // two-sample check on the mean error
        let se = ((a.estimation_error_std.powi(2) + b.estimation_error_std.powi(2)) / 40.0).sqrt();
        assert!((a.estimation_error_mean - b.estimation_error_mean).abs() < 4.0 * se + 1e-12, "M={}", a.n_grover);
    }
    // no amplification: binomial scaling with the shot count
    let first = one[0];
    let se = (first.a_true * (1.0 - first.a_true) / 200.0).sqrt();
    assert!(first.estimation_error_mean < 2.0 * se && first.estimation_error_mean > 0.3 * se);
}

#[test]
fn resource_ratios() {
    let cfg: ResourcesConfig = parse_config(r#"{"version": 1, "nodes": [3], "n_grover": [2], "runs": 4000}"#).unwrap();
    let rows = resources(&cfg, 5).unwrap();
    let mean = |p: f64| {
        let ks: Vec<f64> = rows.iter().filter(|r| r.p == p).map(|r| r.k_total as f64).collect();
        mean_std(&ks).0
    };
    let base = mean(1.0);
    assert_eq!(base, 54.0);
    assert!((mean(0.8) / base - 1.25).abs() < 0.01);
    assert!((mean(0.5) / base - 2.0).abs() < 0.02);
    assert!(csv(&rows).starts_with("run_id,n_nodes,n_grover,p,k_total"));
}

#[test]
fn distload_rows() {
    let cfg: DistloadConfig = parse_config(
        r#"{"version": 1, "n": 5, "nodes": [1, 5], "eps": [0, 0.002, 0.009], "shots": 10000, "replications": 10}"#,
    )
    .unwrap();
    let rows = distload(&cfg, 6).unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows.iter().filter(|r| r.eps == 0.0) {
        assert!((r.fidelity_exact - 1.0).abs() < 1e-9);
        assert!(r.fidelity_mean > 0.99);
    }
    for nodes in [1, 5] {
        let f: Vec<_> = rows.iter().filter(|r| r.nodes == nodes).collect();
        for w in f.windows(2) {
            let se = ((w[0].fidelity_std.powi(2) + w[1].fidelity_std.powi(2)) / 10.0).sqrt();
            assert!(w[1].fidelity_mean < w[0].fidelity_mean + 3.0 * se);
            assert!(w[1].fidelity_exact < w[0].fidelity_exact);
        }
    }
    assert_eq!(csv(&rows), csv(&distload(&cfg, 6).unwrap()));
}
