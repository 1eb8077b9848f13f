//! Probability of the correct QPE outcome against the two-qubit gate error,
//! for local QPE (static inverse QFT) and distributed QPE (dynamic QFT).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::qpe::{encode_phase, example_qpe, qpe_node_map, QftMode};
use crate::circuit::Circuit;
use crate::dqc::create_distributed_circuit;
use crate::engine;
use crate::error::{Error, Result};
use crate::experiments::{check_shots, default_replications, default_shots, mean_std, point_rng};
use crate::histogram::Histogram;
use crate::noise::NoiseParams;
use crate::synth::lower;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpsM {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "eps_g/4")]
    QuarterGate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpsD {
    #[serde(rename = "eps_g")]
    EqualGate,
    #[serde(rename = "eps_g/10")]
    TenthGate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub eps_m: EpsM,
    pub eps_d: EpsD,
}

impl Scenario {
    pub fn all() -> Vec<Scenario> {
        let mut v = Vec::new();
        for eps_m in [EpsM::Zero, EpsM::QuarterGate] {
            for eps_d in [EpsD::EqualGate, EpsD::TenthGate] {
                v.push(Scenario { eps_m, eps_d });
            }
        }
        v
    }

    pub fn noise(&self, eps_g: f64) -> NoiseParams {
        let eps_d = match self.eps_d {
            EpsD::EqualGate => eps_g,
            EpsD::TenthGate => eps_g / 10.0,
        };
        let eps_m = match self.eps_m {
            EpsM::Zero => 0.0,
            EpsM::QuarterGate => eps_g / 4.0,
        };
        NoiseParams::new(eps_d, eps_g, eps_m)
    }

    fn labels(&self) -> (&'static str, &'static str) {
        (
            match self.eps_m {
                EpsM::Zero => "0",
                EpsM::QuarterGate => "eps_g/4",
            },
            match self.eps_d {
                EpsD::EqualGate => "eps_g",
                EpsD::TenthGate => "eps_g/10",
            },
        )
    }
}

fn default_eps_g() -> Vec<f64> {
    vec![0.0, 0.002, 0.005, 0.01, 0.02]
}

fn default_dqpe_qft() -> QftMode {
    QftMode::Dynamic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpeSweepConfig {
    pub version: u32,
    /// Counting qubits: 3 or 5.
    pub n: usize,
    #[serde(default = "Scenario::all")]
    pub scenarios: Vec<Scenario>,
    #[serde(default = "default_eps_g")]
    pub eps_g: Vec<f64>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// QFT used by the distributed variant.
    #[serde(default = "default_dqpe_qft")]
    pub dqpe_qft: QftMode,
}

impl QpeSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n != 3 && self.n != 5 {
            return Err(Error::Config(format!("n = {} counting qubits; expected 3 or 5", self.n)));
        }
        if self.scenarios.is_empty() || self.eps_g.is_empty() {
            return Err(Error::Config("need at least one scenario and one eps_g value".into()));
        }
        if let Some(e) = self.eps_g.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::Config(format!("eps_g = {e} is outside [0, 1]")));
        }
        check_shots(self.shots, self.replications)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    #[serde(rename = "QPE")]
    Local,
    #[serde(rename = "DQPE")]
    Distributed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpeRow {
    pub n: usize,
    pub scenario_eps_m: &'static str,
    pub scenario_eps_d: &'static str,
    pub variant: Variant,
    pub eps_g: f64,
    pub eps_d: f64,
    pub eps_m: f64,
    pub nonlocal_count: usize,
    pub two_qubit_gates: usize,
    pub p_exact: f64,
    pub p_mean: f64,
    pub p_std: f64,
    pub shots: u64,
    pub replications: usize,
}

/// Circuits of both variants for `n` counting qubits; the distributed one is
/// compiled for the two-node split (counting | system).
pub fn variant_circuits(n: usize, dqpe_qft: QftMode) -> Result<[(Variant, Circuit, usize); 2]> {
    let local = lower(&example_qpe(n, QftMode::Static)?)?;
    let dc = create_distributed_circuit(&example_qpe(n, dqpe_qft)?, &qpe_node_map(n, 2))?;
    if !dc.gate_app {
        return Err(Error::GateApp("distributed QPE".into()));
    }
    Ok([(Variant::Local, local, 0), (Variant::Distributed, dc.circuit, dc.nonlocal_count)])
}

pub fn qpe_sweep(cfg: &QpeSweepConfig, seed: u64) -> Result<Vec<QpeRow>> {
    cfg.validate()?;
    let circuits = variant_circuits(cfg.n, cfg.dqpe_qft)?;
    let expected = encode_phase(0.5, cfg.n);
    let mut points = Vec::new();
    for s in &cfg.scenarios {
        for (vi, _) in circuits.iter().enumerate() {
            for &g in &cfg.eps_g {
                points.push((*s, vi, g));
            }
        }
    }
    points
        .par_iter()
        .enumerate()
        .map(|(idx, &(s, vi, eps_g))| {
            let (variant, circuit, nonlocal) = &circuits[vi];
            let noise = s.noise(eps_g);
            let dist = engine::exact_distribution(circuit, Some(&noise))?;
            let p_exact = dist.get(&expected).copied().unwrap_or(0.0);
            let draws: Vec<f64> = (0..cfg.replications)
                .map(|r| {
                    let mut rng = point_rng(seed, idx as u64, r as u64);
                    Histogram::sample(&dist, cfg.shots, &mut rng).probability(&expected)
                })
                .collect();
            let (p_mean, p_std) = mean_std(&draws);
            let (lm, ld) = s.labels();
            Ok(QpeRow {
                n: cfg.n,
                scenario_eps_m: lm,
                scenario_eps_d: ld,
                variant: *variant,
                eps_g,
                eps_d: noise.eps_d,
                eps_m: noise.eps_m,
                nonlocal_count: *nonlocal,
                two_qubit_gates: circuit.two_qubit_gate_count(),
                p_exact,
                p_mean,
                p_std,
                shots: cfg.shots,
                replications: cfg.replications,
            })
        })
        .collect()
}
