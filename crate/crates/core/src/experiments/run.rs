//! Compile (optionally) and simulate one circuit.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::dqc::{create_distributed_circuit, DistributedCircuit, NodeMap};
use crate::dynamic::rewrite_terminal_qft;
use crate::engine;
use crate::error::{Error, Result};
use crate::experiments::default_shots;
use crate::histogram::Histogram;
use crate::ir::{self, CircuitFile};
use crate::link::{self, LinkParams};
use crate::noise::{self, NoiseParams};

/// A file path (relative to the config) or an inline value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: serde::de::DeserializeOwned + Clone> Source<T> {
    fn resolve(&self, base: Option<&Path>) -> Result<T> {
        match self {
            Source::Inline(v) => Ok(v.clone()),
            Source::Path(p) => {
                let path = base.map(|b| b.join(p)).unwrap_or_else(|| p.clone());
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| {
                    Error::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub circuit: Source<CircuitFile>,
    #[serde(default)]
    pub nodes: Option<Source<NodeMap>>,
    #[serde(default)]
    pub noise: Option<NoiseParams>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// Qubits of a terminal QFT to rewrite when the dynamic-QFT switch is on.
    #[serde(default)]
    pub qft_qubits: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkReport {
    pub p: f64,
    pub m: usize,
    /// Entanglement attempts for one execution of the circuit.
    pub k_total: u64,
    /// Mean attempts per execution over all shots.
    pub k_mean: f64,
    pub gadget_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub nonlocal_count: usize,
    pub gate_app: bool,
    pub analytic_fidelity: f64,
    pub gadget_error_budget: f64,
    pub shots: u64,
    pub seed: u64,
    pub link: Option<LinkReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub histogram: Histogram,
    pub report: RunReport,
}

/// Inputs of a run after every file reference has been loaded.
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub circuit: Circuit,
    pub nodes: Option<NodeMap>,
    pub noise: NoiseParams,
    pub shots: u64,
    pub qft_qubits: Option<Vec<usize>>,
}

impl RunConfig {
    /// Loads referenced files, resolving paths against `base`.
    pub fn resolve(&self, base: Option<&Path>) -> Result<RunInputs> {
        let file = self.circuit.resolve(base)?;
        let circuit = file.to_circuit().map_err(|e| Error::Config(format!("circuit: {e}")))?;
        let nodes = self.nodes.as_ref().map(|n| n.resolve(base)).transpose()?;
        let noise = self.noise.unwrap_or_default();
        noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        Ok(RunInputs { circuit, nodes, noise, shots: self.shots, qft_qubits: self.qft_qubits.clone() })
    }
}

/// Runs the circuit, compiling it first when a node map is given. Compile
/// failures (gate_app = 0) come back as errors with
/// [`Error::is_compile_failure`] set.
pub fn run(inputs: &RunInputs, dynamic_qft: bool, seed: u64) -> Result<RunOutput> {
    let (compiled, dc) = prepare(inputs, dynamic_qft)?;
    let nonlocal = dc.as_ref().map_or(0, |d| d.nonlocal_count);
    let gate_app = dc.as_ref().is_none_or(|d| d.gate_app);
    let histogram = engine::run(&compiled, inputs.shots, Some(&inputs.noise), seed)?;
    let link = match (&dc, &inputs.nodes) {
        (Some(dc), Some(nodes)) => {
            let params = LinkParams::new(nodes.coupling_p, nodes.comm_per_node)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c69_6e6b);
            let first = link::account_run(dc, &params, &mut rng)?;
            let mut total = first.total_trials;
            for _ in 1..inputs.shots {
                total += link::account_run(dc, &params, &mut rng)?.total_trials;
            }
            Some(LinkReport {
                p: params.p,
                m: params.m,
                k_total: first.total_trials,
                k_mean: total as f64 / inputs.shots as f64,
                gadget_count: first.gadget_count,
            })
        }
        _ => None,
    };
    let report = RunReport {
        nonlocal_count: nonlocal,
        gate_app,
        analytic_fidelity: noise::analytic_gate_fidelity(nonlocal as u64, &inputs.noise)?,
        gadget_error_budget: noise::gadget_error_budget(&inputs.noise),
        shots: inputs.shots,
        seed,
        link,
    };
    Ok(RunOutput { histogram, report })
}

/// The circuit that [`run`] simulates, in the interchange format.
pub fn compiled_json(inputs: &RunInputs, dynamic_qft: bool) -> Result<String> {
    let (circuit, dc) = prepare(inputs, dynamic_qft)?;
    ir::circuit_to_json(&circuit, dc.as_ref().map_or(&[][..], |d| &d.gadgets[..]))
}

fn prepare(inputs: &RunInputs, dynamic_qft: bool) -> Result<(Circuit, Option<DistributedCircuit>)> {
    let mut circuit = inputs.circuit.clone();
    if dynamic_qft {
        let qubits = inputs
            .qft_qubits
            .as_ref()
            .ok_or_else(|| Error::Config("the dynamic-QFT rewrite needs \"qft_qubits\"".into()))?;
        circuit = rewrite_terminal_qft(&circuit, qubits)?;
    }
    match &inputs.nodes {
        Some(nodes) => {
            nodes.validate(circuit.num_qubits).map_err(|e| Error::Config(format!("node map: {e}")))?;
            let dc = create_distributed_circuit(&circuit, nodes)?;
            if !dc.gate_app {
                return Err(Error::GateApp("an inter-node gate was left in place".into()));
            }
            Ok((dc.circuit.clone(), Some(dc)))
        }
        None => Ok((circuit, None)),
    }
}
