//! Hellinger fidelity of a loaded normal distribution against node count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::distribution::{
    hellinger_fidelity, load_normal_distribution, normal_probabilities, probabilities_from_distribution,
};
use crate::dqc::{create_distributed_circuit, NodeMap};
use crate::engine;
use crate::error::{Error, Result};
use crate::experiments::{check_shots, default_replications, default_shots, mean_std, point_rng};
use crate::histogram::Histogram;
use crate::noise::NoiseParams;

fn default_n() -> usize {
    8
}

fn default_mu() -> f64 {
    1.0
}

fn default_sigma() -> f64 {
    2.0
}

fn default_nodes() -> Vec<usize> {
    vec![1, 2, 4, 8]
}

fn default_eps() -> Vec<f64> {
    vec![0.002, 0.005, 0.009]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistloadConfig {
    pub version: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_nodes")]
    pub nodes: Vec<usize>,
    /// Sets both the one- and two-qubit depolarization.
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub eps_m: f64,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
}

impl DistloadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.n) {
            return Err(Error::Config(format!("n = {} qubits is outside 1..=8", self.n)));
        }
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return Err(Error::Config(format!("sigma = {} must be positive", self.sigma)));
        }
        if let Some(k) = self.nodes.iter().find(|&&k| k == 0 || k > self.n) {
            return Err(Error::Config(format!("{k} nodes cannot hold {} qubits", self.n)));
        }
        if let Some(e) = self.eps.iter().chain([&self.eps_m]).find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::Config(format!("error rate {e} is outside [0, 1]")));
        }
        check_shots(self.shots, self.replications)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistloadRow {
    pub nodes: usize,
    pub eps: f64,
    pub nonlocal_count: usize,
    pub fidelity_exact: f64,
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
    pub shots: u64,
    pub replications: usize,
}

pub fn distload(cfg: &DistloadConfig, seed: u64) -> Result<Vec<DistloadRow>> {
    cfg.validate()?;
    let target = normal_probabilities(cfg.n, cfg.mu, cfg.sigma)?;
    let mut circuit = load_normal_distribution(cfg.n, cfg.mu, cfg.sigma)?;
    circuit.num_clbits = cfg.n;
    circuit.measure_all();
    let compiled = cfg
        .nodes
        .iter()
        .map(|&k| {
            let dc = create_distributed_circuit(&circuit, &NodeMap::contiguous(cfg.n, k)?)?;
            if !dc.gate_app {
                return Err(Error::GateApp(format!("{k}-node state preparation")));
            }
            Ok(dc)
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, f64)> =
        (0..cfg.nodes.len()).flat_map(|i| cfg.eps.iter().map(move |&e| (i, e))).collect();
    points
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, eps))| {
            let dc = &compiled[i];
            let noise = NoiseParams::new(eps, eps, cfg.eps_m);
            let dist = engine::exact_distribution(&dc.circuit, Some(&noise))?;
            let exact = hellinger_fidelity(&probabilities_from_distribution(&dist, cfg.n)?, &target)?;
            let draws = (0..cfg.replications)
                .map(|r| {
                    let hist = Histogram::sample(&dist, cfg.shots, &mut point_rng(seed, idx as u64, r as u64));
                    hellinger_fidelity(&probabilities_from_distribution(&hist.distribution(), cfg.n)?, &target)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (fidelity_mean, fidelity_std) = mean_std(&draws);
            Ok(DistloadRow {
                nodes: cfg.nodes[i],
                eps,
                nonlocal_count: dc.nonlocal_count,
                fidelity_exact: exact,
                fidelity_mean,
                fidelity_std,
                shots: cfg.shots,
                replications: cfg.replications,
            })
        })
        .collect()
}
