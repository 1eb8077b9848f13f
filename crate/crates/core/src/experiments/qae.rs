//! Maximum-likelihood amplitude estimation of `(1/c) * integral_0^c sin^2`
//! on one or more nodes, with entanglement-link cost per circuit execution.

use std::f64::consts::PI;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::mlae::{cramer_rao_bound, mlae_estimate, MlaeSchedule};
use crate::algorithms::qae::{a_true, build_a_sin2, build_grover_q, grover_circuit};
use crate::circuit::Circuit;
use crate::dqc::{create_distributed_circuit, DistributedCircuit, NodeMap};
use crate::engine;
use crate::error::{Error, Result};
use crate::experiments::{check_shots, default_replications, default_shots, mean_std, point_rng};
use crate::link::{account_run, LinkParams};
use crate::noise::NoiseParams;

pub(crate) fn default_n() -> usize {
    3
}

pub(crate) fn default_c() -> f64 {
    PI / 3.0
}

pub(crate) fn default_p() -> Vec<f64> {
    vec![1.0, 0.8, 0.5]
}

pub(crate) fn default_comm() -> usize {
    1
}

fn default_nodes() -> Vec<usize> {
    vec![1, 2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaeConfig {
    pub version: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Defaults to powers 0, 1, 2, ..., 32 with `shots` each.
    #[serde(default)]
    pub schedule: Option<MlaeSchedule>,
    #[serde(default = "default_nodes")]
    pub nodes: Vec<usize>,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_comm")]
    pub comm_per_node: usize,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub noise: Option<NoiseParams>,
}

impl QaeConfig {
    pub fn schedule(&self) -> Result<MlaeSchedule> {
        match &self.schedule {
            Some(s) => {
                s.validate().map_err(|e| Error::Config(e.to_string()))?;
                Ok(s.clone())
            }
            None => MlaeSchedule::exponential(7, self.shots),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_problem(self.n, self.c, &self.nodes, &self.p, self.comm_per_node)?;
        if let Some(noise) = &self.noise {
            noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        check_shots(self.shots, self.replications)?;
        self.schedule().map(|_| ())
    }
}

pub(crate) fn validate_problem(n: usize, c: f64, nodes: &[usize], p: &[f64], comm: usize) -> Result<()> {
    if !(1..=6).contains(&n) {
        return Err(Error::Config(format!("n = {n} index qubits is outside 1..=6")));
    }
    if !(c > 0.0 && c <= PI) {
        return Err(Error::Config(format!("c = {c} is outside (0, pi]")));
    }
    if nodes.is_empty() || nodes.iter().any(|&k| k == 0 || k > n + 1) {
        return Err(Error::Config(format!("node counts must lie in 1..={}", n + 1)));
    }
    if let Some(x) = p.iter().find(|x| !(**x > 0.0 && **x <= 1.0)) {
        return Err(Error::Config(format!("coupling p = {x} is outside (0, 1]")));
    }
    if comm == 0 {
        return Err(Error::Config("comm_per_node must be at least 1".into()));
    }
    Ok(())
}

/// Ancilla alone on the last node, index qubits split evenly over the rest.
pub fn qae_node_map(n: usize, nodes: usize) -> Result<NodeMap> {
    if nodes == 1 {
        return Ok(NodeMap::new([("1", (0..=n).collect())]));
    }
    let index = NodeMap::contiguous(n, nodes - 1)?;
    let mut map = index.nodes;
    map.insert(nodes.to_string(), vec![n]);
    Ok(NodeMap::new(map))
}

/// `Q^m A` with the ancilla measured, compiled for `nodes` nodes.
pub fn qae_circuit(n: usize, c: f64, m: u64, nodes: usize) -> Result<DistributedCircuit> {
    let a = build_a_sin2(n, c)?;
    let q = build_grover_q(&a, n)?;
    let circuit: Circuit = grover_circuit(&a, &q, m)?;
    let dc = create_distributed_circuit(&circuit, &qae_node_map(n, nodes)?)?;
    if !dc.gate_app {
        return Err(Error::GateApp(format!("Q^{m} A on {nodes} nodes")));
    }
    Ok(dc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaeRow {
    pub nodes: usize,
    pub n_grover: u64,
    pub nonlocal_count: usize,
    pub total_shots: u64,
    pub oracle_calls: u64,
    pub a_true: f64,
    pub a_hat_mean: f64,
    pub estimation_error_first: f64,
    pub estimation_error_mean: f64,
    pub estimation_error_std: f64,
    pub cramer_rao_bound: f64,
    /// Coupling values, `;`-separated, matching `k`.
    pub p: String,
    /// Entanglement attempts for one execution of `Q^n_grover A`, per coupling.
    pub k: String,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn qae(cfg: &QaeConfig, seed: u64) -> Result<Vec<QaeRow>> {
    cfg.validate()?;
    let schedule = cfg.schedule()?;
    let truth = a_true(cfg.n, cfg.c);
    let noise = cfg.noise.unwrap_or_default();

    // Exact P(ancilla = 1) per (node count, power).
    let cells: Vec<(usize, usize)> =
        (0..cfg.nodes.len()).flat_map(|i| (0..schedule.powers.len()).map(move |j| (i, j))).collect();
    let compiled: Vec<(DistributedCircuit, f64)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let dc = qae_circuit(cfg.n, cfg.c, schedule.powers[j], cfg.nodes[i])?;
            let dist = engine::exact_distribution(&dc.circuit, Some(&noise))?;
            let p1 = dist.get("1").copied().unwrap_or(0.0).clamp(0.0, 1.0);
            Ok((dc, p1))
        })
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| &compiled[i * schedule.powers.len() + j];

    let mut rows = Vec::new();
    for (i, &nodes) in cfg.nodes.iter().enumerate() {
        // hits[r][j] for replication r.
        let hits: Vec<Vec<u64>> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let mut rng = point_rng(seed, i as u64, r as u64);
                (0..schedule.powers.len())
                    .map(|j| {
                        let b = Binomial::new(schedule.shots[j], at(i, j).1).map_err(|e| Error::Domain(e.to_string()))?;
                        Ok(b.sample(&mut rng))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for j in 0..schedule.powers.len() {
            let prefix = schedule.prefix(j + 1);
            let estimates = hits
                .par_iter()
                .map(|h| mlae_estimate(&h[..=j], &prefix).map(|r| r.with_truth(truth)))
                .collect::<Result<Vec<_>>>()?;
            let errors: Vec<f64> = estimates.iter().map(|e| e.estimation_error.unwrap_or(f64::NAN)).collect();
            let a_hats: Vec<f64> = estimates.iter().map(|e| e.a_hat).collect();
            let (err_mean, err_std) = mean_std(&errors);
            let dc = &at(i, j).0;
            let mut rng = point_rng(seed, (1 << 16) + i as u64, j as u64);
            let k = cfg
                .p
                .iter()
                .map(|&p| Ok(account_run(dc, &LinkParams::new(p, cfg.comm_per_node)?, &mut rng)?.total_trials))
                .collect::<Result<Vec<u64>>>()?;
            rows.push(QaeRow {
                nodes,
                n_grover: schedule.powers[j],
                nonlocal_count: dc.nonlocal_count,
                total_shots: prefix.total_shots(),
                oracle_calls: prefix.powers.iter().zip(&prefix.shots).map(|(m, n)| (2 * m + 1) * n).sum(),
                a_true: truth,
                a_hat_mean: mean_std(&a_hats).0,
                estimation_error_first: errors[0],
                estimation_error_mean: err_mean,
                estimation_error_std: err_std,
                cramer_rao_bound: cramer_rao_bound(truth, &prefix),
                p: join(&cfg.p),
                k: join(&k),
            });
        }
    }
    Ok(rows)
}
