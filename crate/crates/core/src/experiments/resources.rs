//! Entanglement-generation attempts for distributed amplitude estimation.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::point_rng;
use crate::experiments::qae::{default_c, default_comm, default_n, default_p, qae_circuit, validate_problem};
use crate::link::{account_run, LinkParams};

fn default_nodes() -> Vec<usize> {
    vec![2, 3]
}

fn default_n_grover() -> Vec<u64> {
    vec![0, 1, 2, 4, 8, 16, 32]
}

fn default_runs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcesConfig {
    pub version: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_nodes")]
    pub nodes: Vec<usize>,
    #[serde(default = "default_n_grover")]
    pub n_grover: Vec<u64>,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_comm")]
    pub comm_per_node: usize,
    /// Independent link samples per cell.
    #[serde(default = "default_runs")]
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceRow {
    pub run_id: usize,
    pub n_nodes: usize,
    pub n_grover: u64,
    pub p: f64,
    pub k_total: u64,
}

pub fn resources(cfg: &ResourcesConfig, seed: u64) -> Result<Vec<ResourceRow>> {
    validate_problem(cfg.n, cfg.c, &cfg.nodes, &cfg.p, cfg.comm_per_node)?;
    let mut rows = Vec::new();
    for (i, &nodes) in cfg.nodes.iter().enumerate() {
        for (j, &m) in cfg.n_grover.iter().enumerate() {
            let dc = qae_circuit(cfg.n, cfg.c, m, nodes)?;
            for (l, &p) in cfg.p.iter().enumerate() {
                let link = LinkParams::new(p, cfg.comm_per_node)?;
                let point = ((i * cfg.n_grover.len() + j) * cfg.p.len() + l) as u64;
                for run_id in 0..cfg.runs {
                    let mut rng = point_rng(seed, point, run_id as u64);
                    let k_total = account_run(&dc, &link, &mut rng)?.total_trials;
                    rows.push(ResourceRow { run_id, n_nodes: nodes, n_grover: m, p, k_total });
                }
            }
        }
    }
    Ok(rows)
}
