//! Fixtures shared by the benches.

use dqsim::algorithms::qft::build_qft;
use dqsim::{Circuit, NodeMap, NoiseParams};

/// A CNOT chain over `n` qubits with qubit `i` on node `i % nodes`.
pub fn chain(n: usize, nodes: usize) -> (Circuit, NodeMap) {
    let mut c = Circuit::new(n, n);
    c.h(0);
    for q in 1..n {
        c.cx(q - 1, q);
    }
    c.measure_all();
    let map = NodeMap::new((0..nodes).map(|k| (format!("n{k}"), (k..n).step_by(nodes).collect())));
    (c, map)
}

/// Forward QFT on `n` qubits after a layer of Hadamards.
pub fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for q in 0..n {
        c.h(q);
    }
    let all: Vec<usize> = (0..n).collect();
    c.compose(&build_qft(n, false), &all).expect("same width");
    c
}

pub fn noise() -> NoiseParams {
    NoiseParams { eps_d: 1e-3, eps_g: 1e-2, eps_m: 5e-3, ..Default::default() }
}
