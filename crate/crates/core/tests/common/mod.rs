#![allow(dead_code)]

use std::f64::consts::PI;

use dqsim::{Circuit, DensityMatrix, Instruction, Matrix, NodeMap, NoiseTag, Operation, StateVector, C64};
use rand::Rng;

/// Noiseless single-qubit rotations preparing a random product state.
pub fn product_prep<R: Rng>(c: &mut Circuit, qubits: &[usize], rng: &mut R) {
    for &q in qubits {
        let (t, p) = (rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
        c.push(Instruction::new(Operation::Ry(t), vec![q]).with_noise(NoiseTag::Noiseless));
        c.push(Instruction::new(Operation::Rz(p), vec![q]).with_noise(NoiseTag::Noiseless));
    }
}

/// Unitary gates on `n` qubits, drawn from the set the compiler distributes.
pub fn random_gates<R: Rng>(c: &mut Circuit, n: usize, count: usize, rng: &mut R) {
    for _ in 0..count {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let t = rng.random_range(-PI..PI);
        match rng.random_range(0..9) {
            0 => c.h(a),
            1 => c.x(a),
            2 => c.ry(t, a),
            3 => c.rz(t, a),
            4 => c.p(t, a),
            5 | 6 => c.cx(a, b),
            7 => c.cp(t, a, b),
            _ if n >= 3 && rng.random_bool(0.5) => {
                let d = (0..n).find(|&d| d != a && d != b).unwrap();
                c.mcx(&[a, b], d)
            }
            _ => c.cry(t, a, b),
        };
    }
}

/// Random assignment of `n` qubits to `k` non-empty nodes.
pub fn random_node_map<R: Rng>(n: usize, k: usize, rng: &mut R) -> NodeMap {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut nodes = vec![Vec::new(); k];
    for (i, &q) in order.iter().enumerate() {
        let slot = if i < k { i } else { rng.random_range(0..k) };
        nodes[slot].push(q);
    }
    NodeMap::new(nodes.into_iter().enumerate().map(|(i, qs)| (format!("n{i}"), qs)))
}

/// Random mixed state: `G G^dagger` normalised.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
    let d = 1 << n;
    let g = Matrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(&(m / tr)).unwrap()
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps: Vec<C64> =
        (0..1 << n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// `(1 - eps) rho + eps (I / 2^k) (x) Tr_S rho` over the qubits in `subset`,
/// by explicit index arithmetic.
pub fn depolarize_oracle(rho: &Matrix, n: usize, subset: &[usize], eps: f64) -> Matrix {
    let d = 1usize << n;
    let mask: usize = subset.iter().map(|&q| 1 << q).sum();
    let k = subset.len();
    Matrix::from_fn(d, d, |r, c| {
        let mut mixed = C64::new(0.0, 0.0);
        if r & mask == c & mask {
            // sum over the traced-out subsystem index
            for s in 0..1usize << k {
                let mut bits = 0;
                for (i, &q) in subset.iter().enumerate() {
                    if s >> i & 1 == 1 {
                        bits |= 1 << q;
                    }
                }
                mixed += rho[((r & !mask) | bits, (c & !mask) | bits)];
            }
            mixed /= (1 << k) as f64;
        }
        rho[(r, c)] * (1.0 - eps) + mixed * eps
    })
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn report(criterion: u32, pass: bool, detail: String) {
    println!("{} criterion {criterion:>2}: {detail}", if pass { "PASS" } else { "FAIL" });
}

/// Full `2^n` matrix of a local gate matrix acting on `qubits`, the first
/// qubit being the least significant local bit.
pub fn embed(local: &Matrix, qubits: &[usize], n: usize) -> Matrix {
    let d = 1usize << n;
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let sub = |i: usize| qubits.iter().enumerate().map(|(k, &q)| (i >> q & 1) << k).sum::<usize>();
    Matrix::from_fn(d, d, |r, c| if r & !mask == c & !mask { local[(sub(r), sub(c))] } else { C64::new(0.0, 0.0) })
}

/// Dense product of the unitary instructions of `c`.
pub fn dense_unitary(c: &Circuit) -> Matrix {
    let n = c.num_qubits;
    let mut u = Matrix::identity(1 << n, 1 << n);
    for i in &c.instructions {
        if let Some(m) = i.op.matrix(i.qubits.len()) {
            u = embed(&m, &i.qubits, n) * u;
        }
    }
    u
}
