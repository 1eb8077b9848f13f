//! Quantum Fourier transform without the terminal swap network.
//!
//! The forward transform maps `|y>` to `sum_z w^(y * rev(z)) |z> / sqrt(N)`,
//! where `rev` reverses the bit order; the inverse undoes it, leaving the bit
//! of weight `2^j` of a phase fraction on qubit `j`.

use std::f64::consts::PI;

use crate::circuit::{Circuit, Instruction, Operation};

/// Phase of the controlled rotation between positions `i < j`.
pub(crate) fn qft_angle(i: usize, j: usize, inverse: bool) -> f64 {
    let a = PI / (1u64 << (j - i)) as f64;
    if inverse {
        -a
    } else {
        a
    }
}

/// Instructions of the (inverse) transform on `qubits`, where `qubits[k]`
/// plays the role of position `k`.
pub fn qft_ops(qubits: &[usize], inverse: bool) -> Vec<Instruction> {
    let n = qubits.len();
    let mut ops = Vec::with_capacity(n * (n + 1) / 2);
    let h = |j: usize| Instruction::new(Operation::H, vec![qubits[j]]);
    let cp = |i: usize, j: usize| Instruction::new(Operation::Cp(qft_angle(i, j, inverse)), vec![qubits[i], qubits[j]]);
    if inverse {
        for j in 0..n {
            for i in 0..j {
                ops.push(cp(i, j));
            }
            ops.push(h(j));
        }
    } else {
        for j in (0..n).rev() {
            ops.push(h(j));
            for i in (0..j).rev() {
                ops.push(cp(i, j));
            }
        }
    }
    ops
}

pub fn build_qft(n: usize, inverse: bool) -> Circuit {
    let mut c = Circuit::new(n, 0);
    let qubits: Vec<usize> = (0..n).collect();
    for op in qft_ops(&qubits, inverse) {
        c.push(op);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;
    use crate::gates::C64;

    fn rev(z: usize, n: usize) -> usize {
        (0..n).fold(0, |acc, b| acc | (((z >> b) & 1) << (n - 1 - b)))
    }

    #[test]
    fn forward_is_bit_reversed_dft() {
        for n in 1..=6 {
            let dim = 1usize << n;
            let u = crate::synth::unitary_of(&build_qft(n, false).instructions, n);
            let mut dev = 0.0f64;
            for z in 0..dim {
                for y in 0..dim {
                    let phase = 2.0 * PI * (y * rev(z, n)) as f64 / dim as f64;
                    let want = C64::from_polar(1.0 / (dim as f64).sqrt(), phase);
                    dev = dev.max((u[(z, y)] - want).norm());
                }
            }
            assert!(dev < 1e-9, "n={n} dev={dev}");
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let mut c = build_qft(3, false);
        c.compose(&build_qft(3, true), &[0, 1, 2]).unwrap();
        let u = crate::synth::unitary_of(&c.instructions, 3);
        let id = crate::gates::Matrix::identity(8, 8);
        assert!((u - id).norm() < 1e-10);
    }

    #[test]
    fn uniform_from_zero() {
        let s = engine::statevector(&build_qft(3, false)).unwrap();
        for a in s.amplitudes() {
            assert!((a - C64::new(1.0 / 8f64.sqrt(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn census() {
        let c = build_qft(5, true);
        assert_eq!(c.count_ops()["h"], 5);
        assert_eq!(c.two_qubit_gate_count(), 10);
    }
}
