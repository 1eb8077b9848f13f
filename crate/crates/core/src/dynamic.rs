//! Dynamic QFT: a QFT followed by measurement, with every controlled phase
//! replaced by a phase gate conditioned on an earlier measurement outcome.

use std::collections::BTreeSet;

use crate::algorithms::qft::{qft_angle, qft_ops};
use crate::circuit::{Circuit, Instruction, NoiseTag, Operation};
use crate::error::{Error, Result};

/// Depolarization of the conditioned phase on position `target` driven by the
/// outcome of position `control`; `None` defers to the noise model.
pub type CommNoise<'a> = &'a dyn Fn(usize, usize) -> Option<f64>;

fn uniform(_: usize, _: usize) -> Option<f64> {
    None
}

/// Dynamic (inverse) QFT on `qubits`, measuring `qubits[k]` into `clbits[k]`.
///
/// The inverse form processes positions 0, 1, ..., n-1: conditioned
/// `P(-pi/2^(j-i))` from each measured `i < j`, then H and measurement. The
/// forward form runs n-1, ..., 0 with `P(+pi/2^(k-j))` from each measured
/// `k > j`.
pub fn dynamic_qft_ops(qubits: &[usize], clbits: &[usize], inverse: bool, comm: CommNoise<'_>) -> Vec<Instruction> {
    assert_eq!(qubits.len(), clbits.len(), "one classical bit per qubit");
    let n = qubits.len();
    let mut ops = Vec::with_capacity(n * (n + 3) / 2);
    let order: Vec<usize> = if inverse { (0..n).collect() } else { (0..n).rev().collect() };
    for (step, &j) in order.iter().enumerate() {
        for &k in order[..step].iter() {
            let (lo, hi) = (j.min(k), j.max(k));
            ops.push(
                Instruction::new(Operation::Phase(qft_angle(lo, hi, inverse)), vec![qubits[j]])
                    .with_condition(clbits[k], true)
                    .with_noise(NoiseTag::Comm(comm(k, j))),
            );
        }
        ops.push(Instruction::new(Operation::H, vec![qubits[j]]));
        ops.push(Instruction::new(Operation::Measure { clbit: clbits[j] }, vec![qubits[j]]));
    }
    ops
}

/// Dynamic inverse QFT on `n` qubits, qubit `j` measured into clbit `j`.
pub fn build_dynamic_qft(n: usize) -> Circuit {
    build_dynamic_qft_with(n, true, &uniform)
}

pub fn build_dynamic_qft_with(n: usize, inverse: bool, comm: CommNoise<'_>) -> Circuit {
    let mut c = Circuit::new(n, n);
    let idx: Vec<usize> = (0..n).collect();
    for op in dynamic_qft_ops(&idx, &idx, inverse, comm) {
        c.push(op);
    }
    c
}

/// Appends the dynamic inverse QFT on `qubits` to `circuit`.
pub fn append_dynamic_qft(circuit: &mut Circuit, qubits: &[usize], clbits: &[usize]) {
    for op in dynamic_qft_ops(qubits, clbits, true, &uniform) {
        circuit.push(op);
    }
}

/// Replaces the terminal (inverse) QFT + measurement on `qft_qubits` with
/// its dynamic form. `qft_qubits[k]` is position `k` of the transform.
pub fn rewrite_terminal_qft(circuit: &Circuit, qft_qubits: &[usize]) -> Result<Circuit> {
    rewrite_terminal_qft_with(circuit, qft_qubits, &uniform)
}

#[derive(Debug, Clone, PartialEq)]
enum Key {
    H,
    Cp(f64, usize, usize),
}

fn key(instr: &Instruction, pos: &dyn Fn(usize) -> usize) -> Option<Key> {
    match instr.op {
        Operation::H => Some(Key::H),
        Operation::Cp(t) => {
            let (a, b) = (pos(instr.qubits[0]), pos(instr.qubits[1]));
            Some(Key::Cp(t, a.min(b), a.max(b)))
        }
        _ => None,
    }
}

fn same(a: &Key, b: &Key) -> bool {
    match (a, b) {
        (Key::H, Key::H) => true,
        (Key::Cp(s, a0, a1), Key::Cp(t, b0, b1)) => a0 == b0 && a1 == b1 && (s - t).abs() < 1e-12,
        _ => false,
    }
}

pub fn rewrite_terminal_qft_with(circuit: &Circuit, qft_qubits: &[usize], comm: CommNoise<'_>) -> Result<Circuit> {
    let refuse = |msg: String| Err(Error::RewriteRefused(msg));
    let n = qft_qubits.len();
    if n == 0 {
        return refuse("no qubits designated".into());
    }
    let mut pos = vec![usize::MAX; circuit.num_qubits];
    for (k, &q) in qft_qubits.iter().enumerate() {
        if q >= circuit.num_qubits {
            return Err(Error::QubitIndex { index: q, count: circuit.num_qubits });
        }
        if pos[q] != usize::MAX {
            return refuse(format!("qubit {q} is designated twice"));
        }
        pos[q] = k;
    }
    let in_block = |q: usize| pos[q] != usize::MAX;

    let touching: Vec<usize> = circuit
        .instructions
        .iter()
        .enumerate()
        .filter(|(_, ins)| ins.op != Operation::Barrier && ins.qubits.iter().any(|&q| in_block(q)))
        .map(|(i, _)| i)
        .collect();
    let template_len = n * (n + 1) / 2;
    if touching.len() < template_len + n {
        return refuse(format!("only {} instructions act on the designated qubits", touching.len()));
    }
    let block = &touching[touching.len() - template_len - n..];

    // Per-position gate sequences and measurement bits of the candidate block.
    let mut seqs: Vec<Vec<Key>> = vec![Vec::new(); n];
    let mut clbits: Vec<Option<usize>> = vec![None; n];
    for &i in block {
        let ins = &circuit.instructions[i];
        if let Some(q) = ins.qubits.iter().find(|&&q| !in_block(q)) {
            return refuse(format!("instruction {i} (`{ins}`) mixes qubit {q} into the block"));
        }
        if ins.condition.is_some() {
            return refuse(format!("instruction {i} (`{ins}`) is classically conditioned"));
        }
        if let Operation::Measure { clbit } = ins.op {
            let k = pos[ins.qubits[0]];
            if clbits[k].replace(clbit).is_some() {
                return refuse(format!("qubit {} is measured twice", ins.qubits[0]));
            }
            continue;
        }
        if let Some(k) = ins.qubits.iter().find(|&&q| clbits[pos[q]].is_some()) {
            return refuse(format!("instruction {i} (`{ins}`) follows the measurement of qubit {k}"));
        }
        let Some(key) = key(ins, &|q| pos[q]) else {
            return refuse(format!("instruction {i} (`{ins}`) is not part of a QFT"));
        };
        for &q in &ins.qubits {
            seqs[pos[q]].push(key.clone());
        }
    }
    let Some(clbits) = clbits.into_iter().collect::<Option<Vec<usize>>>() else {
        return refuse("not every designated qubit ends in a measurement".into());
    };
    if clbits.iter().collect::<BTreeSet<_>>().len() != n {
        return refuse("designated qubits share a classical bit".into());
    }

    let idx: Vec<usize> = (0..n).collect();
    let matches = |inverse: bool| {
        let mut want: Vec<Vec<Key>> = vec![Vec::new(); n];
        for ins in qft_ops(&idx, inverse) {
            let k = key(&ins, &|q| q).expect("template gate");
            for &q in &ins.qubits {
                want[q].push(k.clone());
            }
        }
        want.iter().zip(&seqs).all(|(w, s)| w.len() == s.len() && w.iter().zip(s).all(|(a, b)| same(a, b)))
    };
    let inverse = if matches(true) {
        true
    } else if matches(false) {
        false
    } else {
        return refuse("gate sequence on the designated qubits is not a QFT followed by measurement".into());
    };

    let (first, last) = (block[0], *block.last().expect("nonempty"));
    let members: BTreeSet<usize> = block.iter().copied().collect();
    let bits: BTreeSet<usize> = clbits.iter().copied().collect();
    for i in first..=last {
        let ins = &circuit.instructions[i];
        if members.contains(&i) {
            continue;
        }
        let reads = ins.condition.is_some_and(|c| bits.contains(&c.clbit));
        let writes = ins.clbit().is_some_and(|c| bits.contains(&c));
        if reads || writes {
            return refuse(format!("instruction {i} (`{ins}`) uses a measurement bit of the block"));
        }
    }

    let mut out = Circuit { instructions: Vec::with_capacity(circuit.len() + n), ..circuit.clone() };
    for (i, ins) in circuit.instructions.iter().enumerate() {
        if i == last {
            out.instructions.extend(dynamic_qft_ops(qft_qubits, &clbits, inverse, comm));
        } else if !members.contains(&i) {
            out.instructions.push(ins.clone());
        }
    }
    Ok(out)
}
