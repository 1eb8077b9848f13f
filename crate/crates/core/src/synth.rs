//! Rewriting multi-qubit gates into single-qubit gates and CNOTs.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Schur;

use crate::circuit::{Circuit, Instruction, Operation};
use crate::error::{Error, Result};
use crate::gates::{self, Mat2, Matrix, C64, ONE};

const SYNTH_TOL: f64 = 1e-9;

/// A gate list plus the global phase it leaves behind.
#[derive(Debug, Clone, Default)]
pub struct Synthesis {
    pub ops: Vec<Instruction>,
    pub global_phase: f64,
}

impl Synthesis {
    fn gate(&mut self, op: Operation, qubits: &[usize]) {
        self.ops.push(Instruction::new(op, qubits.to_vec()));
    }

    fn rotation(&mut self, op: fn(f64) -> Operation, angle: f64, q: usize) {
        if angle.abs() > 1e-14 {
            self.gate(op(angle), &[q]);
        }
    }

    fn extend(&mut self, other: Synthesis) {
        self.ops.extend(other.ops);
        self.global_phase += other.global_phase;
    }
}

/// `exp(i * lambda * x_0 x_1 ... x_{m-1})` on `qubits`, as a CNOT/phase
/// network over all parities (Gray-code order): `2^m - 2` CNOTs.
pub fn multi_controlled_phase(lambda: f64, qubits: &[usize]) -> Vec<Instruction> {
    let m = qubits.len();
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let scale = lambda / (1u64 << (m - 1)) as f64;
    let coeff = |mask: usize| {
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        sign * scale
    };
    for top in 0..m {
        // Parities whose highest member is `top`, accumulated on `top` while
        // walking a Gray code over the lower qubits.
        let pivot = qubits[top];
        let lower = 1usize << top;
        let mut current = 0usize;
        for step in 0..lower {
            let gray = step ^ (step >> 1);
            if gray != current {
                let changed = (gray ^ current).trailing_zeros() as usize;
                out.push(Instruction::new(Operation::Cx, vec![qubits[changed], pivot]));
                current = gray;
            }
            out.push(Instruction::new(Operation::Phase(coeff(gray | lower)), vec![pivot]));
        }
        if current != 0 {
            let changed = current.trailing_zeros() as usize;
            out.push(Instruction::new(Operation::Cx, vec![qubits[changed], pivot]));
        }
    }
    out
}

/// k-controlled X on `k + 1` qubits (controls `0..k`, target `k`) using only
/// single-qubit gates and CNOTs: 1 CNOT for k = 1, 6 for k = 2, and
/// `2^(k+1) - 2` beyond that.
pub fn decompose_mcx(k: usize) -> Circuit {
    let mut c = Circuit::new(k + 1, 0);
    let qubits: Vec<usize> = (0..=k).collect();
    c.instructions = mcx_ops(&qubits[..k], k);
    c
}

pub(crate) fn mcx_ops(controls: &[usize], target: usize) -> Vec<Instruction> {
    let mut c = Circuit::new(0, 0);
    match controls {
        [] => {
            c.x(target);
        }
        [a] => {
            c.cx(*a, target);
        }
        [a, b] => {
            let (t, tdg) = (PI / 4.0, -PI / 4.0);
            c.h(target)
                .cx(*b, target)
                .p(tdg, target)
                .cx(*a, target)
                .p(t, target)
                .cx(*b, target)
                .p(tdg, target)
                .cx(*a, target)
                .p(t, *b)
                .p(t, target)
                .h(target)
                .cx(*a, *b)
                .p(t, *a)
                .p(tdg, *b)
                .cx(*a, *b);
        }
        _ => {
            let mut all = controls.to_vec();
            all.push(target);
            c.h(target);
            c.instructions.extend(multi_controlled_phase(PI, &all));
            c.h(target);
        }
    }
    c.instructions
}

/// `e^{i alpha} W` with `W` Hermitian and traceless, i.e. a rotated Pauli.
fn involution_phase(u: &Mat2) -> Option<f64> {
    let det = u[0] * u[3] - u[1] * u[2];
    // eigenvalues e^{i alpha} (+1, -1) give det = -e^{2 i alpha}, trace = 0
    if (u[0] + u[3]).norm() > SYNTH_TOL {
        return None;
    }
    Some(((-det).arg() / 2.0).rem_euclid(2.0 * PI))
}

/// Controlled single-qubit unitary.
pub fn controlled_1q(u: &Mat2, control: usize, target: usize) -> Synthesis {
    let mut s = Synthesis::default();
    let um = gates::mat2_to_matrix(u);
    if let Some(phase) = gates::global_phase_of_identity(&um, SYNTH_TOL) {
        s.rotation(Operation::Phase, phase, control);
        return s;
    }
    if let Some(alpha) = involution_phase(u) {
        // u = e^{i alpha} V X V^dag with V built from the +1 eigenvector of w.
        let g = C64::from_polar(1.0, -alpha);
        let w: Mat2 = [u[0] * g, u[1] * g, u[2] * g, u[3] * g];
        // columns of (w + I) span the +1 eigenspace
        let cols = [[w[0] + ONE, w[2]], [w[1], w[3] + ONE]];
        let size = |c: &[C64; 2]| c[0].norm_sqr() + c[1].norm_sqr();
        let pick = if size(&cols[0]) >= size(&cols[1]) { cols[0] } else { cols[1] };
        let norm = size(&pick).sqrt();
        let plus = [pick[0] / norm, pick[1] / norm];
        let minus = [-plus[1].conj(), plus[0].conj()];
        // columns of V: V|+> = plus, V|-> = minus  =>  V = [plus minus] H
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v: Mat2 = [
            (plus[0] + minus[0]) * r,
            (plus[0] - minus[0]) * r,
            (plus[1] + minus[1]) * r,
            (plus[1] - minus[1]) * r,
        ];
        let vd = gates::mat2_adjoint(&v);
        s.extend(single_qubit(&vd, target));
        s.gate(Operation::Cx, &[control, target]);
        s.extend(single_qubit(&v, target));
        s.rotation(Operation::Phase, alpha, control);
        return s;
    }
    let a = gates::zyz_decompose(u);
    s.rotation(Operation::Rz, (a.delta - a.beta) / 2.0, target);
    s.gate(Operation::Cx, &[control, target]);
    s.rotation(Operation::Rz, -(a.delta + a.beta) / 2.0, target);
    s.rotation(Operation::Ry, -a.gamma / 2.0, target);
    s.gate(Operation::Cx, &[control, target]);
    s.rotation(Operation::Ry, a.gamma / 2.0, target);
    s.rotation(Operation::Rz, a.beta, target);
    s.rotation(Operation::Phase, a.alpha, control);
    s
}

/// Euler-angle realization of an arbitrary single-qubit unitary.
pub fn single_qubit(u: &Mat2, q: usize) -> Synthesis {
    let a = gates::zyz_decompose(u);
    let mut s = Synthesis { ops: Vec::new(), global_phase: a.alpha };
    s.rotation(Operation::Rz, a.delta, q);
    s.rotation(Operation::Ry, a.gamma, q);
    s.rotation(Operation::Rz, a.beta, q);
    s
}

/// Splits `m` into `a ⊗ b` with `b` acting on the low `d_low`-dimensional
/// factor, both unitary.
fn kron_factor(m: &Matrix, d_low: usize) -> Option<(Matrix, Matrix)> {
    let d = m.nrows();
    let d_high = d / d_low;
    let (mut bi, mut bj, mut best) = (0, 0, 0.0);
    for i in 0..d {
        for j in 0..d {
            if m[(i, j)].norm() > best {
                best = m[(i, j)].norm();
                bi = i;
                bj = j;
            }
        }
    }
    let (hi, hj, li, lj) = (bi / d_low, bj / d_low, bi % d_low, bj % d_low);
    let b = Matrix::from_fn(d_low, d_low, |r, c| m[(hi * d_low + r, hj * d_low + c)]);
    let pivot = b[(li, lj)];
    let a = Matrix::from_fn(d_high, d_high, |r, c| m[(r * d_low + li, c * d_low + lj)] / pivot);
    let scale: f64 = (0..d_low).map(|r| b[(r, 0)].norm_sqr()).sum::<f64>().sqrt();
    let b = b / C64::new(scale, 0.0);
    let a = a * C64::new(scale, 0.0);
    if (gates::kron(&a, &b) - m).norm() > SYNTH_TOL || gates::unitary_deviation(&b) > SYNTH_TOL {
        return None;
    }
    Some((a, b))
}

/// Splits a multi-qubit unitary into single-qubit tensor factors, listed for
/// `targets[0]` (least significant) upward.
fn tensor_factors(u: &Matrix) -> Option<Vec<Mat2>> {
    let k = u.nrows().trailing_zeros() as usize;
    let mut rest = u.clone();
    let mut out = Vec::with_capacity(k);
    for _ in 1..k {
        let (a, b) = kron_factor(&rest, 2)?;
        out.push(gates::matrix_to_mat2(&b));
        rest = a;
    }
    out.push(gates::matrix_to_mat2(&rest));
    Some(out)
}

/// Controlled `u` with `targets[0]` as the least-significant index bit of `u`.
/// Tensor-product unitaries are controlled factor by factor; anything else is
/// diagonalized, `u = V D V^dag`, leaving `V` as a block on the targets and
/// the controlled diagonal as a parity network.
pub fn controlled_unitary(u: &Matrix, control: usize, targets: &[usize]) -> Result<Synthesis> {
    gates::check_unitary(u)?;
    if u.nrows() != 1 << targets.len() {
        return Err(Error::Validation(format!(
            "{}x{} unitary does not match {} target qubits",
            u.nrows(),
            u.ncols(),
            targets.len()
        )));
    }
    if let Some(factors) = tensor_factors(u) {
        let mut s = Synthesis::default();
        for (f, &t) in factors.iter().zip(targets) {
            s.extend(controlled_1q(f, control, t));
        }
        return Ok(s);
    }
    let schur = Schur::new(u.clone());
    let (v, t) = schur.unpack();
    let d = u.nrows();
    let phases: Vec<f64> = (0..d).map(|i| t[(i, i)].arg()).collect();
    let mut s = Synthesis::default();
    let vd = v.adjoint();
    s.gate(Operation::Unitary(Arc::new(vd)), targets);
    // Controlled diagonal: phase phases[x] on |control=1, targets=x>.
    let mut qubits = vec![control];
    qubits.extend_from_slice(targets);
    let m = qubits.len();
    let angle = |z: usize| if z & 1 == 1 { phases[z >> 1] } else { 0.0 };
    let size = 1usize << m;
    for mask in 1..size {
        let walsh: f64 = (0..size)
            .map(|z| if (mask & z).count_ones() % 2 == 1 { -angle(z) } else { angle(z) })
            .sum::<f64>()
            / size as f64;
        let weight = -2.0 * walsh;
        if weight.abs() < 1e-14 {
            continue;
        }
        let members: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| qubits[b]).collect();
        let pivot = *members.last().expect("nonempty");
        for &q in &members[..members.len() - 1] {
            s.gate(Operation::Cx, &[q, pivot]);
        }
        s.gate(Operation::Phase(weight), &[pivot]);
        for &q in members[..members.len() - 1].iter().rev() {
            s.gate(Operation::Cx, &[q, pivot]);
        }
    }
    s.gate(Operation::Unitary(Arc::new(v)), targets);
    Ok(s)
}

/// Two-CNOT controlled phase.
pub fn cp_ops(theta: f64, a: usize, b: usize) -> Vec<Instruction> {
    let mut c = Circuit::new(0, 0);
    c.p(theta / 2.0, a).cx(a, b).p(-theta / 2.0, b).cx(a, b).p(theta / 2.0, b);
    c.instructions
}

/// Two-CNOT controlled RY.
pub fn cry_ops(theta: f64, control: usize, target: usize) -> Vec<Instruction> {
    let mut c = Circuit::new(0, 0);
    c.ry(theta / 2.0, target).cx(control, target).ry(-theta / 2.0, target).cx(control, target);
    c.instructions
}

/// Replaces controlled unitaries and multi-controlled X gates by single-qubit
/// gates and CNOTs; other instructions are copied.
pub fn lower(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit { instructions: Vec::with_capacity(circuit.len()), ..circuit.clone() };
    for instr in &circuit.instructions {
        let ops = match &instr.op {
            Operation::ControlledUnitary(u) => {
                let s = controlled_unitary(u, instr.qubits[0], &instr.qubits[1..])?;
                out.global_phase += s.global_phase;
                s.ops
            }
            Operation::Mcx if instr.qubits.len() > 2 => {
                let (t, cs) = instr.qubits.split_last().expect("mcx has a target");
                mcx_ops(cs, *t)
            }
            _ => {
                out.instructions.push(instr.clone());
                continue;
            }
        };
        if instr.condition.is_some() && ops.len() > 1 {
            return Err(Error::Contract(format!("cannot lower classically conditioned `{instr}`")));
        }
        for mut op in ops {
            op.condition = instr.condition;
            op.noise = instr.noise;
            out.instructions.push(op);
        }
    }
    Ok(out)
}

/// Unitary of a measurement-free gate list on `n` qubits (dense, small `n`).
pub fn unitary_of(ops: &[Instruction], n: usize) -> Matrix {
    let d = 1usize << n;
    let mut m = Matrix::zeros(d, d);
    for col in 0..d {
        let mut s = crate::state::StateVector::basis(n, col);
        for i in ops {
            if i.op != Operation::Barrier {
                s.apply_gate(&i.op, &i.qubits).expect("valid gate");
            }
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    m
}
