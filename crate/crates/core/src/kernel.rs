//! In-place gate kernels over a flat amplitude array.
//!
//! A density matrix stored row-major is a `2n`-qubit vector whose high `n`
//! bits index rows, so `U rho U^dag` is one kernel on the row bits and its
//! complex conjugate on the column bits. Both backends share these loops.

use crate::circuit::Operation;
use crate::gates::{self, Mat2, Matrix, C64, ZERO};

#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    Single { q: usize, m: Mat2 },
    ControlledSingle { c: usize, t: usize, m: Mat2 },
    Cx { c: usize, t: usize },
    Mcx { mask: usize, t: usize },
    Dense { qubits: Vec<usize>, m: Matrix },
}

impl Kernel {
    /// Kernel for a unitary operation acting on register positions `pos`.
    pub fn from_op(op: &Operation, pos: &[usize]) -> Option<Kernel> {
        if let Some(m) = op.single_qubit_matrix() {
            return Some(Kernel::Single { q: pos[0], m });
        }
        Some(match op {
            Operation::Cx => Kernel::Cx { c: pos[0], t: pos[1] },
            Operation::Cp(t) => Kernel::ControlledSingle { c: pos[0], t: pos[1], m: gates::phase(*t) },
            Operation::Cry(t) => Kernel::ControlledSingle { c: pos[0], t: pos[1], m: gates::ry(*t) },
            Operation::Mcx => {
                let (target, controls) = pos.split_last()?;
                Kernel::Mcx { mask: controls.iter().fold(0, |m, &q| m | (1 << q)), t: *target }
            }
            Operation::Unitary(m) => Kernel::Dense { qubits: pos.to_vec(), m: (**m).clone() },
            Operation::ControlledUnitary(m) if m.nrows() == 2 => {
                Kernel::ControlledSingle { c: pos[0], t: pos[1], m: gates::matrix_to_mat2(m) }
            }
            Operation::ControlledUnitary(m) => Kernel::Dense { qubits: pos.to_vec(), m: gates::controlled(m) },
            _ => return None,
        })
    }

    pub fn conj(&self) -> Kernel {
        let c2 = |m: &Mat2| [m[0].conj(), m[1].conj(), m[2].conj(), m[3].conj()];
        match self {
            Kernel::Single { q, m } => Kernel::Single { q: *q, m: c2(m) },
            Kernel::ControlledSingle { c, t, m } => Kernel::ControlledSingle { c: *c, t: *t, m: c2(m) },
            Kernel::Dense { qubits, m } => Kernel::Dense { qubits: qubits.clone(), m: m.map(|e| e.conj()) },
            other => other.clone(),
        }
    }

    pub fn shifted(&self, offset: usize) -> Kernel {
        match self {
            Kernel::Single { q, m } => Kernel::Single { q: q + offset, m: *m },
            Kernel::ControlledSingle { c, t, m } => Kernel::ControlledSingle { c: c + offset, t: t + offset, m: *m },
            Kernel::Cx { c, t } => Kernel::Cx { c: c + offset, t: t + offset },
            Kernel::Mcx { mask, t } => Kernel::Mcx { mask: mask << offset, t: t + offset },
            Kernel::Dense { qubits, m } => {
                Kernel::Dense { qubits: qubits.iter().map(|q| q + offset).collect(), m: m.clone() }
            }
        }
    }

    pub fn apply(&self, amps: &mut [C64]) {
        match self {
            Kernel::Single { q, m } => apply_single(amps, *q, m),
            Kernel::ControlledSingle { c, t, m } => apply_controlled_single(amps, *c, *t, m),
            Kernel::Cx { c, t } => apply_mcx(amps, 1 << c, *t),
            Kernel::Mcx { mask, t } => apply_mcx(amps, *mask, *t),
            Kernel::Dense { qubits, m } => apply_dense(amps, qubits, m),
        }
    }
}

fn is_diagonal(m: &Mat2) -> bool {
    m[1] == ZERO && m[2] == ZERO
}

pub(crate) fn apply_single(amps: &mut [C64], q: usize, m: &Mat2) {
    let stride = 1usize << q;
    if is_diagonal(m) {
        let (d0, d1) = (m[0], m[3]);
        let skip0 = d0 == gates::ONE;
        for (i, a) in amps.iter_mut().enumerate() {
            if i & stride != 0 {
                *a *= d1;
            } else if !skip0 {
                *a *= d0;
            }
        }
        return;
    }
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = m[0] * x0 + m[1] * x1;
            *a1 = m[2] * x0 + m[3] * x1;
        }
    }
}

pub(crate) fn apply_controlled_single(amps: &mut [C64], c: usize, t: usize, m: &Mat2) {
    let cmask = 1usize << c;
    let tmask = 1usize << t;
    if is_diagonal(m) {
        let (d0, d1) = (m[0], m[3]);
        for (i, a) in amps.iter_mut().enumerate() {
            if i & cmask != 0 {
                *a *= if i & tmask != 0 { d1 } else { d0 };
            }
        }
        return;
    }
    for i in 0..amps.len() {
        if i & cmask != 0 && i & tmask == 0 {
            let j = i | tmask;
            let (x0, x1) = (amps[i], amps[j]);
            amps[i] = m[0] * x0 + m[1] * x1;
            amps[j] = m[2] * x0 + m[3] * x1;
        }
    }
}

pub(crate) fn apply_mcx(amps: &mut [C64], control_mask: usize, t: usize) {
    let tmask = 1usize << t;
    for i in 0..amps.len() {
        if i & control_mask == control_mask && i & tmask == 0 {
            amps.swap(i, i | tmask);
        }
    }
}

/// Spreads the bits of `i` around the zero bits at `sorted` positions.
#[inline]
pub(crate) fn insert_zero_bits(mut i: usize, sorted: &[usize]) -> usize {
    for &p in sorted {
        let low = i & ((1usize << p) - 1);
        i = ((i >> p) << (p + 1)) | low;
    }
    i
}

pub(crate) fn apply_dense(amps: &mut [C64], qubits: &[usize], m: &Matrix) {
    let k = qubits.len();
    let dim = 1usize << k;
    let mut sorted = qubits.to_vec();
    sorted.sort_unstable();
    let offsets: Vec<usize> = (0..dim)
        .map(|j| (0..k).filter(|&l| j >> l & 1 == 1).fold(0, |acc, l| acc | (1 << qubits[l])))
        .collect();
    let mut buf = vec![ZERO; dim];
    let outer = amps.len() >> k;
    for i in 0..outer {
        let base = insert_zero_bits(i, &sorted);
        for (b, off) in buf.iter_mut().zip(&offsets) {
            *b = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, b) in buf.iter().enumerate() {
                acc += m[(r, c)] * b;
            }
            amps[base | off] = acc;
        }
    }
}

/// Applies the Pauli `p` (0 = I, 1 = X, 2 = Y, 3 = Z) to bit `q`.
pub(crate) fn apply_pauli(amps: &mut [C64], q: usize, p: u8) {
    match p {
        1 => apply_mcx(amps, 0, q),
        2 => apply_single(amps, q, &gates::y()),
        3 => apply_single(amps, q, &gates::z()),
        _ => {}
    }
}
