//! Density matrix stored row-major as a flat `4^n` vector.
//!
//! Entry `(r, c)` lives at index `(r << n) | c`, so bit `q` of the column is
//! position `q` and bit `q` of the row is position `q + n`.

use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::bits::ClassicalBits;
use crate::circuit::{Instruction, Operation};
use crate::error::{Error, Result};
use crate::gates::{Matrix, C64, ONE, ZERO};
use crate::kernel::{insert_zero_bits, Kernel};
use crate::state::StateVector;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn new(num_qubits: usize) -> Self {
        let mut data = vec![ZERO; 1 << (2 * num_qubits)];
        data[0] = ONE;
        Self { num_qubits, data }
    }

    pub fn from_statevector(psi: &StateVector) -> Self {
        let n = psi.num_qubits();
        let a = psi.amplitudes();
        let mut data = Vec::with_capacity(a.len() * a.len());
        for r in a {
            data.extend(a.iter().map(|c| r * c.conj()));
        }
        Self { num_qubits: n, data }
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() || !d.is_power_of_two() {
            return Err(Error::Validation(format!("{}x{} is not a qubit density matrix", d, m.ncols())));
        }
        let data = (0..d * d).map(|i| m[(i / d, i % d)]).collect();
        Ok(Self { num_qubits: d.trailing_zeros() as usize, data })
    }

    pub fn to_matrix(&self) -> Matrix {
        let d = self.dim();
        Matrix::from_fn(d, d, |r, c| self.data[r * d + c])
    }

    /// Diagonal matrix with the given basis-state weights.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let d = weights.len();
        if !d.is_power_of_two() {
            return Err(Error::Validation(format!("{d} weights is not a power of two")));
        }
        let mut data = vec![ZERO; d * d];
        for (i, w) in weights.iter().enumerate() {
            data[i * d + i] = C64::new(*w, 0.0);
        }
        Ok(Self { num_qubits: d.trailing_zeros() as usize, data })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[(r << self.num_qubits) | c]
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).sum()
    }

    /// Diagonal entries, i.e. computational-basis probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).collect()
    }

    pub fn scale(&mut self, w: f64) {
        for e in &mut self.data {
            *e *= w;
        }
    }

    pub fn add_assign(&mut self, other: &DensityMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitIndex { index: q, count: self.num_qubits });
        }
        Ok(())
    }

    /// `rho <- U rho U^dag` for a unitary operation on `qubits`.
    pub fn apply_gate(&mut self, op: &Operation, qubits: &[usize]) -> Result<()> {
        for &q in qubits {
            self.check(q)?;
        }
        let k = Kernel::from_op(op, qubits)
            .ok_or_else(|| Error::Contract(format!("`{}` is not a unitary gate", op.name())))?;
        self.apply_kernel(&k);
        Ok(())
    }

    pub(crate) fn apply_kernel(&mut self, k: &Kernel) {
        k.shifted(self.num_qubits).apply(&mut self.data);
        k.conj().apply(&mut self.data);
    }

    /// Depolarizing channel `rho <- (1-eps) rho + eps Tr_S(rho) ⊗ I/2^|S|` on
    /// the qubit set `S`.
    pub fn depolarize(&mut self, qubits: &[usize], eps: f64) -> Result<()> {
        for &q in qubits {
            self.check(q)?;
        }
        if eps == 0.0 || qubits.is_empty() {
            return Ok(());
        }
        let n = self.num_qubits;
        let k = qubits.len();
        let dim = 1usize << k;
        let mut positions: Vec<usize> = qubits.iter().chain(qubits).copied().collect();
        for p in &mut positions[k..] {
            *p += n;
        }
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        // offset of (row sub-index a, column sub-index b)
        let spread = |a: usize, b: usize| -> usize {
            let mut off = 0;
            for l in 0..k {
                if b >> l & 1 == 1 {
                    off |= 1 << positions[l];
                }
                if a >> l & 1 == 1 {
                    off |= 1 << positions[k + l];
                }
            }
            off
        };
        let diag: Vec<usize> = (0..dim).map(|a| spread(a, a)).collect();
        let keep = 1.0 - eps;
        let mix = eps / dim as f64;
        for (i, e) in self.data.iter_mut().enumerate() {
            // Off-diagonal blocks in the depolarized subsystem only shrink.
            let mut same = true;
            for l in 0..k {
                if (i >> positions[l] & 1) != (i >> positions[k + l] & 1) {
                    same = false;
                    break;
                }
            }
            if !same {
                *e *= keep;
            }
        }
        let outer = self.data.len() >> (2 * k);
        for o in 0..outer {
            let base = insert_zero_bits(o, &sorted);
            let total: C64 = diag.iter().map(|off| self.data[base | off]).sum();
            for off in &diag {
                let e = &mut self.data[base | off];
                *e = *e * keep + total * mix;
            }
        }
        Ok(())
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let d = self.dim();
        (0..d).filter(|i| i >> q & 1 == 1).map(|i| self.data[i * d + i].re).sum()
    }

    /// `P_b rho P_b` without renormalization; returns the branch weight.
    pub fn project(&mut self, q: usize, value: bool) -> f64 {
        let n = self.num_qubits;
        let v = value as usize;
        for (i, e) in self.data.iter_mut().enumerate() {
            if i >> q & 1 != v || i >> (q + n) & 1 != v {
                *e = ZERO;
            }
        }
        self.trace()
    }

    /// Sampled projective measurement with renormalization.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        self.check(q)?;
        let p1 = self.prob_one(q) / self.trace();
        let bit = rng.random::<f64>() < p1;
        let w = self.project(q, bit);
        if w > 0.0 {
            self.scale(1.0 / w);
        }
        Ok(bit)
    }

    /// Executes one noiseless instruction; measurements are sampled and the
    /// state renormalized, matching a single shot.
    pub fn apply_instruction<R: Rng + ?Sized>(
        &mut self,
        instr: &Instruction,
        clbits: &mut ClassicalBits,
        rng: &mut R,
    ) -> Result<()> {
        if let Some(cond) = instr.condition {
            if clbits.get(cond.clbit) != cond.value {
                return Ok(());
            }
        }
        match instr.op {
            Operation::Measure { clbit } => {
                let bit = self.measure(instr.qubits[0], rng)?;
                clbits.set(clbit, bit);
            }
            Operation::Reset => {
                self.check(instr.qubits[0])?;
                self.reset_in_place(instr.qubits[0], 0.0);
            }
            Operation::Barrier => {}
            ref op => self.apply_gate(op, &instr.qubits)?,
        }
        Ok(())
    }

    /// Block `<a|rho|b>` on qubit `q`, as a matrix over the remaining qubits.
    fn block(&self, q: usize, a: usize, b: usize) -> DensityMatrix {
        let n = self.num_qubits;
        let m = n - 1;
        let dm = 1usize << m;
        let low = (1usize << q) - 1;
        let ins = |x: usize| ((x & !low) << 1) | (x & low);
        let mut out = Vec::with_capacity(dm * dm);
        for r in 0..dm {
            let row = (ins(r) | a << q) << n;
            out.extend((0..dm).map(|c| self.data[row | ins(c) | b << q]));
        }
        DensityMatrix { num_qubits: m, data: out }
    }

    /// Reduced state after projecting `q` onto `value`, with `q` removed.
    pub fn projected_block(&self, q: usize, value: bool) -> DensityMatrix {
        let v = value as usize;
        self.block(q, v, v)
    }

    /// Partial trace over qubit `q`.
    pub fn trace_out(&self, q: usize) -> DensityMatrix {
        let mut out = self.block(q, 0, 0);
        out.add_assign(&self.block(q, 1, 1));
        out
    }

    /// Adds a new most-significant qubit in the diagonal state `diag(1-p1, p1)`.
    pub fn push_qubit(&mut self, p1: f64) {
        let n = self.num_qubits;
        let d = 1usize << n;
        let mut out = vec![ZERO; 1 << (2 * n + 2)];
        let big = d << 1;
        for (b, w) in [(0usize, 1.0 - p1), (1, p1)] {
            if w == 0.0 {
                continue;
            }
            for r in 0..d {
                for c in 0..d {
                    out[((r | b << n) * big) | c | b << n] = self.data[r * d + c] * w;
                }
            }
        }
        self.data = out;
        self.num_qubits += 1;
    }

    /// Replaces qubit `q` by `diag(1-p1, p1)` in place.
    pub fn reset_in_place(&mut self, q: usize, p1: f64) {
        let n = self.num_qubits;
        let (cm, rm) = (1usize << q, 1usize << (q + n));
        for i in 0..self.data.len() {
            if i & (cm | rm) != 0 {
                continue;
            }
            let t = self.data[i] + self.data[i | cm | rm];
            self.data[i] = t * (1.0 - p1);
            self.data[i | cm | rm] = t * p1;
            self.data[i | cm] = ZERO;
            self.data[i | rm] = ZERO;
        }
    }

    /// Reduced state on `qubits`, with `qubits[0]` as the new qubit 0.
    pub fn reduced(&self, qubits: &[usize]) -> Result<DensityMatrix> {
        for &q in qubits {
            self.check(q)?;
        }
        let n = self.num_qubits;
        let m = qubits.len();
        let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
        let dm = 1usize << m;
        let spread = |x: usize| -> usize {
            qubits.iter().enumerate().fold(0, |acc, (l, &q)| acc | ((x >> l & 1) << q))
        };
        let rest_spread = |x: usize| -> usize {
            rest.iter().enumerate().fold(0, |acc, (l, &q)| acc | ((x >> l & 1) << q))
        };
        let d = self.dim();
        let mut out = vec![ZERO; dm * dm];
        for e in 0..(1usize << rest.len()) {
            let base = rest_spread(e);
            for r in 0..dm {
                let rr = base | spread(r);
                for c in 0..dm {
                    out[r * dm + c] += self.data[rr * d + (base | spread(c))];
                }
            }
        }
        Ok(DensityMatrix { num_qubits: m, data: out })
    }

    /// `<psi|rho|psi>`
    pub fn fidelity_pure(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        let d = self.dim();
        let mut acc = ZERO;
        for (r, ar) in a.iter().enumerate() {
            let row = &self.data[r * d..(r + 1) * d];
            let inner: C64 = row.iter().zip(a).map(|(e, ac)| e * ac).sum();
            acc += ar.conj() * inner;
        }
        acc.re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks trace, Hermiticity and positivity against `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let t = self.trace();
        if (t - 1.0).abs() > tol {
            return Err(Error::Validation(format!("trace {t} deviates from 1")));
        }
        let h = self.hermiticity_error();
        if h > tol {
            return Err(Error::Validation(format!("hermiticity error {h}")));
        }
        let e = self.min_eigenvalue();
        if e < -tol {
            return Err(Error::Validation(format!("negative eigenvalue {e}")));
        }
        Ok(())
    }
}
