//! Dense statevector. Qubit 0 is the least-significant bit of the basis index.

use rand::Rng;

use crate::bits::ClassicalBits;
use crate::circuit::{Instruction, Operation};
use crate::error::{Error, Result};
use crate::gates::{C64, ONE, ZERO};
use crate::kernel::{self, Kernel};

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Self { num_qubits, amps }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Self { num_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Validation(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let num_qubits = amps.len().trailing_zeros() as usize;
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
    }

    pub fn scale(&mut self, factor: C64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// Tensor product with `other` placed on the high-order qubits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for b in &other.amps {
            amps.extend(self.amps.iter().map(|a| a * b));
        }
        StateVector { num_qubits: self.num_qubits + other.num_qubits, amps }
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitIndex { index: q, count: self.num_qubits });
        }
        Ok(())
    }

    /// Applies a unitary operation to the given qubits.
    pub fn apply_gate(&mut self, op: &Operation, qubits: &[usize]) -> Result<()> {
        for &q in qubits {
            self.check(q)?;
        }
        let kernel = Kernel::from_op(op, qubits)
            .ok_or_else(|| Error::Contract(format!("`{}` is not a unitary gate", op.name())))?;
        kernel.apply(&mut self.amps);
        Ok(())
    }

    pub(crate) fn apply_kernel(&mut self, k: &Kernel) {
        k.apply(&mut self.amps);
    }

    pub(crate) fn apply_pauli(&mut self, q: usize, p: u8) {
        kernel::apply_pauli(&mut self.amps, q, p);
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let mask = 1usize << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects qubit `q` onto `value` and renormalizes; returns the branch probability.
    pub fn project(&mut self, q: usize, value: bool) -> f64 {
        let mask = 1usize << q;
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & mask != 0) != value {
                *a = ZERO;
            } else {
                p += a.norm_sqr();
            }
        }
        if p > 0.0 {
            let s = 1.0 / p.sqrt();
            for a in &mut self.amps {
                *a *= s;
            }
        }
        p
    }

    /// Born-rule measurement of qubit `q` with collapse.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        self.check(q)?;
        let p1 = self.prob_one(q);
        let bit = rng.random::<f64>() < p1;
        self.project(q, bit);
        Ok(bit)
    }

    /// Measures `q` and flips it back to `|0>`.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        if self.measure(q, rng)? {
            kernel::apply_mcx(&mut self.amps, 0, q);
        }
        Ok(())
    }

    /// Drops qubit `q`, which must already be in the basis state `value`.
    pub(crate) fn remove_qubit(&mut self, q: usize, value: bool) {
        let mask = 1usize << q;
        let low = mask - 1;
        let mut out = vec![ZERO; self.amps.len() / 2];
        for (i, o) in out.iter_mut().enumerate() {
            let full = ((i & !low) << 1) | (i & low) | if value { mask } else { 0 };
            *o = self.amps[full];
        }
        self.amps = out;
        self.num_qubits -= 1;
    }

    /// Appends a new most-significant qubit in the basis state `value`.
    pub(crate) fn push_qubit(&mut self, value: bool) {
        let len = self.amps.len();
        let mut out = vec![ZERO; len * 2];
        let off = if value { len } else { 0 };
        out[off..off + len].copy_from_slice(&self.amps);
        self.amps = out;
        self.num_qubits += 1;
    }

    /// Executes one instruction without noise. Conditioned instructions are
    /// skipped when the classical bit disagrees.
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
            Operation::Reset => self.reset(instr.qubits[0], rng)?,
            Operation::Barrier => {}
            ref op => self.apply_gate(op, &instr.qubits)?,
        }
        Ok(())
    }
}
