//! Circuit representation: an ordered instruction list over qubit and
//! classical-bit registers, with optional classical conditions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gates::{self, Mat2, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    H,
    X,
    Y,
    Z,
    Phase(f64),
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// qubits: `[control, target]`
    Cx,
    /// qubits: `[control, target]`; symmetric in its two qubits.
    Cp(f64),
    /// qubits: `[control, target]`
    Cry(f64),
    /// qubits: `[controls.., target]`
    Mcx,
    /// Arbitrary k-qubit unitary; `qubits[0]` is the least-significant index bit.
    Unitary(Arc<Matrix>),
    /// `qubits[0]` controls the unitary applied to `qubits[1..]`.
    ControlledUnitary(Arc<Matrix>),
    Measure { clbit: usize },
    Reset,
    Barrier,
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::H => "h",
            Operation::X => "x",
            Operation::Y => "y",
            Operation::Z => "z",
            Operation::Phase(_) => "p",
            Operation::Rx(_) => "rx",
            Operation::Ry(_) => "ry",
            Operation::Rz(_) => "rz",
            Operation::Cx => "cx",
            Operation::Cp(_) => "cp",
            Operation::Cry(_) => "cry",
            Operation::Mcx => "mcx",
            Operation::Unitary(_) => "unitary",
            Operation::ControlledUnitary(_) => "cunitary",
            Operation::Measure { .. } => "measure",
            Operation::Reset => "reset",
            Operation::Barrier => "barrier",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Operation::Phase(t)
            | Operation::Rx(t)
            | Operation::Ry(t)
            | Operation::Rz(t)
            | Operation::Cp(t)
            | Operation::Cry(t) => vec![*t],
            _ => Vec::new(),
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Operation::Measure { .. } | Operation::Reset | Operation::Barrier)
    }

    /// 2x2 matrix of a single-qubit gate.
    pub fn single_qubit_matrix(&self) -> Option<Mat2> {
        Some(match self {
            Operation::H => gates::h(),
            Operation::X => gates::x(),
            Operation::Y => gates::y(),
            Operation::Z => gates::z(),
            Operation::Phase(t) => gates::phase(*t),
            Operation::Rx(t) => gates::rx(*t),
            Operation::Ry(t) => gates::ry(*t),
            Operation::Rz(t) => gates::rz(*t),
            Operation::Unitary(m) if m.nrows() == 2 => gates::matrix_to_mat2(m),
            _ => return None,
        })
    }

    /// Local matrix of a unitary operation acting on `arity` qubits, with the
    /// instruction's first qubit as the least-significant index bit.
    pub fn matrix(&self, arity: usize) -> Option<Matrix> {
        if let Some(m) = self.single_qubit_matrix() {
            return Some(gates::mat2_to_matrix(&m));
        }
        Some(match self {
            Operation::Cx => gates::controlled(&gates::mat2_to_matrix(&gates::x())),
            Operation::Cp(t) => gates::controlled(&gates::mat2_to_matrix(&gates::phase(*t))),
            Operation::Cry(t) => gates::controlled(&gates::mat2_to_matrix(&gates::ry(*t))),
            Operation::Mcx => {
                let dim = 1usize << arity;
                let mask = (1usize << (arity - 1)) - 1;
                let mut m = Matrix::zeros(dim, dim);
                for col in 0..dim {
                    let row = if col & mask == mask { col ^ (1 << (arity - 1)) } else { col };
                    m[(row, col)] = gates::ONE;
                }
                m
            }
            Operation::Unitary(m) => (**m).clone(),
            Operation::ControlledUnitary(m) => gates::controlled(m),
            _ => return None,
        })
    }

    /// Exact inverse of a unitary operation.
    pub fn inverse(&self) -> Option<Operation> {
        Some(match self {
            Operation::H => Operation::H,
            Operation::X => Operation::X,
            Operation::Y => Operation::Y,
            Operation::Z => Operation::Z,
            Operation::Phase(t) => Operation::Phase(-t),
            Operation::Rx(t) => Operation::Rx(-t),
            Operation::Ry(t) => Operation::Ry(-t),
            Operation::Rz(t) => Operation::Rz(-t),
            Operation::Cx => Operation::Cx,
            Operation::Cp(t) => Operation::Cp(-t),
            Operation::Cry(t) => Operation::Cry(-t),
            Operation::Mcx => Operation::Mcx,
            Operation::Unitary(m) => Operation::Unitary(Arc::new(m.adjoint())),
            Operation::ControlledUnitary(m) => Operation::ControlledUnitary(Arc::new(m.adjoint())),
            Operation::Barrier => Operation::Barrier,
            Operation::Measure { .. } | Operation::Reset => return None,
        })
    }
}

/// Gate executes only when the classical bit holds `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    pub clbit: usize,
    pub value: bool,
}

/// Which noise channel follows an instruction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseTag {
    /// Channel chosen by gate arity.
    #[default]
    Gate,
    /// Idle decoherence while waiting on classical communication; applied to
    /// the target whether or not the condition fires. `Some(eps)` overrides the
    /// rate from the noise parameters for this edge.
    Comm(Option<f64>),
    Noiseless,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub op: Operation,
    pub qubits: Vec<usize>,
    pub condition: Option<Condition>,
    pub noise: NoiseTag,
}

impl Instruction {
    pub fn new(op: Operation, qubits: Vec<usize>) -> Self {
        Self { op, qubits, condition: None, noise: NoiseTag::Gate }
    }

    pub fn with_condition(mut self, clbit: usize, value: bool) -> Self {
        self.condition = Some(Condition { clbit, value });
        self
    }

    pub fn with_noise(mut self, noise: NoiseTag) -> Self {
        self.noise = noise;
        self
    }

    pub fn clbit(&self) -> Option<usize> {
        match self.op {
            Operation::Measure { clbit } => Some(clbit),
            _ => None,
        }
    }

    /// Number of qubits a gate acts on jointly (barriers count as zero).
    pub fn arity(&self) -> usize {
        match self.op {
            Operation::Barrier => 0,
            _ => self.qubits.len(),
        }
    }

    pub fn is_two_qubit_gate(&self) -> bool {
        self.op.is_unitary() && self.qubits.len() == 2
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.op.name())?;
        let params = self.op.params();
        if !params.is_empty() {
            write!(f, "({})", params.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>().join(", "))?;
        }
        write!(f, " {:?}", self.qubits)?;
        if let Some(c) = self.clbit() {
            write!(f, " -> c{c}")?;
        }
        if let Some(cond) = self.condition {
            write!(f, " if c{}=={}", cond.clbit, cond.value as u8)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub instructions: Vec<Instruction>,
    /// Named qubit ranges, e.g. `"counting" -> 0..5`.
    pub registers: BTreeMap<String, Range<usize>>,
    /// Qubits reserved for inter-node entanglement.
    pub comm_qubits: BTreeSet<usize>,
    /// Classical bits used internally (gadget outcomes); excluded from histograms.
    pub scratch_clbits: BTreeSet<usize>,
    /// Global phase in radians; irrelevant to probabilities.
    pub global_phase: f64,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Self { num_qubits, num_clbits, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn push(&mut self, instr: Instruction) -> &mut Self {
        self.instructions.push(instr);
        self
    }

    pub fn gate(&mut self, op: Operation, qubits: &[usize]) -> &mut Self {
        self.push(Instruction::new(op, qubits.to_vec()))
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.gate(Operation::H, &[q])
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.gate(Operation::X, &[q])
    }

    pub fn y(&mut self, q: usize) -> &mut Self {
        self.gate(Operation::Y, &[q])
    }

    pub fn z(&mut self, q: usize) -> &mut Self {
        self.gate(Operation::Z, &[q])
    }

    pub fn p(&mut self, theta: f64, q: usize) -> &mut Self {
        self.gate(Operation::Phase(theta), &[q])
    }

    pub fn rx(&mut self, theta: f64, q: usize) -> &mut Self {
        self.gate(Operation::Rx(theta), &[q])
    }

    pub fn ry(&mut self, theta: f64, q: usize) -> &mut Self {
        self.gate(Operation::Ry(theta), &[q])
    }

    pub fn rz(&mut self, theta: f64, q: usize) -> &mut Self {
        self.gate(Operation::Rz(theta), &[q])
    }

    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.gate(Operation::Cx, &[control, target])
    }

    pub fn cp(&mut self, theta: f64, a: usize, b: usize) -> &mut Self {
        self.gate(Operation::Cp(theta), &[a, b])
    }

    pub fn cry(&mut self, theta: f64, control: usize, target: usize) -> &mut Self {
        self.gate(Operation::Cry(theta), &[control, target])
    }

    pub fn mcx(&mut self, controls: &[usize], target: usize) -> &mut Self {
        let mut qubits = controls.to_vec();
        qubits.push(target);
        self.gate(Operation::Mcx, &qubits)
    }

    pub fn unitary(&mut self, matrix: Matrix, qubits: &[usize]) -> Result<&mut Self> {
        gates::check_unitary(&matrix)?;
        Ok(self.gate(Operation::Unitary(Arc::new(matrix)), qubits))
    }

    pub fn controlled_unitary(&mut self, matrix: Matrix, control: usize, targets: &[usize]) -> Result<&mut Self> {
        gates::check_unitary(&matrix)?;
        let mut qubits = vec![control];
        qubits.extend_from_slice(targets);
        Ok(self.gate(Operation::ControlledUnitary(Arc::new(matrix)), &qubits))
    }

    pub fn measure(&mut self, q: usize, clbit: usize) -> &mut Self {
        self.gate(Operation::Measure { clbit }, &[q])
    }

    /// Measures qubit `i` into clbit `i` for every qubit.
    pub fn measure_all(&mut self) -> &mut Self {
        self.num_clbits = self.num_clbits.max(self.num_qubits);
        for q in 0..self.num_qubits {
            self.measure(q, q);
        }
        self
    }

    pub fn reset(&mut self, q: usize) -> &mut Self {
        self.gate(Operation::Reset, &[q])
    }

    pub fn barrier(&mut self, qubits: &[usize]) -> &mut Self {
        self.gate(Operation::Barrier, qubits)
    }

    /// Appends `other`, mapping its qubit `i` onto `qubit_map[i]`.
    pub fn compose(&mut self, other: &Circuit, qubit_map: &[usize]) -> Result<&mut Self> {
        if qubit_map.len() < other.num_qubits {
            return Err(Error::Validation(format!(
                "qubit map has {} entries for a {}-qubit circuit",
                qubit_map.len(),
                other.num_qubits
            )));
        }
        for instr in &other.instructions {
            if instr.clbit().is_some() || instr.condition.is_some() {
                return Err(Error::Contract("compose only accepts measurement-free, unconditioned circuits".into()));
            }
            let mut mapped = instr.clone();
            mapped.qubits = instr.qubits.iter().map(|&q| qubit_map[q]).collect();
            self.instructions.push(mapped);
        }
        self.global_phase += other.global_phase;
        Ok(self)
    }

    /// Exact inverse of a measurement-free circuit.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut inv = Circuit { instructions: Vec::with_capacity(self.len()), ..self.clone() };
        for instr in self.instructions.iter().rev() {
            let op = instr.op.inverse().ok_or_else(|| {
                Error::Contract(format!("cannot invert non-unitary instruction `{instr}`"))
            })?;
            if instr.condition.is_some() {
                return Err(Error::Contract("cannot invert a classically conditioned instruction".into()));
            }
            inv.instructions.push(Instruction { op, ..instr.clone() });
        }
        inv.global_phase = -self.global_phase;
        Ok(inv)
    }

    pub fn has_measurement(&self) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i.op, Operation::Measure { .. } | Operation::Reset) || i.condition.is_some())
    }

    pub fn count_ops(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        for i in &self.instructions {
            *counts.entry(i.op.name()).or_insert(0) += 1;
        }
        counts
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_two_qubit_gate()).count()
    }

    /// Classical bits reported in histograms, in ascending order.
    pub fn output_clbits(&self) -> Vec<usize> {
        (0..self.num_clbits).filter(|c| !self.scratch_clbits.contains(c)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let check_q = |q: usize| {
            if q >= self.num_qubits {
                Err(Error::QubitIndex { index: q, count: self.num_qubits })
            } else {
                Ok(())
            }
        };
        let check_c = |c: usize| {
            if c >= self.num_clbits {
                Err(Error::ClbitIndex { index: c, count: self.num_clbits })
            } else {
                Ok(())
            }
        };
        for (idx, instr) in self.instructions.iter().enumerate() {
            for &q in &instr.qubits {
                check_q(q)?;
            }
            let mut seen = BTreeSet::new();
            if instr.op != Operation::Barrier && !instr.qubits.iter().all(|q| seen.insert(*q)) {
                return Err(Error::Validation(format!("instruction {idx} repeats a qubit: {instr}")));
            }
            if let Some(c) = instr.clbit() {
                check_c(c)?;
            }
            if let Some(cond) = instr.condition {
                check_c(cond.clbit)?;
            }
            let expected = match &instr.op {
                Operation::H
                | Operation::X
                | Operation::Y
                | Operation::Z
                | Operation::Phase(_)
                | Operation::Rx(_)
                | Operation::Ry(_)
                | Operation::Rz(_)
                | Operation::Measure { .. }
                | Operation::Reset => Some(1),
                Operation::Cx | Operation::Cp(_) | Operation::Cry(_) => Some(2),
                Operation::Unitary(m) => {
                    gates::check_unitary(m)?;
                    Some(m.nrows().trailing_zeros() as usize)
                }
                Operation::ControlledUnitary(m) => {
                    gates::check_unitary(m)?;
                    Some(m.nrows().trailing_zeros() as usize + 1)
                }
                Operation::Mcx => {
                    if instr.qubits.len() < 2 {
                        return Err(Error::Validation(format!("instruction {idx}: mcx needs a control")));
                    }
                    None
                }
                Operation::Barrier => None,
            };
            if let Operation::Unitary(m) | Operation::ControlledUnitary(m) = &instr.op {
                if !m.nrows().is_power_of_two() || m.nrows() < 2 || m.nrows() > 16 {
                    return Err(Error::Validation(format!(
                        "instruction {idx}: unitary blocks must act on 1 to 4 qubits"
                    )));
                }
            }
            if let Some(n) = expected {
                if instr.qubits.len() != n {
                    return Err(Error::Validation(format!(
                        "instruction {idx}: `{}` expects {n} qubits, got {}",
                        instr.op.name(),
                        instr.qubits.len()
                    )));
                }
            }
        }
        for &c in &self.scratch_clbits {
            check_c(c)?;
        }
        for &q in &self.comm_qubits {
            check_q(q)?;
        }
        Ok(())
    }
}
