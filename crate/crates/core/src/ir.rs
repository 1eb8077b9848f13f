//! JSON interchange format for circuits.
//!
//! ```json
//! {"qubits": 3, "clbits": 3,
//!  "ops": [{"kind": "h", "qubits": [0]},
//!          {"kind": "cx", "qubits": [0, 2]},
//!          {"kind": "measure", "qubits": [2], "clbit": 2},
//!          {"kind": "x", "qubits": [1], "cond": {"clbit": 2, "value": 1}}]}
//! ```
//!
//! Unitary blocks carry `"matrix"` as rows of `[re, im]` pairs. Compiled
//! circuits add `"comm_qubits"`, `"scratch_clbits"` and `"gadgets"`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Condition, Instruction, NoiseTag, Operation};
use crate::dqc::GadgetRecord;
use crate::error::{Error, Result};
use crate::gates::{Matrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub qubits: usize,
    pub clbits: usize,
    pub ops: Vec<OpRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub registers: BTreeMap<String, [usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comm_qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scratch_clbits: Vec<usize>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub global_phase: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gadgets: Vec<GadgetRecord>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondRecord {
    pub clbit: usize,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpRecord {
    pub kind: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clbit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<CondRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    /// "gate" (default), "comm" or "noiseless".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    /// Depolarization override for "comm" instructions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comm_eps: Option<f64>,
}

fn matrix_record(m: &Matrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

fn matrix_from_record(rows: &[Vec<[f64; 2]>], at: &str) -> Result<Matrix> {
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse(format!("{at}: matrix must be square and nonempty")));
    }
    Ok(Matrix::from_fn(dim, dim, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

impl OpRecord {
    pub fn from_instruction(instr: &Instruction) -> Self {
        let matrix = match &instr.op {
            Operation::Unitary(m) | Operation::ControlledUnitary(m) => Some(matrix_record(m)),
            _ => None,
        };
        let (noise, comm_eps) = match instr.noise {
            NoiseTag::Gate => (None, None),
            NoiseTag::Comm(eps) => (Some("comm".to_string()), eps),
            NoiseTag::Noiseless => (Some("noiseless".to_string()), None),
        };
        Self {
            kind: instr.op.name().to_string(),
            qubits: instr.qubits.clone(),
            params: instr.op.params(),
            clbit: instr.clbit(),
            cond: instr.condition.map(|c| CondRecord { clbit: c.clbit, value: c.value as u8 }),
            matrix,
            noise,
            comm_eps,
        }
    }

    pub fn to_instruction(&self, index: usize) -> Result<Instruction> {
        let at = format!("ops[{index}]");
        let err = |msg: String| Error::Parse(format!("{at}: {msg}"));
        let angle = || match self.params.as_slice() {
            [t] => Ok(*t),
            p => Err(err(format!("`{}` takes one angle, got {}", self.kind, p.len()))),
        };
        let matrix = || {
            let rows = self.matrix.as_ref().ok_or_else(|| err(format!("`{}` needs a \"matrix\"", self.kind)))?;
            Ok::<_, Error>(Arc::new(matrix_from_record(rows, &at)?))
        };
        let op = match self.kind.to_ascii_lowercase().as_str() {
            "h" => Operation::H,
            "x" => Operation::X,
            "y" => Operation::Y,
            "z" => Operation::Z,
            "p" | "phase" => Operation::Phase(angle()?),
            "rx" => Operation::Rx(angle()?),
            "ry" => Operation::Ry(angle()?),
            "rz" => Operation::Rz(angle()?),
            "cx" | "cnot" => Operation::Cx,
            "cp" => Operation::Cp(angle()?),
            "cry" => Operation::Cry(angle()?),
            "mcx" => Operation::Mcx,
            "unitary" => Operation::Unitary(matrix()?),
            "cunitary" => Operation::ControlledUnitary(matrix()?),
            "measure" => {
                Operation::Measure { clbit: self.clbit.ok_or_else(|| err("measure needs a \"clbit\"".into()))? }
            }
            "reset" => Operation::Reset,
            "barrier" => Operation::Barrier,
            other => return Err(err(format!("unknown kind `{other}`"))),
        };
        if !matches!(op, Operation::Measure { .. }) && self.clbit.is_some() {
            return Err(err(format!("`{}` does not write a classical bit", self.kind)));
        }
        let expects_params = !op.params().is_empty();
        if !expects_params && !self.params.is_empty() {
            return Err(err(format!("`{}` takes no parameters", self.kind)));
        }
        let mut instr = Instruction::new(op, self.qubits.clone());
        if let Some(c) = self.cond {
            if c.value > 1 {
                return Err(err(format!("condition value {} is not 0 or 1", c.value)));
            }
            instr.condition = Some(Condition { clbit: c.clbit, value: c.value == 1 });
        }
        instr.noise = match (self.noise.as_deref(), self.comm_eps) {
            (None | Some("gate"), None) => NoiseTag::Gate,
            (Some("comm"), eps) => NoiseTag::Comm(eps),
            (Some("noiseless"), None) => NoiseTag::Noiseless,
            (Some(other), None) => return Err(err(format!("unknown noise tag `{other}`"))),
            (_, Some(_)) => return Err(err("\"comm_eps\" requires \"noise\": \"comm\"".into())),
        };
        Ok(instr)
    }
}

impl CircuitFile {
    pub fn from_circuit(circuit: &Circuit, gadgets: &[GadgetRecord]) -> Self {
        Self {
            qubits: circuit.num_qubits,
            clbits: circuit.num_clbits,
            ops: circuit.instructions.iter().map(OpRecord::from_instruction).collect(),
            registers: circuit.registers.iter().map(|(k, r)| (k.clone(), [r.start, r.end])).collect(),
            comm_qubits: circuit.comm_qubits.iter().copied().collect(),
            scratch_clbits: circuit.scratch_clbits.iter().copied().collect(),
            global_phase: circuit.global_phase,
            gadgets: gadgets.to_vec(),
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.qubits, self.clbits);
        for (i, op) in self.ops.iter().enumerate() {
            c.push(op.to_instruction(i)?);
        }
        c.registers = self.registers.iter().map(|(k, [a, b])| (k.clone(), *a..*b)).collect();
        c.comm_qubits = self.comm_qubits.iter().copied().collect();
        c.scratch_clbits = self.scratch_clbits.iter().copied().collect();
        c.global_phase = self.global_phase;
        c.validate()?;
        Ok(c)
    }
}

pub fn parse_circuit(json: &str) -> Result<Circuit> {
    serde_json::from_str::<CircuitFile>(json)?.to_circuit()
}

pub fn circuit_to_json(circuit: &Circuit, gadgets: &[GadgetRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CircuitFile::from_circuit(circuit, gadgets))?)
}

pub fn load_circuit(path: impl AsRef<Path>) -> Result<Circuit> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_circuit(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqc::{create_distributed_circuit, NodeMap};

    const SNIPPET: &str = r#"{"qubits": 3, "clbits": 3, "ops": [
        {"kind": "h", "qubits": [0]},
        {"kind": "h", "qubits": [1]},
        {"kind": "cx", "qubits": [0, 2]},
        {"kind": "measure", "qubits": [2], "clbit": 2},
        {"kind": "rx", "qubits": [1], "params": [0.5], "cond": {"clbit": 2, "value": 1}}
    ]}"#;

    #[test]
    fn round_trip() {
        let c = parse_circuit(SNIPPET).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.instructions[4].condition, Some(Condition { clbit: 2, value: true }));
        let nodes = NodeMap::new([("1", vec![0, 1]), ("2", vec![2])]);
        let d = create_distributed_circuit(&c, &nodes).unwrap();
        let text = circuit_to_json(&d.circuit, &d.gadgets).unwrap();
        assert_eq!(parse_circuit(&text).unwrap(), d.circuit);
        let file: CircuitFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file.gadgets, d.gadgets);
    }

    #[test]
    fn diagnostics() {
        let e = parse_circuit("{\"qubits\": 1,\n \"clbits\": 0, \"ops\": [}").unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("line 2")), "{e}");
        let e = parse_circuit(r#"{"qubits": 1, "clbits": 0, "ops": [{"kind": "foo", "qubits": [0]}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("ops[0]") && m.contains("foo")), "{e}");
        let e = parse_circuit(r#"{"qubits": 1, "clbits": 0, "ops": [], "extra": 1}"#).unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("extra")), "{e}");
        let e = parse_circuit(r#"{"qubits": 1, "clbits": 0, "ops": [{"kind": "rx", "qubits": [0]}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("one angle")), "{e}");
        let e = parse_circuit(r#"{"qubits": 1, "clbits": 0, "ops": [{"kind": "x", "qubits": [3]}]}"#).unwrap_err();
        assert!(matches!(e, Error::QubitIndex { index: 3, count: 1 }), "{e}");
    }

    #[test]
    fn unitary_block() {
        let mut c = Circuit::new(2, 0);
        c.unitary(crate::algorithms::qpe::example_unitary(), &[0, 1]).unwrap();
        let back = parse_circuit(&circuit_to_json(&c, &[]).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
