//! Partitioning a monolithic circuit over QPU nodes. Every two-qubit gate
//! whose qubits sit on different nodes is reduced to CNOTs, and each
//! inter-node CNOT becomes a teleported CNOT consuming one Bell pair between
//! the nodes' communication qubits.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Instruction, NoiseTag, Operation};
use crate::error::{Error, Result};
use crate::synth;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeMap {
    /// Node id to the data qubits it holds.
    pub nodes: BTreeMap<String, Vec<usize>>,
    #[serde(default = "one")]
    pub comm_per_node: usize,
    #[serde(default = "unit")]
    pub coupling_p: f64,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

impl NodeMap {
    pub fn new<S: Into<String>>(nodes: impl IntoIterator<Item = (S, Vec<usize>)>) -> Self {
        Self {
            nodes: nodes.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            comm_per_node: 1,
            coupling_p: 1.0,
        }
    }

    /// `count` nodes named "1", "2", ... holding consecutive equal blocks of
    /// `num_qubits` qubits (the last node takes any remainder).
    pub fn contiguous(num_qubits: usize, count: usize) -> Result<Self> {
        if count == 0 || count > num_qubits {
            return Err(Error::Validation(format!("cannot split {num_qubits} qubits over {count} nodes")));
        }
        let size = num_qubits / count;
        let nodes = (0..count).map(|i| {
            let end = if i + 1 == count { num_qubits } else { (i + 1) * size };
            ((i + 1).to_string(), (i * size..end).collect())
        });
        Ok(Self::new(nodes))
    }

    pub fn with_coupling(mut self, p: f64) -> Self {
        self.coupling_p = p;
        self
    }

    /// Node index (in key order) of every qubit covered by the map.
    fn owner(&self, num_qubits: usize) -> Result<Vec<usize>> {
        if self.comm_per_node == 0 {
            return Err(Error::Validation("comm_per_node must be at least 1".into()));
        }
        if !(self.coupling_p > 0.0 && self.coupling_p <= 1.0) {
            return Err(Error::Validation(format!("coupling_p = {} is outside (0, 1]", self.coupling_p)));
        }
        let mut owner = vec![usize::MAX; num_qubits];
        for (n, qubits) in self.nodes.values().enumerate() {
            for &q in qubits {
                if q >= num_qubits {
                    return Err(Error::QubitIndex { index: q, count: num_qubits });
                }
                if owner[q] != usize::MAX {
                    return Err(Error::Validation(format!("qubit {q} is assigned to more than one node")));
                }
                owner[q] = n;
            }
        }
        Ok(owner)
    }

    fn node_names(&self) -> Vec<String> {
        self.nodes.keys().cloned().collect()
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let owner = self.owner(num_qubits)?;
        if let Some(q) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Validation(format!("qubit {q} is not assigned to any node")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GadgetRecord {
    /// Index of the originating instruction in the input circuit.
    pub source_index: usize,
    /// Index of the gadget's first instruction in the compiled circuit.
    pub compiled_index: usize,
    pub control_node: String,
    pub target_node: String,
    /// Communication qubits on the control and target side.
    pub comm_qubits: (usize, usize),
    /// Outcome bits of the control-side and target-side measurements.
    pub clbits: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributedCircuit {
    pub circuit: Circuit,
    /// Every inter-node two-qubit gate was rewritten.
    pub gate_app: bool,
    pub nonlocal_count: usize,
    pub gadgets: Vec<GadgetRecord>,
    pub coupling_p: f64,
    pub comm_per_node: usize,
}

/// Where gadget resources come from.
enum Resources<'a> {
    /// Fresh qubits and bits appended to the circuit.
    Append,
    /// Caller-declared communication qubits and classical bits.
    Supplied { comm: &'a [usize], clbits: &'a [usize] },
}

/// Local expansion of a two-qubit (or larger) gate into CNOTs and one-qubit
/// gates. Gates within one node are returned untouched.
fn expand(instr: &Instruction, index: usize, owner: &[usize]) -> Result<(Vec<Instruction>, f64)> {
    let nodes: BTreeSet<usize> = instr.qubits.iter().map(|&q| owner[q]).collect();
    if nodes.len() < 2 || instr.op == Operation::Barrier || !instr.op.is_unitary() {
        return Ok((vec![instr.clone()], 0.0));
    }
    let unsupported = || Error::UnsupportedGate { index, kind: instr.op.name().to_string() };
    if instr.condition.is_some() {
        return Err(unsupported());
    }
    let q = &instr.qubits;
    let (mut ops, phase) = match &instr.op {
        Operation::Cx => (vec![instr.clone()], 0.0),
        Operation::Cp(t) => (synth::cp_ops(*t, q[0], q[1]), 0.0),
        Operation::Cry(t) => (synth::cry_ops(*t, q[0], q[1]), 0.0),
        Operation::Mcx => {
            let (t, cs) = q.split_last().expect("mcx has a target");
            (synth::mcx_ops(cs, *t), 0.0)
        }
        Operation::ControlledUnitary(u) => {
            let s = synth::controlled_unitary(u, q[0], &q[1..])?;
            (s.ops, s.global_phase)
        }
        _ => return Err(unsupported()),
    };
    for op in &mut ops {
        if op.noise == NoiseTag::Gate {
            op.noise = instr.noise;
        }
        let span: BTreeSet<usize> = op.qubits.iter().map(|&q| owner[q]).collect();
        if span.len() > 1 && op.op != Operation::Cx {
            return Err(unsupported());
        }
    }
    Ok((ops, phase))
}

fn is_cross_cx(instr: &Instruction, owner: &[usize]) -> bool {
    instr.op == Operation::Cx && owner[instr.qubits[0]] != owner[instr.qubits[1]]
}

/// Number of inter-node CNOTs after reduction, without building gadgets.
pub fn count_nonlocal(circuit: &Circuit, nodes: &NodeMap) -> Result<usize> {
    nodes.validate(circuit.num_qubits)?;
    let owner = nodes.owner(circuit.num_qubits)?;
    let mut n = 0;
    for (i, instr) in circuit.instructions.iter().enumerate() {
        n += expand(instr, i, &owner)?.0.iter().filter(|op| is_cross_cx(op, &owner)).count();
    }
    Ok(n)
}

/// Compiles `circuit` for `nodes`, appending one communication qubit per
/// participating node and two classical bits per gadget.
pub fn create_distributed_circuit(circuit: &Circuit, nodes: &NodeMap) -> Result<DistributedCircuit> {
    compile(circuit, nodes, Resources::Append)
}

/// Compiles using caller-declared communication qubits and classical bits.
/// Communication qubits are claimed from `comm_register` in order as nodes
/// first take part in a gadget; each gadget takes the next two of `clbits`.
pub fn create_with_comm(
    circuit: &Circuit,
    comm_register: &[usize],
    clbits: &[usize],
    nodes: &NodeMap,
    p: f64,
) -> Result<DistributedCircuit> {
    let nodes = NodeMap { coupling_p: p, ..nodes.clone() };
    compile(circuit, &nodes, Resources::Supplied { comm: comm_register, clbits })
}

fn compile(circuit: &Circuit, nodes: &NodeMap, res: Resources<'_>) -> Result<DistributedCircuit> {
    if !circuit.comm_qubits.is_empty() {
        return Err(Error::AlreadyCompiled);
    }
    circuit.validate()?;
    let names = nodes.node_names();
    let mut owner = nodes.owner(circuit.num_qubits)?;
    let reserved: BTreeSet<usize> = match &res {
        Resources::Append => BTreeSet::new(),
        Resources::Supplied { comm, clbits } => {
            for &q in comm.iter() {
                if q >= circuit.num_qubits {
                    return Err(Error::QubitIndex { index: q, count: circuit.num_qubits });
                }
                if owner[q] != usize::MAX {
                    return Err(Error::Validation(format!("communication qubit {q} is also a data qubit")));
                }
            }
            for &c in clbits.iter() {
                if c >= circuit.num_clbits {
                    return Err(Error::ClbitIndex { index: c, count: circuit.num_clbits });
                }
            }
            comm.iter().copied().collect()
        }
    };
    if let Some(q) = (0..circuit.num_qubits).find(|q| owner[*q] == usize::MAX && !reserved.contains(q)) {
        return Err(Error::Validation(format!("qubit {q} is not assigned to any node")));
    }
    for instr in &circuit.instructions {
        if instr.qubits.iter().any(|q| reserved.contains(q)) {
            return Err(Error::Validation(format!("`{instr}` acts on a communication qubit")));
        }
    }

    let mut out = Circuit { instructions: Vec::with_capacity(circuit.len()), ..circuit.clone() };
    let mut comm_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut next_comm = 0usize;
    let mut next_clbit = 0usize;
    let mut gadgets = Vec::new();
    let mut cross_sources = BTreeSet::new();

    for (i, instr) in circuit.instructions.iter().enumerate() {
        let (ops, phase) = expand(instr, i, &owner)?;
        out.global_phase += phase;
        for op in ops {
            if !is_cross_cx(&op, &owner) {
                out.instructions.push(op);
                continue;
            }
            cross_sources.insert(i);
            let (qc, qt) = (op.qubits[0], op.qubits[1]);
            let (na, nb) = (owner[qc], owner[qt]);
            let mut comm_for = |node: usize, out: &mut Circuit, owner: &mut Vec<usize>| -> Result<usize> {
                if let Some(&c) = comm_of.get(&node) {
                    return Ok(c);
                }
                let c = match &res {
                    Resources::Append => {
                        out.num_qubits += 1;
                        owner.push(node);
                        out.num_qubits - 1
                    }
                    Resources::Supplied { comm, .. } => {
                        let c = *comm.get(next_comm).ok_or_else(|| {
                            Error::Capacity(format!(
                                "instruction {i} (gadget {}): communication register of {} qubits exhausted",
                                gadgets.len(),
                                comm.len()
                            ))
                        })?;
                        owner[c] = node;
                        c
                    }
                };
                next_comm += 1;
                comm_of.insert(node, c);
                out.comm_qubits.insert(c);
                Ok(c)
            };
            let ca = comm_for(na, &mut out, &mut owner)?;
            let cb = comm_for(nb, &mut out, &mut owner)?;
            let (k1, k2) = match &res {
                Resources::Append => {
                    out.num_clbits += 2;
                    (out.num_clbits - 2, out.num_clbits - 1)
                }
                Resources::Supplied { clbits, .. } => {
                    if next_clbit + 2 > clbits.len() {
                        return Err(Error::Capacity(format!(
                            "instruction {i} (gadget {}): {} classical bits supplied, gadget needs two more",
                            gadgets.len(),
                            clbits.len()
                        )));
                    }
                    (clbits[next_clbit], clbits[next_clbit + 1])
                }
            };
            next_clbit += 2;
            out.scratch_clbits.insert(k1);
            out.scratch_clbits.insert(k2);
            gadgets.push(GadgetRecord {
                source_index: i,
                compiled_index: out.len(),
                control_node: names[na].clone(),
                target_node: names[nb].clone(),
                comm_qubits: (ca, cb),
                clbits: (k1, k2),
            });
            push_gadget(&mut out, qc, qt, ca, cb, k1, k2, op.noise);
        }
    }

    if let Resources::Append = res {
        if !comm_of.is_empty() {
            out.registers.insert("comm".into(), circuit.num_qubits..out.num_qubits);
        }
    }
    let logged: BTreeSet<usize> = gadgets.iter().map(|g| g.source_index).collect();
    // Only the Bell-pair CNOT between communication qubits may span nodes.
    let spanning = out.instructions.iter().any(|ins| {
        let nodes: BTreeSet<usize> = ins.qubits.iter().map(|&q| owner[q]).collect();
        nodes.len() > 1 && !ins.qubits.iter().all(|q| out.comm_qubits.contains(q))
    });
    Ok(DistributedCircuit {
        gate_app: !spanning && logged == cross_sources,
        nonlocal_count: gadgets.len(),
        gadgets,
        circuit: out,
        coupling_p: nodes.coupling_p,
        comm_per_node: nodes.comm_per_node,
    })
}

/// Teleported CNOT from `qc` to `qt` through the Bell pair `(ca, cb)`.
#[allow(clippy::too_many_arguments)]
fn push_gadget(out: &mut Circuit, qc: usize, qt: usize, ca: usize, cb: usize, k1: usize, k2: usize, noise: NoiseTag) {
    let tagged = |op: Operation, qubits: Vec<usize>| Instruction::new(op, qubits).with_noise(noise);
    out.push(tagged(Operation::H, vec![ca]));
    out.push(tagged(Operation::Cx, vec![ca, cb]));
    out.push(tagged(Operation::Cx, vec![qc, ca]));
    out.push(tagged(Operation::Cx, vec![cb, qt]));
    out.push(tagged(Operation::H, vec![cb]));
    out.push(tagged(Operation::Measure { clbit: k1 }, vec![ca]));
    out.push(tagged(Operation::Measure { clbit: k2 }, vec![cb]));
    let comm = if noise == NoiseTag::Noiseless { NoiseTag::Noiseless } else { NoiseTag::Comm(None) };
    out.push(Instruction::new(Operation::X, vec![qt]).with_condition(k1, true).with_noise(comm));
    out.push(Instruction::new(Operation::Z, vec![qc]).with_condition(k2, true).with_noise(comm));
    out.push(tagged(Operation::Reset, vec![ca]));
    out.push(tagged(Operation::Reset, vec![cb]));
}
