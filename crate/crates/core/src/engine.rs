//! Circuit execution.
//!
//! Both backends keep only the qubits that matter at each point of the
//! program: a qubit is activated at its first use (or at a reset) and dropped
//! right after its last use (or before a reset). The exact backend tracks one
//! density matrix per distinct live classical record, so mid-circuit
//! measurements and classically conditioned gates are handled without
//! sampling; records are merged as soon as the bits that distinguish them are
//! no longer read.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::ClassicalBits;
use crate::circuit::{Circuit, Instruction, NoiseTag, Operation};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::histogram::{Distribution, Histogram};
use crate::kernel::Kernel;
use crate::noise::{self, NoiseParams};
use crate::state::StateVector;

/// Branches lighter than this are discarded.
const BRANCH_CUTOFF: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Density matrix when the peak active width fits, trajectories otherwise.
    #[default]
    Auto,
    Density,
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub backend: Backend,
    /// Largest number of simultaneously active qubits for the density backend.
    pub density_cap: usize,
    /// Largest number of simultaneously active qubits for trajectories.
    pub trajectory_cap: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { backend: Backend::Auto, density_cap: 10, trajectory_cap: 24 }
    }
}

/// Per-shot generator: one ChaCha stream per shot index under the master seed.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Static schedule shared by both backends.
#[derive(Debug, Clone)]
struct Plan {
    /// Qubits dropped after instruction `i` (other than a measured qubit, see
    /// `retire_measured`).
    retire_after: Vec<Vec<usize>>,
    /// The measured qubit of instruction `i` is dropped right after it.
    retire_measured: Vec<bool>,
    /// Classical bits still needed after instruction `i`.
    live_after: Vec<ClassicalBits>,
    /// Whether records should be re-masked and merged after instruction `i`.
    merge_after: Vec<bool>,
    output: Vec<usize>,
    peak_active: usize,
}

fn is_parking_reset(instr: &Instruction) -> bool {
    instr.op == Operation::Reset && instr.condition.is_none()
}

impl Plan {
    fn new(circuit: &Circuit, keep: &[usize]) -> Plan {
        let len = circuit.len();
        let mut touches: Vec<Vec<usize>> = vec![Vec::new(); circuit.num_qubits];
        for (i, instr) in circuit.instructions.iter().enumerate() {
            if instr.op == Operation::Barrier {
                continue;
            }
            for &q in &instr.qubits {
                touches[q].push(i);
            }
        }
        let mut retire_after = vec![Vec::new(); len];
        let mut retire_measured = vec![false; len];
        for (q, t) in touches.iter().enumerate() {
            for (k, &i) in t.iter().enumerate() {
                if is_parking_reset(&circuit.instructions[i]) {
                    continue;
                }
                let next = t.get(k + 1).map(|&j| &circuit.instructions[j]);
                let drop = match next {
                    None => !keep.contains(&q),
                    Some(n) => is_parking_reset(n),
                };
                if !drop {
                    continue;
                }
                if matches!(circuit.instructions[i].op, Operation::Measure { .. }) {
                    retire_measured[i] = true;
                } else {
                    retire_after[i].push(q);
                }
            }
        }

        let output = circuit.output_clbits();
        let mut live = ClassicalBits::new(circuit.num_clbits);
        for &c in &output {
            live.set(c, true);
        }
        let mut live_after = vec![ClassicalBits::default(); len];
        let mut merge_after = vec![false; len];
        for (i, instr) in circuit.instructions.iter().enumerate().rev() {
            live_after[i] = live.clone();
            let before = live.clone();
            if let (Some(c), None) = (instr.clbit(), instr.condition) {
                live.set(c, false);
            }
            if let Some(cond) = instr.condition {
                live.set(cond.clbit, true);
            }
            merge_after[i] = instr.clbit().is_some() || live != before;
        }

        // Replay the parking schedule to find the peak width.
        let mut active = vec![false; circuit.num_qubits];
        let (mut count, mut peak) = (0usize, 0usize);
        for (i, instr) in circuit.instructions.iter().enumerate() {
            // A reset qubit is a product state; it rejoins the register at
            // its next use.
            if is_parking_reset(instr) {
                if active[instr.qubits[0]] {
                    active[instr.qubits[0]] = false;
                    count -= 1;
                }
                continue;
            }
            for &q in instr.qubits.iter().filter(|_| instr.op != Operation::Barrier) {
                if !active[q] {
                    active[q] = true;
                    count += 1;
                }
            }
            peak = peak.max(count);
            let measured = if retire_measured[i] { Some(instr.qubits[0]) } else { None };
            for &q in retire_after[i].iter().chain(measured.iter()) {
                active[q] = false;
                count -= 1;
            }
        }
        peak = peak.max(keep.iter().filter(|&&q| !active[q]).count() + count);
        Plan { retire_after, retire_measured, live_after, merge_after, output, peak_active: peak }
    }
}

/// Maps circuit qubits onto backend positions.
#[derive(Debug, Clone)]
struct Layout {
    pos: Vec<Option<usize>>,
    order: Vec<usize>,
}

impl Layout {
    fn new(num_qubits: usize) -> Self {
        Self { pos: vec![None; num_qubits], order: Vec::new() }
    }

    fn push(&mut self, q: usize) {
        self.pos[q] = Some(self.order.len());
        self.order.push(q);
    }

    fn remove(&mut self, q: usize) -> usize {
        let p = self.pos[q].take().expect("qubit is active");
        self.order.remove(p);
        for (i, &r) in self.order.iter().enumerate().skip(p) {
            self.pos[r] = Some(i);
        }
        p
    }

    fn positions(&self, qubits: &[usize]) -> Vec<usize> {
        qubits.iter().map(|&q| self.pos[q].expect("qubit is active")).collect()
    }
}

/// Depolarizing events attached to an instruction: `(qubits, probability)`.
fn noise_events(instr: &Instruction, noise: &NoiseParams) -> Vec<(Vec<usize>, f64)> {
    if !instr.op.is_unitary() || instr.op == Operation::Barrier {
        return Vec::new();
    }
    match instr.noise {
        NoiseTag::Noiseless => Vec::new(),
        NoiseTag::Comm(eps) => {
            let e = eps.unwrap_or_else(|| noise.comm_error());
            instr.qubits.iter().map(|&q| (vec![q], e)).collect()
        }
        NoiseTag::Gate => match instr.qubits.len() {
            1 => vec![(instr.qubits.clone(), noise.eps_d)],
            2 => vec![(instr.qubits.clone(), noise.eps_g)],
            _ => instr.qubits.windows(2).map(|w| (w.to_vec(), noise.eps_g)).collect(),
        },
    }
}

fn readout_error(instr: &Instruction, noise: &NoiseParams) -> f64 {
    if instr.noise == NoiseTag::Noiseless {
        0.0
    } else {
        noise.eps_m
    }
}

fn reset_error(instr: &Instruction, noise: &NoiseParams) -> f64 {
    if instr.noise == NoiseTag::Noiseless {
        0.0
    } else {
        noise.reset_error()
    }
}

fn record_key(rec: &ClassicalBits, output: &[usize]) -> String {
    output.iter().map(|&c| if rec.get(c) { '1' } else { '0' }).collect()
}

struct Branch {
    rec: ClassicalBits,
    rho: DensityMatrix,
}

/// Exact execution: a weighted set of (classical record, unnormalized state).
struct ExactRun<'a> {
    circuit: &'a Circuit,
    noise: NoiseParams,
    plan: Plan,
    layout: Layout,
    branches: Vec<Branch>,
    /// Excited-state population of reset qubits awaiting their next use.
    pending: Vec<Option<f64>>,
}

impl<'a> ExactRun<'a> {
    fn new(circuit: &'a Circuit, noise: NoiseParams, keep: &[usize]) -> Self {
        let plan = Plan::new(circuit, keep);
        let branches =
            vec![Branch { rec: ClassicalBits::new(circuit.num_clbits), rho: DensityMatrix::new(0) }];
        let n = circuit.num_qubits;
        Self { circuit, noise, plan, layout: Layout::new(n), branches, pending: vec![None; n] }
    }

    fn activate(&mut self, q: usize, p1: f64) {
        for b in &mut self.branches {
            b.rho.push_qubit(p1);
        }
        self.layout.push(q);
    }

    fn retire(&mut self, q: usize) {
        let p = self.layout.remove(q);
        for b in &mut self.branches {
            b.rho = b.rho.trace_out(p);
        }
    }

    fn execute(mut self) -> Result<Self> {
        for i in 0..self.circuit.len() {
            self.step(i)?;
        }
        Ok(self)
    }

    fn step(&mut self, i: usize) -> Result<()> {
        let circuit = self.circuit;
        let instr = &circuit.instructions[i];
        if instr.op == Operation::Barrier {
            return Ok(());
        }
        if is_parking_reset(instr) {
            let q = instr.qubits[0];
            if self.layout.pos[q].is_some() {
                self.retire(q);
            }
            self.pending[q] = Some(reset_error(instr, &self.noise));
            return Ok(());
        }
        for &q in &instr.qubits {
            if self.layout.pos[q].is_none() {
                let p1 = self.pending[q].take().unwrap_or(0.0);
                self.activate(q, p1);
            }
        }
        let fires = |rec: &ClassicalBits| instr.condition.is_none_or(|c| rec.get(c.clbit) == c.value);
        match instr.op {
            Operation::Measure { clbit } => self.measure(instr, clbit, self.plan.retire_measured[i]),
            Operation::Reset => {
                if instr.condition.is_some() {
                    let p = self.layout.pos[instr.qubits[0]].expect("active");
                    let e = reset_error(instr, &self.noise);
                    for b in self.branches.iter_mut().filter(|b| fires(&b.rec)) {
                        b.rho.reset_in_place(p, e);
                    }
                }
            }
            ref op => {
                let pos = self.layout.positions(&instr.qubits);
                let kernel = Kernel::from_op(op, &pos)
                    .ok_or_else(|| Error::Contract(format!("`{}` is not executable", op.name())))?;
                let events = noise_events(instr, &self.noise);
                let comm = matches!(instr.noise, NoiseTag::Comm(_));
                for b in &mut self.branches {
                    let on = fires(&b.rec);
                    if on {
                        b.rho.apply_kernel(&kernel);
                    }
                    if on || comm {
                        for (qs, eps) in &events {
                            if *eps > 0.0 {
                                b.rho.depolarize(&self.layout.positions(qs), *eps)?;
                            }
                        }
                    }
                }
            }
        }
        for q in self.plan.retire_after[i].clone() {
            self.retire(q);
        }
        if self.plan.merge_after[i] {
            self.merge(i);
        }
        Ok(())
    }

    fn measure(&mut self, instr: &Instruction, clbit: usize, retire: bool) {
        let q = instr.qubits[0];
        let p = self.layout.pos[q].expect("active");
        let e = readout_error(instr, &self.noise);
        let mut out = Vec::with_capacity(self.branches.len() * 2);
        for b in self.branches.drain(..) {
            if instr.condition.is_some_and(|c| b.rec.get(c.clbit) != c.value) {
                let rho = if retire { b.rho.trace_out(p) } else { b.rho };
                out.push(Branch { rec: b.rec, rho });
                continue;
            }
            let (mut r0, mut r1) = if retire {
                (b.rho.projected_block(p, false), b.rho.projected_block(p, true))
            } else {
                let mut r0 = b.rho.clone();
                r0.project(p, false);
                let mut r1 = b.rho;
                r1.project(p, true);
                (r0, r1)
            };
            if e > 0.0 {
                let (mut m0, mut m1) = (r0.clone(), r1.clone());
                m0.scale(1.0 - e);
                m0.add_assign(&{
                    let mut t = r1.clone();
                    t.scale(e);
                    t
                });
                m1.scale(1.0 - e);
                r0.scale(e);
                m1.add_assign(&r0);
                r0 = m0;
                r1 = m1;
            }
            for (bit, rho) in [(false, r0), (true, r1)] {
                if rho.trace() > BRANCH_CUTOFF {
                    let mut rec = b.rec.clone();
                    rec.set(clbit, bit);
                    out.push(Branch { rec, rho });
                }
            }
        }
        self.branches = out;
        if retire {
            self.layout.remove(q);
        }
    }

    fn merge(&mut self, i: usize) {
        let mask = &self.plan.live_after[i];
        let mut merged: BTreeMap<ClassicalBits, DensityMatrix> = BTreeMap::new();
        for mut b in self.branches.drain(..) {
            b.rec.retain(mask);
            match merged.get_mut(&b.rec) {
                Some(rho) => rho.add_assign(&b.rho),
                None => {
                    merged.insert(b.rec, b.rho);
                }
            }
        }
        self.branches = merged.into_iter().map(|(rec, rho)| Branch { rec, rho }).collect();
    }

    fn distribution(&self) -> Distribution {
        let mut dist = Distribution::new();
        for b in &self.branches {
            *dist.entry(record_key(&b.rec, &self.plan.output)).or_insert(0.0) += b.rho.trace();
        }
        dist
    }
}

/// Per-shot execution on a statevector.
struct Trajectory<'a> {
    circuit: &'a Circuit,
    noise: &'a NoiseParams,
    plan: &'a Plan,
    layout: Layout,
    state: StateVector,
    rec: ClassicalBits,
    pending: Vec<Option<bool>>,
}

impl<'a> Trajectory<'a> {
    fn new(circuit: &'a Circuit, noise: &'a NoiseParams, plan: &'a Plan) -> Self {
        Self {
            circuit,
            noise,
            plan,
            layout: Layout::new(circuit.num_qubits),
            state: StateVector::new(0),
            rec: ClassicalBits::new(circuit.num_clbits),
            pending: vec![None; circuit.num_qubits],
        }
    }

    fn drop_qubit<R: Rng>(&mut self, q: usize, rng: &mut R) -> bool {
        let p = self.layout.remove(q);
        let bit = rng.random::<f64>() < self.state.prob_one(p);
        self.state.project(p, bit);
        self.state.remove_qubit(p, bit);
        bit
    }

    fn shot<R: Rng>(mut self, rng: &mut R) -> Result<ClassicalBits> {
        for i in 0..self.circuit.len() {
            let instr = &self.circuit.instructions[i];
            if instr.op == Operation::Barrier {
                continue;
            }
            if is_parking_reset(instr) {
                let q = instr.qubits[0];
                if self.layout.pos[q].is_some() {
                    self.drop_qubit(q, rng);
                }
                self.pending[q] = Some(noise::flip_measurement(false, reset_error(instr, self.noise), rng));
                continue;
            }
            for &q in &instr.qubits {
                if self.layout.pos[q].is_none() {
                    self.state.push_qubit(self.pending[q].take().unwrap_or(false));
                    self.layout.push(q);
                }
            }
            let fires = instr.condition.is_none_or(|c| self.rec.get(c.clbit) == c.value);
            match instr.op {
                Operation::Measure { clbit } => {
                    let q = instr.qubits[0];
                    if self.plan.retire_measured[i] {
                        let bit = self.drop_qubit(q, rng);
                        if fires {
                            self.rec.set(clbit, noise::flip_measurement(bit, readout_error(instr, self.noise), rng));
                        }
                    } else if fires {
                        let p = self.layout.pos[q].expect("active");
                        let bit = self.state.measure(p, rng)?;
                        self.rec.set(clbit, noise::flip_measurement(bit, readout_error(instr, self.noise), rng));
                    }
                }
                Operation::Reset => {
                    if fires && instr.condition.is_some() {
                        let p = self.layout.pos[instr.qubits[0]].expect("active");
                        let bit = self.state.measure(p, rng)?;
                        let target = noise::flip_measurement(false, reset_error(instr, self.noise), rng);
                        if bit != target {
                            self.state.apply_pauli(p, 1);
                        }
                    }
                }
                ref op => {
                    if fires {
                        let pos = self.layout.positions(&instr.qubits);
                        let kernel = Kernel::from_op(op, &pos)
                            .ok_or_else(|| Error::Contract(format!("`{}` is not executable", op.name())))?;
                        self.state.apply_kernel(&kernel);
                    }
                    if fires || matches!(instr.noise, NoiseTag::Comm(_)) {
                        for (qs, eps) in noise_events(instr, self.noise) {
                            if let Some(paulis) = noise::sample_pauli_error(qs.len(), eps, rng) {
                                for (q, p) in qs.iter().zip(paulis) {
                                    let pos = self.layout.pos[*q].expect("active");
                                    self.state.apply_pauli(pos, p);
                                }
                            }
                        }
                    }
                }
            }
            for &q in &self.plan.retire_after[i] {
                self.drop_qubit(q, rng);
            }
        }
        Ok(self.rec)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Simulator {
    pub config: SimConfig,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Self {
        Self { config }
    }

    /// Peak number of simultaneously active qubits when executing `circuit`.
    pub fn peak_width(circuit: &Circuit) -> usize {
        Plan::new(circuit, &[]).peak_active
    }

    fn choose(&self, circuit: &Circuit) -> Result<Backend> {
        let width = Self::peak_width(circuit);
        let cap_err = |cap: usize, name: &str| {
            Error::Capacity(format!("{width} simultaneously active qubits exceed the {name} limit of {cap}"))
        };
        match self.config.backend {
            Backend::Density if width > self.config.density_cap => Err(cap_err(self.config.density_cap, "density")),
            Backend::Trajectory if width > self.config.trajectory_cap => {
                Err(cap_err(self.config.trajectory_cap, "trajectory"))
            }
            Backend::Auto if width <= self.config.density_cap => Ok(Backend::Density),
            Backend::Auto if width <= self.config.trajectory_cap => Ok(Backend::Trajectory),
            Backend::Auto => Err(cap_err(self.config.trajectory_cap, "trajectory")),
            b => Ok(b),
        }
    }

    /// Samples `shots` outcomes. The density backend computes the exact
    /// outcome distribution once and draws from it; the trajectory backend
    /// runs every shot on its own generator stream.
    pub fn run(&self, circuit: &Circuit, shots: u64, noise: Option<&NoiseParams>, seed: u64) -> Result<Histogram> {
        if shots == 0 {
            return Err(Error::Validation("shots must be at least 1".into()));
        }
        circuit.validate()?;
        let noise = noise.copied().unwrap_or_default();
        noise.validate()?;
        match self.choose(circuit)? {
            Backend::Trajectory => self.run_trajectories(circuit, shots, &noise, seed),
            _ => {
                let dist = self.exact_distribution(circuit, Some(&noise))?;
                Ok(Histogram::sample(&dist, shots, &mut ChaCha8Rng::seed_from_u64(seed)))
            }
        }
    }

    pub fn run_trajectories(
        &self,
        circuit: &Circuit,
        shots: u64,
        noise: &NoiseParams,
        seed: u64,
    ) -> Result<Histogram> {
        circuit.validate()?;
        noise.validate()?;
        let plan = Plan::new(circuit, &[]);
        if plan.peak_active > self.config.trajectory_cap {
            return Err(Error::Capacity(format!(
                "{} simultaneously active qubits exceed the trajectory limit of {}",
                plan.peak_active, self.config.trajectory_cap
            )));
        }
        let outcomes: Vec<String> = (0..shots)
            .into_par_iter()
            .map(|shot| {
                let rec = Trajectory::new(circuit, noise, &plan).shot(&mut shot_rng(seed, shot))?;
                Ok(record_key(&rec, &plan.output))
            })
            .collect::<Result<_>>()?;
        let mut hist = Histogram::new();
        for o in outcomes {
            hist.record(o);
        }
        Ok(hist)
    }

    /// Outcome string of a single trajectory shot.
    pub fn trajectory_shot(&self, circuit: &Circuit, noise: &NoiseParams, seed: u64, shot: u64) -> Result<String> {
        circuit.validate()?;
        let plan = Plan::new(circuit, &[]);
        let rec = Trajectory::new(circuit, noise, &plan).shot(&mut shot_rng(seed, shot))?;
        Ok(record_key(&rec, &plan.output))
    }

    /// Exact outcome distribution over the output classical bits.
    pub fn exact_distribution(&self, circuit: &Circuit, noise: Option<&NoiseParams>) -> Result<Distribution> {
        circuit.validate()?;
        let noise = noise.copied().unwrap_or_default();
        noise.validate()?;
        let plan = Plan::new(circuit, &[]);
        if plan.peak_active > self.config.density_cap {
            return Err(Error::Capacity(format!(
                "{} simultaneously active qubits exceed the density limit of {}",
                plan.peak_active, self.config.density_cap
            )));
        }
        Ok(ExactRun::new(circuit, noise, &[]).execute()?.distribution())
    }

    /// Final state of `keep` (in that order), averaged over all measurement
    /// records.
    pub fn final_state(&self, circuit: &Circuit, noise: Option<&NoiseParams>, keep: &[usize]) -> Result<DensityMatrix> {
        circuit.validate()?;
        for &q in keep {
            if q >= circuit.num_qubits {
                return Err(Error::QubitIndex { index: q, count: circuit.num_qubits });
            }
        }
        let noise = noise.copied().unwrap_or_default();
        noise.validate()?;
        let plan = Plan::new(circuit, keep);
        if plan.peak_active > self.config.density_cap {
            return Err(Error::Capacity(format!(
                "{} simultaneously active qubits exceed the density limit of {}",
                plan.peak_active, self.config.density_cap
            )));
        }
        let mut run = ExactRun::new(circuit, noise, keep).execute()?;
        for &q in keep {
            if run.layout.pos[q].is_none() {
                let p1 = run.pending[q].take().unwrap_or(0.0);
                run.activate(q, p1);
            }
        }
        let pos = run.layout.positions(keep);
        let mut total: Option<DensityMatrix> = None;
        for b in &run.branches {
            let r = b.rho.reduced(&pos)?;
            match total.as_mut() {
                Some(t) => t.add_assign(&r),
                None => total = Some(r),
            }
        }
        Ok(total.unwrap_or_else(|| DensityMatrix::new(keep.len())))
    }

    /// Noiseless final statevector of a measurement-free circuit.
    pub fn statevector(&self, circuit: &Circuit) -> Result<StateVector> {
        circuit.validate()?;
        if let Some(instr) = circuit
            .instructions
            .iter()
            .find(|i| matches!(i.op, Operation::Measure { .. } | Operation::Reset) || i.condition.is_some())
        {
            return Err(Error::Contract(format!("statevector() needs a measurement-free circuit, found `{instr}`")));
        }
        if circuit.num_qubits > self.config.trajectory_cap {
            return Err(Error::Capacity(format!(
                "{} qubits exceed the statevector limit of {}",
                circuit.num_qubits, self.config.trajectory_cap
            )));
        }
        let mut state = StateVector::new(circuit.num_qubits);
        for instr in &circuit.instructions {
            if instr.op != Operation::Barrier {
                state.apply_gate(&instr.op, &instr.qubits)?;
            }
        }
        Ok(state)
    }
}

/// Runs `circuit` with the default simulator configuration.
pub fn run(circuit: &Circuit, shots: u64, noise: Option<&NoiseParams>, seed: u64) -> Result<Histogram> {
    Simulator::default().run(circuit, shots, noise, seed)
}

pub fn statevector(circuit: &Circuit) -> Result<StateVector> {
    Simulator::default().statevector(circuit)
}

pub fn exact_distribution(circuit: &Circuit, noise: Option<&NoiseParams>) -> Result<Distribution> {
    Simulator::default().exact_distribution(circuit, noise)
}

pub fn final_state(circuit: &Circuit, noise: Option<&NoiseParams>, keep: &[usize]) -> Result<DensityMatrix> {
    Simulator::default().final_state(circuit, noise, keep)
}
