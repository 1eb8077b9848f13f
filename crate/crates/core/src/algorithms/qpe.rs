//! Phase estimation, local (static inverse QFT) or distributed (dynamic QFT).

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algorithms::qft::qft_ops;
use crate::circuit::Circuit;
use crate::dqc::NodeMap;
use crate::dynamic::append_dynamic_qft;
use crate::error::{Error, Result};
use crate::gates::{self, Matrix, C64};
use crate::histogram::Distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QftMode {
    Static,
    Dynamic,
}

/// Counting qubits `0..n`, system qubits after them. Counting qubit `j`
/// controls `U^(2^(n-1-j))` and is read into clbit `n-1-j`, so the outcome
/// string is `y0 y1 ... y(n-1)` with `y0` most significant.
pub fn build_qpe(u: &Matrix, n_counting: usize, eigenstate_prep: &Circuit, qft: QftMode) -> Result<Circuit> {
    gates::check_unitary(u)?;
    if n_counting == 0 {
        return Err(Error::Validation("at least one counting qubit is needed".into()));
    }
    let dim = u.nrows();
    let s = dim.trailing_zeros() as usize;
    if !dim.is_power_of_two() || s == 0 || eigenstate_prep.num_qubits != s {
        return Err(Error::Validation(format!(
            "a {dim}x{dim} unitary does not act on the {}-qubit system register",
            eigenstate_prep.num_qubits
        )));
    }
    if eigenstate_prep.instructions.iter().any(|i| !i.op.is_unitary() || i.condition.is_some()) {
        return Err(Error::Contract("eigenstate preparation must be measurement-free".into()));
    }
    let n = n_counting;
    let mut c = Circuit::new(n + s, n);
    c.registers.insert("counting".into(), 0..n);
    c.registers.insert("system".into(), n..n + s);
    let system: Vec<usize> = (n..n + s).collect();
    c.compose(eigenstate_prep, &system)?;
    for j in 0..n {
        c.h(j);
    }
    for j in 0..n {
        let power = 1u64 << (n - 1 - j);
        c.controlled_unitary(gates::matrix_power(u, power), j, &system)?;
    }
    let counting: Vec<usize> = (0..n).collect();
    let clbits: Vec<usize> = (0..n).map(|j| n - 1 - j).collect();
    match qft {
        QftMode::Static => {
            for op in qft_ops(&counting, true) {
                c.push(op);
            }
            for j in 0..n {
                c.measure(j, n - 1 - j);
            }
        }
        QftMode::Dynamic => append_dynamic_qft(&mut c, &counting, &clbits),
    }
    Ok(c)
}

/// Fraction `(y0 y1 ... y(n-1))_2 / 2^n` with `y0` most significant.
pub fn decode_phase(bits: &str) -> Result<f64> {
    if bits.is_empty() || bits.len() > 63 {
        return Err(Error::Domain(format!("cannot decode a {}-bit phase", bits.len())));
    }
    let v = u64::from_str_radix(bits, 2).map_err(|_| Error::Domain(format!("`{bits}` is not a bitstring")))?;
    Ok(v as f64 / (1u64 << bits.len()) as f64)
}

/// The `n`-bit string QPE reports for eigenphase fraction `y`.
pub fn encode_phase(y: f64, n: usize) -> String {
    let v = ((y.rem_euclid(1.0) * (1u64 << n) as f64).round() as u64) % (1u64 << n);
    format!("{v:0n$b}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseResult {
    pub top: String,
    pub fraction: f64,
    pub probability_correct: f64,
}

impl PhaseResult {
    pub fn from_distribution(dist: &Distribution, expected: &str) -> Result<Self> {
        let top = dist
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(k, _)| k.clone())
            .ok_or_else(|| Error::Validation("empty distribution".into()))?;
        Ok(Self {
            fraction: decode_phase(&top)?,
            probability_correct: dist.get(expected).copied().unwrap_or(0.0),
            top,
        })
    }
}

/// `RX(pi)` on the first system qubit, `RY(pi)` on the second.
pub fn example_unitary() -> Matrix {
    gates::kron(&gates::mat2_to_matrix(&gates::ry(PI)), &gates::mat2_to_matrix(&gates::rx(PI)))
}

/// A unit eigenvector of `u` for eigenvalue `lambda`.
pub fn eigenvector(u: &Matrix, lambda: C64) -> Result<DVector<C64>> {
    let dim = u.nrows();
    let shifted = u - Matrix::identity(dim, dim) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (k, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    if sigma > 1e-9 {
        return Err(Error::Domain(format!("{lambda} is not an eigenvalue (smallest singular value {sigma:e})")));
    }
    Ok(v_t.row(k).adjoint().normalize())
}

/// Circuit on the system register preparing the `lambda` eigenstate of `u`.
pub fn eigenstate_prep(u: &Matrix, lambda: C64) -> Result<Circuit> {
    let v = eigenvector(u, lambda)?;
    let s = u.nrows().trailing_zeros() as usize;
    let mut c = Circuit::new(s, 0);
    c.unitary(gates::unitary_with_first_column(v.as_slice()), &(0..s).collect::<Vec<_>>())?;
    Ok(c)
}

/// QPE of [`example_unitary`] on its `-1` eigenstate.
pub fn example_qpe(n_counting: usize, qft: QftMode) -> Result<Circuit> {
    let u = example_unitary();
    build_qpe(&u, n_counting, &eigenstate_prep(&u, C64::new(-1.0, 0.0))?, qft)
}

/// Counting register on node "1", system register on node "2".
pub fn qpe_node_map(n_counting: usize, system: usize) -> NodeMap {
    NodeMap::new([("1", (0..n_counting).collect()), ("2", (n_counting..n_counting + system).collect())])
}
