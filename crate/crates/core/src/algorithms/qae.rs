//! Amplitude-estimation operators for the integrand `sin^2`.

use std::f64::consts::PI;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::synth::mcx_ops;

/// Index qubits `0..n` in uniform superposition, ancilla `n` rotated so that
/// `P(ancilla = 1) = 2^-n * sum_x sin^2(c (x + 1/2) / 2^n)`.
pub fn build_a_sin2(n: usize, c: f64) -> Result<Circuit> {
    if n == 0 || n > 30 {
        return Err(Error::Domain(format!("n = {n} index qubits is outside 1..=30")));
    }
    if !(c > 0.0 && c <= PI) {
        return Err(Error::Domain(format!("c = {c} is outside (0, pi]")));
    }
    let scale = (1u64 << n) as f64;
    let mut a = Circuit::new(n + 1, 0);
    a.registers.insert("index".into(), 0..n);
    a.registers.insert("ancilla".into(), n..n + 1);
    for j in 0..n {
        a.h(j);
    }
    a.ry(c / scale, n);
    for j in 0..n {
        a.cry(c * (1u64 << (j + 1)) as f64 / scale, j, n);
    }
    Ok(a)
}

/// Exact `P(ancilla = 1)` of [`build_a_sin2`].
pub fn a_true(n: usize, c: f64) -> f64 {
    let scale = (1u64 << n) as f64;
    let f: Vec<f64> = (0..1u64 << n).map(|x| (c * (x as f64 + 0.5) / scale).sin().powi(2)).collect();
    expectation_from_uniform(&f).expect("sin^2 is bounded")
}

/// Mean of `f` over uniformly weighted points.
pub fn expectation_from_uniform(f_values: &[f64]) -> Result<f64> {
    if f_values.is_empty() {
        return Err(Error::Domain("no function samples".into()));
    }
    if let Some(v) = f_values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("sample {v} lies outside [0, 1]")));
    }
    Ok(f_values.iter().sum::<f64>() / f_values.len() as f64)
}

/// `Q = -A S0 A^-1 S_X` for an `A` whose last qubit is the ancilla.
pub fn build_grover_q(a: &Circuit, n: usize) -> Result<Circuit> {
    if a.num_qubits != n + 1 {
        return Err(Error::Validation(format!("A acts on {} qubits, expected {}", a.num_qubits, n + 1)));
    }
    if let Some(i) = a.instructions.iter().find(|i| !i.op.is_unitary() || i.condition.is_some()) {
        return Err(Error::Contract(format!("A must be measurement-free, found `{i}`")));
    }
    let all: Vec<usize> = (0..=n).collect();
    let mut q = Circuit::new(n + 1, 0);
    q.registers = a.registers.clone();
    q.z(n);
    q.compose(&a.inverse()?, &all)?;
    for &k in &all {
        q.x(k);
    }
    q.h(n);
    for op in mcx_ops(&all[..n], n) {
        q.push(op);
    }
    q.h(n);
    for &k in &all {
        q.x(k);
    }
    q.compose(a, &all)?;
    q.global_phase = PI;
    Ok(q)
}

/// `Q^m A |0>` with the ancilla measured into clbit 0.
pub fn grover_circuit(a: &Circuit, q: &Circuit, m: u64) -> Result<Circuit> {
    let n = a.num_qubits;
    let all: Vec<usize> = (0..n).collect();
    let mut c = Circuit::new(n, 1);
    c.registers = a.registers.clone();
    c.compose(a, &all)?;
    for _ in 0..m {
        c.compose(q, &all)?;
    }
    c.measure(n - 1, 0);
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;
    use crate::gates::Matrix;
    use crate::synth::unitary_of;

    fn p_one(c: &Circuit) -> f64 {
        engine::exact_distribution(c, None).unwrap().get("1").copied().unwrap_or(0.0)
    }

    #[test]
    fn one_index_qubit() {
        let want = 0.5 * ((PI / 12.0).sin().powi(2) + (PI / 4.0).sin().powi(2));
        assert!((a_true(1, PI / 3.0) - want).abs() < 1e-15);
        assert!((want - 0.283494).abs() < 1e-6);
        let a = build_a_sin2(1, PI / 3.0).unwrap();
        let q = build_grover_q(&a, 1).unwrap();
        assert!((p_one(&grover_circuit(&a, &q, 0).unwrap()) - want).abs() < 1e-12);
    }

    #[test]
    fn amplification_law() {
        for n in 1..=3 {
            let c = PI / 3.0;
            let a = build_a_sin2(n, c).unwrap();
            let q = build_grover_q(&a, n).unwrap();
            let theta = a_true(n, c).sqrt().asin();
            for m in 0..=3u64 {
                let got = p_one(&grover_circuit(&a, &q, m).unwrap());
                let want = ((2 * m + 1) as f64 * theta).sin().powi(2);
                assert!((got - want).abs() < 1e-8, "n={n} m={m} {got} {want}");
            }
        }
    }

    #[test]
    fn q_is_unitary() {
        for n in 1..=3 {
            let q = build_grover_q(&build_a_sin2(n, 1.0).unwrap(), n).unwrap();
            let u = unitary_of(&q.instructions, n + 1);
            let d = u.nrows();
            assert!((u.adjoint() * &u - Matrix::identity(d, d)).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_a_sin2(2, 0.0).is_err());
        assert!(expectation_from_uniform(&[0.5, 1.5]).is_err());
        assert_eq!(expectation_from_uniform(&[1.0; 4]).unwrap(), 1.0);
        let mut a = build_a_sin2(1, 1.0).unwrap();
        a.num_clbits = 1;
        a.measure(1, 0);
        assert!(matches!(build_grover_q(&a, 1), Err(Error::Contract(_))));
        let tiny = build_a_sin2(2, 1e-6).unwrap();
        assert!(p_one(&grover_circuit(&tiny, &build_grover_q(&tiny, 2).unwrap(), 0).unwrap()) < 1e-9);
    }
}
