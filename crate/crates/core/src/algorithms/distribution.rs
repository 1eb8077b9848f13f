//! Loading a sampled normal distribution into amplitudes.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::histogram::Distribution;

/// Normal density at `2^n` evenly spaced points of `[mu - 3 sigma, mu + 3 sigma]`,
/// normalized to sum to one. Index `x` has qubit 0 as its least significant bit.
pub fn normal_probabilities(n: usize, mu: f64, sigma: f64) -> Result<Vec<f64>> {
    if n == 0 || n > 24 {
        return Err(Error::Domain(format!("n = {n} qubits is outside 1..=24")));
    }
    if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
        return Err(Error::Domain(format!("invalid normal parameters mu = {mu}, sigma = {sigma}")));
    }
    let count = 1usize << n;
    let (lo, hi) = (mu - 3.0 * sigma, mu + 3.0 * sigma);
    let step = if count == 1 { 0.0 } else { (hi - lo) / (count - 1) as f64 };
    let dens: Vec<f64> = (0..count)
        .map(|i| {
            let x = lo + step * i as f64;
            (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = dens.iter().sum();
    Ok(dens.into_iter().map(|d| d / total).collect())
}

/// Prepares `sum_x sqrt(p_x) |x>` with a binary tree of uniformly controlled
/// RY rotations, most significant qubit first.
pub fn state_preparation(probs: &[f64]) -> Result<Circuit> {
    let count = probs.len();
    if count < 2 || !count.is_power_of_two() {
        return Err(Error::Validation(format!("{count} probabilities do not fill a qubit register")));
    }
    if probs.iter().any(|p| p.is_nan() || *p < 0.0) {
        return Err(Error::Domain("probabilities must be nonnegative".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("probabilities sum to {total}")));
    }
    let n = count.trailing_zeros() as usize;
    let mut c = Circuit::new(n, 0);
    for level in 0..n {
        let target = n - 1 - level;
        let controls: Vec<usize> = (target + 1..n).collect();
        // Rotation angle for every value of the already-prepared prefix.
        let alphas: Vec<f64> = (0..1usize << level)
            .map(|prefix| {
                let block = count >> level;
                let start = prefix * block;
                let mass: f64 = probs[start..start + block].iter().sum();
                let low: f64 = probs[start..start + block / 2].iter().sum();
                if mass <= 0.0 {
                    0.0
                } else {
                    2.0 * (low / mass).clamp(0.0, 1.0).sqrt().acos()
                }
            })
            .collect();
        uniformly_controlled_ry(&mut c, &alphas, &controls, target);
    }
    Ok(c)
}

/// RY(alphas[x]) on `target` when `controls` (bit `b` of `x` on `controls[b]`)
/// hold `x`, using the Gray-code sequence of rotations and CNOTs.
fn uniformly_controlled_ry(c: &mut Circuit, alphas: &[f64], controls: &[usize], target: usize) {
    let k = controls.len();
    if k == 0 {
        c.ry(alphas[0], target);
        return;
    }
    let size = 1usize << k;
    let gray = |i: usize| i ^ (i >> 1);
    for i in 0..size {
        let g = gray(i);
        let theta = alphas
            .iter()
            .enumerate()
            .map(|(x, a)| if (x & g).count_ones() % 2 == 0 { *a } else { -*a })
            .sum::<f64>()
            / size as f64;
        c.ry(theta, target);
        let changed = (g ^ gray((i + 1) % size)).trailing_zeros() as usize;
        c.cx(controls[changed], target);
    }
}

/// Circuit loading the sampled normal distribution on `n` qubits.
pub fn load_normal_distribution(n: usize, mu: f64, sigma: f64) -> Result<Circuit> {
    state_preparation(&normal_probabilities(n, mu, sigma)?)
}

/// `(sum_i sqrt(p_i q_i))^2`, after renormalizing both inputs.
pub fn hellinger_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Validation(format!("distributions over {} and {} outcomes", p.len(), q.len())));
    }
    let norm = |v: &[f64]| -> Result<f64> {
        let s: f64 = v.iter().sum();
        if v.iter().any(|x| x.is_nan() || *x < 0.0) || (s - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!("not a probability distribution (sum {s})")));
        }
        Ok(s)
    };
    let (sp, sq) = (norm(p)?, norm(q)?);
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a / sp * b / sq).sqrt()).sum();
    Ok((bc * bc).min(1.0))
}

/// Probability vector indexed like [`normal_probabilities`] from outcome
/// strings whose character `k` is the bit of weight `2^k`.
pub fn probabilities_from_distribution(dist: &Distribution, n: usize) -> Result<Vec<f64>> {
    let mut v = vec![0.0; 1usize << n];
    for (key, p) in dist {
        if key.len() != n {
            return Err(Error::Validation(format!("outcome `{key}` is not {n} bits wide")));
        }
        let idx = key.chars().enumerate().try_fold(0usize, |acc, (k, ch)| match ch {
            '0' => Ok(acc),
            '1' => Ok(acc | 1 << k),
            _ => Err(Error::Validation(format!("outcome `{key}` is not a bitstring"))),
        })?;
        v[idx] += p;
    }
    Ok(v)
}
