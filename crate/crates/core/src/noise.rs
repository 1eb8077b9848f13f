//! Depolarizing and readout noise, plus the closed-form fidelity models.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    /// Single-qubit gate depolarization probability.
    #[serde(default)]
    pub eps_d: f64,
    /// Two-qubit gate depolarization probability.
    #[serde(default)]
    pub eps_g: f64,
    /// Readout bit-flip probability.
    #[serde(default)]
    pub eps_m: f64,
    /// Probability that a reset leaves `|1>`; falls back to `eps_m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_reset: Option<f64>,
    /// Classical communication latency in seconds.
    #[serde(default)]
    pub t_comm_s: f64,
    #[serde(rename = "T2_s", default = "default_t2")]
    pub t2_s: f64,
}

fn default_t2() -> f64 {
    50e-6
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { eps_d: 0.0, eps_g: 0.0, eps_m: 0.0, eps_reset: None, t_comm_s: 0.0, t2_s: default_t2() }
    }
}

impl NoiseParams {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn new(eps_d: f64, eps_g: f64, eps_m: f64) -> Self {
        Self { eps_d, eps_g, eps_m, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("eps_d", self.eps_d),
            ("eps_g", self.eps_g),
            ("eps_m", self.eps_m),
            ("eps_reset", self.reset_error()),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!("{name} = {p} is not a probability")));
            }
        }
        if self.t_comm_s < 0.0 || !self.t_comm_s.is_finite() {
            return Err(Error::Validation(format!("t_comm_s = {} must be non-negative", self.t_comm_s)));
        }
        if self.t_comm_s > 0.0 && self.t2_s <= 0.0 {
            return Err(Error::Validation("T2_s must be positive when t_comm_s > 0".into()));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.eps_d == 0.0 && self.eps_g == 0.0 && self.eps_m == 0.0 && self.reset_error() == 0.0
    }

    pub fn reset_error(&self) -> f64 {
        self.eps_reset.unwrap_or(self.eps_m)
    }

    /// Depolarization charged to a classically conditioned correction: derived
    /// from the communication latency when one is set, otherwise `eps_d`.
    pub fn comm_error(&self) -> f64 {
        if self.t_comm_s > 0.0 {
            comm_depolarization(self.t_comm_s, self.t2_s).unwrap_or(self.eps_d)
        } else {
            self.eps_d
        }
    }
}

/// Exact single-qubit depolarizing channel on a density matrix.
pub fn depolarize_1q(rho: &mut DensityMatrix, qubit: usize, eps_d: f64) -> Result<()> {
    rho.depolarize(&[qubit], eps_d)
}

/// Exact two-qubit depolarizing channel on a density matrix.
pub fn depolarize_2q(rho: &mut DensityMatrix, qi: usize, qj: usize, eps_g: f64) -> Result<()> {
    rho.depolarize(&[qi, qj], eps_g)
}

/// Trajectory unravelling of a `k`-qubit depolarizing channel: with
/// probability `eps` returns a uniformly random Pauli string (0=I,1=X,2=Y,3=Z
/// per qubit), otherwise `None`.
pub fn sample_pauli_error<R: Rng + ?Sized>(k: usize, eps: f64, rng: &mut R) -> Option<Vec<u8>> {
    if eps <= 0.0 || rng.random::<f64>() >= eps {
        return None;
    }
    Some((0..k).map(|_| rng.random_range(0..4u8)).collect())
}

pub fn flip_measurement<R: Rng + ?Sized>(bit: bool, eps_m: f64, rng: &mut R) -> bool {
    if eps_m > 0.0 && rng.random::<f64>() < eps_m {
        !bit
    } else {
        bit
    }
}

/// First-order fidelity after `n` distributed gates:
/// `(1 - (eps_d + eps_g + 2 eps_m))^n`.
pub fn analytic_gate_fidelity(n: u64, params: &NoiseParams) -> Result<f64> {
    let base = 1.0 - (params.eps_d + params.eps_g + 2.0 * params.eps_m);
    if base < 0.0 {
        return Err(Error::Domain(format!(
            "eps_d + eps_g + 2 eps_m = {} exceeds 1; outside the first-order regime",
            1.0 - base
        )));
    }
    Ok(base.powi(n as i32))
}

/// Summed first-order error probability of one teleported CNOT counted gate by
/// gate: two Hadamards, three CNOTs, two readouts, two corrections.
pub fn gadget_error_budget(params: &NoiseParams) -> f64 {
    2.0 * params.eps_d + 3.0 * params.eps_g + 2.0 * params.eps_m + 2.0 * params.comm_error()
}

/// Idle depolarization accumulated while waiting `t_comm` seconds.
pub fn comm_depolarization(t_comm: f64, t2: f64) -> Result<f64> {
    if t2 <= 0.0 {
        return Err(Error::Domain(format!("T2 = {t2} must be positive")));
    }
    Ok(-(-t_comm / t2).exp_m1())
}

/// Light-travel time over `distance_m` at `speed_m_per_s`.
pub fn comm_time(distance_m: f64, speed_m_per_s: f64) -> f64 {
    distance_m / speed_m_per_s
}

/// Gate-count fidelity estimate for phase estimation with `n` counting qubits
/// and `n_cu` two-qubit gates in the controlled-unitary ladder.
pub fn qpe_fidelity_theory(n: u32, n_cu: u64, eps_g: f64, distributed: bool) -> f64 {
    let exponent = if distributed { 2 * n_cu } else { n_cu + u64::from(n * n.saturating_sub(1) / 2) };
    (1.0 - eps_g).powi(exponent as i32)
}
