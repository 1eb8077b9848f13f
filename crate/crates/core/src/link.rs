//! Probabilistic entanglement generation between nodes.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::dqc::DistributedCircuit;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Per-attempt success probability of one pair, coupling included.
    pub p: f64,
    /// Communication-qubit pairs attempted in parallel.
    pub m: usize,
}

impl LinkParams {
    pub fn new(p: f64, m: usize) -> Result<Self> {
        let link = Self { p, m };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Validation(format!("link p = {} is outside (0, 1]", self.p)));
        }
        if self.m == 0 {
            return Err(Error::Validation("link m must be at least 1".into()));
        }
        Ok(())
    }

    /// Success probability of one attempt round across the `m` pairs.
    pub fn round_success(&self) -> f64 {
        success_prob_multi(self.p, 1, u32::try_from(self.m).unwrap_or(u32::MAX))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStats {
    pub total_trials: u64,
    pub gadget_count: u64,
}

/// Probability of at least one success in `k` attempts.
pub fn success_prob_single(p: f64, k: u32) -> f64 {
    -(k as f64 * (-p).ln_1p()).exp_m1()
}

/// Probability of at least one success in `k` attempts on each of `m`
/// parallel pairs.
pub fn success_prob_multi(p: f64, k: u32, m: u32) -> f64 {
    success_prob_single(p, k.saturating_mul(m))
}

/// Attempts until the first success: `P(k) = (1-p)^(k-1) p`.
pub fn sample_trials<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("p = {p}: entanglement generation would never terminate")));
    }
    if p == 1.0 {
        return Ok(1);
    }
    let g = Geometric::new(p).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(g.sample(rng) + 1)
}

/// Total attempts to deliver `pairs` Bell pairs, each taking a geometric
/// number of attempts. Large totals are drawn from the equivalent
/// gamma-Poisson mixture instead of pair by pair.
pub fn sample_total_trials<R: Rng + ?Sized>(p: f64, pairs: u64, rng: &mut R) -> Result<u64> {
    if pairs <= 64 || p == 1.0 {
        let mut total = 0;
        for _ in 0..pairs {
            total += sample_trials(p, rng)?;
        }
        return Ok(total);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p}: entanglement generation would never terminate")));
    }
    let gamma = Gamma::new(pairs as f64, (1.0 - p) / p).map_err(|e| Error::Domain(e.to_string()))?;
    let lambda = gamma.sample(rng);
    let failures = if lambda > 0.0 {
        Poisson::new(lambda).map_err(|e| Error::Domain(e.to_string()))?.sample(rng) as u64
    } else {
        0
    };
    Ok(pairs + failures)
}

/// Entanglement attempts spent on every gadget of one execution, in program
/// order.
pub fn account_run<R: Rng + ?Sized>(dc: &DistributedCircuit, link: &LinkParams, rng: &mut R) -> Result<LinkStats> {
    if !dc.gate_app {
        return Err(Error::GateApp("circuit was not fully distributed".into()));
    }
    link.validate()?;
    let p = link.round_success();
    let mut stats = LinkStats::default();
    for _ in &dc.gadgets {
        stats.total_trials += sample_trials(p, rng)?;
        stats.gadget_count += 1;
    }
    Ok(stats)
}
