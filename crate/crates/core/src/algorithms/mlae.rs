//! Maximum-likelihood amplitude estimation over a schedule of Grover powers.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID_POINTS: usize = 10_000;
const REFINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlaeSchedule {
    pub powers: Vec<u64>,
    pub shots: Vec<u64>,
}

impl MlaeSchedule {
    pub fn new(powers: Vec<u64>, shots: Vec<u64>) -> Result<Self> {
        let s = Self { powers, shots };
        s.validate()?;
        Ok(s)
    }

    /// Powers `0, 1, 2, 4, ..., 2^(count-2)` with `shots` each.
    pub fn exponential(count: usize, shots: u64) -> Result<Self> {
        let powers = (0..count).map(|j| if j == 0 { 0 } else { 1u64 << (j - 1) }).collect();
        Self::new(powers, vec![shots; count])
    }

    pub fn validate(&self) -> Result<()> {
        if self.powers.is_empty() || self.powers.len() != self.shots.len() {
            return Err(Error::Validation(format!(
                "schedule has {} powers and {} shot counts",
                self.powers.len(),
                self.shots.len()
            )));
        }
        if self.powers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("Grover powers must be strictly increasing".into()));
        }
        if self.shots.contains(&0) {
            return Err(Error::Validation("every power needs at least one shot".into()));
        }
        Ok(())
    }

    pub fn total_shots(&self) -> u64 {
        self.shots.iter().sum()
    }

    /// Schedule truncated to its first `len` powers.
    pub fn prefix(&self, len: usize) -> Self {
        Self { powers: self.powers[..len].to_vec(), shots: self.shots[..len].to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlaeResult {
    pub a_hat: f64,
    pub theta_hat: f64,
    /// `|a_hat - a_true|`, once a reference value is supplied.
    pub estimation_error: Option<f64>,
    pub cramer_rao_bound: f64,
    /// Another, separated grid maximum ties with the reported one.
    pub multimodal: bool,
}

impl MlaeResult {
    pub fn with_truth(mut self, a_true: f64) -> Self {
        self.estimation_error = Some((self.a_hat - a_true).abs());
        self
    }
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

fn log_likelihood(theta: f64, hits: &[u64], schedule: &MlaeSchedule) -> f64 {
    hits.iter()
        .zip(schedule.powers.iter().zip(&schedule.shots))
        .map(|(&h, (&m, &n))| {
            let angle = (2 * m + 1) as f64 * theta;
            let (s, c) = angle.sin_cos();
            xlogy(h as f64, s * s) + xlogy((n - h) as f64, c * c)
        })
        .sum()
}

/// Standard-deviation lower bound on an unbiased estimate of `a`.
pub fn cramer_rao_bound(a: f64, schedule: &MlaeSchedule) -> f64 {
    let theta = a.clamp(0.0, 1.0).sqrt().asin();
    (2.0 * theta).sin().abs() / fisher_information(schedule).sqrt()
}

/// Fisher information about theta carried by the schedule.
pub fn fisher_information(schedule: &MlaeSchedule) -> f64 {
    schedule
        .powers
        .iter()
        .zip(&schedule.shots)
        .map(|(&m, &n)| 4.0 * n as f64 * ((2 * m + 1) as f64).powi(2))
        .sum()
}

/// Derivative of the log-likelihood in theta.
fn score(theta: f64, hits: &[u64], schedule: &MlaeSchedule) -> f64 {
    hits.iter()
        .zip(schedule.powers.iter().zip(&schedule.shots))
        .map(|(&h, (&m, &n))| {
            let k = (2 * m + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            let up = if h == 0 { 0.0 } else { h as f64 * c / s };
            let down = if h == n { 0.0 } else { (n - h) as f64 * s / c };
            2.0 * k * (up - down)
        })
        .sum()
}

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > REFINE_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) / 2.0
}

pub fn mlae_estimate(hits: &[u64], schedule: &MlaeSchedule) -> Result<MlaeResult> {
    schedule.validate()?;
    if hits.len() != schedule.powers.len() {
        return Err(Error::Validation(format!("{} hit counts for {} powers", hits.len(), schedule.powers.len())));
    }
    if let Some((h, n)) = hits.iter().zip(&schedule.shots).find(|(h, n)| h > n) {
        return Err(Error::Validation(format!("{h} hits out of {n} shots")));
    }
    let step = FRAC_PI_2 / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> =
        (0..GRID_POINTS).into_par_iter().map(|i| log_likelihood(i as f64 * step, hits, schedule)).collect();
    let best = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * best.abs().max(1.0);
    let is_peak = |i: usize| {
        let v = grid[i];
        v >= best - tol && (i == 0 || grid[i - 1] <= v) && (i + 1 == GRID_POINTS || grid[i + 1] <= v)
    };
    let peaks: Vec<usize> = (0..GRID_POINTS).filter(|&i| is_peak(i)).collect();
    let i = peaks[0];
    let multimodal = peaks.windows(2).any(|w| w[1] > w[0] + 1);

    let lo = i.saturating_sub(1) as f64 * step;
    let hi = ((i + 1).min(GRID_POINTS - 1)) as f64 * step;
    let (s_lo, s_hi) = (score(lo, hits, schedule), score(hi, hits, schedule));
    let refined = if s_lo > 0.0 && s_hi < 0.0 {
        bisect_root(|t| score(t, hits, schedule), lo, hi)
    } else {
        golden_max(|t| log_likelihood(t, hits, schedule), lo, hi)
    };
    let theta_hat = if log_likelihood(refined, hits, schedule) >= grid[i] { refined } else { i as f64 * step };
    let theta_hat = theta_hat.clamp(0.0, FRAC_PI_2);
    let a_hat = theta_hat.sin().powi(2);
    Ok(MlaeResult {
        a_hat,
        theta_hat,
        estimation_error: None,
        cramer_rao_bound: cramer_rao_bound(a_hat, schedule),
        multimodal,
    })
}
