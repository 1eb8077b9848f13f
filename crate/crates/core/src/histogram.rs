use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};

/// Outcome probabilities keyed by bitstring (clbit 0 leftmost).
pub type Distribution = BTreeMap<String, f64>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, outcome: String) {
        *self.counts.entry(outcome).or_insert(0) += 1;
        self.shots += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (k, v) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += v;
        }
        self.shots += other.shots;
    }

    pub fn count(&self, outcome: &str) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn probability(&self, outcome: &str) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        self.count(outcome) as f64 / self.shots as f64
    }

    pub fn distribution(&self) -> Distribution {
        self.counts.iter().map(|(k, &v)| (k.clone(), v as f64 / self.shots as f64)).collect()
    }

    /// Most frequent outcome; ties go to the smallest bitstring.
    pub fn most_frequent(&self) -> Option<&str> {
        self.counts
            .iter()
            .fold(None, |best: Option<(&String, u64)>, (k, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((k, v)),
            })
            .map(|(k, _)| k.as_str())
    }

    /// Multinomial sample of `shots` outcomes from `dist`, drawn as a chain of
    /// binomials in key order so the result depends only on the rng state.
    pub fn sample<R: Rng + ?Sized>(dist: &Distribution, shots: u64, rng: &mut R) -> Histogram {
        let mut hist = Histogram { counts: BTreeMap::new(), shots };
        let mut remaining = shots;
        let mut mass: f64 = dist.values().sum();
        let n = dist.len();
        for (i, (k, &p)) in dist.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let draw = if i + 1 == n || mass <= p {
                remaining
            } else {
                let q = (p / mass).clamp(0.0, 1.0);
                Binomial::new(remaining, q).map(|b| b.sample(rng)).unwrap_or(0)
            };
            if draw > 0 {
                hist.counts.insert(k.clone(), draw);
            }
            remaining -= draw;
            mass -= p;
        }
        hist
    }
}

/// Total-variation distance `1/2 Σ |p - q|` over the union of supports.
pub fn total_variation(p: &Distribution, q: &Distribution) -> f64 {
    let mut sum = 0.0;
    for (k, a) in p {
        sum += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            sum += b.abs();
        }
    }
    0.5 * sum
}

/// Renders the low `width` bits of `value`, bit 0 first.
pub fn bitstring(value: u64, width: usize) -> String {
    (0..width).map(|i| if value >> i & 1 == 1 { '1' } else { '0' }).collect()
}
