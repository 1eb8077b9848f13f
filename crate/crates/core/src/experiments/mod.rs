//! Experiment drivers behind the command-line tool. Each driver takes a
//! versioned JSON config and a seed and returns rows in a fixed order, so
//! output is reproducible from `(config, seed)`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub mod distload;
pub mod qae;
pub mod qpe_sweep;
pub mod resources;
pub mod run;

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_SHOTS: u64 = 10_000;
pub const DEFAULT_REPLICATIONS: usize = 20;

pub(crate) fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

pub(crate) fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

/// Parses a config, rejecting unknown keys and unsupported versions.
pub fn parse_config<T: DeserializeOwned + Versioned>(text: &str) -> Result<T> {
    let cfg: T = serde_json::from_str(text).map_err(|e| {
        Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if cfg.version() != CONFIG_VERSION {
        return Err(Error::Config(format!(
            "config version {} is not supported (expected {CONFIG_VERSION})",
            cfg.version()
        )));
    }
    Ok(cfg)
}

pub fn load_config<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub trait Versioned {
    fn version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl Versioned for $t {
            fn version(&self) -> u32 {
                self.version
            }
        }
    )*};
}

versioned!(
    run::RunConfig,
    qpe_sweep::QpeSweepConfig,
    qae::QaeConfig,
    distload::DistloadConfig,
    resources::ResourcesConfig
);

/// Generator for one `(point, replication)` cell of a sweep.
pub fn point_rng(seed: u64, point: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point << 20 | replication);
    rng
}

pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(rows, file)
}

/// Sample mean and standard deviation (n - 1 denominator).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub(crate) fn check_shots(shots: u64, replications: usize) -> Result<()> {
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    if replications == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    Ok(())
}
