//! Experiment configs, Monte Carlo drivers and result records.
//!
//! Every random draw comes from [`crate::rng::stream`] keyed by the root
//! seed, a per-purpose domain tag and the replication index, so a run is a
//! pure function of its config: thread count and scheduling never change a
//! single bit of the output.

mod config;
mod montecarlo;
mod record;
pub mod stats;
mod verify;

pub use config::{
    BootstrapSection, ExperimentConfig, ExperimentKind, FunctionFamily, ModuliSection, OutputPaths, Thresholds,
    VerifySection,
};
pub use montecarlo::{run_boot, run_clt, run_cov};
pub use record::{CriterionOutcome, ResultRecord, Row, Witness};
pub use verify::run_verify;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Stream domains; one per independent source of randomness.
pub(crate) mod domain {
    pub const DATA: u64 = 1;
    pub const BOOT: u64 = 2;
    pub const BOOT_UNIT: u64 = 3;
    pub const MC: u64 = 4;
    pub const MODULI: u64 = 5;
    pub const ATOMIC: u64 = 6;
    pub const FAMILY: u64 = 7;
    pub const IBP: u64 = 10;
    pub const ROUTE: u64 = 11;
    pub const BOUNDS: u64 = 12;
    pub const REGULARIZATION: u64 = 13;
    pub const GRID: u64 = 14;
}

/// Order-preserving parallel map over `0..count`.
pub(crate) fn parallel_map<T: Send>(count: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..count).into_par_iter().map(f).collect()
}

/// Runs the experiment named by the config on the ambient rayon pool.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    match cfg.experiment {
        ExperimentKind::Verify => run_verify(cfg),
        ExperimentKind::Clt => run_clt(cfg),
        ExperimentKind::Boot => run_boot(cfg),
        ExperimentKind::Cov => run_cov(cfg),
    }
}

/// [`run`] on a dedicated pool of `threads` workers.
pub fn run_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ResultRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg))
}

/// Re-executes a record's config and checks the digest bit-for-bit.
pub fn replay(record: &ResultRecord) -> Result<bool> {
    if record.config.config_hash() != record.config_hash || record.config.seed != record.seed {
        return Err(Error::Contract("record config does not match its hash".into()));
    }
    Ok(run(&record.config)?.digest() == record.digest())
}
