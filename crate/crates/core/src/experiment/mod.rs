//! Presets, configuration files, output files and the validation battery.

pub mod config;
pub mod output;
pub mod preset;
pub mod svg;
pub mod validate;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::engine::{RunSummary, SimulationTrace};

pub use config::{ConfigError, RunConfig};
pub use output::{parse_summary, write_run, ParsedSummary};
pub use preset::Preset;

/// Output directory of one seed in a batch.
pub fn batch_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed_{seed}"))
}

/// Runs `config` once per seed in `seed .. seed + count`, in parallel.
/// Results come back in seed order.
pub fn run_batch(
    config: &RunConfig,
    count: u64,
) -> Vec<(u64, crate::Result<(SimulationTrace, RunSummary)>)> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            let c = RunConfig {
                seed,
                ..config.clone()
            };
            (seed, c.execute())
        })
        .collect()
}
