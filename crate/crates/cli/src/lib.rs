//! Command implementations for the `notimind` batch front end.
//!
//! Every subcommand is an ordinary function over an argument struct, so
//! tests can drive the exact CLI surface in-process. All outputs are
//! deterministic functions of the inputs and the seed: rerunning any
//! command with identical inputs produces byte-identical files.

pub mod commands;
mod config;

pub use commands::{
    run_correlate, run_features, run_ingest, run_synth, run_train, CorrelateArgs, FeaturesArgs,
    IngestArgs, SynthArgs, TrainArgs,
};

use std::sync::Once;

/// Cap rayon's parallelism from `NOTIMIND_THREADS` when set. Fold and
/// user order in every report is fixed, so the thread count never
/// changes any output byte.
pub fn apply_thread_cap() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        if let Ok(raw) = std::env::var("NOTIMIND_THREADS") {
            if let Ok(n) = raw.trim().parse::<usize>() {
                if n > 0 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    });
}
