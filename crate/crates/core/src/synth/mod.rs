//! Synthetic cohorts with planted, parameterized feature-affect
//! couplings. The generator emits the exact ingest JSON-lines formats
//! plus a ground-truth table, and the verifier proves the full pipeline
//! reproduces that truth bit-for-bit, independent of any learning.

mod generate;
mod spec;
mod verify;

pub use generate::{
    generate_cohort, ground_truth_columns, items_for_balance, parse_ground_truth_csv, Cohort,
    GroundTruthRow, GROUND_TRUTH_HEADER,
};
pub use spec::{default_couplings, CohortSpec, LATENT_MEAN, LATENT_STD};
pub use verify::{verify_cohort, Mismatch, VerifyReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid cohort spec: {0}")]
    InvalidSpec(String),
    #[error(
        "coupling {requested} on {feature} is infeasible under the current noise; \
         maximum reachable is about {max_feasible:.2}"
    )]
    InfeasibleCoupling {
        feature: String,
        requested: f64,
        max_feasible: f64,
    },
    #[error("generated logs failed the pipeline: {0}")]
    Pipeline(String),
    #[error("bad ground truth table: {0}")]
    BadGroundTruth(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
