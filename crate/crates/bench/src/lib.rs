//! Shared fixtures for the criterion benchmarks.

use notimind_core::synth::{generate_cohort, Cohort, CohortSpec};

/// A small deterministic cohort reused across benchmarks.
pub fn bench_cohort() -> Cohort {
    let spec = CohortSpec {
        n_users: 6,
        days: 6,
        events_per_segment: 120.0,
        couplings: Default::default(),
        missed_report_prob: 0.0,
        seed: 7,
        ..CohortSpec::default()
    };
    generate_cohort(&spec).expect("bench cohort generates")
}
