//! Reproducible experiments and self-test suites, shared by the CLI and the tests.

mod experiment;
mod verify;

pub use experiment::{run_experiment, seeded_oracle, write_csv, ExperimentConfig, ExperimentRecord, CSV_COLUMNS};
pub use verify::{
    check_gram, check_ntt, check_prefix_rotation, check_row_bounds, check_trace, galois_automorphism, galois_trace,
    run_verify, SuiteResult, VerifyReport,
};
