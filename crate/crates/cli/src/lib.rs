//! Experiment orchestration for the tonal-noise ANC study: configuration
//! loading, the interpolation sweep and the two control experiments, the
//! validation suite, and the files each run writes.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod validate;

pub use config::{ExperimentConfig, FULL_SCALE_EPOCHS};
pub use error::CliError;
pub use experiments::{
    run_anc_convergence, run_field_map, run_interp_sweep, run_validate, ConvergenceOutcome, FieldOutcome,
    SweepOutcome, SweepRow,
};
pub use output::{Bundle, Check};
