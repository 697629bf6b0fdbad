//! Monte Carlo experiments, statistical gates, the likelihood-ratio audit and
//! the verification suites behind the CLI.

pub mod audit;
pub mod config;
pub mod record;
pub mod runner;
pub mod stats;
pub mod verify;

pub use audit::{likelihood_ratio_audit, AuditReport, FixedBudgetPolicy, RoundRobin, Transcript};
pub use config::{Algorithm, AuditConfig, EventSpec, ExperimentConfig, InstanceSpec, Params};
pub use record::{read_csv, write_csv, TrialRecord, CSV_COLUMNS};
pub use runner::{
    is_eps_optimal, run_experiment, run_trial, run_trials, summarize, ExperimentOutput, Gate,
    Summary,
};
pub use stats::{wilson_interval, MeanEstimate, WilsonInterval, Z_95};
pub use verify::{kl_suite, osmd_suite, Check};
