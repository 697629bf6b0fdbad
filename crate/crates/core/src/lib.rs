//! Best arm retention for stochastic Bernoulli bandits.
//!
//! * [`env`]: instances, seeded reward streams, pull accounting.
//! * [`kl`]: Bernoulli KL divergence and the inequalities used by lower bounds.
//! * [`osmd`]: online stochastic mirror descent with the square-root potential.
//! * [`explore`]: median elimination, PAC retention, and the `r`-gap retention algorithms.
//! * [`harness`]: seeded Monte Carlo experiments, statistical gates, CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod env;
mod error;
pub mod explore;
pub mod harness;
pub mod kl;
pub mod osmd;

pub use env::{hard_instance, BernoulliInstance, PullStats, RngStream};
pub use error::{Error, Result};
pub use explore::{PacParams, RetentionResult};
pub use osmd::{EstimatorVariant, OsmdConfig, SimplexDistribution};
