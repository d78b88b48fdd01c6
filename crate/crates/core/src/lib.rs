//! Monte-Carlo simulator for deliberation followed by approval-based
//! multi-winner elections.
//!
//! A replication draws a two-bloc population, lets agents deliberate in
//! groups formed by one of several strategies, rebuilds approval ballots
//! from the updated utilities and scores the committees chosen by AV, CC,
//! PAV and the Method of Equal Shares.

pub mod axioms;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grouping;
pub mod harness;
pub mod metrics;
pub mod plot;
pub mod population;
pub mod records;
pub mod report;
pub mod rng;
pub mod rules;
pub mod sets;

pub use error::{Error, Result};
pub use config::ExperimentConfig;
pub use harness::{run_experiment, run_replication, AggregateReport, Condition, RunRecord};
