//! Deterministic Monte Carlo harness: probability-of-correct-model-selection
//! sweeps over an SNR grid or a sample-count grid.
//!
//! Every trial owns private RNG substreams keyed by (master seed, purpose,
//! grid index, trial index), and per-grid-point aggregation is a pure
//! reduction over an order-preserving collection, so a sweep's output is
//! byte-identical whatever the thread count.

mod config;
mod results;
mod run;

pub use config::{parse_config_text, ConfigError, ExperimentConfig, GridAxis, Method, SupportPolicy};
pub use results::{parse_results_csv, write_results, ParsedResultRow, ResultRow, SweepResult};
pub use run::{run_trial, sweep, TrialOutcome};
