//! Model selection for block-sparse multiple-measurement linear regression.
//!
//! The observation model is `Y = A X + W` with `Y` an N×L measurement
//! matrix, `A` an N×p design, and `X` a p×L coefficient matrix whose rows
//! are partitioned into contiguous blocks of `L_B` rows; only a few blocks
//! are nonzero. Setting `L = 1` recovers single-measurement block sparsity,
//! and `L_B = 1` recovers the row-sparse multiple-measurement case.
//!
//! The pipeline has three stages:
//!
//! 1. [`bomp`] greedily orders candidate blocks by residual correlation,
//!    producing one nested support per model order.
//! 2. [`criterion`] scores each candidate support with a residual-based
//!    information criterion whose penalty is derived from the Fisher
//!    information of the fitted coefficients, and picks the minimizer.
//!    No noise-variance input is required.
//! 3. [`experiment`] wraps the above in a deterministic, thread-count
//!    independent Monte Carlo harness that estimates the probability of
//!    correct model selection over synthetic problem grids.
//!
//! [`model`] holds the problem-geometry types and synthetic data generation;
//! [`linalg`] supplies the QR-based least-squares kernels everything else
//! leans on.

pub mod bomp;
pub mod criterion;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rng;

pub use bomp::{run_bomp, CandidatePath};
pub use criterion::{
    ebicr_score, exhaustive_select, fim_normalization_diagnostic, oracle_select, select_model,
    sigma0_sq, sigma_sq_block, CriterionScore, FimDiagnostic, SelectorConfig,
};
pub use experiment::{
    run_trial, sweep, ExperimentConfig, GridAxis, Method, SweepResult, TrialOutcome,
};
pub use linalg::{
    least_squares_fit, normalize_columns, residual_matrix, residual_sq_norm, LinalgError,
};
pub use model::{BlockStructure, BlockSupport, Dataset, GroundTruth, ModelError};
