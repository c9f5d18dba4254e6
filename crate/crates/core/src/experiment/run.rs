//! Trial execution and sweep aggregation.

use rayon::prelude::*;

use super::config::{ExperimentConfig, Method, SupportPolicy};
use super::results::{ResultRow, SweepResult};
use crate::bomp::run_bomp;
use crate::criterion::{exhaustive_select, oracle_select, select_model, SelectorConfig};
use crate::model::{synthesize_dataset, BlockStructure, BlockSupport};
use crate::rng::{purpose, substream};

/// Result of one (grid point, trial) cell.
///
/// A trial is all-or-nothing: if any configured method fails (for example a
/// rank-deficient fit), the whole trial is excluded so every method is
/// always scored on the identical trial set.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Completed {
        truth: BlockSupport,
        path_len: usize,
        /// One selection per configured method, in method order.
        selections: Vec<BlockSupport>,
    },
    Excluded { reason: String },
}

/// Runs one trial: fresh design and noise from the trial's own substreams,
/// one greedy path, then every configured selector on that same path.
pub fn run_trial(config: &ExperimentConfig, grid_index: usize, trial_index: usize) -> TrialOutcome {
    let excluded = |reason: String| TrialOutcome::Excluded { reason };
    let (n, snr_db, _) = config.grid.point(grid_index);
    let structure = match BlockStructure::new(n, config.p, config.l, config.l_b) {
        Ok(s) => s,
        Err(e) => return excluded(e.to_string()),
    };
    let truth = match config.support_policy {
        SupportPolicy::FixedFirst => BlockSupport::first_blocks(config.k_b, structure.p_b()),
        SupportPolicy::RandomPerTrial => {
            let mut rng = substream(
                config.seed,
                purpose::SUPPORT,
                grid_index as u64,
                trial_index as u64,
            );
            let picks: Vec<usize> =
                rand::seq::index::sample(&mut rng, structure.p_b(), config.k_b)
                    .iter()
                    .map(|i| i + 1)
                    .collect();
            BlockSupport::new(picks, structure.p_b())
        }
    };
    let truth = match truth {
        Ok(t) => t,
        Err(e) => return excluded(e.to_string()),
    };
    let mut data_rng = substream(
        config.seed,
        purpose::DATASET,
        grid_index as u64,
        trial_index as u64,
    );
    let dataset = match synthesize_dataset(&structure, &truth, snr_db, &mut data_rng) {
        Ok(d) => d,
        Err(e) => return excluded(e.to_string()),
    };
    let k_eff = config.path_len_at(n);
    let path = match run_bomp(&dataset.a, &dataset.y, k_eff, &structure) {
        Ok(p) => p,
        Err(e) => return excluded(e.to_string()),
    };
    let mut selections = Vec::with_capacity(config.methods.len());
    for method in &config.methods {
        let picked = match method {
            Method::EbicR { zeta } => {
                let sel_cfg = SelectorConfig {
                    zeta: *zeta,
                    var_floor_rel: config.var_floor_rel,
                    max_path: k_eff,
                };
                select_model(&dataset.a, &dataset.y, &path, &sel_cfg, &structure)
                    .map(|(support, _)| support)
            }
            Method::Oracle => oracle_select(&path, config.k_b),
            Method::Exhaustive => {
                let sel_cfg = SelectorConfig {
                    var_floor_rel: config.var_floor_rel,
                    max_path: k_eff,
                    ..SelectorConfig::default()
                };
                exhaustive_select(&dataset.a, &dataset.y, k_eff, &sel_cfg, &structure)
                    .map(|(support, _)| support)
            }
        };
        match picked {
            Ok(s) => selections.push(s),
            Err(e) => return excluded(e.to_string()),
        }
    }
    TrialOutcome::Completed {
        truth,
        path_len: path.len(),
        selections,
    }
}

/// Runs the whole grid. Trials parallelize across the current rayon pool;
/// the collected outcomes keep trial order, so the aggregate is independent
/// of scheduling.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult, super::ConfigError> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.grid.len() * config.methods.len());
    let mut excluded_total = 0usize;
    let mut first_exclusion: Option<String> = None;
    for g in 0..config.grid.len() {
        let outcomes: Vec<TrialOutcome> = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, g, t))
            .collect();
        let (_, _, grid_value) = config.grid.point(g);
        let mut completed = 0usize;
        let mut correct = vec![0usize; config.methods.len()];
        let mut k_sum = vec![0usize; config.methods.len()];
        for outcome in &outcomes {
            match outcome {
                TrialOutcome::Completed {
                    truth, selections, ..
                } => {
                    completed += 1;
                    for (m, picked) in selections.iter().enumerate() {
                        if picked == truth {
                            correct[m] += 1;
                        }
                        k_sum[m] += picked.k_b();
                    }
                }
                TrialOutcome::Excluded { reason } => {
                    excluded_total += 1;
                    if first_exclusion.is_none() {
                        first_exclusion = Some(format!(
                            "{} = {grid_value}: {reason}",
                            config.grid.variable()
                        ));
                    }
                }
            }
        }
        for (m, method) in config.methods.iter().enumerate() {
            let pcms = correct[m] as f64 / completed as f64;
            let stderr = (pcms * (1.0 - pcms) / completed as f64).sqrt();
            rows.push(ResultRow {
                grid_variable: config.grid.variable(),
                grid_value,
                method: *method,
                pcms,
                stderr,
                trials: completed,
                mean_k: k_sum[m] as f64 / completed as f64,
            });
        }
    }
    Ok(SweepResult {
        rows,
        excluded: excluded_total,
        first_exclusion,
    })
}
