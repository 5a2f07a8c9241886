//! Experiment orchestration: configs, trials, sweeps and CSV/JSON output.

pub mod config;
pub mod metrics;
pub mod output;
pub mod sweep;
pub mod trial;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Algorithm, ExperimentConfig};
pub use metrics::{detect_success, relative_error, SuccessCriterion};
pub use sweep::{run_sweep, SweepParam, SweepRow};
pub use trial::{run_trial, run_trial_with_data, AlgorithmRun, TrialData, TrialRecord};

use crate::analysis::{analyze, uniform_input_correlation, ErrorBoundReport};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::synthdata::generate_ground_truth;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub graph: Graph,
    pub records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
    pub data: Vec<(usize, TrialData)>,
}

impl ExperimentResult {
    pub fn mean_benchmark(&self) -> Option<f64> {
        if self.records.is_empty() {
            return None;
        }
        Some(self.records.iter().map(|r| r.benchmark).sum::<f64>() / self.records.len() as f64)
    }

    pub fn success_count(&self, algorithm: Algorithm) -> usize {
        self.records
            .iter()
            .filter_map(|r| r.run(algorithm))
            .filter(|run| run.success_time.is_some())
            .count()
    }
}

fn pool(parallel: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallel {
        if n == 0 {
            return Err(Error::InvalidConfig("parallel must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Runs every trial, in parallel over trials. Failed trials are reported in
/// `failures`; records come back ordered by trial.
pub fn run_experiment(config: &ExperimentConfig, parallel: Option<usize>) -> Result<ExperimentResult> {
    config.validate()?;
    let graph = config.build_graph()?;
    let outcomes: Vec<_> = pool(parallel)?.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| (trial, run_trial_with_data(config, &graph, trial, config.dump_data)))
            .collect()
    });
    let mut result = ExperimentResult {
        graph,
        records: Vec::new(),
        failures: Vec::new(),
        data: Vec::new(),
    };
    for (trial, outcome) in outcomes {
        match outcome {
            Ok((record, data)) => {
                result.records.push(record);
                if let Some(d) = data {
                    result.data.push((trial, d));
                }
            }
            Err(e) => result.failures.push(TrialFailure {
                trial,
                message: e.to_string(),
            }),
        }
    }
    Ok(result)
}

/// Error-bound report for the subgradient method on the configured network,
/// using the analytic input correlation and the largest true weight over trial 0.
pub fn bound_report(config: &ExperimentConfig) -> Result<ErrorBoundReport> {
    config.validate()?;
    let graph = config.build_graph()?;
    let truth = generate_ground_truth(&graph, &config.truth_spec(), config.trial_seed(0))?;
    let max_norm = |ws: &[DVector<f64>]| ws.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let worst = (0..=truth.horizon())
        .max_by(|&a, &b| max_norm(truth.at(a)).total_cmp(&max_norm(truth.at(b))))
        .unwrap_or(0);
    let rs = vec![uniform_input_correlation(config.dim); graph.n_nodes()];
    let p = &config.params;
    analyze(&graph, &rs, truth.at(worst), p.alpha, p.beta, p.gamma, p.lambda)
}
