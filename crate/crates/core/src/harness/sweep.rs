use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig};
use super::{run_experiment, ExperimentResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Beta,
    Gamma,
    Lambda,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::Gamma => "gamma",
            SweepParam::Lambda => "lambda",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::Beta | SweepParam::Gamma => vec![0.1, 0.5, 1.0, 2.0, 5.0],
            SweepParam::Lambda => vec![0.98, 0.99, 0.995, 0.999],
        }
    }

    pub fn apply(self, config: &mut ExperimentConfig, value: f64) {
        match self {
            SweepParam::Beta => config.params.beta = value,
            SweepParam::Gamma => config.params.gamma = value,
            SweepParam::Lambda => config.params.lambda = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(SweepParam::Beta),
            "gamma" => Ok(SweepParam::Gamma),
            "lambda" => Ok(SweepParam::Lambda),
            _ => Err(Error::InvalidConfig(format!("cannot sweep '{s}'; use beta, gamma or lambda"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: SweepParam,
    pub value: f64,
    pub algorithm: Algorithm,
    pub successes: usize,
    /// Mean over successful trials; `None` when there were none.
    pub mean_success_time: Option<f64>,
}

/// Success counts and mean success times of every online algorithm.
pub fn aggregate(parameter: SweepParam, value: f64, result: &ExperimentResult) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for algorithm in [Algorithm::Admm, Algorithm::Subgrad] {
        let times: Vec<usize> = result
            .records
            .iter()
            .filter_map(|r| r.run(algorithm))
            .filter_map(|run| run.success_time)
            .collect();
        if !result.records.iter().any(|r| r.run(algorithm).is_some()) {
            continue;
        }
        let mean = (!times.is_empty()).then(|| times.iter().sum::<usize>() as f64 / times.len() as f64);
        rows.push(SweepRow {
            parameter,
            value,
            algorithm,
            successes: times.len(),
            mean_success_time: mean,
        });
    }
    rows
}

pub fn run_sweep(
    config: &ExperimentConfig,
    parameter: SweepParam,
    values: &[f64],
    parallel: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let mut rows = Vec::new();
    for &value in values {
        let mut cfg = config.clone();
        parameter.apply(&mut cfg, value);
        let result = run_experiment(&cfg, parallel)?;
        rows.extend(aggregate(parameter, value, &result));
    }
    Ok(rows)
}
