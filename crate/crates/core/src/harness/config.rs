use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::SuccessCriterion;
use crate::admm::AdmmParams;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::OracleSettings;
use crate::seeds::{self, Purpose};
use crate::subgrad::SubgradParams;
use crate::synthdata::{NoiseModel, TruthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Admm,
    Subgrad,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Admm, Algorithm::Subgrad, Algorithm::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Admm => "admm",
            Algorithm::Subgrad => "subgrad",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSpec {
    pub nodes: usize,
    pub edges: usize,
    /// Topology seed; derived from the master seed when absent.
    pub seed: Option<u64>,
    /// Edge-list file; overrides `nodes`, `edges` and `seed`.
    pub edge_list: Option<PathBuf>,
}

impl Default for GraphSpec {
    fn default() -> Self {
        Self {
            nodes: 20,
            edges: 40,
            seed: None,
            edge_list: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub alpha: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            lambda: 0.995,
            beta: 1.0,
            gamma: 1.0,
            rho: 1.0,
            alpha: 5e-4,
        }
    }
}

impl Params {
    pub fn admm(&self) -> AdmmParams {
        AdmmParams {
            lambda: self.lambda,
            beta: self.beta,
            gamma: self.gamma,
            rho: self.rho,
        }
    }

    pub fn subgrad(&self) -> SubgradParams {
        SubgradParams {
            alpha: self.alpha,
            lambda: self.lambda,
            beta: self.beta,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Solve the benchmark problem every `every` steps (the final step is always solved).
    pub every: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let s = OracleSettings::default();
        Self {
            tol: s.tol,
            max_iter: s.max_iter,
            every: 1,
        }
    }
}

impl OracleConfig {
    pub fn settings(&self) -> OracleSettings {
        OracleSettings {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub dim: usize,
    pub n_zeros: usize,
    pub noise_level: f64,
    pub drift_level: f64,
    pub noise: NoiseModel,
    pub horizon: usize,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub params: Params,
    pub seed: u64,
    pub oracle: OracleConfig,
    pub snapshots: Vec<usize>,
    pub success: SuccessCriterion,
    pub out_dir: Option<PathBuf>,
    /// Also write `ground_truth.csv` and `measurements.csv`.
    pub dump_data: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::scenario1()
    }
}

impl ExperimentConfig {
    /// Noise bound 0.1, drift bound 0.02.
    pub fn scenario1() -> Self {
        Self {
            graph: GraphSpec::default(),
            dim: 20,
            n_zeros: 18,
            noise_level: 0.1,
            drift_level: 0.02,
            noise: NoiseModel::NonNegative,
            horizon: 1000,
            trials: 30,
            algorithms: Algorithm::ALL.to_vec(),
            params: Params::default(),
            seed: 2017,
            oracle: OracleConfig::default(),
            snapshots: vec![200, 500],
            success: SuccessCriterion::default(),
            out_dir: None,
            dump_data: false,
        }
    }

    /// Noise bound 0.3, drift bound 0.05.
    pub fn scenario2() -> Self {
        Self {
            noise_level: 0.3,
            drift_level: 0.05,
            ..Self::scenario1()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.horizon < 1 {
            return bad("horizon must be at least 1".into());
        }
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if self.n_zeros >= self.dim {
            return Err(Error::InvalidSparsity {
                n_zeros: self.n_zeros,
                dim: self.dim,
            });
        }
        if !(self.noise_level >= 0.0 && self.drift_level >= 0.0) {
            return bad("noise_level and drift_level must be non-negative".into());
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required".into());
        }
        if self.oracle.every == 0 {
            return bad("oracle.every must be positive".into());
        }
        if self.oracle.tol.is_nan() || self.oracle.tol <= 0.0 {
            return bad("oracle.tol must be positive".into());
        }
        if self.success.window == 0 || self.success.factor.is_nan() || self.success.factor <= 0.0 {
            return bad("success window and factor must be positive".into());
        }
        if self.graph.edge_list.is_none() && self.graph.nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        if self.algorithms.contains(&Algorithm::Admm) {
            self.params.admm().validate()?;
        }
        if self.algorithms.contains(&Algorithm::Subgrad) {
            self.params.subgrad().validate()?;
        }
        Ok(())
    }

    pub fn graph_seed(&self) -> u64 {
        self.graph
            .seed
            .unwrap_or_else(|| seeds::derive(self.seed, &[Purpose::Graph as u64]))
    }

    pub fn build_graph(&self) -> Result<Graph> {
        match &self.graph.edge_list {
            Some(path) => Graph::from_edge_list(&std::fs::read_to_string(path)?),
            None => Graph::random(self.graph.nodes, self.graph.edges, self.graph_seed()),
        }
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        seeds::derive(self.seed, &[Purpose::Trial as u64, trial as u64])
    }

    pub fn truth_spec(&self) -> TruthSpec {
        TruthSpec {
            dim: self.dim,
            n_zeros: self.n_zeros,
            noise_level: self.noise_level,
            drift_level: self.drift_level,
            horizon: self.horizon,
            noise: self.noise,
        }
    }

    pub fn runs(&self, algorithm: Algorithm) -> bool {
        self.algorithms.contains(&algorithm)
    }
}
