use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig};
use super::metrics::{detect_success, per_node_relative_errors, relative_error};
use crate::admm::AdmmSolver;
use crate::error::Result;
use crate::graph::Graph;
use crate::oracle::{solve_or_best, StaticProblem};
use crate::rls::NodeRlsState;
use crate::subgrad::SubgradSolver;
use crate::synthdata::{generate_ground_truth, GroundTruth, Measurement, MeasurementSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    /// `curve[t − 1]` is the relative error after step `t`.
    pub curve: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub success_time: Option<usize>,
    /// Mean wall-clock seconds per step. Not deterministic.
    pub step_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// Oracle relative error at the horizon.
    pub benchmark: f64,
    pub runs: Vec<AlgorithmRun>,
    pub oracle_solves: usize,
    pub oracle_unconverged: usize,
}

impl TrialRecord {
    pub fn run(&self, algorithm: Algorithm) -> Option<&AlgorithmRun> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }
}

/// Generated data of one trial, kept for dumping.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub truth: GroundTruth,
    pub measurements: Vec<Measurement>,
}

enum Solver {
    Admm(AdmmSolver),
    Subgrad(SubgradSolver),
    Oracle {
        stale: Vec<DVector<f64>>,
    },
}

struct Tracker {
    algorithm: Algorithm,
    solver: Solver,
    curve: Vec<f64>,
    snapshots: Vec<Snapshot>,
    seconds: f64,
}

struct OracleTrace {
    rls: Vec<NodeRlsState>,
    warm: Vec<DVector<f64>>,
    solves: usize,
    unconverged: usize,
}

impl OracleTrace {
    fn solve(&mut self, graph: &Graph, config: &ExperimentConfig) -> Result<Vec<DVector<f64>>> {
        let problem = StaticProblem::from_rls(graph, &self.rls, config.params.beta, config.params.gamma)?;
        let (solution, converged) = solve_or_best(&problem, self.warm.clone(), &config.oracle.settings())?;
        self.solves += 1;
        if !converged {
            self.unconverged += 1;
        }
        self.warm = solution.w.clone();
        Ok(solution.w)
    }
}

pub fn run_trial(config: &ExperimentConfig, graph: &Graph, trial: usize) -> Result<TrialRecord> {
    run_trial_with_data(config, graph, trial, false).map(|(r, _)| r)
}

/// Like [`run_trial`], optionally keeping the generated data.
pub fn run_trial_with_data(
    config: &ExperimentConfig,
    graph: &Graph,
    trial: usize,
    keep_data: bool,
) -> Result<(TrialRecord, Option<TrialData>)> {
    config.validate()?;
    let seed = config.trial_seed(trial);
    let n = graph.n_nodes();
    let dim = config.dim;
    let truth = generate_ground_truth(graph, &config.truth_spec(), seed)?;
    let mut source = MeasurementSource::new(seed, n);

    let mut trackers = Vec::new();
    for &algorithm in &config.algorithms {
        let solver = match algorithm {
            Algorithm::Admm => Solver::Admm(AdmmSolver::new(n, dim, config.params.admm())?),
            Algorithm::Subgrad => Solver::Subgrad(SubgradSolver::new(n, dim, config.params.subgrad())?),
            Algorithm::Oracle => Solver::Oracle {
                stale: vec![DVector::zeros(dim); n],
            },
        };
        trackers.push(Tracker {
            algorithm,
            solver,
            curve: Vec::with_capacity(config.horizon),
            snapshots: Vec::new(),
            seconds: 0.0,
        });
    }

    let mut oracle = OracleTrace {
        rls: (0..n).map(|_| NodeRlsState::new(dim, config.params.lambda)).collect(),
        warm: vec![DVector::zeros(dim); n],
        solves: 0,
        unconverged: 0,
    };
    let mut kept = Vec::new();
    let mut benchmark = None;

    for t in 1..=config.horizon {
        let data = source.draw(&truth, t)?;
        for (r, m) in oracle.rls.iter_mut().zip(&data) {
            r.update_statistics(&m.input, m.output)?;
        }
        let target = truth.at(t);
        let last = t == config.horizon;
        let mut horizon_solution = None;

        for tr in &mut trackers {
            let start = Instant::now();
            let estimate = match &mut tr.solver {
                Solver::Admm(s) => {
                    s.step(graph, &data)?;
                    s.estimates()
                }
                Solver::Subgrad(s) => {
                    s.step(graph, &data)?;
                    s.estimates()
                }
                Solver::Oracle { stale } => {
                    if last || t % config.oracle.every == 0 {
                        *stale = oracle.solve(graph, config)?;
                        if last {
                            horizon_solution = Some(stale.clone());
                        }
                    }
                    stale.clone()
                }
            };
            tr.seconds += start.elapsed().as_secs_f64();
            tr.curve.push(relative_error(&estimate, target)?);
            if config.snapshots.contains(&t) {
                tr.snapshots.push(Snapshot {
                    t,
                    errors: per_node_relative_errors(&estimate, target)?,
                });
            }
        }

        if last {
            let w = match horizon_solution {
                Some(w) => w,
                None => oracle.solve(graph, config)?,
            };
            benchmark = Some(relative_error(&w, target)?);
        }
        if keep_data {
            kept.extend(data);
        }
    }

    let benchmark = benchmark.expect("horizon is at least 1");
    let runs = trackers
        .into_iter()
        .map(|tr| AlgorithmRun {
            algorithm: tr.algorithm,
            success_time: detect_success(&tr.curve, benchmark, &config.success),
            step_seconds: tr.seconds / config.horizon as f64,
            curve: tr.curve,
            snapshots: tr.snapshots,
        })
        .collect();

    let record = TrialRecord {
        trial,
        seed,
        benchmark,
        runs,
        oracle_solves: oracle.solves,
        oracle_unconverged: oracle.unconverged,
    };
    let data = keep_data.then_some(TrialData {
        truth,
        measurements: kept,
    });
    Ok((record, data))
}
