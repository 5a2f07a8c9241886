use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::sweep::SweepRow;
use super::trial::TrialRecord;
use super::{ExperimentResult, TrialFailure};
use crate::analysis::ErrorBoundReport;
use crate::error::Result;
use crate::synthdata::write_measurements_csv;

pub const LEARNING_CURVE: &str = "learning_curve.csv";
pub const PER_NODE: &str = "per_node.csv";
pub const SWEEP: &str = "sweep.csv";
pub const BOUND: &str = "bound.json";
pub const MANIFEST: &str = "manifest.json";
pub const GROUND_TRUTH: &str = "ground_truth.csv";
pub const MEASUREMENTS: &str = "measurements.csv";

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Rows `algorithm,trial,t,rel_error`.
pub fn write_learning_curves<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["algorithm", "trial", "t", "rel_error"])?;
    for rec in records {
        for run in &rec.runs {
            for (i, e) in run.curve.iter().enumerate() {
                wtr.write_record([
                    run.algorithm.name(),
                    &rec.trial.to_string(),
                    &(i + 1).to_string(),
                    &e.to_string(),
                ])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Rows `algorithm,trial,snapshot_t,node,rel_error`.
pub fn write_per_node<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["algorithm", "trial", "snapshot_t", "node", "rel_error"])?;
    for rec in records {
        for run in &rec.runs {
            for snap in &run.snapshots {
                for (node, e) in snap.errors.iter().enumerate() {
                    wtr.write_record([
                        run.algorithm.name(),
                        &rec.trial.to_string(),
                        &snap.t.to_string(),
                        &node.to_string(),
                        &e.to_string(),
                    ])?;
                }
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Rows `parameter,value,algorithm,successes,mean_success_time`; the last
/// column is empty when no trial succeeded.
pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["parameter", "value", "algorithm", "successes", "mean_success_time"])?;
    for row in rows {
        wtr.write_record([
            row.parameter.name(),
            &row.value.to_string(),
            row.algorithm.name(),
            &row.successes.to_string(),
            &row.mean_success_time.map_or(String::new(), |m| m.to_string()),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub benchmark: f64,
    pub success_times: Vec<(String, Option<usize>)>,
    pub oracle_solves: usize,
    pub oracle_unconverged: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub crate_version: &'static str,
    pub config: &'a ExperimentConfig,
    pub master_seed: u64,
    pub graph_seed: Option<u64>,
    pub trial_seeds: Vec<u64>,
    pub n_edges: usize,
    pub trials: Vec<TrialSummary>,
    pub failures: &'a [TrialFailure],
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a ExperimentConfig, result: &'a ExperimentResult) -> Self {
        Self {
            crate_version: env!("CARGO_PKG_VERSION"),
            config,
            master_seed: config.seed,
            graph_seed: config.graph.edge_list.is_none().then(|| config.graph_seed()),
            trial_seeds: (0..config.trials).map(|t| config.trial_seed(t)).collect(),
            n_edges: result.graph.n_edges(),
            trials: result
                .records
                .iter()
                .map(|r| TrialSummary {
                    trial: r.trial,
                    seed: r.seed,
                    benchmark: r.benchmark,
                    success_times: r.runs.iter().map(|run| (run.algorithm.name().to_owned(), run.success_time)).collect(),
                    oracle_solves: r.oracle_solves,
                    oracle_unconverged: r.oracle_unconverged,
                })
                .collect(),
            failures: &result.failures,
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut out = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(dir.join(name))
}

/// Writes the learning curves, per-node errors, manifest and, when
/// requested, the generated data.
pub fn write_experiment(dir: &Path, config: &ExperimentConfig, result: &ExperimentResult) -> Result<()> {
    write_learning_curves(create(dir, LEARNING_CURVE)?, &result.records)?;
    write_per_node(create(dir, PER_NODE)?, &result.records)?;
    write_json(dir, MANIFEST, &Manifest::new(config, result))?;
    if !result.data.is_empty() {
        let mut truth = create(dir, GROUND_TRUTH)?;
        let mut meas = create(dir, MEASUREMENTS)?;
        for (i, (trial, data)) in result.data.iter().enumerate() {
            data.truth.write_csv(&mut truth, *trial, i == 0)?;
            write_measurements_csv(&mut meas, *trial, &data.measurements, i == 0)?;
        }
        truth.flush()?;
        meas.flush()?;
    }
    Ok(())
}

pub fn write_sweep_file(dir: &Path, rows: &[SweepRow]) -> Result<()> {
    write_sweep(create(dir, SWEEP)?, rows)
}

pub fn write_bound(dir: &Path, report: &ErrorBoundReport) -> Result<PathBuf> {
    write_json(dir, BOUND, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Algorithm;
    use crate::harness::sweep::SweepParam;
    use crate::harness::trial::{AlgorithmRun, Snapshot};

    fn record() -> TrialRecord {
        TrialRecord {
            trial: 2,
            seed: 9,
            benchmark: 0.5,
            runs: vec![AlgorithmRun {
                algorithm: Algorithm::Admm,
                curve: vec![1.0, 0.25],
                snapshots: vec![Snapshot {
                    t: 2,
                    errors: vec![0.5, 0.125],
                }],
                success_time: None,
                step_seconds: 0.0,
            }],
            oracle_solves: 1,
            oracle_unconverged: 0,
        }
    }

    #[test]
    fn learning_curve_layout() {
        let mut buf = Vec::new();
        write_learning_curves(&mut buf, &[record()]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "algorithm,trial,t,rel_error\nadmm,2,1,1\nadmm,2,2,0.25\n"
        );
    }

    #[test]
    fn per_node_layout() {
        let mut buf = Vec::new();
        write_per_node(&mut buf, &[record()]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "algorithm,trial,snapshot_t,node,rel_error\nadmm,2,2,0,0.5\nadmm,2,2,1,0.125\n"
        );
    }

    #[test]
    fn sweep_layout() {
        let rows = [
            SweepRow {
                parameter: SweepParam::Gamma,
                value: 0.5,
                algorithm: Algorithm::Admm,
                successes: 3,
                mean_success_time: Some(120.5),
            },
            SweepRow {
                parameter: SweepParam::Gamma,
                value: 0.5,
                algorithm: Algorithm::Subgrad,
                successes: 0,
                mean_success_time: None,
            },
        ];
        let mut buf = Vec::new();
        write_sweep(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "parameter,value,algorithm,successes,mean_success_time\ngamma,0.5,admm,3,120.5\ngamma,0.5,subgrad,0,\n"
        );
    }
}
