use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mtrls::admm::reference::{admm_step_reference, aggregate, ReferenceNodeState};
use mtrls::admm::{admm_step, AdmmNodeState, AdmmParams};
use mtrls::harness::{self, output, Algorithm, ExperimentConfig, SweepParam};
use mtrls::oracle::{OracleSettings, StaticProblem};
use mtrls::rls::NodeRlsState;
use mtrls::synthdata::{generate_ground_truth, MeasurementSource, NoiseModel, TruthSpec};
use mtrls::Graph;

#[derive(Parser)]
#[command(name = "mtrls", version, about = "Decentralized sparse multitask RLS simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset used when no config file is given.
    #[arg(long, default_value = "scenario1", value_parser = ["scenario1", "scenario2"])]
    scenario: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    parallel: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p).with_context(|| format!("loading {}", p.display()))?,
            None if self.scenario == "scenario2" => ExperimentConfig::scenario2(),
            None => ExperimentConfig::scenario1(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn out_dir(cfg: &ExperimentConfig) -> &Path {
    cfg.out_dir.as_deref().unwrap_or(Path::new("."))
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of one configuration.
    Run(Common),
    /// Vary one regularization parameter and tabulate success counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values; a default grid is used when omitted.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Write the subgradient error-bound analysis to bound.json.
    Bound(Common),
    /// Quick numerical self-checks.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn run(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let result = harness::run_experiment(&cfg, common.parallel)?;
    let dir = out_dir(&cfg);
    output::write_experiment(dir, &cfg, &result)?;
    for f in &result.failures {
        eprintln!("trial {} failed: {}", f.trial, f.message);
    }
    if let Some(b) = result.mean_benchmark() {
        println!("mean oracle error at t={}: {b:.4}", cfg.horizon);
    }
    for a in [Algorithm::Admm, Algorithm::Subgrad] {
        if cfg.runs(a) {
            let times: Vec<usize> = result
                .records
                .iter()
                .filter_map(|r| r.run(a)?.success_time)
                .collect();
            let mean = times.iter().sum::<usize>() as f64 / times.len().max(1) as f64;
            println!("{a}: {}/{} successes, mean success time {mean:.1}", times.len(), result.records.len());
        }
    }
    println!("wrote {}", dir.display());
    if !result.failures.is_empty() {
        bail!("{} trial(s) failed", result.failures.len());
    }
    Ok(())
}

fn sweep(common: &Common, param: SweepParam, values: &[f64]) -> Result<()> {
    let cfg = common.load()?;
    let values = if values.is_empty() { param.default_values() } else { values.to_vec() };
    let rows = harness::run_sweep(&cfg, param, &values, common.parallel)?;
    output::write_sweep_file(out_dir(&cfg), &rows)?;
    for r in &rows {
        let mean = r.mean_success_time.map_or("-".to_owned(), |m| format!("{m:.1}"));
        println!("{}={} {}: {}/{} successes, mean {mean}", r.parameter, r.value, r.algorithm, r.successes, cfg.trials);
    }
    Ok(())
}

fn bound(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let report = harness::bound_report(&cfg)?;
    let path = output::write_bound(out_dir(&cfg), &report)?;
    println!(
        "sigma_norm {:.6}, assumption 4 {}, assumption 5 {}, bound {}",
        report.sigma_norm,
        report.assumption4_ok,
        report.assumption5_ok,
        report.bound.map_or("none".to_owned(), |b| format!("{b:.6}"))
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn check(name: &str, value: f64, tol: f64) -> bool {
    let ok = value < tol;
    println!("{} {name}: {value:.3e} (< {tol:.0e})", if ok { "PASS" } else { "FAIL" });
    ok
}

fn selftest(seed: u64) -> Result<bool> {
    let graph = Graph::random(5, 6, seed)?;
    let spec = TruthSpec {
        dim: 4,
        n_zeros: 2,
        noise_level: 0.1,
        drift_level: 0.02,
        horizon: 50,
        noise: NoiseModel::NonNegative,
    };
    let truth = generate_ground_truth(&graph, &spec, seed)?;
    let mut source = MeasurementSource::new(seed, 5);
    let params = AdmmParams {
        rho: 2.0,
        ..AdmmParams::default()
    };

    let mut rls: Vec<_> = (0..5).map(|_| NodeRlsState::new(4, params.lambda)).collect();
    let mut rls_ref = rls.clone();
    let mut fast: Vec<_> = (0..5).map(|_| AdmmNodeState::zeros(4)).collect();
    let mut slow: Vec<_> = (0..5).map(|n| ReferenceNodeState::zeros(4, graph.degree(n))).collect();
    let mut gap: f64 = 0.0;
    for t in 1..=50 {
        let data = source.draw(&truth, t)?;
        admm_step(&graph, &mut rls, &mut fast, &params, &data)?;
        admm_step_reference(&graph, &mut rls_ref, &mut slow, &params, &data)?;
        for (a, b) in fast.iter().zip(aggregate(&graph, &slow)) {
            gap = gap.max((&a.w - &b.w).amax());
        }
    }
    let mut ok = check("simplified ADMM matches reference", gap, 1e-10);

    let problem = StaticProblem::from_rls(&graph, &rls, params.beta, params.gamma)?;
    let sol = problem.solve(&OracleSettings::default())?;
    ok &= check("oracle optimality residual", sol.residual, 1e-8);
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(c) => run(c).map(|_| true),
        Command::Sweep { common, param, values } => sweep(common, *param, values).map(|_| true),
        Command::Bound(c) => bound(c).map(|_| true),
        Command::Selftest { seed } => selftest(*seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
