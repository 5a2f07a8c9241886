//! Acceptance suite. Each test prints one `PASS`/`FAIL` line and asserts it.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mtrls::admm::reference::{admm_step_reference, aggregate, BlockSubproblem, ReferenceNodeState};
use mtrls::admm::{admm_step, soft_threshold, AdmmNodeState, AdmmParams, AdmmSolver};
use mtrls::analysis::{analyze, check_assumption4, uniform_input_correlation};
use mtrls::harness::{run_experiment, Algorithm, ExperimentConfig, ExperimentResult};
use mtrls::oracle::{OracleSettings, StaticProblem};
use mtrls::rls::{block_inverse, NodeRlsState};
use mtrls::subgrad::{SubgradParams, SubgradSolver};
use mtrls::synthdata::{generate_ground_truth, initial_similar_weights, MeasurementSource, NoiseModel, TruthSpec};
use mtrls::Graph;

fn report(name: &str, ok: bool, detail: String) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let max = n * (n - 1) / 2;
    let m = rng.random_range((n - 1).min(max)..=max);
    Graph::random(n, m, rng.random()).unwrap()
}

fn random_pd(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(m, m) * 0.2
}

fn random_vec(rng: &mut ChaCha8Rng, m: usize) -> DVector<f64> {
    DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0))
}

fn spec(dim: usize, n_zeros: usize, horizon: usize) -> TruthSpec {
    TruthSpec {
        dim,
        n_zeros,
        noise_level: 0.1,
        drift_level: 0.02,
        horizon,
        noise: NoiseModel::NonNegative,
    }
}

/// Streams `horizon` steps of synthetic data into fresh statistics.
fn streamed_statistics(graph: &Graph, dim: usize, lambda: f64, horizon: usize, seed: u64) -> Vec<NodeRlsState> {
    let truth = generate_ground_truth(graph, &spec(dim, dim / 2, horizon), seed).unwrap();
    let mut source = MeasurementSource::new(seed, graph.n_nodes());
    let mut rls: Vec<_> = (0..graph.n_nodes()).map(|_| NodeRlsState::new(dim, lambda)).collect();
    for t in 1..=horizon {
        for (r, m) in rls.iter_mut().zip(source.draw(&truth, t).unwrap()) {
            r.update_statistics(&m.input, m.output).unwrap();
        }
    }
    rls
}

#[test]
fn simplified_admm_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for instance in 0..20 {
        let n = rng.random_range(2..=10);
        let dim = rng.random_range(2..=6);
        let graph = random_graph(&mut rng, n);
        let params = AdmmParams {
            lambda: if instance % 5 == 0 { 1.0 } else { rng.random_range(0.9..1.0) },
            beta: rng.random_range(0.1..3.0),
            gamma: rng.random_range(0.0..2.0),
            rho: rng.random_range(0.2..10.0),
        };
        let seed = rng.random();
        let truth = generate_ground_truth(&graph, &spec(dim, dim / 2, 50), seed).unwrap();
        let mut source = MeasurementSource::new(seed, n);
        let mut rls: Vec<_> = (0..n).map(|_| NodeRlsState::new(dim, params.lambda)).collect();
        let mut rls_ref = rls.clone();
        let mut fast: Vec<_> = (0..n).map(|_| AdmmNodeState::zeros(dim)).collect();
        let mut slow: Vec<_> = (0..n).map(|k| ReferenceNodeState::zeros(dim, graph.degree(k))).collect();
        for t in 1..=50 {
            let data = source.draw(&truth, t).unwrap();
            admm_step(&graph, &mut rls, &mut fast, &params, &data).unwrap();
            admm_step_reference(&graph, &mut rls_ref, &mut slow, &params, &data).unwrap();
            for (a, b) in fast.iter().zip(aggregate(&graph, &slow)) {
                worst = worst.max((&a.w - &b.w).amax());
                worst = worst.max((&a.w_bar - &b.w_bar).amax());
            }
        }
    }
    report(
        "simplified ADMM equivalence (20 instances, 50 steps)",
        worst < 1e-10,
        format!("max abs diff {worst:.3e} (< 1e-10)"),
    );
}

#[test]
fn matrix_inversion_lemma_and_block_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_closed: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.random_range(2..=6);
        let deg = rng.random_range(1..=5);
        let (beta, rho) = (rng.random_range(0.1..3.0), rng.random_range(0.2..10.0));
        let r = random_pd(&mut rng, m);
        let p = random_vec(&mut rng, m);
        let y = random_vec(&mut rng, m);
        let w = random_vec(&mut rng, m);
        let z: Vec<_> = (0..deg).map(|_| random_vec(&mut rng, m)).collect();
        let wn: Vec<_> = (0..deg).map(|_| random_vec(&mut rng, m)).collect();
        let shift = rho + 2.0 * beta * rho * deg as f64 / (2.0 * beta + rho);
        let f = (2.0 * &r + DMatrix::identity(m, m) * shift).try_inverse().unwrap();
        let sub = BlockSubproblem {
            r: &r,
            p: &p,
            y: &y,
            w: &w,
            z: &z,
            w_neighbors: &wn,
            beta,
            rho,
        };
        let (x_c, v_c) = sub.closed_form(&f);
        let (x_d, v_d) = sub.dense_solve().unwrap();
        worst_closed = worst_closed.max((&x_c - &x_d).amax());
        for (a, b) in v_c.iter().zip(&v_d) {
            worst_closed = worst_closed.max((a - b).amax());
        }
    }

    let mut worst_block: f64 = 0.0;
    for _ in 0..20 {
        let full = random_pd(&mut rng, 6) + DMatrix::identity(6, 6);
        let k = rng.random_range(1..=5);
        let a = full.view((0, 0), (k, k)).into_owned();
        let b = full.view((0, k), (k, 6 - k)).into_owned();
        let c = full.view((k, 0), (6 - k, k)).into_owned();
        let d = full.view((k, k), (6 - k, 6 - k)).into_owned();
        let inv = block_inverse(&a, &b, &c, &d).unwrap().assemble();
        worst_block = worst_block.max((&full * inv - DMatrix::identity(6, 6)).amax());
    }
    report(
        "matrix inversion lemma closed form vs dense block solve",
        worst_closed < 1e-8 && worst_block < 1e-10,
        format!("closed-form diff {worst_closed:.3e} (< 1e-8), block inverse residual {worst_block:.3e} (< 1e-10)"),
    );
}

#[test]
fn rank_one_path_matches_from_scratch() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (m, beta, rho, deg) = (4, 1.3, 2.5, 3);
    let shift = rho + 2.0 * beta * rho * deg as f64 / (2.0 * beta + rho);
    let mut state = NodeRlsState::new(m, 1.0);
    state.refresh_f(beta, rho, deg).unwrap();
    let mut r = DMatrix::zeros(m, m);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = DVector::from_fn(m, |_, _| rng.random::<f64>());
        let d = rng.random_range(-1.0..1.0);
        state.ingest(&u, d, beta, rho, deg).unwrap();
        r += &u * u.transpose();
        let direct = (2.0 * &r + DMatrix::identity(m, m) * shift).try_inverse().unwrap();
        worst = worst.max((state.f().unwrap() - direct).amax());
    }
    report(
        "lambda = 1 rank-one F updates (100 steps)",
        worst < 1e-8,
        format!("max abs diff {worst:.3e} (< 1e-8)"),
    );
}

#[test]
fn oracle_optimality_and_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let settings = OracleSettings::default();
    let mut worst_residual: f64 = 0.0;
    for _ in 0..5 {
        let n = rng.random_range(2..=6);
        let graph = random_graph(&mut rng, n);
        let rls = streamed_statistics(&graph, 4, 0.99, 100, rng.random());
        let problem = StaticProblem::from_rls(&graph, &rls, 1.0, 1.0).unwrap();
        worst_residual = worst_residual.max(problem.solve(&settings).unwrap().residual);
    }

    let graph = Graph::ring(5).unwrap();
    let r: Vec<_> = (0..5).map(|_| random_pd(&mut rng, 4)).collect();
    let p: Vec<_> = (0..5).map(|_| random_vec(&mut rng, 4)).collect();
    let problem = StaticProblem::new(&graph, r.clone(), p.clone(), 0.0, 0.0).unwrap();
    // The residual bounds the distance to R⁻¹p only up to 1/λmin(2R).
    let strict = OracleSettings {
        tol: 1e-10,
        ..settings
    };
    let sol = problem.solve(&strict).unwrap();
    let mut ls_gap: f64 = 0.0;
    for ((rn, pn), wn) in r.iter().zip(&p).zip(&sol.w) {
        let direct = rn.clone().lu().solve(pn).unwrap();
        ls_gap = ls_gap.max((wn - direct).amax());
    }
    report(
        "oracle optimality residual and least-squares match",
        worst_residual < 1e-8 && ls_gap < 1e-8,
        format!("residual {worst_residual:.3e} (< 1e-8), gap to R^-1 p {ls_gap:.3e} (< 1e-8)"),
    );
}

#[test]
fn frozen_statistics_admm_converges_to_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let tight = OracleSettings {
        tol: 1e-11,
        max_iter: 1_000_000,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let n = rng.random_range(3..=10);
        let dim = rng.random_range(2..=6);
        let graph = random_graph(&mut rng, n);
        let params = AdmmParams::default();
        let rls = streamed_statistics(&graph, dim, params.lambda, 200, rng.random());
        let target = StaticProblem::from_rls(&graph, &rls, params.beta, params.gamma)
            .unwrap()
            .solve(&tight)
            .unwrap();
        let mut solver = AdmmSolver::new(n, dim, params).unwrap();
        solver.rls = rls;
        solver.iterate_frozen(&graph, 2000).unwrap();
        let num: f64 = solver.estimates().iter().zip(&target.w).map(|(a, b)| (a - b).norm_squared()).sum();
        let den: f64 = target.w.iter().map(|b| b.norm_squared()).sum();
        worst = worst.max((num / den).sqrt());
    }
    report(
        "frozen-statistics ADMM reaches the oracle within 2000 iterations",
        worst < 1e-4,
        format!("worst relative gap {worst:.3e} (< 1e-4)"),
    );
}

#[test]
fn initial_weights_solve_stationarity_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(2..=20);
        let graph = random_graph(&mut rng, n);
        let phis: Vec<_> = (0..n).map(|_| DVector::from_fn(2, |_, _| rng.random::<f64>())).collect();
        let w = initial_similar_weights(&graph, &phis).unwrap();
        for node in 0..n {
            let mut lhs = &w[node] * (1.0 + graph.neighbors(node).len() as f64);
            for &m in graph.neighbors(node) {
                lhs -= &w[m];
            }
            worst = worst.max((lhs - &phis[node]).amax());
        }
    }
    report(
        "initial weights satisfy (I + L) w = phi",
        worst < 1e-10,
        format!("max residual {worst:.3e} (< 1e-10)"),
    );
}

fn scenario(which: u8) -> &'static ExperimentResult {
    static S1: OnceLock<ExperimentResult> = OnceLock::new();
    static S2: OnceLock<ExperimentResult> = OnceLock::new();
    let (cell, base) = match which {
        1 => (&S1, ExperimentConfig::scenario1()),
        _ => (&S2, ExperimentConfig::scenario2()),
    };
    cell.get_or_init(|| {
        let mut cfg = base;
        cfg.algorithms = vec![Algorithm::Admm, Algorithm::Subgrad];
        cfg.oracle.every = cfg.horizon;
        let result = run_experiment(&cfg, None).unwrap();
        assert!(result.failures.is_empty(), "{:?}", result.failures);
        result
    })
}

#[test]
fn scenario_oracle_steady_errors() {
    let e1 = scenario(1).mean_benchmark().unwrap();
    let e2 = scenario(2).mean_benchmark().unwrap();
    report(
        "scenario oracle steady error bands",
        (0.03..=0.14).contains(&e1) && (0.08..=0.34).contains(&e2),
        format!("scenario 1 {e1:.4} (in [0.03, 0.14]), scenario 2 {e2:.4} (in [0.08, 0.34])"),
    );
}

#[test]
fn scenario_admm_success_rate() {
    let mut detail = Vec::new();
    let mut ok = true;
    for which in [1, 2] {
        let r = scenario(which);
        let rate = r.success_count(Algorithm::Admm) as f64 / r.records.len() as f64;
        ok &= rate >= 0.9;
        detail.push(format!("scenario {which} {:.0}%", 100.0 * rate));
    }
    report("scenario ADMM success rate (>= 90%)", ok, detail.join(", "));
}

#[test]
fn scenario_admm_faster_than_subgradient() {
    let mut detail = Vec::new();
    let mut ok = true;
    for which in [1, 2] {
        let r = scenario(which);
        let pairs: Vec<(usize, usize)> = r
            .records
            .iter()
            .filter_map(|rec| Some((rec.run(Algorithm::Admm)?.success_time?, rec.run(Algorithm::Subgrad)?.success_time?)))
            .collect();
        let faster = pairs.iter().filter(|(a, s)| a < s).count();
        let frac = if pairs.is_empty() { 0.0 } else { faster as f64 / pairs.len() as f64 };
        ok &= frac >= 0.9;
        detail.push(format!("scenario {which} {faster}/{}", pairs.len()));
    }
    report("scenario ADMM faster than subgradient (>= 90% of paired successes)", ok, detail.join(", "));
}

#[test]
fn theorem1_error_bound_holds() {
    let (n, dim, lambda, beta, gamma, alpha) = (6, 4, 0.99, 0.5, 0.5, 4e-3);
    let graph = Graph::ring(n).unwrap();
    let truth_spec = TruthSpec {
        dim,
        n_zeros: 2,
        noise_level: 0.2,
        drift_level: 0.0,
        horizon: 2000,
        noise: NoiseModel::ZeroMean,
    };
    let truth = generate_ground_truth(&graph, &truth_spec, 77).unwrap();
    let w_true = truth.at(0).to_vec();
    let rs = vec![uniform_input_correlation(dim); n];
    let bound_report = analyze(&graph, &rs, &w_true, alpha, beta, gamma, lambda).unwrap();

    let params = SubgradParams {
        alpha,
        lambda,
        beta,
        gamma,
    };
    let trials = 200;
    let mut mean_error = vec![DVector::zeros(dim); n];
    for trial in 0..trials {
        let mut source = MeasurementSource::new(1000 + trial, n);
        let mut solver = SubgradSolver::new(n, dim, params).unwrap();
        for t in 1..=truth_spec.horizon {
            solver.step(&graph, &source.draw(&truth, t).unwrap()).unwrap();
        }
        for ((acc, w), wt) in mean_error.iter_mut().zip(solver.estimates()).zip(&w_true) {
            *acc += (w - wt) / trials as f64;
        }
    }
    let observed = mean_error.iter().map(|e| e.norm_squared()).sum::<f64>().sqrt();
    let bound = bound_report.bound;

    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut a4_uniform = true;
    let mut contractive = true;
    for _ in 0..50 {
        let ring = Graph::ring(rng.random_range(3..=8)).unwrap();
        let m = rng.random_range(1..=4);
        let rs: Vec<_> = (0..ring.n_nodes()).map(|_| random_pd(&mut rng, m)).collect();
        let (b, lam) = (rng.random_range(0.01..5.0), rng.random_range(0.5..0.999));
        a4_uniform &= check_assumption4(&ring, &rs, b, lam).margin > 0.0;

        let size = rng.random_range(3..=8);
        let g = random_graph(&mut rng, size);
        let rs: Vec<_> = (0..g.n_nodes()).map(|_| random_pd(&mut rng, m)).collect();
        let ws: Vec<_> = (0..g.n_nodes()).map(|_| random_vec(&mut rng, m)).collect();
        let probe = analyze(&g, &rs, &ws, 1.0, b, 1.0, lam).unwrap();
        let a = rng.random_range(0.05..1.95) / probe.delta_max;
        let rep = analyze(&g, &rs, &ws, a, b, 1.0, lam).unwrap();
        if rep.assumption4_ok && rep.assumption5_ok {
            contractive &= rep.sigma_norm < 1.0;
        }
    }

    let within = bound.is_some_and(|b| observed <= b);
    report(
        "subgradient steady error within the analytic bound",
        within && bound_report.assumption4_ok && bound_report.assumption5_ok && a4_uniform && contractive,
        format!(
            "||mean f(T)|| {observed:.4e} vs bound {}, assumption 4 margin positive on rings {a4_uniform}, ||Sigma|| < 1 under assumptions 4-5 {contractive}",
            bound.map_or("none".into(), |b| format!("{b:.4e}"))
        ),
    );
}

#[test]
fn soft_threshold_is_the_prox_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut failures = 0;
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let lam = rng.random_range(0.0..3.0);
        let rho = rng.random_range(0.1..10.0);
        let v = rng.random_range(-5.0..5.0);
        let h = |x: f64| lam * x.abs() + 0.5 * rho * (x - v) * (x - v);
        let s = soft_threshold(v, lam / rho);
        let grid_best = (0..=6000)
            .map(|k| h(v - 3.0 + k as f64 * 1e-3))
            .fold(f64::INFINITY, f64::min);
        let excess = h(s) - grid_best;
        worst_excess = worst_excess.max(excess);
        if excess > 1e-12 {
            failures += 1;
        }
    }
    report(
        "soft threshold beats a 1e-3 grid search (1000 draws)",
        failures == 0,
        format!("{failures} failures, worst h(S) - grid min {worst_excess:.3e}"),
    );
}
