//! Decentralized online ADMM with degree-independent node state.
//!
//! Each node stores `R, p` plus five vectors (`w, w̄, y, z̲, z̄`). A time step
//! runs one ADMM iteration with two neighbor exchange rounds:
//! round 1 carries `(η_n, θ_n)`, round 2 carries `w_n`.
//!
//! [`reference`] keeps the per-edge variables `v_{n,i}, z_{n,i}` explicitly
//! and serves as the oracle for this module.

pub mod reference;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::graph::Graph;
use crate::network::neighbor_sums;
use crate::rls::NodeRlsState;
use crate::synthdata::Measurement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmParams {
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self {
            lambda: 0.995,
            beta: 1.0,
            gamma: 1.0,
            rho: 1.0,
        }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidConfig(format!("lambda must be in (0, 1], got {}", self.lambda)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidConfig(format!("rho must be positive, got {}", self.rho)));
        }
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// `2β / (2β + ρ)`.
    pub fn coupling(&self) -> f64 {
        2.0 * self.beta / (2.0 * self.beta + self.rho)
    }
}

/// `S_κ(a)`: the proximal operator of `κ|·|`.
pub fn soft_threshold(a: f64, kappa: f64) -> f64 {
    if a > kappa {
        a - kappa
    } else if a < -kappa {
        a + kappa
    } else {
        0.0
    }
}

pub fn soft_threshold_vec(v: &DVector<f64>, kappa: f64) -> DVector<f64> {
    v.map(|a| soft_threshold(a, kappa))
}

/// Persistent per-node state.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmNodeState {
    pub w: DVector<f64>,
    /// `Σ_{m∈Ω_n} w_m`.
    pub w_bar: DVector<f64>,
    pub y: DVector<f64>,
    /// `Σ_i z_{n,i}`.
    pub z_under: DVector<f64>,
    /// `Σ_{g(m,i)=n} z_{m,i}`.
    pub z_over: DVector<f64>,
}

impl AdmmNodeState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            w: DVector::zeros(dim),
            w_bar: DVector::zeros(dim),
            y: DVector::zeros(dim),
            z_under: DVector::zeros(dim),
            z_over: DVector::zeros(dim),
        }
    }
}

/// Per-step quantities that are recomputed every time step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmIntermediates {
    pub x: DVector<f64>,
    pub v_under: DVector<f64>,
    pub v_over: DVector<f64>,
    pub eta: DVector<f64>,
    pub theta: DVector<f64>,
    pub eta_bar: DVector<f64>,
    pub theta_bar: DVector<f64>,
}

/// `η = F(2p − y + ρw)`, `θ = F(−z̲ + ρw̄)` from the previous-step state.
pub fn compute_eta_theta(
    rls: &NodeRlsState,
    state: &AdmmNodeState,
    params: &AdmmParams,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let dim = rls.dim();
    check_dim(dim, state.w.len())?;
    let f = rls
        .f()
        .ok_or_else(|| Error::InvalidConfig("F has not been computed for this step".into()))?;
    let rho = params.rho;
    let eta = f * (2.0 * &rls.p - &state.y + rho * &state.w);
    let theta = f * (rho * &state.w_bar - &state.z_under);
    Ok((eta, theta))
}

/// One ADMM iteration on the current statistics (`F` must be fresh).
///
/// Returns the intermediates of every node; `states` is advanced in place.
pub fn admm_iteration(
    graph: &Graph,
    rls: &[NodeRlsState],
    states: &mut [AdmmNodeState],
    params: &AdmmParams,
) -> Result<Vec<AdmmIntermediates>> {
    let n_nodes = graph.n_nodes();
    check_dim(n_nodes, rls.len())?;
    check_dim(n_nodes, states.len())?;

    let (eta, theta): (Vec<_>, Vec<_>) = rls
        .iter()
        .zip(states.iter())
        .map(|(r, s)| compute_eta_theta(r, s, params))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    // Round 1: (η, θ).
    let eta_bar = neighbor_sums(graph, &eta);
    let theta_bar = neighbor_sums(graph, &theta);

    let rho = params.rho;
    let c = params.coupling();
    let inv = 1.0 / (2.0 * params.beta + rho);
    let mut inter = Vec::with_capacity(n_nodes);
    let mut w_new = Vec::with_capacity(n_nodes);
    for (n, s) in states.iter().enumerate() {
        let deg = graph.degree(n) as f64;
        let x = &eta[n] + c * &theta[n];
        let v_under = (c * deg) * &eta[n] + (c * c * deg) * &theta[n] + inv * (rho * &s.w_bar - &s.z_under);
        let v_over = c * &eta_bar[n] + (c * c) * &theta_bar[n] + inv * ((rho * deg) * &s.w - &s.z_over);
        let scale = rho * (1.0 + deg);
        let arg = (&s.y + rho * &x + &s.z_over + rho * &v_over) / scale;
        w_new.push(soft_threshold_vec(&arg, params.gamma / scale));
        inter.push(AdmmIntermediates {
            x,
            v_under,
            v_over,
            eta: eta[n].clone(),
            theta: theta[n].clone(),
            eta_bar: eta_bar[n].clone(),
            theta_bar: theta_bar[n].clone(),
        });
    }

    // Round 2: w.
    let w_bar_new = neighbor_sums(graph, &w_new);

    for (n, ((s, w), w_bar)) in states.iter_mut().zip(w_new).zip(w_bar_new).enumerate() {
        let deg = graph.degree(n) as f64;
        let it = &inter[n];
        s.y += rho * (&it.x - &w);
        s.z_under += rho * (&it.v_under - &w_bar);
        s.z_over += rho * (&it.v_over - deg * &w);
        s.w = w;
        s.w_bar = w_bar;
    }
    Ok(inter)
}

fn ingest_all(
    graph: &Graph,
    rls: &mut [NodeRlsState],
    params: &AdmmParams,
    measurements: &[Measurement],
) -> Result<()> {
    check_dim(graph.n_nodes(), measurements.len())?;
    check_dim(graph.n_nodes(), rls.len())?;
    for (n, (r, m)) in rls.iter_mut().zip(measurements).enumerate() {
        if m.node != n {
            return Err(Error::InvalidConfig(format!("measurement for node {} in slot {n}", m.node)));
        }
        r.ingest(&m.input, m.output, params.beta, params.rho, graph.degree(n))?;
    }
    Ok(())
}

/// One time step: statistics and `F` update, then one ADMM iteration.
pub fn admm_step(
    graph: &Graph,
    rls: &mut [NodeRlsState],
    states: &mut [AdmmNodeState],
    params: &AdmmParams,
    measurements: &[Measurement],
) -> Result<Vec<AdmmIntermediates>> {
    ingest_all(graph, rls, params, measurements)?;
    admm_iteration(graph, rls, states, params)
}

/// Network-wide solver state for the online ADMM.
#[derive(Debug, Clone)]
pub struct AdmmSolver {
    pub params: AdmmParams,
    pub rls: Vec<NodeRlsState>,
    pub states: Vec<AdmmNodeState>,
}

impl AdmmSolver {
    pub fn new(n_nodes: usize, dim: usize, params: AdmmParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            rls: (0..n_nodes).map(|_| NodeRlsState::new(dim, params.lambda)).collect(),
            states: (0..n_nodes).map(|_| AdmmNodeState::zeros(dim)).collect(),
        })
    }

    pub fn step(&mut self, graph: &Graph, measurements: &[Measurement]) -> Result<()> {
        admm_step(graph, &mut self.rls, &mut self.states, &self.params, measurements).map(|_| ())
    }

    /// Runs `iterations` ADMM iterations on frozen statistics.
    pub fn iterate_frozen(&mut self, graph: &Graph, iterations: usize) -> Result<()> {
        for (n, r) in self.rls.iter_mut().enumerate() {
            r.refresh_f(self.params.beta, self.params.rho, graph.degree(n))?;
        }
        for _ in 0..iterations {
            admm_iteration(graph, &self.rls, &mut self.states, &self.params)?;
        }
        Ok(())
    }

    pub fn estimates(&self) -> Vec<DVector<f64>> {
        self.states.iter().map(|s| s.w.clone()).collect()
    }
}
