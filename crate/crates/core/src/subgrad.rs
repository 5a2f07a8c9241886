//! Decentralized online subgradient method.
//!
//! No matrix inversion: each step is one subgradient move on the time-`T`
//! objective followed by a single exchange of `w_n`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::graph::Graph;
use crate::network::neighbor_sums;
use crate::rls::NodeRlsState;
use crate::synthdata::Measurement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgradParams {
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SubgradParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidConfig(format!("lambda must be in (0, 1], got {}", self.lambda)));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.alpha == 0.0 {
            return Err(Error::InvalidConfig("alpha must be positive".into()));
        }
        Ok(())
    }
}

/// Sign with the selection `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn sgn_vec(v: &DVector<f64>) -> DVector<f64> {
    v.map(sgn)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradNodeState {
    pub w: DVector<f64>,
    pub w_bar: DVector<f64>,
}

impl SubgradNodeState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            w: DVector::zeros(dim),
            w_bar: DVector::zeros(dim),
        }
    }
}

/// `2Rw − 2p + 4β(|Ω|w − w̄) + γ·sgn(w)` for one node.
pub fn node_subgradient(
    rls: &NodeRlsState,
    state: &SubgradNodeState,
    degree: usize,
    beta: f64,
    gamma: f64,
) -> DVector<f64> {
    2.0 * (&rls.r * &state.w - &rls.p)
        + (4.0 * beta) * ((degree as f64) * &state.w - &state.w_bar)
        + gamma * sgn_vec(&state.w)
}

/// Subgradient move on the current statistics followed by one exchange round.
pub fn subgrad_iteration(
    graph: &Graph,
    rls: &[NodeRlsState],
    states: &mut [SubgradNodeState],
    params: &SubgradParams,
) -> Result<()> {
    check_dim(graph.n_nodes(), rls.len())?;
    check_dim(graph.n_nodes(), states.len())?;
    let w_new: Vec<DVector<f64>> = states
        .iter()
        .enumerate()
        .map(|(n, s)| {
            check_dim(rls[n].dim(), s.w.len())?;
            let g = node_subgradient(&rls[n], s, graph.degree(n), params.beta, params.gamma);
            Ok(&s.w - params.alpha * g)
        })
        .collect::<Result<_>>()?;
    let w_bar = neighbor_sums(graph, &w_new);
    for ((s, w), wb) in states.iter_mut().zip(w_new).zip(w_bar) {
        s.w = w;
        s.w_bar = wb;
    }
    Ok(())
}

/// One time step: statistics update, then the subgradient move.
pub fn subgrad_step(
    graph: &Graph,
    rls: &mut [NodeRlsState],
    states: &mut [SubgradNodeState],
    params: &SubgradParams,
    measurements: &[Measurement],
) -> Result<()> {
    check_dim(graph.n_nodes(), measurements.len())?;
    check_dim(graph.n_nodes(), rls.len())?;
    for (r, m) in rls.iter_mut().zip(measurements) {
        r.update_statistics(&m.input, m.output)?;
    }
    subgrad_iteration(graph, rls, states, params)
}

#[derive(Debug, Clone)]
pub struct SubgradSolver {
    pub params: SubgradParams,
    pub rls: Vec<NodeRlsState>,
    pub states: Vec<SubgradNodeState>,
}

impl SubgradSolver {
    pub fn new(n_nodes: usize, dim: usize, params: SubgradParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            rls: (0..n_nodes).map(|_| NodeRlsState::new(dim, params.lambda)).collect(),
            states: (0..n_nodes).map(|_| SubgradNodeState::zeros(dim)).collect(),
        })
    }

    pub fn step(&mut self, graph: &Graph, measurements: &[Measurement]) -> Result<()> {
        subgrad_step(graph, &mut self.rls, &mut self.states, &self.params, measurements)
    }

    pub fn estimates(&self) -> Vec<DVector<f64>> {
        self.states.iter().map(|s| s.w.clone()).collect()
    }
}
