//! Unsimplified ADMM with explicit per-edge variables.
//!
//! Node `n` keeps one auxiliary copy `v_{n,i}` and one multiplier `z_{n,i}` for
//! each neighbor slot `i`, so memory grows with the degree. This form follows
//! the splitting `x_n = w_n`, `v_{n,i} = w_{g(n,i)}` literally and is used to
//! check the degree-independent updates in the parent module.

use nalgebra::{DMatrix, DVector};

use super::{soft_threshold_vec, AdmmNodeState, AdmmParams};
use crate::error::{check_dim, Error, Result};
use crate::graph::Graph;
use crate::rls::NodeRlsState;
use crate::synthdata::Measurement;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceNodeState {
    pub w: DVector<f64>,
    pub y: DVector<f64>,
    /// `z[i]` is `z_{n,i}`, the multiplier of `v_{n,i} = w_{g(n,i)}`.
    pub z: Vec<DVector<f64>>,
}

impl ReferenceNodeState {
    pub fn zeros(dim: usize, degree: usize) -> Self {
        Self {
            w: DVector::zeros(dim),
            y: DVector::zeros(dim),
            z: vec![DVector::zeros(dim); degree],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceIntermediates {
    pub x: DVector<f64>,
    /// `v[i]` is `v_{n,i}`.
    pub v: Vec<DVector<f64>>,
}

/// Inputs of the `(x_n, v_{n,·})` block subproblem of one node.
#[derive(Debug, Clone)]
pub struct BlockSubproblem<'a> {
    pub r: &'a DMatrix<f64>,
    pub p: &'a DVector<f64>,
    pub y: &'a DVector<f64>,
    pub w: &'a DVector<f64>,
    pub z: &'a [DVector<f64>],
    /// `w_{g(n,i)}` for each slot.
    pub w_neighbors: &'a [DVector<f64>],
    pub beta: f64,
    pub rho: f64,
}

impl BlockSubproblem<'_> {
    fn first_rhs(&self) -> DVector<f64> {
        2.0 * self.p - self.y + self.rho * self.w
    }

    fn slot_rhs(&self) -> Vec<DVector<f64>> {
        self.z
            .iter()
            .zip(self.w_neighbors)
            .map(|(z, wn)| self.rho * wn - z)
            .collect()
    }

    /// Closed form obtained from the partitioned inverse, given `F = [2R + cI]⁻¹`.
    pub fn closed_form(&self, f: &DMatrix<f64>) -> (DVector<f64>, Vec<DVector<f64>>) {
        let c = 2.0 * self.beta / (2.0 * self.beta + self.rho);
        let inv = 1.0 / (2.0 * self.beta + self.rho);
        let b0 = self.first_rhs();
        let slots = self.slot_rhs();
        let slot_sum = slots.iter().fold(DVector::zeros(b0.len()), |acc, b| acc + b);
        let f_b0 = f * &b0;
        let f_sum = f * &slot_sum;
        let x = &f_b0 + c * &f_sum;
        let v = slots
            .iter()
            .map(|b| c * &f_b0 + inv * b + (c * c) * &f_sum)
            .collect();
        (x, v)
    }

    /// Dense LU solve of the full `(1 + |Ω_n|)M` stationarity system.
    pub fn dense_solve(&self) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
        let m = self.p.len();
        let deg = self.z.len();
        check_dim(deg, self.w_neighbors.len())?;
        let size = m * (1 + deg);
        let mut a = DMatrix::zeros(size, size);
        let mut b = DVector::zeros(size);
        let top = 2.0 * self.r + DMatrix::identity(m, m) * (2.0 * self.beta * deg as f64 + self.rho);
        a.view_mut((0, 0), (m, m)).copy_from(&top);
        b.rows_mut(0, m).copy_from(&self.first_rhs());
        for (i, rhs) in self.slot_rhs().iter().enumerate() {
            let off = m * (1 + i);
            for k in 0..m {
                a[(k, off + k)] = -2.0 * self.beta;
                a[(off + k, k)] = -2.0 * self.beta;
                a[(off + k, off + k)] = 2.0 * self.beta + self.rho;
            }
            b.rows_mut(off, m).copy_from(rhs);
        }
        let sol = a.lu().solve(&b).ok_or(Error::SingularMatrix)?;
        let x = sol.rows(0, m).into_owned();
        let v = (0..deg).map(|i| sol.rows(m * (1 + i), m).into_owned()).collect();
        Ok((x, v))
    }
}

/// One unsimplified ADMM iteration on the current statistics (`F` must be fresh).
pub fn admm_iteration_reference(
    graph: &Graph,
    rls: &[NodeRlsState],
    states: &mut [ReferenceNodeState],
    params: &AdmmParams,
) -> Result<Vec<ReferenceIntermediates>> {
    let n_nodes = graph.n_nodes();
    check_dim(n_nodes, rls.len())?;
    check_dim(n_nodes, states.len())?;
    let rho = params.rho;

    let mut inter = Vec::with_capacity(n_nodes);
    for n in 0..n_nodes {
        let s = &states[n];
        check_dim(graph.degree(n), s.z.len())?;
        let w_neighbors: Vec<DVector<f64>> = graph.neighbors(n).iter().map(|&m| states[m].w.clone()).collect();
        let sub = BlockSubproblem {
            r: &rls[n].r,
            p: &rls[n].p,
            y: &s.y,
            w: &s.w,
            z: &s.z,
            w_neighbors: &w_neighbors,
            beta: params.beta,
            rho,
        };
        let f = rls[n]
            .f()
            .ok_or_else(|| Error::InvalidConfig("F has not been computed for this step".into()))?;
        let (x, v) = sub.closed_form(f);
        inter.push(ReferenceIntermediates { x, v });
    }

    let w_new: Vec<DVector<f64>> = (0..n_nodes)
        .map(|n| {
            let deg = graph.degree(n);
            let s = &states[n];
            let mut acc = &s.y + rho * &inter[n].x;
            for &m in graph.neighbors(n) {
                let i = graph.slot_of(m, n).expect("symmetric adjacency");
                acc += &states[m].z[i] + rho * &inter[m].v[i];
            }
            let scale = rho * (1.0 + deg as f64);
            soft_threshold_vec(&(acc / scale), params.gamma / scale)
        })
        .collect();

    for (n, s) in states.iter_mut().enumerate() {
        s.y += rho * (&inter[n].x - &w_new[n]);
        for (i, &m) in graph.neighbors(n).iter().enumerate() {
            s.z[i] += rho * (&inter[n].v[i] - &w_new[m]);
        }
    }
    for (s, w) in states.iter_mut().zip(w_new) {
        s.w = w;
    }
    Ok(inter)
}

/// Statistics update followed by one unsimplified iteration.
pub fn admm_step_reference(
    graph: &Graph,
    rls: &mut [NodeRlsState],
    states: &mut [ReferenceNodeState],
    params: &AdmmParams,
    measurements: &[Measurement],
) -> Result<Vec<ReferenceIntermediates>> {
    check_dim(graph.n_nodes(), measurements.len())?;
    for (n, (r, m)) in rls.iter_mut().zip(measurements).enumerate() {
        r.ingest(&m.input, m.output, params.beta, params.rho, graph.degree(n))?;
    }
    admm_iteration_reference(graph, rls, states, params)
}

/// Degree-independent aggregates `(w̄, z̲, z̄)` of the per-edge state.
pub fn aggregate(graph: &Graph, states: &[ReferenceNodeState]) -> Vec<AdmmNodeState> {
    let dim = states.first().map_or(0, |s| s.w.len());
    (0..graph.n_nodes())
        .map(|n| {
            let mut w_bar = DVector::zeros(dim);
            let mut z_over = DVector::zeros(dim);
            for &m in graph.neighbors(n) {
                w_bar += &states[m].w;
                let i = graph.slot_of(m, n).expect("symmetric adjacency");
                z_over += &states[m].z[i];
            }
            let z_under = states[n].z.iter().fold(DVector::zeros(dim), |acc, z| acc + z);
            AdmmNodeState {
                w: states[n].w.clone(),
                w_bar,
                y: states[n].y.clone(),
                z_under,
                z_over,
            }
        })
        .collect()
}
