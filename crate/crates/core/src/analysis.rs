//! Steady-state error bound of the online subgradient method.
//!
//! With true input correlations `R_n`, the expected error obeys
//! `E f(T) = (I − α(Φ − 4βC)) E f(T−1) + r(T)` where
//! `Φ = diag(4β|Ω_n| I + 2R_n/(1−λ))` and `C = A ⊗ I`. Writing `δ_i` for the
//! eigenvalues of `Φ − 4βC` and `‖Σ‖₂ = max_i |1 − αδ_i|`, the bound is
//!
//! ```text
//! limsup ‖E f(T)‖₂ ≤ √N α / (1 − ‖Σ‖₂) · (8β max|Ω_n| max‖w̃_n‖₂ + γ√M)
//! ```
//!
//! whenever `‖Σ‖₂ < 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::graph::Graph;

/// `E[uuᵀ]` for `u ~ Uniform[0,1]^M`: `I/12 + 11ᵀ/4`.
pub fn uniform_input_correlation(dim: usize) -> DMatrix<f64> {
    DMatrix::from_element(dim, dim, 0.25) + DMatrix::identity(dim, dim) / 12.0
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assumption4Check {
    /// `2/(1−λ) min_n λ_min(R_n) − 4β(max|Ω_n| − min|Ω_n|)`.
    pub margin: f64,
    pub satisfied: bool,
}

pub fn check_assumption4(graph: &Graph, correlations: &[DMatrix<f64>], beta: f64, lambda: f64) -> Assumption4Check {
    let min_eig = correlations.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min);
    let spread = (graph.max_degree() - graph.min_degree()) as f64;
    let margin = 2.0 / (1.0 - lambda) * min_eig - 4.0 * beta * spread;
    Assumption4Check {
        margin,
        satisfied: margin > 0.0,
    }
}

/// Block diagonal of `Φ`, one `M×M` block per node.
pub fn phi_blocks(graph: &Graph, correlations: &[DMatrix<f64>], beta: f64, lambda: f64) -> Vec<DMatrix<f64>> {
    correlations
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let m = r.nrows();
            DMatrix::identity(m, m) * (4.0 * beta * graph.degree(n) as f64) + r * (2.0 / (1.0 - lambda))
        })
        .collect()
}

/// `Φ − 4βC` as a dense `NM × NM` matrix.
pub fn error_system_matrix(graph: &Graph, correlations: &[DMatrix<f64>], beta: f64, lambda: f64) -> DMatrix<f64> {
    let blocks = phi_blocks(graph, correlations, beta, lambda);
    let m = correlations.first().map_or(0, |r| r.nrows());
    let size = graph.n_nodes() * m;
    let mut out = DMatrix::zeros(size, size);
    for (n, b) in blocks.iter().enumerate() {
        out.view_mut((n * m, n * m), (m, m)).copy_from(b);
    }
    for (a, b) in graph.edges() {
        for k in 0..m {
            out[(a * m + k, b * m + k)] -= 4.0 * beta;
            out[(b * m + k, a * m + k)] -= 4.0 * beta;
        }
    }
    out
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    pub n_nodes: usize,
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    /// Diagonal blocks of `Φ`, row-major.
    pub phi_blocks: Vec<Vec<Vec<f64>>>,
    /// Network adjacency `A`; `C = A ⊗ I_M`.
    pub adjacency: Vec<Vec<f64>>,
    pub delta_min: f64,
    pub delta_max: f64,
    pub sigma_norm: f64,
    pub assumption4_margin: f64,
    pub assumption4_ok: bool,
    pub assumption5_ok: bool,
    pub max_degree: usize,
    pub max_true_norm: f64,
    /// `None` when `‖Σ‖₂ ≥ 1`.
    pub bound: Option<f64>,
}

impl ErrorBoundReport {
    pub fn phi(&self) -> DMatrix<f64> {
        let m = self.dim;
        let mut out = DMatrix::zeros(self.n_nodes * m, self.n_nodes * m);
        for (n, rows) in self.phi_blocks.iter().enumerate() {
            out.view_mut((n * m, n * m), (m, m)).copy_from(&from_rows(rows));
        }
        out
    }

    pub fn c(&self) -> DMatrix<f64> {
        from_rows(&self.adjacency).kronecker(&DMatrix::identity(self.dim, self.dim))
    }

    pub fn require_bound(&self) -> Result<f64> {
        self.bound.ok_or(Error::NotContractive {
            sigma_norm: self.sigma_norm,
        })
    }
}

/// Evaluates every ingredient of the bound; `bound` is `None` when the
/// recursion is not contractive.
pub fn analyze(
    graph: &Graph,
    correlations: &[DMatrix<f64>],
    true_weights: &[DVector<f64>],
    alpha: f64,
    beta: f64,
    gamma: f64,
    lambda: f64,
) -> Result<ErrorBoundReport> {
    let n = graph.n_nodes();
    check_dim(n, correlations.len())?;
    check_dim(n, true_weights.len())?;
    let dim = correlations[0].nrows();
    for (r, w) in correlations.iter().zip(true_weights) {
        check_dim(dim, r.nrows())?;
        check_dim(dim, r.ncols())?;
        check_dim(dim, w.len())?;
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidConfig(format!("the bound needs 0 < lambda < 1, got {lambda}")));
    }

    let system = error_system_matrix(graph, correlations, beta, lambda);
    let eig = system.symmetric_eigenvalues();
    let (delta_min, delta_max) = (eig.min(), eig.max());
    let sigma_norm = (1.0 - alpha * delta_min).abs().max((1.0 - alpha * delta_max).abs());
    let a4 = check_assumption4(graph, correlations, beta, lambda);
    let max_degree = graph.max_degree();
    let max_true_norm = true_weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let bound = (sigma_norm < 1.0).then(|| {
        (n as f64).sqrt() * alpha / (1.0 - sigma_norm)
            * (8.0 * beta * max_degree as f64 * max_true_norm + gamma * (dim as f64).sqrt())
    });

    Ok(ErrorBoundReport {
        n_nodes: n,
        dim,
        alpha,
        beta,
        gamma,
        lambda,
        phi_blocks: phi_blocks(graph, correlations, beta, lambda).iter().map(to_rows).collect(),
        adjacency: to_rows(&graph.adjacency()),
        delta_min,
        delta_max,
        sigma_norm,
        assumption4_margin: a4.margin,
        assumption4_ok: a4.satisfied,
        assumption5_ok: alpha * delta_max < 2.0,
        max_degree,
        max_true_norm,
        bound,
    })
}

/// Like [`analyze`], but fails with `NotContractive` when no bound exists.
pub fn compute_bound(
    graph: &Graph,
    correlations: &[DMatrix<f64>],
    true_weights: &[DVector<f64>],
    alpha: f64,
    beta: f64,
    gamma: f64,
    lambda: f64,
) -> Result<ErrorBoundReport> {
    let report = analyze(graph, correlations, true_weights, alpha, beta, gamma, lambda)?;
    report.require_bound()?;
    Ok(report)
}
