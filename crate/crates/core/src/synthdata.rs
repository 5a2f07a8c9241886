//! Synthetic ground truth and measurement streams.
//!
//! True weights are sparse on a support shared by all nodes. Their nonzero
//! part starts neighbor-similar and then drifts by bounded uniform increments.
//! Inputs are i.i.d. `Uniform[0, 1]` and observations follow the linear model
//! `d = uᵀw̃ + e`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::graph::Graph;
use crate::seeds::{self, Purpose};

/// Solves `(I + L) w = φ` coordinate-wise, the stationarity system of
/// `Σ‖w_n − φ_n‖² + ½ Σ_n Σ_{m∈Ω_n} ‖w_n − w_m‖²`.
pub fn initial_similar_weights(graph: &Graph, phis: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    let n = graph.n_nodes();
    check_dim(n, phis.len())?;
    let k = phis.first().map_or(0, |p| p.len());
    for phi in phis {
        check_dim(k, phi.len())?;
    }
    let system = DMatrix::identity(n, n) + graph.laplacian();
    let chol = system.cholesky().ok_or(Error::SingularMatrix)?;
    let rhs = DMatrix::from_fn(n, k, |node, coord| phis[node][coord]);
    let sol = chol.solve(&rhs);
    Ok((0..n).map(|node| sol.row(node).transpose()).collect())
}

/// Distribution of the observation noise `e_n(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `Uniform[0, level]`, the experiment recipe. Biased by `level / 2`.
    #[default]
    NonNegative,
    /// `Uniform[−level/2, level/2]`.
    ZeroMean,
}

impl NoiseModel {
    pub fn sample<R: Rng + ?Sized>(self, level: f64, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self {
            NoiseModel::NonNegative => level * u,
            NoiseModel::ZeroMean => level * (u - 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub dim: usize,
    pub n_zeros: usize,
    pub noise_level: f64,
    pub drift_level: f64,
    pub horizon: usize,
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub dim: usize,
    /// Nonzero coordinates, ascending.
    pub support: Vec<usize>,
    pub noise_level: f64,
    pub drift_level: f64,
    pub noise: NoiseModel,
    /// `weights[t][n]` is `w̃_n(t)` for `t = 0..=horizon`.
    weights: Vec<Vec<DVector<f64>>>,
}

impl GroundTruth {
    pub fn horizon(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.weights[0].len()
    }

    pub fn at(&self, t: usize) -> &[DVector<f64>] {
        &self.weights[t]
    }

    pub fn weight(&self, node: usize, t: usize) -> &DVector<f64> {
        &self.weights[t][node]
    }

    /// Builds a truth directly from per-time node weights, for analysis and tests.
    pub fn from_weights(
        weights: Vec<Vec<DVector<f64>>>,
        noise_level: f64,
        noise: NoiseModel,
    ) -> Result<Self> {
        let first = weights.first().ok_or_else(|| Error::InvalidConfig("empty trajectory".into()))?;
        let n = first.len();
        let dim = first.first().map_or(0, |w| w.len());
        for row in &weights {
            check_dim(n, row.len())?;
            for w in row {
                check_dim(dim, w.len())?;
            }
        }
        let support = (0..dim)
            .filter(|&c| weights.iter().flatten().any(|w| w[c] != 0.0))
            .collect();
        Ok(Self {
            dim,
            support,
            noise_level,
            drift_level: 0.0,
            noise,
            weights,
        })
    }

    /// Writes rows `trial,node,t,w0..w{M-1}` for every node and time.
    pub fn write_csv<W: Write>(&self, out: W, trial: usize, header: bool) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        if header {
            let mut cols = vec!["trial".to_owned(), "node".into(), "t".into()];
            cols.extend((0..self.dim).map(|c| format!("w{c}")));
            wtr.write_record(&cols)?;
        }
        for (t, row) in self.weights.iter().enumerate() {
            for (node, w) in row.iter().enumerate() {
                let mut rec = vec![trial.to_string(), node.to_string(), t.to_string()];
                rec.extend(w.iter().map(f64::to_string));
                wtr.write_record(&rec)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Draws the support, the neighbor-similar initial weights and the drift.
pub fn generate_ground_truth(graph: &Graph, spec: &TruthSpec, seed: u64) -> Result<GroundTruth> {
    if spec.n_zeros >= spec.dim {
        return Err(Error::InvalidSparsity {
            n_zeros: spec.n_zeros,
            dim: spec.dim,
        });
    }
    let n = graph.n_nodes();
    let k = spec.dim - spec.n_zeros;

    let mut support = index::sample(&mut seeds::rng(seed, &[Purpose::Support as u64]), spec.dim, k).into_vec();
    support.sort_unstable();

    let mut phi_rng = seeds::rng(seed, &[Purpose::InitialWeights as u64]);
    let phis: Vec<DVector<f64>> = (0..n)
        .map(|_| DVector::from_fn(k, |_, _| phi_rng.random::<f64>()))
        .collect();
    let initial = initial_similar_weights(graph, &phis)?;

    let embed = |part: &DVector<f64>| {
        let mut w = DVector::zeros(spec.dim);
        for (j, &c) in support.iter().enumerate() {
            w[c] = part[j];
        }
        w
    };

    let mut weights = Vec::with_capacity(spec.horizon + 1);
    weights.push(initial.iter().map(embed).collect::<Vec<_>>());
    let mut drift_rng = seeds::rng(seed, &[Purpose::Drift as u64]);
    let half = 0.5 * spec.drift_level;
    for t in 0..spec.horizon {
        let next: Vec<DVector<f64>> = weights[t]
            .iter()
            .map(|w| {
                let mut w = w.clone();
                for &c in &support {
                    let u: f64 = drift_rng.random();
                    w[c] += half * (2.0 * u - 1.0);
                }
                w
            })
            .collect();
        weights.push(next);
    }

    Ok(GroundTruth {
        dim: spec.dim,
        support,
        noise_level: spec.noise_level,
        drift_level: spec.drift_level,
        noise: spec.noise,
        weights,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub node: usize,
    pub time: usize,
    pub input: DVector<f64>,
    pub output: f64,
}

/// Independent input and noise generators of one node.
#[derive(Debug, Clone)]
pub struct NodeStreams {
    pub inputs: ChaCha8Rng,
    pub noise: ChaCha8Rng,
}

impl NodeStreams {
    pub fn new(seed: u64, node: usize) -> Self {
        Self {
            inputs: seeds::rng(seed, &[Purpose::Inputs as u64, node as u64]),
            noise: seeds::rng(seed, &[Purpose::Noise as u64, node as u64]),
        }
    }
}

/// One observation `d = uᵀw̃_n(t) + e` with `u ~ Uniform[0,1]^M`.
pub fn emit_measurement(
    truth: &GroundTruth,
    node: usize,
    time: usize,
    streams: &mut NodeStreams,
) -> Result<Measurement> {
    if time > truth.horizon() {
        return Err(Error::IndexOutOfRange {
            index: time,
            n_nodes: truth.horizon() + 1,
        });
    }
    let input = DVector::from_fn(truth.dim, |_, _| streams.inputs.random::<f64>());
    let noise = truth.noise.sample(truth.noise_level, &mut streams.noise);
    let output = input.dot(truth.weight(node, time)) + noise;
    Ok(Measurement {
        node,
        time,
        input,
        output,
    })
}

/// Per-node measurement streams for a whole trial.
#[derive(Debug, Clone)]
pub struct MeasurementSource {
    streams: Vec<NodeStreams>,
}

impl MeasurementSource {
    pub fn new(seed: u64, n_nodes: usize) -> Self {
        Self {
            streams: (0..n_nodes).map(|n| NodeStreams::new(seed, n)).collect(),
        }
    }

    /// All nodes' observations at `time`, ordered by node.
    pub fn draw(&mut self, truth: &GroundTruth, time: usize) -> Result<Vec<Measurement>> {
        self.streams
            .iter_mut()
            .enumerate()
            .map(|(node, s)| emit_measurement(truth, node, time, s))
            .collect()
    }
}

/// Writes rows `trial,node,t,d,u0..u{M-1}`.
pub fn write_measurements_csv<'a, W, I>(out: W, trial: usize, rows: I, header: bool) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Measurement>,
{
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let mut rows = rows.into_iter().peekable();
    if header {
        let dim = rows.peek().map_or(0, |m| m.input.len());
        let mut cols = vec!["trial".to_owned(), "node".into(), "t".into(), "d".into()];
        cols.extend((0..dim).map(|c| format!("u{c}")));
        wtr.write_record(&cols)?;
    }
    for m in rows {
        let mut rec = vec![
            trial.to_string(),
            m.node.to_string(),
            m.time.to_string(),
            m.output.to_string(),
        ];
        rec.extend(m.input.iter().map(f64::to_string));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
