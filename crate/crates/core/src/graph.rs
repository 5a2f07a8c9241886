//! Simple undirected network topologies.
//!
//! Every node `n` keeps its neighbors `Ω_n` sorted by ascending index, so the
//! `i`-th neighbor `g(n, i)` is well defined and every per-node sum in the
//! solvers runs in the same order on every run.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n_nodes: usize,
    neighbors: Vec<Vec<usize>>,
    n_edges: usize,
}

impl Graph {
    /// Builds a simple graph from unordered node pairs.
    pub fn new(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut neighbors = vec![Vec::new(); n_nodes];
        for &(a, b) in edges {
            for index in [a, b] {
                if index >= n_nodes {
                    return Err(Error::IndexOutOfRange { index, n_nodes });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if neighbors[a].contains(&b) {
                return Err(Error::DuplicateEdge(a.min(b), a.max(b)));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n_nodes,
            neighbors,
            n_edges: edges.len(),
        })
    }

    /// Samples `n_edges` distinct unordered pairs uniformly without replacement.
    ///
    /// The result is not conditioned on connectivity.
    pub fn random(n_nodes: usize, n_edges: usize, seed: u64) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        let max = n_nodes * (n_nodes - 1) / 2;
        if n_edges > max {
            return Err(Error::TooManyEdges {
                requested: n_edges,
                n_nodes,
                max,
            });
        }
        let pairs: Vec<(usize, usize)> = (0..n_nodes)
            .flat_map(|a| (a + 1..n_nodes).map(move |b| (a, b)))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen: Vec<usize> = index::sample(&mut rng, max, n_edges).into_vec();
        chosen.sort_unstable();
        let edges: Vec<(usize, usize)> = chosen.into_iter().map(|k| pairs[k]).collect();
        Self::new(n_nodes, &edges)
    }

    /// Cycle `0 - 1 - ... - (n-1) - 0`; every node has degree 2 for `n >= 3`.
    pub fn ring(n_nodes: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = match n_nodes {
            0 => return Err(Error::EmptyGraph),
            1 => Vec::new(),
            2 => vec![(0, 1)],
            n => (0..n).map(|a| (a, (a + 1) % n)).collect(),
        };
        Self::new(n_nodes, &edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// `Ω_n` in ascending order.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    /// `g(n, i)`: the `i`-th neighbor of `node`.
    pub fn neighbor(&self, node: usize, i: usize) -> usize {
        self.neighbors[node][i]
    }

    /// Position of `node` in the neighbor list of `of`, i.e. the `i` with `g(of, i) = node`.
    pub fn slot_of(&self, of: usize, node: usize) -> Option<usize> {
        self.neighbors[of].binary_search(&node).ok()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut adj = DMatrix::zeros(self.n_nodes, self.n_nodes);
        for (a, b) in self.edges() {
            adj[(a, b)] = 1.0;
            adj[(b, a)] = 1.0;
        }
        adj
    }

    /// Combinatorial Laplacian `D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut lap = -self.adjacency();
        for n in 0..self.n_nodes {
            lap[(n, n)] = self.degree(n) as f64;
        }
        lap
    }

    /// Edge-list text: a `# nodes N` header followed by one `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# nodes {}\n", self.n_nodes);
        for (a, b) in self.edges() {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    /// Parses the edge-list format written by [`Graph::to_edge_list`].
    ///
    /// Blank lines and `#` comments are ignored. Without a `# nodes N` header
    /// the node count is one past the largest index seen.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut n_nodes: Option<usize> = None;
        let mut edges = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("nodes") {
                    let value = words.next().ok_or_else(|| parse_err(k, "missing node count"))?;
                    n_nodes = Some(value.parse().map_err(|_| parse_err(k, "bad node count"))?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let mut next = || -> Result<usize> {
                words
                    .next()
                    .ok_or_else(|| parse_err(k, "expected two node indices"))?
                    .parse()
                    .map_err(|_| parse_err(k, "node index is not an integer"))
            };
            let (a, b) = (next()?, next()?);
            if words.next().is_some() {
                return Err(parse_err(k, "trailing tokens"));
            }
            edges.push((a, b));
        }
        let n = n_nodes.unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
        Self::new(n, &edges)
    }
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line: line + 1,
        message: message.to_owned(),
    }
}
