//! Synchronous neighbor exchange.
//!
//! Nodes publish one message per round; after the barrier every node sums what
//! its neighbors published. The sum runs over `Ω_n` in ascending order so the
//! floating-point result does not depend on scheduling.

use nalgebra::DVector;

use crate::graph::Graph;

/// `Σ_{m∈Ω_n} values[m]` for every node `n`.
pub fn neighbor_sums(graph: &Graph, values: &[DVector<f64>]) -> Vec<DVector<f64>> {
    (0..graph.n_nodes())
        .map(|n| {
            let mut acc = DVector::zeros(values[n].len());
            for &m in graph.neighbors(n) {
                acc += &values[m];
            }
            acc
        })
        .collect()
}

/// Messages crossing the network in one exchange round: one per directed edge.
pub fn messages_per_round(graph: &Graph) -> usize {
    2 * graph.n_edges()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_follow_adjacency() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let values: Vec<_> = (0..3).map(|n| DVector::from_element(2, (n + 1) as f64)).collect();
        let sums = neighbor_sums(&g, &values);
        assert_eq!(sums[0], DVector::from_element(2, 2.0));
        assert_eq!(sums[1], DVector::from_element(2, 4.0));
        assert_eq!(sums[2], DVector::from_element(2, 2.0));
        assert_eq!(messages_per_round(&g), 4);
    }
}
