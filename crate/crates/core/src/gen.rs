//! Seeded random graph generators for property checks and demos.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Dag, Edge, NodeId};

/// Weakly connected random DAG on `n` nodes.
///
/// A random spanning tree guarantees connectivity; every other forward pair
/// (with respect to a hidden random order) becomes an edge with probability
/// `extra_edge_prob`. Delays are uniform in `1..=max_delay`.
pub fn random_dag(seed: u64, n: usize, extra_edge_prob: f64, max_delay: u32) -> Dag {
    assert!(n >= 1 && max_delay >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(&mut rng);
    let mut present = vec![vec![false; n]; n];
    for k in 1..n {
        let j = rng.gen_range(0..k);
        present[j][k] = true;
    }
    for j in 0..n {
        for k in j + 1..n {
            if !present[j][k] && rng.gen_bool(extra_edge_prob) {
                present[j][k] = true;
            }
        }
    }
    let mut edges = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            if present[j][k] {
                let delay = rng.gen_range(1..=max_delay);
                edges.push(Edge { head: NodeId::from_index(rank[k]), tail: NodeId::from_index(rank[j]), delay });
            }
        }
    }
    Dag::new(n, edges).expect("generator yields a connected DAG")
}

/// Random tree on `n` nodes with independently oriented unit-delay edges.
pub fn random_tree(seed: u64, n: usize) -> Dag {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (1..n)
        .map(|k| {
            let j = rng.gen_range(0..k);
            let (a, b) = (NodeId::from_index(j), NodeId::from_index(k));
            if rng.gen_bool(0.5) { Edge { head: b, tail: a, delay: 1 } } else { Edge { head: a, tail: b, delay: 1 } }
        })
        .collect();
    Dag::new(n, edges).expect("trees are connected and acyclic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_tree;

    #[test]
    fn generators_are_valid_and_deterministic() {
        for seed in 0..50 {
            let d = random_dag(seed, 8, 0.3, 3);
            assert_eq!(d, random_dag(seed, 8, 0.3, 3));
            assert!(d.edge_count() >= 7);
            let t = random_tree(seed, 10);
            assert!(is_tree(&t));
        }
    }
}
