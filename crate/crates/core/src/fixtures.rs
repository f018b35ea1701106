//! Small reference networks with known identifiability behavior.
//!
//! All graphs use unit delays unless stated otherwise.

use crate::funclib::{EdgeFunction, FunctionSet};
use crate::graph::Dag;
use crate::patterns::IdentificationPattern;

fn dag(n: usize, arcs: &[(usize, usize)]) -> Dag {
    Dag::from_arcs(n, arcs).expect("fixture graphs are valid")
}

/// Path `1 -> 2 -> ... -> n`.
pub fn chain(n: usize) -> Dag {
    let arcs: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
    dag(n, &arcs)
}

/// `1 -> 2 -> 3` plus the shortcut `1 -> 3`, with explicit delays.
pub fn triangle(m21: u32, m32: u32, m31: u32) -> Dag {
    Dag::from_delayed_arcs(3, &[(1, 2, m21), (2, 3, m32), (1, 3, m31)]).expect("valid triangle")
}

/// Six-node network mixing excited, measured and dual-role nodes.
pub fn model_network() -> Dag {
    dag(6, &[(1, 2), (2, 4), (1, 3), (2, 3), (4, 6), (3, 5), (5, 6), (3, 6)])
}

/// Nodes 4 and 6 are both excited and measured.
pub fn model_pattern() -> IdentificationPattern {
    IdentificationPattern::new([1, 4, 5, 6], [2, 3, 4, 6])
}

/// Layered graph `{1,2} -> {3,4,5} -> {6,7} -> {8,9}`; with equal delays
/// every path from one node to another has the same length.
pub fn multipartite() -> Dag {
    dag(9, &[(1, 3), (1, 4), (2, 5), (4, 7), (5, 7), (3, 6), (3, 7), (6, 8), (7, 9), (7, 8)])
}

pub fn multipartite_pattern() -> IdentificationPattern {
    IdentificationPattern::new([1, 2, 3, 5, 6], [4, 7, 8, 9])
}

/// Eight-node graph used to exercise measured-aware ordering.
pub fn ordering_example() -> Dag {
    dag(
        8,
        &[(1, 2), (2, 4), (1, 3), (4, 6), (3, 5), (6, 5), (3, 4), (6, 8), (5, 7), (8, 7), (6, 7), (3, 2)],
    )
}

pub fn ordering_pattern() -> IdentificationPattern {
    IdentificationPattern::new([1, 2, 4, 6, 8], [3, 5, 7])
}

const RELAY_JOIN_ARCS: [(usize, usize); 7] = [(1, 3), (2, 3), (1, 4), (2, 4), (3, 5), (5, 6), (4, 6)];

/// Sources 1 and 2 feed nodes 3 and 4; 3 relays through 5; 4 and 5 join at 6.
pub fn relay_join_unit() -> Dag {
    dag(6, &RELAY_JOIN_ARCS)
}

/// Same topology with `m_{6,4} = m_{5,3} + m_{6,5} = 2`, so both routes into
/// node 6 carry equal lags.
pub fn relay_join() -> Dag {
    let arcs: Vec<_> = RELAY_JOIN_ARCS
        .iter()
        .map(|&(from, to)| (from, to, if (from, to) == (4, 6) { 2 } else { 1 }))
        .collect();
    Dag::from_delayed_arcs(6, &arcs).expect("valid relay join")
}

pub fn relay_join_pattern() -> IdentificationPattern {
    IdentificationPattern::new([1, 2], [3, 4, 5, 6])
}

/// Pure cubics with `f_{3,j} = gamma * f_{4,j}`, `f_{5,3} = x^3`,
/// `f_{6,4} = x^9`, `f_{6,5} = x^3`.
pub fn relay_join_collinear(gamma: f64) -> FunctionSet {
    let cube = EdgeFunction::monomial(1.0, 3);
    FunctionSet::new()
        .with(4, 1, cube.clone())
        .with(4, 2, cube.clone())
        .with(3, 1, cube.scaled(gamma))
        .with(3, 2, cube.scaled(gamma))
        .with(5, 3, cube.clone())
        .with(6, 4, EdgeFunction::monomial(1.0, 9))
        .with(6, 5, cube)
}

/// Source 1 feeding relays 2 and 3 that join at 4.
pub fn diamond() -> Dag {
    dag(4, &[(1, 2), (1, 3), (2, 4), (3, 4)])
}

pub fn diamond_pattern() -> IdentificationPattern {
    IdentificationPattern::new([1], [2, 3, 4])
}

/// `f_{i,j}(x) = a_{i,j} x^3` on the diamond.
pub fn diamond_cubics(a21: f64, a31: f64, a42: f64, a43: f64) -> FunctionSet {
    FunctionSet::new()
        .with(2, 1, EdgeFunction::monomial(a21, 3))
        .with(3, 1, EdgeFunction::monomial(a31, 3))
        .with(4, 2, EdgeFunction::monomial(a42, 3))
        .with(4, 3, EdgeFunction::monomial(a43, 3))
}

/// Node 2 feeds 1, 3 and 4; node 1 feeds 3; 3 and 4 join at 5.
pub fn crossed() -> Dag {
    dag(5, &[(2, 1), (1, 3), (2, 3), (2, 4), (3, 5), (4, 5)])
}

pub fn crossed_pattern() -> IdentificationPattern {
    IdentificationPattern::new([1, 2], [3, 4, 5])
}
