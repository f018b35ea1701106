//! Linear-algebraic and flow machinery for the vertex-disjoint path test.
//!
//! The nonlinear network matrix `J_G(v)` holds edge derivatives
//! `f'_{i,j}(y_j)` evaluated along the constant-input operating point where
//! every excited node `e` receives `u_e = v_e` at all times, so all delayed
//! copies of one input collapse into a single variable. Its transfer matrix
//! `T_G(v) = (I - J_G(v))^{-1}` has, in entry `(j, e)`, the sensitivity of
//! `y_j` to `v_e`. For an in-neighbor set `N_i` the rows `N_i` and columns
//! `N^e` of `T_G(v)` form the Jacobian whose full row rank drives the
//! sufficiency argument; generically that rank equals the maximum number of
//! vertex-disjoint paths from `N^e` to `N_i`.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::funclib::FunctionSet;
use crate::graph::{Dag, NodeId, NodeSet};
use crate::patterns::IdentificationPattern;

/// Relative singular-value threshold for numeric rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Default number of random points tried by [`genericity_probe`].
pub const DEFAULT_DRAWS: usize = 10;

// Probe points avoid a neighborhood of zero, where pure monomials have zero slope.
const PROBE_EXCLUSION: f64 = 0.05;
// Operating points with larger outputs are shrunk before use.
const MAX_OPERATING_MAGNITUDE: f64 = 1e8;
const MAX_SHRINKS: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructuralError {
    #[error("point has {got} components, pattern excites {expected} nodes")]
    PointLength { expected: usize, got: usize },
    #[error("non-finite value while evaluating node {0}; retry with a smaller point")]
    EvaluationOverflow(NodeId),
    #[error("edge {tail} -> {head} has no function")]
    MissingFunction { head: NodeId, tail: NodeId },
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("every probe point overflowed at node {0}; genericity undetermined")]
    GenericityUndetermined(NodeId),
}

/// `J_G(v)` and `T_G(v)` at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearNetworkMatrix {
    /// `v`, one component per excited node in ascending id order.
    pub point: Vec<f64>,
    pub excited: Vec<NodeId>,
    /// Steady node outputs under constant inputs `v`.
    pub outputs: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub transfer: DMatrix<f64>,
}

impl NonlinearNetworkMatrix {
    /// `J[i][j] = f'_{i,j}(y_j)`.
    pub fn jacobian_entry(&self, i: NodeId, j: NodeId) -> f64 {
        self.jacobian[(i.index(), j.index())]
    }

    /// `T[i][j]`: sum over walks `j -> i` of products of edge derivatives.
    pub fn transfer_entry(&self, i: NodeId, j: NodeId) -> f64 {
        self.transfer[(i.index(), j.index())]
    }

    pub fn output(&self, node: NodeId) -> f64 {
        self.outputs[node.index()]
    }

    pub fn submatrix(&self, rows: &NodeSet, cols: &NodeSet) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let i = *rows.iter().nth(r).expect("row in range");
            let j = *cols.iter().nth(c).expect("col in range");
            self.transfer_entry(i, j)
        })
    }
}

/// Evaluates `J_G(v)` and `T_G(v)`; `v` is indexed by the excited nodes in
/// ascending id order.
pub fn evaluate_network_matrix(
    dag: &Dag,
    funcs: &FunctionSet,
    p: &IdentificationPattern,
    v: &[f64],
) -> Result<NonlinearNetworkMatrix, StructuralError> {
    let excited: Vec<NodeId> = p.excited.iter().copied().filter(|x| dag.contains(*x)).collect();
    if excited.len() != v.len() {
        return Err(StructuralError::PointLength { expected: excited.len(), got: v.len() });
    }
    let n = dag.node_count();
    let mut y = vec![0.0; n];
    for (&e, &val) in excited.iter().zip(v) {
        y[e.index()] = val;
    }
    let mut jacobian = DMatrix::zeros(n, n);
    for &node in dag.topological_order() {
        let mut acc = y[node.index()];
        for e in dag.incoming_edges(node) {
            let f = funcs.get(e.head, e.tail).ok_or(StructuralError::MissingFunction { head: e.head, tail: e.tail })?;
            let x = y[e.tail.index()];
            acc += f.apply(x);
            let slope = f.apply_derivative(x);
            if !slope.is_finite() {
                return Err(StructuralError::EvaluationOverflow(node));
            }
            jacobian[(node.index(), e.tail.index())] = slope;
        }
        if !acc.is_finite() {
            return Err(StructuralError::EvaluationOverflow(node));
        }
        y[node.index()] = acc;
    }
    // J is nilpotent on a DAG, so the Neumann series stops at J^(n-1).
    let mut transfer = DMatrix::identity(n, n);
    let mut power = DMatrix::identity(n, n);
    for _ in 1..n {
        power = &power * &jacobian;
        if power.iter().all(|&x| x == 0.0) {
            break;
        }
        transfer += &power;
    }
    if transfer.iter().any(|x| !x.is_finite()) {
        return Err(StructuralError::EvaluationOverflow(NodeId(1)));
    }
    Ok(NonlinearNetworkMatrix { point: v.to_vec(), excited, outputs: y, jacobian, transfer })
}

/// Count of singular values above `tol * sigma_max`, after scaling every
/// row and column to unit max-norm. The scaling leaves the exact rank
/// unchanged and keeps outputs of very different magnitude comparable.
pub fn numeric_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let mut a = m.clone();
    for mut row in a.row_iter_mut() {
        let s = row.amax();
        if s > 0.0 {
            row /= s;
        }
    }
    for mut col in a.column_iter_mut() {
        let s = col.amax();
        if s > 0.0 {
            col /= s;
        }
    }
    let sv = a.singular_values();
    let largest = sv.max();
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Numeric rank of `T_G^{rows, cols}(v)`.
pub fn submatrix_rank(m: &NonlinearNetworkMatrix, rows: &NodeSet, cols: &NodeSet, tol: f64) -> usize {
    numeric_rank(&m.submatrix(rows, cols), tol)
}

/// A maximum family of vertex-disjoint paths. Each path is listed from its
/// start (in the source set) to its end (in the target set); a node in both
/// sets may form a path of length zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexDisjointPaths {
    pub paths: Vec<Vec<NodeId>>,
}

impl VertexDisjointPaths {
    pub fn count(&self) -> usize {
        self.paths.len()
    }
}

struct FlowNet {
    head: Vec<usize>,
    cap: Vec<i32>,
    adj: Vec<Vec<usize>>,
}

impl FlowNet {
    fn new(nodes: usize) -> Self {
        FlowNet { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, from: usize, to: usize) {
        self.adj[from].push(self.head.len());
        self.head.push(to);
        self.cap.push(1);
        self.adj[to].push(self.head.len());
        self.head.push(from);
        self.cap.push(0);
    }

    // BFS augmenting path; returns false when none is left.
    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut via = vec![usize::MAX; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            if x == t {
                break;
            }
            for &e in &self.adj[x] {
                let y = self.head[e];
                if self.cap[e] > 0 && !seen[y] {
                    seen[y] = true;
                    via[y] = e;
                    queue.push_back(y);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut x = t;
        while x != s {
            let e = via[x];
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            x = self.head[e ^ 1];
        }
        true
    }

    // Forward edges out of `x` that carry flow.
    fn used(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[x].iter().copied().filter(move |&e| e % 2 == 0 && self.cap[e] == 0).map(move |e| self.head[e])
    }
}

/// Maximum number of vertex-disjoint paths from `sources` to `targets`,
/// computed as a unit-capacity max-flow on the node-split graph.
pub fn max_vertex_disjoint_paths(dag: &Dag, sources: &NodeSet, targets: &NodeSet) -> VertexDisjointPaths {
    let n = dag.node_count();
    let (s, t) = (2 * n, 2 * n + 1);
    let node_in = |v: NodeId| 2 * v.index();
    let node_out = |v: NodeId| 2 * v.index() + 1;
    let mut net = FlowNet::new(2 * n + 2);
    for v in dag.nodes() {
        net.add(node_in(v), node_out(v));
    }
    for e in dag.edges() {
        net.add(node_out(e.tail), node_in(e.head));
    }
    for &v in sources.iter().filter(|v| dag.contains(**v)) {
        net.add(s, node_in(v));
    }
    for &v in targets.iter().filter(|v| dag.contains(**v)) {
        net.add(node_out(v), t);
    }
    while net.augment(s, t) {}

    let mut paths = Vec::new();
    for start in net.used(s).collect::<Vec<_>>() {
        let mut path = Vec::new();
        let mut x = start;
        loop {
            let v = NodeId::from_index(x / 2);
            path.push(v);
            let out = node_out(v);
            // Flow entering a split node leaves through exactly one edge.
            let next = net.used(out).next().expect("flow is conserved");
            if next == t {
                break;
            }
            x = next;
        }
        paths.push(path);
    }
    paths.sort();
    VertexDisjointPaths { paths }
}

/// Vertex-disjoint path evidence for one node: paths from excited nodes to
/// its in-neighbors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisjointPathCertificate {
    pub node: NodeId,
    pub required: usize,
    pub achieved: usize,
    /// Present only when `achieved >= required`.
    pub paths: Vec<Vec<NodeId>>,
}

impl DisjointPathCertificate {
    pub fn satisfied(&self) -> bool {
        self.achieved >= self.required
    }
}

pub fn disjoint_path_certificate(dag: &Dag, p: &IdentificationPattern, node: NodeId) -> DisjointPathCertificate {
    let targets: NodeSet = dag.in_neighbors(node).collect();
    let found = max_vertex_disjoint_paths(dag, &p.excited, &targets);
    let required = targets.len();
    let achieved = found.count();
    DisjointPathCertificate {
        node,
        required,
        achieved,
        paths: if achieved >= required { found.paths } else { Vec::new() },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityProbe {
    pub node: NodeId,
    /// Maximum number of vertex-disjoint paths from `N^e` to `N_i`.
    pub structural: usize,
    /// Numeric rank at each point tried; `None` where evaluation failed.
    pub ranks: Vec<Option<usize>>,
    pub max_rank: usize,
    /// True when some point attains the structural bound.
    pub generic: bool,
    /// A point attaining the bound.
    pub witness_point: Option<Vec<f64>>,
}

/// Looks for a point `v` at which `T^{N_i, N^e}(v)` reaches the rank the
/// graph structure allows.
///
/// Components of each point are uniform in `[-1, -0.05] U [0.05, 1]`. A point
/// whose operating outputs overflow or exceed `1e8` in magnitude is halved
/// until usable. Stops at the first point attaining the bound; otherwise all
/// `draws` points are tried and the shortfall is reported.
pub fn genericity_probe(
    dag: &Dag,
    funcs: &FunctionSet,
    p: &IdentificationPattern,
    node: NodeId,
    draws: usize,
    seed: u64,
) -> Result<GenericityProbe, StructuralError> {
    genericity_probe_with_tol(dag, funcs, p, node, draws, seed, DEFAULT_RANK_TOL)
}

pub fn genericity_probe_with_tol(
    dag: &Dag,
    funcs: &FunctionSet,
    p: &IdentificationPattern,
    node: NodeId,
    draws: usize,
    seed: u64,
    tol: f64,
) -> Result<GenericityProbe, StructuralError> {
    if !dag.contains(node) {
        return Err(StructuralError::UnknownNode(node));
    }
    let rows: NodeSet = dag.in_neighbors(node).collect();
    let cols: NodeSet = p.excited.iter().copied().filter(|v| dag.contains(*v)).collect();
    let structural = max_vertex_disjoint_paths(dag, &cols, &rows).count();
    let mut probe = GenericityProbe {
        node,
        structural,
        ranks: Vec::new(),
        max_rank: 0,
        generic: structural == 0,
        witness_point: None,
    };
    if structural == 0 {
        return Ok(probe);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (node.0 as u64).wrapping_mul(0xA076_1D64_78BD_642F));
    for _ in 0..draws.max(1) {
        let mut v: Vec<f64> = (0..cols.len())
            .map(|_| {
                let m = rng.gen_range(PROBE_EXCLUSION..=1.0);
                if rng.gen_bool(0.5) { m } else { -m }
            })
            .collect();
        let mut evaluated = None;
        for _ in 0..MAX_SHRINKS {
            match evaluate_network_matrix(dag, funcs, p, &v) {
                Ok(m) if m.outputs.iter().all(|y| y.abs() <= MAX_OPERATING_MAGNITUDE) => {
                    evaluated = Some(m);
                    break;
                }
                Ok(_) | Err(StructuralError::EvaluationOverflow(_)) => v.iter_mut().for_each(|x| *x *= 0.5),
                Err(e) => return Err(e),
            }
        }
        let Some(m) = evaluated else {
            probe.ranks.push(None);
            continue;
        };
        let rank = submatrix_rank(&m, &rows, &cols, tol);
        probe.ranks.push(Some(rank));
        probe.max_rank = probe.max_rank.max(rank);
        if rank >= structural {
            probe.generic = true;
            probe.witness_point = Some(m.point);
            break;
        }
    }
    if probe.ranks.iter().all(Option::is_none) {
        return Err(StructuralError::GenericityUndetermined(node));
    }
    Ok(probe)
}

/// Excited-node index map used to read a probe point.
pub fn point_components(p: &IdentificationPattern, point: &[f64]) -> BTreeMap<NodeId, f64> {
    p.excited.iter().copied().zip(point.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::funclib::EdgeFunction;
    use crate::graph::node_set;

    fn cubes(dag: &Dag) -> FunctionSet {
        FunctionSet::for_dag(dag, |_, _| EdgeFunction::monomial(1.0, 3))
    }

    #[test]
    fn chain_point_evaluation() {
        let dag = fixtures::chain(2);
        let m = evaluate_network_matrix(&dag, &cubes(&dag), &IdentificationPattern::new([1], [2]), &[2.0]).unwrap();
        assert_eq!(m.output(NodeId(1)), 2.0);
        assert_eq!(m.jacobian_entry(NodeId(2), NodeId(1)), 12.0);
        assert_eq!(m.transfer_entry(NodeId(2), NodeId(1)), 12.0);
    }

    #[test]
    fn zero_point_gives_identity_transfer_for_pure_cubics() {
        let dag = fixtures::diamond();
        let m = evaluate_network_matrix(&dag, &cubes(&dag), &fixtures::diamond_pattern(), &[0.0]).unwrap();
        assert!(m.jacobian.iter().all(|&x| x == 0.0));
        assert_eq!(m.transfer, DMatrix::identity(4, 4));
    }

    #[test]
    fn diamond_transfer_is_sum_over_paths() {
        let dag = fixtures::diamond();
        let f = fixtures::diamond_cubics(1.0, 2.0, -1.0, 0.5);
        let m = evaluate_network_matrix(&dag, &f, &fixtures::diamond_pattern(), &[0.7]).unwrap();
        let j = |a, b| m.jacobian_entry(NodeId(a), NodeId(b));
        let expected = j(4, 2) * j(2, 1) + j(4, 3) * j(3, 1);
        assert!((m.transfer_entry(NodeId(4), NodeId(1)) - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn point_length_checked() {
        let dag = fixtures::chain(2);
        let err = evaluate_network_matrix(&dag, &cubes(&dag), &IdentificationPattern::new([1], [2]), &[1.0, 2.0]);
        assert_eq!(err, Err(StructuralError::PointLength { expected: 1, got: 2 }));
    }

    #[test]
    fn overflow_reported() {
        let dag = fixtures::chain(6);
        let f = FunctionSet::for_dag(&dag, |_, _| EdgeFunction::monomial(2.0, 9));
        let r = evaluate_network_matrix(&dag, &f, &IdentificationPattern::new([1], [6]), &[1.0]);
        assert!(matches!(r, Err(StructuralError::EvaluationOverflow(_))));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&DMatrix::identity(2, 2), DEFAULT_RANK_TOL), 2);
        assert_eq!(numeric_rank(&DMatrix::zeros(2, 3), DEFAULT_RANK_TOL), 0);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(numeric_rank(&m, DEFAULT_RANK_TOL), 1);
        // badly scaled but full rank
        let m = DMatrix::from_row_slice(2, 2, &[1e60, 3e60, 1e-3, 0.0]);
        assert_eq!(numeric_rank(&m, DEFAULT_RANK_TOL), 2);

        let dag = fixtures::diamond();
        let f = fixtures::diamond_cubics(1.0, 2.0, 1.0, 1.0);
        let m = evaluate_network_matrix(&dag, &f, &fixtures::diamond_pattern(), &[0.6]).unwrap();
        assert_eq!(submatrix_rank(&m, &node_set([2, 3]), &node_set([1]), DEFAULT_RANK_TOL), 1);
    }

    #[test]
    fn disjoint_paths_examples() {
        let diamond = fixtures::diamond();
        let c = disjoint_path_certificate(&diamond, &fixtures::diamond_pattern(), NodeId(4));
        assert_eq!((c.required, c.achieved), (2, 1));
        assert!(c.paths.is_empty());

        let crossed = fixtures::crossed();
        let c = disjoint_path_certificate(&crossed, &fixtures::crossed_pattern(), NodeId(5));
        assert_eq!((c.required, c.achieved), (2, 2));
        assert_eq!(c.paths, vec![vec![NodeId(1), NodeId(3)], vec![NodeId(2), NodeId(4)]]);

        let r = max_vertex_disjoint_paths(&fixtures::chain(3), &node_set([3]), &node_set([3]));
        assert_eq!(r.paths, vec![vec![NodeId(3)]]);
    }

    #[test]
    fn probe_flags_collinear_neighbors() {
        let dag = fixtures::relay_join();
        let p = fixtures::relay_join_pattern();
        let probe = genericity_probe(&dag, &fixtures::relay_join_collinear(2.0), &p, NodeId(6), 10, 7).unwrap();
        assert_eq!(probe.structural, 2);
        assert_eq!(probe.ranks, vec![Some(1); 10]);
        assert!(!probe.generic);
    }

    #[test]
    fn probe_accepts_independent_cubics() {
        let dag = fixtures::relay_join();
        let p = fixtures::relay_join_pattern();
        let f = FunctionSet::random(&dag, 11, 3).unwrap();
        let probe = genericity_probe(&dag, &f, &p, NodeId(6), 10, 7).unwrap();
        assert!(probe.generic);
        assert_eq!(probe.max_rank, 2);
        assert!(probe.witness_point.is_some());

        let chain = fixtures::chain(4);
        let probe = genericity_probe(&chain, &cubes(&chain), &IdentificationPattern::new([1], [4]), NodeId(3), 3, 1).unwrap();
        assert_eq!((probe.structural, probe.max_rank), (1, 1));
    }

    #[test]
    fn probe_on_source_is_trivial() {
        let dag = fixtures::diamond();
        let probe = genericity_probe(&dag, &cubes(&dag), &fixtures::diamond_pattern(), NodeId(1), 3, 1).unwrap();
        assert!(probe.generic && probe.ranks.is_empty());
    }

    mod props {
        use super::*;
        use crate::gen::random_dag;
        use proptest::prelude::*;

        fn simple_paths(dag: &Dag, from: NodeId, targets: &NodeSet, prefix: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
            prefix.push(from);
            if targets.contains(&from) {
                out.push(prefix.clone());
            }
            for next in dag.out_neighbors(from).collect::<Vec<_>>() {
                simple_paths(dag, next, targets, prefix, out);
            }
            prefix.pop();
        }

        fn best_disjoint(paths: &[Vec<NodeId>], used: &mut NodeSet, from: usize) -> usize {
            let mut best = 0;
            for k in from..paths.len() {
                if paths[k].iter().all(|v| !used.contains(v)) {
                    used.extend(paths[k].iter().copied());
                    best = best.max(1 + best_disjoint(paths, used, k + 1));
                    for v in &paths[k] {
                        used.remove(v);
                    }
                }
            }
            best
        }

        fn brute_force_count(dag: &Dag, sources: &NodeSet, targets: &NodeSet) -> usize {
            let mut paths = Vec::new();
            for &s in sources {
                simple_paths(dag, s, targets, &mut Vec::new(), &mut paths);
            }
            best_disjoint(&paths, &mut NodeSet::new(), 0)
        }

        fn subset(dag: &Dag, mask: u32) -> NodeSet {
            dag.nodes().filter(|v| mask >> v.index() & 1 == 1).collect()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn flow_matches_brute_force(seed in 0u64..10_000, n in 2usize..=7, sm in any::<u32>(), tm in any::<u32>()) {
                let dag = random_dag(seed, n, 0.35, 1);
                let (sources, targets) = (subset(&dag, sm), subset(&dag, tm));
                let found = max_vertex_disjoint_paths(&dag, &sources, &targets);
                prop_assert_eq!(found.count(), brute_force_count(&dag, &sources, &targets));
                let mut seen = NodeSet::new();
                for path in &found.paths {
                    prop_assert!(sources.contains(&path[0]));
                    prop_assert!(targets.contains(path.last().unwrap()));
                    for w in path.windows(2) {
                        prop_assert!(dag.edge(w[1], w[0]).is_some());
                    }
                    for v in path {
                        prop_assert!(seen.insert(*v));
                    }
                }
            }

            #[test]
            fn transfer_inverts_identity_minus_jacobian(seed in 0u64..10_000, n in 2usize..=8) {
                let dag = random_dag(seed, n, 0.3, 2);
                let funcs = FunctionSet::random(&dag, seed, 3).unwrap();
                let p = IdentificationPattern::new(dag.nodes(), dag.nodes());
                let v: Vec<f64> = (0..n).map(|k| 0.05 + 0.1 * (k % 5) as f64).collect();
                let m = evaluate_network_matrix(&dag, &funcs, &p, &v).unwrap();
                let id = DMatrix::<f64>::identity(n, n);
                let residual = (&id - &m.jacobian) * &m.transfer - &id;
                let scale = m.transfer.amax().max(1.0);
                prop_assert!(residual.amax() <= 1e-10 * scale);
            }

            #[test]
            fn transfer_zero_pattern_follows_reachability(seed in 0u64..10_000, n in 2usize..=8) {
                let dag = random_dag(seed, n, 0.3, 1);
                let funcs = FunctionSet::random(&dag, seed, 3).unwrap();
                let p = IdentificationPattern::new(dag.nodes(), dag.nodes());
                let v: Vec<f64> = (0..n).map(|k| if k % 2 == 0 { 0.3 } else { -0.2 }).collect();
                let m = evaluate_network_matrix(&dag, &funcs, &p, &v).unwrap();
                for i in dag.nodes() {
                    for j in dag.nodes() {
                        if i != j && !dag.has_path(j, i) {
                            prop_assert_eq!(m.transfer_entry(i, j), 0.0);
                        }
                    }
                }
            }

            #[test]
            fn two_by_two_rank_matches_determinant(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
                let m = DMatrix::from_row_slice(2, 2, &[a, b, c, d]);
                let det = a * d - b * c;
                let norm = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
                let expected = if norm == 0.0 { 0 } else if det.abs() > 1e-6 * norm * norm { 2 } else if det.abs() < 1e-12 * norm * norm { 1 } else { return Ok(()) };
                prop_assert_eq!(numeric_rank(&m, DEFAULT_RANK_TOL), expected);
            }

            #[test]
            fn collinear_neighbors_drop_rank(gamma in prop::sample::select(vec![0.5, 1.0, 2.0]), seed in 0u64..1000) {
                let probe = genericity_probe(&fixtures::relay_join(), &fixtures::relay_join_collinear(gamma), &fixtures::relay_join_pattern(), NodeId(6), 10, seed).unwrap();
                prop_assert_eq!(probe.structural, 2);
                prop_assert_eq!(probe.max_rank, 1);
            }
        }
    }
}
