#![allow(dead_code)]

use std::collections::HashMap;

use netident::fixtures;
use netident::funclib::FunctionSet;
use netident::graph::{Dag, NodeId};
use netident::patterns::IdentificationPattern;
use netident::simkit::ExcitationSchedule;

/// Direct recursive evaluation of `y_i^k = sum_j f_{i,j}(y_j^{k - m_{i,j}}) + u_i^{k-1}`
/// with memoization, powers summed term by term.
pub struct BruteForce<'a> {
    dag: &'a Dag,
    funcs: &'a FunctionSet,
    sched: &'a ExcitationSchedule,
    memo: HashMap<(NodeId, i64), f64>,
}

impl<'a> BruteForce<'a> {
    pub fn new(dag: &'a Dag, funcs: &'a FunctionSet, sched: &'a ExcitationSchedule) -> Self {
        BruteForce { dag, funcs, sched, memo: HashMap::new() }
    }

    fn u(&self, node: NodeId, k: i64) -> f64 {
        if k < 1 {
            return 0.0;
        }
        self.sched.signals().get(&node).and_then(|s| s.get(k as usize - 1)).copied().unwrap_or(0.0)
    }

    pub fn y(&mut self, node: NodeId, k: i64) -> f64 {
        if k < 1 {
            return 0.0;
        }
        if let Some(&v) = self.memo.get(&(node, k)) {
            return v;
        }
        let mut total = self.u(node, k - 1);
        let edges: Vec<_> = self.dag.incoming_edges(node).copied().collect();
        for e in edges {
            let x = self.y(e.tail, k - e.delay as i64);
            let f = self.funcs.get(e.head, e.tail).expect("function on every edge");
            total += f.taylor().iter().enumerate().map(|(n, a)| a * x.powi(n as i32)).sum::<f64>();
        }
        self.memo.insert((node, k), total);
        total
    }
}

/// Graphs and patterns of every reference network, with unit delays except
/// where a fixture fixes others.
pub fn reference_networks() -> Vec<(&'static str, Dag, IdentificationPattern)> {
    vec![
        ("model_network", fixtures::model_network(), fixtures::model_pattern()),
        ("triangle", fixtures::triangle(1, 1, 1), IdentificationPattern::new([1], [2, 3])),
        ("triangle_delayed", fixtures::triangle(2, 1, 3), IdentificationPattern::new([1], [2, 3])),
        ("multipartite", fixtures::multipartite(), fixtures::multipartite_pattern()),
        ("ordering_example", fixtures::ordering_example(), fixtures::ordering_pattern()),
        ("relay_join_unit", fixtures::relay_join_unit(), fixtures::relay_join_pattern()),
        ("relay_join", fixtures::relay_join(), fixtures::relay_join_pattern()),
        ("diamond", fixtures::diamond(), fixtures::diamond_pattern()),
        ("crossed", fixtures::crossed(), fixtures::crossed_pattern()),
    ]
}
