// Per-node certificates: vertex-disjoint paths from the excited nodes to
// the in-neighbors of each node.

use std::error::Error;

use netident::fixtures;
use netident::graph::NodeSet;
use netident::structural::{disjoint_path_certificate, max_vertex_disjoint_paths};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dag = fixtures::crossed();
    let p = fixtures::crossed_pattern();
    println!("pattern {p}");
    for node in dag.nodes() {
        let cert = disjoint_path_certificate(&dag, &p, node);
        let status = if cert.satisfied() { "ok" } else { "short" };
        let paths: Vec<Vec<usize>> = cert.paths.iter().map(|p| p.iter().map(|v| v.0).collect()).collect();
        println!("node {node}: {}/{} {status} {paths:?}", cert.achieved, cert.required);
    }

    // Menger: the count equals the smallest vertex cut separating the sets.
    for (from, to) in [([1, 2], [3, 4]), ([1, 2], [5, 5])] {
        let sources: NodeSet = from.iter().map(|&v| v.into()).collect();
        let targets: NodeSet = to.iter().map(|&v| v.into()).collect();
        let flow = max_vertex_disjoint_paths(&dag, &sources, &targets);
        let paths: Vec<Vec<usize>> = flow.paths.iter().map(|p| p.iter().map(|v| v.0).collect()).collect();
        println!("{sources:?} to {targets:?}: {} path(s) {paths:?}", flow.count());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
