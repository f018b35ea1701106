// Orders, roles and path lags on an eight-node graph.

use std::error::Error;

use netident::fixtures;
use netident::graph::{lag_table, measured_aware_order, topological_order};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dag = fixtures::ordering_example();
    let p = fixtures::ordering_pattern();
    println!("sources {:?}, sinks {:?}", dag.sources(), dag.sinks());
    println!("topological order   {:?}", topological_order(&dag));
    println!("measured-aware order {:?}", measured_aware_order(&dag, &p));
    for node in dag.nodes() {
        println!("ancestors of {node}: {:?}", dag.ancestors(node));
    }
    let table = lag_table(&dag, &p);
    for ((target, excited), lags) in table.iter() {
        if table.path_count(*target, *excited) > 1 {
            println!("{excited} -> {target}: lag multiplicities {lags:?}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
