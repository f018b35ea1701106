// When two relays are driven proportionally, the rank of the network matrix
// at the join falls below what the graph allows and a direct and a relayed
// route become interchangeable.

use std::error::Error;

use netident::engine::{analyze, witness_collinear, AnalyzeOptions};
use netident::fixtures;
use netident::funclib::FunctionSet;
use netident::graph::NodeId;
use netident::simkit::Comparison;
use netident::structural::genericity_probe;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dag = fixtures::relay_join();
    let pattern = fixtures::relay_join_pattern();
    let join = NodeId(6);

    let collinear = fixtures::relay_join_collinear(2.0);
    let probe = genericity_probe(&dag, &collinear, &pattern, join, 10, 1)?;
    println!("proportional relays: ranks {:?}, bound {}", probe.ranks, probe.structural);

    let w = witness_collinear(&dag, &collinear, &pattern, 2.0, &Comparison::default())?;
    for c in &w.changes {
        println!("  f_{{{},{}}}: {}  ->  {}", c.head, c.tail, c.original, c.modified);
    }
    println!("witness verified: {} (max deviation {:.2e})", w.verified, w.max_deviation);

    let generic = FunctionSet::random(&dag, 3, 3)?;
    let report = analyze(&dag, &pattern, Some(&generic), &AnalyzeOptions::default())?;
    let rank = report.probe(join).map(|p| p.max_rank);
    println!("generic cubics: rank {rank:?}, summary {}", report.summary);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
