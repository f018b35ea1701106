// A node that is neither excited nor measured hides a scale factor:
// multiplying its inputs by gamma and dividing its outputs' argument by
// gamma leaves every measurement unchanged.

use std::error::Error;

use netident::engine::{analyze, witness_scaling, AnalyzeOptions};
use netident::fixtures;
use netident::funclib::{EdgeFunction, FunctionSet};
use netident::graph::NodeId;
use netident::patterns::{check_necessary, IdentificationPattern};
use netident::simkit::Comparison;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dag = fixtures::chain(3);
    let p = IdentificationPattern::new([1], [3]);
    let funcs = FunctionSet::new()
        .with(2, 1, EdgeFunction::new([1.0, 0.0, 0.5]))
        .with(3, 2, EdgeFunction::new([1.0, 0.0, 1.0]));
    for v in &check_necessary(&dag, &p).violations {
        println!("violation: {v}");
    }

    let w = witness_scaling(&dag, &funcs, &p, NodeId(2), 2.0, &Comparison::default())?;
    for c in &w.changes {
        println!("  f_{{{},{}}}: {}  ->  {}", c.head, c.tail, c.original, c.modified);
    }
    println!("verified: {} (max deviation {:.2e})", w.verified, w.max_deviation);

    let report = analyze(&dag, &p, Some(&funcs), &AnalyzeOptions::default())?;
    println!("summary: {}", report.summary);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
