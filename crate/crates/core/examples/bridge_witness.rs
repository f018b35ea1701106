// Two cubic routes from one source into a join carry the same power of the
// input, so weight can move between them without changing any measurement.

use std::error::Error;

use netident::engine::{analyze, witness_cubic_bridge, AnalyzeOptions};
use netident::fixtures;
use netident::simkit::Comparison;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dag = fixtures::diamond();
    let w = witness_cubic_bridge(&dag, [1.0, 2.0, 1.0, 1.0], 0.5, &Comparison::default())?;
    println!("{} witness under {}", w.kind, w.pattern);
    for c in &w.changes {
        println!("  f_{{{},{}}}: {}  ->  {}", c.head, c.tail, c.original, c.modified);
    }
    println!("verified over {} trials, max deviation {:.2e}", w.trials, w.max_deviation);
    if !w.verified {
        return Err("bridge witness did not verify".into());
    }

    let report = analyze(&dag, &fixtures::diamond_pattern(), Some(&w.original), &AnalyzeOptions::default())?;
    for e in &report.per_edge {
        println!("  f_{{{},{}}}: {}", e.head, e.tail, e.verdict.label());
    }
    println!("summary: {}", report.summary);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
