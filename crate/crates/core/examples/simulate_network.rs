// Simulates the triangle from rest and reports which path lags collide.

use std::collections::BTreeMap;
use std::error::Error;

use netident::fixtures;
use netident::funclib::{EdgeFunction, FunctionSet};
use netident::graph::NodeId;
use netident::patterns::IdentificationPattern;
use netident::simkit::{delay_collision_report, simulate, ExcitationSchedule};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let p = IdentificationPattern::new([1], [2, 3]);
    let funcs = FunctionSet::new()
        .with(2, 1, EdgeFunction::new([1.0, 0.0, 0.5]))
        .with(3, 2, EdgeFunction::new([0.0, 0.0, 1.0]))
        .with(3, 1, EdgeFunction::new([-0.5, 0.0, 0.2]));

    for (m21, m32, m31) in [(1, 1, 2), (1, 1, 3)] {
        let dag = fixtures::triangle(m21, m32, m31);
        for c in delay_collision_report(&dag, &p) {
            println!("delays ({m21},{m32},{m31}): node {} from {}: lags {:?} -> {:?}", c.target, c.excited, c.lags, c.kind);
        }
    }

    let dag = fixtures::triangle(1, 1, 2);
    let u: Vec<f64> = (0..8).map(|k| 0.5 * f64::sin(k as f64)).collect();
    let sched = ExcitationSchedule::new(8, BTreeMap::from([(NodeId(1), u)]))?;
    let traj = simulate(&dag, &funcs, &sched)?;
    let names: Vec<String> = dag.nodes().map(|v| v.to_string()).collect();
    print!("{}", traj.to_csv(&names));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
