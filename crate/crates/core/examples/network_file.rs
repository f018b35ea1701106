// Reads a network description, prints its canonical form and a DOT drawing.

use std::error::Error;

use netident::cli::to_dot;
use netident::netfile::NetworkFile;

const SOURCE: &str = r#"
[network]
nodes = ["pump", "tank", "valve"]

[pattern]
excited = ["pump"]
measured = ["tank", "valve"]

[[edge]]
tail = "pump"
head = "tank"
coefficients = [1.0, 0.0, 0.3]

[[edge]]
tail = "tank"
head = "valve"
delay = 2
coefficients = [0.0, 0.0, -1.0]
"#;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let file = NetworkFile::parse(SOURCE)?;
    let canonical = file.to_toml();
    println!("{canonical}");
    if NetworkFile::parse(&canonical)? != file {
        return Err("canonical form did not round-trip".into());
    }
    println!("{}", to_dot(&file));
    match NetworkFile::parse("[network]\nnodes = [\"a\", \"a\"]\n") {
        Err(e) => println!("rejected with exit code {}: {e}", e.exit_code()),
        Ok(_) => return Err("duplicate names were accepted".into()),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
