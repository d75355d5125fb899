//! Drives a study from flat `key = value` text, the same format the
//! `biot-st` binary reads, and prints the generated CSV files instead of
//! writing them.
//!
//! Usage: cargo run --example run_from_config -- [config_file]

use biot_st::cli::{execute, parse_pairs, RunConfig};

const DEFAULT: &str = "
study = convergence
scheme = cG
k = 1
r = 2
levels = 0, 1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let cfg = RunConfig::from_pairs(None, &parse_pairs(&text)?)?;
    for (key, value) in cfg.effective() {
        println!("{key:>26} = {value}");
    }
    let outcome = execute(&cfg, |msg| eprintln!("{msg}"))?;
    for (name, contents) in &outcome.files {
        if name.ends_with(".csv") {
            println!("--- {name}");
            print!("{contents}");
        }
    }
    Ok(())
}
