//! Run a registered experiment from JSON and print its report.
//!
//! `cargo run --release --example run_experiment -- config.json`; without an
//! argument a small built-in config is used.

use tree_silhouette::experiments::{run_experiment, ExperimentConfig, REGISTERED};

fn main() {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref()).unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2)
        }),
        None => ExperimentConfig::from_json(
            r#"{"name": "recursion", "n": 50, "replicates": 40000, "seed": 1}"#,
        )
        .unwrap(),
    };
    println!("registered:");
    for e in REGISTERED {
        println!("  {:16} {}", e.name, e.about);
    }
    let report = run_experiment(&config).unwrap();
    print!("{}", report.summary());
    print!("{}", report.to_json());
}
