//! Run the shipped 135-case corpus through the benchmark harness and
//! print the per-domain accuracy/timing table, the same output as
//! `guard bench corpus/manifest.json`.  Expected: 135/135 correct, zero
//! false positives, zero false negatives, in well under a minute.
//!
//! Run from the repository root with `cargo run --release --example run_benchmark`.

use std::path::Path;

use guard::bench::{load_manifest, run_bench};
use guard::smt::Solver;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/manifest.json");
    let cases = load_manifest(&manifest)?;
    println!("loaded {} cases from {}", cases.len(), manifest.display());

    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let outcome = run_bench(&cases, &solver, 5000, jobs);

    print!("{}", outcome.render_table());
    if outcome.all_correct() {
        println!("all cases classified correctly");
    } else {
        println!("MISCLASSIFIED CASES PRESENT — see table above");
    }
    Ok(())
}
