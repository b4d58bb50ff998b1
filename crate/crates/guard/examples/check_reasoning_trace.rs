//! Check algebraic reasoning line by line.  Each step of a trace must be
//! implied by the equation before it; a wrong step yields a witness value
//! that satisfies the premise but not the conclusion.  The same machinery
//! compares a distilled (shortened) derivation against its reference.
//!
//! Run with `cargo run --example check_reasoning_trace`.

use guard::distill::{compare_traces, parse_trace, verify_trace};
use guard::report::Verdict;
use guard::smt::Solver;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;

    // A complete, correct derivation.
    let good = parse_trace("3x + 6 = 15\n3x = 9\nx = 3\n")?;
    let outcome = verify_trace(&good, &solver, 5000)?;
    println!("3x + 6 = 15 => 3x = 9 => x = 3: {}", outcome.verdict.status());

    // A botched final division.  The witness is the exact value that
    // satisfies 3x = 9 but not x = 4.
    let bad = parse_trace("3x = 9\nx = 4\n")?;
    let outcome = verify_trace(&bad, &solver, 5000)?;
    println!("3x = 9 => x = 4: {}", outcome.verdict.status());
    if let Verdict::Unsafe { witness, .. } = &outcome.verdict {
        println!("    witness: {witness}");
    }

    // Distillation: a shorter route to the same conclusion is accepted,
    // as long as every remaining step is valid.
    let reference = parse_trace("4x + 4 = 12\n4x = 8\nx = 2\n")?;
    let distilled = parse_trace("4x + 4 = 12\nx = 2\n")?;
    let cmp = compare_traces(&reference, &distilled, &solver, 5000)??;
    println!(
        "distilled (one step dropped): {}, diverges at {:?}",
        cmp.verdict.status(),
        cmp.first_divergence
    );

    // A distilled trace that lands on a different conclusion is rejected
    // even though the reference was fine.
    let drifted = parse_trace("4x + 4 = 12\nx = 3\n")?;
    let cmp = compare_traces(&reference, &drifted, &solver, 5000)??;
    println!("distilled (wrong conclusion): {}", cmp.verdict.status());
    if let Verdict::Unsafe { witness, .. } = &cmp.verdict {
        println!("    witness: {witness}");
    }
    Ok(())
}
