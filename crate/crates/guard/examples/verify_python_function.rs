//! Verify a small Python function against a contract, end to end: parse,
//! translate to a single symbolic result term, and prove each `ensures`
//! clause for every input at once.  The buggy variant is rejected with a
//! concrete input that breaks the contract.
//!
//! Run with `cargo run --example verify_python_function`.

use guard::code::{parse_function, parse_spec, verify_code};
use guard::smt::Solver;

const CORRECT: &str = "\
def clamp(x: int, lo: int, hi: int) -> int:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x
";

// Same shape, but the first comparison is flipped: values below `lo`
// fall through and come back unclamped.
const BUGGY: &str = "\
def clamp(x: int, lo: int, hi: int) -> int:
    if x > lo:
        return lo
    if x > hi:
        return hi
    return x
";

const CONTRACT: &str = "\
requires: lo <= hi
ensures: lo <= result
ensures: result <= hi
ensures: result == x or result == lo or result == hi
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;
    let spec = parse_spec(CONTRACT)?;

    for (label, source) in [("correct", CORRECT), ("buggy", BUGGY)] {
        let fun = parse_function(source)?;
        let outcome = verify_code(&fun, &spec, &solver, 5000)??;
        println!("--- {label} clamp: {}", outcome.verdict.status());
        for o in &outcome.obligations {
            println!("    [{:?}] {}", o.status, o.label);
        }
        if let guard::report::Verdict::Unsafe { witness, .. } = &outcome.verdict {
            println!("    witness: {witness}");
        }
        println!();
    }
    Ok(())
}
