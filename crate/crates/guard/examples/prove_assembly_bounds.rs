//! Prove range properties of RV32I programs over all 2^32 initial values.
//! The running example is the classic branchless absolute value: correct
//! on every input except one, and the solver finds that one input — the
//! minimum 32-bit integer, whose negation overflows back to itself.
//!
//! Run with `cargo run --example prove_assembly_bounds`.

use guard::report::Verdict;
use guard::riscv::{parse_asm, parse_properties, verify_program};
use guard::smt::Solver;

const BRANCHLESS_ABS: &str = "\
srai t0, a0, 31
xor  t1, a0, t0
sub  a0, t1, t0
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;
    let program = parse_asm(BRANCHLESS_ABS)?;

    // Claim: the result is always a non-negative 32-bit integer.
    let props = parse_properties("bound a0 0 2147483647\n")?;
    let outcome = verify_program(&program, &props, &solver, 5000)?;
    println!("abs result in [0, 2^31-1]: {}", outcome.verdict.status());
    if let Verdict::Unsafe { witness, model, .. } = &outcome.verdict {
        println!("    witness: {witness}");
        println!("    model:   {model}");
    }

    // Exclude the single overflowing input and the same claim is proven
    // for the remaining 2^32 - 1 initial states.
    let props = parse_properties("assume a0 != 0x80000000\nbound a0 0 2147483647\n")?;
    let outcome = verify_program(&program, &props, &solver, 5000)?;
    println!("same bound given a0 != INT_MIN: {}", outcome.verdict.status());
    for o in &outcome.obligations {
        println!("    [{:?}] {} ({} ms)", o.status, o.label, o.time_ms);
    }
    Ok(())
}
