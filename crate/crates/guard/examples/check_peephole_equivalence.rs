//! Decide whether two instruction sequences are interchangeable: same
//! observed registers (and memory) from every shared initial state.  The
//! classic strength reduction `add x,x,x` = `slli x,x,1` goes through;
//! swapping an arithmetic shift for a logical one is refuted with an
//! input whose sign bit is set — exactly the case the two shifts disagree on.
//!
//! Run with `cargo run --example check_peephole_equivalence`.

use guard::report::Verdict;
use guard::riscv::{check_equivalence, default_observed, parse_asm, reg_name};
use guard::smt::Solver;

fn check(
    label: &str,
    left: &str,
    right: &str,
    solver: &Solver,
) -> Result<(), Box<dyn std::error::Error>> {
    let a = parse_asm(left)?;
    let b = parse_asm(right)?;
    // Observe every register either side writes; untouched registers are
    // trivially equal and would only pad the query.
    let observed = default_observed(&a, &b);
    let names: Vec<&str> = observed.iter().map(|&r| reg_name(r)).collect();
    let outcome = check_equivalence(&a, &b, &observed, solver, 5000)?;
    println!("{label} (observing {}): {}", names.join(", "), outcome.verdict.status());
    if let Verdict::Unsafe { witness, model, .. } = &outcome.verdict {
        println!("    witness: {witness}");
        println!("    model:   {model}");
    }
    println!();
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;
    check(
        "add a0,a0,a0 vs slli a0,a0,1",
        "add a0, a0, a0\n",
        "slli a0, a0, 1\n",
        &solver,
    )?;
    check(
        "srai a0,a0,2 vs srli a0,a0,2",
        "srai a0, a0, 2\n",
        "srli a0, a0, 2\n",
        &solver,
    )?;
    check(
        "store-load vs store-forward",
        "sw a1, 0(a0)\nlw a2, 0(a0)\n",
        "sw a1, 0(a0)\nmv a2, a1\n",
        &solver,
    )?;
    Ok(())
}
