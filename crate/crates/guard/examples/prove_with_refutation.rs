//! The core proof move, shown without any artifact front end: to prove a
//! property, assert its negation alongside the assumptions and ask the
//! solver for a model.  `unsat` means the property holds everywhere;
//! `sat` hands back a concrete counterexample.
//!
//! Run with `cargo run --example prove_with_refutation`.

use guard::smt::{Decl, Proof, Solver, Sort, Term};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;
    println!("solver: {}\n", solver.identity());

    let x = Term::var("x", Sort::Int);
    let y = Term::var("y", Sort::Int);
    let decls = [Decl::new("x", Sort::Int), Decl::new("y", Sort::Int)];

    // A true fact: if x < y over the integers, then x + 1 <= y.
    let assumption = x.lt(&y)?;
    let property = x.add(&Term::int(1))?.le(&y)?;
    let outcome = solver.prove(&decls, &[assumption.clone()], &property, 5000)?;
    match outcome.result {
        Proof::Proven => println!("x < y entails x + 1 <= y: proven ({} ms)", outcome.elapsed_ms),
        other => println!("unexpected: {other:?}"),
    }

    // A false one: x < y does not entail x + 2 <= y.  The solver refutes
    // the proof attempt with a touching pair like x = 0, y = 1.
    let too_strong = x.add(&Term::int(2))?.le(&y)?;
    let outcome = solver.prove(&decls, &[assumption], &too_strong, 5000)?;
    match outcome.result {
        Proof::Counterexample(model) => {
            println!("x < y does not entail x + 2 <= y; counterexample: {model}");
        }
        other => println!("unexpected: {other:?}"),
    }

    Ok(())
}
