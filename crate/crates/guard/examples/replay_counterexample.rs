//! Counterexamples are not taken on faith.  Every unsafe verdict carries a
//! model — concrete values for the artifact's free variables — and the
//! same translation that produced the proof obligation can be evaluated
//! on those values to watch the violation happen outside the solver.
//!
//! Run with `cargo run --example replay_counterexample`.

use guard::code::{parse_function, parse_spec, ssa_translate, verify_code};
use guard::report::Verdict;
use guard::smt::{eval, Env, Solver, Value};

// Branches swapped: negative inputs come back negative.
const BUGGY_ABS: &str = "\
def my_abs(x: int) -> int:
    if x >= 0:
        return -x
    else:
        return x
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;
    let fun = parse_function(BUGGY_ABS)?;
    let spec = parse_spec("ensures: result >= 0\n")?;

    let outcome = verify_code(&fun, &spec, &solver, 5000)??;
    let Verdict::Unsafe { witness, model, .. } = &outcome.verdict else {
        println!("unexpectedly {}", outcome.verdict.status());
        return Ok(());
    };
    println!("solver says: {witness}");

    // Replay: evaluate the function's symbolic result term on the model's
    // values.  This is an independent execution path — term evaluation in
    // exact arithmetic — so agreement here means the counterexample is
    // real, not a solver artifact.
    let ssa = ssa_translate(&fun);
    let env = Env::from_model(model);
    let result = eval(&ssa.result, &env)?;
    println!("replayed my_abs({}) = {}", model.get("x").unwrap().describe(), result.describe());

    match result {
        Value::Int(n) if n < num::BigInt::from(0) => {
            println!("confirmed: result {n} violates `result >= 0`")
        }
        other => println!("replay disagrees with the solver: got {}", other.describe()),
    }
    Ok(())
}
