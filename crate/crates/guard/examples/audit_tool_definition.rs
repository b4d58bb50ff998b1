//! Audit a tool-call definition: can any argument assignment smuggle a
//! forbidden pattern through?  An unconstrained string parameter admits
//! everything, and the solver synthesizes an injection to prove it.
//! Tightening the parameter with a length cap (or a character set) makes
//! the same pattern unreachable — verified, not just untested.
//!
//! Run with `cargo run --example audit_tool_definition`.

use guard::smt::Solver;
use guard::tool::{parse_definition, verify_tool};

const OPEN: &str = r#"{
  "name": "db_search",
  "params": [{ "name": "query", "kind": "string" }],
  "forbidden": [
    { "kind": "contains", "value": "DROP TABLE", "applies_to": "query" }
  ]
}"#;

const CAPPED: &str = r#"{
  "name": "db_search",
  "params": [{ "name": "query", "kind": "string", "max_len": 5 }],
  "forbidden": [
    { "kind": "contains", "value": "DROP TABLE", "applies_to": "query" }
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;

    for (label, text) in [("unconstrained", OPEN), ("max_len 5", CAPPED)] {
        let def = parse_definition(text)?;
        let outcome = verify_tool(&def, &solver, 5000)?;
        println!("--- query {label}: {}", outcome.verdict.status());
        if let guard::report::Verdict::Unsafe { witness, model, .. } = &outcome.verdict {
            println!("    witness: {witness}");
            println!("    model:   {model}");
        }
        // Findings flag parameters that cannot be reasoned about at all:
        // strings with neither a length cap nor a character set.
        for f in &outcome.findings {
            println!(
                "    finding: parameter \"{}\" is unconstrained; consider {}",
                f.param,
                f.missing.join(" or ")
            );
        }
        println!();
    }
    Ok(())
}
