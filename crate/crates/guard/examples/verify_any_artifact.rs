//! The unified entry point: wrap any of the five artifact families in an
//! [`Artifact`] and get back the same [`Report`] shape — verdict,
//! per-obligation timings, solver identity — ready for JSON output or
//! terminal rendering.  This is the API the CLI is a thin shell over.
//!
//! Run with `cargo run --example verify_any_artifact`.

use guard::api::{verify, Artifact};
use guard::smt::Solver;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;

    let artifacts = [
        Artifact::Command {
            text: "git status".to_string(),
        },
        Artifact::Trace {
            text: "2x + 4 = 10\n2x = 6\nx = 3\n".to_string(),
        },
        Artifact::Code {
            source: "def negate(x: int) -> int:\n    return x\n".to_string(),
            spec: "ensures: result + x == 0\n".to_string(),
        },
    ];

    for artifact in artifacts {
        let report = verify(&artifact, &solver, 5000)?;
        // Same report, two renderings: human text and archival JSON.
        print!("{}", report.render_text());
        println!("exit code would be {}", report.verdict.exit_code());
        println!("JSON: {}\n", report.to_json());
    }
    Ok(())
}
