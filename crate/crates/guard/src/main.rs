//! `guard` — verify machine-produced artifacts from the command line.
//!
//! Thin wrapper over the library: each subcommand assembles an
//! [`api::Artifact`] from files or arguments, calls [`api::verify`], and
//! renders the report.  Exit codes are part of the contract: 0 verified,
//! 1 unsafe, 2 unsupported, 3 unknown or environment failure, 64 usage or
//! input error.  With `--json`, stdout carries exactly one JSON document
//! and nothing else; all diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use guard::api::{self, Artifact, AsmCheck, VerifyError};
use guard::report::{ArtifactKind, Report};
use guard::smt::Solver;
use guard::{bench, shell, tool};

const EXIT_UNKNOWN: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "guard",
    version,
    about = "Prove safety properties of machine-produced artifacts, or produce a counterexample"
)]
struct Cli {
    /// Emit the report as JSON (the only stdout output)
    #[arg(long, global = true)]
    json: bool,

    /// Solver time budget per artifact, in milliseconds
    #[arg(long, global = true, default_value_t = 5000, value_name = "MS")]
    timeout_ms: u64,

    /// Print the shell danger-pattern table and exit
    #[arg(long, global = true)]
    dump_patterns: bool,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify a restricted-subset Python function against its contract
    Code {
        /// Function source file
        source: PathBuf,
        /// Contract file of `requires:` / `ensures:` lines
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
    },
    /// Prove a tool definition can never render a forbidden pattern
    Tool {
        /// JSON tool definition file
        definition: PathBuf,
    },
    /// Check an algebraic reasoning trace step by step
    Distill {
        /// Trace file, one equation per line
        trace: PathBuf,
        /// Compare a distilled trace against this one as the reference
        #[arg(long, value_name = "FILE")]
        compare: Option<PathBuf>,
    },
    /// Screen a shell command against the danger-pattern table
    Cli {
        /// The command text (quote it)
        command: Option<String>,
        /// Read the command from a file instead
        #[arg(long, value_name = "FILE", conflicts_with = "command")]
        file: Option<PathBuf>,
    },
    /// Prove properties of an assembly program, or equivalence of two
    Asm {
        /// Assembly source file
        program: PathBuf,
        /// Property file (`bound` / `nopriv` / `memwithin` / `assume` lines)
        #[arg(long, value_name = "FILE", conflicts_with = "equiv")]
        props: Option<PathBuf>,
        /// Second program; prove both leave the same observable state
        #[arg(long, value_name = "FILE")]
        equiv: Option<PathBuf>,
    },
    /// Run a corpus manifest and report per-domain accuracy
    Bench {
        /// Manifest JSON listing cases and expected verdicts
        manifest: PathBuf,
        /// Maximum cases verified in parallel
        #[arg(long, value_name = "N", default_value_t = default_jobs())]
        jobs: usize,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version print to stdout and exit 0; real usage errors
            // print to stderr and exit 64.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if cli.dump_patterns {
        dump_patterns(cli.json);
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (try `guard --help`)");
        return ExitCode::from(EXIT_USAGE);
    };

    let solver = match Solver::from_env() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_UNKNOWN);
        }
    };

    match command {
        Cmd::Bench { manifest, jobs } => run_bench(&manifest, &solver, cli.timeout_ms, jobs, cli.json),
        other => run_verify(other, &solver, cli.timeout_ms, cli.json),
    }
}

/// Write to stdout, tolerating a closed pipe (`guard ... | head`): the
/// exit code should still reflect the verdict.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn emit_line(text: &str) {
    emit(text);
    emit("\n");
}

fn dump_patterns(json: bool) {
    if json {
        let table: Vec<serde_json::Value> = shell::categories()
            .iter()
            .map(|c| {
                serde_json::json!({
                    "id": c.id,
                    "slug": c.slug,
                    "name": c.name,
                    "description": c.description,
                    "patterns": c.pattern_sources(),
                })
            })
            .collect();
        emit_line(
            &serde_json::to_string_pretty(&serde_json::json!({ "categories": table }))
                .expect("static table serializes"),
        );
    } else {
        emit(&shell::pattern_table());
    }
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_USAGE)
    })
}

fn build_artifact(command: Cmd) -> Result<Artifact, ExitCode> {
    Ok(match command {
        Cmd::Code { source, spec } => Artifact::Code {
            source: read(&source)?,
            spec: read(&spec)?,
        },
        Cmd::Tool { definition } => Artifact::Tool {
            definition: read(&definition)?,
        },
        Cmd::Distill { trace, compare } => match compare {
            Some(compare) => Artifact::TracePair {
                reference: read(&trace)?,
                distilled: read(&compare)?,
            },
            None => Artifact::Trace { text: read(&trace)? },
        },
        Cmd::Cli { command, file } => {
            let text = match (command, file) {
                (Some(text), None) => text,
                (None, Some(path)) => read(&path)?.trim_end().to_string(),
                _ => {
                    eprintln!("error: pass a command string or --file, not neither");
                    return Err(ExitCode::from(EXIT_USAGE));
                }
            };
            Artifact::Command { text }
        }
        Cmd::Asm {
            program,
            props,
            equiv,
        } => {
            let check = match (props, equiv) {
                (Some(props), None) => AsmCheck::Properties(read(&props)?),
                (None, Some(equiv)) => AsmCheck::Equivalence(read(&equiv)?),
                _ => {
                    eprintln!("error: pass exactly one of --props or --equiv");
                    return Err(ExitCode::from(EXIT_USAGE));
                }
            };
            Artifact::Assembly {
                program: read(&program)?,
                check,
            }
        }
        Cmd::Bench { .. } => unreachable!("bench handled separately"),
    })
}

fn run_verify(command: Cmd, solver: &Solver, timeout_ms: u64, json: bool) -> ExitCode {
    let artifact = match build_artifact(command) {
        Ok(a) => a,
        Err(code) => return code,
    };
    match api::verify(&artifact, solver, timeout_ms) {
        Ok(report) => {
            render(&report, &artifact, json);
            ExitCode::from(report.verdict.exit_code())
        }
        Err(e @ VerifyError::Input { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(VerifyError::Solver(e)) => {
            eprintln!("error: solver failure: {e}");
            ExitCode::from(EXIT_UNKNOWN)
        }
    }
}

fn render(report: &Report, artifact: &Artifact, json: bool) {
    if json {
        emit_line(&report.to_json());
        return;
    }
    emit(&report.render_text());
    // Advisory output beyond the report itself.
    if report.kind == ArtifactKind::Tool {
        if let Artifact::Tool { definition } = artifact {
            if let Ok(def) = tool::parse_definition(definition) {
                for finding in tool::explain_unverifiability(&def) {
                    emit_line(&format!(
                        "note: parameter {:?} lacks {}; {}",
                        finding.param,
                        finding.missing.join(" and "),
                        finding.recommendation
                    ));
                }
            }
        }
    }
}

fn run_bench(
    manifest: &Path,
    solver: &Solver,
    timeout_ms: u64,
    jobs: usize,
    json: bool,
) -> ExitCode {
    let cases = match bench::load_manifest(manifest) {
        Ok(cases) => cases,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = bench::run_bench(&cases, solver, timeout_ms, jobs);
    if json {
        emit_line(&outcome.to_json());
    } else {
        emit(&outcome.render_table());
    }
    if outcome.all_correct() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
