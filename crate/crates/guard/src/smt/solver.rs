//! Driving an external SMT solver, one subprocess per query.
//!
//! The solver binary is located once per `Solver` value: the
//! `GUARD_SOLVER` environment variable wins, then a `z3` on `PATH`, then a
//! bundled `guard-z3` binary sitting next to the current executable.  Each
//! query writes a complete script to the child's stdin, waits with a
//! watchdog, and parses the first line of output — so concurrent queries
//! never share state and a wedged solver cannot hang the verifier.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use once_cell::sync::Lazy;
use thiserror::Error;

use super::model::{parse_model, Model, ModelParseError};
use super::script::{serialize, Decl, ScriptError};
use super::term::Term;

/// Default per-query time budget.
pub const DEFAULT_TIMEOUT_MS: u64 = 5000;

/// Extra wall-clock slack before a child that ignored its soft timeout is
/// killed.
const HARD_KILL_GRACE_MS: u64 = 2000;

/// Name of the environment variable that overrides solver discovery.
pub const SOLVER_ENV_VAR: &str = "GUARD_SOLVER";

/// Answer to a satisfiability query.
#[derive(Debug, Clone, PartialEq)]
pub enum SatResult {
    /// Satisfiable, with a completed model for every declared variable.
    Sat(Model),
    Unsat,
    /// The solver gave up; the reason is human-readable ("timeout", ...).
    Unknown { reason: String },
}

/// Result of a `check_sat` call, with the solver wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub result: SatResult,
    pub elapsed_ms: u64,
}

/// Answer to a proof obligation.
#[derive(Debug, Clone, PartialEq)]
pub enum Proof {
    /// The property holds on every input (its negation is unsatisfiable).
    Proven,
    /// A concrete input violating the property.
    Counterexample(Model),
    Unknown { reason: String },
}

/// Result of a `prove` call, with the solver wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProveOutcome {
    pub result: Proof,
    pub elapsed_ms: u64,
}

/// Environment and process-level failures, kept distinct from `Unknown`
/// verdicts: a missing binary or a crash is a broken setup, not an answer.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error(
        "no SMT solver found: set {SOLVER_ENV_VAR}, install z3 on PATH, or build the bundled \
         guard-z3 binary"
    )]
    NotFound,
    #[error("cannot run solver {program}: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exited with {status}; stderr: {stderr}")]
    Crashed { status: String, stderr: String },
    #[error("solver printed no verdict; output: {output}")]
    NoVerdict { output: String },
    #[error("solver rejected the script: {message}")]
    Rejected { message: String },
    #[error(transparent)]
    Model(#[from] ModelParseError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Sort(#[from] super::term::SortError),
}

/// Handle on a discovered solver binary.  Cheap to clone; every query
/// spawns a fresh subprocess.
#[derive(Debug, Clone)]
pub struct Solver {
    program: PathBuf,
}

impl Solver {
    /// Locate a solver: `GUARD_SOLVER`, then `z3` on `PATH`, then a
    /// sibling `guard-z3` binary.
    pub fn from_env() -> Result<Solver, SolverError> {
        if let Ok(custom) = std::env::var(SOLVER_ENV_VAR) {
            let custom = custom.trim();
            if !custom.is_empty() {
                return Ok(Solver {
                    program: PathBuf::from(custom),
                });
            }
        }
        if runs_version(Path::new("z3")) {
            return Ok(Solver {
                program: PathBuf::from("z3"),
            });
        }
        if let Some(bundled) = find_bundled() {
            return Ok(Solver { program: bundled });
        }
        Err(SolverError::NotFound)
    }

    /// Use an explicit binary, bypassing discovery.
    pub fn with_program(program: impl Into<PathBuf>) -> Solver {
        Solver {
            program: program.into(),
        }
    }

    pub fn program(&self) -> &Path {
        &self.program
    }

    /// First line of `<solver> -version`, cached per binary path.
    pub fn identity(&self) -> String {
        static CACHE: Lazy<Mutex<BTreeMap<PathBuf, String>>> =
            Lazy::new(|| Mutex::new(BTreeMap::new()));
        if let Some(hit) = CACHE.lock().unwrap().get(&self.program) {
            return hit.clone();
        }
        let identity = Command::new(&self.program)
            .arg("-version")
            .output()
            .ok()
            .and_then(|out| {
                let text = String::from_utf8_lossy(&out.stdout);
                text.lines().next().map(|l| l.trim().to_string())
            })
            .filter(|l| !l.is_empty())
            .unwrap_or_else(|| format!("{} (version unknown)", self.program.display()));
        CACHE
            .lock()
            .unwrap()
            .insert(self.program.clone(), identity.clone());
        identity
    }

    /// Ask whether the conjunction of `assertions` is satisfiable.
    pub fn check_sat(
        &self,
        decls: &[Decl],
        assertions: &[Term],
        timeout_ms: u64,
    ) -> Result<CheckOutcome, SolverError> {
        let script = serialize(decls, assertions)?;
        let started = Instant::now();
        let raw = self.run(&script, timeout_ms)?;
        let elapsed_ms = started.elapsed().as_millis() as u64;

        let result = match raw {
            RunOutput::TimedOut => SatResult::Unknown {
                reason: format!("no answer within {timeout_ms} ms (killed)"),
            },
            RunOutput::Finished { output, status, stderr } => {
                let verdict = output
                    .lines()
                    .map(str::trim)
                    .find(|l| !l.is_empty());
                match verdict {
                    Some("sat") => {
                        let rest = output.split_once("sat").map(|(_, r)| r).unwrap_or("");
                        let sorts: BTreeMap<_, _> = decls
                            .iter()
                            .map(|d| (d.name.clone(), d.sort.clone()))
                            .collect();
                        SatResult::Sat(parse_model(rest, &sorts)?)
                    }
                    Some("unsat") => SatResult::Unsat,
                    Some("unknown") | Some("timeout") => SatResult::Unknown {
                        reason: format!("solver answered unknown after {elapsed_ms} ms"),
                    },
                    Some(line) if line.starts_with("(error") => {
                        return Err(SolverError::Rejected {
                            message: first_error_line(&output),
                        })
                    }
                    _ => {
                        if !status.success() {
                            return Err(SolverError::Crashed {
                                status: status.to_string(),
                                stderr: stderr.trim().to_string(),
                            });
                        }
                        return Err(SolverError::NoVerdict { output });
                    }
                }
            }
        };
        Ok(CheckOutcome { result, elapsed_ms })
    }

    /// Prove that `assumptions` entail `property` by refuting the negation.
    pub fn prove(
        &self,
        decls: &[Decl],
        assumptions: &[Term],
        property: &Term,
        timeout_ms: u64,
    ) -> Result<ProveOutcome, SolverError> {
        let mut assertions = assumptions.to_vec();
        assertions.push(property.not()?);
        let outcome = self.check_sat(decls, &assertions, timeout_ms)?;
        Ok(ProveOutcome {
            result: match outcome.result {
                SatResult::Unsat => Proof::Proven,
                SatResult::Sat(model) => Proof::Counterexample(model),
                SatResult::Unknown { reason } => Proof::Unknown { reason },
            },
            elapsed_ms: outcome.elapsed_ms,
        })
    }

    /// Feed a script to a fresh solver process and collect its output,
    /// killing the child if it overruns the soft timeout plus grace.
    fn run(&self, script: &str, timeout_ms: u64) -> Result<RunOutput, SolverError> {
        let mut child = Command::new(&self.program)
            .arg("-in")
            .arg("-smt2")
            .arg(format!("-t:{timeout_ms}"))
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SolverError::Spawn {
                program: self.program.display().to_string(),
                source,
            })?;

        // Write the script and close stdin so the solver sees EOF.  The
        // child may already have exited (e.g. usage error) — a broken pipe
        // here is reported by the verdict parsing, not as an i/o error.
        if let Some(mut stdin) = child.stdin.take() {
            let _ = stdin.write_all(script.as_bytes());
        }

        // Read concurrently with the watchdog to avoid pipe-buffer
        // deadlock on large models.
        let stdout = child.stdout.take().expect("stdout piped");
        let stderr = child.stderr.take().expect("stderr piped");
        let out_reader = std::thread::spawn(move || read_all(stdout));
        let err_reader = std::thread::spawn(move || read_all(stderr));

        let deadline = Instant::now() + Duration::from_millis(timeout_ms + HARD_KILL_GRACE_MS);
        let status = loop {
            match child.try_wait()? {
                Some(status) => break Some(status),
                None if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    break None;
                }
                None => std::thread::sleep(Duration::from_millis(2)),
            }
        };
        let output = out_reader.join().unwrap_or_default();
        let stderr = err_reader.join().unwrap_or_default();

        match status {
            None => Ok(RunOutput::TimedOut),
            Some(status) => Ok(RunOutput::Finished {
                output,
                status,
                stderr,
            }),
        }
    }
}

enum RunOutput {
    TimedOut,
    Finished {
        output: String,
        status: std::process::ExitStatus,
        stderr: String,
    },
}

fn read_all(mut reader: impl std::io::Read) -> String {
    let mut buf = Vec::new();
    let _ = reader.read_to_end(&mut buf);
    String::from_utf8_lossy(&buf).into_owned()
}

fn first_error_line(output: &str) -> String {
    output
        .lines()
        .find(|l| l.trim_start().starts_with("(error"))
        .unwrap_or("")
        .trim()
        .to_string()
}

/// Does `<program> -version` run successfully?
fn runs_version(program: &Path) -> bool {
    Command::new(program)
        .arg("-version")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

/// Look for the bundled `guard-z3` near the current executable.  Tests run
/// from `target/<profile>/deps/`, examples from `target/<profile>/examples/`,
/// the CLI from `target/<profile>/` — so check the executable's own
/// directory and its parent.
fn find_bundled() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let name = format!("guard-z3{}", std::env::consts::EXE_SUFFIX);
    let mut dir = exe.parent()?;
    for _ in 0..2 {
        let candidate = dir.join(&name);
        if candidate.is_file() {
            return Some(candidate);
        }
        dir = dir.parent()?;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smt::{Sort, Value};

    fn solver() -> Solver {
        Solver::from_env().expect("an SMT solver must be available for tests")
    }

    fn int_decl(name: &str) -> Decl {
        Decl::new(name, Sort::Int)
    }

    #[test]
    fn sat_with_model() {
        let x = Term::var("x", Sort::Int);
        let outcome = solver()
            .check_sat(
                &[int_decl("x")],
                &[x.gt(&Term::int(5)).unwrap()],
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap();
        match outcome.result {
            SatResult::Sat(model) => {
                let Some(Value::Int(v)) = model.get("x") else {
                    panic!("x missing from model: {model}");
                };
                assert!(v > &num::BigInt::from(5));
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn contradiction_is_unsat() {
        let x = Term::var("x", Sort::Int);
        let outcome = solver()
            .check_sat(
                &[int_decl("x")],
                &[
                    x.gt(&Term::int(5)).unwrap(),
                    x.lt(&Term::int(4)).unwrap(),
                ],
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap();
        assert_eq!(outcome.result, SatResult::Unsat);
    }

    #[test]
    fn prove_entailment() {
        // x > 0 entails x >= 1 over the integers.
        let x = Term::var("x", Sort::Int);
        let outcome = solver()
            .prove(
                &[int_decl("x")],
                &[x.gt(&Term::int(0)).unwrap()],
                &x.ge(&Term::int(1)).unwrap(),
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap();
        assert_eq!(outcome.result, Proof::Proven);
    }

    #[test]
    fn failed_proof_returns_the_unique_counterexample() {
        // x > 0 does not entail x > 1; the only counterexample is x = 1.
        let x = Term::var("x", Sort::Int);
        let outcome = solver()
            .prove(
                &[int_decl("x")],
                &[x.gt(&Term::int(0)).unwrap()],
                &x.gt(&Term::int(1)).unwrap(),
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap();
        match outcome.result {
            Proof::Counterexample(model) => {
                assert_eq!(model.get("x"), Some(&Value::int(1)));
            }
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn model_values_satisfy_the_assertions() {
        use crate::smt::{satisfies, Env};
        let x = Term::var("x", Sort::Int);
        let y = Term::var("y", Sort::Int);
        let assertions = vec![
            x.add(&y).unwrap().eq(&Term::int(10)).unwrap(),
            x.sub(&y).unwrap().gt(&Term::int(3)).unwrap(),
        ];
        let outcome = solver()
            .check_sat(
                &[int_decl("x"), int_decl("y")],
                &assertions,
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap();
        let SatResult::Sat(model) = outcome.result else {
            panic!("expected sat");
        };
        let env = Env::from_model(&model);
        assert_eq!(satisfies(&assertions, &env), Ok(true));
    }

    #[test]
    fn bitvector_model_round_trips_hex() {
        let r = Term::var("r", Sort::BitVec(32));
        let outcome = solver()
            .check_sat(
                &[Decl::new("r", Sort::BitVec(32))],
                &[r.bv_slt(&Term::bits(32, 0)).unwrap()],
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap();
        let SatResult::Sat(model) = outcome.result else {
            panic!("expected sat");
        };
        let v = model.get("r").expect("r bound");
        let Value::Bits { width: 32, bits } = v else {
            panic!("expected a 32-bit value, got {v:?}");
        };
        // Negative as signed: the high bit must be set.
        assert!(bits & 0x8000_0000 != 0);
        assert!(v.lexical().starts_with("#x"));
        assert_eq!(Value::from_lexical(&v.lexical()), *v);
    }

    #[test]
    fn ssa_style_quoted_names_survive_the_round_trip() {
        let v = Term::var("x#1", Sort::Int);
        let outcome = solver()
            .check_sat(
                &[Decl::new("x#1", Sort::Int)],
                &[v.eq(&Term::int(42)).unwrap()],
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap();
        let SatResult::Sat(model) = outcome.result else {
            panic!("expected sat");
        };
        assert_eq!(model.get("x#1"), Some(&Value::int(42)));
    }

    #[test]
    fn missing_binary_is_an_environment_error() {
        let solver = Solver::with_program("/nonexistent/solver-binary");
        let x = Term::var("x", Sort::Int);
        let err = solver
            .check_sat(
                &[int_decl("x")],
                &[x.gt(&Term::int(0)).unwrap()],
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap_err();
        assert!(matches!(err, SolverError::Spawn { .. }), "got {err}");
    }

    #[test]
    fn identity_reports_a_version_line() {
        let id = solver().identity();
        assert!(!id.is_empty());
        // Cached second call returns the same string.
        assert_eq!(solver().identity(), id);
    }

    #[test]
    fn string_constraint_produces_a_string_witness() {
        let s = Term::var("s", Sort::Str);
        let outcome = solver()
            .check_sat(
                &[Decl::new("s", Sort::Str)],
                &[
                    Term::str_concat(vec![Term::str_lit("run "), s.clone()])
                        .unwrap()
                        .str_contains(&Term::str_lit("rm -rf"))
                        .unwrap(),
                ],
                DEFAULT_TIMEOUT_MS,
            )
            .unwrap();
        let SatResult::Sat(model) = outcome.result else {
            panic!("expected sat");
        };
        let Some(Value::Str(witness)) = model.get("s") else {
            panic!("expected string binding, got {:?}", model.get("s"));
        };
        assert!(format!("run {witness}").contains("rm -rf"));
    }
}
