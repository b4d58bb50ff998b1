//! Unified entry point: a tagged artifact goes in, a uniform [`Report`]
//! comes out.
//!
//! [`verify`] parses the artifact's raw text, dispatches to the matching
//! verifier, and wraps the outcome.  Two failure channels stay distinct:
//!
//! * malformed input (syntax errors, bad contracts, mismatched premises)
//!   is an [`VerifyError::Input`] — the caller never gets a report;
//! * out-of-subset constructs in an otherwise well-formed artifact are a
//!   [`Verdict::Unsupported`] *report*, because "we cannot model this" is
//!   an answer about the artifact, not a usage mistake.
//!
//! Unsafe and Unknown are likewise report values, never errors.  The
//! verdict inside the report is exactly the dispatched verifier's verdict.
//!
//! One solver-timeout budget covers the whole call: it is split evenly
//! across the artifact's obligations with a floor of 250 ms each, so a
//! single stalling obligation cannot starve the rest.

use std::time::Instant;

use thiserror::Error;

use crate::report::{ArtifactKind, ObligationRecord, Report, Verdict};
use crate::smt::{Solver, SolverError};
use crate::{code, distill, riscv, shell, tool};

/// One artifact to verify, as raw text plus whatever companion text the
/// family needs.  The variant picks the verifier.
#[derive(Debug, Clone)]
pub enum Artifact {
    /// Function source plus a requires/ensures contract.
    Code { source: String, spec: String },
    /// JSON tool definition (self-contained: patterns live inside).
    Tool { definition: String },
    /// One reasoning trace, checked step by step.
    Trace { text: String },
    /// Reference and distilled traces, compared after both are checked.
    TracePair {
        reference: String,
        distilled: String,
    },
    /// A shell command line.
    Command { text: String },
    /// Assembly program plus either a property file or a second program
    /// to compare against.
    Assembly { program: String, check: AsmCheck },
}

/// What to prove about an assembly program.
#[derive(Debug, Clone)]
pub enum AsmCheck {
    /// Property-file text (`bound`/`nopriv`/`memwithin`/`assume` lines).
    Properties(String),
    /// Second program; prove both leave the same observable state.
    Equivalence(String),
}

impl Artifact {
    pub fn kind(&self) -> ArtifactKind {
        match self {
            Artifact::Code { .. } => ArtifactKind::Code,
            Artifact::Tool { .. } => ArtifactKind::Tool,
            Artifact::Trace { .. } | Artifact::TracePair { .. } => ArtifactKind::Distill,
            Artifact::Command { .. } => ArtifactKind::Cli,
            Artifact::Assembly { .. } => ArtifactKind::Asm,
        }
    }
}

/// Failures that prevent a report from existing at all.
#[derive(Debug, Error)]
pub enum VerifyError {
    /// The artifact (or its companion spec) is malformed.
    #[error("{kind} input error: {message}")]
    Input {
        kind: ArtifactKind,
        message: String,
    },
    /// The solver process failed or misbehaved.
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn input(kind: ArtifactKind, error: impl std::fmt::Display) -> VerifyError {
    VerifyError::Input {
        kind,
        message: error.to_string(),
    }
}

/// No obligation runs with less than this, regardless of how many share
/// the budget.
const MIN_OBLIGATION_BUDGET_MS: u64 = 250;

fn per_obligation_budget(total_ms: u64, obligations: usize) -> u64 {
    (total_ms / obligations.max(1) as u64).max(MIN_OBLIGATION_BUDGET_MS)
}

/// Verify one artifact end to end.  `timeout_ms` is the solver budget for
/// the whole artifact (wall-clock parsing/encoding time is not counted
/// against it).
pub fn verify(
    artifact: &Artifact,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let kind = artifact.kind();
    let (verdict, obligations) = dispatch(artifact, kind, solver, timeout_ms)?;
    Ok(Report::new(
        kind,
        verdict,
        obligations,
        start.elapsed().as_millis() as u64,
        solver.identity(),
    ))
}

fn dispatch(
    artifact: &Artifact,
    kind: ArtifactKind,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<(Verdict, Vec<ObligationRecord>), VerifyError> {
    match artifact {
        Artifact::Code { source, spec } => {
            let fun = match code::parse_function(source) {
                Ok(fun) => fun,
                Err(code::CodeError::Unsupported { feature, .. }) => {
                    return Ok((Verdict::Unsupported { feature }, Vec::new()))
                }
                Err(e) => return Err(input(kind, e)),
            };
            // The contract file is operator-supplied, so every problem in
            // it — including out-of-subset constructs — is an input error.
            let spec = code::parse_spec(spec).map_err(|e| input(kind, e))?;
            let planned = code::ssa_translate(&fun).obligations.len() + spec.ensures.len();
            let budget = per_obligation_budget(timeout_ms, planned);
            match code::verify_code(&fun, &spec, solver, budget)? {
                Ok(out) => Ok((out.verdict, out.obligations)),
                Err(e) => Err(input(kind, e)),
            }
        }
        Artifact::Tool { definition } => {
            let def = tool::parse_definition(definition).map_err(|e| input(kind, e))?;
            let budget = per_obligation_budget(timeout_ms, def.forbidden.len());
            let out = tool::verify_tool(&def, solver, budget)?;
            Ok((out.verdict, out.obligations))
        }
        Artifact::Trace { text } => {
            let trace = distill::parse_trace(text).map_err(|e| input(kind, e))?;
            let steps = trace.equations.len().saturating_sub(1);
            let budget = per_obligation_budget(timeout_ms, steps);
            let out = distill::verify_trace(&trace, solver, budget)?;
            Ok((out.verdict, out.obligations))
        }
        Artifact::TracePair {
            reference,
            distilled,
        } => {
            let reference = distill::parse_trace(reference).map_err(|e| input(kind, e))?;
            let distilled = distill::parse_trace(distilled).map_err(|e| input(kind, e))?;
            let steps = (reference.equations.len() + distilled.equations.len())
                .saturating_sub(2);
            let budget = per_obligation_budget(timeout_ms, steps);
            match distill::compare_traces(&reference, &distilled, solver, budget)? {
                Ok(out) => Ok((out.verdict, out.obligations)),
                Err(e) => Err(input(kind, e)),
            }
        }
        Artifact::Command { text } => {
            match shell::verify_command(text, solver, timeout_ms)? {
                Ok(out) => Ok((out.verdict, out.obligations)),
                Err(e) => Err(input(kind, e)),
            }
        }
        Artifact::Assembly { program, check } => {
            let program = match parse_program(program) {
                Ok(p) => p,
                Err(Parsed::Unsupported(feature)) => {
                    return Ok((Verdict::Unsupported { feature }, Vec::new()))
                }
                Err(Parsed::Input(e)) => return Err(input(kind, e)),
            };
            match check {
                AsmCheck::Properties(text) => {
                    let props = riscv::parse_properties(text).map_err(|e| input(kind, e))?;
                    let planned = props.properties.len() + planned_memory_obligations(&program, &props);
                    let budget = per_obligation_budget(timeout_ms, planned);
                    let out = riscv::verify_program(&program, &props, solver, budget)?;
                    Ok((out.verdict, out.obligations))
                }
                AsmCheck::Equivalence(other) => {
                    let other = match parse_program(other) {
                        Ok(p) => p,
                        Err(Parsed::Unsupported(feature)) => {
                            return Ok((Verdict::Unsupported { feature }, Vec::new()))
                        }
                        Err(Parsed::Input(e)) => return Err(input(kind, e)),
                    };
                    let observed = riscv::default_observed(&program, &other);
                    let out = riscv::check_equivalence(
                        &program,
                        &other,
                        &observed,
                        solver,
                        timeout_ms,
                    )?;
                    Ok((out.verdict, out.obligations))
                }
            }
        }
    }
}

enum Parsed {
    Unsupported(String),
    Input(String),
}

fn parse_program(text: &str) -> Result<Vec<riscv::Instruction>, Parsed> {
    riscv::parse_asm(text).map_err(|e| match e {
        riscv::AsmError::Unsupported { what, .. } => Parsed::Unsupported(what),
        other => Parsed::Input(other.to_string()),
    })
}

/// Loads and stores each carry an alignment obligation, plus a bounds
/// obligation when a `memwithin` region is declared.
fn planned_memory_obligations(
    program: &[riscv::Instruction],
    props: &riscv::PropertySet,
) -> usize {
    let has_region = props
        .properties
        .iter()
        .any(|p| matches!(p, riscv::HwProperty::MemoryWithin { .. }));
    if !has_region {
        return 0;
    }
    program
        .iter()
        .filter(|i| matches!(i.kind, riscv::InstKind::Lw { .. } | riscv::InstKind::Sw { .. }))
        .count()
        * 2
}
