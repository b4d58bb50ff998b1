//! Uniform result type shared by every verifier.
//!
//! A [`Report`] is what callers see regardless of the artifact family: a
//! single overall [`Verdict`], a per-obligation breakdown with solver
//! times, total wall time, and the identity of the solver that produced
//! the answer.  The JSON form round-trips losslessly so reports can be
//! archived and re-read.

use serde::{Deserialize, Serialize};

use crate::smt::Model;

/// Artifact families, named after the CLI subcommands that verify them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    /// Restricted-subset Python functions with contracts.
    Code,
    /// Tool-call definitions (templates, parameters, forbidden patterns).
    Tool,
    /// Algebraic reasoning traces.
    Distill,
    /// Shell commands.
    Cli,
    /// RV32I assembly.
    Asm,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 5] = [
        ArtifactKind::Code,
        ArtifactKind::Tool,
        ArtifactKind::Distill,
        ArtifactKind::Cli,
        ArtifactKind::Asm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ArtifactKind::Code => "code",
            ArtifactKind::Tool => "tool",
            ArtifactKind::Distill => "distill",
            ArtifactKind::Cli => "cli",
            ArtifactKind::Asm => "asm",
        }
    }
}

impl std::fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The overall answer for one artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    /// Every obligation proven: the property holds on all inputs.
    Verified,
    /// Some obligation failed; the model is a concrete counterexample and
    /// `witness` explains it in words.
    Unsafe {
        /// Label of the first obligation that failed.
        obligation: String,
        /// Human-readable account of the failing input and behaviour.
        witness: String,
        /// Variable assignment that triggers the failure.
        model: Model,
    },
    /// The artifact is outside the supported subset.
    Unsupported { feature: String },
    /// The solver could not decide within its budget.
    Unknown { reason: String },
}

impl Verdict {
    /// Process exit code contract: 0 verified, 1 unsafe, 2 unsupported,
    /// 3 unknown.
    pub fn exit_code(&self) -> u8 {
        match self {
            Verdict::Verified => 0,
            Verdict::Unsafe { .. } => 1,
            Verdict::Unsupported { .. } => 2,
            Verdict::Unknown { .. } => 3,
        }
    }

    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified)
    }

    pub fn is_unsafe(&self) -> bool {
        matches!(self, Verdict::Unsafe { .. })
    }

    /// Short lowercase tag, matching the JSON `status` field.
    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Unsafe { .. } => "unsafe",
            Verdict::Unsupported { .. } => "unsupported",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

/// Outcome of a single proof obligation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObligationStatus {
    Proven,
    Violated,
    Unknown,
}

/// One obligation line in the report: what was checked, how it went, and
/// how long the solver spent on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObligationRecord {
    pub label: String,
    pub status: ObligationStatus,
    pub time_ms: u64,
}

impl ObligationRecord {
    pub fn new(label: impl Into<String>, status: ObligationStatus, time_ms: u64) -> Self {
        ObligationRecord {
            label: label.into(),
            status,
            time_ms,
        }
    }
}

/// Complete verification result for one artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: ArtifactKind,
    pub verdict: Verdict,
    pub obligations: Vec<ObligationRecord>,
    /// Total wall-clock time, always at least the summed solver times.
    pub timing_ms: u64,
    /// Identity line of the solver binary used.
    pub solver: String,
    /// Version of this crate.
    pub version: String,
}

impl Report {
    pub fn new(
        kind: ArtifactKind,
        verdict: Verdict,
        obligations: Vec<ObligationRecord>,
        timing_ms: u64,
        solver: impl Into<String>,
    ) -> Report {
        let solver_total: u64 = obligations.iter().map(|o| o.time_ms).sum();
        Report {
            kind,
            verdict,
            obligations,
            timing_ms: timing_ms.max(solver_total),
            solver: solver.into(),
            version: crate::VERSION.to_string(),
        }
    }

    /// Summed solver time across obligations.
    pub fn solver_time_ms(&self) -> u64 {
        self.obligations.iter().map(|o| o.time_ms).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Multi-line human rendering for terminal output.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("[{}] ", self.kind));
        match &self.verdict {
            Verdict::Verified => out.push_str("VERIFIED\n"),
            Verdict::Unsafe {
                obligation,
                witness,
                model,
            } => {
                out.push_str("UNSAFE\n");
                out.push_str(&format!("  failed obligation: {obligation}\n"));
                out.push_str(&format!("  witness: {witness}\n"));
                if !model.is_empty() {
                    out.push_str("  model:\n");
                    for (name, value) in model.iter() {
                        out.push_str(&format!("    {name} = {}\n", value.describe()));
                    }
                }
            }
            Verdict::Unsupported { feature } => {
                out.push_str(&format!("UNSUPPORTED\n  feature: {feature}\n"));
            }
            Verdict::Unknown { reason } => {
                out.push_str(&format!("UNKNOWN\n  reason: {reason}\n"));
            }
        }
        if !self.obligations.is_empty() {
            out.push_str("  obligations:\n");
            for o in &self.obligations {
                let mark = match o.status {
                    ObligationStatus::Proven => "ok",
                    ObligationStatus::Violated => "FAIL",
                    ObligationStatus::Unknown => "?",
                };
                out.push_str(&format!("    [{mark:>4}] {} ({} ms)\n", o.label, o.time_ms));
            }
        }
        out.push_str(&format!(
            "  {} ms total, solver: {}\n",
            self.timing_ms, self.solver
        ));
        out
    }
}
