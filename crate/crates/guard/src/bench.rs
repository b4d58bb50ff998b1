//! Corpus benchmark: load a manifest of cases with expected verdicts, run
//! every case, and summarise accuracy and timing per domain.
//!
//! The manifest is JSON: `{"cases": [...]}` where each case names an
//! artifact file, its domain, the expected verdict (`verified` or
//! `unsafe`), and the domain-specific companion file (`spec` for code,
//! `props`/`equiv` for asm, optional `compare` for distill).  Paths are
//! relative to the manifest.  All files are read up front so the measured
//! time is verification, not I/O.
//!
//! A case is *correct* when its verdict status equals the expectation.
//! Anything else — the opposite verdict, unsupported, unknown, or an
//! error — counts as incorrect; nothing is skipped.  A correct artifact
//! flagged unsafe is a false positive; a buggy artifact that verifies is
//! a false negative.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::api::{self, Artifact, AsmCheck};
use crate::report::ArtifactKind;
use crate::smt::Solver;

/// One manifest entry, as written in the JSON file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestCase {
    id: String,
    domain: String,
    artifact: String,
    #[serde(default)]
    spec: Option<String>,
    #[serde(default)]
    compare: Option<String>,
    #[serde(default)]
    props: Option<String>,
    #[serde(default)]
    equiv: Option<String>,
    expected: String,
    #[serde(default)]
    category: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    cases: Vec<ManifestCase>,
}

/// Expected verdict for a corpus case.  The corpus is deliberately binary;
/// artifacts expected to be unsupported or unknown belong in a separate
/// negative suite, not the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Verified,
    Unsafe,
}

impl Expected {
    pub fn as_str(&self) -> &'static str {
        match self {
            Expected::Verified => "verified",
            Expected::Unsafe => "unsafe",
        }
    }
}

/// A fully loaded case: artifact text in memory, ready to verify.
#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub id: String,
    pub domain: ArtifactKind,
    pub artifact: Artifact,
    pub expected: Expected,
    pub category: Option<String>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("manifest error: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> BenchError {
    BenchError::Invalid(msg.into())
}

fn read(path: &Path) -> Result<String, BenchError> {
    std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load and validate a manifest; every referenced file is read now.
pub fn load_manifest(path: &Path) -> Result<Vec<CorpusCase>, BenchError> {
    let manifest: ManifestFile = serde_json::from_str(&read(path)?)?;
    if manifest.cases.is_empty() {
        return Err(invalid("manifest lists no cases"));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cases = Vec::with_capacity(manifest.cases.len());
    let mut seen = std::collections::BTreeSet::new();
    for case in manifest.cases {
        if !seen.insert(case.id.clone()) {
            return Err(invalid(format!("duplicate case id {:?}", case.id)));
        }
        cases.push(load_case(case, base)?);
    }
    Ok(cases)
}

fn load_case(case: ManifestCase, base: &Path) -> Result<CorpusCase, BenchError> {
    let id = case.id;
    let expected = match case.expected.as_str() {
        "verified" => Expected::Verified,
        "unsafe" => Expected::Unsafe,
        other => {
            return Err(invalid(format!(
                "case {id:?}: expected verdict must be \"verified\" or \"unsafe\", not {other:?}"
            )))
        }
    };
    let domain = match case.domain.as_str() {
        "code" => ArtifactKind::Code,
        "tool" => ArtifactKind::Tool,
        "distill" => ArtifactKind::Distill,
        "cli" => ArtifactKind::Cli,
        "asm" => ArtifactKind::Asm,
        other => return Err(invalid(format!("case {id:?}: unknown domain {other:?}"))),
    };
    let reject_extras = |fields: &[(&str, bool)]| -> Result<(), BenchError> {
        for (name, present) in fields {
            if *present {
                return Err(invalid(format!(
                    "case {id:?}: field {name:?} does not apply to domain {}",
                    domain
                )));
            }
        }
        Ok(())
    };
    let artifact_text = read(&base.join(&case.artifact))?;
    let artifact = match domain {
        ArtifactKind::Code => {
            reject_extras(&[
                ("compare", case.compare.is_some()),
                ("props", case.props.is_some()),
                ("equiv", case.equiv.is_some()),
            ])?;
            let Some(spec) = case.spec else {
                return Err(invalid(format!("case {id:?}: code cases need a spec file")));
            };
            Artifact::Code {
                source: artifact_text,
                spec: read(&base.join(spec))?,
            }
        }
        ArtifactKind::Tool => {
            reject_extras(&[
                ("spec", case.spec.is_some()),
                ("compare", case.compare.is_some()),
                ("props", case.props.is_some()),
                ("equiv", case.equiv.is_some()),
            ])?;
            Artifact::Tool {
                definition: artifact_text,
            }
        }
        ArtifactKind::Distill => {
            reject_extras(&[
                ("spec", case.spec.is_some()),
                ("props", case.props.is_some()),
                ("equiv", case.equiv.is_some()),
            ])?;
            match case.compare {
                Some(compare) => Artifact::TracePair {
                    reference: artifact_text,
                    distilled: read(&base.join(compare))?,
                },
                None => Artifact::Trace {
                    text: artifact_text,
                },
            }
        }
        ArtifactKind::Cli => {
            reject_extras(&[
                ("spec", case.spec.is_some()),
                ("compare", case.compare.is_some()),
                ("props", case.props.is_some()),
                ("equiv", case.equiv.is_some()),
            ])?;
            Artifact::Command {
                text: artifact_text.trim_end().to_string(),
            }
        }
        ArtifactKind::Asm => {
            reject_extras(&[
                ("spec", case.spec.is_some()),
                ("compare", case.compare.is_some()),
            ])?;
            let check = match (case.props, case.equiv) {
                (Some(props), None) => AsmCheck::Properties(read(&base.join(props))?),
                (None, Some(equiv)) => AsmCheck::Equivalence(read(&base.join(equiv))?),
                _ => {
                    return Err(invalid(format!(
                        "case {id:?}: asm cases need exactly one of props or equiv"
                    )))
                }
            };
            Artifact::Assembly {
                program: artifact_text,
                check,
            }
        }
    };
    Ok(CorpusCase {
        id,
        domain,
        artifact,
        expected,
        category: case.category,
    })
}

/// Outcome of one case.
#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub id: String,
    pub domain: ArtifactKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub expected: Expected,
    /// Verdict status, or `error: ...` when verification never produced a
    /// report.
    pub outcome: String,
    pub correct: bool,
    pub time_ms: u64,
    pub solver_ms: u64,
}

/// Per-domain accuracy and timing.
#[derive(Debug, Clone, Serialize)]
pub struct DomainSummary {
    pub domain: String,
    pub cases: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub avg_time_ms: f64,
    pub median_time_ms: f64,
    pub avg_solver_ms: f64,
    pub median_solver_ms: f64,
}

/// Everything the benchmark produces.
#[derive(Debug, Serialize)]
pub struct BenchOutcome {
    pub domains: Vec<DomainSummary>,
    pub total: DomainSummary,
    /// Correct artifacts flagged unsafe.
    pub false_positives: usize,
    /// Buggy artifacts that verified.
    pub false_negatives: usize,
    pub cases: Vec<CaseResult>,
}

impl BenchOutcome {
    pub fn all_correct(&self) -> bool {
        self.total.correct == self.total.cases
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench serialization cannot fail")
    }

    /// Accuracy table plus the FP/FN line, for terminal output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<9} {:>5} {:>7} {:>9} {:>12} {:>12}\n",
            "Domain", "Cases", "Correct", "Accuracy", "Avg (ms)", "Median (ms)"
        ));
        for row in self.domains.iter().chain(std::iter::once(&self.total)) {
            out.push_str(&format!(
                "{:<9} {:>5} {:>7} {:>8.1}% {:>12.1} {:>12.1}\n",
                row.domain,
                row.cases,
                row.correct,
                row.accuracy * 100.0,
                row.avg_time_ms,
                row.median_time_ms
            ));
        }
        out.push_str(&format!(
            "False positives: {}   False negatives: {}\n",
            self.false_positives, self.false_negatives
        ));
        let wrong: Vec<&CaseResult> = self.cases.iter().filter(|c| !c.correct).collect();
        if !wrong.is_empty() {
            out.push_str("Incorrect cases:\n");
            for c in wrong {
                out.push_str(&format!(
                    "  {} [{}]: expected {}, got {}\n",
                    c.id,
                    c.domain,
                    c.expected.as_str(),
                    c.outcome
                ));
            }
        }
        out
    }
}

fn run_case(case: &CorpusCase, solver: &Solver, timeout_ms: u64) -> CaseResult {
    let start = Instant::now();
    let (outcome, solver_ms) = match api::verify(&case.artifact, solver, timeout_ms) {
        Ok(report) => (report.verdict.status().to_string(), report.solver_time_ms()),
        Err(e) => (format!("error: {e}"), 0),
    };
    CaseResult {
        id: case.id.clone(),
        domain: case.domain,
        category: case.category.clone(),
        correct: outcome == case.expected.as_str(),
        expected: case.expected,
        outcome,
        time_ms: start.elapsed().as_millis() as u64,
        solver_ms,
    }
}

fn median(sorted: &[u64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

fn summarize(domain: &str, results: &[&CaseResult]) -> DomainSummary {
    let cases = results.len();
    let correct = results.iter().filter(|r| r.correct).count();
    let mut times: Vec<u64> = results.iter().map(|r| r.time_ms).collect();
    let mut solver_times: Vec<u64> = results.iter().map(|r| r.solver_ms).collect();
    times.sort_unstable();
    solver_times.sort_unstable();
    let avg = |xs: &[u64]| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<u64>() as f64 / xs.len() as f64
        }
    };
    DomainSummary {
        domain: domain.to_string(),
        cases,
        correct,
        accuracy: if cases == 0 {
            0.0
        } else {
            correct as f64 / cases as f64
        },
        avg_time_ms: avg(&times),
        median_time_ms: median(&times),
        avg_solver_ms: avg(&solver_times),
        median_solver_ms: median(&solver_times),
    }
}

/// Run every case (at most `jobs` in parallel) and summarise.
///
/// Results keep manifest order regardless of completion order, so two
/// runs of the same corpus produce identical output apart from timing.
pub fn run_bench(
    cases: &[CorpusCase],
    solver: &Solver,
    timeout_ms: u64,
    jobs: usize,
) -> BenchOutcome {
    let jobs = jobs.max(1).min(cases.len().max(1));
    let mut slots: Vec<Option<CaseResult>> = vec![None; cases.len()];
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..jobs {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cases.len() {
                    break;
                }
                let result = run_case(&cases[i], solver, timeout_ms);
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, result) in rx {
            slots[i] = Some(result);
        }
    });
    let results: Vec<CaseResult> = slots.into_iter().map(|s| s.expect("all ran")).collect();

    let domains = ArtifactKind::ALL
        .iter()
        .filter_map(|kind| {
            let rows: Vec<&CaseResult> = results.iter().filter(|r| r.domain == *kind).collect();
            (!rows.is_empty()).then(|| summarize(kind.name(), &rows))
        })
        .collect();
    let total = summarize("total", &results.iter().collect::<Vec<_>>());
    let false_positives = results
        .iter()
        .filter(|r| r.expected == Expected::Verified && r.outcome == "unsafe")
        .count();
    let false_negatives = results
        .iter()
        .filter(|r| r.expected == Expected::Unsafe && r.outcome == "verified")
        .count();
    BenchOutcome {
        domains,
        total,
        false_positives,
        false_negatives,
        cases: results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn solver() -> Solver {
        Solver::from_env().unwrap()
    }

    fn write(dir: &Path, name: &str, content: &str) {
        fs::write(dir.join(name), content).unwrap();
    }

    #[test]
    fn runs_a_small_manifest_and_counts_misses() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "ok.cmd", "echo hi\n");
        write(dir.path(), "bad.cmd", "rm -rf /\n");
        write(
            dir.path(),
            "manifest.json",
            r#"{"cases": [
                {"id": "cli-ok", "domain": "cli", "artifact": "ok.cmd", "expected": "verified"},
                {"id": "cli-bad", "domain": "cli", "artifact": "bad.cmd", "expected": "unsafe"},
                {"id": "cli-mislabeled", "domain": "cli", "artifact": "ok.cmd", "expected": "unsafe"}
            ]}"#,
        );
        let cases = load_manifest(&dir.path().join("manifest.json")).unwrap();
        let outcome = run_bench(&cases, &solver(), 5000, 2);
        assert_eq!(outcome.total.cases, 3);
        assert_eq!(outcome.total.correct, 2);
        assert!(!outcome.all_correct());
        // The mislabeled "expected unsafe, verified" case is a false
        // negative by the counting rule, not a false positive.
        assert_eq!(outcome.false_positives, 0);
        assert_eq!(outcome.false_negatives, 1);
        assert!(outcome.render_table().contains("cli-mislabeled"));
        // Manifest order is preserved.
        let ids: Vec<&str> = outcome.cases.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["cli-ok", "cli-bad", "cli-mislabeled"]);
    }

    #[test]
    fn manifest_validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "ok.cmd", "echo hi\n");
        let manifest = dir.path().join("manifest.json");

        fs::write(&manifest, r#"{"cases": []}"#).unwrap();
        assert!(matches!(
            load_manifest(&manifest),
            Err(BenchError::Invalid(_))
        ));

        fs::write(
            &manifest,
            r#"{"cases": [
                {"id": "a", "domain": "cli", "artifact": "ok.cmd", "expected": "verified"},
                {"id": "a", "domain": "cli", "artifact": "ok.cmd", "expected": "verified"}
            ]}"#,
        )
        .unwrap();
        let err = load_manifest(&manifest).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");

        fs::write(
            &manifest,
            r#"{"cases": [{"id": "a", "domain": "cli", "artifact": "missing.cmd", "expected": "verified"}]}"#,
        )
        .unwrap();
        assert!(matches!(load_manifest(&manifest), Err(BenchError::Io { .. })));

        fs::write(
            &manifest,
            r#"{"cases": [{"id": "a", "domain": "cli", "artifact": "ok.cmd", "expected": "maybe"}]}"#,
        )
        .unwrap();
        let err = load_manifest(&manifest).unwrap_err();
        assert!(err.to_string().contains("maybe"), "{err}");

        fs::write(
            &manifest,
            r#"{"cases": [{"id": "a", "domain": "cli", "artifact": "ok.cmd", "spec": "x", "expected": "verified"}]}"#,
        )
        .unwrap();
        let err = load_manifest(&manifest).unwrap_err();
        assert!(err.to_string().contains("does not apply"), "{err}");
    }

    #[test]
    fn erroring_cases_count_as_incorrect() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "broken.py", "def f(x: int) -> int: return (x\n");
        write(dir.path(), "spec.txt", "ensures: result == x\n");
        write(
            dir.path(),
            "manifest.json",
            r#"{"cases": [
                {"id": "code-broken", "domain": "code", "artifact": "broken.py", "spec": "spec.txt", "expected": "verified"}
            ]}"#,
        );
        let cases = load_manifest(&dir.path().join("manifest.json")).unwrap();
        let outcome = run_bench(&cases, &solver(), 5000, 1);
        assert_eq!(outcome.total.correct, 0);
        assert!(outcome.cases[0].outcome.starts_with("error:"));
    }

    #[test]
    fn median_of_even_and_odd_sets() {
        assert_eq!(median(&[]), 0.0);
        assert_eq!(median(&[7]), 7.0);
        assert_eq!(median(&[1, 3]), 2.0);
        assert_eq!(median(&[1, 2, 10]), 2.0);
        assert_eq!(median(&[1, 2, 3, 10]), 2.5);
    }
}
