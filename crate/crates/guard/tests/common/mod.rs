//! Shared fixtures for the integration suites: solver discovery, corpus
//! loading, and the independent reference interpreters the oracle tests
//! compare against.
#![allow(dead_code)]

pub mod algebra;
pub mod pyint;
pub mod rvint;

use std::path::PathBuf;

use guard::bench::{load_manifest, CorpusCase};
use guard::smt::Solver;

/// The solver every integration test uses.  Discovery must succeed: tests
/// treat a missing solver as a broken environment, not a skip.
pub fn solver() -> Solver {
    Solver::from_env().expect("an SMT solver must be available to run the test suite")
}

/// Absolute path to a file in the repository root.
pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

/// The shipped corpus, loaded with all artifact files read in.
pub fn corpus() -> Vec<CorpusCase> {
    let manifest = repo_path("corpus/manifest.json");
    load_manifest(&manifest).expect("shipped corpus manifest must load")
}
