//! Safety verification for machine-produced artifacts.
//!
//! Five families of artifacts — a restricted Python subset, tool-call
//! definitions, algebraic reasoning traces, shell commands, and RV32I
//! assembly — are compiled into SMT constraints and checked by refutation:
//! to prove a property we assert its negation alongside the encoding of the
//! artifact and ask the solver for a model.  `unsat` means the property
//! holds on every input; a model is a concrete counterexample and is
//! reported as a witness.
//!
//! The crate is organised around [`api::verify`], which dispatches an
//! [`api::Artifact`] to the matching verifier and assembles a uniform
//! [`report::Report`].  Each verifier can also be driven directly:
//!
//! * [`code`] — parse and verify subset-Python functions against
//!   requires/ensures contracts,
//! * [`tool`] — prove string-shaped tool invocations can never produce a
//!   forbidden pattern,
//! * [`distill`] — check step-by-step equation rewrites for logical
//!   validity,
//! * [`shell`] — match commands against danger categories and confirm the
//!   match propositionally,
//! * [`riscv`] — symbolically execute straight-line RV32I and prove
//!   register bounds, memory safety, or program equivalence.
//!
//! Everything bottoms out in [`smt`], a small term layer that serialises to
//! SMT-LIB v2 and talks to a solver subprocess (`z3` by default, override
//! with the `GUARD_SOLVER` environment variable).

pub mod api;
pub mod bench;
pub mod code;
pub mod distill;
pub mod report;
pub mod riscv;
pub mod shell;
pub mod smt;
pub mod tool;

/// Version string stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
