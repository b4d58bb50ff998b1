//! Sorted first-order terms, SMT-LIB v2 serialization, and a solver pipe.
//!
//! Terms are immutable reference-counted trees built through sort-checked
//! constructors: an ill-sorted application is rejected at construction, so
//! any [`Term`] in existence is well-sorted.  Scripts are rendered
//! deterministically (same input, byte-identical output) and handed to a
//! solver subprocess, one process per query, which keeps concurrent use
//! trivially safe.
//!
//! Two evaluation paths exist side by side: [`Solver::check_sat`] asks the
//! external solver, while [`eval`] runs the same term against a concrete
//! environment.  The pair is what lets counterexamples be replayed: a model
//! returned by the solver must make every assertion evaluate to `true`.

mod eval;
mod model;
mod script;
mod solver;
mod term;
mod value;

pub use eval::{eval, satisfies, values_equal, Env, EvalError};
pub use model::{parse_model, Model, ModelParseError};
pub use script::{serialize, Decl, ScriptError};
pub use solver::{
    CheckOutcome, Proof, ProveOutcome, SatResult, Solver, SolverError, DEFAULT_TIMEOUT_MS,
    SOLVER_ENV_VAR,
};
pub use term::{Charset, Op, Sort, SortError, Term, TermKind};
pub use value::{ArrayValue, Value};
