//! Sandboxed compilation and execution of candidate solutions.
//!
//! Every test runs as a separate process in a fresh scratch directory under
//! an address-space limit, a CPU limit and a wall-clock timeout. Results are
//! keyed by test index, so the number of parallel workers never changes the
//! output.

mod policy;
mod run;
mod sandbox;
mod select;

pub use policy::{SandboxPolicy, Toolchain};
pub use run::{
    compile_solution, default_workers, evaluate_batch, evaluate_solution, normalize_output, run_one_test,
    CompileStatus, Compiled, EvalJob, ExecutionResult, Program, TestVerdict, VerdictStatus,
};
pub use select::{select_tests, MAX_TESTS, MIN_TESTS};
