//! Turning raw model responses into structured solutions and critiques.
//!
//! Everything here is pure and safe to run in parallel over responses.

mod fences;
mod parse;
mod syntax;
mod think;

pub use fences::{extract_code_blocks, CodeBlock};
pub use parse::{
    parse_critique_response, parse_solution_response, Critique, FilterOutcome, ParsedSolution, RejectReason,
};
pub use syntax::validate_syntax;
pub use think::extract_think;
