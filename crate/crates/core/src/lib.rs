//! Construction and evaluation toolkit for code-reasoning datasets.
//!
//! The crate covers the whole flow from raw programming questions to an
//! evaluation report:
//!
//! * [`corpus`]: statement normalization, fuzzy de-duplication and
//!   benchmark decontamination.
//! * [`llm`]: prompt templates, sampling parameters, completion providers
//!   (HTTP and a deterministic mock) with retrying batch generation.
//! * [`postproc`]: parsing of raw responses into solutions and critiques.
//! * [`exec`]: sandboxed compilation and execution against unit tests.
//! * [`bench`]: benchmark loading and function-call harness synthesis.
//! * [`metrics`]: pass@k, critique-based selection and critique accuracy.
//! * [`pipeline`]: stage orchestration, manifests and dataset emission.

pub mod bench;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod jsonl;
pub mod llm;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod postproc;
mod seed;

pub use error::{Error, Result};
pub use model::{CodeLanguage, Difficulty, IoMode, Judgment, Question, Source, StarterCode, TestCase};
