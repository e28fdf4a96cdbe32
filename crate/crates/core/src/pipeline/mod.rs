//! Stage orchestration: configuration, per-stage manifests, checkpointed
//! resume and dataset emission.
//!
//! A run writes everything below `run.out_dir`, one directory per step plus
//! `manifests/<step>.json`. Generation, critique and execution append to a
//! checkpoint file per `(question_id, sample_index)` as results arrive, so an
//! interrupted step picks up where it stopped.

mod config;
mod manifest;
mod mock;
mod records;
mod stages;

pub use config::{
    CritiqueSection, DecontamSection, DedupSection, EmbedderKind, EvaluateSection, ExecuteSection, GenerateSection,
    InputSection, JudgeKind, PipelineConfig, ProviderKind, ProviderSection, RunSection,
};
pub use manifest::{ArtifactDigest, RunManifest, Stage, StageStatus, Step, MANIFEST_SCHEMA_ID};
pub use mock::{script_from_solutions, CORRECT_LABEL};
pub use records::{CritiqueRecord, DatasetTriple, RawRecord, Rejection, SolutionRecord, StageCounts};
pub use stages::{
    build_pools, critique_seed, emit_dataset, generate_critiques, generate_solutions, postprocess_critiques,
    postprocess_solutions, read_questions, BatchOutcome, ExcludedPool, ExecExclusion, Pipeline, RunReport, SolutionJob,
    RUN_REPORT_SCHEMA_ID,
};

/// Loads the config at `path` and runs every stage, reusing steps whose
/// manifests are still valid.
pub fn run_pipeline(path: &std::path::Path) -> crate::Result<Vec<RunManifest>> {
    Pipeline::new(PipelineConfig::load(path)?)?.run(false)
}
