//! Question corpus hygiene: normalization, fuzzy de-duplication and
//! benchmark decontamination.

mod decontam;
mod dedup;
mod normalize;
mod similarity;

pub use decontam::{
    cosine, decontaminate, BenchmarkItem, ContaminationVerdict, DecontamFailure, DecontamOptions, EmbeddingProvider,
    FuzzyJudge, HashingEmbedder, HttpEmbedder, JudgeDecision, JudgeProvider, LlmJudge, DEFAULT_SCREEN_THRESHOLD,
    JUDGE_TEMPLATE,
};
pub use dedup::{dedup, DedupCluster, DedupOutput, DEFAULT_DEDUP_THRESHOLD, EXACT_PAIRWISE_LIMIT};
pub use normalize::normalize_statement;
pub use similarity::{fuzzy_similarity, levenshtein};
