use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::llm::RawResponse;
use crate::postproc::RejectReason;
use crate::{CodeLanguage, Error, Judgment, Result, Source};

/// One generated response, keyed by `(question_id, sample_index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub question_id: String,
    pub sample_index: u32,
    pub code_language: CodeLanguage,
    pub prompt_sha256: String,
    pub response: RawResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub question_id: String,
    pub sample_index: u32,
    pub code_language: CodeLanguage,
    pub reasoning_trace: String,
    /// Final code block of the requested language.
    pub solution_source: String,
}

/// A record dropped by a stage, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub question_id: String,
    pub sample_index: u32,
    pub code_language: CodeLanguage,
    pub reason: String,
}

impl Rejection {
    pub fn postproc(question_id: &str, sample_index: u32, code_language: CodeLanguage, reason: RejectReason) -> Self {
        let reason = serde_json::to_value(reason).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        Self { question_id: question_id.into(), sample_index, code_language, reason }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritiqueRecord {
    pub question_id: String,
    pub sample_index: u32,
    pub code_language: CodeLanguage,
    pub judgment: Judgment,
    pub critique_trace: String,
    pub trace_length: u64,
}

/// One row of the released dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetTriple {
    pub question_id: String,
    pub sample_index: u32,
    pub source: Source,
    pub code_language: CodeLanguage,
    pub solution_reasoning: String,
    pub solution_source: String,
    /// Absent when the critique was rejected.
    pub critique_reasoning: Option<String>,
    pub judgment: Option<Judgment>,
    /// Absent for questions with too few tests to execute.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_rate: Option<f64>,
}

/// Record accounting for one stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub input: usize,
    pub accepted: usize,
    pub rejected: BTreeMap<String, usize>,
}

impl StageCounts {
    pub fn reject(&mut self, reason: &str) {
        *self.rejected.entry(reason.to_string()).or_default() += 1;
    }

    pub fn rejected_total(&self) -> usize {
        self.rejected.values().sum()
    }

    /// Nothing is dropped without a reason.
    pub fn check(&self, stage: &str) -> Result<()> {
        if self.input != self.accepted + self.rejected_total() {
            return Err(Error::Validation(format!(
                "{stage}: {} records in but {} accepted and {} rejected",
                self.input,
                self.accepted,
                self.rejected_total()
            )));
        }
        Ok(())
    }
}

/// Fails on a repeated `(question_id, sample_index)`.
pub(crate) fn unique_keys<'a>(keys: impl IntoIterator<Item = (&'a str, u32)>, what: &str) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for (q, s) in keys {
        if !seen.insert((q, s)) {
            return Err(Error::DuplicateKey(format!("{what} ({q}, {s})")));
        }
    }
    Ok(())
}

pub(crate) fn fenced(language: CodeLanguage, source: &str) -> String {
    format!("```{}\n{}\n```", language.fence_tag(), source.trim_end())
}
