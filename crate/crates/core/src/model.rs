//! Domain types shared across stages.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Aizu,
    Atcoder,
    Codechef,
    Codeforces,
    Codewars,
    Geeksforgeeks,
    Hackerearth,
    Hackerrank,
    Kattis,
    Leetcode,
    Other,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
    #[default]
    Unknown,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
            Difficulty::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IoMode {
    StdinStdout,
    FunctionCall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeLanguage {
    Python,
    Cpp,
}

impl CodeLanguage {
    pub const ALL: [CodeLanguage; 2] = [CodeLanguage::Python, CodeLanguage::Cpp];

    /// Tag used on markdown fences.
    pub fn fence_tag(self) -> &'static str {
        match self {
            CodeLanguage::Python => "python",
            CodeLanguage::Cpp => "cpp",
        }
    }

    pub fn as_str(self) -> &'static str {
        self.fence_tag()
    }
}

impl fmt::Display for CodeLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeLanguage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "python" => Ok(CodeLanguage::Python),
            "cpp" => Ok(CodeLanguage::Cpp),
            other => Err(Error::Validation(format!("unknown code language `{other}` (expected python or cpp)"))),
        }
    }
}

/// Binary verdict of a critique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    Right,
    Wrong,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    pub expected_output: String,
}

impl TestCase {
    pub fn new(input: impl Into<String>, expected_output: impl Into<String>) -> Self {
        Self { input: input.into(), expected_output: expected_output.into() }
    }
}

/// Scaffold for function-call problems: one text for every language, or
/// one per language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StarterCode {
    Shared(String),
    PerLanguage(BTreeMap<CodeLanguage, String>),
}

impl StarterCode {
    pub fn for_language(&self, language: CodeLanguage) -> Option<&str> {
        match self {
            StarterCode::Shared(text) => Some(text.as_str()),
            StarterCode::PerLanguage(map) => map.get(&language).map(String::as_str),
        }
        .filter(|s| !s.trim().is_empty())
    }

    pub fn is_blank(&self) -> bool {
        match self {
            StarterCode::Shared(text) => text.trim().is_empty(),
            StarterCode::PerLanguage(map) => map.values().all(|s| s.trim().is_empty()),
        }
    }
}

impl From<&str> for StarterCode {
    fn from(text: &str) -> Self {
        StarterCode::Shared(text.to_string())
    }
}

/// A programming problem together with its unit tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub source: Source,
    pub statement: String,
    #[serde(default)]
    pub difficulty: Difficulty,
    #[serde(default)]
    pub tests: Vec<TestCase>,
    pub io_mode: IoMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starter_code: Option<StarterCode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_tag: Option<u32>,
}

impl Question {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("question id is empty".into()));
        }
        if crate::corpus::normalize_statement(&self.statement).is_empty() {
            return Err(Error::Validation(format!("question {}: statement is empty after normalization", self.id)));
        }
        if self.io_mode == IoMode::FunctionCall && self.starter_code.as_ref().is_none_or(StarterCode::is_blank) {
            return Err(Error::Validation(format!(
                "question {}: function_call questions require starter_code",
                self.id
            )));
        }
        Ok(())
    }
}
