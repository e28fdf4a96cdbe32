//! Deterministic offline provider.
//!
//! Every sample is a pure function of `(sha256(prompt), sample index, seed)`.
//! Prompts listed in a [`MockScript`] draw from their scripted responses;
//! anything else gets a canned response from a built-in bank that mixes
//! well-formed and malformed outputs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CompletionProvider, CompletionRequest, FinishReason, ProviderError, RawResponse};
use crate::corpus::{fuzzy_similarity, normalize_statement};
use crate::seed::{combine, sha256_hex, str_hash};
use crate::{jsonl, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub prompt_sha256: String,
    pub responses: Vec<RawResponse>,
}

/// Canned responses keyed by prompt digest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MockScript {
    entries: BTreeMap<String, Vec<RawResponse>>,
}

impl MockScript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `responses` for `prompt`, appending to any existing ones.
    pub fn add(&mut self, prompt: &str, responses: impl IntoIterator<Item = RawResponse>) {
        self.entries.entry(sha256_hex(prompt.as_bytes())).or_default().extend(responses);
    }

    pub fn get(&self, prompt: &str) -> Option<&[RawResponse]> {
        self.entries.get(&sha256_hex(prompt.as_bytes())).map(Vec::as_slice).filter(|r| !r.is_empty())
    }

    /// Appends every entry of `other`.
    pub fn merge(&mut self, other: MockScript) {
        for (k, v) in other.entries {
            self.entries.entry(k).or_default().extend(v);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> Vec<ScriptEntry> {
        self.entries.iter().map(|(k, v)| ScriptEntry { prompt_sha256: k.clone(), responses: v.clone() }).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut script = Self::new();
        for entry in jsonl::read::<ScriptEntry>(path)? {
            if entry.prompt_sha256.len() != 64 {
                return Err(Error::Validation(format!(
                    "{}: prompt_sha256 must be a hex sha256 digest",
                    path.display()
                )));
            }
            script.entries.entry(entry.prompt_sha256).or_default().extend(entry.responses);
        }
        Ok(script)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write(path, &self.entries())
    }
}

pub struct MockProvider {
    script: MockScript,
}

impl MockProvider {
    pub fn new(script: MockScript) -> Self {
        Self { script }
    }

    pub fn unscripted() -> Self {
        Self::new(MockScript::new())
    }

    pub fn sample(&self, prompt: &str, sample_index: u32, seed: u64, max_tokens: u32) -> RawResponse {
        let key = combine(&[seed, str_hash(prompt), u64::from(sample_index)]);
        let mut response = match self.script.get(prompt) {
            Some(responses) => responses[(key % responses.len() as u64) as usize].clone(),
            None => canned(prompt, key),
        };
        truncate_to_budget(&mut response, max_tokens);
        response.provider_meta.insert("provider".into(), json!("mock"));
        response.provider_meta.insert("sample_index".into(), json!(sample_index));
        response
    }
}

impl CompletionProvider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &CompletionRequest) -> std::result::Result<Vec<RawResponse>, ProviderError> {
        let seed = request.seed.unwrap_or(0);
        Ok((0..request.n)
            .map(|i| self.sample(&request.prompt, request.sample_offset + i, seed, request.max_tokens))
            .collect())
    }
}

// Whitespace-separated words stand in for tokens.
fn truncate_to_budget(response: &mut RawResponse, max_tokens: u32) {
    let mut words = 0u32;
    let mut in_word = false;
    for (pos, ch) in response.text.char_indices() {
        if ch.is_whitespace() {
            in_word = false;
        } else if !in_word {
            in_word = true;
            words += 1;
            if words > max_tokens {
                response.text.truncate(pos);
                response.finish_reason = FinishReason::Length;
                return;
            }
        }
    }
}

fn filler(key: u64, words: usize) -> String {
    const VOCAB: [&str; 8] = ["consider", "the", "input", "constraints", "so", "we", "check", "edge"];
    (0..words).map(|i| VOCAB[(combine(&[key, i as u64]) % VOCAB.len() as u64) as usize]).collect::<Vec<_>>().join(" ")
}

fn canned(prompt: &str, key: u64) -> RawResponse {
    let trace = filler(key, 5 + (key % 60) as usize);
    if prompt.contains("```python for just the final solution") {
        canned_solution(
            &trace,
            key,
            "python",
            "import sys\n\ndef main():\n    data = sys.stdin.read()\n    sys.stdout.write(data)\n\nmain()",
            "def main(:\n    print(",
        )
    } else if prompt.contains("```cpp for just the final solution") {
        canned_solution(
            &trace,
            key,
            "cpp",
            "#include <iostream>\n#include <string>\nint main() {\n    std::string line;\n    while (std::getline(std::cin, line)) std::cout << line << '\\n';\n    return 0;\n}",
            "int main() {\n    std::cout << (1 + ;\n",
        )
    } else if prompt.contains("<judgment>right/wrong</judgment>") {
        let judgment = match key % 10 {
            0..=4 => "right",
            5..=8 => "wrong",
            _ => "partially correct",
        };
        RawResponse::stop(format!(
            "<think>\n{trace}\n</think>\nThe solution was reviewed.\n\n<judgment>{judgment}</judgment>"
        ))
    } else if prompt.contains("<decision>equivalent</decision>") {
        RawResponse::stop(format!("<decision>{}</decision>", judge_pair(prompt)))
    } else {
        RawResponse::stop(format!("<think>\n{trace}\n</think>\nok"))
    }
}

fn canned_solution(trace: &str, key: u64, tag: &str, good: &str, broken: &str) -> RawResponse {
    match key % 10 {
        7 => RawResponse::stop(format!("Here is the code.\n```{tag}\n{good}\n```")),
        8 => RawResponse::stop(format!("<think>\n{trace}\n</think>\n```{tag}\n{broken}\n```")),
        9 => RawResponse::truncated(format!("<think>\n{trace}")),
        _ => RawResponse::stop(format!("<think>\n{trace}\n</think>\nEcho the input.\n\n```{tag}\n{good}\n```")),
    }
}

// Offline stand-in for a similarity judge: compares the two statements
// embedded in the judge prompt.
fn judge_pair(prompt: &str) -> &'static str {
    let grab = |start: &str, end: &str| -> Option<String> {
        let from = prompt.find(start)? + start.len();
        let to = prompt[from..].find(end).map_or(prompt.len(), |e| from + e);
        Some(normalize_statement(&prompt[from..to]))
    };
    match (grab("## Statement A\n", "\n\n## Statement B"), grab("## Statement B\n", "\n\nAnswer with exactly one")) {
        (Some(a), Some(b)) if fuzzy_similarity(&a, &b) >= 0.9 => "equivalent",
        _ => "distinct",
    }
}
