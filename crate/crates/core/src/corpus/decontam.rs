use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::normalize::normalize_statement;
use super::similarity::fuzzy_similarity;
use crate::llm::{
    generate, CompletionProvider, HttpProvider, PromptTemplate, ProviderError, ProviderProfile, RetryPolicy,
    SamplingParams,
};
use crate::seed::str_hash;
use crate::{Error, Question, Result};

pub const DEFAULT_SCREEN_THRESHOLD: f64 = 0.7;

pub const JUDGE_TEMPLATE: &str = include_str!("../../assets/prompts/judge.txt");

/// A statement from an evaluation benchmark.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub benchmark: String,
    pub id: String,
    pub statement: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeDecision {
    Equivalent,
    Distinct,
    NotScreened,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationVerdict {
    pub question_id: String,
    /// `(benchmark name, item id)` of the closest benchmark item.
    pub matched_benchmark_item: Option<(String, String)>,
    pub cosine_score: f64,
    pub judge_decision: JudgeDecision,
    pub removed: bool,
}

pub trait EmbeddingProvider: Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>>;
}

/// Decides whether two statements describe the same problem.
/// Only `Equivalent` or `Distinct` are valid answers.
pub trait JudgeProvider: Sync {
    fn judge(&self, question: &str, benchmark_item: &str) -> Result<JudgeDecision>;
}

/// Cosine similarity, or `None` if either vector has zero norm.
pub fn cosine(a: &[f32], b: &[f32]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Offline embedder: hashed character trigram counts of the normalized text.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    pub dims: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self { dims: 1024 }
    }
}

impl HashingEmbedder {
    pub fn embed_one(&self, text: &str) -> Vec<f32> {
        let dims = self.dims.max(1) as u64;
        let mut v = vec![0f32; dims as usize];
        let chars: Vec<char> = normalize_statement(text).chars().collect();
        for gram in chars.windows(3) {
            let g: String = gram.iter().collect();
            v[(str_hash(&g) % dims) as usize] += 1.0;
        }
        v
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        Ok(texts.par_iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Embeddings from an OpenAI-style `/v1/embeddings` endpoint.
pub struct HttpEmbedder {
    client: HttpProvider,
    retry: RetryPolicy,
    batch_size: usize,
}

impl HttpEmbedder {
    pub fn new(mut profile: ProviderProfile, retry: RetryPolicy) -> Result<Self> {
        if profile.endpoint == "/v1/completions" {
            profile.endpoint = "/v1/embeddings".into();
        }
        Ok(Self { client: HttpProvider::new(profile)?, retry, batch_size: 64 })
    }

    fn embed_batch(&self, texts: &[String]) -> std::result::Result<Vec<Vec<f32>>, ProviderError> {
        let body = json!({"model": self.client.profile().model, "input": texts});
        let value = self.client.post_json(&self.client.profile().url(), &body)?;
        let data = value
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::fatal(None, "embedding response has no `data` array"))?;
        if data.len() != texts.len() {
            return Err(ProviderError::fatal(
                None,
                format!("asked for {} embeddings, got {}", texts.len(), data.len()),
            ));
        }
        data.iter()
            .map(|row| {
                row.get("embedding")
                    .and_then(Value::as_array)
                    .map(|xs| xs.iter().map(|x| x.as_f64().unwrap_or(0.0) as f32).collect())
                    .ok_or_else(|| ProviderError::fatal(None, "embedding row without `embedding`"))
            })
            .collect()
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size) {
            let mut failures = 0;
            loop {
                match self.embed_batch(chunk) {
                    Ok(rows) => {
                        out.extend(rows);
                        break;
                    }
                    Err(e) if e.transient && failures + 1 < self.retry.max_attempts => {
                        std::thread::sleep(self.retry.delay(failures));
                        failures += 1;
                    }
                    Err(e) => return Err(Error::Provider(e)),
                }
            }
        }
        Ok(out)
    }
}

/// Offline judge: equivalent iff normalized statements are fuzzy-similar.
#[derive(Debug, Clone)]
pub struct FuzzyJudge {
    pub threshold: f64,
}

impl Default for FuzzyJudge {
    fn default() -> Self {
        Self { threshold: 0.9 }
    }
}

impl JudgeProvider for FuzzyJudge {
    fn judge(&self, question: &str, benchmark_item: &str) -> Result<JudgeDecision> {
        let score = fuzzy_similarity(&normalize_statement(question), &normalize_statement(benchmark_item));
        Ok(if score >= self.threshold { JudgeDecision::Equivalent } else { JudgeDecision::Distinct })
    }
}

/// LLM-as-judge using the fixed equivalence template.
pub struct LlmJudge<P> {
    provider: P,
    params: SamplingParams,
    retry: RetryPolicy,
}

impl<P: CompletionProvider> LlmJudge<P> {
    pub fn new(provider: P, retry: RetryPolicy) -> Self {
        let params = SamplingParams { temperature: 0.0, top_p: 1.0, max_new_tokens: 4096, n_samples: 1, seed: None };
        Self { provider, params, retry }
    }

    pub fn render(question: &str, benchmark_item: &str) -> Result<String> {
        PromptTemplate::new("judge", JUDGE_TEMPLATE)
            .render(&[("question", question), ("benchmark_item", benchmark_item)])
    }
}

/// Reads the last `<decision>` span; anything unrecognized counts as distinct.
fn parse_decision(text: &str) -> JudgeDecision {
    let verdict = text
        .rfind("<decision>")
        .map(|i| &text[i + "<decision>".len()..])
        .and_then(|rest| rest.find("</decision>").map(|j| rest[..j].trim().to_lowercase()));
    match verdict.as_deref() {
        Some("equivalent") => JudgeDecision::Equivalent,
        Some("distinct") => JudgeDecision::Distinct,
        _ => {
            tracing::warn!("judge answer without a usable decision, treating as distinct");
            JudgeDecision::Distinct
        }
    }
}

impl<P: CompletionProvider> JudgeProvider for LlmJudge<P> {
    fn judge(&self, question: &str, benchmark_item: &str) -> Result<JudgeDecision> {
        let prompt = Self::render(question, benchmark_item)?;
        let responses = generate(&prompt, &self.params, &self.provider, &self.retry)?;
        Ok(parse_decision(&responses[0].text))
    }
}

#[derive(Debug, Clone)]
pub struct DecontamOptions {
    pub screen_threshold: f64,
    /// Concurrent judge calls.
    pub in_flight: usize,
    /// Verdicts from an interrupted earlier run; their questions are not
    /// screened again.
    pub resume: Vec<ContaminationVerdict>,
}

impl Default for DecontamOptions {
    fn default() -> Self {
        Self { screen_threshold: DEFAULT_SCREEN_THRESHOLD, in_flight: 8, resume: Vec::new() }
    }
}

/// Provider failure during decontamination. `completed` holds the verdicts
/// for the prefix of questions finished before the failure.
#[derive(Debug)]
pub struct DecontamFailure {
    pub completed: Vec<ContaminationVerdict>,
    pub error: Error,
}

impl std::fmt::Display for DecontamFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "decontamination stopped after {} questions: {}", self.completed.len(), self.error)
    }
}

impl std::error::Error for DecontamFailure {}

/// Screens every question against its closest benchmark item.
///
/// The nearest item by embedding cosine is sent to the judge only when the
/// score reaches `screen_threshold`; questions are removed only when the
/// judge calls the pair equivalent. One verdict is emitted per question, in
/// input order.
pub fn decontaminate(
    questions: &[Question],
    benchmark_items: &[BenchmarkItem],
    embedder: &dyn EmbeddingProvider,
    judge: &dyn JudgeProvider,
    options: &DecontamOptions,
) -> std::result::Result<(Vec<Question>, Vec<ContaminationVerdict>), DecontamFailure> {
    let fail = |completed: Vec<ContaminationVerdict>, error: Error| DecontamFailure { completed, error };
    if !(-1.0..=1.0).contains(&options.screen_threshold) {
        return Err(fail(
            Vec::new(),
            Error::Validation(format!("screen threshold must be in [-1, 1], got {}", options.screen_threshold)),
        ));
    }
    let resumed: BTreeMap<&str, &ContaminationVerdict> =
        options.resume.iter().map(|v| (v.question_id.as_str(), v)).collect();

    let pending: Vec<&Question> = questions.iter().filter(|q| !resumed.contains_key(q.id.as_str())).collect();
    let bench_texts: Vec<String> = benchmark_items.iter().map(|b| b.statement.clone()).collect();
    let question_texts: Vec<String> = pending.iter().map(|q| q.statement.clone()).collect();
    let embed = |texts: &[String]| -> Result<Vec<Vec<f32>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let vecs = embedder.embed(texts)?;
        if vecs.len() != texts.len() {
            return Err(Error::Validation(format!(
                "embedder returned {} vectors for {} texts",
                vecs.len(),
                texts.len()
            )));
        }
        Ok(vecs)
    };
    let bench_vecs = embed(&bench_texts).map_err(|e| fail(resumed_prefix(questions, &resumed), e))?;
    let question_vecs = embed(&question_texts).map_err(|e| fail(resumed_prefix(questions, &resumed), e))?;

    // Nearest benchmark item per pending question.
    let nearest: Vec<Option<(usize, f64)>> = question_vecs
        .par_iter()
        .map(|qv| {
            let mut best: Option<(usize, f64)> = None;
            for (i, bv) in bench_vecs.iter().enumerate() {
                if let Some(score) = cosine(qv, bv) {
                    if best.is_none_or(|(_, s)| score > s) {
                        best = Some((i, score));
                    }
                }
            }
            best
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.in_flight.max(1))
        .build()
        .map_err(|e| fail(Vec::new(), Error::Validation(e.to_string())))?;
    let fresh: Vec<Result<ContaminationVerdict>> = pool.install(|| {
        pending
            .par_iter()
            .zip(nearest.par_iter())
            .map(|(q, best)| {
                let Some((item_idx, score)) = *best else {
                    tracing::warn!(question = %q.id, "cosine undefined for every benchmark item, not screened");
                    return Ok(ContaminationVerdict {
                        question_id: q.id.clone(),
                        matched_benchmark_item: None,
                        cosine_score: 0.0,
                        judge_decision: JudgeDecision::NotScreened,
                        removed: false,
                    });
                };
                let item = &benchmark_items[item_idx];
                let decision = if score >= options.screen_threshold {
                    match judge.judge(&q.statement, &item.statement)? {
                        JudgeDecision::NotScreened => {
                            return Err(Error::Validation("judge answered not_screened".into()))
                        }
                        d => d,
                    }
                } else {
                    JudgeDecision::NotScreened
                };
                Ok(ContaminationVerdict {
                    question_id: q.id.clone(),
                    matched_benchmark_item: Some((item.benchmark.clone(), item.id.clone())),
                    cosine_score: score,
                    judge_decision: decision,
                    removed: decision == JudgeDecision::Equivalent,
                })
            })
            .collect()
    });

    // Commit in input order; stop at the first failure.
    let mut fresh = fresh.into_iter();
    let mut verdicts = Vec::with_capacity(questions.len());
    for q in questions {
        if let Some(v) = resumed.get(q.id.as_str()) {
            verdicts.push((*v).clone());
            continue;
        }
        match fresh.next().expect("one result per pending question") {
            Ok(v) => verdicts.push(v),
            Err(error) => return Err(fail(verdicts, error)),
        }
    }
    let retained = questions.iter().zip(&verdicts).filter(|(_, v)| !v.removed).map(|(q, _)| q.clone()).collect();
    Ok((retained, verdicts))
}

fn resumed_prefix(
    questions: &[Question],
    resumed: &BTreeMap<&str, &ContaminationVerdict>,
) -> Vec<ContaminationVerdict> {
    questions.iter().map_while(|q| resumed.get(q.id.as_str()).map(|v| (*v).clone())).collect()
}
