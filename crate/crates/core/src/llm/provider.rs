use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Stop,
    /// Hit the token budget; downstream filters reject these.
    Length,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub text: String,
    pub finish_reason: FinishReason,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provider_meta: BTreeMap<String, serde_json::Value>,
}

impl RawResponse {
    pub fn stop(text: impl Into<String>) -> Self {
        Self { text: text.into(), finish_reason: FinishReason::Stop, provider_meta: BTreeMap::new() }
    }

    pub fn truncated(text: impl Into<String>) -> Self {
        Self { finish_reason: FinishReason::Length, ..Self::stop(text) }
    }
}

/// One call to a completion endpoint asking for `n` samples of `prompt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub n: u32,
    /// Index of the first requested sample within the overall batch.
    pub sample_offset: u32,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{message}", status.map(|s| format!("status {s}: ")).unwrap_or_default())]
pub struct ProviderError {
    pub status: Option<u16>,
    pub message: String,
    /// Worth retrying (timeouts, 429, 5xx, connection errors).
    pub transient: bool,
}

impl ProviderError {
    pub fn transient(status: Option<u16>, message: impl Into<String>) -> Self {
        Self { status, message: message.into(), transient: true }
    }

    pub fn fatal(status: Option<u16>, message: impl Into<String>) -> Self {
        Self { status, message: message.into(), transient: false }
    }

    pub fn from_status(status: u16, body: &str) -> Self {
        let excerpt: String = body.chars().take(512).collect();
        if status == 408 || status == 429 || status >= 500 {
            Self::transient(Some(status), excerpt)
        } else {
            Self::fatal(Some(status), excerpt)
        }
    }
}

/// Text-in/text-out completion endpoint.
pub trait CompletionProvider: Send + Sync {
    fn name(&self) -> &str;

    /// Returns up to `request.n` samples; callers top up short batches.
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<RawResponse>, ProviderError>;
}

impl<P: CompletionProvider + ?Sized> CompletionProvider for std::sync::Arc<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Vec<RawResponse>, ProviderError> {
        (**self).complete(request)
    }
}

impl<P: CompletionProvider + ?Sized> CompletionProvider for &P {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Vec<RawResponse>, ProviderError> {
        (**self).complete(request)
    }
}
