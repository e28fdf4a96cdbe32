//! Prompt rendering and completion providers.

mod generate;
mod http;
mod mock;
mod params;
mod prompt;
mod provider;

pub use generate::{generate, generate_batch, GenerationJob, RetryPolicy};
pub use http::{HttpProvider, ProviderProfile, API_KEY_ENV};
pub use mock::{MockProvider, MockScript, ScriptEntry};
pub use params::SamplingParams;
pub use prompt::{render_critique_prompt, render_solution_prompt, PromptKind, PromptTemplate};
pub use provider::{CompletionProvider, CompletionRequest, FinishReason, ProviderError, RawResponse};
