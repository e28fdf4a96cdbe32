use std::thread;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CompletionProvider, CompletionRequest, ProviderError, RawResponse, SamplingParams};
use crate::{Error, Result};

/// Exponential backoff for transient provider failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Attempts per request, including the first one.
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 5, base_delay_ms: 500, max_delay_ms: 30_000 }
    }
}

impl RetryPolicy {
    pub fn no_delay(max_attempts: u32) -> Self {
        Self { max_attempts, base_delay_ms: 0, max_delay_ms: 0 }
    }

    /// Delay before retry number `retry` (0-based).
    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.min(32)).unwrap_or(u64::MAX);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

/// Draws exactly `params.n_samples` responses for `prompt`.
///
/// Short batches are topped up with follow-up requests whose
/// `sample_offset` continues where the previous batch stopped, so sample
/// `i` is always requested under index `i`.
pub fn generate(
    prompt: &str,
    params: &SamplingParams,
    provider: &dyn CompletionProvider,
    retry: &RetryPolicy,
) -> Result<Vec<RawResponse>> {
    params.validate()?;
    let wanted = params.n_samples;
    let mut out: Vec<RawResponse> = Vec::with_capacity(wanted as usize);
    let mut failures = 0u32;
    while (out.len() as u32) < wanted {
        let request = CompletionRequest {
            prompt: prompt.to_string(),
            temperature: params.temperature,
            top_p: params.top_p,
            max_tokens: params.max_new_tokens,
            n: wanted - out.len() as u32,
            sample_offset: out.len() as u32,
            seed: params.seed,
        };
        let outcome = match provider.complete(&request) {
            Ok(batch) if batch.is_empty() => Err(ProviderError::transient(None, "provider returned no samples")),
            other => other,
        };
        match outcome {
            Ok(batch) => {
                failures = 0;
                let take = (wanted as usize - out.len()).min(batch.len());
                out.extend(batch.into_iter().take(take));
            }
            Err(err) => {
                failures += 1;
                if !err.transient || failures >= retry.max_attempts.max(1) {
                    return Err(Error::Provider(err));
                }
                tracing::warn!(provider = provider.name(), attempt = failures, error = %err, "retrying");
                thread::sleep(retry.delay(failures - 1));
            }
        }
    }
    Ok(out)
}

/// A prompt plus the key its results are stored under.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationJob<K> {
    pub key: K,
    pub prompt: String,
}

/// Runs many prompts with at most `in_flight` concurrent requests.
///
/// Results come back in job order. `on_done` fires as each job finishes
/// (in completion order) and is meant for checkpointing.
pub fn generate_batch<K: Sync>(
    jobs: &[GenerationJob<K>],
    params: &SamplingParams,
    provider: &dyn CompletionProvider,
    retry: &RetryPolicy,
    in_flight: usize,
    on_done: &(dyn Fn(&GenerationJob<K>, &Result<Vec<RawResponse>>) + Sync),
) -> Result<Vec<Result<Vec<RawResponse>>>> {
    params.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(in_flight.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("cannot build request pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let result = generate(&job.prompt, params, provider, retry);
                on_done(job, &result);
                result
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct Flaky {
        failures_left: AtomicU32,
        status: u16,
        per_call: u32,
    }

    impl CompletionProvider for Flaky {
        fn name(&self) -> &str {
            "flaky"
        }

        fn complete(&self, req: &CompletionRequest) -> std::result::Result<Vec<RawResponse>, ProviderError> {
            if self.failures_left.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1)).is_ok() {
                return Err(ProviderError::from_status(self.status, "boom"));
            }
            Ok((0..req.n.min(self.per_call))
                .map(|i| RawResponse::stop(format!("sample {}", req.sample_offset + i)))
                .collect())
        }
    }

    fn flaky(failures: u32, status: u16, per_call: u32) -> Flaky {
        Flaky { failures_left: AtomicU32::new(failures), status, per_call }
    }

    #[test]
    fn retries_transient_failures() {
        let p = flaky(2, 500, 10);
        let out = generate("x", &SamplingParams::solution().with_samples(3), &p, &RetryPolicy::no_delay(3)).unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn gives_up_after_cap_with_last_status() {
        let p = flaky(5, 503, 10);
        let err = generate("x", &SamplingParams::solution(), &p, &RetryPolicy::no_delay(3)).unwrap_err();
        match err {
            Error::Provider(e) => assert_eq!(e.status, Some(503)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn client_errors_are_not_retried() {
        let p = flaky(1, 400, 10);
        assert!(generate("x", &SamplingParams::solution(), &p, &RetryPolicy::no_delay(5)).is_err());
    }

    #[test]
    fn tops_up_short_batches_in_order() {
        let p = flaky(0, 500, 2);
        let out = generate("x", &SamplingParams::solution().with_samples(5), &p, &RetryPolicy::no_delay(1)).unwrap();
        let texts: Vec<_> = out.iter().map(|r| r.text.as_str()).collect();
        assert_eq!(texts, ["sample 0", "sample 1", "sample 2", "sample 3", "sample 4"]);
    }

    #[test]
    fn zero_samples_rejected() {
        let p = flaky(0, 500, 2);
        assert!(matches!(
            generate("x", &SamplingParams::solution().with_samples(0), &p, &RetryPolicy::no_delay(1)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let r = RetryPolicy { max_attempts: 10, base_delay_ms: 100, max_delay_ms: 1000 };
        assert_eq!(r.delay(0), Duration::from_millis(100));
        assert_eq!(r.delay(2), Duration::from_millis(400));
        assert_eq!(r.delay(9), Duration::from_millis(1000));
        assert_eq!(r.delay(200), Duration::from_millis(1000));
    }

    #[test]
    fn batch_preserves_job_order() {
        let p = flaky(0, 500, 10);
        let jobs: Vec<_> = (0..20).map(|i| GenerationJob { key: i, prompt: format!("p{i}") }).collect();
        let seen = AtomicU32::new(0);
        let out = generate_batch(
            &jobs,
            &SamplingParams::solution().with_samples(2),
            &p,
            &RetryPolicy::no_delay(1),
            4,
            &|_, _| {
                seen.fetch_add(1, Ordering::SeqCst);
            },
        )
        .unwrap();
        assert_eq!(out.len(), 20);
        assert_eq!(seen.load(Ordering::SeqCst), 20);
        assert!(out.iter().all(|r| r.as_ref().unwrap().len() == 2));
    }
}
