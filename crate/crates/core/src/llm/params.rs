use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nucleus-sampling settings for one generation call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_new_tokens: u32,
    pub n_samples: u32,
    /// Only honored by the mock provider.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SamplingParams {
    pub const DEFAULT_TEMPERATURE: f64 = 0.6;
    pub const DEFAULT_TOP_P: f64 = 0.95;
    pub const SOLUTION_MAX_TOKENS: u32 = 32_768;
    pub const CRITIQUE_MAX_TOKENS: u32 = 24_576;
    pub const BENCHMARK_MAX_TOKENS: u32 = 30_720;

    fn with_max_tokens(max_new_tokens: u32) -> Self {
        Self {
            temperature: Self::DEFAULT_TEMPERATURE,
            top_p: Self::DEFAULT_TOP_P,
            max_new_tokens,
            n_samples: 1,
            seed: None,
        }
    }

    /// Settings for distilling solutions.
    pub fn solution() -> Self {
        Self::with_max_tokens(Self::SOLUTION_MAX_TOKENS)
    }

    /// Settings for distilling critiques.
    pub fn critique() -> Self {
        Self::with_max_tokens(Self::CRITIQUE_MAX_TOKENS)
    }

    /// Settings for benchmark inference.
    pub fn benchmark() -> Self {
        Self::with_max_tokens(Self::BENCHMARK_MAX_TOKENS)
    }

    pub fn with_samples(mut self, n: u32) -> Self {
        self.n_samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::Validation(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::Validation(format!("top_p must be in (0, 1], got {}", self.top_p)));
        }
        if self.max_new_tokens == 0 {
            return Err(Error::Validation("max_new_tokens must be positive".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::Validation("n_samples must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self::solution()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let s = SamplingParams::solution();
        assert_eq!((s.temperature, s.top_p, s.max_new_tokens), (0.6, 0.95, 32768));
        assert_eq!(SamplingParams::critique().max_new_tokens, 24576);
        assert_eq!(SamplingParams::benchmark().max_new_tokens, 30720);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn invalid() {
        assert!(SamplingParams::solution().with_samples(0).validate().is_err());
        let mut p = SamplingParams::solution();
        p.top_p = 0.0;
        assert!(p.validate().is_err());
        p.top_p = 1.0;
        p.temperature = -0.1;
        assert!(p.validate().is_err());
    }
}
