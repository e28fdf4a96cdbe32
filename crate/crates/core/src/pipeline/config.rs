use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{DEFAULT_DEDUP_THRESHOLD, DEFAULT_SCREEN_THRESHOLD};
use crate::exec::{SandboxPolicy, Toolchain};
use crate::llm::{ProviderProfile, RetryPolicy, SamplingParams};
use crate::metrics::Strategy;
use crate::seed::sha256_hex;
use crate::{CodeLanguage, Error, Result};

/// Declarative run configuration, one section per stage.
///
/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub run: RunSection,
    pub input: InputSection,
    #[serde(default)]
    pub dedup: DedupSection,
    #[serde(default)]
    pub decontaminate: DecontamSection,
    pub provider: ProviderSection,
    #[serde(default)]
    pub generate: GenerateSection,
    #[serde(default)]
    pub critique: CritiqueSection,
    #[serde(default)]
    pub execute: ExecuteSection,
    #[serde(default)]
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// Question JSONL.
    pub questions: PathBuf,
    /// Benchmark statements for decontamination (JSONL of benchmark items).
    #[serde(default)]
    pub benchmark_items: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupSection {
    pub enabled: bool,
    pub threshold: f64,
}

impl Default for DedupSection {
    fn default() -> Self {
        Self { enabled: true, threshold: DEFAULT_DEDUP_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderKind {
    /// Offline hashed trigram vectors.
    Hashing,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    /// Offline fuzzy-similarity judge.
    Fuzzy,
    /// The configured completion provider with the equivalence prompt.
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecontamSection {
    pub enabled: bool,
    pub screen_threshold: f64,
    pub embedder: EmbedderKind,
    /// Provider profile for `embedder = "http"`.
    pub embedder_profile: Option<PathBuf>,
    pub judge: JudgeKind,
    pub in_flight: usize,
}

impl Default for DecontamSection {
    fn default() -> Self {
        Self {
            enabled: true,
            screen_threshold: DEFAULT_SCREEN_THRESHOLD,
            embedder: EmbedderKind::Hashing,
            embedder_profile: None,
            judge: JudgeKind::Fuzzy,
            in_flight: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderSection {
    pub kind: ProviderKind,
    /// Profile file for HTTP providers. `base_url` and `model` below
    /// override its values.
    #[serde(default)]
    pub profile: Option<PathBuf>,
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    /// Scripted mock responses (JSONL of prompt digests and responses).
    #[serde(default)]
    pub mock_script: Option<PathBuf>,
    /// Directory of `<question id>/<label>.<py|cpp>` solutions turned into
    /// mock responses at start-up.
    #[serde(default)]
    pub mock_solutions: Option<PathBuf>,
    #[serde(default = "default_mock_labels")]
    pub mock_labels: Vec<String>,
    /// Add one response without a think span per scripted solution prompt.
    #[serde(default = "yes")]
    pub mock_malformed: bool,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_mock_labels() -> Vec<String> {
    vec!["correct".into(), "off_by_one".into()]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub languages: Vec<CodeLanguage>,
    /// Samples per question and language.
    pub n_samples: u32,
    pub temperature: f64,
    pub top_p: f64,
    pub max_new_tokens: u32,
    pub in_flight: usize,
}

impl Default for GenerateSection {
    fn default() -> Self {
        Self {
            languages: CodeLanguage::ALL.to_vec(),
            n_samples: 8,
            temperature: SamplingParams::DEFAULT_TEMPERATURE,
            top_p: SamplingParams::DEFAULT_TOP_P,
            max_new_tokens: SamplingParams::SOLUTION_MAX_TOKENS,
            in_flight: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CritiqueSection {
    pub temperature: f64,
    pub top_p: f64,
    pub max_new_tokens: u32,
    pub in_flight: usize,
}

impl Default for CritiqueSection {
    fn default() -> Self {
        Self {
            temperature: SamplingParams::DEFAULT_TEMPERATURE,
            top_p: SamplingParams::DEFAULT_TOP_P,
            max_new_tokens: SamplingParams::CRITIQUE_MAX_TOKENS,
            in_flight: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct ExecuteSection {
    pub policy: SandboxPolicy,
    pub toolchain: Toolchain,
    /// Parallel evaluations; 0 means one per logical core.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub k: usize,
    pub strategy: Strategy,
    pub n_resamples: usize,
    /// Also write gap curves up to this k.
    pub curves_k_max: Option<usize>,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self { k: 4, strategy: Strategy::Shortest, n_resamples: 100, curves_k_max: None }
    }
}

impl PipelineConfig {
    /// Parses, resolves relative paths and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self =
            toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve(base);
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut config: Self = toml::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        config.resolve(base);
        config.validate()?;
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.run.out_dir);
        fix(&mut self.input.questions);
        for p in [
            self.input.benchmark_items.as_mut(),
            self.decontaminate.embedder_profile.as_mut(),
            self.provider.profile.as_mut(),
            self.provider.mock_script.as_mut(),
            self.provider.mock_solutions.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Everything that can be checked without doing any work.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.run.name.trim().is_empty() {
            return bad("run.name is empty".into());
        }
        if !(0.0..=1.0).contains(&self.dedup.threshold) {
            return bad(format!("dedup.threshold must be in [0, 1], got {}", self.dedup.threshold));
        }
        if !(-1.0..=1.0).contains(&self.decontaminate.screen_threshold) {
            return bad(format!(
                "decontaminate.screen_threshold must be in [-1, 1], got {}",
                self.decontaminate.screen_threshold
            ));
        }
        if self.decontaminate.enabled && self.input.benchmark_items.is_none() {
            return bad("decontaminate is enabled but input.benchmark_items is not set".into());
        }
        if self.decontaminate.enabled && self.decontaminate.embedder == EmbedderKind::Http {
            match &self.decontaminate.embedder_profile {
                Some(p) => ProviderProfile::load(p)?.validate()?,
                None => return bad("decontaminate.embedder = \"http\" needs embedder_profile".into()),
            }
        }
        if self.generate.languages.is_empty() {
            return bad("generate.languages is empty".into());
        }
        let mut langs = self.generate.languages.clone();
        langs.sort();
        langs.dedup();
        if langs.len() != self.generate.languages.len() {
            return bad("generate.languages lists a language twice".into());
        }
        self.solution_params().validate()?;
        self.critique_params().validate()?;
        if self.generate.in_flight == 0 || self.critique.in_flight == 0 || self.decontaminate.in_flight == 0 {
            return bad("in_flight must be positive".into());
        }
        self.execute.policy.validate()?;
        if self.evaluate.k == 0 {
            return bad("evaluate.k must be positive".into());
        }
        if self.evaluate.n_resamples == 0 {
            return bad("evaluate.n_resamples must be positive".into());
        }
        if self.evaluate.curves_k_max == Some(0) {
            return bad("evaluate.curves_k_max must be positive".into());
        }
        if self.provider.retry.max_attempts == 0 {
            return bad("provider.retry.max_attempts must be positive".into());
        }
        match self.provider.kind {
            ProviderKind::Http => {
                self.http_profile()?;
            }
            ProviderKind::Mock => {
                if self.provider.mock_solutions.is_some() && self.provider.mock_labels.is_empty() {
                    return bad("provider.mock_labels is empty".into());
                }
            }
        }
        Ok(())
    }

    /// Effective HTTP profile: the profile file, if any, with inline
    /// overrides applied.
    pub fn http_profile(&self) -> Result<ProviderProfile> {
        let p = &self.provider;
        let mut profile = match &p.profile {
            Some(path) => ProviderProfile::load(path)?,
            None => ProviderProfile::new(self.run.name.clone(), String::new(), String::new()),
        };
        if let Some(url) = &p.base_url {
            profile.base_url = url.clone();
        }
        if let Some(model) = &p.model {
            profile.model = model.clone();
        }
        if profile.base_url.trim().is_empty() {
            return Err(Error::Validation(
                "provider.kind = \"http\" needs a base URL (provider.base_url or a profile)".into(),
            ));
        }
        profile.validate()?;
        Ok(profile)
    }

    /// Name recorded in manifests.
    pub fn provider_profile_name(&self) -> String {
        match self.provider.kind {
            ProviderKind::Mock => "mock".into(),
            ProviderKind::Http => self.http_profile().map(|p| p.name).unwrap_or_else(|_| "http".into()),
        }
    }

    pub fn solution_params(&self) -> SamplingParams {
        let g = &self.generate;
        SamplingParams {
            temperature: g.temperature,
            top_p: g.top_p,
            max_new_tokens: g.max_new_tokens,
            n_samples: g.n_samples,
            seed: Some(self.run.seed),
        }
    }

    pub fn critique_params(&self) -> SamplingParams {
        let c = &self.critique;
        SamplingParams {
            temperature: c.temperature,
            top_p: c.top_p,
            max_new_tokens: c.max_new_tokens,
            n_samples: 1,
            seed: Some(self.run.seed),
        }
    }

    /// Canonical JSON snapshot stored in manifests.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Digest of the canonical snapshot.
    pub fn run_id(&self) -> String {
        let text = serde_json::to_string(&self.snapshot()).expect("config serializes");
        sha256_hex(text.as_bytes())[..16].to_string()
    }

    /// First sample index of a language; languages get consecutive blocks
    /// of `n_samples` indices in configuration order.
    pub fn sample_offset(&self, language: CodeLanguage) -> u32 {
        let pos = self.generate.languages.iter().position(|&l| l == language).unwrap_or(0) as u32;
        pos * self.generate.n_samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[run]
name = "t"
seed = 3
out_dir = "out"

[input]
questions = "q.jsonl"
benchmark_items = "b.jsonl"

[provider]
kind = "mock"
"#;

    #[test]
    fn defaults_and_relative_paths() {
        let c = PipelineConfig::from_toml(MINIMAL, Path::new("/base")).unwrap();
        assert_eq!(c.run.out_dir, Path::new("/base/out"));
        assert_eq!(c.input.benchmark_items.as_deref(), Some(Path::new("/base/b.jsonl")));
        assert_eq!(c.dedup.threshold, 0.9);
        assert_eq!(c.decontaminate.screen_threshold, 0.7);
        assert_eq!(c.generate.languages, CodeLanguage::ALL);
        assert_eq!(c.solution_params().max_new_tokens, 32_768);
        assert_eq!(c.critique_params().max_new_tokens, 24_576);
        assert_eq!(c.sample_offset(CodeLanguage::Cpp), 8);
        assert_eq!(c.run_id(), PipelineConfig::from_toml(MINIMAL, Path::new("/base")).unwrap().run_id());
    }

    #[test]
    fn http_without_url_is_rejected_up_front() {
        let text = MINIMAL.replace("kind = \"mock\"", "kind = \"http\"");
        let err = PipelineConfig::from_toml(&text, Path::new("/base")).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
        assert_eq!(err.exit_code(), 2);
        let ok = MINIMAL.replace("kind = \"mock\"", "kind = \"http\"\nbase_url = \"http://h\"\nmodel = \"m\"");
        assert!(PipelineConfig::from_toml(&ok, Path::new("/base")).is_ok());
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        assert!(PipelineConfig::from_toml(&format!("{MINIMAL}\n[dedup]\nthreshhold = 0.8\n"), Path::new("/")).is_err());
        assert!(PipelineConfig::from_toml(&format!("{MINIMAL}\n[evaluate]\nk = 0\n"), Path::new("/")).is_err());
        assert!(PipelineConfig::from_toml(&format!("{MINIMAL}\n[generate]\nlanguages = []\n"), Path::new("/")).is_err());
        let no_bench = MINIMAL.replace("benchmark_items = \"b.jsonl\"", "");
        assert!(PipelineConfig::from_toml(&no_bench, Path::new("/")).is_err());
    }
}
