use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{CompletionProvider, CompletionRequest, FinishReason, ProviderError, RawResponse};
use crate::{Error, Result};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "REASONFORGE_API_KEY";

/// Names of the JSON request fields sent to the endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RequestFields {
    pub model: String,
    pub prompt: String,
    pub temperature: String,
    pub top_p: String,
    pub max_tokens: String,
    pub n: String,
    /// Omitted from the request when unset.
    pub seed: Option<String>,
}

impl Default for RequestFields {
    fn default() -> Self {
        Self {
            model: "model".into(),
            prompt: "prompt".into(),
            temperature: "temperature".into(),
            top_p: "top_p".into(),
            max_tokens: "max_tokens".into(),
            n: "n".into(),
            seed: None,
        }
    }
}

/// Where to find samples in the JSON response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResponseFields {
    pub choices: String,
    pub text: String,
    pub finish_reason: String,
}

impl Default for ResponseFields {
    fn default() -> Self {
        Self { choices: "choices".into(), text: "text".into(), finish_reason: "finish_reason".into() }
    }
}

/// Connection settings and field mapping for an HTTP completion endpoint.
///
/// Defaults describe an OpenAI-style `/v1/completions` endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pub name: String,
    pub base_url: String,
    #[serde(default = "default_endpoint")]
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub request_fields: RequestFields,
    #[serde(default)]
    pub response_fields: ResponseFields,
}

fn default_endpoint() -> String {
    "/v1/completions".into()
}

fn default_key_env() -> String {
    API_KEY_ENV.into()
}

fn default_timeout() -> u64 {
    900
}

impl ProviderProfile {
    pub fn new(name: impl Into<String>, base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            base_url: base_url.into(),
            endpoint: default_endpoint(),
            model: model.into(),
            api_key_env: default_key_env(),
            timeout_secs: default_timeout(),
            request_fields: RequestFields::default(),
            response_fields: ResponseFields::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml_like(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_url.trim().is_empty() {
            return Err(Error::Validation(format!("provider profile `{}` has no base_url", self.name)));
        }
        if self.model.trim().is_empty() {
            return Err(Error::Validation(format!("provider profile `{}` has no model", self.name)));
        }
        Ok(())
    }

    pub fn url(&self) -> String {
        format!("{}/{}", self.base_url.trim_end_matches('/'), self.endpoint.trim_start_matches('/'))
    }

    pub(crate) fn request_body(&self, req: &CompletionRequest) -> Value {
        let f = &self.request_fields;
        let mut body = Map::new();
        body.insert(f.model.clone(), json!(self.model));
        body.insert(f.prompt.clone(), json!(req.prompt));
        body.insert(f.temperature.clone(), json!(req.temperature));
        body.insert(f.top_p.clone(), json!(req.top_p));
        body.insert(f.max_tokens.clone(), json!(req.max_tokens));
        body.insert(f.n.clone(), json!(req.n));
        if let (Some(field), Some(seed)) = (&f.seed, req.seed) {
            body.insert(field.clone(), json!(seed));
        }
        Value::Object(body)
    }

    pub(crate) fn parse_response(&self, body: &Value) -> std::result::Result<Vec<RawResponse>, ProviderError> {
        let f = &self.response_fields;
        let choices = body
            .get(&f.choices)
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::fatal(None, format!("response has no `{}` array", f.choices)))?;
        choices
            .iter()
            .enumerate()
            .map(|(i, choice)| {
                let text = choice
                    .get(&f.text)
                    .and_then(Value::as_str)
                    .ok_or_else(|| ProviderError::fatal(None, format!("choice {i} has no `{}` string", f.text)))?;
                let finish = match choice.get(&f.finish_reason).and_then(Value::as_str) {
                    None | Some("stop") | Some("eos") | Some("end_turn") | Some("stop_sequence") => FinishReason::Stop,
                    Some("length") | Some("max_tokens") => FinishReason::Length,
                    Some(_) => FinishReason::Error,
                };
                let mut meta = BTreeMap::new();
                meta.insert("provider".to_string(), json!(self.name));
                Ok(RawResponse { text: text.to_string(), finish_reason: finish, provider_meta: meta })
            })
            .collect()
    }
}

// Profiles are small; accept either TOML or JSON.
fn toml_like(text: &str, path: &Path) -> Result<ProviderProfile> {
    let parse_err = |message: String| Error::Parse { path: path.to_path_buf(), line: 0, message };
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| parse_err(e.to_string()))
    }
}

/// Blocking HTTP client for a completion endpoint.
pub struct HttpProvider {
    profile: ProviderProfile,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpProvider {
    /// Reads the bearer token from the profile's key variable if it is set.
    pub fn new(profile: ProviderProfile) -> Result<Self> {
        profile.validate()?;
        let api_key = std::env::var(&profile.api_key_env).ok().filter(|k| !k.is_empty());
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(profile.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { profile, api_key, agent })
    }

    pub fn profile(&self) -> &ProviderProfile {
        &self.profile
    }

    pub(crate) fn post_json(&self, url: &str, body: &Value) -> std::result::Result<Value, ProviderError> {
        let payload = serde_json::to_vec(body).map_err(|e| ProviderError::fatal(None, e.to_string()))?;
        let mut req = self.agent.post(url).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send(&payload[..]).map_err(|e| ProviderError::transient(None, e.to_string()))?;
        let status = resp.status().as_u16();
        let text =
            resp.body_mut().read_to_string().map_err(|e| ProviderError::transient(Some(status), e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(ProviderError::from_status(status, &text));
        }
        serde_json::from_str(&text)
            .map_err(|e| ProviderError::transient(Some(status), format!("malformed JSON body: {e}")))
    }
}

impl CompletionProvider for HttpProvider {
    fn name(&self) -> &str {
        &self.profile.name
    }

    fn complete(&self, request: &CompletionRequest) -> std::result::Result<Vec<RawResponse>, ProviderError> {
        let body = self.profile.request_body(request);
        let value = self.post_json(&self.profile.url(), &body)?;
        self.profile.parse_response(&value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request() -> CompletionRequest {
        CompletionRequest {
            prompt: "p".into(),
            temperature: 0.6,
            top_p: 0.95,
            max_tokens: 100,
            n: 2,
            sample_offset: 0,
            seed: Some(3),
        }
    }

    #[test]
    fn field_names_are_configurable() {
        let mut profile = ProviderProfile::new("x", "http://h/", "m");
        profile.request_fields.max_tokens = "max_new_tokens".into();
        profile.request_fields.seed = Some("seed".into());
        let body = profile.request_body(&request());
        assert_eq!(body["max_new_tokens"], 100);
        assert_eq!(body["seed"], 3);
        assert_eq!(body["model"], "m");
        assert!(body.get("max_tokens").is_none());
        assert_eq!(profile.url(), "http://h/v1/completions");
    }

    #[test]
    fn parses_choices_and_finish_reasons() {
        let profile = ProviderProfile::new("x", "http://h", "m");
        let body = json!({"choices": [
            {"text": "a", "finish_reason": "stop"},
            {"text": "b", "finish_reason": "length"},
            {"text": "c", "finish_reason": "content_filter"}
        ]});
        let out = profile.parse_response(&body).unwrap();
        let reasons: Vec<_> = out.iter().map(|r| r.finish_reason).collect();
        assert_eq!(reasons, [FinishReason::Stop, FinishReason::Length, FinishReason::Error]);
        assert!(profile.parse_response(&json!({"x": 1})).is_err());
    }

    #[test]
    fn profile_from_toml() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.toml");
        std::fs::write(
            &path,
            "name = \"local\"\nbase_url = \"http://localhost:8000\"\nmodel = \"m\"\n[response_fields]\ntext = \"content\"\n",
        )
        .unwrap();
        let p = ProviderProfile::load(&path).unwrap();
        assert_eq!(p.response_fields.text, "content");
        assert_eq!(p.response_fields.choices, "choices");
        assert_eq!(p.api_key_env, API_KEY_ENV);
    }
}
