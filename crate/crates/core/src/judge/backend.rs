//! Judge backends. A backend turns a prompt into raw response text; it
//! knows nothing about caching or parsing.

use crate::eval::EvalItem;
use crate::judge::mock::{mock_judge, render_listwise_response, MockProfile};
use crate::judge::JudgeError;
use crate::pairwise::{self, MockPairProfile, PairItem, PairOrder};
use crate::permutation::Permutation;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

/// Structured context travelling with a prompt. Live backends ignore it;
/// the mock backend uses it to synthesize responses.
#[derive(Debug, Clone, Copy)]
pub enum RequestContext<'a> {
    Opaque,
    Listwise {
        item: &'a EvalItem,
        permutation: &'a Permutation,
    },
    PairCompare {
        item: &'a PairItem,
        order: PairOrder,
    },
    KeyedResolve {
        item: &'a PairItem,
    },
    KeyedCompare {
        item: &'a PairItem,
        resolved_answer: &'a str,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct JudgeRequest<'a> {
    pub prompt: &'a str,
    pub context: RequestContext<'a>,
}

impl<'a> JudgeRequest<'a> {
    pub fn opaque(prompt: &'a str) -> Self {
        Self {
            prompt,
            context: RequestContext::Opaque,
        }
    }
}

pub trait Backend: Send + Sync {
    fn complete(&self, request: &JudgeRequest<'_>) -> Result<String, JudgeError>;
}

/// Exponential backoff: `base · 2^attempt`, capped at `max_delay`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

fn default_timeout() -> f64 {
    60.0
}
fn default_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_max_backoff_ms() -> u64 {
    30_000
}
fn default_auth_header() -> String {
    "Authorization".into()
}
fn default_auth_scheme() -> Option<String> {
    Some("Bearer".into())
}
fn default_request_template() -> String {
    r#"{"model": {{model}}, "messages": [{"role": "user", "content": {{prompt}}}]}"#.into()
}
fn default_response_pointer() -> String {
    "/choices/0/message/content".into()
}
fn default_decoding() -> BTreeMap<String, Value> {
    BTreeMap::from([("temperature".to_string(), Value::from(0))])
}

/// Connection settings for a live chat-completion-style endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeBackendConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API token.
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default = "default_auth_header")]
    pub auth_header: String,
    #[serde(default = "default_auth_scheme")]
    pub auth_scheme: Option<String>,
    #[serde(default)]
    pub extra_headers: BTreeMap<String, String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_max_backoff_ms")]
    pub max_backoff_ms: u64,
    /// Merged into the top level of the request body.
    #[serde(default = "default_decoding")]
    pub decoding: BTreeMap<String, Value>,
    /// JSON body with `{{model}}` and `{{prompt}}` placeholders, substituted as JSON strings.
    #[serde(default = "default_request_template")]
    pub request_template: String,
    /// JSON pointer to the response text inside the reply body.
    #[serde(default = "default_response_pointer")]
    pub response_pointer: String,
}

impl JudgeBackendConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            auth_env: None,
            auth_header: default_auth_header(),
            auth_scheme: default_auth_scheme(),
            extra_headers: BTreeMap::new(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_ms: default_backoff_ms(),
            max_backoff_ms: default_max_backoff_ms(),
            decoding: default_decoding(),
            request_template: default_request_template(),
            response_pointer: default_response_pointer(),
        }
    }

    pub fn validate(&self) -> Result<(), JudgeError> {
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(JudgeError::Config("timeout must be > 0".into()));
        }
        if self.model.trim().is_empty() {
            return Err(JudgeError::Config("model identifier is empty".into()));
        }
        reqwest::Url::parse(&self.endpoint)
            .map_err(|e| JudgeError::Config(format!("invalid endpoint {:?}: {e}", self.endpoint)))?;
        // Catch template typos before the first request goes out.
        self.render_body("probe")?;
        Ok(())
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            base_delay: Duration::from_millis(self.backoff_ms),
            max_delay: Duration::from_millis(self.max_backoff_ms),
        }
    }

    fn render_body(&self, prompt: &str) -> Result<Value, JudgeError> {
        let text = self
            .request_template
            .replace("{{model}}", &Value::from(self.model.as_str()).to_string())
            .replace("{{prompt}}", &Value::from(prompt).to_string());
        let mut body: Value = serde_json::from_str(&text)
            .map_err(|e| JudgeError::Config(format!("request template is not valid JSON: {e}")))?;
        let obj = body
            .as_object_mut()
            .ok_or_else(|| JudgeError::Config("request template must be a JSON object".into()))?;
        for (k, v) in &self.decoding {
            obj.insert(k.clone(), v.clone());
        }
        Ok(body)
    }
}

/// HTTP backend with bounded retries and exponential backoff.
pub struct HttpBackend {
    config: JudgeBackendConfig,
    client: reqwest::blocking::Client,
    retry: RetryPolicy,
}

impl HttpBackend {
    pub fn new(config: JudgeBackendConfig) -> Result<Self, JudgeError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| JudgeError::Config(format!("cannot build HTTP client: {e}")))?;
        let retry = config.retry_policy();
        Ok(Self {
            config,
            client,
            retry,
        })
    }

    pub fn config(&self) -> &JudgeBackendConfig {
        &self.config
    }

    fn token(&self) -> Result<Option<String>, JudgeError> {
        match &self.config.auth_env {
            None => Ok(None),
            Some(var) => match std::env::var(var) {
                Ok(t) if !t.is_empty() => Ok(Some(t)),
                _ => Err(JudgeError::Config(format!("auth token variable {var} is not set"))),
            },
        }
    }

    fn attempt(&self, body: &Value, token: Option<&str>) -> Result<String, Attempt> {
        let mut req = self
            .client
            .post(&self.config.endpoint)
            .header("content-type", "application/json")
            .body(body.to_string());
        if let Some(token) = token {
            let value = match &self.config.auth_scheme {
                Some(scheme) => format!("{scheme} {token}"),
                None => token.to_string(),
            };
            req = req.header(self.config.auth_header.as_str(), value);
        }
        for (k, v) in &self.config.extra_headers {
            req = req.header(k.as_str(), v.as_str());
        }
        let resp = req.send().map_err(|e| Attempt::Transient(format!("request failed: {e}")))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| Attempt::Transient(format!("reading body failed: {e}")))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Attempt::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(format!("HTTP {status}: {}", snippet(&text))));
        }
        let json: Value = serde_json::from_str(&text)
            .map_err(|e| Attempt::Fatal(format!("reply is not JSON: {e}")))?;
        json.pointer(&self.config.response_pointer)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| {
                Attempt::Fatal(format!(
                    "reply has no string at {}",
                    self.config.response_pointer
                ))
            })
    }
}

enum Attempt {
    Transient(String),
    Fatal(String),
}

fn snippet(text: &str) -> &str {
    match text.char_indices().nth(200) {
        Some((i, _)) => &text[..i],
        None => text,
    }
}

impl Backend for HttpBackend {
    fn complete(&self, request: &JudgeRequest<'_>) -> Result<String, JudgeError> {
        let token = self.token()?;
        let body = self.config.render_body(request.prompt)?;
        let mut attempt = 0;
        loop {
            match self.attempt(&body, token.as_deref()) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(msg)) => return Err(JudgeError::Backend(msg)),
                Err(Attempt::Transient(msg)) => {
                    if attempt >= self.retry.max_retries {
                        return Err(JudgeError::Backend(format!(
                            "giving up after {} attempts: {msg}",
                            attempt + 1
                        )));
                    }
                    let delay = self.retry.delay(attempt);
                    log::warn!("judge call failed ({msg}); retrying in {delay:?}");
                    std::thread::sleep(delay);
                    attempt += 1;
                }
            }
        }
    }
}

/// Returns the same text for every request.
#[derive(Debug, Clone)]
pub struct CannedBackend {
    response: String,
}

impl CannedBackend {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
        }
    }
}

impl Backend for CannedBackend {
    fn complete(&self, _request: &JudgeRequest<'_>) -> Result<String, JudgeError> {
        Ok(self.response.clone())
    }
}

/// Synthesizes well-formed responses from the request context.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockBackend {
    #[serde(default)]
    pub listwise: MockProfile,
    #[serde(default)]
    pub pairwise: MockPairProfile,
}

impl Backend for MockBackend {
    fn complete(&self, request: &JudgeRequest<'_>) -> Result<String, JudgeError> {
        match request.context {
            RequestContext::Listwise { item, permutation } => {
                let seed = self.listwise.request_seed(item, permutation);
                let response = mock_judge(&self.listwise, item, permutation, seed)?;
                Ok(render_listwise_response(&response))
            }
            RequestContext::PairCompare { item, order } => {
                let presented = pairwise::mock_pair_compare(&self.pairwise, item, order)?;
                Ok(pairwise::render_pair_response(presented))
            }
            RequestContext::KeyedResolve { item } => {
                let answer = pairwise::mock_keyed_answer(&self.pairwise, item)?;
                Ok(pairwise::render_keyed_answer(&answer))
            }
            RequestContext::KeyedCompare {
                item,
                resolved_answer,
            } => {
                let verdict = pairwise::mock_keyed_compare(item, resolved_answer);
                Ok(pairwise::render_keyed_verdict(verdict))
            }
            RequestContext::Opaque => Err(JudgeError::Backend(
                "mock backend needs a structured request context".into(),
            )),
        }
    }
}

/// Backend definition as it appears in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendKind {
    Http(JudgeBackendConfig),
    Mock {
        #[serde(default = "default_mock_model")]
        model: String,
        #[serde(flatten)]
        mock: MockBackend,
    },
    Canned {
        model: String,
        response: String,
    },
}

fn default_mock_model() -> String {
    "mock-judge".into()
}

impl BackendKind {
    /// Model identifier folded into cache keys.
    pub fn model_id(&self) -> &str {
        match self {
            BackendKind::Http(c) => &c.model,
            BackendKind::Mock { model, .. } | BackendKind::Canned { model, .. } => model,
        }
    }

    pub fn build(&self) -> Result<Arc<dyn Backend>, JudgeError> {
        Ok(match self {
            BackendKind::Http(c) => Arc::new(HttpBackend::new(c.clone())?),
            BackendKind::Mock { mock, .. } => {
                mock.listwise.validate()?;
                mock.pairwise.validate()?;
                Arc::new(mock.clone())
            }
            BackendKind::Canned { response, .. } => Arc::new(CannedBackend::new(response.clone())),
        })
    }
}
