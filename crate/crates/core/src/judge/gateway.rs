use crate::eval::EvalItem;
use crate::judge::backend::{Backend, JudgeRequest, RequestContext};
use crate::judge::cache::{cache_key, CacheMetadata, ResponseCache};
use crate::judge::prompt::{build_listwise_prompt, corrective_prompt, LISTWISE_TEMPLATE_VERSION};
use crate::judge::response::parse_listwise_response;
use crate::judge::{JudgeError, ListwiseJudge, ListwiseJudgeResponse};
use crate::permutation::Permutation;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

pub const DEFAULT_RATIONALE_LIMIT: usize = 600;

/// Cache-first access to a backend.
pub struct JudgeClient {
    backend: Arc<dyn Backend>,
    model_id: String,
    cache: Option<ResponseCache>,
    backend_calls: AtomicUsize,
}

impl JudgeClient {
    pub fn new(backend: Arc<dyn Backend>, model_id: impl Into<String>) -> Self {
        Self {
            backend,
            model_id: model_id.into(),
            cache: None,
            backend_calls: AtomicUsize::new(0),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn cache(&self) -> Option<&ResponseCache> {
        self.cache.as_ref()
    }

    /// Number of requests that reached the backend (cache misses).
    pub fn backend_calls(&self) -> usize {
        self.backend_calls.load(Ordering::Relaxed)
    }

    /// Returns the cached raw response for this prompt if present; otherwise
    /// calls the backend and stores the raw text under the prompt's key.
    pub fn call(&self, request: &JudgeRequest<'_>, template_version: &str) -> Result<String, JudgeError> {
        let key = cache_key(&self.model_id, template_version, request.prompt);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(&key)? {
                return Ok(hit.raw);
            }
        }
        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        let raw = self.backend.complete(request)?;
        if let Some(cache) = &self.cache {
            let metadata = CacheMetadata {
                model: self.model_id.clone(),
                template_version: template_version.to_string(),
                created_at: chrono::Utc::now().to_rfc3339(),
            };
            cache.put(&key, &metadata, &raw)?;
        }
        Ok(raw)
    }

    /// Calls, parses, and on a parse or validation failure re-prompts once
    /// with the problem spelled out.
    pub(crate) fn call_parsed<T>(
        &self,
        prompt: &str,
        context: RequestContext<'_>,
        template_version: &str,
        parse: impl Fn(&str) -> Result<T, JudgeError>,
    ) -> Result<T, JudgeError> {
        let raw = self.call(&JudgeRequest { prompt, context }, template_version)?;
        match parse(&raw) {
            Ok(v) => Ok(v),
            Err(e) if e.is_correctable() => {
                log::debug!("re-prompting after rejected response: {e}");
                let retry = corrective_prompt(prompt, &e.to_string());
                let raw = self.call(
                    &JudgeRequest {
                        prompt: &retry,
                        context,
                    },
                    template_version,
                )?;
                parse(&raw)
            }
            Err(e) => Err(e),
        }
    }
}

/// Live or replayed listwise judging through a [`JudgeClient`].
pub struct ListwiseGateway {
    client: Arc<JudgeClient>,
    rationale_limit: usize,
}

impl ListwiseGateway {
    pub fn new(client: Arc<JudgeClient>) -> Self {
        Self {
            client,
            rationale_limit: DEFAULT_RATIONALE_LIMIT,
        }
    }

    pub fn with_rationale_limit(mut self, limit: usize) -> Self {
        self.rationale_limit = limit;
        self
    }

    pub fn client(&self) -> &JudgeClient {
        &self.client
    }
}

impl ListwiseJudge for ListwiseGateway {
    fn judge(
        &self,
        item: &EvalItem,
        permutation: &Permutation,
    ) -> Result<ListwiseJudgeResponse, JudgeError> {
        let prompt = build_listwise_prompt(item, permutation)?;
        let n = item.candidates.len();
        self.client.call_parsed(
            &prompt,
            RequestContext::Listwise { item, permutation },
            LISTWISE_TEMPLATE_VERSION,
            |raw| parse_listwise_response(raw, n, self.rationale_limit),
        )
    }
}
