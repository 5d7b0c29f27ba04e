use crate::consensus::DEFAULT_TIE_TOLERANCE;
use crate::eval::EvalError;
use crate::judge::{BackendKind, JudgeClient, MockBackend, ResponseCache, DEFAULT_RATIONALE_LIMIT};
use crate::pairwise::EstimationDetector;
use crate::permutation::DEFAULT_SCHEDULE_SEED;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const DEFAULT_K: usize = 7;
pub const DEFAULT_CACHE_DIR: &str = ".pcfjudge-cache";

/// Name under which a default mock backend is always available.
const BUILTIN_MOCK: &str = "mock";

/// Harness configuration, read from TOML.
///
/// ```toml
/// k = 7
/// tolerance = 0.5
/// parallelism = 8
/// cache_dir = ".pcfjudge-cache"
///
/// [backends.large]
/// kind = "http"
/// endpoint = "https://api.example.com/v1/chat/completions"
/// model = "judge-large"
/// auth_env = "JUDGE_API_KEY"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Response cache directory; `None` disables caching.
    #[serde(default = "default_cache_dir")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_rationale_limit")]
    pub rationale_limit: usize,
    /// Overrides the shipped estimation-question patterns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation_patterns: Option<Vec<String>>,
    #[serde(default)]
    pub backends: BTreeMap<String, BackendKind>,
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_seed() -> u64 {
    DEFAULT_SCHEDULE_SEED
}

fn default_tolerance() -> f64 {
    DEFAULT_TIE_TOLERANCE
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

fn default_cache_dir() -> Option<PathBuf> {
    Some(PathBuf::from(DEFAULT_CACHE_DIR))
}

fn default_rationale_limit() -> usize {
    DEFAULT_RATIONALE_LIMIT
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            seed: default_seed(),
            tolerance: default_tolerance(),
            parallelism: default_parallelism(),
            cache_dir: default_cache_dir(),
            rationale_limit: default_rationale_limit(),
            estimation_patterns: None,
            backends: BTreeMap::new(),
        }
    }
}

impl EvalConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, EvalError> {
        let cfg: Self = toml::from_str(text).map_err(|e| EvalError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(EvalError::io(path))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.k == 0 {
            return Err(EvalError::Config("k must be ≥1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(EvalError::Config(format!("tolerance must be ≥0, got {}", self.tolerance)));
        }
        if self.parallelism == 0 {
            return Err(EvalError::Config("parallelism must be ≥1".into()));
        }
        self.detector()?;
        Ok(())
    }

    /// Looks up a backend by name; `mock` resolves to a default mock backend
    /// unless the config defines its own.
    pub fn backend(&self, name: &str) -> Result<BackendKind, EvalError> {
        match self.backends.get(name) {
            Some(b) => Ok(b.clone()),
            None if name == BUILTIN_MOCK => Ok(BackendKind::Mock {
                model: "mock-judge".into(),
                mock: MockBackend::default(),
            }),
            None => Err(EvalError::Config(format!(
                "unknown backend {name:?}; defined: {}",
                self.backends.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    /// Builds a cache-first client for the named backend.
    pub fn client(&self, name: &str) -> Result<Arc<JudgeClient>, EvalError> {
        let kind = self.backend(name)?;
        let backend = kind.build().map_err(|e| EvalError::Config(e.to_string()))?;
        let mut client = JudgeClient::new(backend, kind.model_id());
        if let Some(dir) = &self.cache_dir {
            client = client.with_cache(ResponseCache::open(dir).map_err(|e| EvalError::Config(e.to_string()))?);
        }
        Ok(Arc::new(client))
    }

    pub fn detector(&self) -> Result<EstimationDetector, EvalError> {
        match &self.estimation_patterns {
            None => Ok(EstimationDetector::default()),
            Some(patterns) => EstimationDetector::from_patterns(patterns.iter().map(String::as_str))
                .map_err(|e| EvalError::Config(format!("bad estimation pattern: {e}"))),
        }
    }
}
