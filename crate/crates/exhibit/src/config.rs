//! Engine configuration: a TOML file plus environment overrides.
//!
//! ```toml
//! [paths]
//! catalog = "data/MetObjects.csv"
//! exhibitions = "data/exhibitions.json"
//! artifacts = "artifacts"
//!
//! [embedding]
//! provider = "remote"            # or "local"
//! model = "text-embedding-3-large"
//! dim = 3072
//! base_url = "https://api.openai.com/v1"
//! api_key_env = "OPENAI_API_KEY"
//!
//! [training]
//! epochs = 2048
//!
//! [ranking]
//! k = 16
//! nprobe = 4
//!
//! [chat]
//! model = "ft:..."
//!
//! [service]
//! bind = "127.0.0.1:8080"
//! ```
//!
//! Every key is optional. `EXHIBIT_BIND`, `EXHIBIT_BASE_URL`,
//! `EXHIBIT_CHAT_MODEL` and `EXHIBIT_ARTIFACTS` override the file; the API key
//! is read from the variable named by `api_key_env`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use exhibit_core::neural::{AdamConfig, TrainingConfig, DEFAULT_EMBED_DIM, DEFAULT_HIDDEN_DIM};
use serde::{Deserialize, Serialize};

use crate::embedding::ProviderKind;
use crate::transport::RetryPolicy;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub catalog: PathBuf,
    pub exhibitions: PathBuf,
    /// Directory for vocabularies, checkpoints, histories, index and reports.
    pub artifacts: PathBuf,
    /// Embedding cache; defaults to `embeddings.cache` under `artifacts`.
    pub cache: Option<PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            catalog: "data/MetObjects.csv".into(),
            exhibitions: "data/exhibitions.json".into(),
            artifacts: "artifacts".into(),
            cache: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub provider: ProviderKind,
    pub model: String,
    pub dim: usize,
    pub base_url: String,
    pub api_key_env: String,
    /// Hash seed of the local provider.
    pub seed: u64,
    pub batch_size: usize,
    pub max_attempts: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            provider: ProviderKind::Local,
            model: "text-embedding-3-large".into(),
            dim: 256,
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            seed: 0,
            batch_size: 256,
            max_attempts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub split_ratio: f64,
    pub split_seed: u64,
    pub hidden_dim: usize,
    pub token_embed_dim: usize,
    pub max_tokens: usize,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainingSection {
            epochs: 2048,
            batch_size: 16,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            seed: 0,
            split_ratio: 0.8,
            split_seed: 0,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            token_embed_dim: DEFAULT_EMBED_DIM,
            max_tokens: exhibit_core::encoder::MAX_TOKENS,
        }
    }
}

impl TrainingSection {
    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: self.epsilon,
            },
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingConfig {
    /// Artworks returned for a new prompt.
    pub k: usize,
    pub nprobe: usize,
    /// Inverted lists; 0 picks `ceil(sqrt(n))`.
    pub nlist: usize,
    pub kmeans_iters: usize,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            k: exhibit_core::curation::DEFAULT_K,
            nprobe: exhibit_core::curation::DEFAULT_NPROBE,
            nlist: 0,
            kmeans_iters: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChatConfig {
    /// Fine-tuned model id; the chat-based variant is disabled when empty.
    pub model: String,
    pub base_url: Option<String>,
    pub max_attempts: usize,
    pub finetune_base_model: String,
    pub finetune_batch_size: usize,
    pub finetune_lr_multiplier: f64,
}

impl Default for ChatConfig {
    fn default() -> Self {
        ChatConfig {
            model: String::new(),
            base_url: None,
            max_attempts: 5,
            finetune_base_model: "gpt-3.5-turbo".into(),
            finetune_batch_size: 16,
            finetune_lr_multiplier: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1:8080".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub paths: PathsConfig,
    pub embedding: EmbeddingConfig,
    pub training: TrainingSection,
    pub ranking: RankingConfig,
    pub chat: ChatConfig,
    pub service: ServiceConfig,
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: EngineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads `path` when given (relative paths inside resolve against its
    /// directory), then applies the environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut c = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                let mut c = Self::from_toml(&text)?;
                if let Some(dir) = p.parent() {
                    c.paths.rebase(dir);
                }
                c
            }
            None => EngineConfig::default(),
        };
        c.apply_env(|k| std::env::var(k).ok());
        c.validate()?;
        Ok(c)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let Some(v) = get("EXHIBIT_BIND") {
            self.service.bind = v;
        }
        if let Some(v) = get("EXHIBIT_BASE_URL") {
            self.embedding.base_url = v;
        }
        if let Some(v) = get("EXHIBIT_CHAT_MODEL") {
            self.chat.model = v;
        }
        if let Some(v) = get("EXHIBIT_ARTIFACTS") {
            self.paths.artifacts = v.into();
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.ranking.k == 0 {
            return fail("ranking.k must be at least 1");
        }
        if self.ranking.nprobe == 0 {
            return fail("ranking.nprobe must be at least 1");
        }
        if self.training.epochs == 0 || self.training.batch_size == 0 {
            return fail("training.epochs and training.batch_size must be at least 1");
        }
        if !(self.training.split_ratio > 0.0 && self.training.split_ratio < 1.0) {
            return fail("training.split_ratio must lie in (0, 1)");
        }
        if self.embedding.dim < 8 {
            return fail("embedding.dim must be at least 8");
        }
        if self.chat.max_attempts == 0 || self.embedding.max_attempts == 0 {
            return fail("attempt budgets must be at least 1");
        }
        Ok(())
    }

    pub fn api_key(&self) -> Option<String> {
        std::env::var(&self.embedding.api_key_env).ok().filter(|k| !k.is_empty())
    }

    pub fn embedding_retry(&self) -> RetryPolicy {
        RetryPolicy {
            max_attempts: self.embedding.max_attempts,
            ..RetryPolicy::default()
        }
    }

    pub fn chat_base_url(&self) -> &str {
        self.chat.base_url.as_deref().unwrap_or(&self.embedding.base_url)
    }

    pub fn cache_path(&self) -> PathBuf {
        self.paths.cache.clone().unwrap_or_else(|| self.paths.artifacts.join("embeddings.cache"))
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.paths.artifacts.join(name)
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_secs(120)
    }
}

impl PathsConfig {
    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.catalog);
        fix(&mut self.exhibitions);
        fix(&mut self.artifacts);
        if let Some(c) = &mut self.cache {
            fix(c);
        }
    }
}
