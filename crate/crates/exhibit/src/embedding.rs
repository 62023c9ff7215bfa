//! Text embedding providers and the cache-backed front end used everywhere.

use std::sync::{Arc, Mutex};

use exhibit_core::encoder::{local_deterministic_embed, EmbeddingVector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cache::{cache_key, EmbeddingCache};
use crate::transport::{post_with_retry, RetryPolicy, Transport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Local,
    Remote,
}

/// Which embedder produced a vector space. Stored alongside checkpoints and
/// indexes so a mismatch is caught at load time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pub kind: ProviderKind,
    pub model: String,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ProviderProfile {
    pub fn local(dim: usize, seed: u64) -> Self {
        ProviderProfile {
            kind: ProviderKind::Local,
            model: format!("hash-{dim}"),
            dim,
            seed,
        }
    }

    pub fn provider_id(&self) -> &'static str {
        match self.kind {
            ProviderKind::Local => "local",
            ProviderKind::Remote => "remote",
        }
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn profile(&self) -> &ProviderProfile;

    /// One vector per input, in order.
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>>;
}

pub struct LocalEmbedder {
    profile: ProviderProfile,
}

impl LocalEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        LocalEmbedder {
            profile: ProviderProfile::local(dim, seed),
        }
    }
}

impl EmbeddingProvider for LocalEmbedder {
    fn profile(&self) -> &ProviderProfile {
        &self.profile
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        texts
            .iter()
            .map(|t| Ok(local_deterministic_embed(t, self.profile.dim, self.profile.seed)?.into_values()))
            .collect()
    }
}

/// Client for an embeddings endpoint taking `{model, input: [texts]}` and
/// answering `{data: [{index, embedding}]}`.
pub struct RemoteEmbedder {
    profile: ProviderProfile,
    transport: Arc<dyn Transport>,
    url: String,
    api_key: Option<String>,
    pub batch_size: usize,
    pub retry: RetryPolicy,
}

impl RemoteEmbedder {
    pub fn new(transport: Arc<dyn Transport>, base_url: &str, model: &str, dim: usize, api_key: Option<String>) -> Self {
        RemoteEmbedder {
            profile: ProviderProfile {
                kind: ProviderKind::Remote,
                model: model.into(),
                dim,
                seed: 0,
            },
            transport,
            url: format!("{}/embeddings", base_url.trim_end_matches('/')),
            api_key,
            batch_size: 256,
            retry: RetryPolicy::default(),
        }
    }
}

fn parse_embeddings(resp: &Value, expected: usize) -> Result<Vec<Vec<f64>>> {
    let data = resp
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Transport("embedding response without \"data\"".into()))?;
    let mut out = vec![None; expected];
    for (pos, item) in data.iter().enumerate() {
        let index = item.get("index").and_then(Value::as_u64).map_or(pos, |i| i as usize);
        let values = item
            .get("embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Transport("embedding item without \"embedding\"".into()))?
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| Error::Transport("non-numeric embedding value".into())))
            .collect::<Result<Vec<f64>>>()?;
        match out.get_mut(index) {
            Some(slot) => *slot = Some(values),
            None => return Err(Error::Transport(format!("embedding index {index} out of range"))),
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Transport(format!("no embedding returned for input {i}"))))
        .collect()
}

impl EmbeddingProvider for RemoteEmbedder {
    fn profile(&self) -> &ProviderProfile {
        &self.profile
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size.max(1)) {
            let body = json!({ "model": self.profile.model, "input": chunk });
            let resp = post_with_retry(self.transport.as_ref(), &self.url, self.api_key.as_deref(), &body, &self.retry)
                .map_err(|(attempts, e)| exhibit_core::Error::Provider {
                    attempts,
                    message: e.message,
                })?;
            out.extend(parse_embeddings(&resp, chunk.len())?);
        }
        Ok(out)
    }
}

/// The embedding entry point: checks the profile dimension, and routes every
/// vector through the cache when one is attached. A remote provider requires
/// a cache.
pub struct Embedder {
    provider: Arc<dyn EmbeddingProvider>,
    cache: Option<Mutex<EmbeddingCache>>,
}

impl Embedder {
    pub fn new(provider: Arc<dyn EmbeddingProvider>, cache: Option<EmbeddingCache>) -> Result<Self> {
        if provider.profile().kind == ProviderKind::Remote && cache.is_none() {
            return Err(Error::Config("a remote embedding provider needs a cache file".into()));
        }
        Ok(Embedder {
            provider,
            cache: cache.map(Mutex::new),
        })
    }

    pub fn local(dim: usize, seed: u64) -> Self {
        Embedder {
            provider: Arc::new(LocalEmbedder::new(dim, seed)),
            cache: None,
        }
    }

    pub fn profile(&self) -> &ProviderProfile {
        self.provider.profile()
    }

    pub fn is_remote(&self) -> bool {
        self.profile().kind == ProviderKind::Remote
    }

    fn check(&self, v: Vec<f64>) -> Result<EmbeddingVector> {
        let dim = self.profile().dim;
        if v.len() != dim {
            return Err(Error::Config(format!(
                "provider returned {}-dimensional vectors, profile says {dim}",
                v.len()
            )));
        }
        Ok(EmbeddingVector::new(v)?)
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        Ok(self.embed_many(&[text])?.remove(0))
    }

    pub fn embed_many<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<EmbeddingVector>> {
        if let Some(i) = texts.iter().position(|t| t.as_ref().trim().is_empty()) {
            return Err(Error::Core(exhibit_core::Error::Empty(if i == 0 { "text" } else { "one of the texts" })));
        }
        let Some(cache) = &self.cache else {
            let refs: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
            return self.provider.embed_batch(&refs)?.into_iter().map(|v| self.check(v)).collect();
        };
        let profile = self.profile();
        let (pid, model) = (profile.provider_id(), profile.model.as_str());
        let keys: Vec<_> = texts.iter().map(|t| cache_key(pid, model, t.as_ref())).collect();
        let mut cache = cache.lock().map_err(|_| Error::Unavailable("embedding cache lock poisoned".into()))?;
        let mut missing: Vec<usize> = Vec::new();
        for (i, k) in keys.iter().enumerate() {
            if !cache.contains(k) && !missing.iter().any(|&j| keys[j] == *k) {
                missing.push(i);
            }
        }
        if !missing.is_empty() {
            let refs: Vec<&str> = missing.iter().map(|&i| texts[i].as_ref()).collect();
            let fresh = self.provider.embed_batch(&refs)?;
            for (&i, v) in missing.iter().zip(fresh) {
                let v = self.check(v)?;
                let stored: Vec<f32> = v.values().iter().map(|&x| x as f32).collect();
                cache.put(pid, model, keys[i], &stored)?;
            }
            cache.flush()?;
        }
        keys.iter()
            .map(|k| {
                let v = cache.get(k)?.ok_or_else(|| Error::Unavailable("cache lost an entry".into()))?;
                self.check(v.into_iter().map(f64::from).collect())
            })
            .collect()
    }
}
