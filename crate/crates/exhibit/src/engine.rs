//! The loaded curation engine: catalog, vocabularies, trained models,
//! retrieval index and the optional fine-tuned chat model, queried by prompt.

use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};

use exhibit_core::corpus::{Catalog, TagProbabilityVector, TagVocabulary};
use exhibit_core::curation::TagPostings;
use exhibit_core::encoder::TokenVocabulary;
use exhibit_core::finetune::{map_prediction_to_artworks, query_finetuned, ChatClient};
use exhibit_core::neural::{Model, ModelInput, Variant};
use exhibit_core::vecindex::IvfFlatIndex;
use serde::Serialize;

use crate::artifacts::{load_checkpoint, load_index, read_tag_vocabulary, read_token_vocabulary, CheckpointMeta};
use crate::cache::EmbeddingCache;
use crate::chat::HttpChatClient;
use crate::config::EngineConfig;
use crate::embedding::{Embedder, ProviderKind, ProviderProfile, RemoteEmbedder};
use crate::pipeline::load_catalog;
use crate::transport::Transport;
use crate::{Error, Result};

pub const TAG_VOCABULARY_FILE: &str = "tags.json";
pub const TOKEN_VOCABULARY_FILE: &str = "tokens.json";
pub const INDEX_FILE: &str = "artworks.ivf";

pub fn checkpoint_file(variant: Variant) -> String {
    format!("{variant}.best.ckpt")
}

/// A way of turning a prompt into artworks: one of the three trained
/// networks, or the fine-tuned chat model (`m4`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Curator {
    Model(Variant),
    Chat,
}

impl Curator {
    pub const ALL: [Curator; 4] = [
        Curator::Model(Variant::SelfContained),
        Curator::Model(Variant::EmbedToTags),
        Curator::Model(Variant::EmbedToEmbed),
        Curator::Chat,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Curator::Model(v) => v.tag(),
            Curator::Chat => "m4",
        }
    }

    pub fn parse(tag: &str) -> Option<Curator> {
        Curator::ALL.into_iter().find(|c| c.tag().eq_ignore_ascii_case(tag.trim()))
    }
}

impl fmt::Display for Curator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scored {
    pub object_id: u64,
    /// Hit score, or squared distance for the embedding-output model.
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CuratorStatus {
    pub variant: &'static str,
    pub available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<CheckpointMeta>,
    pub parameters: Option<usize>,
}

struct Loaded {
    model: Model,
    meta: CheckpointMeta,
}

struct ChatModel {
    client: Mutex<Box<dyn ChatClient + Send>>,
    max_attempts: usize,
}

pub struct Engine {
    catalog: Catalog,
    tags: TagVocabulary,
    postings: TagPostings,
    tokens: Option<TokenVocabulary>,
    embedder: Option<Arc<Embedder>>,
    models: [Option<Loaded>; 3],
    index: Option<(IvfFlatIndex, ProviderProfile)>,
    chat: Option<ChatModel>,
    pub default_k: usize,
    pub nprobe: usize,
}

fn slot(v: Variant) -> usize {
    v.code() as usize - 1
}

impl Engine {
    pub fn new(catalog: Catalog, tags: TagVocabulary) -> Self {
        let postings = TagPostings::build(&tags, catalog.records());
        Engine {
            catalog,
            tags,
            postings,
            tokens: None,
            embedder: None,
            models: [None, None, None],
            index: None,
            chat: None,
            default_k: exhibit_core::curation::DEFAULT_K,
            nprobe: exhibit_core::curation::DEFAULT_NPROBE,
        }
    }

    pub fn with_tokens(mut self, tokens: TokenVocabulary) -> Self {
        self.tokens = Some(tokens);
        self
    }

    pub fn with_embedder(mut self, embedder: Arc<Embedder>) -> Self {
        self.embedder = Some(embedder);
        self
    }

    pub fn with_model(mut self, model: Model, meta: CheckpointMeta) -> Result<Self> {
        let spec = *model.spec();
        let out = spec.output_dim;
        match spec.variant {
            Variant::SelfContained | Variant::EmbedToTags if out != self.tags.len() => {
                return Err(Error::Config(format!(
                    "{} checkpoint predicts {out} tags, vocabulary has {}",
                    spec.variant,
                    self.tags.len()
                )))
            }
            _ => {}
        }
        self.models[slot(spec.variant)] = Some(Loaded { model, meta });
        Ok(self)
    }

    pub fn with_index(mut self, index: IvfFlatIndex, profile: ProviderProfile) -> Self {
        self.index = Some((index, profile));
        self
    }

    pub fn with_chat(mut self, client: Box<dyn ChatClient + Send>, max_attempts: usize) -> Self {
        self.chat = Some(ChatModel {
            client: Mutex::new(client),
            max_attempts: max_attempts.max(1),
        });
        self
    }

    /// Loads whatever artifacts exist under the configured directory. Only
    /// the catalog and the tag vocabulary are required.
    pub fn from_config(config: &EngineConfig, transport: Arc<dyn Transport>) -> Result<Self> {
        let (catalog, _) = load_catalog(&config.paths.catalog)?;
        Self::with_artifacts(catalog, config, transport)
    }

    /// As [`Engine::from_config`] for an already loaded catalog.
    pub fn with_artifacts(catalog: Catalog, config: &EngineConfig, transport: Arc<dyn Transport>) -> Result<Self> {
        let tags = read_tag_vocabulary(open(&config.artifact(TAG_VOCABULARY_FILE))?)?;
        let mut engine = Engine::new(catalog, tags);
        engine.default_k = config.ranking.k;
        engine.nprobe = config.ranking.nprobe;
        let tokens_path = config.artifact(TOKEN_VOCABULARY_FILE);
        if tokens_path.exists() {
            engine = engine.with_tokens(read_token_vocabulary(open(&tokens_path)?)?);
        }
        engine = engine.with_embedder(Arc::new(embedder_from_config(config, transport.clone())?));
        for v in Variant::ALL {
            let path = config.artifact(&checkpoint_file(v));
            if path.exists() {
                let (model, meta) = load_checkpoint(&path)?;
                engine = engine.with_model(model, meta)?;
            }
        }
        let index_path = config.artifact(INDEX_FILE);
        if index_path.exists() {
            let (index, profile) = load_index(&index_path)?;
            engine = engine.with_index(index, profile);
        }
        if !config.chat.model.is_empty() {
            let client = HttpChatClient::new(transport, config.chat_base_url(), &config.chat.model, config.api_key());
            engine = engine.with_chat(Box::new(client), config.chat.max_attempts);
        }
        Ok(engine)
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn tag_vocabulary(&self) -> &TagVocabulary {
        &self.tags
    }

    pub fn postings(&self) -> &TagPostings {
        &self.postings
    }

    fn embedder_for(&self, profile: Option<&ProviderProfile>) -> std::result::Result<&Embedder, String> {
        let e = self.embedder.as_deref().ok_or("no embedding provider configured")?;
        match profile {
            Some(p) if p != e.profile() => Err(format!(
                "artifact was built with {} embeddings ({}, dim {}), engine uses {} (dim {})",
                p.provider_id(),
                p.model,
                p.dim,
                e.profile().model,
                e.profile().dim
            )),
            _ => Ok(e),
        }
    }

    /// `Ok` when `curator` can serve requests, otherwise the reason.
    pub fn readiness(&self, curator: Curator) -> std::result::Result<(), String> {
        match curator {
            Curator::Chat => self.chat.as_ref().map(|_| ()).ok_or_else(|| "no fine-tuned chat model configured".into()),
            Curator::Model(v) => {
                let loaded = self.models[slot(v)].as_ref().ok_or_else(|| format!("no {v} checkpoint loaded"))?;
                match v {
                    Variant::SelfContained => self.tokens.as_ref().map(|_| ()).ok_or_else(|| "no token vocabulary loaded".into()),
                    Variant::EmbedToTags => self.embedder_for(loaded.meta.profile.as_ref()).map(|_| ()),
                    Variant::EmbedToEmbed => {
                        let (_, profile) = self.index.as_ref().ok_or("no artwork index loaded")?;
                        self.embedder_for(Some(profile))?;
                        self.embedder_for(loaded.meta.profile.as_ref()).map(|_| ())
                    }
                }
            }
        }
    }

    pub fn status(&self) -> Vec<CuratorStatus> {
        Curator::ALL
            .into_iter()
            .map(|c| {
                let ready = self.readiness(c);
                let loaded = match c {
                    Curator::Model(v) => self.models[slot(v)].as_ref(),
                    Curator::Chat => None,
                };
                CuratorStatus {
                    variant: c.tag(),
                    available: ready.is_ok(),
                    reason: ready.err(),
                    checkpoint: loaded.map(|l| l.meta.clone()),
                    parameters: loaded.map(|l| l.model.params().len()),
                }
            })
            .collect()
    }

    /// Ranked artworks for a free-text prompt. The chat model answers with
    /// as many artworks as it predicts, cut to `k`.
    pub fn curate_prompt(&self, curator: Curator, prompt: &str, k: usize) -> Result<Vec<Scored>> {
        if k == 0 {
            return Err(exhibit_core::Error::InvalidArgument("k must be at least 1".into()).into());
        }
        self.readiness(curator).map_err(Error::Unavailable)?;
        let unavailable = |what: &str| Error::Unavailable(what.into());
        match curator {
            Curator::Chat => {
                let chat = self.chat.as_ref().ok_or_else(|| unavailable("chat model"))?;
                let outcome = {
                    let mut client = chat.client.lock().map_err(|_| unavailable("chat client lock poisoned"))?;
                    query_finetuned(prompt, client.as_mut(), chat.max_attempts)?
                };
                let sel = map_prediction_to_artworks(&outcome.prediction, &self.tags, &self.postings)?;
                Ok(sel
                    .object_ids
                    .into_iter()
                    .zip(sel.scores)
                    .take(k)
                    .map(|(object_id, score)| Scored { object_id, score })
                    .collect())
            }
            Curator::Model(v) => {
                let loaded = self.models[slot(v)].as_ref().ok_or_else(|| unavailable("checkpoint"))?;
                let input = match v {
                    Variant::SelfContained => {
                        ModelInput::Tokens(self.tokens.as_ref().ok_or_else(|| unavailable("token vocabulary"))?.vectorize(prompt))
                    }
                    _ => {
                        let e = self.embedder.as_deref().ok_or_else(|| unavailable("embedding provider"))?;
                        ModelInput::Dense(e.embed(prompt)?.into_values())
                    }
                };
                let out = loaded.model.forward(&input)?;
                if v == Variant::EmbedToEmbed {
                    let (index, _) = self.index.as_ref().ok_or_else(|| unavailable("artwork index"))?;
                    let hits = index.search(&out, k, self.nprobe)?;
                    return Ok(hits
                        .into_iter()
                        .map(|n| Scored {
                            object_id: n.object_id,
                            score: n.distance,
                        })
                        .collect());
                }
                let p = TagProbabilityVector::from_raw_clamped(&out);
                let ranking = self.postings.top_k(&p, k.min(self.catalog.len()).max(1))?;
                Ok(ranking
                    .0
                    .iter()
                    .map(|r| Scored {
                        object_id: r.object_id,
                        score: r.hit,
                    })
                    .collect())
            }
        }
    }

    pub fn curate(&self, curator: Curator, title: &str, description: &str, k: Option<usize>) -> Result<Vec<Scored>> {
        if title.trim().is_empty() && description.trim().is_empty() {
            return Err(exhibit_core::Error::Empty("title and description").into());
        }
        let prompt = crate::pipeline::query_prompt(title, description);
        self.curate_prompt(curator, &prompt, k.unwrap_or(self.default_k))
    }
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(std::io::BufReader::new(f))
}

/// The configured embedding provider; a remote one is backed by the cache
/// file.
pub fn embedder_from_config(config: &EngineConfig, transport: Arc<dyn Transport>) -> Result<Embedder> {
    let e = &config.embedding;
    match e.provider {
        ProviderKind::Local => Ok(Embedder::local(e.dim, e.seed)),
        ProviderKind::Remote => {
            let mut remote = RemoteEmbedder::new(transport, &e.base_url, &e.model, e.dim, config.api_key());
            remote.batch_size = e.batch_size;
            remote.retry = config.embedding_retry();
            let cache_path = config.cache_path();
            if let Some(dir) = cache_path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            Embedder::new(Arc::new(remote), Some(EmbeddingCache::open(cache_path)?))
        }
    }
}
