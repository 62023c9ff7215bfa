#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use exhibit::artifacts::CheckpointMeta;
use exhibit::config::TrainingSection;
use exhibit::embedding::Embedder;
use exhibit::engine::Engine;
use exhibit::pipeline::{build_examples, model_spec, train_variant, Corpus};
use exhibit::synth::{generate, SynthConfig};
use exhibit_core::corpus::{split_dataset, ArtworkRecord, Catalog, DatasetSplit, TagVocabulary};
use exhibit_core::encoder::TokenVocabulary;
use exhibit_core::neural::{Model, TrainOutcome, TrainingConfig, Variant};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const EMBED_DIM: usize = 256;

pub struct Fixture {
    pub corpus: Corpus,
    pub tags: TagVocabulary,
    pub tokens: TokenVocabulary,
    pub split: DatasetSplit,
}

impl Fixture {
    pub fn synthetic(config: &SynthConfig, extra: Vec<ArtworkRecord>) -> Self {
        let s = generate(config);
        let mut records = s.catalog;
        records.extend(extra);
        let corpus = Corpus::new(Catalog::new(records).unwrap(), s.exhibitions);
        let tags = TagVocabulary::build(&corpus.exhibitions);
        let tokens = TokenVocabulary::fit(&corpus.prompts(), exhibit_core::encoder::MAX_TOKENS).unwrap();
        let split = split_dataset(corpus.exhibitions.len(), 0.8, 0).unwrap();
        Fixture {
            corpus,
            tags,
            tokens,
            split,
        }
    }

    pub fn small() -> Self {
        let config = SynthConfig {
            artworks: 1200,
            ..SynthConfig::default()
        };
        Fixture::synthetic(&config, exhibit_core::sample::spanish_renaissance_artworks())
    }

    pub fn train(&self, variant: Variant, epochs: usize, embedder: &Embedder) -> (TrainOutcome, CheckpointMeta) {
        let section = TrainingSection::default();
        let examples =
            build_examples(variant, &self.corpus.exhibitions, &self.tags, Some(&self.tokens), Some(embedder)).unwrap();
        let spec = model_spec(variant, &section, &self.tags, Some(&self.tokens), embedder.profile().dim).unwrap();
        let config = TrainingConfig {
            epochs,
            ..TrainingConfig::default()
        };
        let outcome = train_variant(spec, &examples, &self.split, &config).unwrap();
        let meta = CheckpointMeta {
            profile: (!variant.takes_tokens()).then(|| embedder.profile().clone()),
            epoch: outcome.best_epoch,
            validation_mse: outcome.history[outcome.best_epoch].validation_mse,
            seed: config.seed,
        };
        (outcome, meta)
    }

    pub fn engine(&self, embedder: Arc<Embedder>, models: Vec<(Model, CheckpointMeta)>) -> Engine {
        let mut engine = Engine::new(self.corpus.catalog.clone(), self.tags.clone())
            .with_tokens(self.tokens.clone())
            .with_embedder(embedder);
        for (m, meta) in models {
            engine = engine.with_model(m, meta).unwrap();
        }
        engine
    }
}

pub fn local_embedder() -> Arc<Embedder> {
    Arc::new(Embedder::local(EMBED_DIM, 0))
}

pub async fn send(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}
