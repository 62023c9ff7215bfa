//! Batch steps shared by the command line and the tests: corpus loading,
//! dataset construction, training runs, the artwork index and reports.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use exhibit_core::corpus::{
    catalog_stats, corpus_stats, flatten_exhibition_target, prompt_text, split_dataset, tag_frequency_report, Catalog,
    DatasetSplit, ExhibitionRecord, Field, TagVocabulary,
};
use exhibit_core::curation::EvaluationReport;
use exhibit_core::encoder::{concat_metadata_string, TokenVocabulary};
use exhibit_core::neural::{train, Example, Model, ModelInput, ModelSpec, TrainOutcome, TrainingConfig, Variant};
use exhibit_core::vecindex::{FlatStore, IvfConfig, IvfFlatIndex};
use serde_json::{json, Value};

use crate::artifacts::{save_checkpoint, write_history_csv, CheckpointMeta};
use crate::catalog::parse_artwork_catalog;
use crate::config::{RankingConfig, TrainingSection};
use crate::embedding::Embedder;
use crate::exhibitions::parse_exhibitions;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Corpus {
    pub catalog: Catalog,
    pub exhibitions: Vec<ExhibitionRecord>,
    pub skipped_rows: usize,
    pub dropped_exhibitions: usize,
    pub unresolved_ids: usize,
}

impl Corpus {
    pub fn new(catalog: Catalog, exhibitions: Vec<ExhibitionRecord>) -> Self {
        Corpus {
            catalog,
            exhibitions,
            skipped_rows: 0,
            dropped_exhibitions: 0,
            unresolved_ids: 0,
        }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.exhibitions.iter().map(|e| e.prompt_text.clone()).collect()
    }

    pub fn split(&self, training: &TrainingSection) -> Result<DatasetSplit> {
        Ok(split_dataset(self.exhibitions.len(), training.split_ratio, training.split_seed)?)
    }
}

pub fn load_catalog(path: &Path) -> Result<(Catalog, usize)> {
    let file = File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let load = parse_artwork_catalog(BufReader::new(file))?;
    Ok((Catalog::new(load.records)?, load.skipped_rows))
}

pub fn load_corpus(catalog: &Path, exhibitions: &Path) -> Result<Corpus> {
    let (catalog, skipped_rows) = load_catalog(catalog)?;
    let file = File::open(exhibitions).map_err(|e| Error::Config(format!("{}: {e}", exhibitions.display())))?;
    let load = parse_exhibitions(BufReader::new(file), &catalog)?;
    Ok(Corpus {
        catalog,
        exhibitions: load.exhibitions,
        skipped_rows,
        dropped_exhibitions: load.dropped_exhibitions,
        unresolved_ids: load.unresolved_ids,
    })
}

/// Plain-text statistics: exhibition side, catalog completeness and the
/// most frequent values per field.
pub fn ingest_report(corpus: &Corpus, top: usize) -> String {
    let c = corpus_stats(&corpus.exhibitions);
    let k = catalog_stats(corpus.catalog.records());
    let mut s = String::new();
    let _ = writeln!(s, "exhibitions            {}", c.exhibitions);
    let _ = writeln!(s, "words in prompts       {}", c.word_count);
    let _ = writeln!(s, "artwork slots          {}", c.artwork_slots);
    let _ = writeln!(s, "unique artworks        {}", c.unique_artworks);
    let _ = writeln!(s, "tag occurrences        {}", c.tag_occurrences);
    let _ = writeln!(s, "unique tags            {}", c.unique_tags);
    let _ = writeln!(s, "dropped exhibitions    {}", corpus.dropped_exhibitions);
    let _ = writeln!(s, "unresolved object ids  {}", corpus.unresolved_ids);
    let _ = writeln!(s);
    let _ = writeln!(s, "catalog rows           {}", k.records);
    let _ = writeln!(s, "skipped rows           {}", corpus.skipped_rows);
    for f in Field::ALL {
        let _ = writeln!(s, "  {:<22}{}", f.header(), k.non_empty[f.index()]);
    }
    let _ = writeln!(s, "  {:<22}{}", "Title", k.title_non_empty);
    let _ = writeln!(s, "  {:<22}{}", "Object Name", k.object_name_non_empty);
    let _ = writeln!(s, "  {:<22}{}", "all of the above", k.all_non_empty);
    let freq = tag_frequency_report(&corpus.exhibitions, top);
    for f in Field::ALL {
        let _ = writeln!(s);
        let _ = writeln!(s, "{}", f.header());
        for (value, count) in freq.field(f) {
            let _ = writeln!(s, "  {count:>6}  {value}");
        }
    }
    s
}

pub fn fit_token_vocabulary(corpus: &Corpus, max_tokens: usize) -> Result<TokenVocabulary> {
    Ok(TokenVocabulary::fit(&corpus.prompts(), max_tokens)?)
}

/// Metadata text of one artwork, as embedded into the retrieval index.
pub fn artwork_text(art: &exhibit_core::corpus::ArtworkRecord) -> String {
    concat_metadata_string(std::slice::from_ref(art))
}

/// Inputs and targets for `variant`, one per exhibition in corpus order.
pub fn build_examples(
    variant: Variant,
    exhibitions: &[ExhibitionRecord],
    tags: &TagVocabulary,
    tokens: Option<&TokenVocabulary>,
    embedder: Option<&Embedder>,
) -> Result<Vec<Example>> {
    let need_embedder = || embedder.ok_or_else(|| Error::Unavailable(format!("{variant} needs an embedding provider")));
    let inputs: Vec<ModelInput> = if variant.takes_tokens() {
        let tokens = tokens.ok_or_else(|| Error::Unavailable("m1 needs a token vocabulary".into()))?;
        exhibitions.iter().map(|e| ModelInput::Tokens(tokens.vectorize(&e.prompt_text))).collect()
    } else {
        let prompts: Vec<&str> = exhibitions.iter().map(|e| e.prompt_text.as_str()).collect();
        need_embedder()?.embed_many(&prompts)?.into_iter().map(|v| ModelInput::Dense(v.into_values())).collect()
    };
    let targets: Vec<Vec<f64>> = match variant {
        Variant::EmbedToEmbed => {
            let texts: Vec<String> = exhibitions.iter().map(|e| concat_metadata_string(&e.artworks)).collect();
            need_embedder()?.embed_many(&texts)?.into_iter().map(|v| v.into_values()).collect()
        }
        _ => exhibitions
            .iter()
            .map(|e| flatten_exhibition_target(e, tags).map(|t| t.values))
            .collect::<exhibit_core::Result<_>>()?,
    };
    Ok(inputs.into_iter().zip(targets).map(|(input, target)| Example { input, target }).collect())
}

pub fn model_spec(
    variant: Variant,
    training: &TrainingSection,
    tags: &TagVocabulary,
    tokens: Option<&TokenVocabulary>,
    embedding_dim: usize,
) -> Result<ModelSpec> {
    let spec = match variant {
        Variant::SelfContained => {
            let tokens = tokens.ok_or_else(|| Error::Unavailable("m1 needs a token vocabulary".into()))?;
            ModelSpec::self_contained(tokens.max_tokens(), tags.len()).with_embed_dim(training.token_embed_dim)
        }
        Variant::EmbedToTags => ModelSpec::embed_to_tags(embedding_dim, tags.len()),
        Variant::EmbedToEmbed => ModelSpec::embed_to_embed(embedding_dim, embedding_dim),
    }
    .with_hidden(training.hidden_dim);
    spec.validate()?;
    Ok(spec)
}

pub fn train_variant(spec: ModelSpec, examples: &[Example], split: &DatasetSplit, config: &TrainingConfig) -> Result<TrainOutcome> {
    let model = Model::init(spec, config.seed)?;
    Ok(train(model, examples, split, config)?)
}

/// Writes `{tag}.best.ckpt`, `{tag}.last.ckpt` and `{tag}.history.csv`.
pub fn save_training(
    dir: &Path,
    variant: Variant,
    outcome: &TrainOutcome,
    profile: Option<&crate::embedding::ProviderProfile>,
    seed: u64,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let last_epoch = outcome.history.len().saturating_sub(1);
    let meta = |epoch: usize| CheckpointMeta {
        profile: if variant.takes_tokens() { None } else { profile.cloned() },
        epoch,
        validation_mse: outcome.history.get(epoch).map_or(f64::NAN, |h| h.validation_mse),
        seed,
    };
    save_checkpoint(&dir.join(format!("{variant}.best.ckpt")), &outcome.best, &meta(outcome.best_epoch))?;
    save_checkpoint(&dir.join(format!("{variant}.last.ckpt")), &outcome.last, &meta(last_epoch))?;
    let mut w = BufWriter::new(File::create(dir.join(format!("{variant}.history.csv")))?);
    write_history_csv(&outcome.history, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Embeds every artwork's metadata and clusters the vectors. Artworks with
/// no metadata at all are left out.
pub fn build_artwork_index(catalog: &Catalog, embedder: &Embedder, ranking: &RankingConfig, seed: u64) -> Result<IvfFlatIndex> {
    let rows: Vec<(u64, String)> = catalog
        .records()
        .iter()
        .map(|a| (a.object_id, artwork_text(a)))
        .filter(|(_, t)| !t.trim().is_empty())
        .collect();
    if rows.is_empty() {
        return Err(Error::Core(exhibit_core::Error::Empty("artwork metadata")));
    }
    let mut store = FlatStore::new(embedder.profile().dim);
    for chunk in rows.chunks(1024) {
        let texts: Vec<&str> = chunk.iter().map(|(_, t)| t.as_str()).collect();
        for ((id, _), v) in chunk.iter().zip(embedder.embed_many(&texts)?) {
            store.push(*id, v.values())?;
        }
    }
    let mut cfg = IvfConfig::for_size(store.len(), seed);
    if ranking.nlist > 0 {
        cfg.nlist = ranking.nlist.min(store.len());
    }
    cfg.kmeans_iters = ranking.kmeans_iters;
    Ok(IvfFlatIndex::build(&store, &cfg)?)
}

pub fn report_json(report: &EvaluationReport, curator: &str) -> Value {
    let subgroups: serde_json::Map<String, Value> = Field::ALL
        .into_iter()
        .map(|f| (f.header().to_string(), json!(report.subgroup_means.get(f))))
        .collect();
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let tags: serde_json::Map<String, Value> =
                Field::ALL.into_iter().map(|f| (f.header().to_string(), json!(r.tags.get(f)))).collect();
            json!({
                "title": r.title,
                "k": r.k,
                "artwork_intersection": r.artworks,
                "tag_intersection": tags,
                "predicted": r.predicted,
            })
        })
        .collect();
    json!({
        "variant": curator,
        "validation_exhibitions": report.rows.len(),
        "catalog_size": report.catalog_size,
        "mean_k": report.mean_k,
        "random_baseline": report.random_baseline,
        "artwork_intersection": report.artwork_mean,
        "tag_intersection": subgroups,
        "exhibitions": rows,
    })
}

/// One row per validation exhibition: title, k, artwork intersection and
/// the six tag intersections (empty where the field is absent).
pub fn write_report_csv<W: Write>(report: &EvaluationReport, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["title".to_string(), "k".into(), "artworks".into()];
    header.extend(Field::ALL.iter().map(|f| f.header().to_string()));
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![r.title.clone(), r.k.to_string(), r.artworks.to_string()];
        rec.extend(Field::ALL.iter().map(|&f| r.tags.get(f).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// The prompt of an ad-hoc query.
pub fn query_prompt(title: &str, description: &str) -> String {
    prompt_text(title, description)
}

#[cfg(test)]
mod tests {
    use super::*;
    use exhibit_core::sample;

    fn corpus() -> Corpus {
        let ex = sample::spanish_renaissance_exhibition();
        Corpus::new(Catalog::new(ex.artworks.clone()).unwrap(), vec![ex.clone(), ex])
    }

    #[test]
    fn examples_match_variant_shapes() {
        let c = corpus();
        let tags = TagVocabulary::build(&c.exhibitions);
        let tokens = fit_token_vocabulary(&c, 100).unwrap();
        let emb = Embedder::local(16, 0);
        let m1 = build_examples(Variant::SelfContained, &c.exhibitions, &tags, Some(&tokens), None).unwrap();
        assert!(matches!(&m1[0].input, ModelInput::Tokens(t) if t.ids().len() == 256));
        assert_eq!(m1[0].target.len(), tags.len());
        let m3 = build_examples(Variant::EmbedToEmbed, &c.exhibitions, &tags, None, Some(&emb)).unwrap();
        assert_eq!(m3[1].target.len(), 16);
        assert!(build_examples(Variant::EmbedToTags, &c.exhibitions, &tags, None, None).is_err());
    }

    #[test]
    fn report_mentions_every_field() {
        let text = ingest_report(&corpus(), 3);
        for f in Field::ALL {
            assert!(text.contains(f.header()));
        }
        assert!(text.contains("exhibitions            2"));
    }
}
