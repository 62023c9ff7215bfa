use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use exhibit::artifacts::{save_index, write_tag_vocabulary, write_token_vocabulary};
use exhibit::catalog::write_catalog_csv;
use exhibit::chat::{export_finetune_jsonl, FineTuneJob};
use exhibit::config::EngineConfig;
use exhibit::engine::{embedder_from_config, Curator, Engine, INDEX_FILE, TAG_VOCABULARY_FILE, TOKEN_VOCABULARY_FILE};
use exhibit::exhibitions::write_exhibitions;
use exhibit::pipeline::{
    build_artwork_index, build_examples, fit_token_vocabulary, ingest_report, load_corpus, model_spec, report_json,
    save_training, train_variant, write_report_csv, Corpus,
};
use exhibit::synth::{generate, SynthConfig};
use exhibit::transport::{HttpTransport, Transport};
use exhibit::{Error, Result};
use exhibit_core::corpus::TagVocabulary;
use exhibit_core::curation::{evaluate_model, KPolicy};
use exhibit_core::neural::Variant;

#[derive(Parser)]
#[command(name = "exhibit", version, about = "Curate museum exhibitions from a title and description")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, short, global = true, env = "EXHIBIT_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the catalog and exhibitions and print corpus statistics.
    Ingest {
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Build the tag and token vocabularies from the exhibitions.
    BuildVocab,
    /// Train one model variant and write its checkpoints and loss history.
    Train {
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score a variant on the validation exhibitions.
    Evaluate {
        #[arg(long, value_parser = parse_curator)]
        variant: Curator,
        /// Fixed number of predicted artworks instead of each exhibition's size.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Rank catalog artworks for a new exhibition.
    Curate {
        #[arg(long, value_parser = parse_curator)]
        variant: Curator,
        #[arg(long, default_value = "")]
        title: String,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long)]
        k: Option<usize>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Embed every artwork and build the retrieval index.
    BuildIndex,
    /// Write the chat fine-tuning file for the train split.
    ExportFinetune {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Start a fine-tuning job for this already uploaded file id.
        #[arg(long)]
        create_job: Option<String>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
    /// Write a synthetic catalog and exhibition corpus.
    Synth {
        #[arg(long, default_value = "synthetic")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        artworks: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    Variant::from_tag(&s.to_ascii_lowercase()).ok_or_else(|| format!("unknown model variant {s:?} (m1, m2, m3)"))
}

fn parse_curator(s: &str) -> std::result::Result<Curator, String> {
    Curator::parse(s).ok_or_else(|| format!("unknown variant {s:?} (m1, m2, m3, m4)"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn corpus(config: &EngineConfig) -> Result<Corpus> {
    load_corpus(&config.paths.catalog, &config.paths.exhibitions)
}

fn transport(config: &EngineConfig) -> Arc<dyn Transport> {
    Arc::new(HttpTransport::new(config.request_timeout()))
}

fn tag_vocabulary(config: &EngineConfig) -> Result<TagVocabulary> {
    let path = config.artifact(TAG_VOCABULARY_FILE);
    let f = File::open(&path).map_err(|e| Error::Config(format!("{}: {e} (run build-vocab first)", path.display())))?;
    exhibit::artifacts::read_tag_vocabulary(std::io::BufReader::new(f))
}

fn run(cli: Cli) -> Result<()> {
    let mut config = EngineConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { top } => {
            print!("{}", ingest_report(&corpus(&config)?, top));
        }
        Command::BuildVocab => {
            let c = corpus(&config)?;
            let tags = TagVocabulary::build(&c.exhibitions);
            let tokens = fit_token_vocabulary(&c, config.training.max_tokens)?;
            let mut w = create(&config.artifact(TAG_VOCABULARY_FILE))?;
            write_tag_vocabulary(&tags, &mut w)?;
            w.flush()?;
            let mut w = create(&config.artifact(TOKEN_VOCABULARY_FILE))?;
            write_token_vocabulary(&tokens, &mut w)?;
            w.flush()?;
            println!("{} tags, {} tokens", tags.len(), tokens.len());
        }
        Command::Train { variant, epochs, seed } => {
            if let Some(e) = epochs {
                config.training.epochs = e;
            }
            if let Some(s) = seed {
                config.training.seed = s;
            }
            config.validate()?;
            let c = corpus(&config)?;
            let tags = tag_vocabulary(&config)?;
            let tokens = match variant {
                Variant::SelfContained => {
                    let path = config.artifact(TOKEN_VOCABULARY_FILE);
                    let f = File::open(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    Some(exhibit::artifacts::read_token_vocabulary(std::io::BufReader::new(f))?)
                }
                _ => None,
            };
            let embedder = match variant {
                Variant::SelfContained => None,
                _ => Some(embedder_from_config(&config, transport(&config))?),
            };
            let examples = build_examples(variant, &c.exhibitions, &tags, tokens.as_ref(), embedder.as_ref())?;
            let dim = embedder.as_ref().map_or(0, |e| e.profile().dim);
            let spec = model_spec(variant, &config.training, &tags, tokens.as_ref(), dim)?;
            let split = c.split(&config.training)?;
            let started = Instant::now();
            let outcome = train_variant(spec, &examples, &split, &config.training.training_config())?;
            save_training(&config.paths.artifacts, variant, &outcome, embedder.as_ref().map(|e| e.profile()), config.training.seed)?;
            let first = outcome.history.first().map_or(f64::NAN, |h| h.train_mse);
            let last = outcome.history.last().map_or(f64::NAN, |h| h.train_mse);
            println!(
                "{variant}: {} epochs in {:.1?}, train mse {first:.6} -> {last:.6}, best validation mse {:.6} at epoch {}",
                outcome.history.len(),
                started.elapsed(),
                outcome.history[outcome.best_epoch].validation_mse,
                outcome.best_epoch + 1
            );
        }
        Command::Evaluate { variant, k } => {
            let Corpus { catalog, exhibitions, .. } = corpus(&config)?;
            let split = exhibit_core::corpus::split_dataset(exhibitions.len(), config.training.split_ratio, config.training.split_seed)?;
            let engine = Engine::with_artifacts(catalog, &config, transport(&config))?;
            engine.readiness(variant).map_err(Error::Unavailable)?;
            let policy = k.map_or(KPolicy::ExhibitionSize, KPolicy::Fixed);
            let report = evaluate_model(
                |ex, k| {
                    let k = if variant == Curator::Chat && policy == KPolicy::ExhibitionSize { usize::MAX } else { k };
                    engine
                        .curate_prompt(variant, &ex.prompt_text, k)
                        .map(|r| r.into_iter().map(|s| s.object_id).collect())
                        .map_err(|e| match e {
                            Error::Core(c) => c,
                            other => exhibit_core::Error::Provider {
                                attempts: 1,
                                message: other.to_string(),
                            },
                        })
                },
                &exhibitions,
                engine.catalog(),
                &split,
                policy,
            )?;
            let json_path = config.artifact(&format!("{variant}.report.json"));
            let mut w = create(&json_path)?;
            serde_json::to_writer_pretty(&mut w, &report_json(&report, variant.tag()))?;
            w.flush()?;
            write_report_csv(&report, create(&config.artifact(&format!("{variant}.report.csv")))?)?;
            println!("validation exhibitions  {}", report.rows.len());
            println!("artwork intersection    {:.4}", report.artwork_mean);
            println!("random baseline         {:.6}", report.random_baseline);
            for f in exhibit_core::corpus::Field::ALL {
                match report.subgroup_means.get(f) {
                    Some(v) => println!("{:<24}{v:.4}", f.header()),
                    None => println!("{:<24}-", f.header()),
                }
            }
            println!("report written to {}", json_path.display());
        }
        Command::Curate {
            variant,
            title,
            description,
            k,
            json,
        } => {
            let engine = Engine::from_config(&config, transport(&config))?;
            let started = Instant::now();
            let ranked = engine.curate(variant, &title, &description, k)?;
            let elapsed = started.elapsed();
            if json {
                let rows: Vec<_> = ranked
                    .iter()
                    .filter_map(|s| {
                        let mut v = exhibit::service::artwork_json(engine.catalog().get(s.object_id)?);
                        v["score"] = serde_json::json!(s.score);
                        Some(v)
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                println!("{:>4}  {:>10}  {:>10}  {:<28}  {:<24}  title", "rank", "object id", "score", "department", "classification");
                for (i, s) in ranked.iter().enumerate() {
                    let Some(a) = engine.catalog().get(s.object_id) else { continue };
                    println!(
                        "{:>4}  {:>10}  {:>10.5}  {:<28}  {:<24}  {}",
                        i + 1,
                        a.object_id,
                        s.score,
                        a.department.as_deref().unwrap_or("-"),
                        a.classification.join("|"),
                        a.title.as_deref().unwrap_or("")
                    );
                }
                eprintln!("{} artworks in {:.1?}", ranked.len(), elapsed);
            }
        }
        Command::BuildIndex => {
            let (catalog, _) = exhibit::pipeline::load_catalog(&config.paths.catalog)?;
            let embedder = embedder_from_config(&config, transport(&config))?;
            let started = Instant::now();
            let index = build_artwork_index(&catalog, &embedder, &config.ranking, config.training.seed)?;
            std::fs::create_dir_all(&config.paths.artifacts)?;
            save_index(&config.artifact(INDEX_FILE), &index, embedder.profile())?;
            println!("{} vectors in {} lists, built in {:.1?}", index.len(), index.nlist(), started.elapsed());
        }
        Command::ExportFinetune { out, create_job } => {
            let c = corpus(&config)?;
            let split = c.split(&config.training)?;
            let path = out.unwrap_or_else(|| config.artifact("finetune.train.jsonl"));
            let summary = export_finetune_jsonl(&c.exhibitions, &split, create(&path)?)?;
            println!("{} examples written to {} ({} skipped)", summary.written, path.display(), summary.skipped);
            if let Some(file_id) = create_job {
                let job = FineTuneJob {
                    base_model: config.chat.finetune_base_model.clone(),
                    training_file: file_id,
                    validation_file: None,
                    batch_size: config.chat.finetune_batch_size,
                    learning_rate_multiplier: config.chat.finetune_lr_multiplier,
                    suffix: None,
                };
                let key = config.api_key();
                let created = job.create(transport(&config).as_ref(), config.chat_base_url(), key.as_deref(), &config.embedding_retry())?;
                println!("{}", serde_json::to_string_pretty(&created)?);
            }
        }
        Command::Serve { bind } => {
            if let Some(b) = bind {
                config.service.bind = b;
            }
            let engine = Arc::new(Engine::from_config(&config, transport(&config))?);
            for s in engine.status() {
                eprintln!("{}: {}", s.variant, s.reason.as_deref().unwrap_or("ready"));
            }
            eprintln!("listening on {}", config.service.bind);
            tokio::runtime::Runtime::new()?.block_on(exhibit::service::serve(engine, &config.service.bind))?;
        }
        Command::Synth { out_dir, artworks, seed } => {
            let synth = generate(&SynthConfig {
                artworks,
                seed,
                ..SynthConfig::default()
            });
            let mut w = create(&out_dir.join("catalog.csv"))?;
            write_catalog_csv(&synth.catalog, &mut w)?;
            w.flush()?;
            let mut w = create(&out_dir.join("exhibitions.json"))?;
            write_exhibitions(&synth.exhibitions, &mut w)?;
            w.flush()?;
            println!(
                "{} artworks and {} exhibitions written to {}",
                synth.catalog.len(),
                synth.exhibitions.len(),
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
