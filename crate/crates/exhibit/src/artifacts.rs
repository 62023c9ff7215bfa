//! On-disk artifacts: model checkpoints, training history, vocabularies and
//! the IVF index. Binary layouts are little-endian and start with a magic
//! string and a version byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use exhibit_core::corpus::{FieldSet, TagVocabulary};
use exhibit_core::encoder::TokenVocabulary;
use exhibit_core::neural::{EpochLoss, Model, ModelSpec, Variant};
use exhibit_core::vecindex::{InvertedList, IvfFlatIndex};
use serde::{Deserialize, Serialize};

use crate::embedding::ProviderProfile;
use crate::{Error, Result};

const CHECKPOINT_MAGIC: &[u8; 6] = b"EXCKPT";
const INDEX_MAGIC: &[u8; 6] = b"EXIVFF";
const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CheckpointMeta {
    /// Embedding space of the input (and, for the embedding-output model, of
    /// the output).
    pub profile: Option<ProviderProfile>,
    /// Zero-based epoch the parameters come from.
    pub epoch: usize,
    pub validation_mse: f64,
    pub seed: u64,
}

fn put_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0; 8];
    r.read_exact(&mut b).map_err(|_| Error::format("unexpected end of file"))?;
    Ok(u64::from_le_bytes(b))
}

fn get_usize(r: &mut impl Read, what: &str) -> Result<usize> {
    let v = get_u64(r)?;
    usize::try_from(v).map_err(|_| Error::format(format!("{what} {v} too large")))
}

fn get_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n.checked_mul(8).ok_or_else(|| Error::format("length overflow"))?];
    r.read_exact(&mut buf).map_err(|_| Error::format("unexpected end of file"))?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn header(r: &mut impl Read, magic: &[u8; 6], what: &str) -> Result<u8> {
    let mut h = [0u8; 8];
    r.read_exact(&mut h).map_err(|_| Error::format(format!("{what} header truncated")))?;
    if &h[..6] != magic {
        return Err(Error::format(format!("not a {what} file")));
    }
    if h[6] != VERSION {
        return Err(Error::format(format!("unsupported {what} version {}", h[6])));
    }
    Ok(h[7])
}

fn put_blob(w: &mut impl Write, json: &[u8]) -> std::io::Result<()> {
    put_u64(w, json.len() as u64)?;
    w.write_all(json)
}

fn get_blob(r: &mut impl Read) -> Result<Vec<u8>> {
    let n = get_usize(r, "metadata length")?;
    if n > 1 << 24 {
        return Err(Error::format("metadata block too large"));
    }
    let mut b = vec![0; n];
    r.read_exact(&mut b).map_err(|_| Error::format("unexpected end of file"))?;
    Ok(b)
}

/// `magic version variant | input embed hidden output : u64 | meta json |
/// count : u64 | params : f64`
pub fn write_checkpoint<W: Write>(model: &Model, meta: &CheckpointMeta, sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    let spec = model.spec();
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&[VERSION, spec.variant.code()])?;
    for d in [spec.input_dim, spec.embed_dim, spec.hidden_dim, spec.output_dim] {
        put_u64(&mut w, d as u64)?;
    }
    put_blob(&mut w, &serde_json::to_vec(meta)?)?;
    put_u64(&mut w, model.params().len() as u64)?;
    for p in model.params() {
        w.write_all(&p.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(source: R) -> Result<(Model, CheckpointMeta)> {
    let mut r = BufReader::new(source);
    let code = header(&mut r, CHECKPOINT_MAGIC, "checkpoint")?;
    let variant = Variant::from_code(code).ok_or_else(|| Error::format(format!("unknown model variant code {code}")))?;
    let spec = ModelSpec {
        variant,
        input_dim: get_usize(&mut r, "dimension")?,
        embed_dim: get_usize(&mut r, "dimension")?,
        hidden_dim: get_usize(&mut r, "dimension")?,
        output_dim: get_usize(&mut r, "dimension")?,
    };
    spec.validate()?;
    let meta: CheckpointMeta = serde_json::from_slice(&get_blob(&mut r)?)?;
    let count = get_usize(&mut r, "parameter count")?;
    if count != spec.param_count() {
        return Err(Error::format(format!(
            "checkpoint holds {count} parameters, its layer sizes need {}",
            spec.param_count()
        )));
    }
    let params = get_f64s(&mut r, count)?;
    Ok((Model::from_params(spec, params)?, meta))
}

pub fn save_checkpoint(path: &Path, model: &Model, meta: &CheckpointMeta) -> Result<()> {
    write_checkpoint(model, meta, File::create(path)?)
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, CheckpointMeta)> {
    read_checkpoint(File::open(path)?)
}

pub fn write_history_csv<W: Write>(history: &[EpochLoss], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["epoch", "train_mse", "validation_mse"])?;
    for (i, h) in history.iter().enumerate() {
        w.write_record([(i + 1).to_string(), h.train_mse.to_string(), h.validation_mse.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct TagVocabFile {
    entries: Vec<String>,
    /// Bit `i` set when the string was seen in the `i`-th field.
    sources: Vec<u8>,
}

pub fn write_tag_vocabulary<W: Write>(vocab: &TagVocabulary, sink: W) -> Result<()> {
    let file = TagVocabFile {
        entries: vocab.entries().to_vec(),
        sources: vocab.sources().iter().map(|s| s.bits()).collect(),
    };
    serde_json::to_writer(BufWriter::new(sink), &file)?;
    Ok(())
}

pub fn read_tag_vocabulary<R: Read>(source: R) -> Result<TagVocabulary> {
    let file: TagVocabFile = serde_json::from_reader(BufReader::new(source))?;
    Ok(TagVocabulary::from_parts(
        file.entries,
        file.sources.into_iter().map(FieldSet::from_bits).collect(),
    )?)
}

#[derive(Serialize, Deserialize)]
struct TokenVocabFile {
    max_tokens: usize,
    /// Words for ids 2, 3, ...
    words: Vec<String>,
}

pub fn write_token_vocabulary<W: Write>(vocab: &TokenVocabulary, sink: W) -> Result<()> {
    let file = TokenVocabFile {
        max_tokens: vocab.max_tokens(),
        words: vocab.words().to_vec(),
    };
    serde_json::to_writer(BufWriter::new(sink), &file)?;
    Ok(())
}

pub fn read_token_vocabulary<R: Read>(source: R) -> Result<TokenVocabulary> {
    let file: TokenVocabFile = serde_json::from_reader(BufReader::new(source))?;
    Ok(TokenVocabulary::from_tokens(file.words, file.max_tokens)?)
}

/// `magic version 0 | dim nlist n : u64 | meta json | centroids : f64 |
/// per list: len : u64, rows : u64, ids : u64, vectors : f32`
pub fn write_index<W: Write>(index: &IvfFlatIndex, profile: &ProviderProfile, sink: W) -> Result<()> {
    if !index.is_trained() {
        return Err(exhibit_core::Error::Untrained.into());
    }
    let mut w = BufWriter::new(sink);
    w.write_all(INDEX_MAGIC)?;
    w.write_all(&[VERSION, 0])?;
    for v in [index.dim(), index.nlist(), index.len()] {
        put_u64(&mut w, v as u64)?;
    }
    put_blob(&mut w, &serde_json::to_vec(profile)?)?;
    for c in index.centroids() {
        w.write_all(&c.to_le_bytes())?;
    }
    for list in index.lists() {
        put_u64(&mut w, list.len() as u64)?;
        for &r in &list.rows {
            put_u64(&mut w, r as u64)?;
        }
        for &id in &list.ids {
            put_u64(&mut w, id)?;
        }
        for v in &list.vectors {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_index<R: Read>(source: R) -> Result<(IvfFlatIndex, ProviderProfile)> {
    let mut r = BufReader::new(source);
    header(&mut r, INDEX_MAGIC, "index")?;
    let dim = get_usize(&mut r, "dimension")?;
    let nlist = get_usize(&mut r, "nlist")?;
    let n = get_usize(&mut r, "size")?;
    let profile: ProviderProfile = serde_json::from_slice(&get_blob(&mut r)?)?;
    let centroids = get_f64s(&mut r, nlist.checked_mul(dim).ok_or_else(|| Error::format("size overflow"))?)?;
    let mut lists = Vec::with_capacity(nlist);
    let mut total = 0usize;
    for _ in 0..nlist {
        let len = get_usize(&mut r, "list length")?;
        total = total.saturating_add(len);
        if total > n {
            return Err(Error::format("inverted lists exceed the stored size"));
        }
        let mut list = InvertedList::default();
        for _ in 0..len {
            list.rows.push(get_usize(&mut r, "row")?);
        }
        for _ in 0..len {
            list.ids.push(get_u64(&mut r)?);
        }
        let mut buf = vec![0u8; len * dim * 4];
        r.read_exact(&mut buf).map_err(|_| Error::format("unexpected end of file"))?;
        list.vectors = buf.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        lists.push(list);
    }
    if total != n {
        return Err(Error::format(format!("inverted lists hold {total} vectors, header says {n}")));
    }
    Ok((IvfFlatIndex::from_parts(dim, centroids, lists)?, profile))
}

pub fn save_index(path: &Path, index: &IvfFlatIndex, profile: &ProviderProfile) -> Result<()> {
    write_index(index, profile, File::create(path)?)
}

pub fn load_index(path: &Path) -> Result<(IvfFlatIndex, ProviderProfile)> {
    read_index(File::open(path)?)
}
