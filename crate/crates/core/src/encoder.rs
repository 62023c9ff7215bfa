//! Text to numbers: the self-contained integer vectorizer and the local
//! hashing embedder used in place of a remote embedding service.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hasher;

use fnv::FnvHasher;

use crate::corpus::{ArtworkRecord, Field};
use crate::{Error, Result};

/// Fixed length of a [`TokenSequence`].
pub const SEQUENCE_LENGTH: usize = 256;
/// Default vocabulary capacity, reserved ids included.
pub const MAX_TOKENS: usize = 32768;
pub const PADDING_ID: u32 = 0;
pub const OOV_ID: u32 = 1;

/// Lowercases, strips ASCII punctuation and collapses whitespace.
pub fn standardize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered
        .split_whitespace()
        .map(|w| w.chars().filter(|c| !c.is_ascii_punctuation()).collect::<String>())
        .filter(|w| !w.is_empty())
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word);
    }
    out
}

/// Word vocabulary for integer vectorization. Id 0 pads, id 1 stands for any
/// out-of-vocabulary word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenVocabulary {
    tokens: Vec<String>,
    ids: BTreeMap<String, u32>,
    max_tokens: usize,
}

impl TokenVocabulary {
    /// Ranks standardized words by descending frequency (ties
    /// lexicographically) and keeps the first `max_tokens - 2`.
    pub fn fit<S: AsRef<str>>(corpus: &[S], max_tokens: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Empty("vectorizer corpus"));
        }
        if max_tokens < 2 {
            return Err(Error::invalid(format!("max_tokens {max_tokens} leaves no room for reserved ids")));
        }
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for doc in corpus {
            for w in standardize(doc.as_ref()).split(' ').filter(|w| !w.is_empty()) {
                *counts.entry(w.into()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
        // BTreeMap order is lexicographic, stable sort keeps it for ties
        ranked.sort_by(|a, b| b.1.cmp(&a.1));
        ranked.truncate(max_tokens - 2);
        Self::from_tokens(ranked.into_iter().map(|(w, _)| w).collect(), max_tokens)
    }

    /// Rebuilds from the non-reserved tokens in id order (id 2 upward).
    pub fn from_tokens(words: Vec<String>, max_tokens: usize) -> Result<Self> {
        if words.len() + 2 > max_tokens {
            return Err(Error::invalid("more tokens than max_tokens allows"));
        }
        let mut tokens = vec![String::new(), String::from("[UNK]")];
        tokens.extend(words);
        let mut ids = BTreeMap::new();
        for (i, t) in tokens.iter().enumerate().skip(2) {
            if ids.insert(t.clone(), i as u32).is_some() {
                return Err(Error::invalid(format!("duplicate token {t:?}")));
            }
        }
        Ok(TokenVocabulary {
            tokens,
            ids,
            max_tokens,
        })
    }

    /// Number of ids in use, reserved ones included.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    /// Non-reserved tokens in id order.
    pub fn words(&self) -> &[String] {
        &self.tokens[2..]
    }

    pub fn vectorize(&self, text: &str) -> TokenSequence {
        let mut ids = vec![PADDING_ID; SEQUENCE_LENGTH];
        for (slot, w) in ids
            .iter_mut()
            .zip(standardize(text).split(' ').filter(|w| !w.is_empty()))
        {
            *slot = self.id(w).unwrap_or(OOV_ID);
        }
        TokenSequence(ids)
    }
}

/// Exactly [`SEQUENCE_LENGTH`] token ids, right-padded with zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence(Vec<u32>);

impl TokenSequence {
    pub fn from_ids(ids: Vec<u32>) -> Result<Self> {
        if ids.len() != SEQUENCE_LENGTH {
            return Err(Error::DimensionMismatch {
                context: "token sequence",
                expected: SEQUENCE_LENGTH,
                actual: ids.len(),
            });
        }
        Ok(TokenSequence(ids))
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }
}

/// Fixed-dimension text embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding has non-finite entries"));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum())
    }
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|v| v * v).sum());
    let nb = libm::sqrt(b.iter().map(|v| v * v).sum());
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Feature-hashing embedder: unigrams and bigrams of the standardized text,
/// each hashed (FNV-1a keyed by `seed`) to a bucket and a sign, then scaled to
/// unit norm. Text without tokens embeds to the zero vector.
pub fn local_deterministic_embed(text: &str, dim: usize, seed: u64) -> Result<EmbeddingVector> {
    if dim < 8 {
        return Err(Error::invalid(format!("embedding dimension {dim} < 8")));
    }
    let std = standardize(text);
    let words: Vec<&str> = std.split(' ').filter(|w| !w.is_empty()).collect();
    let mut acc = vec![0.0f64; dim];
    let mut add = |kind: &[u8], parts: &[&str]| {
        let mut h = FnvHasher::default();
        h.write(&seed.to_le_bytes());
        h.write(kind);
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                h.write(b" ");
            }
            h.write(p.as_bytes());
        }
        let h = h.finish();
        let bucket = (h % dim as u64) as usize;
        acc[bucket] += if h >> 63 == 0 { 1.0 } else { -1.0 };
    };
    for w in &words {
        add(b"u:", &[w]);
    }
    for pair in words.windows(2) {
        add(b"b:", pair);
    }
    let norm = libm::sqrt(acc.iter().map(|v| v * v).sum());
    if norm > 0.0 {
        acc.iter_mut().for_each(|v| *v /= norm);
    }
    EmbeddingVector::new(acc)
}

/// Metadata of several artworks as one string: per artwork the six fields'
/// values joined by `"; "`, artworks joined by `" | "`.
pub fn concat_metadata_string(artworks: &[ArtworkRecord]) -> String {
    let parts: Vec<String> = artworks
        .iter()
        .map(|a| {
            let vals: Vec<&str> = Field::ALL
                .into_iter()
                .flat_map(|f| a.field_values(f).iter().map(String::as_str))
                .collect();
            vals.join("; ")
        })
        .collect();
    parts.join(" | ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize("Hello, World!"), "hello world");
        assert_eq!(standardize(""), "");
        assert_eq!(
            standardize("The First Impressionists in Paris."),
            "the first impressionists in paris"
        );
        assert_eq!(standardize("  a\t\n b  "), "a b");
        assert_eq!(standardize("-- !"), "");
    }

    #[test]
    fn fit_ranks_by_frequency() {
        let v = TokenVocabulary::fit(&["a b b"], MAX_TOKENS).unwrap();
        assert_eq!(v.id("b"), Some(2));
        assert_eq!(v.id("a"), Some(3));
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn fit_capacity_edge() {
        let v = TokenVocabulary::fit(&["x y z"], 3).unwrap();
        assert_eq!(v.words().len(), 1);
        assert!(TokenVocabulary::fit::<&str>(&[], 10).is_err());
    }

    #[test]
    fn vectorize_pads_truncates_and_maps_oov() {
        let v = TokenVocabulary::fit(&["red blue blue"], MAX_TOKENS).unwrap();
        assert_eq!(v.vectorize("").ids(), &[0u32; SEQUENCE_LENGTH][..]);
        let s = v.vectorize("Red, BLUE green");
        assert_eq!(&s.ids()[..4], &[3, 2, OOV_ID, 0]);
        let long: String = (0..300).map(|_| "blue ").collect();
        let s = v.vectorize(&long);
        assert_eq!(s.ids().len(), SEQUENCE_LENGTH);
        assert!(s.ids().iter().all(|&i| i == 2));
    }

    #[test]
    fn local_embed_is_unit_norm_and_deterministic() {
        let a = local_deterministic_embed("Still life with flowers", 64, 1).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-9);
        assert_eq!(a, local_deterministic_embed("Still life with flowers", 64, 1).unwrap());
        assert_ne!(a, local_deterministic_embed("Still life with flowers", 64, 2).unwrap());
        assert!(local_deterministic_embed("x", 4, 0).is_err());
    }

    #[test]
    fn local_embed_reflects_word_overlap() {
        let base = "impressionist paintings of still life in paris";
        let near = "impressionist paintings of still life in rome";
        let far = "samurai armor and swords from edo japan";
        let e = |t| local_deterministic_embed(t, 256, 9).unwrap();
        let (b, n, f) = (e(base), e(near), e(far));
        assert!(cosine_similarity(b.values(), n.values()) > cosine_similarity(b.values(), f.values()));
        assert!(cosine_similarity(n.values(), f.values()) < cosine_similarity(b.values(), n.values()));
    }

    #[test]
    fn concat_metadata_examples() {
        let a = ArtworkRecord {
            object_id: 1,
            department: Some("A".into()),
            tags: vec!["B".into()],
            ..Default::default()
        };
        assert_eq!(concat_metadata_string(&[a.clone()]), "A; B");
        let b = ArtworkRecord {
            object_id: 2,
            medium: Some("C".into()),
            ..Default::default()
        };
        assert_eq!(concat_metadata_string(&[a, b]), "A; B | C");
        let s = concat_metadata_string(&sample::spanish_renaissance_artworks());
        assert_eq!(s.matches("European Sculpture and Decorative Arts").count(), 10);
    }
}
