//! From model outputs to ranked artworks, and the metrics used to judge them.
//!
//! The hit score of catalog row `j` is `sum_i p_i * [tag i occurs in row j]`,
//! with each vocabulary entry counted once per row however many fields repeat
//! it. Scoring accumulates over per-tag posting lists, touching only rows that
//! share at least one tag with a non-zero probability.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::{ArtworkRecord, Catalog, DatasetSplit, ExhibitionRecord, Field, TagProbabilityVector, TagVocabulary};
use crate::vecindex::IvfFlatIndex;
use crate::{Error, Result};

/// Default number of artworks for out-of-sample prompts.
pub const DEFAULT_K: usize = 16;
/// Default probe budget for the IVF search.
pub const DEFAULT_NPROBE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedArtwork {
    pub object_id: u64,
    pub row: usize,
    pub hit: f64,
}

fn by_hit_then_id(a: &RankedArtwork, b: &RankedArtwork) -> Ordering {
    b.hit.total_cmp(&a.hit).then(a.object_id.cmp(&b.object_id))
}

/// Catalog rows ordered by descending hit, ascending object id on ties.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HitRanking(pub Vec<RankedArtwork>);

impl HitRanking {
    pub fn entries(&self) -> &[RankedArtwork] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// For every vocabulary entry, the ascending catalog rows containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagPostings {
    postings: Vec<Vec<u32>>,
    object_ids: Vec<u64>,
}

impl TagPostings {
    pub fn build(vocab: &TagVocabulary, catalog: &[ArtworkRecord]) -> Self {
        let mut postings = vec![Vec::new(); vocab.len()];
        let mut found = Vec::new();
        for (row, art) in catalog.iter().enumerate() {
            found.clear();
            found.extend(art.generalized_tags().filter_map(|(_, t)| vocab.position(t)));
            found.sort_unstable();
            found.dedup();
            for &i in &found {
                postings[i].push(row as u32);
            }
        }
        TagPostings {
            postings,
            object_ids: catalog.iter().map(|a| a.object_id).collect(),
        }
    }

    pub fn vocab_len(&self) -> usize {
        self.postings.len()
    }

    pub fn rows(&self) -> usize {
        self.object_ids.len()
    }

    pub fn posting(&self, tag: usize) -> &[u32] {
        &self.postings[tag]
    }

    /// Hit score of every row, indexed by row.
    pub fn scores(&self, p: &TagProbabilityVector) -> Result<Vec<f64>> {
        if p.len() != self.postings.len() {
            return Err(Error::DimensionMismatch {
                context: "tag probabilities",
                expected: self.postings.len(),
                actual: p.len(),
            });
        }
        let mut hits = vec![0.0f64; self.object_ids.len()];
        for (posting, &pi) in self.postings.iter().zip(&p.values) {
            // negative outputs count as zero probability
            if pi > 0.0 {
                for &row in posting {
                    hits[row as usize] += pi;
                }
            }
        }
        Ok(hits)
    }

    fn ranked(&self, hits: Vec<f64>) -> Vec<RankedArtwork> {
        hits.into_iter()
            .enumerate()
            .map(|(row, hit)| RankedArtwork {
                object_id: self.object_ids[row],
                row,
                hit,
            })
            .collect()
    }

    /// Full ranking of the catalog.
    pub fn rank(&self, p: &TagProbabilityVector) -> Result<HitRanking> {
        let mut all = self.ranked(self.scores(p)?);
        all.sort_unstable_by(by_hit_then_id);
        Ok(HitRanking(all))
    }

    /// The first `k` entries of [`TagPostings::rank`] without sorting the
    /// whole catalog.
    pub fn top_k(&self, p: &TagProbabilityVector, k: usize) -> Result<HitRanking> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let mut all = self.ranked(self.scores(p)?);
        if all.len() > k {
            all.select_nth_unstable_by(k - 1, by_hit_then_id);
            all.truncate(k);
        }
        all.sort_unstable_by(by_hit_then_id);
        Ok(HitRanking(all))
    }
}

/// Ranks every catalog row by hit score.
pub fn hit_scores(p: &TagProbabilityVector, vocab: &TagVocabulary, catalog: &[ArtworkRecord]) -> Result<HitRanking> {
    if p.len() != vocab.len() {
        return Err(Error::DimensionMismatch {
            context: "tag probabilities",
            expected: vocab.len(),
            actual: p.len(),
        });
    }
    TagPostings::build(vocab, catalog).rank(p)
}

/// First `k` object ids of a ranking (all of them when `k` exceeds it).
pub fn select_topk(ranking: &HitRanking, k: usize) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    Ok(ranking.0.iter().take(k).map(|r| r.object_id).collect())
}

/// Object ids of the `k` artworks whose metadata embeddings are nearest the
/// model's output embedding.
pub fn curate_m3(embedding: &[f64], index: &IvfFlatIndex, k: usize, nprobe: usize) -> Result<Vec<u64>> {
    Ok(index.search(embedding, k, nprobe)?.into_iter().map(|n| n.object_id).collect())
}

/// Per-field share of the actual artworks' distinct values that also occur
/// among the predicted artworks. `None` where the actual side has no value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SubgroupScores(pub [Option<f64>; 6]);

impl SubgroupScores {
    pub fn get(&self, field: Field) -> Option<f64> {
        self.0[field.index()]
    }
}

pub fn tag_intersection(actual: &[ArtworkRecord], predicted: &[ArtworkRecord]) -> SubgroupScores {
    let mut out = SubgroupScores::default();
    for field in Field::ALL {
        let values = |arts: &[ArtworkRecord]| -> BTreeSet<String> {
            arts.iter().flat_map(|a| a.field_values(field).iter().cloned()).collect()
        };
        let want = values(actual);
        if want.is_empty() {
            continue;
        }
        let got = values(predicted);
        let common = want.intersection(&got).count();
        out.0[field.index()] = Some(common as f64 / want.len() as f64);
    }
    out
}

/// Share of the distinct actual artworks that were predicted.
pub fn artwork_intersection(actual: &[u64], predicted: &[u64]) -> Result<f64> {
    let want: BTreeSet<u64> = actual.iter().copied().collect();
    if want.is_empty() {
        return Err(Error::Empty("actual artworks"));
    }
    let got: BTreeSet<u64> = predicted.iter().copied().collect();
    Ok(want.intersection(&got).count() as f64 / want.len() as f64)
}

/// Expected artwork intersection when drawing `k` of `n` artworks uniformly.
pub fn random_baseline(k: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("catalog"));
    }
    if k > n {
        return Err(Error::invalid(alloc::format!("k = {k} exceeds catalog size {n}")));
    }
    Ok(k as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KPolicy {
    /// As many artworks as the actual exhibition has (in-sample evaluation).
    ExhibitionSize,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhibitionEvaluation {
    pub title: String,
    pub k: usize,
    pub predicted: Vec<u64>,
    pub tags: SubgroupScores,
    pub artworks: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    /// Mean over the validation exhibitions where the field is present.
    pub subgroup_means: SubgroupScores,
    pub artwork_mean: f64,
    /// `mean_k / catalog_size`.
    pub random_baseline: f64,
    pub mean_k: f64,
    pub catalog_size: usize,
    pub rows: Vec<ExhibitionEvaluation>,
}

/// Runs `curator(exhibition, k)` on every validation exhibition and
/// aggregates both metric families.
pub fn evaluate_model<F>(
    mut curator: F,
    exhibitions: &[ExhibitionRecord],
    catalog: &Catalog,
    split: &DatasetSplit,
    policy: KPolicy,
) -> Result<EvaluationReport>
where
    F: FnMut(&ExhibitionRecord, usize) -> Result<Vec<u64>>,
{
    if split.validation.is_empty() {
        return Err(Error::Empty("validation split"));
    }
    let mut rows = Vec::with_capacity(split.validation.len());
    let mut size_sum = 0usize;
    for &i in &split.validation {
        let ex = exhibitions
            .get(i)
            .ok_or_else(|| Error::invalid(alloc::format!("validation index {i} out of range")))?;
        let k = match policy {
            KPolicy::ExhibitionSize => ex.artworks.len(),
            KPolicy::Fixed(k) => k,
        };
        size_sum += ex.artworks.len();
        let predicted = curator(ex, k)?;
        let predicted_records: Vec<ArtworkRecord> = predicted.iter().filter_map(|id| catalog.get(*id).cloned()).collect();
        rows.push(ExhibitionEvaluation {
            title: ex.title.clone(),
            k,
            tags: tag_intersection(&ex.artworks, &predicted_records),
            artworks: artwork_intersection(&ex.object_ids(), &predicted)?,
            predicted,
        });
    }
    let mut subgroup_means = SubgroupScores::default();
    for field in Field::ALL {
        let vals: Vec<f64> = rows.iter().filter_map(|r| r.tags.get(field)).collect();
        if !vals.is_empty() {
            subgroup_means.0[field.index()] = Some(vals.iter().sum::<f64>() / vals.len() as f64);
        }
    }
    let artwork_mean = rows.iter().map(|r| r.artworks).sum::<f64>() / rows.len() as f64;
    let mean_k = size_sum as f64 / rows.len() as f64;
    if catalog.is_empty() {
        return Err(Error::Empty("catalog"));
    }
    Ok(EvaluationReport {
        subgroup_means,
        artwork_mean,
        random_baseline: mean_k / catalog.len() as f64,
        mean_k,
        catalog_size: catalog.len(),
        rows,
    })
}
