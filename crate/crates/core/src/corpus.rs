//! Catalog and exhibition records, generalized tags and training targets.
//!
//! A *generalized tag* is any string value of the six modeled metadata fields
//! of an artwork. Exhibitions are flattened into per-field relative
//! frequencies over those strings, which is the output space of the tag
//! models.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// The six metadata fields that make up the generalized tags of an artwork.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Department,
    ArtistDisplayName,
    ObjectBeginDate,
    Medium,
    Classification,
    Tags,
}

impl Field {
    pub const ALL: [Field; 6] = [
        Field::Department,
        Field::ArtistDisplayName,
        Field::ObjectBeginDate,
        Field::Medium,
        Field::Classification,
        Field::Tags,
    ];

    /// Column name used by the museum's CSV and exhibition JSON.
    pub const fn header(self) -> &'static str {
        match self {
            Field::Department => "Department",
            Field::ArtistDisplayName => "Artist Display Name",
            Field::ObjectBeginDate => "Object Begin Date",
            Field::Medium => "Medium",
            Field::Classification => "Classification",
            Field::Tags => "Tags",
        }
    }

    pub fn from_header(name: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.header() == name)
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    /// Whether the field holds a list of values in the source data.
    pub const fn is_multi_valued(self) -> bool {
        matches!(
            self,
            Field::ArtistDisplayName | Field::Classification | Field::Tags
        )
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.header())
    }
}

/// Bit set over [`Field`], used to annotate where a tag string was observed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FieldSet(u8);

impl FieldSet {
    pub fn insert(&mut self, field: Field) {
        self.0 |= 1 << field.index();
    }

    pub fn contains(self, field: Field) -> bool {
        self.0 & (1 << field.index()) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Field> {
        Field::ALL.into_iter().filter(move |f| self.contains(*f))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Self {
        FieldSet(bits & 0b11_1111)
    }
}

/// One catalog row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ArtworkRecord {
    pub object_id: u64,
    pub department: Option<String>,
    pub artist_display_name: Vec<String>,
    pub object_begin_date: Option<String>,
    pub medium: Option<String>,
    pub classification: Vec<String>,
    pub tags: Vec<String>,
    /// Display only.
    pub title: Option<String>,
    /// Display only.
    pub object_name: Option<String>,
    /// Display only.
    pub public_image_url: Option<String>,
}

impl ArtworkRecord {
    pub fn field_values(&self, field: Field) -> &[String] {
        match field {
            Field::Department => self.department.as_slice(),
            Field::ArtistDisplayName => &self.artist_display_name,
            Field::ObjectBeginDate => self.object_begin_date.as_slice(),
            Field::Medium => self.medium.as_slice(),
            Field::Classification => &self.classification,
            Field::Tags => &self.tags,
        }
    }

    /// Every generalized tag of the row, in field order, repeats included.
    pub fn generalized_tags(&self) -> impl Iterator<Item = (Field, &str)> {
        Field::ALL.into_iter().flat_map(move |f| {
            self.field_values(f).iter().map(move |v| (f, v.as_str()))
        })
    }

    /// Drops empty strings from the multi-valued fields and turns empty
    /// single values into `None`.
    pub fn normalized(mut self) -> Self {
        fn opt(v: Option<String>) -> Option<String> {
            v.filter(|s| !s.trim().is_empty())
        }
        fn list(v: Vec<String>) -> Vec<String> {
            v.into_iter().filter(|s| !s.trim().is_empty()).collect()
        }
        self.department = opt(self.department);
        self.object_begin_date = opt(self.object_begin_date);
        self.medium = opt(self.medium);
        self.title = opt(self.title);
        self.object_name = opt(self.object_name);
        self.public_image_url = opt(self.public_image_url);
        self.artist_display_name = list(self.artist_display_name);
        self.classification = list(self.classification);
        self.tags = list(self.tags);
        self
    }
}

/// Immutable catalog keyed by object id.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    records: Vec<ArtworkRecord>,
    by_id: BTreeMap<u64, usize>,
}

impl Catalog {
    pub fn new(records: Vec<ArtworkRecord>) -> Result<Self> {
        let mut by_id = BTreeMap::new();
        for (row, r) in records.iter().enumerate() {
            if by_id.insert(r.object_id, row).is_some() {
                return Err(Error::invalid(format!("duplicate object id {}", r.object_id)));
            }
        }
        Ok(Catalog { records, by_id })
    }

    pub fn records(&self) -> &[ArtworkRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, object_id: u64) -> Option<&ArtworkRecord> {
        self.by_id.get(&object_id).map(|&row| &self.records[row])
    }

    pub fn row_of(&self, object_id: u64) -> Option<usize> {
        self.by_id.get(&object_id).copied()
    }

    /// Resolves an exhibition's object ids. Returns `None` when no id
    /// resolves; the second value is the number of ids that did not.
    pub fn resolve_exhibition(
        &self,
        title: &str,
        overview_text: &str,
        object_ids: &[u64],
    ) -> (Option<ExhibitionRecord>, usize) {
        let mut artworks = Vec::with_capacity(object_ids.len());
        let mut unresolved = 0;
        for id in object_ids {
            match self.get(*id) {
                Some(r) => artworks.push(r.clone()),
                None => unresolved += 1,
            }
        }
        if artworks.is_empty() {
            return (None, unresolved);
        }
        (
            Some(ExhibitionRecord::new(title.into(), overview_text.into(), artworks)),
            unresolved,
        )
    }
}

/// Canonical text fed to the encoders for an exhibition.
pub fn prompt_text(title: &str, overview_text: &str) -> String {
    format!("Title of exhibition is: {title} and the description is: {overview_text}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhibitionRecord {
    pub title: String,
    pub overview_text: String,
    pub artworks: Vec<ArtworkRecord>,
    pub prompt_text: String,
}

impl ExhibitionRecord {
    pub fn new(title: String, overview_text: String, artworks: Vec<ArtworkRecord>) -> Self {
        let prompt_text = prompt_text(&title, &overview_text);
        ExhibitionRecord {
            title,
            overview_text,
            artworks,
            prompt_text,
        }
    }

    pub fn object_ids(&self) -> Vec<u64> {
        self.artworks.iter().map(|a| a.object_id).collect()
    }

    pub fn word_count(&self) -> usize {
        self.title.split_whitespace().count() + self.overview_text.split_whitespace().count()
    }
}

/// Ordered universe of generalized-tag strings seen in the exhibitions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagVocabulary {
    entries: Vec<String>,
    sources: Vec<FieldSet>,
    index: BTreeMap<String, usize>,
}

impl TagVocabulary {
    /// Builds the vocabulary from every exhibited artwork. Entries are sorted
    /// by code point; a string seen in several fields occupies one slot.
    pub fn build(exhibitions: &[ExhibitionRecord]) -> Self {
        let mut seen: BTreeMap<&str, FieldSet> = BTreeMap::new();
        for ex in exhibitions {
            for art in &ex.artworks {
                for (field, value) in art.generalized_tags() {
                    seen.entry(value).or_default().insert(field);
                }
            }
        }
        let (entries, sources) = seen.into_iter().map(|(k, s)| (String::from(k), s)).unzip();
        Self::from_parts(entries, sources).expect("sorted unique entries")
    }

    /// Rebuilds a vocabulary from stored entries, which must be strictly
    /// increasing.
    pub fn from_parts(entries: Vec<String>, sources: Vec<FieldSet>) -> Result<Self> {
        if entries.len() != sources.len() {
            return Err(Error::DimensionMismatch {
                context: "vocabulary sources",
                expected: entries.len(),
                actual: sources.len(),
            });
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("vocabulary entries must be unique and sorted"));
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Ok(TagVocabulary {
            entries,
            sources,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn sources(&self) -> &[FieldSet] {
        &self.sources
    }

    pub fn position(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }
}

/// Probability vector aligned to a [`TagVocabulary`].
#[derive(Debug, Clone, PartialEq)]
pub struct TagProbabilityVector {
    pub values: Vec<f64>,
}

impl TagProbabilityVector {
    pub fn zeros(len: usize) -> Self {
        TagProbabilityVector {
            values: alloc::vec![0.0; len],
        }
    }

    /// Wraps raw network outputs, clamping negatives to zero.
    pub fn from_raw_clamped(raw: &[f64]) -> Self {
        TagProbabilityVector {
            values: raw.iter().map(|v| v.max(0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-field relative frequencies of an exhibition's tags, in field order and
/// then order of first appearance. A string seen in several fields keeps its
/// first position and sums the contributions.
pub fn flatten_sparse(ex: &ExhibitionRecord) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = Vec::new();
    let mut slot: BTreeMap<&str, usize> = BTreeMap::new();
    for field in Field::ALL {
        let mut counts: Vec<(&str, usize)> = Vec::new();
        let mut total = 0usize;
        for art in &ex.artworks {
            for v in art.field_values(field) {
                total += 1;
                match counts.iter_mut().find(|(s, _)| *s == v.as_str()) {
                    Some((_, c)) => *c += 1,
                    None => counts.push((v.as_str(), 1)),
                }
            }
        }
        for (tag, c) in counts {
            let p = c as f64 / total as f64;
            match slot.get(tag) {
                Some(&i) => out[i].1 += p,
                None => {
                    slot.insert(tag, out.len());
                    out.push((tag.into(), p));
                }
            }
        }
    }
    out
}

/// Dense training target for an exhibition.
pub fn flatten_exhibition_target(
    ex: &ExhibitionRecord,
    vocab: &TagVocabulary,
) -> Result<TagProbabilityVector> {
    let mut target = TagProbabilityVector::zeros(vocab.len());
    for (tag, p) in flatten_sparse(ex) {
        let i = vocab.position(&tag).ok_or(Error::UnknownTag(tag))?;
        target.values[i] = p;
    }
    Ok(target)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub seed: u64,
}

/// Seeded shuffle of `0..n`; the first `floor(ratio * n)` indices (at least
/// one, and leaving at least one for validation when `n >= 2`) train.
pub fn split_dataset(n: usize, ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if n == 0 {
        return Err(Error::Empty("dataset"));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!("split ratio {ratio} not in (0, 1)")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut n_train = libm::floor(ratio * n as f64 + 1e-9) as usize;
    n_train = n_train.max(1);
    if n >= 2 {
        n_train = n_train.min(n - 1);
    }
    let validation = order.split_off(n_train);
    Ok(DatasetSplit {
        train: order,
        validation,
        seed,
    })
}

/// Value counts per field over all exhibited artwork slots.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyReport {
    /// Indexed by [`Field::index`]; each list sorted by descending count,
    /// then by value.
    pub fields: [Vec<(String, usize)>; 6],
}

impl FrequencyReport {
    pub fn field(&self, field: Field) -> &[(String, usize)] {
        &self.fields[field.index()]
    }
}

pub fn tag_frequency_report(exhibitions: &[ExhibitionRecord], top: usize) -> FrequencyReport {
    let mut report = FrequencyReport::default();
    for field in Field::ALL {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for art in exhibitions.iter().flat_map(|e| &e.artworks) {
            for v in art.field_values(field) {
                *counts.entry(v).or_default() += 1;
            }
        }
        let mut sorted: Vec<(String, usize)> =
            counts.into_iter().map(|(k, c)| (k.into(), c)).collect();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        sorted.truncate(top);
        report.fields[field.index()] = sorted;
    }
    report
}

/// Exhibition-side corpus statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub exhibitions: usize,
    pub artwork_slots: usize,
    pub unique_artworks: usize,
    pub word_count: usize,
    pub tag_occurrences: usize,
    pub unique_tags: usize,
}

pub fn corpus_stats(exhibitions: &[ExhibitionRecord]) -> CorpusStats {
    let mut unique_artworks = BTreeSet::new();
    let mut unique_tags = BTreeSet::new();
    let mut stats = CorpusStats {
        exhibitions: exhibitions.len(),
        ..CorpusStats::default()
    };
    for ex in exhibitions {
        stats.word_count += ex.word_count();
        stats.artwork_slots += ex.artworks.len();
        for art in &ex.artworks {
            unique_artworks.insert(art.object_id);
            for (_, tag) in art.generalized_tags() {
                stats.tag_occurrences += 1;
                unique_tags.insert(tag);
            }
        }
    }
    stats.unique_artworks = unique_artworks.len();
    stats.unique_tags = unique_tags.len();
    stats
}

/// Non-empty counts over the catalog, for the six modeled fields plus title
/// and object name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CatalogStats {
    pub records: usize,
    pub non_empty: [usize; 6],
    pub title_non_empty: usize,
    pub object_name_non_empty: usize,
    pub all_non_empty: usize,
}

pub fn catalog_stats(records: &[ArtworkRecord]) -> CatalogStats {
    let mut stats = CatalogStats {
        records: records.len(),
        ..CatalogStats::default()
    };
    for r in records {
        let mut all = r.title.is_some() && r.object_name.is_some();
        stats.title_non_empty += r.title.is_some() as usize;
        stats.object_name_non_empty += r.object_name.is_some() as usize;
        for f in Field::ALL {
            let present = !r.field_values(f).is_empty();
            stats.non_empty[f.index()] += present as usize;
            all &= present;
        }
        stats.all_non_empty += all as usize;
    }
    stats
}
