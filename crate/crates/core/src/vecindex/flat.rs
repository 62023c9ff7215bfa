use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Insertion row in the store the vector came from.
    pub row: usize,
    pub object_id: u64,
    /// Squared Euclidean distance.
    pub distance: f64,
}

pub type SearchResult = Vec<Neighbor>;

pub fn squared_distance(query: &[f64], stored: &[f32]) -> f64 {
    query
        .iter()
        .zip(stored)
        .map(|(q, &v)| {
            let d = q - v as f64;
            d * d
        })
        .sum()
}

pub(crate) fn by_distance_then_row(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance.total_cmp(&b.distance).then(a.row.cmp(&b.row))
}

/// Keeps the `k` best candidates in order.
pub(crate) fn top_k(mut candidates: Vec<Neighbor>, k: usize) -> SearchResult {
    if candidates.len() > k && k > 0 {
        candidates.select_nth_unstable_by(k - 1, by_distance_then_row);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(by_distance_then_row);
    candidates.truncate(k);
    candidates
}

/// Row-major `f32` vectors with their object ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatStore {
    dim: usize,
    ids: Vec<u64>,
    vectors: Vec<f32>,
}

impl FlatStore {
    pub fn new(dim: usize) -> Self {
        FlatStore {
            dim,
            ids: Vec::new(),
            vectors: Vec::new(),
        }
    }

    pub fn from_parts(dim: usize, ids: Vec<u64>, vectors: Vec<f32>) -> Result<Self> {
        if dim == 0 || vectors.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch {
                context: "flat store",
                expected: ids.len() * dim,
                actual: vectors.len(),
            });
        }
        Ok(FlatStore { dim, ids, vectors })
    }

    pub fn push(&mut self, object_id: u64, vector: &[f64]) -> Result<()> {
        self.check_dim(vector.len())?;
        self.ids.push(object_id);
        self.vectors.extend(vector.iter().map(|&v| v as f32));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    pub fn vector(&self, row: usize) -> &[f32] {
        &self.vectors[row * self.dim..][..self.dim]
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                context: "vector",
                expected: self.dim,
                actual: got,
            });
        }
        Ok(())
    }

    /// The true `k` nearest rows.
    pub fn exact_search(&self, query: &[f64], k: usize) -> Result<SearchResult> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        self.check_dim(query.len())?;
        let candidates = (0..self.len())
            .map(|row| Neighbor {
                row,
                object_id: self.ids[row],
                distance: squared_distance(query, self.vector(row)),
            })
            .collect();
        Ok(top_k(candidates, k))
    }
}
