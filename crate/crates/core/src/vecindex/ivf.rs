use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::flat::{by_distance_then_row, squared_distance, top_k, FlatStore, Neighbor, SearchResult};
use super::kmeans::{kmeans_train, KMeans};
use crate::{Error, Result};

/// `ceil(sqrt(n))`, capped at 4096 and at `n`.
pub fn default_nlist(n: usize) -> usize {
    let root = libm::ceil(libm::sqrt(n as f64)) as usize;
    root.clamp(1, 4096).min(n.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IvfConfig {
    pub nlist: usize,
    pub kmeans_iters: usize,
    /// Centroids are trained on at most this many points per list.
    pub max_points_per_centroid: usize,
    pub seed: u64,
}

impl IvfConfig {
    pub fn for_size(n: usize, seed: u64) -> Self {
        IvfConfig {
            nlist: default_nlist(n),
            kmeans_iters: 25,
            max_points_per_centroid: 256,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InvertedList {
    pub rows: Vec<usize>,
    pub ids: Vec<u64>,
    /// Row-major `f32` copies of the member vectors.
    pub vectors: Vec<f32>,
}

impl InvertedList {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvfFlatIndex {
    dim: usize,
    nlist: usize,
    centroids: Vec<f64>,
    lists: Vec<InvertedList>,
    trained: bool,
}

impl IvfFlatIndex {
    pub fn untrained(dim: usize, nlist: usize) -> Self {
        IvfFlatIndex {
            dim,
            nlist,
            centroids: Vec::new(),
            lists: Vec::new(),
            trained: false,
        }
    }

    /// Trains the coarse quantizer on `store` and files every vector under
    /// its nearest centroid.
    pub fn build(store: &FlatStore, config: &IvfConfig) -> Result<Self> {
        if store.is_empty() {
            return Err(Error::Empty("vector store"));
        }
        let dim = store.dim();
        let n = store.len();
        let cap = config.max_points_per_centroid.saturating_mul(config.nlist);
        let km = if cap > 0 && n > cap && cap >= config.nlist {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
            let mut rows = sample(&mut rng, n, cap).into_vec();
            rows.sort_unstable();
            let subset: Vec<f32> = rows.iter().flat_map(|&r| store.vector(r).iter().copied()).collect();
            kmeans_train(&subset, dim, config.nlist, config.kmeans_iters, config.seed)?
        } else {
            kmeans_train(store.vectors(), dim, config.nlist, config.kmeans_iters, config.seed)?
        };
        Self::from_quantizer(store, &km)
    }

    /// Assigns every stored vector to the nearest of the given centroids.
    pub fn from_quantizer(store: &FlatStore, km: &KMeans) -> Result<Self> {
        store.check_dim(km.dim)?;
        let nlist = km.nlist();
        let mut lists: Vec<InvertedList> = (0..nlist).map(|_| InvertedList::default()).collect();
        for row in 0..store.len() {
            let v = store.vector(row);
            let (c, _) = km.nearest(v);
            let list = &mut lists[c];
            list.rows.push(row);
            list.ids.push(store.ids()[row]);
            list.vectors.extend_from_slice(v);
        }
        Ok(IvfFlatIndex {
            dim: km.dim,
            nlist,
            centroids: km.centroids.clone(),
            lists,
            trained: true,
        })
    }

    /// Reassembles a trained index from stored parts, checking the partition.
    pub fn from_parts(dim: usize, centroids: Vec<f64>, lists: Vec<InvertedList>) -> Result<Self> {
        let nlist = lists.len();
        if dim == 0 || centroids.len() != nlist * dim {
            return Err(Error::DimensionMismatch {
                context: "centroids",
                expected: nlist * dim,
                actual: centroids.len(),
            });
        }
        let mut seen = Vec::new();
        for l in &lists {
            if l.ids.len() != l.rows.len() || l.vectors.len() != l.rows.len() * dim {
                return Err(Error::invalid("inconsistent inverted list"));
            }
            seen.extend_from_slice(&l.rows);
        }
        seen.sort_unstable();
        if seen.iter().enumerate().any(|(i, &r)| i != r) {
            return Err(Error::invalid("inverted lists do not partition the rows"));
        }
        Ok(IvfFlatIndex {
            dim,
            nlist,
            centroids,
            lists,
            trained: true,
        })
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nlist(&self) -> usize {
        self.nlist
    }

    pub fn len(&self) -> usize {
        self.lists.iter().map(InvertedList::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..][..self.dim]
    }

    pub fn lists(&self) -> &[InvertedList] {
        &self.lists
    }

    /// The `nprobe` lists whose centroids are closest to `query`, nearest
    /// first.
    pub fn probe_order(&self, query: &[f64], nprobe: usize) -> Vec<usize> {
        let mut order: Vec<(f64, usize)> = (0..self.nlist)
            .map(|c| {
                let d: f64 = self
                    .centroid(c)
                    .iter()
                    .zip(query)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d, c)
            })
            .collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order.into_iter().take(nprobe).map(|(_, c)| c).collect()
    }

    /// Best `k` among the vectors of the `nprobe` nearest lists.
    pub fn search(&self, query: &[f64], k: usize, nprobe: usize) -> Result<SearchResult> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if nprobe == 0 || nprobe > self.nlist {
            return Err(Error::invalid(alloc::format!("nprobe {nprobe} not in 1..={}", self.nlist)));
        }
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "query",
                expected: self.dim,
                actual: query.len(),
            });
        }
        let mut candidates = Vec::new();
        for c in self.probe_order(query, nprobe) {
            let list = &self.lists[c];
            for (i, v) in list.vectors.chunks_exact(self.dim).enumerate() {
                candidates.push(Neighbor {
                    row: list.rows[i],
                    object_id: list.ids[i],
                    distance: squared_distance(query, v),
                });
            }
        }
        let out = top_k(candidates, k);
        debug_assert!(out.windows(2).all(|w| by_distance_then_row(&w[0], &w[1]).is_le()));
        Ok(out)
    }
}
