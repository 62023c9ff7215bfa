//! Nearest-neighbor search over artwork metadata embeddings.
//!
//! [`FlatStore::exact_search`] is the exact reference; [`IvfFlatIndex`]
//! partitions the stored vectors by nearest k-means centroid and scans only
//! the `nprobe` closest lists. Vectors are stored as `f32`, distances are
//! squared Euclidean accumulated in `f64`, and ties break by ascending row.

mod flat;
mod ivf;
mod kmeans;

pub use flat::{squared_distance, FlatStore, Neighbor, SearchResult};
pub use ivf::{default_nlist, IvfConfig, IvfFlatIndex, InvertedList};
pub use kmeans::{kmeans_train, KMeans};
