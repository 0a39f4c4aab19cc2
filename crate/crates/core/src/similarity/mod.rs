//! Triple-level similarity: embeddings, the average Pompeiu–Hausdorff set
//! distance, and the pool-wide distance matrix.

mod embed;
mod hausdorff;
mod pool;

#[cfg(feature = "http")]
pub use embed::HttpEmbedder;
pub use embed::{EmbeddingProvider, EmbeddingVector, HashingEmbedder};
pub use hausdorff::{set_distance, triple_distance};
pub use pool::{pool_distances, pool_distances_with, EmbeddingMemo, PoolDistanceMatrix, PoolDistances};
