//! Sample retriever: a projection over a frozen embedder, trained so that
//! sentence-level distances track triple-set distances.

mod checkpoint;
mod distance_set;
mod model;
mod train;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, load_checkpoint_for, save_checkpoint};
pub use distance_set::{compute_pairwise, PairwiseDistanceSet};
pub use model::RetrieverModel;
pub use train::{
    batch_gradient, batch_loss, make_training_pairs, train, EpochStats, TrainConfig, TrainOutcome, TrainingPair,
    TrainingPairs,
};
