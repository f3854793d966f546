//! Discipline embeddings: biased second-order random walks over a
//! [`DisciplineGraph`](crate::discipline_graph::DisciplineGraph), skip-gram
//! training with negative sampling, and the cosine similarity matrix.

mod files;
mod sgns;
mod similarity;
mod walk;

use thiserror::Error;

use crate::topic::TopicId;

pub use files::{
    read_embeddings, read_similarity_dense, read_similarity_triplets, read_walks,
    write_dense_matrix, write_embeddings, write_similarity_dense, write_similarity_triplets,
    write_walks,
};
pub use sgns::{train_sgns, EmbeddingMatrix, TrainMode, TrainParams};
pub(crate) use similarity::check_similarity;
pub use similarity::{cosine_similarity_matrix, raw_cosine_matrix, SimilarityMatrix};
pub use walk::{generate_walks, precompute_transitions, TransitionTables, WalkParams, WalkSet};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("walk set is empty")]
    EmptyWalks,
    #[error("node {0} does not occur in any walk")]
    NodeNotVisited(TopicId),
    #[error("node {0} has an all-zero embedding")]
    ZeroVector(TopicId),
    #[error("invalid similarity matrix: {0}")]
    InvalidMatrix(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
