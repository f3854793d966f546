//! Disciplinary diversity of academic journals.
//!
//! Papers carry one topic per tier of a three-level classification
//! (macro, meso, micro). Citations between papers are pooled into a weighted
//! discipline graph per level, each discipline is embedded with biased random
//! walks and skip-gram training, and the cosine similarities between
//! disciplines feed a similarity-sensitive (Leinster–Cobbold) diversity index
//! computed for every journal. The remaining modules compare multidisciplinary
//! journals against the rest, check consistency across levels, and rank
//! non-multidisciplinary journals by their distance to the normalized ideal
//! point.
//!
//! The numeric core is generic over [`Scalar`] (`f32`/`f64`); the order-2
//! diversity closed form additionally accepts exact rationals. The aliases at
//! the bottom of this file fix the scalar to `f64`, which is what the pipeline
//! and the `jdiv` binary use.

pub mod alias;
pub mod cli;
pub mod detect;
pub mod discipline_graph;
pub mod diversity;
pub mod embedding;
pub mod export;
pub mod ingest;
pub mod io;
pub mod scalar;
pub mod stats;
pub mod synthetic;
pub mod topic;

mod error;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use topic::{Level, TopicId};

/// Exact rational used by the order-2 diversity closed form and exact
/// Mann–Whitney p-values.
pub type Rational = num_rational::Ratio<i128>;

pub type EmbeddingMatrix64 = embedding::EmbeddingMatrix<f64>;
pub type EmbeddingMatrix32 = embedding::EmbeddingMatrix<f32>;
pub type SimilarityMatrix64 = embedding::SimilarityMatrix<f64>;
pub type SimilarityMatrix32 = embedding::SimilarityMatrix<f32>;
pub type JournalDiversityTable64 = diversity::JournalDiversityTable<f64>;
pub type CandidateRanking64 = detect::CandidateRanking<f64>;
