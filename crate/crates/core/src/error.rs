use std::path::PathBuf;

use thiserror::Error;

use crate::{detect, discipline_graph, diversity, embedding, export, ingest, stats};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error, used where stages are chained together.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Graph(#[from] discipline_graph::GraphError),
    #[error(transparent)]
    Embedding(#[from] embedding::EmbeddingError),
    #[error(transparent)]
    Diversity(#[from] diversity::DiversityError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error(transparent)]
    Detect(#[from] detect::DetectError),
    #[error(transparent)]
    Export(#[from] export::ExportError),
    #[error("missing artifact {path} (run the `{stage}` stage first)")]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}
