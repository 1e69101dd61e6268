use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::graph::{RelationId, Time, VertexId, VertexKind};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("vertex `{id}` is a {found} vertex, expected {expected}")]
    KindMismatch {
        id: VertexId,
        expected: VertexKind,
        found: VertexKind,
    },
    #[error("inverted interval: end {end} < start {start}")]
    InvertedInterval { start: Time, end: Time },
    #[error("time point outside the accepted range in [{start}, {end}]")]
    TimeOutOfRange { start: Time, end: Time },
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(VertexId),
    #[error("duplicate relation id {0}")]
    DuplicateRelation(RelationId),
    #[error("empty label or id")]
    EmptyLabel,
    #[error("type label `{label}` already belongs to {existing} vertices")]
    LabelKindConflict { label: String, existing: VertexKind },
    #[error(
        "network is not heterogeneous: {vertex_types} vertex type(s), {relation_types} relation type(s)"
    )]
    NotHeterogeneous {
        vertex_types: usize,
        relation_types: usize,
    },
    #[error("vertices must differ, got `{0}` twice")]
    SelfPair(VertexId),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: unexpected header `{found}`, expected `{expected}`")]
    Header {
        path: PathBuf,
        found: String,
        expected: &'static str,
    },
    #[error("{path}: invalid manifest: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl IngestError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the file system rather than of the data.
    pub fn is_io(&self) -> bool {
        match self {
            IngestError::Io { .. } => true,
            IngestError::Csv(e) => e.is_io_error(),
            IngestError::Json(e) => e.is_io(),
            _ => false,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("relation {relation} starts at {start}, after the reference time {now}")]
    FutureEdge {
        relation: RelationId,
        start: Time,
        now: Time,
    },
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("unknown relation type `{0}`")]
    UnknownRelationType(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("vertex `{0}` appears in more than one group")]
    OverlappingGroups(VertexId),
    #[error("group member `{0}` is not a character vertex of the bundle")]
    InvalidMember(VertexId),
    #[error("plan does not match bundle: {0}")]
    StalePlan(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
