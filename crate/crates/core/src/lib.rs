//! Duplicate character detection in heterogeneous temporal networks.
//!
//! Characters (people) link to entities (institutions, projects,
//! publications, ...) through time-stamped edges, one subnetwork per
//! relation type. Pairs with identical neighbor structure are screened out
//! first, scored with a temporal path similarity, and groups above a
//! threshold are merged.

pub mod error;
pub mod graph;
pub mod ingest;
pub mod merge;
pub mod pipeline;
pub mod projection;
pub mod structure;
pub mod tap;
mod unionfind;

pub use error::{GraphError, IngestError, MergeError, SimilarityError};
pub use graph::{
    NetworkBundle, RelationId, TemporalActivityNetwork, TemporalEdge, Time, TimeInterval, Vertex,
    VertexId, VertexKind, MAX_TIME,
};
pub use merge::{apply_merge, plan_merge, verify_merge, MergePlan, MergePolicy, MergedNetwork};
pub use pipeline::{run_dedupe, DedupeConfig, DedupeOutcome, PipelineError};
pub use structure::{screen_candidates, structure_error, CandidateSet, NameFilter};
pub use tap::{simtap, simtap_beta, RedundantGroupSet, SimilarityResult};
pub use unionfind::UnionFind;
