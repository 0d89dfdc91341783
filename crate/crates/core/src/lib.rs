//! Building blocks for entity-summarization benchmarks over knowledge graphs:
//! graph storage, ground-truth annotation, walk-based subgraph sampling,
//! connectivity repair, baseline summarizers and evaluation metrics.

mod dsu;
mod subgraph;

pub mod annotate;
pub mod bundle;
pub mod connect;
pub mod generate;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod sampler;
pub mod similarity;
pub mod stats;
pub mod summarize;
pub mod synthetic;

pub use bundle::{DatasetBundle, GeneratorParams, RootEntity, SizePreset, SummarySet};
pub use graph::{EntityId, EntityRecord, GraphError, KnowledgeGraph, PredicateId, PredicateRecord, Triple};
pub use subgraph::SubgraphError;
