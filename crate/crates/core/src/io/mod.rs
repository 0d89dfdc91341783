//! Readers and writers for the dataset file formats.
//!
//! A bundle on disk is five CSV files sharing a prefix
//! (`{variant}-{size}-{dataset_type}`), plus an optional JSON metadata file:
//!
//! | kind            | columns                                                             |
//! |-----------------|---------------------------------------------------------------------|
//! | `entities`      | id, entity, wikidata_label, wikidata_desc, wikipedia_title, wikipedia_id |
//! | `root-entities` | entity, category                                                    |
//! | `predicates`    | id, predicate, predicate_label, predicate_desc                      |
//! | `triples`       | subject, predicate, object                                          |
//! | `ground-truths` | root_entity, subject, predicate, object                             |
//!
//! Columns are located by header name. Nullable columns may be missing
//! entirely or hold empty cells.

mod csv_files;
mod graphml;
mod mentions;

use std::path::PathBuf;

use thiserror::Error;

pub use csv_files::{
    bundle_file, find_bundle_prefix, load_annotations, load_bundle, load_graph, save_annotations,
    save_bundle, save_graph,
};
pub use graphml::{export_graphml, write_graphml};
pub use mentions::{load_mentions, parse_mentions, MentionRecord};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", .file.display())]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", .file.display())]
    Syntax {
        file: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}: missing column `{column}`", .file.display())]
    MissingColumn { file: PathBuf, column: &'static str },
    #[error("{}:{line}: malformed row, expected {expected} columns, found {found}", .file.display())]
    Malformed {
        file: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{}:{line}: invalid value `{value}` in column `{column}`", .file.display())]
    InvalidValue {
        file: PathBuf,
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("{}:{line}: dangling reference to unknown {kind} {id}", .file.display())]
    Dangling {
        file: PathBuf,
        line: u64,
        kind: &'static str,
        id: String,
    },
    #[error("{}:{line}: duplicate ordinal {ordinal}", .file.display())]
    DuplicateOrdinal { file: PathBuf, line: u64, ordinal: u32 },
    #[error("{}:{line}: duplicate id {id}", .file.display())]
    DuplicateId { file: PathBuf, line: u64, id: String },
    #[error("{}: ordinals are not contiguous, {missing} is missing", .file.display())]
    NonContiguous { file: PathBuf, missing: u32 },
    #[error("{}:{line}: non-incident ground truth ({subject}, {predicate}, {object}) for root {root}", .file.display())]
    NonIncident {
        file: PathBuf,
        line: u64,
        root: u32,
        subject: u32,
        predicate: u32,
        object: u32,
    },
    #[error("{}:{line}: duplicate mentions for {root}", .file.display())]
    DuplicateMentions { file: PathBuf, line: u64, root: String },
    #[error("no bundle (*-entities.csv) found in {}", .0.display())]
    NoBundle(PathBuf),
    #[error("several bundles in {}: {}", .dir.display(), .prefixes.join(", "))]
    AmbiguousBundle { dir: PathBuf, prefixes: Vec<String> },
}
