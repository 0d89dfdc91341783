//! Baseline entity summarizers.
//!
//! Each summarizer ranks the triples incident to a root. Ties are broken by
//! predicate ordinal, then neighbour ordinal, then with the root as subject
//! first, so every ranking is fully deterministic.

mod freq;
mod linksum;
mod pagerank;
mod relin;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bundle::DatasetBundle;
use crate::graph::{EntityId, Triple};

pub use freq::{FrequencyMode, FrequencySummarizer};
pub use linksum::{backlink, LinkSumSummarizer, DEFAULT_ALPHA};
pub use pagerank::{pagerank, PageRank, PageRankSummarizer, DAMPING, MAX_ITER, TOLERANCE};
pub use relin::{relin_scores, RelinScores, RelinSummarizer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SummarizeError {
    #[error("root {0} is not an entity of the bundle")]
    UnknownRoot(EntityId),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Candidate triples of one root, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSummary {
    pub root: EntityId,
    pub ranked: Vec<(Triple, f64)>,
}

impl RankedSummary {
    /// Sorts `scored` into the canonical order.
    pub fn from_scores(root: EntityId, mut scored: Vec<(Triple, f64)>) -> Self {
        scored.sort_by(|a, b| compare(root, a, b));
        Self { root, ranked: scored }
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.ranked.iter().map(|(t, _)| *t)
    }

    /// The first `k` triples.
    pub fn top(&self, k: usize) -> Vec<Triple> {
        self.triples().take(k).collect()
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

fn compare(root: EntityId, a: &(Triple, f64), b: &(Triple, f64)) -> Ordering {
    b.1.total_cmp(&a.1)
        .then(a.0.predicate.cmp(&b.0.predicate))
        .then(a.0.other(root).cmp(&b.0.other(root)))
        .then((a.0.subject != root).cmp(&(b.0.subject != root)))
}

pub trait Summarizer: Send + Sync {
    fn name(&self) -> &str;
    fn summarize(&self, bundle: &DatasetBundle, root: EntityId) -> Result<RankedSummary, SummarizeError>;
}

pub(crate) fn candidates(bundle: &DatasetBundle, root: EntityId) -> Result<Vec<Triple>, SummarizeError> {
    if !bundle.graph.contains_entity(root) {
        return Err(SummarizeError::UnknownRoot(root));
    }
    Ok(bundle.graph.incident_triples(root).collect())
}

/// Ranks a root's ground truth first and everything else after it. Only
/// useful as an upper bound when checking the evaluation harness.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleSummarizer;

impl Summarizer for OracleSummarizer {
    fn name(&self) -> &str {
        "oracle"
    }

    fn summarize(&self, bundle: &DatasetBundle, root: EntityId) -> Result<RankedSummary, SummarizeError> {
        let truth = bundle.truth(root);
        let scored = candidates(bundle, root)?
            .into_iter()
            .map(|t| (t, if truth.is_some_and(|s| s.contains(&t)) { 1.0 } else { 0.0 }))
            .collect();
        Ok(RankedSummary::from_scores(root, scored))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Random,
    EntityFreq,
    InvEntityFreq,
    RelFreq,
    InvRelFreq,
    PageRank,
    Relin,
    LinkSum,
    Oracle,
}

impl Method {
    /// The baselines, without the oracle.
    pub const BASELINES: [Method; 8] = [
        Method::Random,
        Method::EntityFreq,
        Method::InvEntityFreq,
        Method::RelFreq,
        Method::InvRelFreq,
        Method::PageRank,
        Method::Relin,
        Method::LinkSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::EntityFreq => "entity-freq",
            Method::InvEntityFreq => "inv-entity-freq",
            Method::RelFreq => "rel-freq",
            Method::InvRelFreq => "inv-rel-freq",
            Method::PageRank => "pagerank",
            Method::Relin => "relin",
            Method::LinkSum => "linksum",
            Method::Oracle => "oracle",
        }
    }

    /// Instantiates the summarizer, precomputing whatever it needs from
    /// `bundle`.
    pub fn build(self, bundle: &DatasetBundle, seed: u64) -> Box<dyn Summarizer> {
        match self {
            Method::Random => Box::new(FrequencySummarizer::new(bundle, FrequencyMode::Random, seed)),
            Method::EntityFreq => Box::new(FrequencySummarizer::new(bundle, FrequencyMode::EntityFreq, seed)),
            Method::InvEntityFreq => Box::new(FrequencySummarizer::new(bundle, FrequencyMode::InvEntityFreq, seed)),
            Method::RelFreq => Box::new(FrequencySummarizer::new(bundle, FrequencyMode::RelFreq, seed)),
            Method::InvRelFreq => Box::new(FrequencySummarizer::new(bundle, FrequencyMode::InvRelFreq, seed)),
            Method::PageRank => Box::new(PageRankSummarizer::new(bundle)),
            Method::Relin => Box::new(RelinSummarizer::default()),
            Method::LinkSum => Box::new(LinkSumSummarizer::new(bundle, DEFAULT_ALPHA).expect("default alpha is valid")),
            Method::Oracle => Box::new(OracleSummarizer),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown method `{0}`; valid methods: random, entity-freq, inv-entity-freq, rel-freq, inv-rel-freq, pagerank, relin, linksum, oracle")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::BASELINES
            .into_iter()
            .chain([Method::Oracle])
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}
