//! Link-based ranking of a root's neighbours.
//!
//! Each neighbour `v` scores `alpha * PR(v) / max PR + (1 - alpha) * BL(v)`,
//! with PageRank normalised over the root's neighbours and `BL(v) = 1` when
//! links run both ways between root and `v`. A neighbour contributes one
//! triple: the one whose predicate is most frequent in the bundle.

use std::collections::BTreeMap;

use super::{candidates, pagerank, RankedSummary, SummarizeError, Summarizer, DAMPING, MAX_ITER, TOLERANCE};
use crate::bundle::DatasetBundle;
use crate::graph::{EntityId, KnowledgeGraph, Triple};

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Whether directed links `root -> v` and `v -> root` both exist.
pub fn backlink(graph: &KnowledgeGraph, root: EntityId, v: EntityId) -> bool {
    graph.out_triples(root).any(|t| t.object == v) && graph.out_triples(v).any(|t| t.object == root)
}

#[derive(Debug, Clone)]
pub struct LinkSumSummarizer {
    alpha: f64,
    pagerank: Vec<f64>,
    predicate_counts: Vec<usize>,
}

impl LinkSumSummarizer {
    pub fn new(bundle: &DatasetBundle, alpha: f64) -> Result<Self, SummarizeError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SummarizeError::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
        }
        let mut predicate_counts = vec![0; bundle.graph.predicate_count()];
        for t in bundle.graph.triples() {
            predicate_counts[t.predicate.index()] += 1;
        }
        Ok(Self {
            alpha,
            pagerank: pagerank(&bundle.graph, DAMPING, TOLERANCE, MAX_ITER).scores,
            predicate_counts,
        })
    }

    /// Score of every neighbour of `root`.
    pub fn neighbour_scores(&self, graph: &KnowledgeGraph, root: EntityId) -> BTreeMap<EntityId, f64> {
        let neighbours = graph.neighbors(root);
        let max_pr = neighbours
            .iter()
            .map(|v| self.pagerank[v.index()])
            .fold(0.0, f64::max);
        neighbours
            .into_iter()
            .map(|v| {
                let pr = if max_pr > 0.0 { self.pagerank[v.index()] / max_pr } else { 0.0 };
                let bl = if backlink(graph, root, v) { 1.0 } else { 0.0 };
                (v, self.alpha * pr + (1.0 - self.alpha) * bl)
            })
            .collect()
    }

    fn representative(&self, root: EntityId, between: &[Triple]) -> Triple {
        *between
            .iter()
            .min_by(|a, b| {
                self.predicate_counts[b.predicate.index()]
                    .cmp(&self.predicate_counts[a.predicate.index()])
                    .then(a.predicate.cmp(&b.predicate))
                    .then((a.subject != root).cmp(&(b.subject != root)))
            })
            .expect("neighbours share at least one triple")
    }
}

impl Summarizer for LinkSumSummarizer {
    fn name(&self) -> &str {
        "linksum"
    }

    fn summarize(&self, bundle: &DatasetBundle, root: EntityId) -> Result<RankedSummary, SummarizeError> {
        let cands = candidates(bundle, root)?;
        let mut by_neighbour: BTreeMap<EntityId, Vec<Triple>> = BTreeMap::new();
        for t in cands {
            by_neighbour.entry(t.other(root)).or_default().push(t);
        }
        let scores = self.neighbour_scores(&bundle.graph, root);
        let scored = by_neighbour
            .iter()
            .map(|(v, between)| (self.representative(root, between), scores[v]))
            .collect();
        Ok(RankedSummary::from_scores(root, scored))
    }
}
