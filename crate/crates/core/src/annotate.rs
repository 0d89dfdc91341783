//! Ground-truth annotation from mention lists.
//!
//! Every mentioned entity adjacent to the root contributes exactly one triple
//! to the root's summary. When several triples connect the pair, the one whose
//! predicate text is most similar to the abstract wins; ties go to the smaller
//! predicate ordinal and then to the triple with the root as subject.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::bundle::{RootEntity, SummarySet};
use crate::graph::{GraphError, KnowledgeGraph, PredicateId, Triple};
use crate::io::MentionRecord;
use crate::similarity::{score_predicate_against_abstract, ScoreError, SimilarityScorer};

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("root {0} is not an entity of the graph")]
    UnknownRoot(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Counts of mentions that did not produce a summary triple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnnotationReport {
    /// Mentioned ids with no entity in the graph.
    pub unresolved: usize,
    /// Mentioned entities that share no triple with the root.
    pub not_adjacent: usize,
    /// Pairs that needed disambiguation between parallel triples.
    pub disambiguated: usize,
}

impl std::ops::AddAssign for AnnotationReport {
    fn add_assign(&mut self, rhs: Self) {
        self.unresolved += rhs.unresolved;
        self.not_adjacent += rhs.not_adjacent;
        self.disambiguated += rhs.disambiguated;
    }
}

pub fn annotate<S: SimilarityScorer + ?Sized>(
    graph: &KnowledgeGraph,
    mention: &MentionRecord,
    scorer: &S,
) -> Result<(SummarySet, AnnotationReport), AnnotateError> {
    graph.ensure_frozen()?;
    let root = graph
        .entity_by_external(&mention.root)
        .ok_or_else(|| AnnotateError::UnknownRoot(mention.root.clone()))?;
    let mut summary = SummarySet::new(root);
    let mut report = AnnotationReport::default();
    let mut predicate_scores: HashMap<PredicateId, f64> = HashMap::new();

    for ext in &mention.mentioned {
        let Some(m) = graph.entity_by_external(ext) else {
            report.unresolved += 1;
            continue;
        };
        let candidates = if m == root { Vec::new() } else { graph.triples_between(root, m) };
        let chosen = match candidates.as_slice() {
            [] => {
                report.not_adjacent += 1;
                continue;
            }
            [only] => *only,
            _ => {
                report.disambiguated += 1;
                for t in &candidates {
                    if let Entry::Vacant(slot) = predicate_scores.entry(t.predicate) {
                        slot.insert(score_predicate_against_abstract(
                            scorer,
                            &mention.abstract_text,
                            graph.predicate(t.predicate),
                        )?);
                    }
                }
                *candidates
                    .iter()
                    .min_by(|a, b| rank_candidates(a, b, &predicate_scores, root))
                    .expect("at least two candidates")
            }
        };
        summary.insert(chosen).expect("triple between root and mention");
    }
    Ok((summary, report))
}

/// Best candidate sorts first.
fn rank_candidates(a: &Triple, b: &Triple, scores: &HashMap<PredicateId, f64>, root: crate::graph::EntityId) -> Ordering {
    scores[&b.predicate]
        .total_cmp(&scores[&a.predicate])
        .then(a.predicate.cmp(&b.predicate))
        .then((a.subject != root).cmp(&(b.subject != root)))
}

/// Annotates every record in parallel; results keep the input order.
pub fn annotate_all<S: SimilarityScorer + ?Sized>(
    graph: &KnowledgeGraph,
    mentions: &[MentionRecord],
    scorer: &S,
) -> Vec<Result<(SummarySet, AnnotationReport), AnnotateError>> {
    mentions
        .par_iter()
        .map(|m| annotate(graph, m, scorer))
        .collect()
}

/// Roots whose summary has at least `k` triples, in input order.
pub fn qualify_seeds(summaries: &[(RootEntity, SummarySet)], k: usize) -> Vec<RootEntity> {
    summaries
        .iter()
        .filter(|(_, s)| s.len() >= k)
        .map(|(r, _)| r.clone())
        .collect()
}
