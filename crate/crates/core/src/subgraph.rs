//! Moving bundles between their own ordinals and those of the source graph.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::bundle::{BundleMeta, DatasetBundle, RootEntity, SummarySet};
use crate::graph::{EntityId, KnowledgeGraph, PredicateId, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubgraphError {
    #[error("entity {0} does not exist in the source graph")]
    EntityNotInSource(String),
    #[error("predicate {0} does not exist in the source graph")]
    PredicateNotInSource(String),
    #[error("triple ({0}, {1}, {2}) does not exist in the source graph")]
    TripleNotInSource(String, String, String),
}

/// A bundle expressed in source-graph ordinals.
#[derive(Debug, Clone, Default)]
pub(crate) struct Selection {
    pub nodes: BTreeSet<EntityId>,
    pub triples: BTreeSet<Triple>,
    pub roots: Vec<RootEntity>,
    pub truths: BTreeMap<EntityId, SummarySet>,
}

impl Selection {
    pub fn add_triple(&mut self, t: Triple) -> bool {
        self.nodes.insert(t.subject);
        self.nodes.insert(t.object);
        self.triples.insert(t)
    }
}

/// Builds a bundle whose entities and predicates are ordered by source
/// ordinal, so equal selections always produce identical bundles.
pub(crate) fn project(source: &KnowledgeGraph, sel: &Selection, meta: BundleMeta) -> DatasetBundle {
    let mut nodes = sel.nodes.clone();
    nodes.extend(sel.triples.iter().flat_map(|t| [t.subject, t.object]));
    nodes.extend(sel.roots.iter().map(|r| r.entity));
    let predicates: BTreeSet<PredicateId> = sel.triples.iter().map(|t| t.predicate).collect();

    let mut graph = KnowledgeGraph::new();
    let mut entity_map = BTreeMap::new();
    for v in nodes {
        let id = graph
            .add_entity(source.entity(v).clone())
            .expect("source external ids are unique");
        entity_map.insert(v, id);
    }
    let mut predicate_map = BTreeMap::new();
    for p in predicates {
        let id = graph
            .add_predicate(source.predicate(p).clone())
            .expect("source external ids are unique");
        predicate_map.insert(p, id);
    }
    let map = |t: &Triple| Triple {
        subject: entity_map[&t.subject],
        predicate: predicate_map[&t.predicate],
        object: entity_map[&t.object],
    };
    for t in &sel.triples {
        graph.add_triple(map(t)).expect("endpoints registered");
    }
    graph.freeze();

    let roots = sel
        .roots
        .iter()
        .map(|r| RootEntity::new(entity_map[&r.entity], r.category.clone()))
        .collect();
    let ground_truths = sel
        .truths
        .iter()
        .map(|(root, set)| {
            let id = entity_map[root];
            let set = SummarySet::from_triples(id, set.triples().iter().map(map))
                .expect("mapping preserves incidence");
            (id, set)
        })
        .collect();
    DatasetBundle {
        graph,
        roots,
        ground_truths,
        meta,
    }
}

/// Re-expresses `bundle` in `source` ordinals, matching by external id.
pub(crate) fn lift(bundle: &DatasetBundle, source: &KnowledgeGraph) -> Result<Selection, SubgraphError> {
    let g = &bundle.graph;
    let entity = |v: EntityId| {
        let ext = &g.entity(v).external_id;
        source
            .entity_by_external(ext)
            .ok_or_else(|| SubgraphError::EntityNotInSource(ext.clone()))
    };
    let mut entity_map = Vec::with_capacity(g.entity_count());
    for v in g.entity_ids() {
        entity_map.push(entity(v)?);
    }
    let mut predicate_map = Vec::with_capacity(g.predicate_count());
    for p in g.predicates() {
        predicate_map.push(
            source
                .predicate_by_external(&p.external_id)
                .ok_or_else(|| SubgraphError::PredicateNotInSource(p.external_id.clone()))?,
        );
    }
    let map = |t: &Triple| -> Result<Triple, SubgraphError> {
        let lifted = Triple {
            subject: entity_map[t.subject.index()],
            predicate: predicate_map[t.predicate.index()],
            object: entity_map[t.object.index()],
        };
        if source.contains_triple(&lifted) {
            Ok(lifted)
        } else {
            Err(SubgraphError::TripleNotInSource(
                g.entity(t.subject).external_id.clone(),
                g.predicate(t.predicate).external_id.clone(),
                g.entity(t.object).external_id.clone(),
            ))
        }
    };

    let mut sel = Selection {
        nodes: entity_map.iter().copied().collect(),
        ..Selection::default()
    };
    for t in g.triples() {
        sel.triples.insert(map(t)?);
    }
    sel.roots = bundle
        .roots
        .iter()
        .map(|r| RootEntity::new(entity_map[r.entity.index()], r.category.clone()))
        .collect();
    for (root, set) in &bundle.ground_truths {
        let lifted_root = entity_map[root.index()];
        let mut lifted = SummarySet::new(lifted_root);
        for t in set.triples() {
            lifted.insert(map(t)?).expect("mapping preserves incidence");
        }
        sel.truths.insert(lifted_root, lifted);
    }
    Ok(sel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EntityRecord, PredicateRecord};

    fn source() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for i in 0..5 {
            g.add_entity(EntityRecord::new(format!("Q{i}"))).unwrap();
        }
        g.add_predicate(PredicateRecord::new("P0")).unwrap();
        g.add_predicate(PredicateRecord::new("P1")).unwrap();
        for (s, p, o) in [(0, 0, 1), (1, 1, 2), (3, 0, 4), (4, 1, 0)] {
            g.add_triple(Triple::new(s, p, o)).unwrap();
        }
        g.freeze();
        g
    }

    #[test]
    fn project_then_lift_round_trips() {
        let src = source();
        let mut sel = Selection::default();
        sel.add_triple(Triple::new(3, 0, 4));
        sel.add_triple(Triple::new(1, 1, 2));
        sel.roots.push(RootEntity::new(EntityId(4), "x"));
        sel.truths.insert(
            EntityId(4),
            SummarySet::from_triples(EntityId(4), [Triple::new(3, 0, 4)]).unwrap(),
        );
        let bundle = project(&src, &sel, BundleMeta::default());
        let ext: Vec<&str> = bundle.graph.entities().iter().map(|e| e.external_id.as_str()).collect();
        assert_eq!(ext, vec!["Q1", "Q2", "Q3", "Q4"]);
        bundle.validate().unwrap();

        let back = lift(&bundle, &src).unwrap();
        assert_eq!(back.triples, sel.triples);
        assert_eq!(back.roots, sel.roots);
        assert_eq!(back.truths, sel.truths);
    }

    #[test]
    fn lift_rejects_foreign_content() {
        let src = source();
        let mut g = KnowledgeGraph::new();
        g.add_entity(EntityRecord::new("Q0")).unwrap();
        g.add_entity(EntityRecord::new("Q2")).unwrap();
        g.add_predicate(PredicateRecord::new("P0")).unwrap();
        g.add_triple(Triple::new(0, 0, 1)).unwrap();
        g.freeze();
        let err = lift(&DatasetBundle::new(g.clone()), &src).unwrap_err();
        assert!(matches!(err, SubgraphError::TripleNotInSource(..)));
        g.add_entity(EntityRecord::new("Q99")).unwrap();
        let err = lift(&DatasetBundle::new(g), &src).unwrap_err();
        assert_eq!(err, SubgraphError::EntityNotInSource("Q99".into()));
    }
}
