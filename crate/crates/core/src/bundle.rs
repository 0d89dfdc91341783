//! Benchmark datasets: a sampled graph, its root entities and their
//! ground-truth summaries.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EntityId, KnowledgeGraph, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootEntity {
    pub entity: EntityId,
    pub category: String,
}

impl RootEntity {
    pub fn new(entity: EntityId, category: impl Into<String>) -> Self {
        Self {
            entity,
            category: category.into(),
        }
    }
}

/// Ground-truth summary of one root. Every triple touches the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummarySet {
    root: EntityId,
    triples: BTreeSet<Triple>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("root {0} is not an entity of the graph")]
    UnknownRoot(EntityId),
    #[error("non-incident ground truth ({s}, {p}, {o}) for root {root}", s = .triple.subject, p = .triple.predicate, o = .triple.object)]
    NonIncident { root: EntityId, triple: Triple },
    #[error("ground truth ({s}, {p}, {o}) for root {root} is not a graph triple", s = .triple.subject, p = .triple.predicate, o = .triple.object)]
    MissingTriple { root: EntityId, triple: Triple },
    #[error("root {0} listed twice")]
    DuplicateRoot(EntityId),
}

impl SummarySet {
    pub fn new(root: EntityId) -> Self {
        Self {
            root,
            triples: BTreeSet::new(),
        }
    }

    pub fn from_triples(
        root: EntityId,
        triples: impl IntoIterator<Item = Triple>,
    ) -> Result<Self, BundleError> {
        let mut set = Self::new(root);
        for t in triples {
            set.insert(t)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, t: Triple) -> Result<bool, BundleError> {
        if !t.is_incident(self.root) {
            return Err(BundleError::NonIncident {
                root: self.root,
                triple: t,
            });
        }
        Ok(self.triples.insert(t))
    }

    pub fn root(&self) -> EntityId {
        self.root
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }
}

/// Generator configuration. Field names follow the generator's parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub min_valid_summary_edges: usize,
    pub random_walk_depth_len: usize,
    pub bridges_number: usize,
    pub max_threads: usize,
    pub min_random_walk_number: u32,
    pub max_random_walk_number: u32,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        let (min, max) = SizePreset::Small.walk_limits();
        Self {
            min_valid_summary_edges: 5,
            random_walk_depth_len: 3,
            bridges_number: 5,
            max_threads: 4,
            min_random_walk_number: min,
            max_random_walk_number: max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizePreset {
    Small,
    Medium,
    Large,
}

impl SizePreset {
    /// `(minRW, maxRW)` walk-count limits for the preset.
    pub fn walk_limits(self) -> (u32, u32) {
        match self {
            SizePreset::Small => (100, 300),
            SizePreset::Medium => (150, 600),
            SizePreset::Large => (300, 1800),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SizePreset::Small => "s",
            SizePreset::Medium => "m",
            SizePreset::Large => "l",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub variant: String,
    pub size: String,
    pub split: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GeneratorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for BundleMeta {
    fn default() -> Self {
        Self {
            variant: "custom".into(),
            size: "c".into(),
            split: "full".into(),
            params: None,
            seed: None,
        }
    }
}

impl BundleMeta {
    /// File-name prefix `{variant}-{size}-{split}`.
    pub fn prefix(&self) -> String {
        format!("{}-{}-{}", self.variant, self.size, self.split)
    }

    /// Best-effort inverse of [`prefix`](Self::prefix); anything that does
    /// not split into three parts becomes the variant.
    pub fn from_prefix(prefix: &str) -> Self {
        let parts: Vec<&str> = prefix.rsplitn(3, '-').collect();
        match parts.as_slice() {
            [split, size, variant] => Self {
                variant: variant.to_string(),
                size: size.to_string(),
                split: split.to_string(),
                ..Self::default()
            },
            _ => Self {
                variant: prefix.to_string(),
                ..Self::default()
            },
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DatasetBundle {
    pub graph: KnowledgeGraph,
    pub roots: Vec<RootEntity>,
    pub ground_truths: BTreeMap<EntityId, SummarySet>,
    pub meta: BundleMeta,
}

impl DatasetBundle {
    pub fn new(graph: KnowledgeGraph) -> Self {
        Self {
            graph,
            ..Self::default()
        }
    }

    pub fn truth(&self, root: EntityId) -> Option<&SummarySet> {
        self.ground_truths.get(&root)
    }

    /// Checks roots and ground truths against the graph.
    pub fn validate(&self) -> Result<(), BundleError> {
        let mut seen = BTreeSet::new();
        for r in &self.roots {
            if !self.graph.contains_entity(r.entity) {
                return Err(BundleError::UnknownRoot(r.entity));
            }
            if !seen.insert(r.entity) {
                return Err(BundleError::DuplicateRoot(r.entity));
            }
        }
        for (root, set) in &self.ground_truths {
            if !self.graph.contains_entity(*root) {
                return Err(BundleError::UnknownRoot(*root));
            }
            for t in set.triples() {
                if !t.is_incident(*root) {
                    return Err(BundleError::NonIncident { root: *root, triple: *t });
                }
                if !self.graph.contains_triple(t) {
                    return Err(BundleError::MissingTriple { root: *root, triple: *t });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EntityRecord, PredicateRecord};

    #[test]
    fn summary_rejects_non_incident() {
        let mut s = SummarySet::new(EntityId(0));
        assert!(s.insert(Triple::new(0, 0, 1)).unwrap());
        assert!(s.insert(Triple::new(2, 0, 0)).unwrap());
        assert!(!s.insert(Triple::new(0, 0, 1)).unwrap());
        let err = s.insert(Triple::new(1, 0, 2)).unwrap_err();
        assert!(err.to_string().starts_with("non-incident ground truth"));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn presets() {
        assert_eq!(SizePreset::Small.walk_limits(), (100, 300));
        assert_eq!(SizePreset::Medium.walk_limits(), (150, 600));
        assert_eq!(SizePreset::Large.walk_limits(), (300, 1800));
        let p = GeneratorParams::default();
        assert_eq!(
            (p.min_valid_summary_edges, p.random_walk_depth_len, p.bridges_number, p.max_threads),
            (5, 3, 5, 4)
        );
    }

    #[test]
    fn prefix_round_trip() {
        let meta = BundleMeta {
            variant: "WikiLitArt".into(),
            size: "s".into(),
            split: "train".into(),
            ..BundleMeta::default()
        };
        assert_eq!(meta.prefix(), "WikiLitArt-s-train");
        assert_eq!(BundleMeta::from_prefix("WikiLitArt-s-train"), meta);
        assert_eq!(BundleMeta::from_prefix("toy").variant, "toy");
    }

    #[test]
    fn validate_catches_missing_triple() {
        let mut g = KnowledgeGraph::new();
        g.add_entity(EntityRecord::new("Q1")).unwrap();
        g.add_entity(EntityRecord::new("Q2")).unwrap();
        g.add_predicate(PredicateRecord::new("P1")).unwrap();
        let mut b = DatasetBundle::new(g);
        b.roots.push(RootEntity::new(EntityId(0), "actor"));
        b.ground_truths.insert(
            EntityId(0),
            SummarySet::from_triples(EntityId(0), [Triple::new(0, 0, 1)]).unwrap(),
        );
        assert!(matches!(b.validate(), Err(BundleError::MissingTriple { .. })));
        b.graph.add_triple(Triple::new(0, 0, 1)).unwrap();
        assert!(b.validate().is_ok());
        b.roots.push(RootEntity::new(EntityId(0), "actor"));
        assert_eq!(b.validate(), Err(BundleError::DuplicateRoot(EntityId(0))));
    }
}
