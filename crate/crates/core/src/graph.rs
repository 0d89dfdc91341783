//! In-memory knowledge graph: a directed multigraph of entities connected by
//! predicate-labelled triples.
//!
//! Entities and predicates get dense, 0-based ordinals in insertion order.
//! The triple set has set semantics and every triple is indexed three ways:
//! as an out-edge of its subject, an in-edge of its object and an undirected
//! incidence of both endpoints (self-loops are recorded once).
//!
//! A graph is built single-writer and then [`frozen`](KnowledgeGraph::freeze).
//! Freezing sorts every adjacency list by neighbour ordinal so traversals that
//! need a reproducible expansion order (random walks, shortest paths) can rely
//! on it. Any later mutation clears the frozen flag.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsu::DisjointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredicateId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl PredicateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PredicateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A `(subject, predicate, object)` assertion. Ordering is lexicographic on
/// the three ordinals, which is the canonical triple order used on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: PredicateId,
    pub object: EntityId,
}

impl Triple {
    pub fn new(subject: u32, predicate: u32, object: u32) -> Self {
        Self {
            subject: EntityId(subject),
            predicate: PredicateId(predicate),
            object: EntityId(object),
        }
    }

    pub fn is_incident(&self, v: EntityId) -> bool {
        self.subject == v || self.object == v
    }

    pub fn is_self_loop(&self) -> bool {
        self.subject == self.object
    }

    /// The endpoint opposite `v`; `v` itself for a self-loop.
    ///
    /// Only meaningful when `v` is incident to the triple.
    pub fn other(&self, v: EntityId) -> EntityId {
        if self.subject == v {
            self.object
        } else {
            self.subject
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub external_id: String,
    pub wikidata_label: Option<String>,
    pub wikidata_desc: Option<String>,
    pub wikipedia_title: Option<String>,
    pub wikipedia_id: Option<i64>,
}

impl EntityRecord {
    pub fn new(external_id: impl Into<String>) -> Self {
        Self {
            external_id: external_id.into(),
            ..Self::default()
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.wikidata_label = Some(label.into());
        self
    }

    /// Label if present, otherwise the external id.
    pub fn text(&self) -> &str {
        self.wikidata_label.as_deref().unwrap_or(&self.external_id)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateRecord {
    pub external_id: String,
    pub label: Option<String>,
    pub description: Option<String>,
}

impl PredicateRecord {
    pub fn new(external_id: impl Into<String>) -> Self {
        Self {
            external_id: external_id.into(),
            ..Self::default()
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    /// Text that represents the predicate for similarity scoring:
    /// label, then description, then the external id.
    pub fn text(&self) -> &str {
        self.label
            .as_deref()
            .or(self.description.as_deref())
            .unwrap_or(&self.external_id)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown entity ordinal {0}")]
    UnknownEntity(u32),
    #[error("unknown predicate ordinal {0}")]
    UnknownPredicate(u32),
    #[error("duplicate entity id {0}")]
    DuplicateEntity(String),
    #[error("duplicate predicate id {0}")]
    DuplicatePredicate(String),
    #[error("graph must be frozen before this operation")]
    NotFrozen,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: Vec<EntityRecord>,
    entity_index: HashMap<String, EntityId>,
    predicates: Vec<PredicateRecord>,
    predicate_index: HashMap<String, PredicateId>,
    triples: Vec<Triple>,
    triple_index: HashMap<Triple, u32>,
    out_edges: Vec<Vec<u32>>,
    in_edges: Vec<Vec<u32>>,
    incident: Vec<Vec<u32>>,
    frozen: bool,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_entity(&mut self, record: EntityRecord) -> Result<EntityId, GraphError> {
        if self.entity_index.contains_key(&record.external_id) {
            return Err(GraphError::DuplicateEntity(record.external_id));
        }
        let id = EntityId(self.entities.len() as u32);
        self.entity_index.insert(record.external_id.clone(), id);
        self.entities.push(record);
        self.out_edges.push(Vec::new());
        self.in_edges.push(Vec::new());
        self.incident.push(Vec::new());
        self.frozen = false;
        Ok(id)
    }

    /// Returns the ordinal of `record.external_id`, registering it first if
    /// it is new.
    pub fn ensure_entity(&mut self, record: &EntityRecord) -> EntityId {
        match self.entity_index.get(&record.external_id) {
            Some(&id) => id,
            None => self
                .add_entity(record.clone())
                .expect("external id checked above"),
        }
    }

    pub fn add_predicate(&mut self, record: PredicateRecord) -> Result<PredicateId, GraphError> {
        if self.predicate_index.contains_key(&record.external_id) {
            return Err(GraphError::DuplicatePredicate(record.external_id));
        }
        let id = PredicateId(self.predicates.len() as u32);
        self.predicate_index.insert(record.external_id.clone(), id);
        self.predicates.push(record);
        Ok(id)
    }

    pub fn ensure_predicate(&mut self, record: &PredicateRecord) -> PredicateId {
        match self.predicate_index.get(&record.external_id) {
            Some(&id) => id,
            None => self
                .add_predicate(record.clone())
                .expect("external id checked above"),
        }
    }

    /// Inserts `t`. Returns `Ok(false)` when it was already present.
    pub fn add_triple(&mut self, t: Triple) -> Result<bool, GraphError> {
        self.check_entity(t.subject)?;
        self.check_entity(t.object)?;
        if t.predicate.index() >= self.predicates.len() {
            return Err(GraphError::UnknownPredicate(t.predicate.0));
        }
        if self.triple_index.contains_key(&t) {
            return Ok(false);
        }
        let idx = self.triples.len() as u32;
        self.triples.push(t);
        self.triple_index.insert(t, idx);
        self.out_edges[t.subject.index()].push(idx);
        self.in_edges[t.object.index()].push(idx);
        self.incident[t.subject.index()].push(idx);
        if !t.is_self_loop() {
            self.incident[t.object.index()].push(idx);
        }
        self.frozen = false;
        Ok(true)
    }

    /// Sorts adjacency lists by neighbour ordinal (then predicate, then
    /// subject-side first) and marks the graph read-only for traversals.
    pub fn freeze(&mut self) {
        if self.frozen {
            return;
        }
        let triples = &self.triples;
        for (v, list) in self.incident.iter_mut().enumerate() {
            let v = EntityId(v as u32);
            list.sort_unstable_by_key(|&i| {
                let t = triples[i as usize];
                (t.other(v), t.predicate, t.subject != v)
            });
        }
        for list in self.out_edges.iter_mut() {
            list.sort_unstable_by_key(|&i| (triples[i as usize].object, triples[i as usize].predicate));
        }
        for list in self.in_edges.iter_mut() {
            list.sort_unstable_by_key(|&i| (triples[i as usize].subject, triples[i as usize].predicate));
        }
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn ensure_frozen(&self) -> Result<(), GraphError> {
        if self.frozen {
            Ok(())
        } else {
            Err(GraphError::NotFrozen)
        }
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.entities.len() as u32).map(EntityId)
    }

    pub fn entity(&self, id: EntityId) -> &EntityRecord {
        &self.entities[id.index()]
    }

    pub fn entities(&self) -> &[EntityRecord] {
        &self.entities
    }

    pub fn predicate(&self, id: PredicateId) -> &PredicateRecord {
        &self.predicates[id.index()]
    }

    pub fn predicates(&self) -> &[PredicateRecord] {
        &self.predicates
    }

    pub fn entity_by_external(&self, external_id: &str) -> Option<EntityId> {
        self.entity_index.get(external_id).copied()
    }

    pub fn predicate_by_external(&self, external_id: &str) -> Option<PredicateId> {
        self.predicate_index.get(external_id).copied()
    }

    /// Triples in insertion order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn contains_triple(&self, t: &Triple) -> bool {
        self.triple_index.contains_key(t)
    }

    pub fn contains_entity(&self, v: EntityId) -> bool {
        v.index() < self.entities.len()
    }

    pub fn check_entity(&self, v: EntityId) -> Result<(), GraphError> {
        if self.contains_entity(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownEntity(v.0))
        }
    }

    /// Number of incident triples ignoring direction; a self-loop counts once.
    pub fn degree(&self, v: EntityId) -> Result<usize, GraphError> {
        self.check_entity(v)?;
        Ok(self.incident[v.index()].len())
    }

    pub(crate) fn degree_unchecked(&self, v: EntityId) -> usize {
        self.incident[v.index()].len()
    }

    /// The `k`-th entry of `v`'s incident list.
    pub(crate) fn incident_at(&self, v: EntityId, k: usize) -> Triple {
        self.triples[self.incident[v.index()][k] as usize]
    }

    /// Incident triples of `v`, sorted by neighbour ordinal once frozen.
    pub fn incident_triples(&self, v: EntityId) -> impl Iterator<Item = Triple> + '_ {
        self.incident[v.index()]
            .iter()
            .map(move |&i| self.triples[i as usize])
    }

    pub fn out_triples(&self, v: EntityId) -> impl Iterator<Item = Triple> + '_ {
        self.out_edges[v.index()]
            .iter()
            .map(move |&i| self.triples[i as usize])
    }

    pub fn in_triples(&self, v: EntityId) -> impl Iterator<Item = Triple> + '_ {
        self.in_edges[v.index()]
            .iter()
            .map(move |&i| self.triples[i as usize])
    }

    /// Distinct undirected neighbours of `v`, ascending.
    pub fn neighbors(&self, v: EntityId) -> Vec<EntityId> {
        let mut out: Vec<EntityId> = self.incident_triples(v).map(|t| t.other(v)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All triples between `u` and `v` in either direction, canonically ordered.
    pub fn triples_between(&self, u: EntityId, v: EntityId) -> Vec<Triple> {
        let (a, b) = if self.incident[u.index()].len() <= self.incident[v.index()].len() {
            (u, v)
        } else {
            (v, u)
        };
        let mut out: Vec<Triple> = self
            .incident_triples(a)
            .filter(|t| t.other(a) == b)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, u: EntityId, v: EntityId, directed: bool) -> Result<bool, GraphError> {
        self.check_entity(u)?;
        self.check_entity(v)?;
        let forward = self.out_triples(u).any(|t| t.object == v);
        if directed || forward {
            return Ok(forward);
        }
        Ok(self.out_triples(v).any(|t| t.object == u))
    }

    /// Nodes reachable from `v` within `hops` undirected edges. `v` itself is
    /// included only when it lies on a cycle of at most `hops` triples (a
    /// self-loop, two parallel triples, or a longer cycle); stepping back
    /// along the triple just used does not count. `hops == 0` yields the
    /// empty set.
    pub fn neighborhood(&self, v: EntityId, hops: usize) -> Result<BTreeSet<EntityId>, GraphError> {
        self.check_entity(v)?;
        let mut reached = BTreeSet::new();
        if hops == 0 {
            return Ok(reached);
        }
        let mut depth: HashMap<EntityId, usize> = HashMap::from([(v, 0)]);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            let d = depth[&u];
            if d == hops {
                continue;
            }
            for t in self.incident_triples(u) {
                let w = t.other(u);
                if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(w) {
                    e.insert(d + 1);
                    reached.insert(w);
                    queue.push_back(w);
                }
            }
        }
        if self.on_cycle_within(v, hops) {
            reached.insert(v);
        }
        Ok(reached)
    }

    /// Whether `v` lies on a cycle of at most `len` triples.
    fn on_cycle_within(&self, v: EntityId, len: usize) -> bool {
        for &first in &self.incident[v.index()] {
            let t = self.triples[first as usize];
            if t.is_self_loop() {
                return true;
            }
            if len < 2 {
                continue;
            }
            // shortest way back to v that avoids the triple we left by
            let start = t.other(v);
            let mut depth: HashMap<EntityId, usize> = HashMap::from([(start, 1)]);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let d = depth[&u];
                if d == len {
                    continue;
                }
                for &ti in &self.incident[u.index()] {
                    if ti == first {
                        continue;
                    }
                    let w = self.triples[ti as usize].other(u);
                    if w == v {
                        return true;
                    }
                    if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(w) {
                        e.insert(d + 1);
                        queue.push_back(w);
                    }
                }
            }
        }
        false
    }

    /// Triples with at least one endpoint in the `hops`-hop neighbourhood of `v`.
    pub fn description(&self, v: EntityId, hops: usize) -> Result<BTreeSet<Triple>, GraphError> {
        if hops == 0 {
            return Err(GraphError::InvalidArgument(
                "description needs a hop count of at least 1".into(),
            ));
        }
        let hood = self.neighborhood(v, hops)?;
        let mut out = BTreeSet::new();
        for &u in &hood {
            out.extend(self.incident_triples(u));
        }
        Ok(out)
    }

    /// Weakly connected components, largest first; equal sizes are ordered by
    /// their smallest ordinal. Each component lists its members ascending.
    pub fn weakly_connected_components(&self) -> Vec<Vec<EntityId>> {
        let mut dsu = DisjointSet::new(self.entities.len());
        for t in &self.triples {
            dsu.union(t.subject.index(), t.object.index());
        }
        let mut by_root: HashMap<usize, Vec<EntityId>> = HashMap::new();
        for v in self.entity_ids() {
            by_root.entry(dsu.find(v.index())).or_default().push(v);
        }
        let mut comps: Vec<Vec<EntityId>> = by_root.into_values().collect();
        // members were pushed in ascending order, so comp[0] is the minimum
        comps.sort_unstable_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }

    /// Undirected shortest path from `src` to any member of `targets` with at
    /// most `max_len` edges. Neighbours are expanded in ascending ordinal, so
    /// among equal-length paths the one through lower ordinals wins. The
    /// returned triples are graph triples, walked from `src` outwards.
    /// `src` in `targets` yields an empty path.
    pub fn shortest_path(
        &self,
        src: EntityId,
        targets: &HashSet<EntityId>,
        max_len: usize,
    ) -> Result<Option<Vec<Triple>>, GraphError> {
        self.check_entity(src)?;
        self.ensure_frozen()?;
        if max_len == 0 {
            return Err(GraphError::InvalidArgument("max_len must be at least 1".into()));
        }
        if targets.contains(&src) {
            return Ok(Some(Vec::new()));
        }
        // node -> (depth, triple index used to reach it)
        let mut seen: HashMap<EntityId, (usize, u32)> = HashMap::new();
        seen.insert(src, (0, u32::MAX));
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = seen[&u].0;
            if d == max_len {
                continue;
            }
            for &ti in &self.incident[u.index()] {
                let w = self.triples[ti as usize].other(u);
                if seen.contains_key(&w) {
                    continue;
                }
                seen.insert(w, (d + 1, ti));
                if targets.contains(&w) {
                    return Ok(Some(self.unwind_path(&seen, src, w)));
                }
                queue.push_back(w);
            }
        }
        Ok(None)
    }

    fn unwind_path(&self, seen: &HashMap<EntityId, (usize, u32)>, src: EntityId, end: EntityId) -> Vec<Triple> {
        let mut path = Vec::new();
        let mut cur = end;
        while cur != src {
            let t = self.triples[seen[&cur].1 as usize];
            path.push(t);
            cur = t.other(cur);
        }
        path.reverse();
        path
    }
}
