//! Seeded synthetic graphs and annotations for tests and benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{DatasetBundle, RootEntity, SummarySet};
use crate::graph::{EntityId, EntityRecord, KnowledgeGraph, PredicateRecord, Triple};

const PREDICATE_LABELS: [&str; 12] = [
    "spouse",
    "educated at",
    "employer",
    "country of citizenship",
    "place of birth",
    "member of",
    "award received",
    "genre",
    "director",
    "cast member",
    "author",
    "occupation",
];

fn predicate_record(p: usize) -> PredicateRecord {
    let label = PREDICATE_LABELS[p % PREDICATE_LABELS.len()];
    let label = if p < PREDICATE_LABELS.len() { label.to_string() } else { format!("{label} {p}") };
    PredicateRecord::new(format!("P{p}")).with_label(label)
}

/// Scale-free multigraph: every new node links to `links` earlier nodes
/// picked proportionally to degree, with random predicate and direction.
/// Returns a frozen, weakly connected graph.
pub fn preferential_attachment(nodes: usize, links: usize, predicates: usize, seed: u64) -> KnowledgeGraph {
    assert!(links >= 1 && predicates >= 1 && nodes > links);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = KnowledgeGraph::new();
    for i in 0..nodes {
        g.add_entity(EntityRecord::new(format!("Q{i}")).with_label(format!("entity {i}")))
            .expect("fresh ids");
    }
    for p in 0..predicates {
        g.add_predicate(predicate_record(p)).expect("fresh ids");
    }
    let link = |g: &mut KnowledgeGraph, rng: &mut ChaCha8Rng, a: u32, b: u32| {
        let p = rng.random_range(0..predicates as u32);
        let t = if rng.random_bool(0.5) { Triple::new(a, p, b) } else { Triple::new(b, p, a) };
        g.add_triple(t).expect("valid ordinals")
    };
    // endpoints repeated once per incident triple
    let mut ends: Vec<u32> = Vec::new();
    for a in 0..=links as u32 {
        for b in 0..a {
            link(&mut g, &mut rng, a, b);
            ends.extend([a, b]);
        }
    }
    for v in (links + 1) as u32..nodes as u32 {
        let mut targets = BTreeSet::new();
        while targets.len() < links {
            targets.insert(*ends.choose(&mut rng).expect("seed clique"));
        }
        for u in targets {
            if link(&mut g, &mut rng, v, u) {
                ends.extend([v, u]);
            }
        }
    }
    g.freeze();
    g
}

/// Picks `roots` entities with degree at least `k` and annotates each with
/// `k` random incident triples. Roots come back in ascending ordinal and
/// alternate between two categories.
pub fn random_annotations(graph: &KnowledgeGraph, roots: usize, k: usize, seed: u64) -> Vec<(RootEntity, SummarySet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<EntityId> = graph
        .entity_ids()
        .filter(|&v| graph.degree_unchecked(v) >= k)
        .collect();
    let mut chosen: Vec<EntityId> = eligible.choose_multiple(&mut rng, roots).copied().collect();
    chosen.sort_unstable();
    chosen
        .into_iter()
        .enumerate()
        .map(|(i, root)| {
            let incident: Vec<Triple> = graph.incident_triples(root).collect();
            let picked = incident.choose_multiple(&mut rng, k).copied();
            let set = SummarySet::from_triples(root, picked).expect("incident triples");
            let category = if i % 2 == 0 { "actor" } else { "film" };
            (RootEntity::new(root, category), set)
        })
        .collect()
}

/// `roots` disjoint stars with `candidates` leaves each, `truths` of which
/// form the root's ground truth.
pub fn star_bundle(roots: usize, candidates: usize, truths: usize, seed: u64) -> DatasetBundle {
    assert!(truths >= 1 && truths <= candidates);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = KnowledgeGraph::new();
    g.add_predicate(predicate_record(0)).expect("fresh id");
    let mut roots_out = Vec::new();
    let mut gts = BTreeMap::new();
    for r in 0..roots {
        let root = g
            .add_entity(EntityRecord::new(format!("R{r}")))
            .expect("fresh id");
        let mut star = Vec::with_capacity(candidates);
        for c in 0..candidates {
            let leaf = g
                .add_entity(EntityRecord::new(format!("R{r}L{c}")))
                .expect("fresh id");
            let t = Triple { subject: root, predicate: crate::graph::PredicateId(0), object: leaf };
            g.add_triple(t).expect("valid ordinals");
            star.push(t);
        }
        star.shuffle(&mut rng);
        gts.insert(root, SummarySet::from_triples(root, star[..truths].iter().copied()).expect("incident"));
        roots_out.push(RootEntity::new(root, "star"));
    }
    g.freeze();
    let mut b = DatasetBundle::new(g);
    b.roots = roots_out;
    b.ground_truths = gts;
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attachment_graph_is_connected_and_seeded() {
        let g = preferential_attachment(300, 2, 5, 9);
        assert_eq!(g.weakly_connected_components().len(), 1);
        assert_eq!(g.entity_count(), 300);
        let again = preferential_attachment(300, 2, 5, 9);
        assert_eq!(g.triples(), again.triples());
        let max = g.entity_ids().map(|v| g.degree(v).unwrap()).max().unwrap();
        assert!(max > 10, "expected hubs, max degree {max}");
    }

    #[test]
    fn annotations_respect_k() {
        let g = preferential_attachment(300, 3, 5, 1);
        let ann = random_annotations(&g, 10, 5, 2);
        assert_eq!(ann.len(), 10);
        assert!(ann.iter().all(|(_, s)| s.len() == 5));
    }

    #[test]
    fn star_bundle_shape() {
        let b = star_bundle(3, 6, 2, 0);
        b.validate().unwrap();
        assert_eq!(b.graph.triple_count(), 18);
        assert!(b.ground_truths.values().all(|s| s.len() == 2));
    }
}
