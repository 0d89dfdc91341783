//! Size, density and connectivity summary of a bundle.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::bundle::DatasetBundle;
use crate::graph::KnowledgeGraph;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub entities: usize,
    /// Triple count.
    pub relations: usize,
    pub targets: usize,
    /// Distinct connected unordered node pairs over `n(n-1)/2`.
    pub density: f64,
    /// Distinct linked ordered node pairs over `n(n-1)`.
    pub directed_density: f64,
    pub connected: bool,
    pub components: usize,
    pub min_degree: usize,
    pub max_degree: usize,
}

pub fn graph_stats(graph: &KnowledgeGraph, targets: usize) -> DatasetStats {
    let n = graph.entity_count();
    let mut undirected = HashSet::new();
    let mut directed = HashSet::new();
    for t in graph.triples() {
        if t.is_self_loop() {
            continue;
        }
        directed.insert((t.subject, t.object));
        undirected.insert((t.subject.min(t.object), t.subject.max(t.object)));
    }
    let ordered_pairs = n as f64 * (n as f64 - 1.0);
    let (density, directed_density) = if n < 2 {
        (0.0, 0.0)
    } else {
        (2.0 * undirected.len() as f64 / ordered_pairs, directed.len() as f64 / ordered_pairs)
    };
    let degrees = graph.entity_ids().map(|v| graph.degree_unchecked(v));
    let (min_degree, max_degree) = degrees.fold((usize::MAX, 0), |(lo, hi), d| (lo.min(d), hi.max(d)));
    let components = graph.weakly_connected_components().len();
    DatasetStats {
        entities: n,
        relations: graph.triple_count(),
        targets,
        density,
        directed_density,
        connected: components == 1,
        components,
        min_degree: if n == 0 { 0 } else { min_degree },
        max_degree,
    }
}

pub fn dataset_stats(bundle: &DatasetBundle) -> DatasetStats {
    graph_stats(&bundle.graph, bundle.roots.len())
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "entities          {}", self.entities)?;
        writeln!(f, "relations         {}", self.relations)?;
        writeln!(f, "targets           {}", self.targets)?;
        writeln!(f, "density           {:.6}", self.density)?;
        writeln!(f, "directed_density  {:.6}", self.directed_density)?;
        writeln!(f, "connected         {}", self.connected)?;
        writeln!(f, "components        {}", self.components)?;
        writeln!(f, "min_degree        {}", self.min_degree)?;
        write!(f, "max_degree        {}", self.max_degree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EntityRecord, PredicateRecord, Triple};

    fn graph(n: usize, triples: &[(u32, u32, u32)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for i in 0..n {
            g.add_entity(EntityRecord::new(format!("Q{i}"))).unwrap();
        }
        g.add_predicate(PredicateRecord::new("P0")).unwrap();
        g.add_predicate(PredicateRecord::new("P1")).unwrap();
        for &(s, p, o) in triples {
            g.add_triple(Triple::new(s, p, o)).unwrap();
        }
        g.freeze();
        g
    }

    #[test]
    fn triangle_and_pair() {
        let s = graph_stats(&graph(3, &[(0, 0, 1), (1, 0, 2), (2, 0, 0)]), 1);
        assert_eq!(s.density, 1.0);
        assert_eq!(s.directed_density, 0.5);
        assert!(s.connected);
        let s = graph_stats(&graph(2, &[(0, 0, 1)]), 0);
        assert_eq!(s.density, 1.0);
        assert_eq!((s.min_degree, s.max_degree), (1, 1));
    }

    #[test]
    fn parallel_triples_count_once_for_density() {
        let s = graph_stats(&graph(4, &[(0, 0, 1), (0, 1, 1), (1, 0, 0), (2, 0, 2)]), 0);
        assert_eq!(s.relations, 4);
        assert!((s.density - 1.0 / 6.0).abs() < 1e-15);
        assert!((s.directed_density - 2.0 / 12.0).abs() < 1e-15);
        assert_eq!(s.components, 3);
        assert_eq!((s.min_degree, s.max_degree), (0, 3));
    }

    #[test]
    fn empty_graph() {
        let s = graph_stats(&graph(0, &[]), 0);
        assert_eq!((s.entities, s.components, s.min_degree, s.density), (0, 0, 0, 0.0));
        assert!(!s.connected);
    }
}
