use super::{candidates, RankedSummary, SummarizeError, Summarizer};
use crate::bundle::DatasetBundle;
use crate::graph::{EntityId, KnowledgeGraph};

pub const DAMPING: f64 = 0.85;
pub const TOLERANCE: f64 = 1e-9;
pub const MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration over the directed links of `graph`. Parallel triples
/// between the same ordered pair form a single link; dangling nodes spread
/// their mass uniformly.
pub fn pagerank(graph: &KnowledgeGraph, damping: f64, tol: f64, max_iter: usize) -> PageRank {
    let n = graph.entity_count();
    if n == 0 {
        return PageRank { scores: Vec::new(), iterations: 0, converged: true };
    }
    let links: Vec<Vec<usize>> = graph
        .entity_ids()
        .map(|u| {
            let mut out: Vec<usize> = graph.out_triples(u).map(|t| t.object.index()).collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let nf = n as f64;
    let mut pr = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for it in 1..=max_iter {
        let dangling: f64 = links
            .iter()
            .zip(&pr)
            .filter(|(l, _)| l.is_empty())
            .map(|(_, p)| p)
            .sum();
        next.fill((1.0 - damping) / nf + damping * dangling / nf);
        for (u, out) in links.iter().enumerate() {
            if out.is_empty() {
                continue;
            }
            let share = damping * pr[u] / out.len() as f64;
            for &v in out {
                next[v] += share;
            }
        }
        let delta: f64 = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pr, &mut next);
        if delta < tol {
            return PageRank { scores: pr, iterations: it, converged: true };
        }
    }
    PageRank { scores: pr, iterations: max_iter, converged: false }
}

/// Ranks a root's triples by the PageRank of the neighbour.
#[derive(Debug, Clone)]
pub struct PageRankSummarizer {
    scores: Vec<f64>,
}

impl PageRankSummarizer {
    pub fn new(bundle: &DatasetBundle) -> Self {
        let pr = pagerank(&bundle.graph, DAMPING, TOLERANCE, MAX_ITER);
        if !pr.converged {
            log::warn!("PageRank stopped after {} iterations without converging", pr.iterations);
        }
        Self { scores: pr.scores }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

impl Summarizer for PageRankSummarizer {
    fn name(&self) -> &str {
        "pagerank"
    }

    fn summarize(&self, bundle: &DatasetBundle, root: EntityId) -> Result<RankedSummary, SummarizeError> {
        let scored = candidates(bundle, root)?
            .into_iter()
            .map(|t| (t, self.scores[t.other(root).index()]))
            .collect();
        Ok(RankedSummary::from_scores(root, scored))
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::bundle;
    use super::*;
    use crate::graph::Triple;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    #[test]
    fn directed_cycle_is_uniform() {
        let b = bundle(3, 1, &[(0, 0, 1), (1, 0, 2), (2, 0, 0)]);
        let pr = pagerank(&b.graph, DAMPING, TOLERANCE, MAX_ITER);
        for s in &pr.scores {
            assert!((s - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_node_closed_form() {
        // b is dangling: pr_a = (1-d)/2 + d pr_b / 2 with pr_a + pr_b = 1
        // gives pr_a = 1 / (2 + d)
        let b = bundle(2, 2, &[(0, 0, 1), (0, 1, 1)]);
        let pr = pagerank(&b.graph, DAMPING, 1e-14, 1000);
        let a = 1.0 / (2.0 + DAMPING);
        assert!((pr.scores[0] - a).abs() < 1e-10);
        assert!((pr.scores[1] - (1.0 - a)).abs() < 1e-10);
    }

    /// Dense linear solve of the same stationary equations.
    fn oracle(n: usize, edges: &[(u32, u32, u32)], d: f64) -> Vec<f64> {
        let mut adj = vec![vec![false; n]; n];
        for &(s, _, o) in edges {
            adj[s as usize][o as usize] = true;
        }
        // column-stochastic transition with dangling columns uniform
        let mut m = DMatrix::<f64>::zeros(n, n);
        for u in 0..n {
            let out = adj[u].iter().filter(|&&x| x).count();
            for v in 0..n {
                m[(v, u)] = if out == 0 { 1.0 / n as f64 } else if adj[u][v] { 1.0 / out as f64 } else { 0.0 };
            }
        }
        let a = DMatrix::<f64>::identity(n, n) - m * d;
        let rhs = DVector::from_element(n, (1.0 - d) / n as f64);
        a.lu().solve(&rhs).unwrap().iter().copied().collect()
    }

    proptest! {
        #[test]
        fn sums_to_one_and_matches_solve(edges in proptest::collection::vec((0u32..8, 0u32..2, 0u32..8), 0..30)) {
            let b = bundle(8, 2, &edges);
            let pr = pagerank(&b.graph, DAMPING, 1e-13, 2000);
            prop_assert!((pr.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let expect = oracle(8, &edges, DAMPING);
            for (x, y) in pr.scores.iter().zip(&expect) {
                prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn hub_neighbour_ranks_first() {
        // 1 receives links from many nodes; 2 from none
        let mut edges: Vec<(u32, u32, u32)> = (3..9).map(|i| (i, 0, 1)).collect();
        edges.push((0, 0, 1));
        edges.push((0, 1, 2));
        let b = bundle(9, 2, &edges);
        let s = PageRankSummarizer::new(&b);
        assert_eq!(s.summarize(&b, EntityId(0)).unwrap().top(1), vec![Triple::new(0, 0, 1)]);
    }

    #[test]
    fn equal_scores_fall_back_to_predicate_order() {
        let b = bundle(3, 2, &[(0, 1, 1), (0, 0, 2)]);
        let s = PageRankSummarizer::new(&b);
        assert_eq!(s.summarize(&b, EntityId(0)).unwrap().top(2), vec![Triple::new(0, 0, 2), Triple::new(0, 1, 1)]);
    }
}
