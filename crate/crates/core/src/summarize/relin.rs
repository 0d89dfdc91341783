//! Relatedness-and-informativeness ranking over a root's candidate triples.
//!
//! The candidates form a complete graph. A surfer jumps to triple `t` with
//! probability proportional to its informativeness
//! `si(t) = -ln(n(p, v) / |T|)`, where `n(p, v)` counts bundle triples with
//! predicate `p` touching the neighbour `v`, and otherwise follows a link
//! with weight `sqrt(sim_p * sim_v)` (normalised lexical similarity of the
//! predicate texts and of the neighbour texts). Triples are ranked by the
//! stationary distribution
//!
//! ```text
//! pr(t) = (1 - d) p_J(t) + d * sum_{t' != t} pr(t') p_M(t', t)
//! ```

use rayon::prelude::*;

use super::{candidates, RankedSummary, SummarizeError, Summarizer, DAMPING, MAX_ITER, TOLERANCE};
use crate::bundle::DatasetBundle;
use crate::graph::{EntityId, Triple};
use crate::similarity::normalized_lexical_similarity;

#[derive(Debug, Clone, PartialEq)]
pub struct RelinScores {
    pub triples: Vec<Triple>,
    /// Jump distribution `p_J`.
    pub jump: Vec<f64>,
    /// Row-stochastic transition matrix `p_M`, zero on the diagonal.
    pub transition: Vec<Vec<f64>>,
    pub pr: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Normalises `weights` to sum 1, or uniform when they are all zero.
fn normalise(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    } else if !weights.is_empty() {
        let u = 1.0 / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = u);
    }
}

/// Iterates the fixed point from `jump` until the L1 change drops below
/// `tol`. Returns `(pr, iterations, converged)`.
pub fn relin_fixed_point(
    jump: &[f64],
    transition: &[Vec<f64>],
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, bool) {
    let n = jump.len();
    let mut pr = jump.to_vec();
    let mut next = vec![0.0; n];
    for it in 1..=max_iter {
        for (j, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = (0..n).map(|i| pr[i] * transition[i][j]).sum();
            *slot = (1.0 - damping) * jump[j] + damping * inflow;
        }
        let delta: f64 = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pr, &mut next);
        if delta < tol {
            return (pr, it, true);
        }
    }
    (pr, max_iter, false)
}

pub fn relin_scores(
    bundle: &DatasetBundle,
    root: EntityId,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RelinScores, SummarizeError> {
    let triples = candidates(bundle, root)?;
    let g = &bundle.graph;
    let n = triples.len();
    if n <= 1 {
        return Ok(RelinScores {
            jump: vec![1.0; n],
            transition: vec![vec![0.0; n]; n],
            pr: vec![1.0; n],
            triples,
            iterations: 0,
            converged: true,
        });
    }

    let total = g.triple_count() as f64;
    let mut jump: Vec<f64> = triples
        .iter()
        .map(|t| {
            let v = t.other(root);
            let count = g.incident_triples(v).filter(|x| x.predicate == t.predicate).count() as f64;
            -(count / total).ln()
        })
        .collect();
    normalise(&mut jump);

    let pred_text: Vec<&str> = triples.iter().map(|t| g.predicate(t.predicate).text()).collect();
    let value_text: Vec<&str> = triples.iter().map(|t| g.entity(t.other(root)).text()).collect();
    let transition: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| {
                    if i == j {
                        return 0.0;
                    }
                    let sp = normalized_lexical_similarity(pred_text[i], pred_text[j]);
                    let sv = normalized_lexical_similarity(value_text[i], value_text[j]);
                    (sp * sv).sqrt()
                })
                .collect();
            if row.iter().sum::<f64>() > 0.0 {
                normalise(&mut row);
            } else {
                let u = 1.0 / (n - 1) as f64;
                row.iter_mut().enumerate().for_each(|(j, w)| *w = if j == i { 0.0 } else { u });
            }
            row
        })
        .collect();

    let (pr, iterations, converged) = relin_fixed_point(&jump, &transition, damping, tol, max_iter);
    Ok(RelinScores {
        triples,
        jump,
        transition,
        pr,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RelinSummarizer {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RelinSummarizer {
    fn default() -> Self {
        Self {
            damping: DAMPING,
            tol: TOLERANCE,
            max_iter: MAX_ITER,
        }
    }
}

impl Summarizer for RelinSummarizer {
    fn name(&self) -> &str {
        "relin"
    }

    fn summarize(&self, bundle: &DatasetBundle, root: EntityId) -> Result<RankedSummary, SummarizeError> {
        let s = relin_scores(bundle, root, self.damping, self.tol, self.max_iter)?;
        if !s.converged {
            log::warn!("relin did not converge for root {root} after {} iterations", s.iterations);
        }
        Ok(RankedSummary::from_scores(root, s.triples.into_iter().zip(s.pr).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::bundle;
    use super::*;
    use nalgebra::{DMatrix, DVector};

    /// Direct solve of `(I - d M^T) pr = (1 - d) p_J`.
    fn solve(jump: &[f64], m: &[Vec<f64>], d: f64) -> Vec<f64> {
        let n = jump.len();
        let mt = DMatrix::from_fn(n, n, |r, c| m[c][r]);
        let a = DMatrix::<f64>::identity(n, n) - mt * d;
        let rhs = DVector::from_iterator(n, jump.iter().map(|j| (1.0 - d) * j));
        a.lu().solve(&rhs).unwrap().iter().copied().collect()
    }

    #[test]
    fn hand_built_matrix_matches_solve() {
        let jump = [0.5, 0.3, 0.2];
        let m = vec![vec![0.0, 0.75, 0.25], vec![0.5, 0.0, 0.5], vec![0.9, 0.1, 0.0]];
        let (pr, _, converged) = relin_fixed_point(&jump, &m, 0.85, 1e-14, 10_000);
        assert!(converged);
        for (a, b) in pr.iter().zip(solve(&jump, &m, 0.85)) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn single_candidate() {
        let b = bundle(2, 1, &[(0, 0, 1)]);
        let s = relin_scores(&b, EntityId(0), DAMPING, TOLERANCE, MAX_ITER).unwrap();
        assert_eq!(s.pr, vec![1.0]);
        assert!(relin_scores(&bundle(2, 1, &[]), EntityId(0), DAMPING, TOLERANCE, MAX_ITER).unwrap().pr.is_empty());
    }

    #[test]
    fn jump_only_ranks_by_informativeness() {
        // neighbour 1 carries predicate 0 on many triples: least informative
        let mut edges: Vec<(u32, u32, u32)> = (3..8).map(|i| (1, 0, i)).collect();
        edges.extend([(0, 0, 1), (0, 1, 2)]);
        let b = bundle(8, 2, &edges);
        let s = relin_scores(&b, EntityId(0), 0.0, TOLERANCE, MAX_ITER).unwrap();
        assert_eq!(s.pr, s.jump);
        let r = RelinSummarizer { damping: 0.0, ..RelinSummarizer::default() }.summarize(&b, EntityId(0)).unwrap();
        assert_eq!(r.top(1), vec![Triple::new(0, 1, 2)]);
    }

    #[test]
    fn bundle_scores_match_solve() {
        let b = bundle(7, 3, &[(0, 0, 1), (0, 1, 2), (3, 2, 0), (0, 0, 4), (5, 1, 0), (0, 2, 6), (1, 0, 2), (4, 1, 5)]);
        let s = relin_scores(&b, EntityId(0), DAMPING, 1e-13, 10_000).unwrap();
        assert_eq!(s.triples.len(), 6);
        assert!((s.pr.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert!(s.pr.iter().all(|&p| p >= 0.0));
        for row in &s.transition {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for (a, b) in s.pr.iter().zip(solve(&s.jump, &s.transition, DAMPING)) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
