//! Text similarity used to pick between parallel relations.
//!
//! [`SimilarityScorer`] is the pluggable contract; scores are only compared
//! within one scorer, and only their argmax matters to the annotator. The
//! built-in [`LexicalScorer`] is a string metric in the I-Sub family:
//!
//! ```text
//! Sim(a, b) = Comm(a, b) - Diff(a, b) + winkler(a, b)
//! ```
//!
//! * `Comm = 2 * sum(|common substrings|) / (|a| + |b|)`, where common
//!   substrings are found by repeatedly removing the longest common substring
//!   (of length >= 3) from both strings.
//! * `Diff = ua * ub / (p + (1 - p) * (ua + ub - ua * ub))` with `ua`, `ub`
//!   the unmatched fractions of each string and Hamacher `p = 0.6`.
//! * `winkler = 0.1 * min(common prefix, 4)`.
//!
//! Input is case-folded. Values lie in `[-1, 1.4]`.

mod worker;

use thiserror::Error;

use crate::graph::PredicateRecord;

pub use worker::WorkerScorer;

pub const HAMACHER_P: f64 = 0.6;
pub const PREFIX_SCALE: f64 = 0.1;
pub const MAX_PREFIX: usize = 4;
pub const MIN_COMMON_SUBSTRING: usize = 3;

/// Upper bound of [`lexical_similarity`].
pub const LEXICAL_MAX: f64 = 1.0 + PREFIX_SCALE * MAX_PREFIX as f64;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("scorer protocol error: {0}")]
    Protocol(String),
    #[error("scorer I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub trait SimilarityScorer: Send + Sync {
    /// Larger means more similar.
    fn score(&self, a: &str, b: &str) -> Result<f64, ScoreError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

impl SimilarityScorer for LexicalScorer {
    fn score(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        Ok(lexical_similarity(a, b))
    }
}

impl<S: SimilarityScorer + ?Sized> SimilarityScorer for &S {
    fn score(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        (**self).score(a, b)
    }
}

impl<S: SimilarityScorer + ?Sized> SimilarityScorer for Box<S> {
    fn score(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        (**self).score(a, b)
    }
}

pub fn lexical_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    // tie-breaking inside the substring search depends on argument order
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let (la, lb) = (a.len() as f64, b.len() as f64);

    let common = common_substring_length(&a, &b) as f64;
    let comm = if la + lb == 0.0 { 0.0 } else { 2.0 * common / (la + lb) };

    let ua = if la == 0.0 { 0.0 } else { (la - common) / la };
    let ub = if lb == 0.0 { 0.0 } else { (lb - common) / lb };
    let product = ua * ub;
    let diff = product / (HAMACHER_P + (1.0 - HAMACHER_P) * (ua + ub - product));

    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count().min(MAX_PREFIX);
    comm - diff + PREFIX_SCALE * prefix as f64
}

/// [`lexical_similarity`] rescaled onto `[0, 1]`.
pub fn normalized_lexical_similarity(a: &str, b: &str) -> f64 {
    ((lexical_similarity(a, b) + 1.0) / (LEXICAL_MAX + 1.0)).clamp(0.0, 1.0)
}

/// Total length of common substrings removed by repeated longest-common-
/// substring extraction, stopping once the longest is shorter than
/// [`MIN_COMMON_SUBSTRING`].
fn common_substring_length(a: &[char], b: &[char]) -> usize {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let mut total = 0;
    while let Some((ai, bi, len)) = longest_common_substring(&a, &b) {
        if len < MIN_COMMON_SUBSTRING {
            break;
        }
        total += len;
        a.drain(ai..ai + len);
        b.drain(bi..bi + len);
    }
    total
}

/// `(start in a, start in b, length)` of the longest common substring; the
/// earliest end position in `a`, then in `b`, wins ties.
fn longest_common_substring(a: &[char], b: &[char]) -> Option<(usize, usize, usize)> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = (0, 0, 0);
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            cur[j] = if a[i - 1] == b[j - 1] { prev[j - 1] + 1 } else { 0 };
            if cur[j] > best.2 {
                best = (i - cur[j], j - cur[j], cur[j]);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (best.2 > 0).then_some(best)
}

/// Scores the predicate's text (label, else description, else external id)
/// against an abstract.
pub fn score_predicate_against_abstract<S: SimilarityScorer + ?Sized>(
    scorer: &S,
    abstract_text: &str,
    predicate: &PredicateRecord,
) -> Result<f64, ScoreError> {
    scorer.score(abstract_text, predicate.text())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_strings() {
        // Comm = 1, Diff = 0, prefix capped at 4
        assert!((lexical_similarity("spouse", "spouse") - 1.4).abs() < 1e-12);
        assert!((lexical_similarity("Spouse", "sPOUSE") - 1.4).abs() < 1e-12);
        // below the substring threshold nothing counts as common
        assert!((lexical_similarity("ab", "ab") + 0.8).abs() < 1e-12);
    }

    #[test]
    fn empty_string_convention() {
        assert_eq!(lexical_similarity("", "x"), 0.0);
        assert_eq!(lexical_similarity("x", ""), 0.0);
        assert_eq!(lexical_similarity("", ""), 0.0);
    }

    #[test]
    fn president_resident_golden() {
        // "resident" (8) is common, "p" is left over: Comm = 16/17, ua = 1/9,
        // ub = 0 so Diff = 0, and the first letters differ.
        assert!((lexical_similarity("president", "resident") - 16.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_strings_score_minus_one() {
        assert!((lexical_similarity("abc", "xyz") + 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_overlaps_ignored() {
        // only "ab" is shared, below the substring threshold
        let s = lexical_similarity("abxy", "zzab");
        assert!((s + 1.0).abs() < 1e-12);
    }

    #[test]
    fn predicate_fallback_and_verbatim_label() {
        let abstract_text = "She was educated at Princeton University and Harvard Law School.";
        let educated = PredicateRecord::new("P69").with_label("educated at");
        let employer = PredicateRecord::new("P108").with_label("employer");
        let s_edu = score_predicate_against_abstract(&LexicalScorer, abstract_text, &educated).unwrap();
        let s_emp = score_predicate_against_abstract(&LexicalScorer, abstract_text, &employer).unwrap();
        assert!(s_edu > s_emp, "{s_edu} vs {s_emp}");

        let described = PredicateRecord::new("P27").with_description("country of citizenship");
        let direct = lexical_similarity(abstract_text, "country of citizenship");
        assert_eq!(score_predicate_against_abstract(&LexicalScorer, abstract_text, &described).unwrap(), direct);
    }

    #[test]
    fn empty_abstract_scores_all_equal() {
        let preds = [
            PredicateRecord::new("P1").with_label("spouse"),
            PredicateRecord::new("P2").with_label("educated at"),
            PredicateRecord::new("P3"),
        ];
        let scores: Vec<f64> = preds
            .iter()
            .map(|p| score_predicate_against_abstract(&LexicalScorer, "", p).unwrap())
            .collect();
        assert!(scores.iter().all(|&s| s == scores[0]));
    }

    #[test]
    fn normalized_range() {
        assert!((normalized_lexical_similarity("spouse", "spouse") - 1.0).abs() < 1e-12);
        assert!(normalized_lexical_similarity("abc", "xyz").abs() < 1e-12);
    }

    /// Straightforward re-derivation: enumerate all substrings of `a` from
    /// longest to shortest and take the first that also occurs in `b`.
    fn oracle_common(a: &str, b: &str) -> usize {
        let mut a: Vec<char> = a.chars().collect();
        let mut b: Vec<char> = b.chars().collect();
        let mut total = 0;
        'outer: loop {
            for len in (MIN_COMMON_SUBSTRING..=a.len().min(b.len())).rev() {
                for i in 0..=a.len() - len {
                    let sub = &a[i..i + len];
                    if let Some(j) = (0..=b.len() - len).find(|&j| &b[j..j + len] == sub) {
                        total += len;
                        a.drain(i..i + len);
                        b.drain(j..j + len);
                        continue 'outer;
                    }
                }
            }
            return total;
        }
    }

    proptest! {
        #[test]
        fn symmetric(a in "[a-e ]{0,12}", b in "[a-e ]{0,12}") {
            prop_assert_eq!(lexical_similarity(&a, &b), lexical_similarity(&b, &a));
        }

        #[test]
        fn self_similarity_dominates(a in "[a-d]{3,10}", b in "[a-d]{0,10}") {
            prop_assert!(lexical_similarity(&a, &a) >= lexical_similarity(&a, &b));
        }

        #[test]
        fn bounded(a in "[a-c]{0,10}", b in "[a-c]{0,10}") {
            let s = lexical_similarity(&a, &b);
            prop_assert!((-1.0..=LEXICAL_MAX).contains(&s));
        }

        #[test]
        fn common_length_matches_enumeration(a in "[ab]{0,10}", b in "[ab]{0,10}") {
            // both pick the longest substring first; the total can only differ
            // on ties, so compare on the canonical argument order
            let (x, y) = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            let xs: Vec<char> = x.chars().collect();
            let ys: Vec<char> = y.chars().collect();
            prop_assert_eq!(common_substring_length(&xs, &ys), oracle_common(&x, &y));
        }
    }
}
