//! Precision, recall, F1 and average precision over ranked summaries, and
//! the per-bundle evaluation harness.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bundle::DatasetBundle;
use crate::graph::{EntityId, Triple};
use crate::summarize::{RankedSummary, Summarizer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("ground truth is empty")]
    EmptyTruth,
    #[error("invalid cutoff `{0}`")]
    InvalidCutoff(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn prf1(predicted: &BTreeSet<Triple>, truth: &BTreeSet<Triple>) -> Result<Prf1, MetricError> {
    if truth.is_empty() {
        return Err(MetricError::EmptyTruth);
    }
    let hits = predicted.intersection(truth).count() as f64;
    let precision = if predicted.is_empty() { 0.0 } else { hits / predicted.len() as f64 };
    let recall = hits / truth.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Prf1 { precision, recall, f1 })
}

/// Sum of precision at every relevant position, divided by `|truth|`.
pub fn average_precision(ranked: &[Triple], truth: &BTreeSet<Triple>) -> Result<f64, MetricError> {
    if truth.is_empty() {
        return Err(MetricError::EmptyTruth);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, t) in ranked.iter().enumerate() {
        if truth.contains(t) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cutoff {
    Top(usize),
    /// `k` equals the root's ground-truth size.
    Dynamic,
}

impl Cutoff {
    pub const DEFAULTS: [Cutoff; 3] = [Cutoff::Top(5), Cutoff::Top(10), Cutoff::Dynamic];

    pub fn k(self, truth_len: usize) -> usize {
        match self {
            Cutoff::Top(k) => k,
            Cutoff::Dynamic => truth_len,
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Top(k) => write!(f, "{k}"),
            Cutoff::Dynamic => f.write_str("dynamic"),
        }
    }
}

impl FromStr for Cutoff {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "dynamic" => Ok(Cutoff::Dynamic),
            other => match other.parse::<usize>() {
                Ok(k) if k > 0 => Ok(Cutoff::Top(k)),
                _ => Err(MetricError::InvalidCutoff(s.to_string())),
            },
        }
    }
}

/// One line of the evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub dataset: String,
    pub cutoff: String,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    pub map: f64,
    pub roots_evaluated: usize,
    pub roots_failed: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evaluation {
    pub rows: Vec<ReportRow>,
    /// Roots that could not be scored, with the reason.
    pub failures: Vec<(EntityId, String)>,
}

/// Per-cutoff `(P/R/F1, AP)` of one root, or why it could not be scored.
type RootScores = Result<Vec<(Prf1, f64)>, String>;

/// Scores every root with a ground truth. Roots the summarizer fails on are
/// excluded from the means and listed in `failures`.
pub fn evaluate(bundle: &DatasetBundle, summarizer: &dyn Summarizer, cutoffs: &[Cutoff]) -> Evaluation {
    let mut roots: Vec<EntityId> = bundle.roots.iter().map(|r| r.entity).collect();
    roots.sort_unstable();
    roots.dedup();

    let outcomes: Vec<(EntityId, RootScores)> = roots
        .par_iter()
        .map(|&root| (root, score_root(bundle, summarizer, root, cutoffs)))
        .collect();

    let mut failures = Vec::new();
    let mut per_cutoff: Vec<Vec<(Prf1, f64)>> = vec![Vec::new(); cutoffs.len()];
    for (root, outcome) in outcomes {
        match outcome {
            Ok(values) => {
                for (slot, v) in per_cutoff.iter_mut().zip(values) {
                    slot.push(v);
                }
            }
            Err(reason) => failures.push((root, reason)),
        }
    }

    let mean = |xs: &[(Prf1, f64)], f: &dyn Fn(&(Prf1, f64)) -> f64| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().map(f).sum::<f64>() / xs.len() as f64
        }
    };
    let rows = cutoffs
        .iter()
        .zip(&per_cutoff)
        .map(|(cutoff, values)| ReportRow {
            method: summarizer.name().to_string(),
            dataset: bundle.meta.prefix(),
            cutoff: cutoff.to_string(),
            mean_precision: mean(values, &|v| v.0.precision),
            mean_recall: mean(values, &|v| v.0.recall),
            mean_f1: mean(values, &|v| v.0.f1),
            map: mean(values, &|v| v.1),
            roots_evaluated: values.len(),
            roots_failed: failures.len(),
        })
        .collect();
    Evaluation { rows, failures }
}

fn score_root(
    bundle: &DatasetBundle,
    summarizer: &dyn Summarizer,
    root: EntityId,
    cutoffs: &[Cutoff],
) -> Result<Vec<(Prf1, f64)>, String> {
    let truth = bundle
        .truth(root)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| "no ground truth".to_string())?
        .triples();
    let ranked: RankedSummary = summarizer.summarize(bundle, root).map_err(|e| e.to_string())?;
    cutoffs
        .iter()
        .map(|c| {
            let top = ranked.top(c.k(truth.len()));
            let set: BTreeSet<Triple> = top.iter().copied().collect();
            let p = prf1(&set, truth).map_err(|e| e.to_string())?;
            let ap = average_precision(&top, truth).map_err(|e| e.to_string())?;
            Ok((p, ap))
        })
        .collect()
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "method",
    "dataset",
    "cutoff",
    "mean_precision",
    "mean_recall",
    "mean_f1",
    "map",
    "roots_evaluated",
    "roots_failed",
];

pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(std::io::Error::other)?;
    }
    if rows.is_empty() {
        w.write_record(REPORT_COLUMNS).map_err(std::io::Error::other)?;
    }
    w.flush()
}

/// Aligned plain-text rendering of the report.
pub fn format_report(rows: &[ReportRow]) -> String {
    let cells: Vec<[String; 9]> = rows
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                r.dataset.clone(),
                r.cutoff.clone(),
                format!("{:.4}", r.mean_precision),
                format!("{:.4}", r.mean_recall),
                format!("{:.4}", r.mean_f1),
                format!("{:.4}", r.map),
                r.roots_evaluated.to_string(),
                r.roots_failed.to_string(),
            ]
        })
        .collect();
    let mut widths = REPORT_COLUMNS.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let header = REPORT_COLUMNS.map(String::from);
    for row in std::iter::once(&header).chain(&cells) {
        let line: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 3 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{RootEntity, SummarySet};
    use crate::graph::{EntityRecord, KnowledgeGraph, PredicateRecord};
    use crate::summarize::{Method, OracleSummarizer};
    use proptest::prelude::*;

    fn t(i: u32) -> Triple {
        Triple::new(0, 0, i)
    }

    fn set(ids: &[u32]) -> BTreeSet<Triple> {
        ids.iter().map(|&i| t(i)).collect()
    }

    #[test]
    fn prf1_examples() {
        let p = prf1(&set(&[1, 2]), &set(&[1, 2])).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        let p = prf1(&set(&[3]), &set(&[1, 2])).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
        let p = prf1(&set(&[1, 2, 3, 4, 5]), &set(&[1, 2, 6, 7])).unwrap();
        assert!((p.precision - 0.4).abs() < 1e-15);
        assert!((p.recall - 0.5).abs() < 1e-15);
        assert!((p.f1 - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(prf1(&set(&[]), &set(&[1])).unwrap().precision, 0.0);
        assert_eq!(prf1(&set(&[1]), &set(&[])), Err(MetricError::EmptyTruth));
    }

    #[test]
    fn ap_examples() {
        let truth = set(&[1, 3]);
        assert!((average_precision(&[t(1), t(2), t(3)], &truth).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(average_precision(&[t(3), t(1)], &truth).unwrap(), 1.0);
        assert_eq!(average_precision(&[t(5), t(6)], &truth).unwrap(), 0.0);
        assert!(average_precision(&[], &set(&[])).is_err());
    }

    #[test]
    fn cutoff_parsing() {
        assert_eq!("5".parse::<Cutoff>().unwrap(), Cutoff::Top(5));
        assert_eq!("dynamic".parse::<Cutoff>().unwrap(), Cutoff::Dynamic);
        assert!("0".parse::<Cutoff>().is_err());
        assert!("top".parse::<Cutoff>().is_err());
    }

    fn star_bundle() -> DatasetBundle {
        let mut g = KnowledgeGraph::new();
        for i in 0..12 {
            g.add_entity(EntityRecord::new(format!("Q{i}"))).unwrap();
        }
        g.add_predicate(PredicateRecord::new("P0")).unwrap();
        for i in 1..12 {
            g.add_triple(t(i)).unwrap();
        }
        g.freeze();
        let mut b = DatasetBundle::new(g);
        b.roots = vec![RootEntity::new(EntityId(0), "a"), RootEntity::new(EntityId(5), "a")];
        b.ground_truths.insert(EntityId(0), SummarySet::from_triples(EntityId(0), [t(2), t(7), t(9)]).unwrap());
        b
    }

    #[test]
    fn oracle_scores_one_and_missing_truth_fails() {
        let b = star_bundle();
        let eval = evaluate(&b, &OracleSummarizer, &Cutoff::DEFAULTS);
        let dynamic = &eval.rows[2];
        assert_eq!(dynamic.cutoff, "dynamic");
        assert_eq!((dynamic.mean_f1, dynamic.map), (1.0, 1.0));
        assert_eq!(dynamic.roots_evaluated, 1);
        assert_eq!(dynamic.roots_failed, 1);
        assert_eq!(eval.failures[0].0, EntityId(5));
        // top-5 keeps all three truths among five predictions
        assert!((eval.rows[0].mean_precision - 0.6).abs() < 1e-15);
    }

    #[test]
    fn report_formats() {
        let b = star_bundle();
        let mut rows = Vec::new();
        for m in Method::BASELINES {
            rows.extend(evaluate(&b, m.build(&b, 1).as_ref(), &Cutoff::DEFAULTS).rows);
        }
        assert_eq!(rows.len(), 24);
        let mut buf = Vec::new();
        write_report_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), REPORT_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 25);
        let table = format_report(&rows);
        assert_eq!(table.lines().count(), 25);
    }

    /// Recomputes precision at every position from scratch.
    fn ap_oracle(ranked: &[u32], truth: &[u32]) -> f64 {
        let rel: Vec<bool> = ranked.iter().map(|x| truth.contains(x)).collect();
        let mut sum = 0.0;
        for i in 0..ranked.len() {
            if rel[i] {
                let hits = rel[..=i].iter().filter(|&&r| r).count();
                sum += hits as f64 / (i + 1) as f64;
            }
        }
        sum / truth.len() as f64
    }

    proptest! {
        #[test]
        fn ap_matches_oracle(
            ranked in proptest::sample::subsequence((0u32..20).collect::<Vec<_>>(), 0..15).prop_shuffle(),
            truth in proptest::sample::subsequence((0u32..20).collect::<Vec<_>>(), 1..10),
        ) {
            let list: Vec<Triple> = ranked.iter().map(|&i| t(i)).collect();
            let ap = average_precision(&list, &set(&truth)).unwrap();
            prop_assert!((ap - ap_oracle(&ranked, &truth)).abs() < 1e-12);
        }

        #[test]
        fn precision_recall_swap(a in proptest::collection::btree_set(0u32..15, 1..10), b in proptest::collection::btree_set(0u32..15, 1..10)) {
            let sa: BTreeSet<Triple> = a.iter().map(|&i| t(i)).collect();
            let sb: BTreeSet<Triple> = b.iter().map(|&i| t(i)).collect();
            prop_assert_eq!(prf1(&sa, &sb).unwrap().precision, prf1(&sb, &sa).unwrap().recall);
        }

        #[test]
        fn f1_ignores_prefix_order(mut ranked in proptest::sample::subsequence((0u32..12).collect::<Vec<_>>(), 3..12), seed in 0u64..1000) {
            use rand::{seq::SliceRandom, SeedableRng};
            let truth = set(&[0, 3, 5, 8]);
            let k = 3;
            let before: BTreeSet<Triple> = ranked[..k].iter().map(|&i| t(i)).collect();
            ranked[..k].shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let after: BTreeSet<Triple> = ranked[..k].iter().map(|&i| t(i)).collect();
            prop_assert_eq!(prf1(&before, &truth).unwrap(), prf1(&after, &truth).unwrap());
        }
    }

    #[test]
    fn ap_depends_on_prefix_order() {
        let truth = set(&[1]);
        let a = average_precision(&[t(1), t(2)], &truth).unwrap();
        let b = average_precision(&[t(2), t(1)], &truth).unwrap();
        assert!(a > b);
    }
}
