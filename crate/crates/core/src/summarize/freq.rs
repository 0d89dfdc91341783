use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{candidates, RankedSummary, SummarizeError, Summarizer};
use crate::bundle::DatasetBundle;
use crate::graph::EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyMode {
    /// Seeded uniform shuffle.
    Random,
    /// Degree of the neighbour in the bundle graph.
    EntityFreq,
    InvEntityFreq,
    /// Number of bundle triples carrying the predicate.
    RelFreq,
    InvRelFreq,
}

#[derive(Debug, Clone)]
pub struct FrequencySummarizer {
    mode: FrequencyMode,
    seed: u64,
    predicate_counts: Vec<usize>,
}

impl FrequencySummarizer {
    pub fn new(bundle: &DatasetBundle, mode: FrequencyMode, seed: u64) -> Self {
        let mut predicate_counts = vec![0; bundle.graph.predicate_count()];
        for t in bundle.graph.triples() {
            predicate_counts[t.predicate.index()] += 1;
        }
        Self {
            mode,
            seed,
            predicate_counts,
        }
    }
}

impl Summarizer for FrequencySummarizer {
    fn name(&self) -> &str {
        match self.mode {
            FrequencyMode::Random => "random",
            FrequencyMode::EntityFreq => "entity-freq",
            FrequencyMode::InvEntityFreq => "inv-entity-freq",
            FrequencyMode::RelFreq => "rel-freq",
            FrequencyMode::InvRelFreq => "inv-rel-freq",
        }
    }

    fn summarize(&self, bundle: &DatasetBundle, root: EntityId) -> Result<RankedSummary, SummarizeError> {
        let mut cands = candidates(bundle, root)?;
        let g = &bundle.graph;
        let scored = match self.mode {
            FrequencyMode::Random => {
                cands.sort_unstable();
                let stream = self.seed ^ (root.0 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                cands.shuffle(&mut ChaCha8Rng::seed_from_u64(stream));
                let n = cands.len();
                cands.into_iter().enumerate().map(|(i, t)| (t, (n - i) as f64)).collect()
            }
            FrequencyMode::EntityFreq | FrequencyMode::InvEntityFreq => cands
                .into_iter()
                .map(|t| {
                    let d = g.degree_unchecked(t.other(root)) as f64;
                    (t, if self.mode == FrequencyMode::EntityFreq { d } else { 1.0 / d })
                })
                .collect(),
            FrequencyMode::RelFreq | FrequencyMode::InvRelFreq => cands
                .into_iter()
                .map(|t| {
                    let c = self.predicate_counts[t.predicate.index()] as f64;
                    (t, if self.mode == FrequencyMode::RelFreq { c } else { 1.0 / c })
                })
                .collect(),
        };
        Ok(RankedSummary::from_scores(root, scored))
    }
}
