//! End-to-end dataset generation: seed qualification, walk sampling and
//! connectivity repair against one source graph.

use thiserror::Error;

use crate::annotate::qualify_seeds;
use crate::bundle::{BundleMeta, DatasetBundle, GeneratorParams, RootEntity, SummarySet};
use crate::connect::{connect_selection, ConnectError, ConnectOptions, ConnectReport};
use crate::graph::{EntityId, KnowledgeGraph};
use crate::sampler::{compute_walk_budget, sample_selection, SampleError, WalkConfig};
use crate::subgraph::project;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("no root has at least {0} ground-truth triples")]
    NoQualifyingRoots(usize),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Connect(#[from] ConnectError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenerateReport {
    pub candidates: usize,
    pub qualified: usize,
    pub walks: u64,
    /// Triples after sampling, before bridging.
    pub sampled_triples: usize,
    pub connect: ConnectReport,
}

/// Builds a connected bundle around the annotated roots of `source`.
/// Roots and summaries use `source` ordinals.
pub fn generate(
    source: &KnowledgeGraph,
    annotated: &[(RootEntity, SummarySet)],
    params: &GeneratorParams,
    master_seed: u64,
    meta: BundleMeta,
) -> Result<(DatasetBundle, GenerateReport), GenerateError> {
    let roots = qualify_seeds(annotated, params.min_valid_summary_edges);
    if roots.is_empty() {
        return Err(GenerateError::NoQualifyingRoots(params.min_valid_summary_edges));
    }
    let truths = annotated
        .iter()
        .filter(|(r, _)| roots.contains(r))
        .map(|(r, s)| (r.entity, s.clone()))
        .collect();
    let seeds: Vec<EntityId> = roots.iter().map(|r| r.entity).collect();
    let budget = compute_walk_budget(
        source,
        &seeds,
        params.min_random_walk_number,
        params.max_random_walk_number,
    )?;
    let mut sel = sample_selection(source, &roots, &truths, &budget, WalkConfig::from_params(params, master_seed))?;
    let sampled_triples = sel.triples.len();
    let opts = ConnectOptions {
        bridges: params.bridges_number,
        ..ConnectOptions::default()
    };
    let connect = connect_selection(source, &mut sel, opts)?;
    let meta = BundleMeta {
        params: Some(*params),
        seed: Some(master_seed),
        ..meta
    };
    let report = GenerateReport {
        candidates: annotated.len(),
        qualified: roots.len(),
        walks: budget.total(),
        sampled_triples,
        connect,
    };
    Ok((project(source, &sel, meta), report))
}
