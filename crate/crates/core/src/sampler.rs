//! Degree-scaled random-walk sampling and stratified splitting.
//!
//! Each seed gets a walk budget between `minRW` and `maxRW`, interpolated on
//! its log-degree relative to the other seeds:
//!
//! ```text
//! L_i = ln(deg_i)
//! N_i = (L_i - min L) / (max L - min L)      (0 when all L are equal)
//! R_i = round(minRW + N_i * (maxRW - minRW))
//! ```
//!
//! Every walk draws from its own ChaCha8 stream keyed by
//! `(master seed, seed ordinal, walk index)`, so the sampled graph does not
//! depend on thread count or scheduling.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bundle::{BundleMeta, DatasetBundle, GeneratorParams, RootEntity, SummarySet};
use crate::connect::{connect_selection, ConnectError, ConnectOptions};
use crate::graph::{EntityId, GraphError, KnowledgeGraph, Triple};
use crate::subgraph::{lift, project, Selection, SubgraphError};

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("the seed set is empty")]
    EmptySeeds,
    #[error("seed {0} has no incident triples")]
    ZeroDegree(EntityId),
    #[error("invalid walk limits: min {min}, max {max}")]
    InvalidLimits { min: u32, max: u32 },
    #[error("no walk budget for seed {0}")]
    MissingBudget(EntityId),
    #[error("no ground truth for seed {0}")]
    MissingTruth(EntityId),
    #[error("invalid split fractions {0:?}")]
    InvalidFractions([f64; 3]),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Source(#[from] SubgraphError),
    #[error(transparent)]
    Connect(#[from] ConnectError),
}

/// Walk counts per seed, in seed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkBudget {
    pub min_rw: u32,
    pub max_rw: u32,
    pub counts: Vec<(EntityId, u32)>,
}

impl WalkBudget {
    pub fn get(&self, seed: EntityId) -> Option<u32> {
        self.counts.iter().find(|(s, _)| *s == seed).map(|&(_, r)| r)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, r)| r as u64).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    /// Nodes per walk, start included.
    pub walk_nodes: usize,
    pub master_seed: u64,
    pub threads: usize,
}

impl WalkConfig {
    pub fn from_params(params: &GeneratorParams, master_seed: u64) -> Self {
        Self {
            walk_nodes: params.random_walk_depth_len,
            master_seed,
            threads: params.max_threads,
        }
    }
}

/// Budget formula on precomputed log-degrees.
pub fn walk_counts(log_degrees: &[f64], min_rw: u32, max_rw: u32) -> Vec<u32> {
    let lo = log_degrees.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = log_degrees.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (max_rw - min_rw) as f64;
    log_degrees
        .iter()
        .map(|&l| {
            let n = if hi > lo { (l - lo) / (hi - lo) } else { 0.0 };
            (min_rw as f64 + n * span).round() as u32
        })
        .collect()
}

pub fn compute_walk_budget(
    graph: &KnowledgeGraph,
    seeds: &[EntityId],
    min_rw: u32,
    max_rw: u32,
) -> Result<WalkBudget, SampleError> {
    if seeds.is_empty() {
        return Err(SampleError::EmptySeeds);
    }
    if min_rw == 0 || min_rw > max_rw {
        return Err(SampleError::InvalidLimits { min: min_rw, max: max_rw });
    }
    let mut logs = Vec::with_capacity(seeds.len());
    for &s in seeds {
        let d = graph.degree(s)?;
        if d == 0 {
            return Err(SampleError::ZeroDegree(s));
        }
        logs.push((d as f64).ln());
    }
    let counts = seeds
        .iter()
        .copied()
        .zip(walk_counts(&logs, min_rw, max_rw))
        .collect();
    Ok(WalkBudget { min_rw, max_rw, counts })
}

/// Walk of up to `walk_nodes` nodes from `start`, each step uniform over the
/// incident triples of the current node regardless of direction.
pub fn random_walk<R: Rng + ?Sized>(
    graph: &KnowledgeGraph,
    start: EntityId,
    walk_nodes: usize,
    rng: &mut R,
) -> Result<Vec<Triple>, GraphError> {
    graph.check_entity(start)?;
    graph.ensure_frozen()?;
    if walk_nodes < 2 {
        return Err(GraphError::InvalidArgument("a walk needs at least 2 nodes".into()));
    }
    let mut path = Vec::with_capacity(walk_nodes - 1);
    let mut cur = start;
    for _ in 1..walk_nodes {
        let deg = graph.degree_unchecked(cur);
        if deg == 0 {
            break;
        }
        let t = graph.incident_at(cur, rng.random_range(0..deg));
        cur = t.other(cur);
        path.push(t);
    }
    Ok(path)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the RNG stream for walk `walk` from `seed`.
pub fn walk_stream_seed(master_seed: u64, seed: EntityId, walk: u32) -> u64 {
    mix(mix(mix(master_seed) ^ seed.0 as u64) ^ walk as u64)
}

fn thread_pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
}

pub(crate) fn sample_selection(
    graph: &KnowledgeGraph,
    seeds: &[RootEntity],
    truths: &BTreeMap<EntityId, SummarySet>,
    budget: &WalkBudget,
    config: WalkConfig,
) -> Result<Selection, SampleError> {
    graph.ensure_frozen()?;
    let mut jobs = Vec::with_capacity(seeds.len());
    for r in seeds {
        graph.check_entity(r.entity)?;
        let walks = budget.get(r.entity).ok_or(SampleError::MissingBudget(r.entity))?;
        if !truths.contains_key(&r.entity) {
            return Err(SampleError::MissingTruth(r.entity));
        }
        jobs.push((r.entity, walks));
    }
    if config.walk_nodes < 2 {
        return Err(GraphError::InvalidArgument("a walk needs at least 2 nodes".into()).into());
    }

    let per_seed: Vec<BTreeSet<(EntityId, EntityId)>> = thread_pool(config.threads).install(|| {
        jobs.par_iter()
            .map(|&(seed, walks)| {
                let mut pairs = BTreeSet::new();
                for w in 0..walks {
                    let mut rng = ChaCha8Rng::seed_from_u64(walk_stream_seed(config.master_seed, seed, w));
                    for t in random_walk(graph, seed, config.walk_nodes, &mut rng).expect("checked above") {
                        pairs.insert((t.subject.min(t.object), t.subject.max(t.object)));
                    }
                }
                pairs
            })
            .collect()
    });

    let mut sel = Selection::default();
    for r in seeds {
        sel.nodes.insert(r.entity);
        for t in truths[&r.entity].triples() {
            sel.add_triple(*t);
        }
    }
    let pairs: BTreeSet<(EntityId, EntityId)> = per_seed.into_iter().flatten().collect();
    for (u, v) in pairs {
        for t in graph.triples_between(u, v) {
            sel.add_triple(t);
        }
    }
    sel.roots = seeds.to_vec();
    sel.truths = seeds
        .iter()
        .map(|r| (r.entity, truths[&r.entity].clone()))
        .collect();
    Ok(sel)
}

/// Ground-truth triples of every seed plus all triples between node pairs
/// traversed by the walks. The result may be disconnected.
pub fn extract_subgraph(
    graph: &KnowledgeGraph,
    seeds: &[RootEntity],
    truths: &BTreeMap<EntityId, SummarySet>,
    budget: &WalkBudget,
    config: WalkConfig,
) -> Result<DatasetBundle, SampleError> {
    let sel = sample_selection(graph, seeds, truths, budget, config)?;
    Ok(project(graph, &sel, BundleMeta::default()))
}

/// Splits `n` items by `fractions` with largest-remainder rounding; equal
/// remainders favour the earlier split.
pub fn allocate(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    const EPS: f64 = 1e-9;
    let quotas = fractions.map(|f| n as f64 * f);
    let floors = quotas.map(|q| (q + EPS).floor());
    let mut counts = floors.map(|f| f as usize);
    let mut left = n.saturating_sub(counts.iter().sum::<usize>());
    // remainders closer than EPS count as equal
    let rem = |i: usize| ((quotas[i] - floors[i]).max(0.0) / EPS).round();
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| rem(b).total_cmp(&rem(a)).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Categories smaller than this go entirely to the training split.
pub const MIN_CATEGORY_SIZE: usize = 3;

pub const SPLIT_NAMES: [&str; 3] = ["train", "val", "test"];

#[derive(Debug, Clone)]
pub struct SplitOutput {
    /// Train, validation and test bundles.
    pub bundles: [DatasetBundle; 3],
    /// Categories that were too small to stratify.
    pub small_categories: Vec<String>,
}

/// Root partition by category, in bundle root order within each split.
pub fn partition_roots(roots: &[RootEntity], fractions: [f64; 3], master_seed: u64) -> ([Vec<RootEntity>; 3], Vec<String>) {
    let mut by_category: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in roots.iter().enumerate() {
        by_category.entry(r.category.as_str()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master_seed ^ 0x0053_504C_4954));
    let mut assignment = vec![0usize; roots.len()];
    let mut small = Vec::new();
    for (category, mut members) in by_category {
        if members.len() < MIN_CATEGORY_SIZE {
            log::warn!("category {category:?} has {} root(s); all go to train", members.len());
            small.push(category.to_string());
            continue;
        }
        members.shuffle(&mut rng);
        let [train, val, _] = allocate(members.len(), fractions);
        for (k, &i) in members.iter().enumerate() {
            assignment[i] = if k < train { 0 } else if k < train + val { 1 } else { 2 };
        }
    }
    let mut parts: [Vec<RootEntity>; 3] = Default::default();
    for (r, &split) in roots.iter().zip(&assignment) {
        parts[split].push(r.clone());
    }
    (parts, small)
}

/// Partitions the roots per category and resamples a connected graph for
/// each split from `source`.
pub fn split_dataset(
    bundle: &DatasetBundle,
    source: &KnowledgeGraph,
    fractions: [f64; 3],
    params: &GeneratorParams,
    master_seed: u64,
) -> Result<SplitOutput, SampleError> {
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(SampleError::InvalidFractions(fractions));
    }
    source.ensure_frozen()?;
    let lifted = lift(bundle, source)?;
    let (parts, small_categories) = partition_roots(&lifted.roots, fractions, master_seed);
    let connect = ConnectOptions {
        bridges: params.bridges_number,
        ..ConnectOptions::default()
    };

    let mut bundles: [DatasetBundle; 3] = Default::default();
    for (i, roots) in parts.into_iter().enumerate() {
        let meta = BundleMeta {
            split: SPLIT_NAMES[i].into(),
            ..bundle.meta.clone()
        };
        if roots.is_empty() {
            let mut empty = DatasetBundle::new(KnowledgeGraph::new());
            empty.graph.freeze();
            empty.meta = meta;
            bundles[i] = empty;
            continue;
        }
        let seeds: Vec<EntityId> = roots.iter().map(|r| r.entity).collect();
        let budget = compute_walk_budget(source, &seeds, params.min_random_walk_number, params.max_random_walk_number)?;
        let mut sel = sample_selection(source, &roots, &lifted.truths, &budget, WalkConfig::from_params(params, master_seed))?;
        connect_selection(source, &mut sel, connect)?;
        bundles[i] = project(source, &sel, meta);
    }
    Ok(SplitOutput { bundles, small_categories })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EntityRecord, PredicateRecord};
    use std::f64::consts::E;

    fn graph_with(n: usize, triples: &[(u32, u32, u32)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for i in 0..n {
            g.add_entity(EntityRecord::new(format!("Q{i}"))).unwrap();
        }
        for p in 0..3 {
            g.add_predicate(PredicateRecord::new(format!("P{p}"))).unwrap();
        }
        for &(s, p, o) in triples {
            g.add_triple(Triple::new(s, p, o)).unwrap();
        }
        g.freeze();
        g
    }

    #[test]
    fn budget_endpoints_and_midpoint() {
        assert_eq!(walk_counts(&[1.0, 3.0], 100, 300), vec![100, 300]);
        assert_eq!(walk_counts(&[E.ln(), (E * E).ln(), (E * E * E).ln()], 100, 300), vec![100, 200, 300]);
        assert_eq!(walk_counts(&[2.0, 2.0, 2.0], 100, 300), vec![100, 100, 100]);
    }

    #[test]
    fn budget_rounds_half_away_from_zero() {
        // N = 0.5 exactly on an odd span lands on .5
        assert_eq!(walk_counts(&[0.0, 1.0, 2.0], 100, 301), vec![100, 201, 301]);
    }

    #[test]
    fn budget_from_degrees() {
        // degrees 1, 2, 4 give log-degrees 0, ln 2, 2 ln 2
        let g = graph_with(8, &[(0, 0, 1), (2, 0, 3), (2, 1, 3), (4, 0, 5), (4, 0, 6), (4, 0, 7), (4, 1, 5)]);
        let b = compute_walk_budget(&g, &[EntityId(0), EntityId(2), EntityId(4)], 100, 300).unwrap();
        assert_eq!(b.counts.iter().map(|c| c.1).collect::<Vec<_>>(), vec![100, 200, 300]);
        assert_eq!(b.total(), 600);
    }

    #[test]
    fn budget_errors() {
        let g = graph_with(3, &[(0, 0, 1)]);
        assert!(matches!(compute_walk_budget(&g, &[], 100, 300), Err(SampleError::EmptySeeds)));
        assert!(matches!(
            compute_walk_budget(&g, &[EntityId(2)], 100, 300),
            Err(SampleError::ZeroDegree(EntityId(2)))
        ));
        assert!(matches!(
            compute_walk_budget(&g, &[EntityId(0)], 300, 100),
            Err(SampleError::InvalidLimits { .. })
        ));
    }

    #[test]
    fn walk_examples() {
        let g = graph_with(3, &[(0, 0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_walk(&g, EntityId(0), 2, &mut rng).unwrap(), vec![Triple::new(0, 0, 1)]);
        assert!(random_walk(&g, EntityId(2), 3, &mut rng).unwrap().is_empty());
        assert!(random_walk(&g, EntityId(9), 3, &mut rng).is_err());
        let path = random_walk(&g, EntityId(0), 3, &mut rng).unwrap();
        assert_eq!(path, vec![Triple::new(0, 0, 1), Triple::new(0, 0, 1)]);
    }

    #[test]
    fn first_step_is_uniform() {
        // star with 4 leaves: each first step has p = 1/4
        let g = graph_with(5, &[(0, 0, 1), (0, 0, 2), (3, 1, 0), (0, 2, 4)]);
        let n = 40_000u32;
        let mut counts = [0u32; 5];
        for w in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(walk_stream_seed(7, EntityId(0), w));
            let t = random_walk(&g, EntityId(0), 2, &mut rng).unwrap()[0];
            counts[t.other(EntityId(0)).index()] += 1;
        }
        let mean = n as f64 / 4.0;
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in &counts[1..] {
            assert!((*c as f64 - mean).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    fn single_root(root: u32, gt: &[Triple]) -> (Vec<RootEntity>, BTreeMap<EntityId, SummarySet>) {
        let roots = vec![RootEntity::new(EntityId(root), "c")];
        let truths = BTreeMap::from([(EntityId(root), SummarySet::from_triples(EntityId(root), gt.iter().copied()).unwrap())]);
        (roots, truths)
    }

    #[test]
    fn ground_truth_always_included() {
        let star: Vec<(u32, u32, u32)> = (1..=8).map(|i| (0, 0, i)).collect();
        let g = graph_with(9, &star);
        let gt: Vec<Triple> = (1..=5).map(|i| Triple::new(0, 0, i)).collect();
        let (roots, truths) = single_root(0, &gt);
        let budget = WalkBudget { min_rw: 1, max_rw: 1, counts: vec![(EntityId(0), 1)] };
        let cfg = WalkConfig { walk_nodes: 2, master_seed: 3, threads: 1 };
        let b = extract_subgraph(&g, &roots, &truths, &budget, cfg).unwrap();
        b.validate().unwrap();
        assert!(b.graph.triple_count() >= 5 && b.graph.triple_count() <= 6);
        assert_eq!(b.truth(b.roots[0].entity).unwrap().len(), 5);
    }

    #[test]
    fn cycle_fully_captured_with_parallel_closure() {
        // 3-cycle 0-1-2 with a parallel triple between 1 and 2
        let g = graph_with(4, &[(0, 0, 1), (1, 0, 2), (2, 0, 0), (1, 1, 2), (3, 0, 0)]);
        let (roots, truths) = single_root(0, &[Triple::new(3, 0, 0)]);
        let budget = WalkBudget { min_rw: 200, max_rw: 200, counts: vec![(EntityId(0), 200)] };
        let cfg = WalkConfig { walk_nodes: 3, master_seed: 11, threads: 2 };
        let sel = sample_selection(&g, &roots, &truths, &budget, cfg).unwrap();
        let all: BTreeSet<Triple> = g.triples().iter().copied().collect();
        assert_eq!(sel.triples, all);
    }

    #[test]
    fn missing_inputs_are_errors() {
        let g = graph_with(2, &[(0, 0, 1)]);
        let (roots, truths) = single_root(0, &[Triple::new(0, 0, 1)]);
        let cfg = WalkConfig { walk_nodes: 3, master_seed: 0, threads: 1 };
        let empty = WalkBudget { min_rw: 1, max_rw: 1, counts: vec![] };
        assert!(matches!(
            extract_subgraph(&g, &roots, &truths, &empty, cfg),
            Err(SampleError::MissingBudget(_))
        ));
        let budget = WalkBudget { min_rw: 1, max_rw: 1, counts: vec![(EntityId(0), 1)] };
        assert!(matches!(
            extract_subgraph(&g, &roots, &BTreeMap::new(), &budget, cfg),
            Err(SampleError::MissingTruth(_))
        ));
    }

    #[test]
    fn thread_count_does_not_change_selection() {
        let triples: Vec<(u32, u32, u32)> = (0..60u32).map(|i| (i % 20, i % 3, (i * 7 + 3) % 20)).collect();
        let g = graph_with(20, &triples);
        let roots: Vec<RootEntity> = [0u32, 5, 9].iter().map(|&r| RootEntity::new(EntityId(r), "c")).collect();
        let truths: BTreeMap<EntityId, SummarySet> = roots
            .iter()
            .map(|r| (r.entity, SummarySet::from_triples(r.entity, g.incident_triples(r.entity).take(1)).unwrap()))
            .collect();
        let seeds: Vec<EntityId> = roots.iter().map(|r| r.entity).collect();
        let budget = compute_walk_budget(&g, &seeds, 5, 20).unwrap();
        let run = |threads| {
            let cfg = WalkConfig { walk_nodes: 3, master_seed: 99, threads };
            sample_selection(&g, &roots, &truths, &budget, cfg).unwrap().triples
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn allocation_examples() {
        assert_eq!(allocate(10, [0.7, 0.15, 0.15]), [7, 2, 1]);
        assert_eq!(allocate(10, [1.0, 0.0, 0.0]), [10, 0, 0]);
        assert_eq!(allocate(405, [0.7, 0.15, 0.15]), [283, 61, 61]);
        assert_eq!(allocate(88, [0.7, 0.15, 0.15]), [62, 13, 13]);
    }

    #[test]
    fn partition_is_disjoint_and_small_categories_train() {
        let mut roots: Vec<RootEntity> = (0..20).map(|i| RootEntity::new(EntityId(i), "a")).collect();
        roots.push(RootEntity::new(EntityId(20), "tiny"));
        roots.push(RootEntity::new(EntityId(21), "tiny"));
        let (parts, small) = partition_roots(&roots, [0.7, 0.15, 0.15], 5);
        assert_eq!(small, vec!["tiny".to_string()]);
        assert_eq!(parts.iter().map(Vec::len).collect::<Vec<_>>(), vec![16, 3, 3]);
        let mut all: Vec<u32> = parts.iter().flatten().map(|r| r.entity.0).collect();
        all.sort_unstable();
        assert_eq!(all, (0..22).collect::<Vec<_>>());
        assert!(parts[0].iter().any(|r| r.entity.0 == 20));
        let (again, _) = partition_roots(&roots, [0.7, 0.15, 0.15], 5);
        assert_eq!(parts, again);
    }

    /// Largest-remainder oracle with exact rational arithmetic over
    /// hundredths.
    fn allocate_oracle(n: usize, pct: [usize; 3]) -> [usize; 3] {
        let scaled: Vec<usize> = pct.iter().map(|p| n * p).collect();
        let mut counts: Vec<usize> = scaled.iter().map(|s| s / 100).collect();
        let mut rest: Vec<(usize, usize)> = scaled.iter().enumerate().map(|(i, s)| (s % 100, i)).collect();
        rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let missing = n - counts.iter().sum::<usize>();
        for &(_, i) in rest.iter().take(missing) {
            counts[i] += 1;
        }
        [counts[0], counts[1], counts[2]]
    }

    proptest::proptest! {
        #[test]
        fn allocation_matches_integer_oracle(n in 0usize..2000) {
            proptest::prop_assert_eq!(allocate(n, [0.7, 0.15, 0.15]), allocate_oracle(n, [70, 15, 15]));
            proptest::prop_assert_eq!(allocate(n, [0.5, 0.25, 0.25]), allocate_oracle(n, [50, 25, 25]));
        }
    }
}
