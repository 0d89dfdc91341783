//! Connectivity repair for sampled bundles.
//!
//! While the bundle has more than one weakly connected component, every
//! smaller component is bridged to the largest one with up to `h` shortest
//! paths of at most `l` triples taken from the source graph. Each pass that
//! leaves the bundle disconnected raises `l` by one, up to a cap.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::bundle::DatasetBundle;
use crate::dsu::DisjointSet;
use crate::graph::{EntityId, GraphError, KnowledgeGraph};
use crate::subgraph::{lift, project, Selection, SubgraphError};

pub const DEFAULT_BRIDGES: usize = 5;
pub const DEFAULT_INITIAL_PATH_LEN: usize = 1;
pub const DEFAULT_PATH_LEN_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectOptions {
    /// Bridges per smaller component and pass (`h`).
    pub bridges: usize,
    /// Starting bound on bridge length (`l`).
    pub initial_len: usize,
    pub len_cap: usize,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        Self {
            bridges: DEFAULT_BRIDGES,
            initial_len: DEFAULT_INITIAL_PATH_LEN,
            len_cap: DEFAULT_PATH_LEN_CAP,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConnectReport {
    pub passes: usize,
    /// Path-length bound in force when the loop ended.
    pub final_len: usize,
    pub bridges: usize,
    pub triples_added: usize,
    pub components_before: usize,
    pub components_after: usize,
}

#[derive(Debug, Error)]
pub enum ConnectError {
    #[error("invalid connector option: {0}")]
    InvalidArgument(String),
    #[error("unbridgeable components within path length {len_cap}; representatives: {}", .representatives.join(", "))]
    Unbridgeable {
        len_cap: usize,
        representatives: Vec<String>,
    },
    #[error(transparent)]
    Source(#[from] SubgraphError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Components of the selection in source ordinals, largest first, ties by
/// smallest member.
fn components(sel: &Selection) -> Vec<Vec<EntityId>> {
    let nodes: Vec<EntityId> = sel.nodes.iter().copied().collect();
    let index: HashMap<EntityId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut dsu = DisjointSet::new(nodes.len());
    for t in &sel.triples {
        dsu.union(index[&t.subject], index[&t.object]);
    }
    let mut groups: HashMap<usize, Vec<EntityId>> = HashMap::new();
    for (i, &v) in nodes.iter().enumerate() {
        groups.entry(dsu.find(i)).or_default().push(v);
    }
    let mut comps: Vec<Vec<EntityId>> = groups.into_values().collect();
    comps.sort_unstable_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

/// Tracks connectivity of a growing node set during one pass.
struct Tracker {
    dsu: DisjointSet,
    index: HashMap<EntityId, usize>,
}

impl Tracker {
    fn new(sel: &Selection) -> Self {
        let index: HashMap<EntityId, usize> = sel.nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut dsu = DisjointSet::new(index.len());
        for t in &sel.triples {
            dsu.union(index[&t.subject], index[&t.object]);
        }
        Self { dsu, index }
    }

    fn slot(&mut self, v: EntityId) -> usize {
        match self.index.get(&v) {
            Some(&i) => i,
            None => {
                let i = self.dsu.push();
                self.index.insert(v, i);
                i
            }
        }
    }

    fn union(&mut self, a: EntityId, b: EntityId) {
        let (a, b) = (self.slot(a), self.slot(b));
        self.dsu.union(a, b);
    }

    fn connected(&self) -> bool {
        self.dsu.set_count() <= 1
    }
}

pub(crate) fn connect_selection(
    source: &KnowledgeGraph,
    sel: &mut Selection,
    opts: ConnectOptions,
) -> Result<ConnectReport, ConnectError> {
    if opts.bridges == 0 {
        return Err(ConnectError::InvalidArgument("bridges must be at least 1".into()));
    }
    if opts.initial_len == 0 {
        return Err(ConnectError::InvalidArgument("initial path length must be at least 1".into()));
    }
    source.ensure_frozen()?;

    let mut report = ConnectReport::default();
    let mut len = opts.initial_len;
    loop {
        let comps = components(sel);
        if report.passes == 0 {
            report.components_before = comps.len();
        }
        if comps.len() <= 1 {
            report.components_after = comps.len();
            report.final_len = len;
            return Ok(report);
        }
        if len > opts.len_cap {
            return Err(ConnectError::Unbridgeable {
                len_cap: opts.len_cap,
                representatives: comps.iter().map(|c| source.entity(c[0]).external_id.clone()).collect(),
            });
        }
        log::debug!("connect pass {}: {} components, l = {len}", report.passes + 1, comps.len());
        let largest: HashSet<EntityId> = comps[0].iter().copied().collect();
        let mut tracker = Tracker::new(sel);
        'components: for comp in &comps[1..] {
            let mut found = 0;
            for &v in comp {
                if found == opts.bridges {
                    break;
                }
                let Some(path) = source.shortest_path(v, &largest, len)? else {
                    continue;
                };
                for t in path {
                    if sel.add_triple(t) {
                        report.triples_added += 1;
                    }
                    tracker.union(t.subject, t.object);
                }
                found += 1;
                report.bridges += 1;
                if tracker.connected() {
                    break 'components;
                }
            }
        }
        report.passes += 1;
        if !tracker.connected() {
            len += 1;
        }
    }
}

/// Bridges the components of `bundle` with paths from `source`. A bundle
/// that is already connected comes back unchanged; otherwise the result is
/// re-indexed in source order.
pub fn ensure_connected(
    bundle: &DatasetBundle,
    source: &KnowledgeGraph,
    opts: ConnectOptions,
) -> Result<(DatasetBundle, ConnectReport), ConnectError> {
    let mut sel = lift(bundle, source)?;
    let report = connect_selection(source, &mut sel, opts)?;
    if report.triples_added == 0 {
        return Ok((bundle.clone(), report));
    }
    Ok((project(source, &sel, bundle.meta.clone()), report))
}
