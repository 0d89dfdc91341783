use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use crate::bundle::{BundleMeta, DatasetBundle, RootEntity, SummarySet};
use crate::graph::{EntityId, EntityRecord, KnowledgeGraph, PredicateRecord, Triple};

use super::LoadError;

const ENTITIES: &str = "entities";
const ROOTS: &str = "root-entities";
const PREDICATES: &str = "predicates";
const TRIPLES: &str = "triples";
const GROUND_TRUTHS: &str = "ground-truths";
const META: &str = "meta.json";

pub fn bundle_file(dir: &Path, prefix: &str, kind: &str) -> PathBuf {
    let ext = if kind.ends_with(".json") { "" } else { ".csv" };
    dir.join(format!("{prefix}-{kind}{ext}"))
}

/// Finds the single bundle prefix in `dir` by looking for `*-entities.csv`.
pub fn find_bundle_prefix(dir: &Path) -> Result<String, LoadError> {
    let entries = fs::read_dir(dir).map_err(|source| LoadError::Io {
        file: dir.to_path_buf(),
        source,
    })?;
    let mut prefixes = Vec::new();
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with("-root-entities.csv") {
            continue;
        }
        if let Some(prefix) = name.strip_suffix("-entities.csv") {
            prefixes.push(prefix.to_string());
        }
    }
    prefixes.sort();
    match prefixes.len() {
        0 => Err(LoadError::NoBundle(dir.to_path_buf())),
        1 => Ok(prefixes.pop().unwrap()),
        _ => Err(LoadError::AmbiguousBundle {
            dir: dir.to_path_buf(),
            prefixes,
        }),
    }
}

struct Table {
    file: PathBuf,
    headers: Vec<String>,
    reader: csv::Reader<File>,
}

struct Row {
    line: u64,
    record: csv::StringRecord,
}

impl Table {
    fn open(file: PathBuf) -> Result<Self, LoadError> {
        if !file.exists() {
            return Err(LoadError::MissingFile(file));
        }
        let handle = File::open(&file).map_err(|source| LoadError::Io {
            file: file.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(handle);
        let headers = reader
            .headers()
            .map_err(|e| syntax(&file, e))?
            .iter()
            .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
            .collect();
        Ok(Self {
            file,
            headers,
            reader,
        })
    }

    fn column(&self, names: &[&str]) -> Option<usize> {
        names
            .iter()
            .find_map(|n| self.headers.iter().position(|h| h == n))
    }

    fn required(&self, name: &'static str, aliases: &[&str]) -> Result<usize, LoadError> {
        let mut all = vec![name];
        all.extend_from_slice(aliases);
        self.column(&all).ok_or_else(|| LoadError::MissingColumn {
            file: self.file.clone(),
            column: name,
        })
    }

    fn rows(&mut self) -> impl Iterator<Item = Result<Row, LoadError>> + '_ {
        let expected = self.headers.len();
        let file = self.file.clone();
        self.reader.records().map(move |r| {
            let record = r.map_err(|e| syntax(&file, e))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != expected {
                return Err(LoadError::Malformed {
                    file: file.clone(),
                    line,
                    expected,
                    found: record.len(),
                });
            }
            Ok(Row { line, record })
        })
    }
}

fn syntax(file: &Path, e: csv::Error) -> LoadError {
    let line = e.position().map_or(0, |p| p.line());
    LoadError::Syntax {
        file: file.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

impl Row {
    fn text(&self, idx: usize) -> &str {
        &self.record[idx]
    }

    fn optional(&self, idx: Option<usize>) -> Option<String> {
        idx.map(|i| self.text(i))
            .filter(|s| !s.is_empty())
            .map(str::to_string)
    }

    fn ordinal(&self, file: &Path, idx: usize, column: &'static str) -> Result<u32, LoadError> {
        let raw = self.text(idx).trim();
        raw.parse().map_err(|_| LoadError::InvalidValue {
            file: file.to_path_buf(),
            line: self.line,
            column,
            value: raw.to_string(),
        })
    }
}

/// Accepts `123` and the float spelling `123.0` some exporters emit for
/// nullable integer columns.
fn parse_page_id(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    raw.parse().ok().or_else(|| {
        raw.strip_suffix(".0")
            .and_then(|s| s.parse().ok())
    })
}

/// Loads the entity, predicate and triple files into a frozen graph.
pub fn load_graph(dir: &Path, prefix: &str) -> Result<KnowledgeGraph, LoadError> {
    let mut graph = KnowledgeGraph::new();

    let mut table = Table::open(bundle_file(dir, prefix, ENTITIES))?;
    let id_col = table.required("id", &[])?;
    let ext_col = table.required("entity", &[])?;
    let label_col = table.column(&["wikidata_label"]);
    let desc_col = table.column(&["wikidata_desc", "wikidata_description"]);
    let title_col = table.column(&["wikipedia_title"]);
    let page_col = table.column(&["wikipedia_id"]);
    let file = table.file.clone();
    let mut slots: Vec<Option<EntityRecord>> = Vec::new();
    let mut external = HashSet::new();
    for row in table.rows() {
        let row = row?;
        let ordinal = row.ordinal(&file, id_col, "id")?;
        let ext = row.text(ext_col).to_string();
        if ext.is_empty() {
            return Err(LoadError::InvalidValue {
                file,
                line: row.line,
                column: "entity",
                value: ext,
            });
        }
        if !external.insert(ext.clone()) {
            return Err(LoadError::DuplicateId { file, line: row.line, id: ext });
        }
        let wikipedia_id = match page_col.map(|c| row.text(c)).filter(|s| !s.is_empty()) {
            None => None,
            Some(raw) => Some(parse_page_id(raw).ok_or_else(|| LoadError::InvalidValue {
                file: file.clone(),
                line: row.line,
                column: "wikipedia_id",
                value: raw.to_string(),
            })?),
        };
        let record = EntityRecord {
            external_id: ext,
            wikidata_label: row.optional(label_col),
            wikidata_desc: row.optional(desc_col),
            wikipedia_title: row.optional(title_col),
            wikipedia_id,
        };
        place(&mut slots, ordinal, record, &file, row.line)?;
    }
    for (i, slot) in slots.into_iter().enumerate() {
        let record = slot.ok_or(LoadError::NonContiguous {
            file: file.clone(),
            missing: i as u32,
        })?;
        graph.add_entity(record).expect("external ids checked while reading");
    }

    let mut table = Table::open(bundle_file(dir, prefix, PREDICATES))?;
    let id_col = table.required("id", &[])?;
    let ext_col = table.required("predicate", &[])?;
    let label_col = table.column(&["predicate_label", "label"]);
    let desc_col = table.column(&["predicate_desc", "predicate_description", "description"]);
    let file = table.file.clone();
    let mut slots: Vec<Option<PredicateRecord>> = Vec::new();
    let mut external = HashSet::new();
    for row in table.rows() {
        let row = row?;
        let ordinal = row.ordinal(&file, id_col, "id")?;
        let ext = row.text(ext_col).to_string();
        if !external.insert(ext.clone()) {
            return Err(LoadError::DuplicateId { file, line: row.line, id: ext });
        }
        let record = PredicateRecord {
            external_id: ext,
            label: row.optional(label_col),
            description: row.optional(desc_col),
        };
        place(&mut slots, ordinal, record, &file, row.line)?;
    }
    for (i, slot) in slots.into_iter().enumerate() {
        let record = slot.ok_or(LoadError::NonContiguous {
            file: file.clone(),
            missing: i as u32,
        })?;
        graph.add_predicate(record).expect("external ids checked while reading");
    }

    let mut table = Table::open(bundle_file(dir, prefix, TRIPLES))?;
    let cols = [
        table.required("subject", &[])?,
        table.required("predicate", &[])?,
        table.required("object", &[])?,
    ];
    let file = table.file.clone();
    for row in table.rows() {
        let row = row?;
        let t = read_triple(&row, &file, cols, &graph)?;
        graph.add_triple(t).expect("ordinals checked while reading");
    }
    graph.freeze();
    Ok(graph)
}

fn place<T>(slots: &mut Vec<Option<T>>, ordinal: u32, value: T, file: &Path, line: u64) -> Result<(), LoadError> {
    let idx = ordinal as usize;
    if idx >= slots.len() {
        slots.resize_with(idx + 1, || None);
    }
    if slots[idx].is_some() {
        return Err(LoadError::DuplicateOrdinal {
            file: file.to_path_buf(),
            line,
            ordinal,
        });
    }
    slots[idx] = Some(value);
    Ok(())
}

fn read_triple(row: &Row, file: &Path, cols: [usize; 3], graph: &KnowledgeGraph) -> Result<Triple, LoadError> {
    let s = row.ordinal(file, cols[0], "subject")?;
    let p = row.ordinal(file, cols[1], "predicate")?;
    let o = row.ordinal(file, cols[2], "object")?;
    let dangling = |kind, id: u32| LoadError::Dangling {
        file: file.to_path_buf(),
        line: row.line,
        kind,
        id: id.to_string(),
    };
    if s as usize >= graph.entity_count() {
        return Err(dangling("entity", s));
    }
    if o as usize >= graph.entity_count() {
        return Err(dangling("entity", o));
    }
    if p as usize >= graph.predicate_count() {
        return Err(dangling("predicate", p));
    }
    Ok(Triple::new(s, p, o))
}

/// Loads root entities and ground truths whose ordinals refer to `graph`.
pub fn load_annotations(
    dir: &Path,
    prefix: &str,
    graph: &KnowledgeGraph,
) -> Result<(Vec<RootEntity>, BTreeMap<EntityId, SummarySet>), LoadError> {
    let mut table = Table::open(bundle_file(dir, prefix, ROOTS))?;
    let entity_col = table.required("entity", &["root_entity"])?;
    let category_col = table.column(&["category"]);
    let file = table.file.clone();
    let mut roots = Vec::new();
    let mut seen = HashSet::new();
    for row in table.rows() {
        let row = row?;
        let e = row.ordinal(&file, entity_col, "entity")?;
        if e as usize >= graph.entity_count() {
            return Err(LoadError::Dangling {
                file,
                line: row.line,
                kind: "entity",
                id: e.to_string(),
            });
        }
        if !seen.insert(e) {
            return Err(LoadError::DuplicateId {
                file,
                line: row.line,
                id: e.to_string(),
            });
        }
        let category = row.optional(category_col).unwrap_or_default();
        roots.push(RootEntity::new(EntityId(e), category));
    }

    let mut table = Table::open(bundle_file(dir, prefix, GROUND_TRUTHS))?;
    let root_col = table.required("root_entity", &[])?;
    let cols = [
        table.required("subject", &[])?,
        table.required("predicate", &[])?,
        table.required("object", &[])?,
    ];
    let file = table.file.clone();
    let mut truths: BTreeMap<EntityId, SummarySet> = BTreeMap::new();
    for row in table.rows() {
        let row = row?;
        let root = row.ordinal(&file, root_col, "root_entity")?;
        if root as usize >= graph.entity_count() {
            return Err(LoadError::Dangling {
                file,
                line: row.line,
                kind: "entity",
                id: root.to_string(),
            });
        }
        let t = read_triple(&row, &file, cols, graph)?;
        let root = EntityId(root);
        if !t.is_incident(root) {
            return Err(LoadError::NonIncident {
                file,
                line: row.line,
                root: root.0,
                subject: t.subject.0,
                predicate: t.predicate.0,
                object: t.object.0,
            });
        }
        if !graph.contains_triple(&t) {
            return Err(LoadError::Dangling {
                file,
                line: row.line,
                kind: "triple",
                id: format!("({}, {}, {})", t.subject, t.predicate, t.object),
            });
        }
        truths
            .entry(root)
            .or_insert_with(|| SummarySet::new(root))
            .insert(t)
            .expect("incidence checked above");
    }
    Ok((roots, truths))
}

/// Loads all five files plus the optional metadata file.
pub fn load_bundle(dir: &Path, prefix: &str) -> Result<DatasetBundle, LoadError> {
    let graph = load_graph(dir, prefix)?;
    let (roots, ground_truths) = load_annotations(dir, prefix, &graph)?;
    let meta_path = bundle_file(dir, prefix, META);
    let meta = if meta_path.exists() {
        let text = fs::read_to_string(&meta_path).map_err(|source| LoadError::Io {
            file: meta_path.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| LoadError::Syntax {
            file: meta_path.clone(),
            line: e.line() as u64,
            message: e.to_string(),
        })?
    } else {
        BundleMeta::from_prefix(prefix)
    };
    Ok(DatasetBundle {
        graph,
        roots,
        ground_truths,
        meta,
    })
}

fn writer(path: PathBuf) -> std::io::Result<csv::Writer<File>> {
    let file = File::create(path)?;
    Ok(csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(file))
}

fn opt(s: &Option<String>) -> &str {
    s.as_deref().unwrap_or("")
}

fn csv_io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Writes the entity, predicate and triple files. Triples are sorted by
/// `(subject, predicate, object)`.
pub fn save_graph(graph: &KnowledgeGraph, dir: &Path, prefix: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = writer(bundle_file(dir, prefix, ENTITIES))?;
    w.write_record([
        "id",
        "entity",
        "wikidata_label",
        "wikidata_desc",
        "wikipedia_title",
        "wikipedia_id",
    ])
    .map_err(csv_io)?;
    for (i, e) in graph.entities().iter().enumerate() {
        let page = e.wikipedia_id.map(|p| p.to_string()).unwrap_or_default();
        w.write_record([
            i.to_string().as_str(),
            &e.external_id,
            opt(&e.wikidata_label),
            opt(&e.wikidata_desc),
            opt(&e.wikipedia_title),
            &page,
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;

    let mut w = writer(bundle_file(dir, prefix, PREDICATES))?;
    w.write_record(["id", "predicate", "predicate_label", "predicate_desc"])
        .map_err(csv_io)?;
    for (i, p) in graph.predicates().iter().enumerate() {
        w.write_record([
            i.to_string().as_str(),
            &p.external_id,
            opt(&p.label),
            opt(&p.description),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;

    let mut triples = graph.triples().to_vec();
    triples.sort_unstable();
    let mut w = writer(bundle_file(dir, prefix, TRIPLES))?;
    w.write_record(["subject", "predicate", "object"]).map_err(csv_io)?;
    for t in triples {
        w.write_record([
            t.subject.to_string(),
            t.predicate.to_string(),
            t.object.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()
}

/// Writes the root-entity and ground-truth files. Roots keep their order;
/// ground truths are sorted by `(root, subject, predicate, object)`.
pub fn save_annotations(
    roots: &[RootEntity],
    truths: &BTreeMap<EntityId, SummarySet>,
    dir: &Path,
    prefix: &str,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = writer(bundle_file(dir, prefix, ROOTS))?;
    w.write_record(["entity", "category"]).map_err(csv_io)?;
    for r in roots {
        w.write_record([r.entity.to_string().as_str(), &r.category])
            .map_err(csv_io)?;
    }
    w.flush()?;

    let mut w = writer(bundle_file(dir, prefix, GROUND_TRUTHS))?;
    w.write_record(["root_entity", "subject", "predicate", "object"])
        .map_err(csv_io)?;
    // BTreeMap and BTreeSet iteration is already the canonical order
    for (root, set) in truths {
        for t in set.triples() {
            w.write_record([
                root.to_string(),
                t.subject.to_string(),
                t.predicate.to_string(),
                t.object.to_string(),
            ])
            .map_err(csv_io)?;
        }
    }
    w.flush()
}

pub fn save_bundle(bundle: &DatasetBundle, dir: &Path, prefix: &str) -> std::io::Result<()> {
    save_graph(&bundle.graph, dir, prefix)?;
    save_annotations(&bundle.roots, &bundle.ground_truths, dir, prefix)?;
    let mut meta = serde_json::to_string_pretty(&bundle.meta).map_err(std::io::Error::other)?;
    meta.push('\n');
    fs::write(bundle_file(dir, prefix, META), meta)
}
