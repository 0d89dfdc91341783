use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::bundle::DatasetBundle;
use crate::graph::{EntityId, Triple};

const NODE_KEYS: [(&str, &str, &str); 6] = [
    ("n0", "wikidata_label", "string"),
    ("n1", "wikidata_desc", "string"),
    ("n2", "wikipedia_title", "string"),
    ("n3", "wikipedia_id", "long"),
    ("n4", "is_root", "boolean"),
    ("n5", "category", "string"),
];

const EDGE_KEYS: [(&str, &str, &str); 5] = [
    ("e0", "predicate", "string"),
    ("e1", "predicate_label", "string"),
    ("e2", "predicate_desc", "string"),
    ("e3", "ground_truth", "boolean"),
    ("e4", "summary_for", "string"),
];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn data<W: Write>(w: &mut W, key: &str, value: Option<&str>) -> io::Result<()> {
    match value {
        Some(v) => writeln!(w, "      <data key=\"{key}\">{}</data>", escape(v)),
        None => Ok(()),
    }
}

/// Writes the bundle as a directed GraphML graph. Nodes are keyed by external
/// id; ground-truth edges carry `ground_truth=true` and `summary_for` with the
/// root id(s), comma-separated when a triple summarises several roots.
pub fn write_graphml<W: Write>(bundle: &DatasetBundle, out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    let g = &bundle.graph;
    let categories: BTreeMap<EntityId, &str> = bundle
        .roots
        .iter()
        .map(|r| (r.entity, r.category.as_str()))
        .collect();
    let mut summary_for: BTreeMap<Triple, Vec<&str>> = BTreeMap::new();
    for (root, set) in &bundle.ground_truths {
        for t in set.triples() {
            summary_for
                .entry(*t)
                .or_default()
                .push(&g.entity(*root).external_id);
        }
    }

    writeln!(w, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>")?;
    writeln!(
        w,
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">"
    )?;
    for (id, name, ty) in NODE_KEYS {
        writeln!(w, "  <key id=\"{id}\" for=\"node\" attr.name=\"{name}\" attr.type=\"{ty}\"/>")?;
    }
    for (id, name, ty) in EDGE_KEYS {
        writeln!(w, "  <key id=\"{id}\" for=\"edge\" attr.name=\"{name}\" attr.type=\"{ty}\"/>")?;
    }
    writeln!(w, "  <graph id=\"G\" edgedefault=\"directed\">")?;
    for v in g.entity_ids() {
        let e = g.entity(v);
        writeln!(w, "    <node id=\"{}\">", escape(&e.external_id))?;
        data(&mut w, "n0", e.wikidata_label.as_deref())?;
        data(&mut w, "n1", e.wikidata_desc.as_deref())?;
        data(&mut w, "n2", e.wikipedia_title.as_deref())?;
        data(&mut w, "n3", e.wikipedia_id.map(|p| p.to_string()).as_deref())?;
        if let Some(category) = categories.get(&v) {
            data(&mut w, "n4", Some("true"))?;
            data(&mut w, "n5", Some(category))?;
        }
        writeln!(w, "    </node>")?;
    }
    let mut triples = g.triples().to_vec();
    triples.sort_unstable();
    for t in triples {
        let p = g.predicate(t.predicate);
        writeln!(
            w,
            "    <edge source=\"{}\" target=\"{}\">",
            escape(&g.entity(t.subject).external_id),
            escape(&g.entity(t.object).external_id)
        )?;
        data(&mut w, "e0", Some(&p.external_id))?;
        data(&mut w, "e1", p.label.as_deref())?;
        data(&mut w, "e2", p.description.as_deref())?;
        if let Some(roots) = summary_for.get(&t) {
            data(&mut w, "e3", Some("true"))?;
            data(&mut w, "e4", Some(&roots.join(",")))?;
        }
        writeln!(w, "    </edge>")?;
    }
    writeln!(w, "  </graph>")?;
    writeln!(w, "</graphml>")?;
    w.flush()
}

pub fn export_graphml(bundle: &DatasetBundle, path: &Path) -> io::Result<()> {
    write_graphml(bundle, File::create(path)?)
}
