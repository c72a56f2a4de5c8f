//! Line-oriented graph file.
//!
//! ```text
//! #entities
//! E<TAB>label<TAB>category<TAB>alias1,alias2
//! #triples
//! T<TAB>subject<TAB>predicate<TAB>object<TAB>kind:source;kind:source<TAB>0|1
//! ```
//!
//! Entities are written in label order and triples in (subject label,
//! predicate, object label) order, so equal graphs produce identical files.

use std::fs;
use std::path::Path;

use super::{GraphStore, StoreError};
use crate::model::{Category, Predicate, Provenance, ProvenanceKind};

pub fn write_graph(store: &GraphStore, include_derived: bool) -> String {
    let mut out = String::from("#entities\n");
    let mut entities: Vec<_> = store.entities().iter().collect();
    entities.sort_by(|a, b| a.label.cmp(&b.label));
    for e in entities {
        let aliases: Vec<&str> = e.aliases.iter().map(String::as_str).collect();
        out.push_str(&format!("E\t{}\t{}\t{}\n", e.label, e.category, aliases.join(",")));
    }
    out.push_str("#triples\n");
    let mut rows: Vec<(String, String, String, String, bool)> = store
        .triples()
        .filter(|t| include_derived || !t.derived)
        .map(|t| {
            let prov: Vec<String> = t.provenance.iter().map(Provenance::to_string).collect();
            (store.label(t.s).to_string(), t.p.name, store.label(t.o).to_string(), prov.join(";"), t.derived)
        })
        .collect();
    rows.sort();
    for (s, p, o, prov, derived) in rows {
        out.push_str(&format!("T\t{s}\t{p}\t{o}\t{prov}\t{}\n", u8::from(derived)));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<GraphStore, StoreError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Entities,
        Triples,
    }
    let mut store = GraphStore::new();
    let mut section = Section::None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let malformed = |reason: &str| StoreError::MalformedLine { line_no, reason: reason.to_string() };
        match line {
            "" => continue,
            "#entities" => {
                section = Section::Entities;
                continue;
            }
            "#triples" => {
                section = Section::Triples;
                continue;
            }
            _ => {}
        }
        let cols: Vec<&str> = line.split('\t').collect();
        match (&section, cols.as_slice()) {
            (Section::Entities, ["E", label, category, aliases]) => {
                let category: Category = category.parse().map_err(|_| malformed("unknown category"))?;
                if store.entity_by_label(label).is_some() {
                    return Err(malformed("duplicate entity"));
                }
                let id = store.ensure_entity(label, category).map_err(|e| malformed(&e.to_string()))?;
                for alias in aliases.split(',').filter(|a| !a.is_empty()) {
                    store.add_alias(id, alias).map_err(|e| malformed(&e.to_string()))?;
                }
            }
            (Section::Triples, ["T", s, p, o, prov, derived]) => {
                let derived = match *derived {
                    "0" => false,
                    "1" => true,
                    _ => return Err(malformed("derived flag must be 0 or 1")),
                };
                let s = store.entity_by_label(s).ok_or_else(|| malformed("unknown subject"))?;
                let o = store.entity_by_label(o).ok_or_else(|| malformed("unknown object"))?;
                if p.is_empty() {
                    return Err(malformed("empty predicate"));
                }
                let mut provenance = Vec::new();
                for item in prov.split(';').filter(|i| !i.is_empty()) {
                    let (kind, source) = item.split_once(':').ok_or_else(|| malformed("bad provenance"))?;
                    let kind: ProvenanceKind = kind.parse().map_err(|_| malformed("bad provenance kind"))?;
                    provenance.push(Provenance { kind, source_id: source.to_string() });
                }
                let added = store
                    .insert_ids(s, &Predicate::named(p), o, provenance, derived)
                    .map_err(|e| malformed(&e.to_string()))?;
                if !added {
                    return Err(malformed("duplicate triple"));
                }
            }
            _ => return Err(malformed("unexpected record")),
        }
    }
    Ok(store)
}

/// Writes asserted triples (and derived ones when asked) to `path`.
pub fn save(store: &GraphStore, path: &Path, include_derived: bool) -> Result<(), StoreError> {
    fs::write(path, write_graph(store, include_derived))
        .map_err(|e| StoreError::Io { path: path.to_path_buf(), source: e })
}

pub fn load(path: &Path) -> Result<GraphStore, StoreError> {
    let text = fs::read_to_string(path).map_err(|e| StoreError::Io { path: path.to_path_buf(), source: e })?;
    parse_graph(&text)
}
