//! Retrieval walk-through on the six-entity example graph.

use std::collections::BTreeSet;
use std::path::PathBuf;

use powerkg_core::query::{find_entity, level1, query, Session};
use powerkg_core::store::{load, GraphStore};

fn graph() -> GraphStore {
    load(&PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/fig3/graph.tsv"))).unwrap()
}

fn labels(g: &GraphStore, ids: &[powerkg_core::EntityId]) -> Vec<String> {
    ids.iter().map(|&id| g.label(id).to_string()).collect()
}

#[test]
fn absent_entity_is_not_found() {
    let g = graph();
    assert_eq!(find_entity(&g, "g"), None);
    let tree = query(&g, "g").unwrap();
    assert!(tree.is_not_found());
    assert!(tree.levels.is_empty());
}

#[test]
fn level_one_of_b_lists_all_related_entities() {
    let g = graph();
    let b = find_entity(&g, "b").unwrap();
    let tree = level1(&g, b).unwrap();
    assert_eq!(labels(&g, &tree.levels[0].frontier), ["a", "c", "d", "e"]);
    assert_eq!(tree.levels[0].edges.len(), 4);
}

#[test]
fn drilling_e_then_c() {
    let g = graph();
    let b = find_entity(&g, "b").unwrap();
    let e = find_entity(&g, "e").unwrap();
    let c = find_entity(&g, "c").unwrap();
    let mut s = Session::start(&g, b).unwrap();
    let level = s.drill(&g, e).unwrap().clone();
    let preds: BTreeSet<&str> = level.edges.iter().map(|x| x.predicate.name.as_str()).collect();
    // (c, Operate, e) joins two revealed entities; (e, occurs, f) is new.
    assert_eq!(preds, BTreeSet::from(["Operate", "occurs"]));
    assert_eq!(labels(&g, &level.frontier), ["c", "f"]);
    // Everything around c is already shown.
    assert!(s.drill(&g, c).unwrap().edges.is_empty());
    assert_eq!(s.path, vec![e, c]);
}
