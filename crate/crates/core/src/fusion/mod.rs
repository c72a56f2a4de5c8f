//! Knowledge fusion: coreference folding across text and structured
//! labels, redundancy filtering, and integration with structured data.
//!
//! Entity disambiguation is deliberately absent: domain terms come from a
//! curated dictionary and are treated as unambiguous.

mod station;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use station::{structured_to_triples, Component, OntologyClass, StationDocument, StationInfo, System, SystemKind};

use crate::lexicon::Lexicon;
use crate::model::{merge_provenance, Category};
use crate::relation::{CandidateTriple, Node};
use crate::text::normalize;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("reference to undeclared {0:?}")]
    DanglingReference(String),
    #[error("ontology class {0:?} is part of a parent cycle")]
    ClassCycle(String),
    #[error("entity {label:?} is both {first} and {second}")]
    CategoryConflict { label: String, first: Category, second: Category },
    #[error("malformed station document: {0}")]
    MalformedDocument(String),
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Output of coreference folding: rewritten triples plus, for each
/// canonical label, the surface variants that were folded into it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Folded {
    pub triples: Vec<CandidateTriple>,
    pub aliases: BTreeMap<String, BTreeSet<String>>,
}

/// Replaces every label by its canonical form.
///
/// Dictionary terms resolve through the lexicon (alias target or the
/// entry's own surface). Other labels are grouped by normalized form and
/// the lexicographically smallest variant of each group wins, so the
/// result does not depend on input order. Categories of everything folded
/// into one label must unify.
pub fn fold_coreferences(triples: &[CandidateTriple], lexicon: &Lexicon) -> Result<Folded, FusionError> {
    let mut groups: HashMap<String, BTreeSet<&str>> = HashMap::new();
    for t in triples {
        for n in [&t.subject, &t.object] {
            if lexicon.canonical_of(&n.label).is_none() {
                groups.entry(normalize(&n.label)).or_default().insert(&n.label);
            }
        }
    }
    let canonical = |label: &str| -> String {
        match lexicon.canonical_of(label) {
            Some(c) => c.to_string(),
            None => groups[&normalize(label)].first().expect("group is non-empty").to_string(),
        }
    };

    let mut categories: BTreeMap<String, Category> = BTreeMap::new();
    let mut aliases: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut unify = |label: &str, cat: Category| -> Result<(), FusionError> {
        match categories.get(label) {
            None => {
                categories.insert(label.to_string(), cat);
            }
            Some(&prev) => {
                let merged = prev.unify(cat).ok_or_else(|| FusionError::CategoryConflict {
                    label: label.to_string(),
                    first: prev,
                    second: cat,
                })?;
                categories.insert(label.to_string(), merged);
            }
        }
        Ok(())
    };

    let mut renamed = Vec::with_capacity(triples.len());
    for t in triples {
        let mut ends = Vec::with_capacity(2);
        for n in [&t.subject, &t.object] {
            let label = canonical(&n.label);
            unify(&label, n.category)?;
            if let Some(dict_cat) = lexicon.lookup(&label).and_then(|e| e.category.entity_category()) {
                unify(&label, dict_cat)?;
            }
            if normalize(&n.label) != normalize(&label) {
                aliases.entry(label.clone()).or_default().insert(n.label.clone());
            }
            ends.push(label);
        }
        renamed.push((ends, t));
    }

    let out = renamed
        .into_iter()
        .map(|(ends, t)| {
            let node = |label: &String| Node::new(label.clone(), categories[label]);
            let mut c = CandidateTriple::new(node(&ends[0]), t.predicate.clone(), node(&ends[1]), t.provenance[0].clone());
            c.provenance = t.provenance.clone();
            c
        })
        .collect();
    Ok(Folded { triples: out, aliases })
}

/// Collapses exact (subject, predicate, object) duplicates, merging their
/// provenance with structured sources first. Self-loops are dropped. The
/// output is sorted by key, so input order does not matter.
pub fn filter_redundant(triples: &[CandidateTriple]) -> Vec<CandidateTriple> {
    let mut merged: BTreeMap<(String, String, String), CandidateTriple> = BTreeMap::new();
    for t in triples {
        if t.subject.label == t.object.label {
            continue;
        }
        let key = (t.subject.label.clone(), t.predicate.name.clone(), t.object.label.clone());
        match merged.get_mut(&key) {
            Some(existing) => merge_provenance(&mut existing.provenance, t.provenance.iter().cloned()),
            None => {
                let mut t = t.clone();
                let prov = std::mem::take(&mut t.provenance);
                merge_provenance(&mut t.provenance, prov);
                merged.insert(key, t);
            }
        }
    }
    merged.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconEntry;
    use crate::model::{Predicate, Provenance, TagCategory, CONNECT, OPERATE};
    use proptest::prelude::*;

    fn t(s: (&str, Category), p: &str, o: (&str, Category), prov: Provenance) -> CandidateTriple {
        CandidateTriple::new(Node::new(s.0, s.1), Predicate::named(p), Node::new(o.0, o.1), prov)
    }

    fn lexicon() -> Lexicon {
        Lexicon::from_entries([
            LexiconEntry::power("Transformer #1", TagCategory::E1),
            LexiconEntry::alias("transformer#1", TagCategory::E1, "Transformer #1"),
            LexiconEntry::power("Management System 1", TagCategory::E2),
            LexiconEntry::alias("trafo", TagCategory::E1, "Management System 1"),
        ])
        .unwrap()
    }

    const E1: Category = Category::E1;

    #[test]
    fn variants_fold_to_one_entity() {
        let ts = vec![
            t(("transformer#1", E1), CONNECT, ("#2016", E1), Provenance::text("a#1")),
            t(("Transformer #1", E1), CONNECT, ("#3016", E1), Provenance::text("a#2")),
            t(("TRANSFORMER #1", E1), CONNECT, ("#3016", E1), Provenance::structured("doc")),
        ];
        let folded = fold_coreferences(&ts, &lexicon()).unwrap();
        let labels: BTreeSet<&str> = folded
            .triples
            .iter()
            .flat_map(|t| [t.subject.label.as_str(), t.object.label.as_str()])
            .collect();
        assert_eq!(labels, BTreeSet::from(["#2016", "#3016", "Transformer #1"]));
        assert_eq!(folded.aliases["Transformer #1"], BTreeSet::from(["transformer#1".to_string()]));
    }

    #[test]
    fn unknown_labels_fold_by_normal_form() {
        let ts = vec![
            t(("Breaker  #5011", E1), CONNECT, ("#2016", E1), Provenance::text("a#1")),
            t(("breaker #5011", E1), CONNECT, ("#3016", E1), Provenance::text("a#2")),
        ];
        let folded = fold_coreferences(&ts, &lexicon()).unwrap();
        // "B" sorts before "b".
        assert!(folded.triples.iter().all(|t| t.subject.label == "#2016" || t.subject.label == "#3016"));
        assert!(folded.triples.iter().all(|t| t.object.label == "Breaker  #5011"));
    }

    #[test]
    fn canonical_input_is_unchanged() {
        let ts = vec![
            t(("#2016", E1), CONNECT, ("Transformer #1", E1), Provenance::structured("doc")),
            t(("Management System 1", Category::System), "Manage", ("Transformer #1", E1), Provenance::structured("doc")),
        ];
        let folded = fold_coreferences(&ts, &lexicon()).unwrap();
        assert_eq!(folded.triples, ts);
        assert!(folded.aliases.is_empty());
    }

    #[test]
    fn alias_across_categories_conflicts() {
        let ts = vec![t(("trafo", E1), CONNECT, ("#2016", E1), Provenance::text("a#1"))];
        assert!(matches!(
            fold_coreferences(&ts, &lexicon()),
            Err(FusionError::CategoryConflict { .. })
        ));
    }

    #[test]
    fn e2_text_mention_unifies_with_structured_system() {
        let ts = vec![
            t(("management system 1", Category::E2), OPERATE, ("Transformer #1", E1), Provenance::text("a#1")),
            t(("Management System 1", Category::System), "Manage", ("Transformer #1", E1), Provenance::structured("d")),
        ];
        let folded = fold_coreferences(&ts, &lexicon()).unwrap();
        assert!(folded.triples.iter().all(|t| t.subject.category == Category::System));
    }

    #[test]
    fn duplicates_merge_provenance() {
        let ts = vec![
            t(("#2016", E1), CONNECT, ("Transformer #1", E1), Provenance::text("corpus#1")),
            t(("#2016", E1), CONNECT, ("Transformer #1", E1), Provenance::text("corpus#2")),
        ];
        let out = filter_redundant(&ts);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].provenance, vec![Provenance::text("corpus#1"), Provenance::text("corpus#2")]);
    }

    #[test]
    fn structured_provenance_listed_first() {
        let ts = vec![
            t(("#2016", E1), CONNECT, ("Transformer #1", E1), Provenance::text("corpus#1")),
            t(("#2016", E1), CONNECT, ("Transformer #1", E1), Provenance::structured("station")),
        ];
        let out = filter_redundant(&ts);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].provenance, vec![Provenance::structured("station"), Provenance::text("corpus#1")]);
    }

    #[test]
    fn empty_filter() {
        assert!(filter_redundant(&[]).is_empty());
    }

    fn triple_strategy() -> impl Strategy<Value = CandidateTriple> {
        let label = prop_oneof![Just("a"), Just("A"), Just("b"), Just("c "), Just("C"), Just("d")];
        let pred = prop_oneof![Just(CONNECT), Just("BelongTo"), Just(OPERATE)];
        let prov = prop_oneof![
            (0u8..3).prop_map(|i| Provenance::text(format!("c#{i}"))),
            Just(Provenance::structured("doc"))
        ];
        (label.clone(), pred, label, prov).prop_map(|(s, p, o, prov)| t((s, E1), p, (o, E1), prov))
    }

    proptest! {
        #[test]
        fn filter_is_idempotent_and_order_insensitive(
            ts in prop::collection::vec(triple_strategy(), 0..30),
            seed in any::<u64>()
        ) {
            let once = filter_redundant(&ts);
            prop_assert_eq!(filter_redundant(&once), once.clone());
            let mut shuffled = ts.clone();
            let n = shuffled.len();
            if n > 1 {
                let mut x = seed;
                for i in (1..n).rev() {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    shuffled.swap(i, (x >> 33) as usize % (i + 1));
                }
            }
            prop_assert_eq!(filter_redundant(&shuffled), once);
        }

        #[test]
        fn fold_then_filter_is_stable(ts in prop::collection::vec(triple_strategy(), 0..30)) {
            let lex = Lexicon::default();
            let once = filter_redundant(&fold_coreferences(&ts, &lex).unwrap().triples);
            let twice = filter_redundant(&fold_coreferences(&once, &lex).unwrap().triples);
            prop_assert_eq!(&twice, &once);
            // No two distinct labels share a normal form.
            let labels: BTreeSet<&str> = once.iter().flat_map(|t| [t.subject.label.as_str(), t.object.label.as_str()]).collect();
            let normals: BTreeSet<String> = labels.iter().map(|l| normalize(l)).collect();
            prop_assert_eq!(labels.len(), normals.len());
        }
    }
}
