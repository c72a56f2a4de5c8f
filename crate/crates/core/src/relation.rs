//! Rule-based relation classification over the mentions of one sentence.
//!
//! Every relation word is paired with the nearest entity mention on each
//! side and the pair is classified by category:
//!
//! | left / right | relation word | triple                         |
//! |--------------|---------------|--------------------------------|
//! | E1 / E1      | R1            | left R1 right (symmetric: sorted) |
//! | E1 / E2      | R2            | E2 R2 E1                       |
//! | E1 / E3      | R3            | E3 R3 E1                       |
//! | E1 / P       | (adjacent)    | E1 occurs P                    |
//!
//! Anything else yields no relation.

use serde::{Deserialize, Serialize};

use crate::entity::Mention;
use crate::model::{Category, Predicate, PredicateCategory, Provenance, TagCategory};

/// Maximum word distance between an E1 and a P mention for the `occurs`
/// relation to fire without a relation word.
pub const OCCURS_WINDOW: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub label: String,
    pub category: Category,
}

impl Node {
    pub fn new(label: impl Into<String>, category: Category) -> Node {
        Node { label: label.into(), category }
    }
}

/// A triple before it is stored in the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateTriple {
    pub subject: Node,
    pub predicate: Predicate,
    pub object: Node,
    pub provenance: Vec<Provenance>,
}

impl CandidateTriple {
    /// Builds a triple, putting the endpoints of a symmetric predicate in
    /// label order.
    pub fn new(subject: Node, predicate: Predicate, object: Node, provenance: Provenance) -> Self {
        let (subject, object) = if predicate.symmetric && object.label < subject.label {
            (object, subject)
        } else {
            (subject, object)
        };
        CandidateTriple { subject, predicate, object, provenance: vec![provenance] }
    }

    pub fn key(&self) -> (&str, &str, &str) {
        (&self.subject.label, &self.predicate.name, &self.object.label)
    }
}

fn node(m: &Mention) -> Node {
    let category = m.category.entity_category().expect("entity mention");
    Node::new(m.canonical.clone(), category)
}

fn predicate_for(relation_word: &Mention) -> Predicate {
    let fallback = match relation_word.category {
        TagCategory::R1 => PredicateCategory::R1,
        TagCategory::R3 => PredicateCategory::R3,
        _ => PredicateCategory::R2,
    };
    Predicate::with_fallback(&relation_word.canonical, fallback)
}

fn classify(left: &Mention, word: &Mention, right: &Mention) -> Option<CandidateTriple> {
    use TagCategory::{E1, E2, E3, R1, R2, R3};
    let provenance = Provenance::text(word.sentence_id.clone());
    let predicate = predicate_for(word);
    let (subject, object) = match (left.category, word.category, right.category) {
        (E1, R1, E1) => (left, right),
        (E2, R2, E1) | (E3, R3, E1) => (left, right),
        (E1, R2, E2) | (E1, R3, E3) => (right, left),
        _ => return None,
    };
    if subject.canonical == object.canonical {
        return None;
    }
    Some(CandidateTriple::new(node(subject), predicate, node(object), provenance))
}

/// Classifies the relations expressed in one sentence's mentions.
pub fn extract_relations(mentions: &[Mention]) -> Vec<CandidateTriple> {
    let mut out = Vec::new();
    for (i, word) in mentions.iter().enumerate() {
        if !word.category.is_relation() {
            continue;
        }
        let left = mentions[..i].iter().rev().find(|m| m.category.is_entity());
        let right = mentions[i + 1..].iter().find(|m| m.category.is_entity());
        if let (Some(l), Some(r)) = (left, right) {
            out.extend(classify(l, word, r));
        }
    }

    // E1 next to P with no relation word in between.
    let mut prev: Option<&Mention> = None;
    for m in mentions {
        if m.category.is_relation() {
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            let pair = match (p.category, m.category) {
                (TagCategory::E1, TagCategory::P) => Some((p, m)),
                (TagCategory::P, TagCategory::E1) => Some((m, p)),
                _ => None,
            };
            if let Some((equipment, phenomenon)) = pair {
                if m.token_index - p.token_index <= OCCURS_WINDOW {
                    out.push(CandidateTriple::new(
                        node(equipment),
                        Predicate::occurs(),
                        node(phenomenon),
                        Provenance::text(m.sentence_id.clone()),
                    ));
                }
            }
        }
        prev = Some(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(surface: &str, category: TagCategory, canonical: &str, idx: usize) -> Mention {
        Mention {
            surface: surface.into(),
            category,
            sentence_id: "s".into(),
            token_index: idx,
            canonical: canonical.into(),
        }
    }

    fn keys(triples: &[CandidateTriple]) -> Vec<(String, String, String)> {
        triples
            .iter()
            .map(|t| (t.subject.label.clone(), t.predicate.name.clone(), t.object.label.clone()))
            .collect()
    }

    fn k(s: &str, p: &str, o: &str) -> (String, String, String) {
        (s.into(), p.into(), o.into())
    }

    #[test]
    fn symmetric_connect_is_label_ordered() {
        let ms = [
            m("transformer #1", TagCategory::E1, "transformer #1", 0),
            m("connects", TagCategory::R1, "Connect", 1),
            m("switch #2016", TagCategory::E1, "switch #2016", 2),
        ];
        assert_eq!(keys(&extract_relations(&ms)), vec![k("switch #2016", "Connect", "transformer #1")]);
    }

    #[test]
    fn operator_is_subject_of_r2() {
        let ms = [
            m("operation system 1", TagCategory::E2, "operation system 1", 0),
            m("operates", TagCategory::R2, "Operate", 1),
            m("transformer #1", TagCategory::E1, "transformer #1", 2),
        ];
        assert_eq!(keys(&extract_relations(&ms)), vec![k("operation system 1", "Operate", "transformer #1")]);
        // Passive order: the E2 side is still the subject.
        let ms = [
            m("transformer #1", TagCategory::E1, "transformer #1", 0),
            m("operated", TagCategory::R2, "Operate", 2),
            m("operation system 1", TagCategory::E2, "operation system 1", 4),
        ];
        assert_eq!(keys(&extract_relations(&ms)), vec![k("operation system 1", "Operate", "transformer #1")]);
    }

    #[test]
    fn manufacturer_is_subject_of_r3() {
        let ms = [
            m("transformer #1", TagCategory::E1, "Transformer #1", 0),
            m("made by", TagCategory::R3, "Manufacture", 1),
            m("manufacturer 1", TagCategory::E3, "Manufacturer 1", 2),
        ];
        let out = extract_relations(&ms);
        assert_eq!(keys(&out), vec![k("Manufacturer 1", "Manufacture", "Transformer #1")]);
        assert_eq!(out[0].subject.category, Category::E3);
    }

    #[test]
    fn phenomenon_adjacency_yields_occurs() {
        let ms = [
            m("transformer #1", TagCategory::E1, "transformer #1", 0),
            m("outage", TagCategory::P, "outage", 1),
        ];
        assert_eq!(keys(&extract_relations(&ms)), vec![k("transformer #1", "occurs", "outage")]);
    }

    #[test]
    fn phenomenon_too_far_or_separated_by_relation_word() {
        let far = [
            m("transformer #1", TagCategory::E1, "transformer #1", 0),
            m("outage", TagCategory::P, "outage", 3),
        ];
        assert!(extract_relations(&far).is_empty());
        let separated = [
            m("transformer #1", TagCategory::E1, "transformer #1", 0),
            m("connects", TagCategory::R1, "Connect", 1),
            m("outage", TagCategory::P, "outage", 2),
        ];
        assert!(extract_relations(&separated).is_empty());
    }

    #[test]
    fn outside_table_is_no_relation() {
        let ms = [
            m("operation system 1", TagCategory::E2, "operation system 1", 0),
            m("operates", TagCategory::R2, "Operate", 1),
            m("electrical company 1", TagCategory::E2, "electrical company 1", 2),
        ];
        assert!(extract_relations(&ms).is_empty());
        let wrong_verb = [
            m("manufacturer 1", TagCategory::E3, "manufacturer 1", 0),
            m("operates", TagCategory::R2, "Operate", 1),
            m("transformer #1", TagCategory::E1, "transformer #1", 2),
        ];
        assert!(extract_relations(&wrong_verb).is_empty());
    }

    #[test]
    fn relation_word_without_both_sides() {
        let ms = [
            m("connects", TagCategory::R1, "Connect", 0),
            m("switch #2016", TagCategory::E1, "switch #2016", 1),
        ];
        assert!(extract_relations(&ms).is_empty());
    }

    #[test]
    fn asymmetric_r1_keeps_surface_order() {
        let ms = [
            m("transformer #1", TagCategory::E1, "Transformer #1", 0),
            m("belongs to", TagCategory::R1, "BelongTo", 1),
            m("transformer", TagCategory::E1, "Transformer", 2),
        ];
        assert_eq!(keys(&extract_relations(&ms)), vec![k("Transformer #1", "BelongTo", "Transformer")]);
    }

    #[test]
    fn coreferent_endpoints_produce_nothing() {
        let ms = [
            m("trafo1", TagCategory::E1, "Transformer #1", 0),
            m("connects", TagCategory::R1, "Connect", 1),
            m("transformer #1", TagCategory::E1, "Transformer #1", 2),
        ];
        assert!(extract_relations(&ms).is_empty());
    }

    fn mention_seq() -> impl Strategy<Value = Vec<Mention>> {
        let cats = prop_oneof![
            Just(TagCategory::E1),
            Just(TagCategory::E2),
            Just(TagCategory::E3),
            Just(TagCategory::P),
            Just(TagCategory::R1),
            Just(TagCategory::R2),
            Just(TagCategory::R3),
        ];
        prop::collection::vec((cats, 0usize..4, 1usize..3), 0..10).prop_map(|items| {
            let mut idx = 0;
            items
                .into_iter()
                .map(|(cat, label, gap)| {
                    idx += gap;
                    let canonical = match cat {
                        TagCategory::R1 => ["Connect", "BelongTo"][label % 2].to_string(),
                        TagCategory::R2 => "Operate".to_string(),
                        TagCategory::R3 => "Manufacture".to_string(),
                        c => format!("{}-{label}", c.token()),
                    };
                    m(&canonical, cat, &canonical, idx)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn every_triple_is_anchored_on_equipment(ms in mention_seq()) {
            for t in extract_relations(&ms) {
                prop_assert!(t.subject.category == Category::E1 || t.object.category == Category::E1);
                let pair = (t.subject.category, t.object.category);
                prop_assert!(matches!(
                    pair,
                    (Category::E1, Category::E1) | (Category::E2, Category::E1)
                        | (Category::E3, Category::E1) | (Category::E1, Category::P)
                ));
                if t.predicate.symmetric {
                    prop_assert!(t.subject.label <= t.object.label);
                }
            }
        }

        #[test]
        fn extraction_is_deterministic(ms in mention_seq()) {
            prop_assert_eq!(extract_relations(&ms), extract_relations(&ms));
        }

        #[test]
        fn no_relation_words_and_no_phenomena_means_no_triples(ms in mention_seq()) {
            let filtered: Vec<Mention> = ms
                .into_iter()
                .filter(|m| !m.category.is_relation() && m.category != TagCategory::P)
                .collect();
            prop_assert!(extract_relations(&filtered).is_empty());
        }

        #[test]
        fn swapping_connect_endpoints_gives_same_triple(a in 0usize..5, b in 0usize..5) {
            prop_assume!(a != b);
            let (la, lb) = (format!("E1-{a}"), format!("E1-{b}"));
            let fwd = [m(&la, TagCategory::E1, &la, 0), m("c", TagCategory::R1, "Connect", 1), m(&lb, TagCategory::E1, &lb, 2)];
            let rev = [m(&lb, TagCategory::E1, &lb, 0), m("c", TagCategory::R1, "Connect", 1), m(&la, TagCategory::E1, &la, 2)];
            prop_assert_eq!(keys(&extract_relations(&fwd)), keys(&extract_relations(&rev)));
        }
    }
}
