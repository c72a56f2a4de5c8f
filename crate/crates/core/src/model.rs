//! Domain vocabulary shared by every stage of the pipeline: entity
//! categories, predicates and provenance records.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Word category assigned by the electric-power dictionary.
///
/// `None` covers everything that is not a domain term; such words are
/// dropped during entity extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TagCategory {
    /// Power equipment or component.
    E1,
    /// Electrical company, system operator or management organization.
    E2,
    /// Manufacturer.
    E3,
    /// Connection-status verb between equipment.
    R1,
    /// Operation/inspection action verb.
    R2,
    /// Manufacturing action verb.
    R3,
    /// Phenomenon observed during operation or inspection.
    P,
    None,
}

impl TagCategory {
    pub fn is_entity(self) -> bool {
        matches!(self, TagCategory::E1 | TagCategory::E2 | TagCategory::E3 | TagCategory::P)
    }

    pub fn is_relation(self) -> bool {
        matches!(self, TagCategory::R1 | TagCategory::R2 | TagCategory::R3)
    }

    /// Category of the graph node a mention of this category becomes.
    pub fn entity_category(self) -> Option<Category> {
        match self {
            TagCategory::E1 => Some(Category::E1),
            TagCategory::E2 => Some(Category::E2),
            TagCategory::E3 => Some(Category::E3),
            TagCategory::P => Some(Category::P),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            TagCategory::E1 => "E1",
            TagCategory::E2 => "E2",
            TagCategory::E3 => "E3",
            TagCategory::R1 => "R1",
            TagCategory::R2 => "R2",
            TagCategory::R3 => "R3",
            TagCategory::P => "P",
            TagCategory::None => "-",
        }
    }
}

impl FromStr for TagCategory {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "E1" => TagCategory::E1,
            "E2" => TagCategory::E2,
            "E3" => TagCategory::E3,
            "R1" => TagCategory::R1,
            "R2" => TagCategory::R2,
            "R3" => TagCategory::R3,
            "P" => TagCategory::P,
            "-" => TagCategory::None,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for TagCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Category of a node in the knowledge graph.
///
/// Text extraction produces the four dictionary categories; structured
/// station data adds ontology classes, the station itself, systems and
/// companies. `System` and `Company` refine `E2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    E1,
    E2,
    E3,
    P,
    Class,
    Station,
    System,
    Company,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::E1,
        Category::E2,
        Category::E3,
        Category::P,
        Category::Class,
        Category::Station,
        Category::System,
        Category::Company,
    ];

    /// Merges two category claims about the same entity. Returns `None`
    /// when they are incompatible.
    pub fn unify(self, other: Category) -> Option<Category> {
        use Category::*;
        match (self, other) {
            (a, b) if a == b => Some(a),
            (E2, specific @ (System | Company)) | (specific @ (System | Company), E2) => {
                Some(specific)
            }
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Category::E1 => "E1",
            Category::E2 => "E2",
            Category::E3 => "E3",
            Category::P => "P",
            Category::Class => "Class",
            Category::Station => "Station",
            Category::System => "System",
            Category::Company => "Company",
        }
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Category::ALL.into_iter().find(|c| c.token() == s).ok_or(())
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Relation family of a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PredicateCategory {
    R1,
    R2,
    R3,
    Occurs,
}

/// A named edge label.
///
/// Identity (equality, ordering, hashing) is the name alone; category and
/// symmetry are metadata looked up from the built-in vocabulary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub category: PredicateCategory,
    pub symmetric: bool,
}

pub const BELONG_TO: &str = "BelongTo";
pub const CONNECT: &str = "Connect";
pub const OPERATE: &str = "Operate";
pub const MANAGE: &str = "Manage";
pub const MANUFACTURE: &str = "Manufacture";
pub const CONTROL: &str = "Control";
pub const OCCURS: &str = "occurs";

const VOCABULARY: [(&str, PredicateCategory, bool); 7] = [
    (BELONG_TO, PredicateCategory::R1, false),
    (CONNECT, PredicateCategory::R1, true),
    (OPERATE, PredicateCategory::R2, false),
    (MANAGE, PredicateCategory::R2, false),
    (CONTROL, PredicateCategory::R2, false),
    (MANUFACTURE, PredicateCategory::R3, false),
    (OCCURS, PredicateCategory::Occurs, false),
];

impl Predicate {
    /// Resolves a predicate by name. Names outside the built-in vocabulary
    /// are asymmetric and take `fallback` as their category.
    pub fn with_fallback(name: &str, fallback: PredicateCategory) -> Predicate {
        match VOCABULARY.iter().find(|(n, _, _)| *n == name) {
            Some(&(n, category, symmetric)) => Predicate { name: n.to_string(), category, symmetric },
            None => Predicate { name: name.to_string(), category: fallback, symmetric: false },
        }
    }

    pub fn named(name: &str) -> Predicate {
        Predicate::with_fallback(name, PredicateCategory::R2)
    }

    pub fn occurs() -> Predicate {
        Predicate::named(OCCURS)
    }

    pub fn is_builtin(name: &str) -> bool {
        VOCABULARY.iter().any(|(n, _, _)| *n == name)
    }
}

impl PartialEq for Predicate {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Predicate {}

impl Hash for Predicate {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

impl PartialOrd for Predicate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Predicate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name.cmp(&other.name)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProvenanceKind {
    Structured,
    Text,
    Derived,
}

impl ProvenanceKind {
    pub fn token(self) -> &'static str {
        match self {
            ProvenanceKind::Structured => "structured",
            ProvenanceKind::Text => "text",
            ProvenanceKind::Derived => "derived",
        }
    }
}

impl FromStr for ProvenanceKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "structured" => Ok(ProvenanceKind::Structured),
            "text" => Ok(ProvenanceKind::Text),
            "derived" => Ok(ProvenanceKind::Derived),
            _ => Err(()),
        }
    }
}

/// Where a fact came from. For derived facts `source_id` is the rule name.
///
/// Ordering puts structured sources first, which is the order merged
/// provenance lists are kept in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: ProvenanceKind,
    pub source_id: String,
}

impl Provenance {
    pub fn text(source_id: impl Into<String>) -> Self {
        Provenance { kind: ProvenanceKind::Text, source_id: source_id.into() }
    }

    pub fn structured(source_id: impl Into<String>) -> Self {
        Provenance { kind: ProvenanceKind::Structured, source_id: source_id.into() }
    }

    pub fn derived(rule: impl Into<String>) -> Self {
        Provenance { kind: ProvenanceKind::Derived, source_id: rule.into() }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.token(), self.source_id)
    }
}

/// Merges `extra` into `list`, keeping it sorted and free of duplicates.
pub fn merge_provenance(list: &mut Vec<Provenance>, extra: impl IntoIterator<Item = Provenance>) {
    list.extend(extra);
    list.sort();
    list.dedup();
}
