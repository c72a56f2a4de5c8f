//! Structured station topology documents (TOML) and their triples.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FusionError;
use crate::model::{Category, Predicate, Provenance, BELONG_TO, CONNECT, CONTROL, MANAGE, MANUFACTURE, OPERATE};
use crate::relation::{CandidateTriple, Node};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationInfo {
    pub label: String,
    pub voltage_class: String,
}

/// An ontology class. Classes without a parent belong directly to the
/// station; a bare string in the document is shorthand for that.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OntologyClass {
    Label(String),
    Nested { label: String, parent: Option<String> },
}

impl OntologyClass {
    pub fn label(&self) -> &str {
        match self {
            OntologyClass::Label(l) | OntologyClass::Nested { label: l, .. } => l,
        }
    }

    pub fn parent(&self) -> Option<&str> {
        match self {
            OntologyClass::Label(_) => None,
            OntologyClass::Nested { parent, .. } => parent.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub label: String,
    pub ontology_class: String,
    pub voltage_level: String,
    pub manufacturer: Option<String>,
    pub operator_system: Option<String>,
    pub management_system: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    Operation,
    Management,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct System {
    pub label: String,
    pub kind: SystemKind,
    pub controlled_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationDocument {
    #[serde(default)]
    pub companies: Vec<String>,
    #[serde(default)]
    pub connections: Vec<[String; 2]>,
    pub station: StationInfo,
    #[serde(default)]
    pub ontology_classes: Vec<OntologyClass>,
    #[serde(default)]
    pub components: Vec<Component>,
    #[serde(default)]
    pub systems: Vec<System>,
}

impl StationDocument {
    pub fn from_toml(text: &str) -> Result<StationDocument, FusionError> {
        toml::from_str(text).map_err(|e| FusionError::MalformedDocument(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<StationDocument, FusionError> {
        let text = fs::read_to_string(path)
            .map_err(|e| FusionError::Io { path: path.to_path_buf(), source: e })?;
        StationDocument::from_toml(&text).map_err(|e| match e {
            FusionError::MalformedDocument(msg) => {
                FusionError::MalformedDocument(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    /// Checks every cross reference in the document.
    pub fn validate(&self) -> Result<(), FusionError> {
        let dangling = |l: &str| Err(FusionError::DanglingReference(l.to_string()));
        let classes: HashMap<&str, Option<&str>> =
            self.ontology_classes.iter().map(|c| (c.label(), c.parent())).collect();
        for class in &self.ontology_classes {
            if let Some(parent) = class.parent() {
                if !classes.contains_key(parent) {
                    return dangling(parent);
                }
            }
            // Walk up the hierarchy; a chain longer than the class count is a cycle.
            let mut cursor = class.parent();
            let mut steps = 0;
            while let Some(p) = cursor {
                steps += 1;
                if steps > classes.len() {
                    return Err(FusionError::ClassCycle(class.label().to_string()));
                }
                cursor = classes.get(p).copied().flatten();
            }
        }
        let systems: HashMap<&str, SystemKind> = self.systems.iter().map(|s| (s.label.as_str(), s.kind)).collect();
        let companies: HashSet<&str> = self.companies.iter().map(String::as_str).collect();
        let mut components = HashSet::new();
        for c in &self.components {
            components.insert(c.label.as_str());
            if !classes.contains_key(c.ontology_class.as_str()) {
                return dangling(&c.ontology_class);
            }
            let refs = [(&c.operator_system, SystemKind::Operation), (&c.management_system, SystemKind::Management)];
            for (system, kind) in refs {
                if let Some(s) = system {
                    if systems.get(s.as_str()) != Some(&kind) {
                        return dangling(s);
                    }
                }
            }
        }
        for [a, b] in &self.connections {
            for end in [a, b] {
                if !components.contains(end.as_str()) {
                    return dangling(end);
                }
            }
        }
        for s in &self.systems {
            if let Some(company) = &s.controlled_by {
                if !companies.contains(company.as_str()) {
                    return dangling(company);
                }
            }
        }
        Ok(())
    }
}

/// Converts a station document into structured triples.
///
/// Each ontology class belongs to its parent (or the station), each
/// component to its class; connections, operating and managing systems,
/// manufacturers and controlling companies become the matching edges.
pub fn structured_to_triples(doc: &StationDocument, source_id: &str) -> Result<Vec<CandidateTriple>, FusionError> {
    doc.validate()?;
    let prov = || Provenance::structured(source_id);
    let station = Node::new(doc.station.label.clone(), Category::Station);
    let class = |l: &str| Node::new(l, Category::Class);
    let mut out = Vec::new();
    let mut push = |s: Node, p: &str, o: Node| out.push(CandidateTriple::new(s, Predicate::named(p), o, prov()));

    for c in &doc.ontology_classes {
        let parent = c.parent().map(class).unwrap_or_else(|| station.clone());
        push(class(c.label()), BELONG_TO, parent);
    }
    let mut connected = BTreeSet::new();
    for comp in &doc.components {
        let me = Node::new(comp.label.clone(), Category::E1);
        push(me.clone(), BELONG_TO, class(&comp.ontology_class));
        if let Some(s) = &comp.operator_system {
            push(Node::new(s.clone(), Category::System), OPERATE, me.clone());
        }
        if let Some(s) = &comp.management_system {
            push(Node::new(s.clone(), Category::System), MANAGE, me.clone());
        }
        if let Some(m) = &comp.manufacturer {
            push(Node::new(m.clone(), Category::E3), MANUFACTURE, me.clone());
        }
    }
    for [a, b] in &doc.connections {
        // Unordered pairs; the same connection listed twice is emitted once.
        let pair = if a <= b { (a, b) } else { (b, a) };
        if a != b && connected.insert(pair) {
            push(Node::new(a.clone(), Category::E1), CONNECT, Node::new(b.clone(), Category::E1));
        }
    }
    for s in &doc.systems {
        if let Some(company) = &s.controlled_by {
            push(Node::new(company.clone(), Category::Company), CONTROL, Node::new(s.label.clone(), Category::System));
        }
    }
    Ok(out)
}
