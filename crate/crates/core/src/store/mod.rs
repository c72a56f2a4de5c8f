//! In-memory triple store with SPO, POS and OSP permutation indexes.
//!
//! Entities are addressed internally by dense ids; labels are the external
//! identity and what the graph file records.

mod io;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Bound;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load, parse_graph, save, write_graph};

use crate::model::{merge_provenance, Category, Predicate, Provenance};
use crate::relation::CandidateTriple;
use crate::text::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PredId(u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRecord {
    pub id: EntityId,
    pub label: String,
    pub category: Category,
    pub aliases: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub s: EntityId,
    pub p: Predicate,
    pub o: EntityId,
    pub provenance: Vec<Provenance>,
    pub derived: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Out,
    In,
}

/// A triple seen from one of its endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub subject: EntityId,
    pub predicate: Predicate,
    pub object: EntityId,
    pub direction: Direction,
    pub derived: bool,
    pub provenance: Vec<Provenance>,
}

impl Edge {
    /// The endpoint that is not `from`.
    pub fn other(&self, from: EntityId) -> EntityId {
        if self.subject == from {
            self.object
        } else {
            self.subject
        }
    }

    pub fn key(&self) -> (EntityId, &str, EntityId) {
        (self.subject, &self.predicate.name, self.object)
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("entity {label:?} is {existing}, cannot also be {requested}")]
    CategoryConflict { label: String, existing: Category, requested: Category },
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("invalid label {0:?}")]
    InvalidLabel(String),
    #[error("self-loop on {0:?} is not allowed")]
    SelfLoop(String),
    #[error("invalid provenance source {0:?}")]
    InvalidProvenance(String),
    #[error("malformed graph file line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("failed to access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone)]
struct Fact {
    provenance: Vec<Provenance>,
    derived: bool,
}

type Key = (u32, u32, u32);

#[derive(Debug, Clone, Default)]
pub struct GraphStore {
    entities: Vec<EntityRecord>,
    by_label: HashMap<String, EntityId>,
    by_normal: HashMap<String, EntityId>,
    by_alias: HashMap<String, EntityId>,
    predicates: Vec<Predicate>,
    pred_ids: HashMap<String, PredId>,
    facts: HashMap<Key, Fact>,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
}

fn check_label(label: &str) -> Result<(), StoreError> {
    if label.trim().is_empty() || label.contains(['\t', '\n', '\r']) {
        return Err(StoreError::InvalidLabel(label.to_string()));
    }
    Ok(())
}

fn check_provenance(p: &Provenance) -> Result<(), StoreError> {
    if p.source_id.contains(['\t', '\n', '\r', ';']) {
        return Err(StoreError::InvalidProvenance(p.source_id.clone()));
    }
    Ok(())
}

impl GraphStore {
    pub fn new() -> GraphStore {
        GraphStore::default()
    }

    /// Returns the id of `label`, creating the entity if needed. An
    /// existing entity's category is refined when the two unify.
    pub fn ensure_entity(&mut self, label: &str, category: Category) -> Result<EntityId, StoreError> {
        if let Some(&id) = self.by_label.get(label) {
            let rec = &mut self.entities[id.0 as usize];
            rec.category = rec.category.unify(category).ok_or_else(|| StoreError::CategoryConflict {
                label: label.to_string(),
                existing: rec.category,
                requested: category,
            })?;
            return Ok(id);
        }
        check_label(label)?;
        let id = EntityId(self.entities.len() as u32);
        self.entities.push(EntityRecord { id, label: label.to_string(), category, aliases: BTreeSet::new() });
        self.by_label.insert(label.to_string(), id);
        self.by_normal.entry(normalize(label)).or_insert(id);
        Ok(id)
    }

    pub fn add_alias(&mut self, id: EntityId, alias: &str) -> Result<(), StoreError> {
        check_label(alias)?;
        if alias.contains(',') {
            return Err(StoreError::InvalidLabel(alias.to_string()));
        }
        let rec = self.entities.get_mut(id.0 as usize).ok_or_else(|| StoreError::UnknownEntity(id.to_string()))?;
        if alias == rec.label {
            return Ok(());
        }
        rec.aliases.insert(alias.to_string());
        self.by_alias.entry(normalize(alias)).or_insert(id);
        Ok(())
    }

    fn pred_id(&mut self, p: &Predicate) -> PredId {
        if let Some(&id) = self.pred_ids.get(&p.name) {
            return id;
        }
        let id = PredId(self.predicates.len() as u32);
        self.predicates.push(p.clone());
        self.pred_ids.insert(p.name.clone(), id);
        id
    }

    /// Inserts a triple between existing entities. Symmetric predicates
    /// are stored with the smaller label as subject. Re-inserting merges
    /// provenance; an asserted insert over a derived triple makes it
    /// asserted. Returns whether a new triple was added.
    pub fn insert_ids(
        &mut self,
        s: EntityId,
        p: &Predicate,
        o: EntityId,
        provenance: impl IntoIterator<Item = Provenance>,
        derived: bool,
    ) -> Result<bool, StoreError> {
        for id in [s, o] {
            if id.0 as usize >= self.entities.len() {
                return Err(StoreError::UnknownEntity(id.to_string()));
            }
        }
        if s == o {
            return Err(StoreError::SelfLoop(self.label(s).to_string()));
        }
        let provenance: Vec<Provenance> = provenance.into_iter().collect();
        for prov in &provenance {
            check_provenance(prov)?;
        }
        let (s, o) = if p.symmetric && self.label(o) < self.label(s) { (o, s) } else { (s, o) };
        let pid = self.pred_id(p);
        let key = (s.0, pid.0, o.0);
        if let Some(fact) = self.facts.get_mut(&key) {
            match (fact.derived, derived) {
                (false, true) => {}
                (true, false) => {
                    fact.derived = false;
                    fact.provenance = provenance;
                    fact.provenance.sort();
                    fact.provenance.dedup();
                }
                _ => merge_provenance(&mut fact.provenance, provenance),
            }
            return Ok(false);
        }
        let mut list = Vec::new();
        merge_provenance(&mut list, provenance);
        self.facts.insert(key, Fact { provenance: list, derived });
        self.spo.insert(key);
        self.pos.insert((pid.0, o.0, s.0));
        self.osp.insert((o.0, s.0, pid.0));
        Ok(true)
    }

    /// Inserts an asserted candidate triple, creating endpoints as needed.
    pub fn insert(&mut self, t: &CandidateTriple) -> Result<bool, StoreError> {
        let s = self.ensure_entity(&t.subject.label, t.subject.category)?;
        let o = self.ensure_entity(&t.object.label, t.object.category)?;
        self.insert_ids(s, &t.predicate, o, t.provenance.iter().cloned(), false)
    }

    pub fn remove_derived(&mut self) {
        let derived: Vec<Key> = self.facts.iter().filter(|(_, f)| f.derived).map(|(k, _)| *k).collect();
        for key in derived {
            let (s, p, o) = key;
            self.facts.remove(&key);
            self.spo.remove(&key);
            self.pos.remove(&(p, o, s));
            self.osp.remove(&(o, s, p));
        }
    }

    pub fn entity(&self, id: EntityId) -> Option<&EntityRecord> {
        self.entities.get(id.0 as usize)
    }

    pub fn label(&self, id: EntityId) -> &str {
        &self.entities[id.0 as usize].label
    }

    pub fn entity_by_label(&self, label: &str) -> Option<EntityId> {
        self.by_label.get(label).copied()
    }

    /// Resolves a user-supplied label: exact label first, then the
    /// normalized label, then normalized aliases.
    pub fn resolve(&self, query: &str) -> Option<EntityId> {
        if let Some(&id) = self.by_label.get(query) {
            return Some(id);
        }
        let key = normalize(query);
        self.by_normal.get(&key).or_else(|| self.by_alias.get(&key)).copied()
    }

    pub fn entities(&self) -> &[EntityRecord] {
        &self.entities
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn derived_count(&self) -> usize {
        self.facts.values().filter(|f| f.derived).count()
    }

    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.pred_ids.get(name).map(|id| &self.predicates[id.0 as usize])
    }

    fn triple_at(&self, key: Key) -> Triple {
        let fact = &self.facts[&key];
        Triple {
            s: EntityId(key.0),
            p: self.predicates[key.1 as usize].clone(),
            o: EntityId(key.2),
            provenance: fact.provenance.clone(),
            derived: fact.derived,
        }
    }

    pub fn get(&self, s: EntityId, predicate: &str, o: EntityId) -> Option<Triple> {
        let p = self.pred_ids.get(predicate)?;
        let key = (s.0, p.0, o.0);
        self.facts.contains_key(&key).then(|| self.triple_at(key))
    }

    pub fn contains(&self, s: EntityId, predicate: &str, o: EntityId) -> bool {
        self.pred_ids.get(predicate).is_some_and(|p| self.facts.contains_key(&(s.0, p.0, o.0)))
    }

    /// All triples in SPO order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(|&k| self.triple_at(k))
    }

    fn range(set: &BTreeSet<Key>, first: u32) -> impl Iterator<Item = &Key> {
        set.range((Bound::Included((first, 0, 0)), Bound::Included((first, u32::MAX, u32::MAX))))
    }

    pub fn by_subject(&self, s: EntityId) -> Vec<Triple> {
        Self::range(&self.spo, s.0).map(|&k| self.triple_at(k)).collect()
    }

    pub fn by_predicate(&self, predicate: &str) -> Vec<Triple> {
        let Some(p) = self.pred_ids.get(predicate) else { return Vec::new() };
        Self::range(&self.pos, p.0).map(|&(p, o, s)| self.triple_at((s, p, o))).collect()
    }

    pub fn by_object(&self, o: EntityId) -> Vec<Triple> {
        Self::range(&self.osp, o.0).map(|&(o, s, p)| self.triple_at((s, p, o))).collect()
    }

    /// Raw (subject, predicate, object) keys of all triples with the given
    /// predicate name.
    pub fn pairs_of(&self, predicate: &str) -> Vec<(EntityId, EntityId)> {
        let Some(p) = self.pred_ids.get(predicate) else { return Vec::new() };
        Self::range(&self.pos, p.0).map(|&(_, o, s)| (EntityId(s), EntityId(o))).collect()
    }

    /// Every triple incident to `id`, sorted by predicate name, then the
    /// other endpoint's label, then direction. Symmetric predicates are
    /// reported as outgoing from either endpoint.
    pub fn neighbors(&self, id: EntityId) -> Result<Vec<Edge>, StoreError> {
        if self.entity(id).is_none() {
            return Err(StoreError::UnknownEntity(id.to_string()));
        }
        let mut edges: Vec<Edge> = Vec::new();
        for &(s, p, o) in Self::range(&self.spo, id.0) {
            edges.push(self.edge((s, p, o), Direction::Out));
        }
        for &(o, s, p) in Self::range(&self.osp, id.0) {
            let pred = &self.predicates[p as usize];
            let dir = if pred.symmetric { Direction::Out } else { Direction::In };
            edges.push(self.edge((s, p, o), dir));
        }
        edges.sort_by(|a, b| {
            (&a.predicate.name, self.label(a.other(id)), a.direction)
                .cmp(&(&b.predicate.name, self.label(b.other(id)), b.direction))
        });
        Ok(edges)
    }

    fn edge(&self, key: Key, direction: Direction) -> Edge {
        let fact = &self.facts[&key];
        Edge {
            subject: EntityId(key.0),
            predicate: self.predicates[key.1 as usize].clone(),
            object: EntityId(key.2),
            direction,
            derived: fact.derived,
            provenance: fact.provenance.clone(),
        }
    }

    /// Whether the three indexes hold the same triple set.
    pub fn indexes_coherent(&self) -> bool {
        let from_pos: BTreeSet<Key> = self.pos.iter().map(|&(p, o, s)| (s, p, o)).collect();
        let from_osp: BTreeSet<Key> = self.osp.iter().map(|&(o, s, p)| (s, p, o)).collect();
        let from_facts: BTreeSet<Key> = self.facts.keys().copied().collect();
        self.spo == from_pos && self.spo == from_osp && self.spo == from_facts
    }
}
