//! JSON payloads shared by `query --json` and the HTTP service.

use serde::{Deserialize, Serialize};

use powerkg_core::query::{Level, ResultTree, TraceTree};
use powerkg_core::store::{Direction, Edge, EntityId, GraphStore};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRef {
    pub id: EntityId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityPayload {
    pub id: EntityId,
    pub label: String,
    pub category: String,
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenancePayload {
    pub kind: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePayload {
    pub subject: EntityRef,
    pub predicate: String,
    pub object: EntityRef,
    /// `out` when the viewing entity is the subject, `in` otherwise.
    pub direction: String,
    pub derived: bool,
    pub provenance: Vec<ProvenancePayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPayload {
    pub frontier: Vec<EntityRef>,
    pub edges: Vec<EdgePayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePayload {
    pub root: Option<EntityPayload>,
    pub not_found: bool,
    pub levels: Vec<LevelPayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPayload {
    pub query: String,
    pub not_found: bool,
    pub entity: Option<EntityPayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPayload {
    pub from: EntityRef,
    pub to: EntityRef,
    pub no_path: bool,
    pub edges: Vec<EdgePayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNodePayload {
    pub entity: EntityRef,
    pub depth: usize,
    pub parent: Option<EntityId>,
    pub via: Option<EdgePayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePayload {
    pub root: EntityRef,
    pub nodes: Vec<TraceNodePayload>,
}

/// An edge the client already holds, by subject id, predicate, object id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeKeyPayload {
    pub subject: EntityId,
    pub predicate: String,
    pub object: EntityId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrillRequest {
    /// Root of the client's tree; defaults to the target.
    #[serde(default)]
    pub root: Option<EntityId>,
    pub revealed: Vec<EntityId>,
    pub target: EntityId,
    /// Edges already displayed. When absent, every edge among `revealed`
    /// counts as displayed.
    #[serde(default)]
    pub edges: Option<Vec<EdgeKeyPayload>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrillPayload {
    pub target: EntityRef,
    pub level: LevelPayload,
    pub revealed: Vec<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub error: String,
    pub message: String,
}

pub fn entity_ref(store: &GraphStore, id: EntityId) -> EntityRef {
    EntityRef { id, label: store.label(id).to_string() }
}

pub fn entity(store: &GraphStore, id: EntityId) -> Option<EntityPayload> {
    let e = store.entity(id)?;
    Some(EntityPayload {
        id,
        label: e.label.clone(),
        category: e.category.to_string(),
        aliases: e.aliases.iter().cloned().collect(),
    })
}

pub fn edge(store: &GraphStore, e: &Edge) -> EdgePayload {
    EdgePayload {
        subject: entity_ref(store, e.subject),
        predicate: e.predicate.name.clone(),
        object: entity_ref(store, e.object),
        direction: match e.direction {
            Direction::Out => "out",
            Direction::In => "in",
        }
        .to_string(),
        derived: e.derived,
        provenance: e
            .provenance
            .iter()
            .map(|p| ProvenancePayload { kind: p.kind.token().to_string(), source: p.source_id.clone() })
            .collect(),
    }
}

pub fn level(store: &GraphStore, l: &Level) -> LevelPayload {
    LevelPayload {
        frontier: l.frontier.iter().map(|&id| entity_ref(store, id)).collect(),
        edges: l.edges.iter().map(|e| edge(store, e)).collect(),
    }
}

pub fn tree(store: &GraphStore, t: &ResultTree) -> TreePayload {
    TreePayload {
        root: t.root.and_then(|id| entity(store, id)),
        not_found: t.is_not_found(),
        levels: t.levels.iter().map(|l| level(store, l)).collect(),
    }
}

pub fn trace(store: &GraphStore, t: &TraceTree) -> TracePayload {
    TracePayload {
        root: entity_ref(store, t.root),
        nodes: t
            .nodes
            .iter()
            .map(|n| TraceNodePayload {
                entity: entity_ref(store, n.entity),
                depth: n.depth,
                parent: n.parent,
                via: n.via.as_ref().map(|e| edge(store, e)),
            })
            .collect(),
    }
}

/// Plain-text rendering of a result tree, one edge per line.
pub fn render_text(store: &GraphStore, query: &str, t: &ResultTree) -> String {
    let Some(root) = t.root else {
        return format!("not found: {query}\n");
    };
    let e = store.entity(root).expect("root exists");
    let mut out = format!("{} [{}]\n", e.label, e.category);
    for (i, l) in t.levels.iter().enumerate() {
        out.push_str(&format!("level {}: {} edges\n", i + 1, l.edges.len()));
        for edge in &l.edges {
            let mark = if edge.derived { " (derived)" } else { "" };
            out.push_str(&format!(
                "  {} -[{}]-> {}{mark}\n",
                store.label(edge.subject),
                edge.predicate.name,
                store.label(edge.object)
            ));
        }
    }
    out
}
