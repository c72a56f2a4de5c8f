//! Breadth-first spanning trees and shortest paths, ignoring direction.

use std::collections::{HashMap, VecDeque};

use super::QueryError;
use crate::store::{Edge, EntityId, GraphStore};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub entity: EntityId,
    pub depth: usize,
    pub parent: Option<EntityId>,
    /// The edge that reached this node from its parent.
    pub via: Option<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceTree {
    pub root: EntityId,
    /// Nodes in BFS order; children of a node are ordered by
    /// (predicate, label).
    pub nodes: Vec<TraceNode>,
}

/// Spanning tree of the connected component of `root`.
pub fn trace(store: &GraphStore, root: EntityId) -> Result<TraceTree, QueryError> {
    if store.entity(root).is_none() {
        return Err(QueryError::UnknownEntity(root));
    }
    let mut nodes = vec![TraceNode { entity: root, depth: 0, parent: None, via: None }];
    let mut visited: HashMap<EntityId, usize> = HashMap::from([(root, 0)]);
    let mut cursor = 0;
    while cursor < nodes.len() {
        let (u, depth) = (nodes[cursor].entity, nodes[cursor].depth);
        cursor += 1;
        for e in store.neighbors(u)? {
            let v = e.other(u);
            if visited.contains_key(&v) {
                continue;
            }
            visited.insert(v, nodes.len());
            nodes.push(TraceNode { entity: v, depth: depth + 1, parent: Some(u), via: Some(e) });
        }
    }
    Ok(TraceTree { root, nodes })
}

fn distances_from(store: &GraphStore, start: EntityId) -> Result<HashMap<EntityId, usize>, QueryError> {
    let mut dist = HashMap::from([(start, 0usize)]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for e in store.neighbors(u)? {
            let v = e.other(u);
            if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(v) {
                slot.insert(d + 1);
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// A shortest undirected path from `from` to `to` as a list of edges, each
/// oriented as seen from the walker. Among equal-length paths, every step
/// takes the smallest (predicate, label). `None` when unreachable.
pub fn shortest_path(store: &GraphStore, from: EntityId, to: EntityId) -> Result<Option<Vec<Edge>>, QueryError> {
    for id in [from, to] {
        if store.entity(id).is_none() {
            return Err(QueryError::UnknownEntity(id));
        }
    }
    let dist = distances_from(store, to)?;
    let Some(&total) = dist.get(&from) else { return Ok(None) };
    let mut path = Vec::with_capacity(total);
    let mut cur = from;
    while cur != to {
        let d = dist[&cur];
        let step = store
            .neighbors(cur)?
            .into_iter()
            .find(|e| dist.get(&e.other(cur)) == Some(&(d - 1)))
            .expect("a closer neighbor exists on a BFS layer");
        cur = step.other(cur);
        path.push(step);
    }
    Ok(Some(path))
}
