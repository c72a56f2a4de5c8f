//! Level-wise retrieval over a [`GraphStore`].
//!
//! A query reveals the one-hop star of an entity; each drill expands one
//! revealed entity into a further level. Derived triples are expected to
//! be materialized into the store beforehand (see [`materialize`]), so
//! retrieval treats them like any other edge, flagged by `Edge::derived`.

mod rules;
mod trace;

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

pub use rules::{materialize, saturate, DerivedTriple, InferenceRule, Pattern, RuleError, RuleSet, Term, DEFAULT_RULES};
pub use trace::{shortest_path, trace, TraceNode, TraceTree};

use crate::store::{Edge, EntityId, GraphStore, StoreError};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("entity {0} has not been revealed yet")]
    TargetNotRevealed(EntityId),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// One ring of a result tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Level {
    /// Endpoints reached through this level's edges, in label order.
    pub frontier: Vec<EntityId>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultTree {
    pub root: Option<EntityId>,
    pub levels: Vec<Level>,
}

impl ResultTree {
    pub fn not_found() -> ResultTree {
        ResultTree::default()
    }

    pub fn is_not_found(&self) -> bool {
        self.root.is_none()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.levels.iter().flat_map(|l| l.edges.iter())
    }
}

type EdgeKey = (EntityId, String, EntityId);

fn edge_key(e: &Edge) -> EdgeKey {
    (e.subject, e.predicate.name.clone(), e.object)
}

/// Resolves a free-text label to an entity (exact, normalized, alias).
pub fn find_entity(store: &GraphStore, query: &str) -> Option<EntityId> {
    store.resolve(query)
}

/// An interactive retrieval: the tree so far plus what has been revealed.
#[derive(Debug, Clone)]
pub struct Session {
    pub tree: ResultTree,
    pub revealed: BTreeSet<EntityId>,
    /// Entities drilled into, in order.
    pub path: Vec<EntityId>,
    seen: HashSet<EdgeKey>,
}

impl Session {
    /// Starts a session with the one-hop view of `root`.
    pub fn start(store: &GraphStore, root: EntityId) -> Result<Session, QueryError> {
        let edges = neighbors(store, root)?;
        let frontier = sorted_by_label(store, edges.iter().map(|e| e.other(root)));
        let mut revealed: BTreeSet<EntityId> = frontier.iter().copied().collect();
        revealed.insert(root);
        let seen = edges.iter().map(edge_key).collect();
        Ok(Session {
            tree: ResultTree { root: Some(root), levels: vec![Level { frontier, edges }] },
            revealed,
            path: Vec::new(),
            seen,
        })
    }

    /// Rebuilds a session from what a client already holds. Without an
    /// explicit edge list, every edge among `revealed` counts as seen.
    pub fn resume(
        store: &GraphStore,
        root: EntityId,
        revealed: impl IntoIterator<Item = EntityId>,
        known_edges: Option<Vec<(EntityId, String, EntityId)>>,
    ) -> Result<Session, QueryError> {
        let mut set: BTreeSet<EntityId> = revealed.into_iter().collect();
        set.insert(root);
        for &id in &set {
            if store.entity(id).is_none() {
                return Err(QueryError::UnknownEntity(id));
            }
        }
        let seen = match known_edges {
            Some(keys) => keys.into_iter().collect(),
            None => {
                let mut seen = HashSet::new();
                for &id in &set {
                    for e in store.neighbors(id)? {
                        if set.contains(&e.other(id)) {
                            seen.insert(edge_key(&e));
                        }
                    }
                }
                seen
            }
        };
        Ok(Session { tree: ResultTree { root: Some(root), levels: Vec::new() }, revealed: set, path: Vec::new(), seen })
    }

    /// Expands `target`, which must already be revealed, and appends the
    /// new level to the tree.
    ///
    /// The level holds the target's edges not shown before, plus any
    /// unseen edge joining a newly revealed entity to a revealed one.
    pub fn drill(&mut self, store: &GraphStore, target: EntityId) -> Result<&Level, QueryError> {
        let (level, _) = self.expand(store, target)?;
        self.path.push(target);
        self.tree.levels.push(level);
        Ok(self.tree.levels.last().expect("level just pushed"))
    }

    fn expand(&mut self, store: &GraphStore, target: EntityId) -> Result<(Level, Vec<EntityId>), QueryError> {
        if store.entity(target).is_none() {
            return Err(QueryError::UnknownEntity(target));
        }
        if !self.revealed.contains(&target) {
            return Err(QueryError::TargetNotRevealed(target));
        }
        let mut edges: Vec<Edge> = Vec::new();
        for e in store.neighbors(target)? {
            if self.seen.insert(edge_key(&e)) {
                edges.push(e);
            }
        }
        let frontier = sorted_by_label(store, edges.iter().map(|e| e.other(target)));
        let newly: Vec<EntityId> = frontier.iter().copied().filter(|id| !self.revealed.contains(id)).collect();
        self.revealed.extend(newly.iter().copied());
        for &n in &newly {
            for e in store.neighbors(n)? {
                if self.revealed.contains(&e.other(n)) && self.seen.insert(edge_key(&e)) {
                    edges.push(e);
                }
            }
        }
        Ok((Level { frontier, edges }, newly))
    }
}

fn neighbors(store: &GraphStore, id: EntityId) -> Result<Vec<Edge>, QueryError> {
    if store.entity(id).is_none() {
        return Err(QueryError::UnknownEntity(id));
    }
    Ok(store.neighbors(id)?)
}

fn sorted_by_label(store: &GraphStore, ids: impl Iterator<Item = EntityId>) -> Vec<EntityId> {
    let set: BTreeSet<EntityId> = ids.collect();
    let mut out: Vec<EntityId> = set.into_iter().collect();
    out.sort_by(|a, b| store.label(*a).cmp(store.label(*b)));
    out
}

/// The one-hop view of `root`.
pub fn level1(store: &GraphStore, root: EntityId) -> Result<ResultTree, QueryError> {
    Ok(Session::start(store, root)?.tree)
}

/// Resolves `query` and returns its one-hop view, or a not-found tree.
pub fn query(store: &GraphStore, query: &str) -> Result<ResultTree, QueryError> {
    match find_entity(store, query) {
        Some(id) => level1(store, id),
        None => Ok(ResultTree::not_found()),
    }
}

/// Views `root` out to `depth` hops: level one, then each further level
/// drills every entity revealed by the previous one, merged into a
/// single level. For `depth >= 2` the edge set is exactly the subgraph
/// induced by the entities within `depth` hops.
pub fn neighborhood(store: &GraphStore, root: EntityId, depth: usize) -> Result<ResultTree, QueryError> {
    if depth == 0 {
        neighbors(store, root)?;
        return Ok(ResultTree { root: Some(root), levels: Vec::new() });
    }
    let mut session = Session::start(store, root)?;
    let mut targets = session.tree.levels[0].frontier.clone();
    for _ in 1..depth {
        if targets.is_empty() {
            break;
        }
        let mut merged = Level::default();
        let mut next = Vec::new();
        for t in targets {
            let (level, newly) = session.expand(store, t)?;
            merged.frontier.extend(level.frontier);
            merged.edges.extend(level.edges);
            next.extend(newly);
        }
        merged.frontier = sorted_by_label(store, merged.frontier.into_iter());
        session.tree.levels.push(merged);
        targets = sorted_by_label(store, next.into_iter());
    }
    Ok(session.tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Category, Predicate, Provenance};
    use crate::relation::{CandidateTriple, Node};
    use proptest::prelude::*;
    use std::collections::{HashMap, VecDeque};

    fn graph(edges: &[(&str, &str, &str)]) -> GraphStore {
        let mut g = GraphStore::new();
        for (s, p, o) in edges {
            g.insert(&CandidateTriple::new(
                Node::new(*s, Category::E1),
                Predicate::named(p),
                Node::new(*o, Category::E1),
                Provenance::structured("t"),
            ))
            .unwrap();
        }
        g
    }

    fn fig() -> GraphStore {
        graph(&[
            ("a", "BelongTo", "b"),
            ("a", "Connect", "c"),
            ("d", "Operate", "a"),
            ("c", "Connect", "e"),
            ("e", "BelongTo", "f"),
        ])
    }

    fn labels(g: &GraphStore, ids: &[EntityId]) -> Vec<String> {
        ids.iter().map(|&i| g.label(i).to_string()).collect()
    }

    fn keys<'a>(g: &GraphStore, edges: impl Iterator<Item = &'a Edge>) -> BTreeSet<(String, String, String)> {
        edges.map(|e| (g.label(e.subject).into(), e.predicate.name.clone(), g.label(e.object).into())).collect()
    }

    #[test]
    fn level_one_is_the_star() {
        let g = fig();
        let a = find_entity(&g, "a").unwrap();
        let tree = level1(&g, a).unwrap();
        assert_eq!(tree.levels.len(), 1);
        assert_eq!(labels(&g, &tree.levels[0].frontier), ["b", "c", "d"]);
        assert_eq!(tree.levels[0].edges.len(), 3);
    }

    #[test]
    fn unknown_label_is_not_found() {
        let tree = query(&fig(), "g").unwrap();
        assert!(tree.is_not_found());
        assert!(tree.levels.is_empty());
    }

    #[test]
    fn drill_adds_unseen_edges_only() {
        let g = fig();
        let a = g.entity_by_label("a").unwrap();
        let c = g.entity_by_label("c").unwrap();
        let mut s = Session::start(&g, a).unwrap();
        let level = s.drill(&g, c).unwrap();
        assert_eq!(labels(&g, &level.frontier), ["e"]);
        let got = keys(&g, level.edges.iter());
        assert_eq!(got, BTreeSet::from([("c".into(), "Connect".into(), "e".into())]));
        assert_eq!(s.path, vec![c]);
    }

    #[test]
    fn drill_requires_revealed_target() {
        let g = fig();
        let a = g.entity_by_label("a").unwrap();
        let f = g.entity_by_label("f").unwrap();
        let mut s = Session::start(&g, a).unwrap();
        assert!(matches!(s.drill(&g, f), Err(QueryError::TargetNotRevealed(id)) if id == f));
        assert!(matches!(s.drill(&g, EntityId(99)), Err(QueryError::UnknownEntity(_))));
    }

    #[test]
    fn drill_surfaces_edges_between_new_and_revealed() {
        // x and y both hang off r; drilling x reveals z, which links back to y.
        let g = graph(&[("r", "Connect", "x"), ("r", "Connect", "y"), ("x", "Operate", "z"), ("z", "Control", "y")]);
        let r = g.entity_by_label("r").unwrap();
        let x = g.entity_by_label("x").unwrap();
        let mut s = Session::start(&g, r).unwrap();
        let level = s.drill(&g, x).unwrap();
        let got = keys(&g, level.edges.iter());
        assert!(got.contains(&("z".into(), "Control".into(), "y".into())));
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn resume_without_edges_matches_live_session() {
        let g = fig();
        let a = g.entity_by_label("a").unwrap();
        let c = g.entity_by_label("c").unwrap();
        let mut live = Session::start(&g, a).unwrap();
        let mut resumed = Session::resume(&g, a, live.revealed.clone(), None).unwrap();
        let l1 = live.drill(&g, c).unwrap().clone();
        let l2 = resumed.drill(&g, c).unwrap().clone();
        assert_eq!(l1, l2);
    }

    #[test]
    fn depth_two_equals_level_one_plus_drills() {
        let g = fig();
        let a = g.entity_by_label("a").unwrap();
        let tree = neighborhood(&g, a, 2).unwrap();
        let mut s = Session::start(&g, a).unwrap();
        for t in s.tree.levels[0].frontier.clone() {
            s.drill(&g, t).unwrap();
        }
        assert_eq!(keys(&g, tree.edges()), keys(&g, s.tree.edges()));
        assert_eq!(tree.levels.len(), 2);
    }

    /// Undirected BFS distances from `root` over a plain edge list.
    fn ball(n: usize, edges: &[(usize, usize)], root: usize, k: usize) -> Vec<bool> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut dist = vec![usize::MAX; n];
        dist[root] = 0;
        let mut q = VecDeque::from([root]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        dist.iter().map(|&d| d <= k).collect()
    }

    proptest! {
        #[test]
        fn neighborhood_matches_bfs_oracle(
            n in 2usize..12,
            raw in prop::collection::vec((0usize..12, 0usize..3, 0usize..12), 0..40),
            root in 0usize..12,
            depth in 1usize..4,
        ) {
            let preds = ["BelongTo", "Connect", "Operate"];
            let mut seen = HashMap::new();
            let mut edges = Vec::new();
            let mut triples = Vec::new();
            for (a, p, b) in raw {
                let (a, b) = (a % n, b % n);
                if a == b { continue; }
                let key = if preds[p] == "Connect" { (a.min(b), p, a.max(b)) } else { (a, p, b) };
                if seen.insert(key, ()).is_none() {
                    edges.push((a, b));
                    triples.push((format!("n{a:02}"), preds[p], format!("n{b:02}")));
                }
            }
            let root = root % n;
            let mut g = graph(&triples.iter().map(|(s, p, o)| (s.as_str(), *p, o.as_str())).collect::<Vec<_>>());
            let rid = g.ensure_entity(&format!("n{root:02}"), Category::E1).unwrap();
            let tree = neighborhood(&g, rid, depth).unwrap();
            let inner = ball(n, &edges, root, depth - 1);
            let outer = ball(n, &edges, root, depth);
            let want: BTreeSet<(String, String, String)> = triples
                .iter()
                .zip(&edges)
                .filter(|(_, &(a, b))| inner[a] || inner[b] || (depth >= 2 && outer[a] && outer[b]))
                .map(|((s, p, o), _)| {
                    if *p == "Connect" && o < s { (o.clone(), p.to_string(), s.clone()) } else { (s.clone(), p.to_string(), o.clone()) }
                })
                .collect();
            let edges_out: Vec<&Edge> = tree.edges().collect();
            prop_assert_eq!(keys(&g, edges_out.iter().copied()), want);
            // No edge appears twice across levels.
            let unique: HashSet<EdgeKey> = edges_out.iter().map(|e| edge_key(e)).collect();
            prop_assert_eq!(unique.len(), edges_out.len());
        }
    }
}
