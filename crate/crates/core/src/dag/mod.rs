//! Rooted commit DAGs.
//!
//! A [`Radag`] stores vertices densely (a [`Vertex`] is an index) with both
//! successor and predecessor adjacency. Successor lists are kept in vertex
//! declaration order, which is the adjacency order every deterministic
//! tie-break in this crate refers to. Removal is logical: tombstoned vertices
//! stay in the index map but every traversal skips them.

mod distance;
pub mod format;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use distance::{compute_distance_table, DistanceTable, PathSeq};

/// Identifier of the synthetic root inserted above multiple raw roots.
pub const VIRTUAL_ROOT: &str = "__virtual_root__";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("cycle detected: {}", format_cycle(.0))]
    CycleDetected(Vec<VertexId>),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("invalid vertex id {0:?}: ids must be non-empty and contain no whitespace or control characters")]
    InvalidVertexId(String),
    #[error("vertex id `{0}` is reserved")]
    ReservedVertexId(String),
    #[error("declared root `{0}` has predecessors")]
    RootHasParents(VertexId),
    #[error("`{leaf}` is not reachable from `{from}`")]
    Unreachable { from: VertexId, leaf: VertexId },
    #[error("`{0}` is not a leaf of the distance table")]
    NotATableLeaf(VertexId),
    #[error("consecutive path vertices `{0}` and `{1}` are not joined by an edge")]
    NotAPath(VertexId, VertexId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn format_cycle(cycle: &[VertexId]) -> String {
    let mut out: Vec<&str> = cycle.iter().map(VertexId::as_str).collect();
    if let Some(first) = cycle.first() {
        out.push(first.as_str());
    }
    out.join(" -> ")
}

/// Opaque vertex identifier, a commit hash for live repositories.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Result<Self, DagError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(DagError::InvalidVertexId(id));
        }
        Ok(VertexId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for VertexId {
    type Err = DagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VertexId::new(s)
    }
}

impl std::borrow::Borrow<str> for VertexId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Dense index of a vertex inside one [`Radag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(u32);

impl Vertex {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    fn from_index(index: usize) -> Self {
        Vertex(u32::try_from(index).expect("vertex count exceeds u32"))
    }
}

/// Accumulates vertices and edges; indices follow first appearance.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, Vertex>,
    edges: Vec<(Vertex, Vertex)>,
    seen: HashSet<(Vertex, Vertex)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: &VertexId) -> Result<Vertex, DagError> {
        if id.as_str() == VIRTUAL_ROOT {
            return Err(DagError::ReservedVertexId(id.to_string()));
        }
        if let Some(&v) = self.index.get(id) {
            return Ok(v);
        }
        let v = Vertex::from_index(self.ids.len());
        self.ids.push(id.clone());
        self.index.insert(id.clone(), v);
        Ok(v)
    }

    /// Adds `parent -> child`. Duplicate edges are dropped.
    pub fn add_edge(&mut self, parent: &VertexId, child: &VertexId) -> Result<(), DagError> {
        let p = self.add_vertex(parent)?;
        let c = self.add_vertex(child)?;
        if p == c {
            return Err(DagError::CycleDetected(vec![parent.clone()]));
        }
        if self.seen.insert((p, c)) {
            self.edges.push((p, c));
        }
        Ok(())
    }

    pub fn build(self, declared_root: Option<&VertexId>) -> Result<Radag, DagError> {
        let GraphBuilder {
            mut ids,
            mut index,
            edges,
            ..
        } = self;
        if ids.is_empty() {
            return Err(DagError::EmptyGraph);
        }
        let mut succ: Vec<Vec<Vertex>> = vec![Vec::new(); ids.len()];
        let mut pred: Vec<Vec<Vertex>> = vec![Vec::new(); ids.len()];
        for &(p, c) in &edges {
            succ[p.index()].push(c);
            pred[c.index()].push(p);
        }
        for list in &mut succ {
            list.sort_unstable();
        }

        if let Some(root) = declared_root {
            let v = *index
                .get(root)
                .ok_or_else(|| DagError::UnknownVertex(root.to_string()))?;
            if !pred[v.index()].is_empty() {
                return Err(DagError::RootHasParents(root.clone()));
            }
        }

        let raw_roots: Vec<Vertex> = (0..ids.len())
            .filter(|&i| pred[i].is_empty())
            .map(Vertex::from_index)
            .collect();
        if raw_roots.is_empty() {
            return Err(DagError::CycleDetected(find_cycle(&ids, &pred, &[])));
        }

        let (root, virtual_root) = if raw_roots.len() == 1 {
            (raw_roots[0], false)
        } else {
            let v = Vertex::from_index(ids.len());
            let id = VertexId(VIRTUAL_ROOT.to_string());
            ids.push(id.clone());
            index.insert(id, v);
            succ.push(raw_roots.clone());
            pred.push(Vec::new());
            for &r in &raw_roots {
                pred[r.index()].push(v);
            }
            (v, true)
        };

        let topo = kahn_order(root, &succ, &pred);
        if topo.len() != ids.len() {
            return Err(DagError::CycleDetected(find_cycle(&ids, &pred, &topo)));
        }
        let mut topo_pos = vec![0u32; ids.len()];
        for (pos, v) in topo.iter().enumerate() {
            topo_pos[v.index()] = pos as u32;
        }

        let n = ids.len();
        Ok(Radag {
            ids,
            index,
            succ,
            pred,
            root,
            virtual_root,
            topo,
            topo_pos,
            tombstoned: FixedBitSet::with_capacity(n),
        })
    }
}

fn kahn_order(root: Vertex, succ: &[Vec<Vertex>], pred: &[Vec<Vertex>]) -> Vec<Vertex> {
    let mut indegree: Vec<usize> = pred.iter().map(Vec::len).collect();
    let mut queue = VecDeque::from([root]);
    let mut order = Vec::with_capacity(succ.len());
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &succ[v.index()] {
            indegree[w.index()] -= 1;
            if indegree[w.index()] == 0 {
                queue.push_back(w);
            }
        }
    }
    order
}

/// Every vertex left out of a Kahn ordering has a predecessor that is also
/// left out, so walking predecessors must revisit a vertex.
fn find_cycle(ids: &[VertexId], pred: &[Vec<Vertex>], ordered: &[Vertex]) -> Vec<VertexId> {
    let mut done = vec![false; ids.len()];
    for v in ordered {
        done[v.index()] = true;
    }
    let Some(start) = (0..pred.len()).find(|&i| !done[i]) else {
        return Vec::new();
    };
    let mut walk = vec![start];
    let mut position: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let next = pred[cur]
            .iter()
            .map(|p| p.index())
            .find(|&p| !done[p])
            .expect("unordered vertex without unordered predecessor");
        if let Some(&at) = position.get(&next) {
            let mut cycle: Vec<VertexId> = walk[at..].iter().map(|&i| ids[i].clone()).collect();
            cycle.reverse();
            return cycle;
        }
        position.insert(next, walk.len());
        walk.push(next);
        cur = next;
    }
}

/// Builds a rooted DAG from `(parent, child)` pairs.
///
/// Multiple raw roots are joined under a synthetic [`VIRTUAL_ROOT`].
pub fn build_graph(
    edges: &[(VertexId, VertexId)],
    declared_root: Option<&VertexId>,
) -> Result<Radag, DagError> {
    let mut builder = GraphBuilder::new();
    if let Some(root) = declared_root {
        builder.add_vertex(root)?;
    }
    for (parent, child) in edges {
        builder.add_edge(parent, child)?;
    }
    builder.build(declared_root)
}

/// Rooted annotated DAG skeleton: adjacency in both directions plus a
/// tombstone set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radag {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, Vertex>,
    succ: Vec<Vec<Vertex>>,
    pred: Vec<Vec<Vertex>>,
    root: Vertex,
    virtual_root: bool,
    topo: Vec<Vertex>,
    topo_pos: Vec<u32>,
    tombstoned: FixedBitSet,
}

impl Radag {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = Vertex> + '_ {
        (0..self.ids.len()).map(Vertex::from_index)
    }

    pub fn id(&self, v: Vertex) -> &VertexId {
        &self.ids[v.index()]
    }

    pub fn vertex(&self, id: &str) -> Option<Vertex> {
        self.index.get(id).copied()
    }

    pub fn lookup(&self, id: &str) -> Result<Vertex, DagError> {
        self.vertex(id)
            .ok_or_else(|| DagError::UnknownVertex(id.to_string()))
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn has_virtual_root(&self) -> bool {
        self.virtual_root
    }

    pub fn is_virtual(&self, v: Vertex) -> bool {
        self.virtual_root && v == self.root
    }

    pub fn successors(&self, v: Vertex) -> &[Vertex] {
        &self.succ[v.index()]
    }

    pub fn predecessors(&self, v: Vertex) -> &[Vertex] {
        &self.pred[v.index()]
    }

    pub fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        self.succ[from.index()].binary_search(&to).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices()
            .flat_map(move |u| self.succ[u.index()].iter().map(move |&v| (u, v)))
    }

    /// Sink of the graph as built, ignoring tombstones.
    pub fn is_sink(&self, v: Vertex) -> bool {
        self.succ[v.index()].is_empty()
    }

    pub fn sinks(&self) -> Vec<Vertex> {
        self.vertices().filter(|&v| self.is_sink(v)).collect()
    }

    /// Deterministic Kahn order (FIFO, successors in adjacency order).
    pub fn topo_order(&self) -> &[Vertex] {
        &self.topo
    }

    pub fn topo_position(&self, v: Vertex) -> usize {
        self.topo_pos[v.index()] as usize
    }

    pub fn tombstone(&mut self, v: Vertex) {
        self.tombstoned.insert(v.index());
    }

    pub fn is_tombstoned(&self, v: Vertex) -> bool {
        self.tombstoned.contains(v.index())
    }

    pub fn tombstoned(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.tombstoned.ones().map(Vertex::from_index)
    }

    /// `v` together with every live vertex reachable from it.
    pub fn reachable_from(&self, v: Vertex) -> BTreeSet<Vertex> {
        self.walk(v, |g, x| g.successors(x))
    }

    /// `v` together with every live vertex from which `v` is reachable.
    pub fn ancestors(&self, v: Vertex) -> BTreeSet<Vertex> {
        self.walk(v, |g, x| g.predecessors(x))
    }

    fn walk<'a>(
        &'a self,
        from: Vertex,
        next: impl Fn(&'a Self, Vertex) -> &'a [Vertex],
    ) -> BTreeSet<Vertex> {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            for &y in next(self, x) {
                if !self.is_tombstoned(y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> VertexId {
        VertexId::new(s).unwrap()
    }

    fn edges(list: &[(&str, &str)]) -> Vec<(VertexId, VertexId)> {
        list.iter().map(|(a, b)| (id(a), id(b))).collect()
    }

    #[test]
    fn single_edge() {
        let g = build_graph(&edges(&[("x", "y")]), None).unwrap();
        assert_eq!(g.id(g.root()).as_str(), "x");
        let sinks: Vec<_> = g.sinks().into_iter().map(|v| g.id(v).to_string()).collect();
        assert_eq!(sinks, ["y"]);
        assert!(!g.has_virtual_root());
    }

    #[test]
    fn two_roots_get_virtual_root() {
        let g = build_graph(&edges(&[("a", "b"), ("c", "b")]), None).unwrap();
        assert!(g.has_virtual_root());
        assert_eq!(g.id(g.root()).as_str(), VIRTUAL_ROOT);
        let succ: Vec<_> = g
            .successors(g.root())
            .iter()
            .map(|&v| g.id(v).as_str())
            .collect();
        assert_eq!(succ, ["a", "c"]);
        assert_eq!(g.predecessors(g.lookup("a").unwrap()).len(), 1);
    }

    #[test]
    fn duplicate_edges_are_merged() {
        let g = build_graph(&edges(&[("a", "b"), ("a", "b"), ("b", "c")]), None).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn cycle_is_reported_with_members() {
        let err = build_graph(
            &edges(&[("r", "a"), ("a", "b"), ("b", "c"), ("c", "a")]),
            None,
        )
        .unwrap_err();
        let DagError::CycleDetected(cycle) = err else {
            panic!("expected cycle, got {err:?}");
        };
        let mut names: Vec<_> = cycle.iter().map(|v| v.to_string()).collect();
        names.sort();
        assert_eq!(names, ["a", "b", "c"]);
    }

    #[test]
    fn rootless_cycle() {
        let err = build_graph(&edges(&[("a", "b"), ("b", "a")]), None).unwrap_err();
        assert!(matches!(err, DagError::CycleDetected(c) if c.len() == 2));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        assert!(matches!(
            build_graph(&edges(&[("a", "a")]), None),
            Err(DagError::CycleDetected(_))
        ));
    }

    #[test]
    fn empty_graph() {
        assert_eq!(build_graph(&[], None).unwrap_err(), DagError::EmptyGraph);
        let g = build_graph(&[], Some(&id("only"))).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert!(g.is_sink(g.root()));
    }

    #[test]
    fn declared_root_must_be_a_root() {
        let err = build_graph(&edges(&[("a", "b")]), Some(&id("b"))).unwrap_err();
        assert_eq!(err, DagError::RootHasParents(id("b")));
    }

    #[test]
    fn vertex_ids_reject_whitespace() {
        assert!(VertexId::new("a b").is_err());
        assert!(VertexId::new("").is_err());
        assert!(VertexId::new("a\n").is_err());
        assert!(VertexId::new("deadbeef").is_ok());
    }

    #[test]
    fn reserved_id_rejected() {
        let err = build_graph(&edges(&[(VIRTUAL_ROOT, "b")]), None).unwrap_err();
        assert!(matches!(err, DagError::ReservedVertexId(_)));
    }

    #[test]
    fn reachability_skips_tombstones() {
        let mut g = build_graph(&edges(&[("a", "b"), ("b", "c"), ("a", "d")]), None).unwrap();
        let a = g.lookup("a").unwrap();
        assert_eq!(g.reachable_from(a).len(), 4);
        g.tombstone(g.lookup("b").unwrap());
        let names: Vec<_> = g
            .reachable_from(a)
            .into_iter()
            .map(|v| g.id(v).to_string())
            .collect();
        assert_eq!(names, ["a", "d"]);
        let leaf = g.lookup("c").unwrap();
        assert_eq!(g.reachable_from(leaf).len(), 1);
    }

    #[test]
    fn topological_order_respects_edges() {
        let g = build_graph(
            &edges(&[("a", "b"), ("a", "c"), ("c", "d"), ("b", "d"), ("d", "e")]),
            None,
        )
        .unwrap();
        for (u, v) in g.edges() {
            assert!(g.topo_position(u) < g.topo_position(v));
        }
        let order: Vec<_> = g.topo_order().iter().map(|&v| g.id(v).as_str()).collect();
        assert_eq!(order, ["a", "b", "c", "d", "e"]);
    }
}
