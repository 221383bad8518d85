use std::collections::{HashMap, VecDeque};

use super::{DagError, Radag, Vertex};

const UNREACHABLE: u32 = u32::MAX;
const NO_HOP: u32 = u32::MAX;

/// Shortest-path distances from every vertex to a fixed set of leaves,
/// with a next-hop pointer per (vertex, leaf) pair.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    leaves: Vec<Vertex>,
    slot: HashMap<Vertex, usize>,
    // dist[slot][vertex], UNREACHABLE for no path
    dist: Vec<Vec<u32>>,
    next: Vec<Vec<u32>>,
}

/// Runs one backward BFS per leaf over live predecessors.
///
/// Next hops are picked afterwards as the first successor, in adjacency
/// order, that sits one step closer to the leaf.
pub fn compute_distance_table(g: &Radag, leaves: &[Vertex]) -> Result<DistanceTable, DagError> {
    let n = g.vertex_count();
    let mut table = DistanceTable {
        leaves: Vec::with_capacity(leaves.len()),
        slot: HashMap::with_capacity(leaves.len()),
        dist: Vec::with_capacity(leaves.len()),
        next: Vec::with_capacity(leaves.len()),
    };
    for &leaf in leaves {
        if leaf.index() >= n || g.is_tombstoned(leaf) {
            return Err(DagError::UnknownVertex(format!("#{}", leaf.index())));
        }
        if table.slot.contains_key(&leaf) {
            continue;
        }
        let mut dist = vec![UNREACHABLE; n];
        dist[leaf.index()] = 0;
        let mut queue = VecDeque::from([leaf]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v.index()] + 1;
            for &p in g.predecessors(v) {
                if !g.is_tombstoned(p) && dist[p.index()] == UNREACHABLE {
                    dist[p.index()] = d;
                    queue.push_back(p);
                }
            }
        }
        let next = (0..n)
            .map(|i| {
                let d = dist[i];
                if d == 0 || d == UNREACHABLE {
                    return NO_HOP;
                }
                g.successors(Vertex::from_index(i))
                    .iter()
                    .find(|s| !g.is_tombstoned(**s) && dist[s.index()] == d - 1)
                    .map(|s| s.0)
                    .expect("finite distance without a closer successor")
            })
            .collect();
        table.slot.insert(leaf, table.leaves.len());
        table.leaves.push(leaf);
        table.dist.push(dist);
        table.next.push(next);
    }
    Ok(table)
}

impl DistanceTable {
    pub fn leaves(&self) -> &[Vertex] {
        &self.leaves
    }

    pub fn contains_leaf(&self, leaf: Vertex) -> bool {
        self.slot.contains_key(&leaf)
    }

    /// Edge count of a shortest `v -> leaf` path, `None` when unreachable
    /// or when `leaf` is not in the table.
    pub fn dist(&self, v: Vertex, leaf: Vertex) -> Option<u32> {
        let slot = *self.slot.get(&leaf)?;
        match self.dist[slot][v.index()] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn next_hop(&self, v: Vertex, leaf: Vertex) -> Option<Vertex> {
        let slot = *self.slot.get(&leaf)?;
        match self.next[slot][v.index()] {
            NO_HOP => None,
            w => Some(Vertex(w)),
        }
    }

    /// Follows next hops from `from` to `leaf`.
    pub fn shortest_path(
        &self,
        g: &Radag,
        from: Vertex,
        leaf: Vertex,
    ) -> Result<PathSeq, DagError> {
        if !self.contains_leaf(leaf) {
            return Err(DagError::NotATableLeaf(g.id(leaf).clone()));
        }
        let d = self.dist(from, leaf).ok_or_else(|| DagError::Unreachable {
            from: g.id(from).clone(),
            leaf: g.id(leaf).clone(),
        })?;
        let mut vertices = Vec::with_capacity(d as usize + 1);
        let mut cur = from;
        vertices.push(cur);
        while cur != leaf {
            cur = self.next_hop(cur, leaf).expect("broken successor chain");
            vertices.push(cur);
        }
        Ok(PathSeq(vertices))
    }
}

/// Vertex sequence along graph edges.
///
/// Searches additionally require at least two vertices, a known-valid
/// first vertex and a known-invalid last vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSeq(Vec<Vertex>);

impl PathSeq {
    /// Checks that consecutive vertices are joined by edges of `g`.
    pub fn new(g: &Radag, vertices: Vec<Vertex>) -> Result<Self, DagError> {
        for pair in vertices.windows(2) {
            if !g.has_edge(pair[0], pair[1]) {
                return Err(DagError::NotAPath(
                    g.id(pair[0]).clone(),
                    g.id(pair[1]).clone(),
                ));
            }
        }
        if vertices.is_empty() {
            return Err(DagError::EmptyGraph);
        }
        Ok(PathSeq(vertices))
    }

    /// Resolves ids against `g`, then validates as [`PathSeq::new`].
    pub fn from_ids(g: &Radag, ids: &[&str]) -> Result<Self, DagError> {
        let vertices = ids
            .iter()
            .map(|id| g.lookup(id))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(g, vertices)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn first(&self) -> Vertex {
        self.0[0]
    }

    pub fn last(&self) -> Vertex {
        self.0[self.0.len() - 1]
    }

    pub fn get(&self, i: usize) -> Vertex {
        self.0[i]
    }

    pub fn ids<'g>(&self, g: &'g Radag) -> Vec<&'g str> {
        self.0.iter().map(|&v| g.id(v).as_str()).collect()
    }
}
