//! Priority-based regression predecessor search over many invalid leaves.
//!
//! [`RpaEngine`] is a pull-based state machine: [`RpaEngine::next_action`]
//! reports the next vertex it needs a verdict for, a result to emit, or
//! that it is done, and [`RpaEngine::submit_answer`] feeds verdicts back.
//! [`run_rpa`] drives it against a [`ValidityOracle`].
//!
//! Each iteration takes the unprocessed leaf closest to a known-valid
//! vertex, searches the shortest path from that vertex, optionally
//! propagates the regression point to every leaf its invalid end reaches,
//! and then lowers leaf priorities using the newly found valid vertices.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use thiserror::Error;

use crate::dag::{compute_distance_table, DagError, DistanceTable, PathSeq, Radag, Vertex};
use crate::oracle::{OracleError, ValidityOracle};
use crate::search::{
    check_endpoints, PathSearch, ProbeRecord, RegressionPoint, SearchError, SearchStep, Strategy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub strategy: Strategy,
    pub propagate: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            strategy: Strategy::Multiplying,
            propagate: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("leaf `{0}` has successors")]
    LeafNotSink(String),
    #[error("leaf `{0}` is not invalid")]
    LeafNotInvalid(String),
    #[error("leaf `{0}` listed twice")]
    DuplicateLeaf(String),
    #[error("root `{0}` is not valid")]
    RootNotValid(String),
    #[error("no known-valid vertex reaches leaf `{0}`")]
    UnreachableLeaf(String),
    #[error("answer for `{got}` does not match the pending request {expected:?}")]
    UnexpectedAnswer {
        expected: Option<String>,
        got: String,
    },
    #[error("verdict for `{0}` is already known")]
    AlreadyKnown(String),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Dag(#[from] DagError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// The engine needs a verdict for this vertex.
    Query(Vertex),
    /// A leaf has been assigned its regression predecessor.
    Emit {
        leaf: Vertex,
        point: RegressionPoint,
    },
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueuedLeaf {
    pub leaf: Vertex,
    pub dist: u32,
    pub start: Vertex,
}

/// Control state of one iteration, as seen when its leaf was dequeued.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub leaf: Vertex,
    pub start: Vertex,
    pub dist: u32,
    /// Unprocessed leaves in priority order, the dequeued one first.
    pub queue: Vec<QueuedLeaf>,
    pub known_valid: Vec<Vertex>,
    pub removed: Vec<Vertex>,
    pub path: PathSeq,
    pub probes: Vec<ProbeRecord>,
    pub point: Option<RegressionPoint>,
    /// Leaves resolved by propagation, this iteration's leaf included.
    pub propagated: Vec<Vertex>,
}

impl IterationTrace {
    /// Probes that needed an outside verdict.
    pub fn tested(&self) -> Vec<Vertex> {
        self.probes
            .iter()
            .filter(|p| !p.cached)
            .map(|p| p.vertex)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RpaReport {
    /// One entry per input leaf, in input order.
    pub results: Vec<(Vertex, RegressionPoint)>,
    /// Leaves in the order their results were emitted.
    pub emitted: Vec<Vertex>,
    pub query_log: Vec<(Vertex, bool)>,
    pub iterations: Vec<IterationTrace>,
}

#[derive(Debug, Clone)]
struct LeafState {
    leaf: Vertex,
    dist: u32,
    start: Vertex,
    result: Option<RegressionPoint>,
}

#[derive(Debug)]
struct Active {
    slot: usize,
    search: PathSearch,
    trace: IterationTrace,
}

#[derive(Debug)]
pub struct RpaEngine {
    graph: Radag,
    table: DistanceTable,
    config: EngineConfig,
    leaves: Vec<LeafState>,
    slot_of: HashMap<Vertex, usize>,
    // (dist, input position); stale entries skipped on pop
    heap: BinaryHeap<Reverse<(u32, usize)>>,
    known_valid: BTreeSet<Vertex>,
    verdicts: HashMap<Vertex, bool>,
    query_log: Vec<(Vertex, bool)>,
    outbox: VecDeque<(Vertex, RegressionPoint)>,
    emitted: Vec<Vertex>,
    active: Option<Active>,
    pending: Option<Vertex>,
    iterations: Vec<IterationTrace>,
}

impl RpaEngine {
    /// Sets up the run: distance tables, `dist(l) = dist(root, l)` and
    /// `start(l) = root` for every leaf. The root is taken as valid and
    /// every leaf as invalid.
    pub fn new(graph: Radag, leaves: &[Vertex], config: EngineConfig) -> Result<Self, EngineError> {
        let mut slot_of = HashMap::with_capacity(leaves.len());
        for (slot, &leaf) in leaves.iter().enumerate() {
            let name = || graph.id(leaf).to_string();
            if !graph.is_sink(leaf) || graph.is_tombstoned(leaf) {
                return Err(EngineError::LeafNotSink(name()));
            }
            if leaf == graph.root() {
                return Err(EngineError::LeafNotInvalid(name()));
            }
            if slot_of.insert(leaf, slot).is_some() {
                return Err(EngineError::DuplicateLeaf(name()));
            }
        }
        let table = compute_distance_table(&graph, leaves)?;
        let root = graph.root();
        let mut states = Vec::with_capacity(leaves.len());
        let mut heap = BinaryHeap::with_capacity(leaves.len());
        for (slot, &leaf) in leaves.iter().enumerate() {
            let dist = table
                .dist(root, leaf)
                .ok_or_else(|| EngineError::UnreachableLeaf(graph.id(leaf).to_string()))?;
            states.push(LeafState {
                leaf,
                dist,
                start: root,
                result: None,
            });
            heap.push(Reverse((dist, slot)));
        }
        let mut verdicts = HashMap::with_capacity(leaves.len() + 1);
        verdicts.insert(root, true);
        verdicts.extend(leaves.iter().map(|&l| (l, false)));
        Ok(RpaEngine {
            graph,
            table,
            config,
            leaves: states,
            slot_of,
            heap,
            known_valid: BTreeSet::from([root]),
            verdicts,
            query_log: Vec::new(),
            outbox: VecDeque::new(),
            emitted: Vec::new(),
            active: None,
            pending: None,
            iterations: Vec::new(),
        })
    }

    pub fn graph(&self) -> &Radag {
        &self.graph
    }

    pub fn table(&self) -> &DistanceTable {
        &self.table
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    pub fn known_valid(&self) -> &BTreeSet<Vertex> {
        &self.known_valid
    }

    pub fn verdict(&self, v: Vertex) -> Option<bool> {
        self.verdicts.get(&v).copied()
    }

    pub fn query_log(&self) -> &[(Vertex, bool)] {
        &self.query_log
    }

    pub fn iterations(&self) -> &[IterationTrace] {
        &self.iterations
    }

    /// Current `(dist, start)` of a leaf still waiting for a result.
    pub fn priority(&self, leaf: Vertex) -> Option<(u32, Vertex)> {
        let state = &self.leaves[*self.slot_of.get(&leaf)?];
        state.result.is_none().then_some((state.dist, state.start))
    }

    pub fn result(&self, leaf: Vertex) -> Option<RegressionPoint> {
        self.leaves[*self.slot_of.get(&leaf)?].result
    }

    /// Unresolved leaves in priority order.
    pub fn queue(&self) -> Vec<QueuedLeaf> {
        let mut queued: Vec<(u32, usize)> = self
            .leaves
            .iter()
            .enumerate()
            .filter(|(_, s)| s.result.is_none())
            .map(|(slot, s)| (s.dist, slot))
            .collect();
        queued.sort_unstable();
        queued
            .into_iter()
            .map(|(_, slot)| self.queued(slot))
            .collect()
    }

    fn queued(&self, slot: usize) -> QueuedLeaf {
        let s = &self.leaves[slot];
        QueuedLeaf {
            leaf: s.leaf,
            dist: s.dist,
            start: s.start,
        }
    }

    pub fn is_done(&self) -> bool {
        self.pending.is_none()
            && self.outbox.is_empty()
            && self.active.is_none()
            && self.leaves.iter().all(|s| s.result.is_some())
    }

    /// Snapshot of everything produced so far.
    pub fn report(&self) -> RpaReport {
        RpaReport {
            results: self
                .leaves
                .iter()
                .filter_map(|s| s.result.map(|rp| (s.leaf, rp)))
                .collect(),
            emitted: self.emitted.clone(),
            query_log: self.query_log.clone(),
            iterations: self.iterations.clone(),
        }
    }

    pub fn next_action(&mut self) -> Result<Action, EngineError> {
        loop {
            if let Some(v) = self.pending {
                return Ok(Action::Query(v));
            }
            if let Some((leaf, point)) = self.outbox.pop_front() {
                self.emitted.push(leaf);
                return Ok(Action::Emit { leaf, point });
            }
            if let Some(active) = &mut self.active {
                match active.search.step() {
                    SearchStep::Probe(i) => {
                        let v = active.search.path().get(i);
                        match self.verdicts.get(&v) {
                            Some(&valid) => {
                                active.trace.probes.push(ProbeRecord {
                                    vertex: v,
                                    valid,
                                    cached: true,
                                });
                                active.search.answer(valid);
                            }
                            None => {
                                self.pending = Some(v);
                                return Ok(Action::Query(v));
                            }
                        }
                    }
                    SearchStep::Found(i) => {
                        let path = active.search.path();
                        let point = RegressionPoint {
                            valid_end: path.get(i),
                            invalid_end: path.get(i + 1),
                        };
                        self.finish_iteration(point);
                    }
                }
                continue;
            }
            match self.dequeue_minimum() {
                Some(slot) => self.start_iteration(slot)?,
                None => return Ok(Action::Done),
            }
        }
    }

    pub fn submit_answer(&mut self, v: Vertex, valid: bool) -> Result<(), EngineError> {
        if self.pending != Some(v) {
            if self.verdicts.contains_key(&v) {
                return Err(EngineError::AlreadyKnown(self.graph.id(v).to_string()));
            }
            return Err(EngineError::UnexpectedAnswer {
                expected: self.pending.map(|p| self.graph.id(p).to_string()),
                got: self.graph.id(v).to_string(),
            });
        }
        self.pending = None;
        self.verdicts.insert(v, valid);
        self.query_log.push((v, valid));
        let active = self
            .active
            .as_mut()
            .expect("pending query without a search");
        active.trace.probes.push(ProbeRecord {
            vertex: v,
            valid,
            cached: false,
        });
        active.search.answer(valid);
        Ok(())
    }

    fn dequeue_minimum(&mut self) -> Option<usize> {
        while let Some(Reverse((dist, slot))) = self.heap.pop() {
            let s = &self.leaves[slot];
            if s.result.is_none() && s.dist == dist {
                return Some(slot);
            }
        }
        None
    }

    fn start_iteration(&mut self, slot: usize) -> Result<(), EngineError> {
        let queue = {
            let mut q = self.queue();
            // the dequeued leaf first; it wins ties by construction
            if let Some(pos) = q.iter().position(|e| e.leaf == self.leaves[slot].leaf) {
                let head = q.remove(pos);
                q.insert(0, head);
            }
            q
        };
        let LeafState {
            leaf, dist, start, ..
        } = self.leaves[slot].clone();
        let path = self.table.shortest_path(&self.graph, start, leaf)?;
        debug_assert!(path
            .vertices()
            .iter()
            .all(|&v| !self.graph.is_tombstoned(v)));
        check_endpoints(&self.graph, &path, |v| self.verdicts.get(&v).copied())?;
        let search = PathSearch::new(path.clone(), self.config.strategy)?;
        self.active = Some(Active {
            slot,
            search,
            trace: IterationTrace {
                leaf,
                start,
                dist,
                queue,
                known_valid: self.known_valid.iter().copied().collect(),
                removed: self.graph.tombstoned().collect(),
                path,
                probes: Vec::new(),
                point: None,
                propagated: Vec::new(),
            },
        });
        Ok(())
    }

    fn finish_iteration(&mut self, point: RegressionPoint) {
        let Active {
            slot, mut trace, ..
        } = self.active.take().expect("finishing without a search");
        let new_valid: Vec<Vertex> = trace
            .probes
            .iter()
            .filter(|p| p.valid && self.known_valid.insert(p.vertex))
            .map(|p| p.vertex)
            .collect();

        let leaf = self.leaves[slot].leaf;
        let mut resolved = if self.config.propagate {
            self.propagate_slots(point.invalid_end, point)
        } else {
            Vec::new()
        };
        if self.leaves[slot].result.is_none() {
            self.leaves[slot].result = Some(point);
        }
        resolved.retain(|&s| s != slot);
        self.outbox.push_back((leaf, point));
        for &s in &resolved {
            self.outbox.push_back((self.leaves[s].leaf, point));
        }
        if self.config.propagate {
            trace.propagated = std::iter::once(slot)
                .chain(resolved)
                .map(|s| self.leaves[s].leaf)
                .collect();
            trace.propagated.sort_by_key(|l| self.slot_of[l]);
        }
        trace.point = Some(point);
        self.iterations.push(trace);
        self.update_priorities(&new_valid);
    }

    /// Assigns `rp` to every unresolved leaf reachable from `v` and
    /// tombstones everything reachable from `v`. Returns the resolved
    /// leaves in input order; their results are queued for emission.
    pub fn propagate_regression_point(&mut self, v: Vertex, rp: RegressionPoint) -> Vec<Vertex> {
        let slots = self.propagate_slots(v, rp);
        for &s in &slots {
            self.outbox.push_back((self.leaves[s].leaf, rp));
        }
        slots.into_iter().map(|s| self.leaves[s].leaf).collect()
    }

    fn propagate_slots(&mut self, v: Vertex, rp: RegressionPoint) -> Vec<usize> {
        if self.graph.is_tombstoned(v) {
            return Vec::new();
        }
        let region = self.graph.reachable_from(v);
        let mut slots: Vec<usize> = region
            .iter()
            .filter_map(|x| self.slot_of.get(x).copied())
            .filter(|&s| self.leaves[s].result.is_none())
            .collect();
        slots.sort_unstable();
        for &s in &slots {
            self.leaves[s].result = Some(rp);
        }
        for x in region {
            self.graph.tombstone(x);
        }
        slots
    }

    /// Lowers `dist`/`start` of unresolved leaves that a vertex of
    /// `new_valid` reaches by a strictly shorter path.
    pub fn update_priorities(&mut self, new_valid: &[Vertex]) {
        for &v in new_valid {
            if self.graph.is_tombstoned(v) {
                continue;
            }
            for slot in 0..self.leaves.len() {
                let state = &mut self.leaves[slot];
                if state.result.is_some() {
                    continue;
                }
                if let Some(d) = self.table.dist(v, state.leaf) {
                    if d < state.dist {
                        state.dist = d;
                        state.start = v;
                        self.heap.push(Reverse((d, slot)));
                    }
                }
            }
        }
    }

    /// Marks `v` known valid without a query (for priority-update setups).
    pub fn mark_valid(&mut self, v: Vertex) -> Result<(), EngineError> {
        if self.verdicts.get(&v) == Some(&false) {
            return Err(EngineError::AlreadyKnown(self.graph.id(v).to_string()));
        }
        self.verdicts.insert(v, true);
        self.known_valid.insert(v);
        Ok(())
    }
}

/// Runs the full algorithm with `oracle` answering every query.
///
/// The root is seeded valid and the leaves invalid; a recorded verdict
/// that contradicts either is an error.
pub fn run_rpa(
    graph: &Radag,
    leaves: &[Vertex],
    oracle: &mut ValidityOracle,
    config: EngineConfig,
) -> Result<RpaReport, EngineError> {
    let root = graph.root();
    if !graph.is_virtual(root) && oracle.peek(graph.id(root)) == Some(false) {
        return Err(EngineError::RootNotValid(graph.id(root).to_string()));
    }
    for &leaf in leaves {
        if oracle.peek(graph.id(leaf)) == Some(true) {
            return Err(EngineError::LeafNotInvalid(graph.id(leaf).to_string()));
        }
    }
    let mut engine = RpaEngine::new(graph.clone(), leaves, config)?;
    oracle.seed(
        std::iter::once((graph.id(root).clone(), true))
            .chain(leaves.iter().map(|&l| (graph.id(l).clone(), false))),
    )?;
    loop {
        match engine.next_action()? {
            Action::Query(v) => {
                let valid = oracle.query(graph.id(v))?;
                engine.submit_answer(v, valid)?;
            }
            Action::Emit { .. } => {}
            Action::Done => return Ok(engine.report()),
        }
    }
}
