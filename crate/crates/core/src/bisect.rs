//! Bisection baseline, as done by `git bisect`.
//!
//! Each round keeps the commits that precede the bad commit but precede no
//! known-good commit, scores each kept commit `c` by
//! `min(x + 1, n - (x + 1))` where `x` counts kept commits preceding `c` and
//! `n` is the kept count, and tests the best-scoring commit (lowest
//! topological index on ties).

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::dag::{Radag, Vertex};
use crate::oracle::{OracleError, ValidityOracle};
use crate::search::{ProbeRecord, RegressionPoint, Verdicts};

#[derive(Debug, Error)]
pub enum BisectError {
    #[error("unknown vertex #{0}")]
    UnknownVertex(usize),
    #[error("bad commit `{0}` precedes a known-good commit")]
    EmptyCandidates(String),
    #[error("no valid predecessor above `{0}`")]
    NoValidPredecessor(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Ancestors of `bad` (inclusive) minus ancestors of any good (inclusive).
pub fn candidate_set(
    g: &Radag,
    bad: Vertex,
    goods: &[Vertex],
) -> Result<BTreeSet<Vertex>, BisectError> {
    for &v in std::iter::once(&bad).chain(goods) {
        if v.index() >= g.vertex_count() {
            return Err(BisectError::UnknownVertex(v.index()));
        }
    }
    let excluded = ancestors_of_all(g, goods);
    if excluded.contains(bad.index()) {
        return Err(BisectError::EmptyCandidates(g.id(bad).to_string()));
    }
    Ok(g.ancestors(bad)
        .into_iter()
        .filter(|v| !excluded.contains(v.index()))
        .collect())
}

fn ancestors_of_all(g: &Radag, from: &[Vertex]) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(g.vertex_count());
    let mut queue: VecDeque<Vertex> = VecDeque::new();
    for &v in from {
        if !seen.put(v.index()) {
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &p in g.predecessors(v) {
            if !seen.put(p.index()) {
                queue.push_back(p);
            }
        }
    }
    seen
}

/// Score of every kept commit, in topological order.
pub fn scores(g: &Radag, kept: &BTreeSet<Vertex>) -> Vec<(Vertex, usize)> {
    let mut ordered: Vec<Vertex> = kept.iter().copied().collect();
    ordered.sort_by_key(|&v| g.topo_position(v));
    let local: HashMap<Vertex, usize> = ordered.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = ordered.len();
    let mut preceding: Vec<FixedBitSet> = Vec::with_capacity(n);
    for &c in &ordered {
        let mut set = FixedBitSet::with_capacity(n);
        for p in g.predecessors(c) {
            if let Some(&i) = local.get(p) {
                set.union_with(&preceding[i]);
                set.insert(i);
            }
        }
        preceding.push(set);
    }
    ordered
        .iter()
        .zip(&preceding)
        .map(|(&c, set)| {
            let x = set.count_ones(..);
            (c, (x + 1).min(n - (x + 1)))
        })
        .collect()
}

/// `min(x + 1, n - (x + 1))` for one kept commit.
pub fn score(g: &Radag, c: Vertex, kept: &BTreeSet<Vertex>) -> usize {
    scores(g, kept)
        .into_iter()
        .find(|&(v, _)| v == c)
        .map(|(_, s)| s)
        .expect("scored commit must be kept")
}

#[derive(Debug, Clone)]
pub struct BisectOutcome {
    pub point: RegressionPoint,
    pub probes: Vec<ProbeRecord>,
    pub queries_performed: usize,
}

impl BisectOutcome {
    pub fn queried(&self) -> Vec<Vertex> {
        self.probes
            .iter()
            .filter(|p| !p.cached)
            .map(|p| p.vertex)
            .collect()
    }
}

struct Prober<'v, V> {
    verdicts: &'v mut V,
    probes: Vec<ProbeRecord>,
    queries: usize,
}

impl<V: Verdicts> Prober<'_, V> {
    fn probe(&mut self, v: Vertex) -> Result<bool, OracleError> {
        let (valid, cached) = match self.verdicts.known(v) {
            Some(valid) => (valid, true),
            None => {
                self.queries += 1;
                (self.verdicts.query(v)?, false)
            }
        };
        self.probes.push(ProbeRecord {
            vertex: v,
            valid,
            cached,
        });
        Ok(valid)
    }
}

/// Bisects from `bad` (trusted invalid) against `goods` (trusted valid).
///
/// When a single commit remains, its predecessor is taken from the goods
/// if possible, otherwise predecessors are tested in order. If every
/// predecessor is invalid, bisection restarts from the first one with the
/// goods that still precede it, so the result is a regression predecessor
/// of `bad` even when validity is not monotone.
pub fn run_bisect(
    g: &Radag,
    bad: Vertex,
    goods: &[Vertex],
    verdicts: &mut impl Verdicts,
) -> Result<BisectOutcome, BisectError> {
    let mut bad = bad;
    let mut goods: Vec<Vertex> = goods.to_vec();
    let mut prober = Prober {
        verdicts,
        probes: Vec::new(),
        queries: 0,
    };
    loop {
        let kept = candidate_set(g, bad, &goods)?;
        if kept.len() == 1 {
            let good_set: HashSet<Vertex> = goods.iter().copied().collect();
            let parents = g.predecessors(bad);
            if parents.is_empty() {
                return Err(BisectError::NoValidPredecessor(g.id(bad).to_string()));
            }
            let mut found = parents.iter().copied().find(|p| good_set.contains(p));
            if found.is_none() {
                for &p in parents {
                    if prober.probe(p)? {
                        found = Some(p);
                        break;
                    }
                }
            }
            if let Some(valid_end) = found {
                return Ok(BisectOutcome {
                    point: RegressionPoint {
                        valid_end,
                        invalid_end: bad,
                    },
                    probes: prober.probes,
                    queries_performed: prober.queries,
                });
            }
            bad = parents[0];
            let above = g.ancestors(bad);
            goods.retain(|v| above.contains(v));
            if goods.is_empty() {
                return Err(BisectError::NoValidPredecessor(g.id(bad).to_string()));
            }
            continue;
        }
        let mut best: Option<(Vertex, usize)> = None;
        for (c, s) in scores(g, &kept) {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        let (candidate, _) = best.expect("kept set has several commits");
        if prober.probe(candidate)? {
            goods.push(candidate);
        } else {
            bad = candidate;
        }
    }
}

/// Bisects each leaf in turn with one shared cache, starting from the
/// root as the only good commit.
pub fn run_bisect_multi(
    g: &Radag,
    leaves: &[Vertex],
    oracle: &mut ValidityOracle,
) -> Result<Vec<(Vertex, BisectOutcome)>, BisectError> {
    let root = g.root();
    oracle.seed(
        std::iter::once((g.id(root).clone(), true))
            .chain(leaves.iter().map(|&l| (g.id(l).clone(), false))),
    )?;
    let mut out = Vec::with_capacity(leaves.len());
    for &leaf in leaves {
        let outcome = run_bisect(g, leaf, &[root], &mut oracle.on(g))?;
        out.push((leaf, outcome));
    }
    Ok(out)
}
