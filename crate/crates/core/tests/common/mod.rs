//! Brute-force reference model shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use proptest::prelude::*;
use regpred_core::dag::format::parse_graph;
use regpred_core::oracle::Labels;
use regpred_core::{Radag, Vertex, VertexId};

/// A DAG over `0..n` with every edge pointing to a larger index and a
/// validity label per vertex.
#[derive(Debug, Clone)]
pub struct Model {
    pub parents: Vec<Vec<usize>>,
    pub valid: Vec<bool>,
}

impl Model {
    pub fn n(&self) -> usize {
        self.valid.len()
    }

    pub fn name(i: usize) -> String {
        format!("v{i}")
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n()];
        for (v, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                ch[p].push(v);
            }
        }
        ch
    }

    pub fn graph_text(&self) -> String {
        let mut s = String::new();
        for (v, ps) in self.parents.iter().enumerate() {
            s += &Self::name(v);
            for &p in ps {
                s += " ";
                s += &Self::name(p);
            }
            s += "\n";
        }
        s
    }

    pub fn graph(&self) -> Radag {
        parse_graph(&self.graph_text()).unwrap()
    }

    pub fn labels(&self) -> Labels {
        self.valid
            .iter()
            .enumerate()
            .map(|(i, &b)| (VertexId::new(Self::name(i)).unwrap(), b))
            .collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        let ch = self.children();
        (0..self.n()).filter(|&v| ch[v].is_empty()).collect()
    }

    pub fn invalid_sinks(&self) -> Vec<usize> {
        self.sinks()
            .into_iter()
            .filter(|&v| !self.valid[v])
            .collect()
    }

    /// Edge count of the shortest path `from -> to`, if any.
    pub fn dist(&self, from: usize, to: usize) -> Option<u32> {
        let ch = self.children();
        let mut d = vec![None; self.n()];
        d[from] = Some(0u32);
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            for &c in &ch[v] {
                if d[c].is_none() {
                    d[c] = Some(d[v].unwrap() + 1);
                    q.push_back(c);
                }
            }
        }
        d[to]
    }

    pub fn is_regression_predecessor(&self, u: usize, v: usize, leaf: usize) -> bool {
        self.parents[v].contains(&u)
            && self.valid[u]
            && !self.valid[v]
            && self.dist(v, leaf).is_some()
    }

    /// Smallest distance to `leaf` over all regression predecessors.
    pub fn nearest_regression(&self, leaf: usize) -> Option<u32> {
        (0..self.n())
            .filter(|&v| !self.valid[v] && self.parents[v].iter().any(|&u| self.valid[u]))
            .filter_map(|v| self.dist(v, leaf))
            .min()
    }
}

pub fn index_of(g: &Radag, v: Vertex) -> usize {
    g.id(v).as_str()[1..].parse().unwrap()
}

/// Connected DAGs rooted at vertex 0 with a valid root and at least one
/// invalid sink.
pub fn arb_model(max_n: usize) -> impl Strategy<Value = Model> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let parents = (1..n)
                .map(|v| prop::collection::btree_set(0..v, 1..=2.min(v)))
                .collect::<Vec<_>>();
            (parents, prop::collection::vec(any::<bool>(), n))
        })
        .prop_map(|(ps, mut valid)| {
            let mut parents = vec![Vec::new()];
            parents.extend(ps.into_iter().map(|s| s.into_iter().collect::<Vec<_>>()));
            valid[0] = true;
            let n = valid.len();
            // last vertex is always a sink; make it invalid
            valid[n - 1] = false;
            Model { parents, valid }
        })
}

/// A labelled chain `0 -> 1 -> ... -> len` with a valid start and invalid
/// end.
pub fn arb_chain(max_edges: usize) -> impl Strategy<Value = Model> {
    (1..=max_edges)
        .prop_flat_map(|e| prop::collection::vec(any::<bool>(), e + 1))
        .prop_map(|mut valid| {
            let n = valid.len();
            valid[0] = true;
            valid[n - 1] = false;
            let parents = (0..n)
                .map(|v| if v == 0 { vec![] } else { vec![v - 1] })
                .collect();
            Model { parents, valid }
        })
}

/// Monotone labelling of a chain: valid up to `cut`, invalid after.
pub fn monotone_chain(edges: usize, cut: usize) -> Model {
    let n = edges + 1;
    Model {
        parents: (0..n)
            .map(|v| if v == 0 { vec![] } else { vec![v - 1] })
            .collect(),
        valid: (0..n).map(|v| v <= cut).collect(),
    }
}
