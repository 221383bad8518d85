use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BenchError, BenchmarkInstance};
use crate::dag::{build_graph, VertexId};
use crate::oracle::Labels;

const MAX_ATTEMPTS: u64 = 64;

/// Shape and labelling of a random history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub n_vertices: usize,
    /// Chance that a new commit forks off any earlier commit instead of
    /// extending a branch head.
    pub branch_prob: f64,
    /// Chance that a new commit also merges a second earlier commit.
    pub merge_prob: f64,
    pub n_regressions: usize,
    /// Chance that a commit whose parents are not all valid is valid again.
    pub repair_prob: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_vertices: 100,
            branch_prob: 0.1,
            merge_prob: 0.1,
            n_regressions: 3,
            repair_prob: 0.0,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::InvalidParams(msg.to_string()));
        if self.n_vertices < 2 {
            return bad("n must be at least 2");
        }
        for (name, p) in [
            ("branch", self.branch_prob),
            ("merge", self.merge_prob),
            ("repair", self.repair_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GeneratorParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={},branch={},merge={},regressions={},repair={}",
            self.n_vertices,
            self.branch_prob,
            self.merge_prob,
            self.n_regressions,
            self.repair_prob
        )
    }
}

/// `key=value` pairs separated by commas; unset keys keep their defaults.
impl FromStr for GeneratorParams {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = GeneratorParams::default();
        for pair in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                BenchError::InvalidParams(format!("expected key=value, got `{pair}`"))
            })?;
            let invalid = || BenchError::InvalidParams(format!("bad value for `{key}`: `{value}`"));
            match key.trim() {
                "n" => p.n_vertices = value.parse().map_err(|_| invalid())?,
                "branch" => p.branch_prob = value.parse().map_err(|_| invalid())?,
                "merge" => p.merge_prob = value.parse().map_err(|_| invalid())?,
                "regressions" => p.n_regressions = value.parse().map_err(|_| invalid())?,
                "repair" => p.repair_prob = value.parse().map_err(|_| invalid())?,
                other => return Err(BenchError::InvalidParams(format!("unknown key `{other}`"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// Builds a single-root history with planted regressions. The same
/// `(params, seed)` always yields the same instance.
pub fn generate_random_radag(
    params: &GeneratorParams,
    seed: u64,
) -> Result<BenchmarkInstance, BenchError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(instance) = attempt(params, seed, &mut rng)? {
            return Ok(instance);
        }
    }
    Err(BenchError::DegenerateParams(params.to_string()))
}

fn attempt(
    params: &GeneratorParams,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<BenchmarkInstance>, BenchError> {
    let n = params.n_vertices;
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut is_head = vec![false; n];
    let mut heads = vec![0usize];
    is_head[0] = true;
    for v in 1..n {
        let first = if rng.random_bool(params.branch_prob) {
            rng.random_range(0..v)
        } else {
            heads[rng.random_range(0..heads.len())]
        };
        parents[v].push(first);
        if v > 1 && rng.random_bool(params.merge_prob) {
            let second = rng.random_range(0..v);
            if second != first {
                parents[v].push(second);
            }
        }
        for &p in &parents[v] {
            if is_head[p] {
                is_head[p] = false;
                heads.retain(|&h| h != p);
            }
        }
        is_head[v] = true;
        heads.push(v);
    }

    let mut planted = vec![false; n];
    let mut pool: Vec<usize> = (1..n).collect();
    for _ in 0..params.n_regressions.min(n - 1) {
        let i = rng.random_range(0..pool.len());
        planted[pool.swap_remove(i)] = true;
    }
    let mut valid = vec![true; n];
    for v in 1..n {
        let inherited = parents[v].iter().all(|&p| valid[p]);
        valid[v] = if planted[v] {
            false
        } else if inherited {
            true
        } else {
            rng.random_bool(params.repair_prob)
        };
    }

    let mut has_child = vec![false; n];
    for ps in &parents {
        for &p in ps {
            has_child[p] = true;
        }
    }
    let ids: Vec<VertexId> = (0..n)
        .map(|i| VertexId::new(format!("c{i}")).expect("well-formed id"))
        .collect();
    let invalid_leaves: Vec<VertexId> = (0..n)
        .filter(|&v| !has_child[v] && !valid[v])
        .map(|v| ids[v].clone())
        .collect();
    if invalid_leaves.is_empty() {
        return Ok(None);
    }

    let edges: Vec<(VertexId, VertexId)> = parents
        .iter()
        .enumerate()
        .flat_map(|(v, ps)| ps.iter().map(move |&p| (p, v)))
        .map(|(p, v)| (ids[p].clone(), ids[v].clone()))
        .collect();
    let graph = build_graph(&edges, Some(&ids[0]))?;
    let validity: Labels = ids.iter().cloned().zip(valid).collect();
    Ok(Some(BenchmarkInstance {
        name: format!("rand-n{n}-s{seed}"),
        graph,
        validity,
        invalid_leaves,
        seed: Some(seed),
    }))
}
