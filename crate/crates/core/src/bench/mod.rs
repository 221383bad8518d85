//! Benchmark instances and the algorithm matrix.
//!
//! Instances come from [`generate_random_radag`] or from recorded bundles
//! on disk. [`run_matrix`] runs every algorithm on every instance with a
//! fresh replay oracle and reports distinct query counts and the distance
//! from each found regression point to its leaf.

mod bundle;
mod generate;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::bisect::run_bisect_multi;
use crate::dag::{compute_distance_table, DagError, Radag, Vertex, VertexId};
use crate::engine::{run_rpa, EngineConfig};
use crate::oracle::{Labels, ValidityOracle};
use crate::search::{RegressionPoint, Strategy};

pub use bundle::{load_bundle, load_bundles, parse_leaves, save_bundle, write_leaves};
pub use generate::{generate_random_radag, GeneratorParams};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("no invalid leaf produced for {0}")]
    DegenerateParams(String),
    #[error("no rows to summarise")]
    EmptyInput,
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("{}: {message}", path.display())]
    Bundle { path: PathBuf, message: String },
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct BenchmarkInstance {
    pub name: String,
    pub graph: Radag,
    pub validity: Labels,
    pub invalid_leaves: Vec<VertexId>,
    pub seed: Option<u64>,
}

impl BenchmarkInstance {
    /// Checks that the labels cover the graph, the root is valid and every
    /// leaf is an invalid sink.
    pub fn check(&self) -> Result<(), String> {
        let g = &self.graph;
        for v in g.vertices().filter(|&v| !g.is_virtual(v)) {
            if self.validity.get(g.id(v).as_str()).is_none() {
                return Err(format!("no label for `{}`", g.id(v)));
            }
        }
        let root = g.root();
        if !g.is_virtual(root) && self.validity.get(g.id(root).as_str()) != Some(true) {
            return Err(format!("root `{}` is not valid", g.id(root)));
        }
        for leaf in &self.invalid_leaves {
            let v = g.lookup(leaf.as_str()).map_err(|e| e.to_string())?;
            if !g.is_sink(v) {
                return Err(format!("leaf `{leaf}` has successors"));
            }
            if self.validity.get(leaf.as_str()) != Some(false) {
                return Err(format!("leaf `{leaf}` is not labelled invalid"));
            }
        }
        Ok(())
    }

    pub fn leaf_vertices(&self) -> Result<Vec<Vertex>, DagError> {
        self.invalid_leaves
            .iter()
            .map(|l| self.graph.lookup(l.as_str()))
            .collect()
    }

    /// Validity of a vertex; the virtual root counts as valid.
    pub fn is_valid(&self, v: Vertex) -> bool {
        self.graph.is_virtual(v) || self.validity.get(self.graph.id(v).as_str()) == Some(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Rpa {
        strategy: Strategy,
        propagate: bool,
    },
    /// One independent bisection per leaf, queries summed.
    Bisect,
    /// Bisection over all leaves sharing one cache.
    BisectCache,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Rpa {
            strategy: Strategy::Linear,
            propagate: true,
        },
        Algorithm::Rpa {
            strategy: Strategy::Linear,
            propagate: false,
        },
        Algorithm::Rpa {
            strategy: Strategy::Binary,
            propagate: true,
        },
        Algorithm::Rpa {
            strategy: Strategy::Binary,
            propagate: false,
        },
        Algorithm::Rpa {
            strategy: Strategy::Multiplying,
            propagate: true,
        },
        Algorithm::Rpa {
            strategy: Strategy::Multiplying,
            propagate: false,
        },
        Algorithm::Bisect,
        Algorithm::BisectCache,
    ];

    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>, BenchError> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Rpa {
                strategy,
                propagate,
            } => {
                let s = match strategy {
                    Strategy::Linear => "linear",
                    Strategy::Binary => "binary",
                    Strategy::Multiplying => "mult",
                };
                write!(f, "rpa-{s}-{}", if *propagate { "prop" } else { "noprop" })
            }
            Algorithm::Bisect => f.write_str("bisect"),
            Algorithm::BisectCache => f.write_str("bisect-cache"),
        }
    }
}

/// Accepts the names printed by `Display`; `rpa-<strategy>` alone means no
/// propagation.
impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || BenchError::UnknownAlgorithm(s.to_string());
        match s {
            "bisect" => return Ok(Algorithm::Bisect),
            "bisect-cache" => return Ok(Algorithm::BisectCache),
            _ => {}
        }
        let rest = s.strip_prefix("rpa-").ok_or_else(unknown)?;
        let (name, propagate) = match rest.rsplit_once('-') {
            Some((name, "prop")) => (name, true),
            Some((name, "noprop")) => (name, false),
            _ => (rest, false),
        };
        let strategy = name.parse().map_err(|_| unknown())?;
        Ok(Algorithm::Rpa {
            strategy,
            propagate,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowKind {
    /// Result for one leaf; `queries` on such a row is the whole-run figure.
    Leaf {
        leaf: VertexId,
        point: (VertexId, VertexId),
        distance: u32,
    },
    Total,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    pub instance: String,
    pub algorithm: String,
    pub queries: usize,
    pub kind: RowKind,
}

impl ResultRow {
    pub fn is_total(&self) -> bool {
        matches!(self.kind, RowKind::Total)
    }

    pub fn distance(&self) -> Option<u32> {
        match self.kind {
            RowKind::Leaf { distance, .. } => Some(distance),
            _ => None,
        }
    }
}

/// Runs one algorithm on one instance. Failures become a single error row.
pub fn run_instance(instance: &BenchmarkInstance, algorithm: Algorithm) -> Vec<ResultRow> {
    let row = |queries, kind| ResultRow {
        instance: instance.name.clone(),
        algorithm: algorithm.to_string(),
        queries,
        kind,
    };
    match execute(instance, algorithm) {
        Ok((results, queries)) => {
            let mut rows: Vec<ResultRow> = results
                .into_iter()
                .map(|(leaf, point, distance)| {
                    row(
                        queries,
                        RowKind::Leaf {
                            leaf,
                            point,
                            distance,
                        },
                    )
                })
                .collect();
            rows.push(row(queries, RowKind::Total));
            rows
        }
        Err(message) => vec![row(0, RowKind::Error(message))],
    }
}

type LeafResult = (VertexId, (VertexId, VertexId), u32);

fn execute(
    instance: &BenchmarkInstance,
    algorithm: Algorithm,
) -> Result<(Vec<LeafResult>, usize), String> {
    let g = &instance.graph;
    let leaves = instance.leaf_vertices().map_err(|e| e.to_string())?;
    let table = compute_distance_table(g, &leaves).map_err(|e| e.to_string())?;
    let fresh = || ValidityOracle::recorded(instance.validity.clone());
    let (points, queries): (Vec<(Vertex, RegressionPoint)>, usize) = match algorithm {
        Algorithm::Rpa {
            strategy,
            propagate,
        } => {
            let mut oracle = fresh();
            let report = run_rpa(
                g,
                &leaves,
                &mut oracle,
                EngineConfig {
                    strategy,
                    propagate,
                },
            )
            .map_err(|e| e.to_string())?;
            (report.results, oracle.distinct_queries())
        }
        Algorithm::Bisect => {
            let mut points = Vec::with_capacity(leaves.len());
            let mut total = 0;
            for &leaf in &leaves {
                let mut oracle = fresh();
                let out = run_bisect_multi(g, &[leaf], &mut oracle).map_err(|e| e.to_string())?;
                points.extend(out.into_iter().map(|(l, o)| (l, o.point)));
                total += oracle.distinct_queries();
            }
            (points, total)
        }
        Algorithm::BisectCache => {
            let mut oracle = fresh();
            let out = run_bisect_multi(g, &leaves, &mut oracle).map_err(|e| e.to_string())?;
            let points = out.into_iter().map(|(l, o)| (l, o.point)).collect();
            (points, oracle.distinct_queries())
        }
    };
    let results = points
        .into_iter()
        .map(|(leaf, rp)| {
            let distance = table.dist(rp.invalid_end, leaf).ok_or_else(|| {
                format!("`{}` does not reach `{}`", g.id(rp.invalid_end), g.id(leaf))
            })?;
            Ok((
                g.id(leaf).clone(),
                (g.id(rp.valid_end).clone(), g.id(rp.invalid_end).clone()),
                distance,
            ))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok((results, queries))
}

/// Every algorithm on every instance, in parallel. Rows come out grouped
/// by instance, then algorithm, in the order given.
pub fn run_matrix(instances: &[BenchmarkInstance], algorithms: &[Algorithm]) -> Vec<ResultRow> {
    let cells: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..algorithms.len()).map(move |a| (i, a)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, a)| run_instance(&instances[i], algorithms[a]))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub const CSV_HEADER: [&str; 7] = [
    "instance",
    "algorithm",
    "leaf",
    "queries",
    "rp_valid",
    "rp_invalid",
    "distance",
];

/// Writes rows as CSV. Total rows carry leaf `*`; error rows carry leaf
/// `!error` and the message in `rp_valid`. With `totals_only`, leaf rows
/// are left out.
pub fn write_rows_csv<W: Write>(
    rows: &[ResultRow],
    out: W,
    totals_only: bool,
) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let queries = r.queries.to_string();
        let record: [&str; 7] = match &r.kind {
            RowKind::Leaf { .. } if totals_only => continue,
            RowKind::Leaf {
                leaf,
                point,
                distance,
            } => {
                let d = distance.to_string();
                w.write_record([
                    &r.instance,
                    &r.algorithm,
                    leaf.as_str(),
                    &queries,
                    point.0.as_str(),
                    point.1.as_str(),
                    &d,
                ])?;
                continue;
            }
            RowKind::Total => [&r.instance, &r.algorithm, "*", &queries, "", "", ""],
            RowKind::Error(msg) => [&r.instance, &r.algorithm, "!error", "", msg, "", ""],
        };
        w.write_record(record)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Whole-run distinct queries, one value per total row.
    Queries,
    /// Distance to leaf, one value per leaf row.
    Distance,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "queries" => Ok(Metric::Queries),
            "distance" => Ok(Metric::Distance),
            other => Err(format!(
                "unknown metric `{other}` (expected queries or distance)"
            )),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Queries => "queries",
            Metric::Distance => "distance",
        })
    }
}

fn metric_values(rows: &[ResultRow], metric: Metric) -> Vec<u64> {
    rows.iter()
        .filter_map(|r| match (metric, &r.kind) {
            (Metric::Queries, RowKind::Total) => Some(r.queries as u64),
            (Metric::Distance, RowKind::Leaf { distance, .. }) => Some(u64::from(*distance)),
            _ => None,
        })
        .collect()
}

/// `(y, count of values <= y)` for every integer `y` from the smallest to
/// the largest value.
pub fn cumulative_distribution(
    rows: &[ResultRow],
    metric: Metric,
) -> Result<Vec<(u64, usize)>, BenchError> {
    let mut values = metric_values(rows, metric);
    if values.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    values.sort_unstable();
    let (lo, hi) = (values[0], values[values.len() - 1]);
    Ok((lo..=hi)
        .map(|y| (y, values.partition_point(|&v| v <= y)))
        .collect())
}

pub fn write_cumulative_csv<W: Write>(table: &[(u64, usize)], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "count"])?;
    for (y, c) in table {
        w.write_record([y.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `counts[i][j]`: how often algorithm `i` scored strictly lower than
/// algorithm `j` where both have a value (per instance for queries, per
/// leaf for distance).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominationTable {
    pub metric: Metric,
    pub algorithms: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

pub fn domination_table(rows: &[ResultRow], metric: Metric) -> DominationTable {
    let mut algorithms: Vec<String> = Vec::new();
    let mut values: HashMap<(&str, Option<&str>), HashMap<usize, u64>> = HashMap::new();
    for r in rows {
        let slot = match algorithms.iter().position(|a| *a == r.algorithm) {
            Some(i) => i,
            None => {
                algorithms.push(r.algorithm.clone());
                algorithms.len() - 1
            }
        };
        let entry = match (metric, &r.kind) {
            (Metric::Queries, RowKind::Total) => {
                Some(((r.instance.as_str(), None), r.queries as u64))
            }
            (Metric::Distance, RowKind::Leaf { leaf, distance, .. }) => Some((
                (r.instance.as_str(), Some(leaf.as_str())),
                u64::from(*distance),
            )),
            _ => None,
        };
        if let Some((key, v)) = entry {
            values.entry(key).or_default().insert(slot, v);
        }
    }
    let n = algorithms.len();
    let mut counts = vec![vec![0; n]; n];
    for by_alg in values.values() {
        for (&i, &vi) in by_alg {
            for (&j, &vj) in by_alg {
                if vi < vj {
                    counts[i][j] += 1;
                }
            }
        }
    }
    DominationTable {
        metric,
        algorithms,
        counts,
    }
}

impl fmt::Display for DominationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.metric {
            Metric::Queries => "performed strictly fewer validity queries than",
            Metric::Distance => "found a strictly closer regression point than",
        };
        writeln!(f, "row {what} column:")?;
        let width = self
            .algorithms
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max(4);
        write!(f, "{:width$}", "")?;
        for a in &self.algorithms {
            write!(f, "  {a:>width$}")?;
        }
        writeln!(f)?;
        for (a, row) in self.algorithms.iter().zip(&self.counts) {
            write!(f, "{a:width$}")?;
            for c in row {
                write!(f, "  {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
