//! Locating a regression point on a path whose first vertex is valid and
//! whose last vertex is invalid.
//!
//! Each strategy is a resumable [`PathSearch`] state machine: it names the
//! path vertex it wants a verdict for and is fed the answer. The batch
//! helpers ([`linear_search`], [`binary_search`], [`multiplying_search`])
//! drive one against a [`Verdicts`] source; the engine drives it step by
//! step. Endpoints are never probed, the path contract vouches for them.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dag::{PathSeq, Radag, Vertex};
use crate::oracle::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Linear,
    Binary,
    Multiplying,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Linear, Strategy::Binary, Strategy::Multiplying];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Linear => "linear",
            Strategy::Binary => "binary",
            Strategy::Multiplying => "multiplying",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Strategy::Linear),
            "binary" => Ok(Strategy::Binary),
            "multiplying" | "mult" => Ok(Strategy::Multiplying),
            other => Err(format!(
                "unknown strategy `{other}` (expected linear, binary or multiplying)"
            )),
        }
    }
}

/// Edge `(valid_end, invalid_end)` whose tail is valid and head invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegressionPoint {
    pub valid_end: Vertex,
    pub invalid_end: Vertex,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search path needs at least two vertices, got {0}")]
    PathTooShort(usize),
    #[error(
        "path endpoint `{vertex}` is known {actual}, but the path contract requires it {expected}"
    )]
    InvariantViolation {
        vertex: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// What a search needs next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStep {
    /// Verdict wanted for the path vertex at this index.
    Probe(usize),
    /// `(path[i], path[i + 1])` is the regression point.
    Found(usize),
}

#[derive(Debug, Clone)]
enum Cursor {
    /// Next index to test, walking back from the invalid end.
    Linear {
        next: usize,
    },
    /// `lo` valid, `hi` invalid.
    Binary {
        lo: usize,
        hi: usize,
    },
    /// Current sub-path `[base, top]` and gap exponent `k`.
    Multiplying {
        base: usize,
        top: usize,
        k: u32,
    },
    Found(usize),
}

/// Resumable regression-point search over one path.
#[derive(Debug, Clone)]
pub struct PathSearch {
    path: PathSeq,
    strategy: Strategy,
    cursor: Cursor,
}

fn gap(k: u32) -> usize {
    // 2^k - 1, saturating for absurd k
    1usize.checked_shl(k).map_or(usize::MAX, |p| p - 1)
}

impl PathSearch {
    pub fn new(path: PathSeq, strategy: Strategy) -> Result<Self, SearchError> {
        if path.len() < 2 {
            return Err(SearchError::PathTooShort(path.len()));
        }
        let l = path.len() - 1;
        let cursor = match strategy {
            Strategy::Linear => Cursor::Linear { next: l - 1 },
            Strategy::Binary => Cursor::Binary { lo: 0, hi: l },
            Strategy::Multiplying => Cursor::Multiplying {
                base: 0,
                top: l,
                k: 1,
            },
        };
        Ok(PathSearch {
            path,
            strategy,
            cursor,
        })
    }

    pub fn path(&self) -> &PathSeq {
        &self.path
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Next request. Calling again without [`answer`](Self::answer) repeats it.
    pub fn step(&mut self) -> SearchStep {
        loop {
            match self.cursor {
                Cursor::Found(i) => return SearchStep::Found(i),
                Cursor::Linear { next } => {
                    if next == 0 {
                        self.cursor = Cursor::Found(0);
                    } else {
                        return SearchStep::Probe(next);
                    }
                }
                Cursor::Binary { lo, hi } => {
                    if hi - lo == 1 {
                        self.cursor = Cursor::Found(lo);
                    } else {
                        return SearchStep::Probe((lo + hi) / 2);
                    }
                }
                Cursor::Multiplying { base, top, k } => {
                    let len = top - base;
                    if len == 1 {
                        self.cursor = Cursor::Found(base);
                    } else if len > gap(k) {
                        return SearchStep::Probe(top - gap(k));
                    } else {
                        // ran past the start: narrow to [base, last invalid probe]
                        self.cursor = Cursor::Multiplying {
                            base,
                            top: top - gap(k - 1),
                            k: 1,
                        };
                    }
                }
            }
        }
    }

    /// Feeds the verdict for the vertex last requested by [`step`](Self::step).
    pub fn answer(&mut self, valid: bool) {
        let SearchStep::Probe(at) = self.step() else {
            panic!("answer fed to a finished search");
        };
        self.cursor = match self.cursor {
            Cursor::Linear { next } => {
                if valid {
                    Cursor::Found(next)
                } else {
                    Cursor::Linear { next: next - 1 }
                }
            }
            Cursor::Binary { lo, hi } => {
                if valid {
                    Cursor::Binary { lo: at, hi }
                } else {
                    Cursor::Binary { lo, hi: at }
                }
            }
            Cursor::Multiplying { base, top, k } => {
                if valid {
                    Cursor::Multiplying {
                        base: at,
                        top: top - gap(k - 1),
                        k: 1,
                    }
                } else {
                    Cursor::Multiplying {
                        base,
                        top,
                        k: k + 1,
                    }
                }
            }
            Cursor::Found(_) => unreachable!(),
        };
    }
}

/// Source of verdicts for a standalone search.
pub trait Verdicts {
    /// Verdict already known, at no cost.
    fn known(&self, v: Vertex) -> Option<bool>;
    /// Obtains a verdict, possibly at a cost.
    fn query(&mut self, v: Vertex) -> Result<bool, OracleError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeRecord {
    pub vertex: Vertex,
    pub valid: bool,
    pub cached: bool,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub point: RegressionPoint,
    /// Every verdict the search consulted, in order.
    pub probes: Vec<ProbeRecord>,
    /// Probes that were not answered from cache.
    pub queries_performed: usize,
}

impl SearchOutcome {
    pub fn new_valid(&self) -> Vec<Vertex> {
        self.probes
            .iter()
            .filter(|p| p.valid)
            .map(|p| p.vertex)
            .collect()
    }

    pub fn new_invalid(&self) -> Vec<Vertex> {
        self.probes
            .iter()
            .filter(|p| !p.valid)
            .map(|p| p.vertex)
            .collect()
    }

    /// Vertices that cost a query, in probe order.
    pub fn queried(&self) -> Vec<Vertex> {
        self.probes
            .iter()
            .filter(|p| !p.cached)
            .map(|p| p.vertex)
            .collect()
    }
}

/// Fails when a cached verdict contradicts the path contract.
pub fn check_endpoints(
    g: &Radag,
    path: &PathSeq,
    known: impl Fn(Vertex) -> Option<bool>,
) -> Result<(), SearchError> {
    if known(path.first()) == Some(false) {
        return Err(SearchError::InvariantViolation {
            vertex: g.id(path.first()).to_string(),
            expected: "valid",
            actual: "invalid",
        });
    }
    if known(path.last()) == Some(true) {
        return Err(SearchError::InvariantViolation {
            vertex: g.id(path.last()).to_string(),
            expected: "invalid",
            actual: "valid",
        });
    }
    Ok(())
}

/// Runs `strategy` on `path` to completion.
pub fn run_search(
    g: &Radag,
    path: PathSeq,
    strategy: Strategy,
    verdicts: &mut impl Verdicts,
) -> Result<SearchOutcome, SearchError> {
    check_endpoints(g, &path, |v| verdicts.known(v))?;
    let mut search = PathSearch::new(path, strategy)?;
    let mut probes = Vec::new();
    let mut queries_performed = 0;
    loop {
        match search.step() {
            SearchStep::Probe(i) => {
                let vertex = search.path().get(i);
                let (valid, cached) = match verdicts.known(vertex) {
                    Some(valid) => (valid, true),
                    None => {
                        queries_performed += 1;
                        (verdicts.query(vertex)?, false)
                    }
                };
                probes.push(ProbeRecord {
                    vertex,
                    valid,
                    cached,
                });
                search.answer(valid);
            }
            SearchStep::Found(i) => {
                let path = search.path();
                return Ok(SearchOutcome {
                    point: RegressionPoint {
                        valid_end: path.get(i),
                        invalid_end: path.get(i + 1),
                    },
                    probes,
                    queries_performed,
                });
            }
        }
    }
}

pub fn linear_search(
    g: &Radag,
    path: PathSeq,
    verdicts: &mut impl Verdicts,
) -> Result<SearchOutcome, SearchError> {
    run_search(g, path, Strategy::Linear, verdicts)
}

pub fn binary_search(
    g: &Radag,
    path: PathSeq,
    verdicts: &mut impl Verdicts,
) -> Result<SearchOutcome, SearchError> {
    run_search(g, path, Strategy::Binary, verdicts)
}

pub fn multiplying_search(
    g: &Radag,
    path: PathSeq,
    verdicts: &mut impl Verdicts,
) -> Result<SearchOutcome, SearchError> {
    run_search(g, path, Strategy::Multiplying, verdicts)
}
