//! Validity verdicts with caching and query accounting.
//!
//! A [`ValidityOracle`] wraps a [`VerdictSource`] (recorded labels, a test
//! command run against checked-out commits, or a person at a terminal).
//! Every verdict is cached for the life of the oracle, and only verdicts
//! that reach the source count as queries.

mod command;
mod interactive;
mod labels;

use std::collections::HashMap;

use thiserror::Error;

use crate::dag::{Radag, Vertex, VertexId};
use crate::search::Verdicts;

pub use command::{CommandSource, CommandSpec};
pub use interactive::{parse_token, InteractiveSource, Token};
pub use labels::{parse_labels, write_labels, Labels};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("no verdict recorded for `{0}`")]
    UnknownVertex(String),
    #[error("test command timed out after {seconds}s at `{commit}`")]
    CommandTimeout { commit: String, seconds: u64 },
    #[error("test command could not decide at `{commit}` (exit status {status})")]
    CommandAbort { commit: String, status: String },
    #[error("could not check out `{commit}`: {message}")]
    CheckoutFailure { commit: String, message: String },
    #[error("could not start test command: {0}")]
    Spawn(std::io::Error),
    #[error("seed for `{0}` conflicts with its cached verdict")]
    ConflictingSeed(String),
    #[error("aborted by user")]
    Aborted,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where verdicts come from when the cache has none.
pub trait VerdictSource {
    fn evaluate(&mut self, id: &VertexId) -> Result<bool, OracleError>;

    /// Verdict available without an evaluation (recorded tables only).
    fn peek(&self, _id: &VertexId) -> Option<bool> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRecord {
    pub vertex: VertexId,
    pub valid: bool,
    pub served_from_cache: bool,
}

pub struct ValidityOracle {
    source: Box<dyn VerdictSource + Send>,
    cache: HashMap<VertexId, bool>,
    log: Vec<QueryRecord>,
    distinct_queries: usize,
}

impl std::fmt::Debug for ValidityOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValidityOracle")
            .field("cached", &self.cache.len())
            .field("distinct_queries", &self.distinct_queries)
            .finish()
    }
}

impl ValidityOracle {
    pub fn new(source: impl VerdictSource + Send + 'static) -> Self {
        ValidityOracle {
            source: Box::new(source),
            cache: HashMap::new(),
            log: Vec::new(),
            distinct_queries: 0,
        }
    }

    pub fn recorded(labels: Labels) -> Self {
        Self::new(labels)
    }

    pub fn query(&mut self, id: &VertexId) -> Result<bool, OracleError> {
        if let Some(&valid) = self.cache.get(id) {
            self.log.push(QueryRecord {
                vertex: id.clone(),
                valid,
                served_from_cache: true,
            });
            return Ok(valid);
        }
        let valid = self.source.evaluate(id)?;
        self.cache.insert(id.clone(), valid);
        self.distinct_queries += 1;
        self.log.push(QueryRecord {
            vertex: id.clone(),
            valid,
            served_from_cache: false,
        });
        Ok(valid)
    }

    /// Inserts given verdicts without counting them. All-or-nothing.
    pub fn seed<I>(&mut self, verdicts: I) -> Result<(), OracleError>
    where
        I: IntoIterator<Item = (VertexId, bool)>,
    {
        let verdicts: Vec<_> = verdicts.into_iter().collect();
        let mut staged: HashMap<&VertexId, bool> = HashMap::new();
        for (id, valid) in &verdicts {
            let clash = self.cache.get(id).is_some_and(|c| c != valid)
                || staged.insert(id, *valid).is_some_and(|s| s != *valid);
            if clash {
                return Err(OracleError::ConflictingSeed(id.to_string()));
            }
        }
        self.cache.extend(verdicts);
        Ok(())
    }

    pub fn cached(&self, id: &VertexId) -> Option<bool> {
        self.cache.get(id).copied()
    }

    /// Cached verdict, else whatever the source reveals for free.
    pub fn peek(&self, id: &VertexId) -> Option<bool> {
        self.cached(id).or_else(|| self.source.peek(id))
    }

    pub fn distinct_queries(&self) -> usize {
        self.distinct_queries
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    pub fn log(&self) -> &[QueryRecord] {
        &self.log
    }

    /// Adapter answering by graph vertex.
    pub fn on<'a>(&'a mut self, graph: &'a Radag) -> GraphOracle<'a> {
        GraphOracle {
            graph,
            oracle: self,
        }
    }
}

/// A [`ValidityOracle`] viewed through one graph's vertex indices.
pub struct GraphOracle<'a> {
    graph: &'a Radag,
    oracle: &'a mut ValidityOracle,
}

impl Verdicts for GraphOracle<'_> {
    fn known(&self, v: Vertex) -> Option<bool> {
        self.oracle.cached(self.graph.id(v))
    }

    fn query(&mut self, v: Vertex) -> Result<bool, OracleError> {
        self.oracle.query(self.graph.id(v))
    }
}
