//! Regression predecessor search over commit DAGs.
//!
//! Given a rooted commit graph whose root is valid and a set of invalid
//! leaves, find for every leaf an edge `(u, v)` with `u` valid, `v` invalid
//! and the leaf reachable from `v`, while asking as few validity queries as
//! possible.

pub mod bench;
pub mod bisect;
pub mod dag;
pub mod engine;
pub mod oracle;
pub mod search;
pub mod vcs;

pub use dag::{build_graph, Radag, Vertex, VertexId};
pub use engine::{run_rpa, Action, EngineConfig, RpaEngine};
pub use oracle::ValidityOracle;
pub use search::{RegressionPoint, Strategy};
