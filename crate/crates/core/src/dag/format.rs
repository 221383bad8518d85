//! Line-oriented graph files.
//!
//! Each record is `<child-id> <parent-id>...`; a root is an id alone on its
//! line and `#` starts a comment line. This is the shape `git rev-list
//! --parents` prints, so the same parser reads plumbing output.

use std::fmt::Write as _;

use super::{DagError, GraphBuilder, Radag, VertexId};

/// Parses a graph file.
///
/// Record heads are numbered first, in line order, so a serialized graph
/// parses back with identical vertex indices.
pub fn parse_graph(text: &str) -> Result<Radag, DagError> {
    let mut records: Vec<(usize, VertexId, Vec<VertexId>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace().map(|t| {
            VertexId::new(t).map_err(|e| DagError::Parse {
                line: line_no,
                message: e.to_string(),
            })
        });
        let child = tokens.next().expect("non-empty line has a token")?;
        let parents = tokens.collect::<Result<Vec<_>, _>>()?;
        if parents.contains(&child) {
            return Err(DagError::Parse {
                line: line_no,
                message: format!("`{child}` lists itself as a parent"),
            });
        }
        records.push((line_no, child, parents));
    }

    let mut builder = GraphBuilder::new();
    let at_line = |line: usize| {
        move |e: DagError| DagError::Parse {
            line,
            message: e.to_string(),
        }
    };
    for (line, child, _) in &records {
        builder.add_vertex(child).map_err(at_line(*line))?;
    }
    for (line, child, parents) in &records {
        for parent in parents {
            builder.add_edge(parent, child).map_err(at_line(*line))?;
        }
    }
    builder.build(None)
}

/// Writes every vertex as one record in index order. A virtual root is
/// omitted since parsing recreates it.
pub fn write_graph(g: &Radag) -> String {
    let mut out = String::new();
    for v in g.vertices() {
        if g.is_virtual(v) {
            continue;
        }
        out.push_str(g.id(v).as_str());
        for &p in g.predecessors(v) {
            if !g.is_virtual(p) {
                let _ = write!(out, " {}", g.id(p));
            }
        }
        out.push('\n');
    }
    out
}
