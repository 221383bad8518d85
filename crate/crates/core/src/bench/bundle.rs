use std::fs;
use std::path::{Path, PathBuf};

use super::{BenchError, BenchmarkInstance};
use crate::dag::format::{parse_graph, write_graph};
use crate::dag::VertexId;
use crate::oracle::{parse_labels, write_labels};

fn read(path: &Path) -> Result<String, BenchError> {
    fs::read_to_string(path).map_err(|e| BenchError::Bundle {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn bundle_err(path: &Path, message: impl ToString) -> BenchError {
    BenchError::Bundle {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Reads one vertex id per line; blank lines and `#` comments are skipped.
pub fn parse_leaves(text: &str) -> Result<Vec<VertexId>, String> {
    let mut leaves = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let id = VertexId::new(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        leaves.push(id);
    }
    Ok(leaves)
}

pub fn write_leaves(leaves: &[VertexId]) -> String {
    leaves.iter().map(|l| format!("{l}\n")).collect()
}

/// Loads `<dir>/<name>.{graph,labels,leaves}`.
pub fn load_bundle(dir: &Path, name: &str) -> Result<BenchmarkInstance, BenchError> {
    let path = |ext: &str| dir.join(format!("{name}.{ext}"));
    let graph_path = path("graph");
    let labels_path = path("labels");
    let leaves_path = path("leaves");
    let graph = parse_graph(&read(&graph_path)?).map_err(|e| bundle_err(&graph_path, e))?;
    let validity = parse_labels(&read(&labels_path)?).map_err(|e| bundle_err(&labels_path, e))?;
    let invalid_leaves =
        parse_leaves(&read(&leaves_path)?).map_err(|e| bundle_err(&leaves_path, e))?;
    let instance = BenchmarkInstance {
        name: name.to_string(),
        graph,
        validity,
        invalid_leaves,
        seed: None,
    };
    instance.check().map_err(|e| bundle_err(&graph_path, e))?;
    Ok(instance)
}

/// Loads every bundle in `dir`, sorted by name.
pub fn load_bundles(dir: &Path) -> Result<Vec<BenchmarkInstance>, BenchError> {
    let entries = fs::read_dir(dir).map_err(|e| bundle_err(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| bundle_err(dir, e))?.path();
        if p.extension().is_some_and(|e| e == "graph") {
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                names.push(stem.to_string());
            }
        }
    }
    names.sort();
    names.iter().map(|n| load_bundle(dir, n)).collect()
}

/// Writes the three bundle files and returns the graph file's path.
pub fn save_bundle(dir: &Path, instance: &BenchmarkInstance) -> Result<PathBuf, BenchError> {
    fs::create_dir_all(dir).map_err(|e| bundle_err(dir, e))?;
    let path = |ext: &str| dir.join(format!("{}.{ext}", instance.name));
    let files = [
        (path("graph"), write_graph(&instance.graph)),
        (path("labels"), write_labels(&instance.validity)),
        (path("leaves"), write_leaves(&instance.invalid_leaves)),
    ];
    for (p, text) in &files {
        fs::write(p, text).map_err(|e| bundle_err(p, e))?;
    }
    Ok(files[0].0.clone())
}
