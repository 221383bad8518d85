use std::collections::HashMap;

use super::{OracleError, VerdictSource};
use crate::dag::{DagError, VertexId};

/// Recorded verdicts, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels {
    entries: Vec<(VertexId, bool)>,
    index: HashMap<VertexId, usize>,
}

impl Labels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a verdict. Re-inserting the same verdict is a no-op; a
    /// different one returns `false` and leaves the table unchanged.
    pub fn insert(&mut self, id: VertexId, valid: bool) -> bool {
        match self.index.get(&id) {
            Some(&i) => self.entries[i].1 == valid,
            None => {
                self.index.insert(id.clone(), self.entries.len());
                self.entries.push((id, valid));
                true
            }
        }
    }

    pub fn get(&self, id: &str) -> Option<bool> {
        self.index.get(id).map(|&i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, bool)> {
        self.entries.iter().map(|(id, v)| (id, *v))
    }
}

impl FromIterator<(VertexId, bool)> for Labels {
    fn from_iter<T: IntoIterator<Item = (VertexId, bool)>>(iter: T) -> Self {
        let mut labels = Labels::new();
        for (id, valid) in iter {
            labels.insert(id, valid);
        }
        labels
    }
}

impl VerdictSource for Labels {
    fn evaluate(&mut self, id: &VertexId) -> Result<bool, OracleError> {
        self.get(id.as_str())
            .ok_or_else(|| OracleError::UnknownVertex(id.to_string()))
    }

    fn peek(&self, id: &VertexId) -> Option<bool> {
        self.get(id.as_str())
    }
}

/// Parses `<vertex-id> <valid|invalid>` records; `#` starts a comment line.
pub fn parse_labels(text: &str) -> Result<Labels, DagError> {
    let mut labels = Labels::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| DagError::Parse { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let [id, verdict] = tokens[..] else {
            return Err(err(format!(
                "expected `<vertex-id> <valid|invalid>`, got {} fields",
                tokens.len()
            )));
        };
        let id = VertexId::new(id).map_err(|e| err(e.to_string()))?;
        let valid = match verdict {
            "valid" => true,
            "invalid" => false,
            other => return Err(err(format!("unknown verdict `{other}`"))),
        };
        if !labels.insert(id.clone(), valid) {
            return Err(err(format!("conflicting verdicts for `{id}`")));
        }
    }
    Ok(labels)
}

pub fn write_labels(labels: &Labels) -> String {
    labels
        .iter()
        .map(|(id, valid)| format!("{id} {}\n", if valid { "valid" } else { "invalid" }))
        .collect()
}
