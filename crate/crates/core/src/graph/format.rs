//! JSON graph files: `{"n": 4, "types": [0, 0, 1, 1], "edges": [[0, 1], ...]}`.
//!
//! Writers emit edges as `[u, v]` with `u < v` in lexicographic order.
//! Readers accept any order and orientation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, Population};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub types: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn from_graph(pop: &Population, g: &Graph) -> Self {
        Self {
            n: g.n(),
            types: pop.types().to_vec(),
            edges: g.edges().into_iter().map(|e| [e.lo(), e.hi()]).collect(),
        }
    }

    pub fn into_parts(self) -> Result<(Population, Graph), GraphError> {
        if self.types.len() != self.n {
            return Err(GraphError::Format(format!(
                "{} types for n = {}",
                self.types.len(),
                self.n
            )));
        }
        let pop = Population::new(self.types)?;
        let g = Graph::new(self.n, self.edges.into_iter().map(|[u, v]| (u, v)))?;
        Ok((pop, g))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("graph file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))
    }
}

pub fn write_graph_file(path: &Path, pop: &Population, g: &Graph) -> std::io::Result<()> {
    fs::write(path, GraphFile::from_graph(pop, g).to_json())
}

pub fn read_graph_file(path: &Path) -> Result<(Population, Graph), GraphError> {
    let text = fs::read_to_string(path).map_err(|e| GraphError::Format(e.to_string()))?;
    GraphFile::from_json(&text)?.into_parts()
}
