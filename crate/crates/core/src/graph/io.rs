use super::WeightedGraph;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// On-disk form: each undirected pair once, self-loops as `[x, x, w]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl From<&WeightedGraph> for GraphFile {
    fn from(g: &WeightedGraph) -> Self {
        let edges = g.edges().into_iter().filter(|&(x, y, _)| x <= y).collect();
        GraphFile { vertices: g.vertex_count(), edges }
    }
}

impl GraphFile {
    pub fn into_graph(self) -> Result<WeightedGraph> {
        WeightedGraph::build(self.vertices, &self.edges)
    }
}

pub fn graph_to_json(g: &WeightedGraph) -> String {
    serde_json::to_string(&GraphFile::from(g)).expect("graph file serializes")
}

pub fn graph_from_json(text: &str) -> Result<WeightedGraph> {
    serde_json::from_str::<GraphFile>(text)?.into_graph()
}

pub fn write_graph(g: &WeightedGraph, path: &Path) -> Result<()> {
    std::fs::write(path, graph_to_json(g) + "\n")?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    graph_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_dumbbell;

    #[test]
    fn exact_round_trip() {
        let g = WeightedGraph::build(3, &[(0, 1, 0.1), (1, 2, 1.0 / 3.0), (2, 2, 0.7), (0, 0, 1e-300)]).unwrap();
        let back = graph_from_json(&graph_to_json(&g)).unwrap();
        assert_eq!(back, g);
        let d = gen_dumbbell(3).unwrap();
        assert_eq!(graph_from_json(&graph_to_json(&d)).unwrap(), d);
    }

    #[test]
    fn file_format() {
        let g = WeightedGraph::build(2, &[(0, 1, 1.0), (0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(graph_to_json(&g), r#"{"vertices":2,"edges":[[0,0,1.0],[0,1,1.0],[1,1,1.0]]}"#);
    }
}
