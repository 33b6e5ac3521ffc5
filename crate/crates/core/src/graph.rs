//! Simple undirected graphs with named terminals where semi-infinite leads
//! attach, plus gluing and a plain-text (JSON) file representation.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop edge [{0}, {0}] is not allowed")]
    SelfLoop(VertexId),
    #[error("duplicate edge [{0}, {1}]")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge [{0}, {1}] must be written with the smaller vertex first")]
    EdgeOrder(VertexId, VertexId),
    #[error("edge endpoint {0} out of range (vertex count {1})")]
    EdgeOutOfRange(VertexId, usize),
    #[error("terminal '{0}' names vertex {1} out of range (vertex count {2})")]
    TerminalOutOfRange(String, VertexId, usize),
    #[error("duplicate terminal name '{0}'")]
    DuplicateTerminal(String),
    #[error("no terminal named '{0}'")]
    UnknownTerminal(String),
    #[error("terminal '{0}' has kind {1:?}, expected {2:?}")]
    TerminalKindMismatch(String, TerminalKind, TerminalKind),
    #[error("terminal '{0}' used more than once in the pairing")]
    PairingReuse(String),
    #[error("gluing would merge adjacent vertices into a self-loop at terminal pair ({0}, {1})")]
    GlueSelfLoop(String, String),
    #[error("gluing would create a duplicate edge [{0}, {1}]")]
    GlueMultiEdge(VertexId, VertexId),
    #[error("gluing would merge one vertex into two distinct vertices (terminal '{0}')")]
    GlueContradiction(String),
    #[error("graph file parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminalKind {
    Input,
    Output,
    /// A lead whose amplitude is discarded (the filter's upward line).
    Drain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Terminal {
    pub name: String,
    pub vertex: VertexId,
    pub kind: TerminalKind,
}

/// A simple undirected graph with 0/1 adjacency and named lead terminals.
///
/// Terminals mark where semi-infinite lines attach. Several terminals may
/// share a vertex (an infinite line is one edge with a lead on each end, or
/// a single vertex carrying both the in and out lead of a zero-length wire).
#[derive(Clone, Debug, PartialEq)]
pub struct GraphTopology {
    vertex_count: usize,
    edges: BTreeSet<(VertexId, VertexId)>,
    terminals: Vec<Terminal>,
}

impl GraphTopology {
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        terminals: Vec<Terminal>,
    ) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if a >= vertex_count || b >= vertex_count {
                return Err(GraphError::EdgeOutOfRange(a.max(b), vertex_count));
            }
            if !set.insert((a, b)) {
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        let mut names = BTreeSet::new();
        for t in &terminals {
            if t.vertex >= vertex_count {
                return Err(GraphError::TerminalOutOfRange(
                    t.name.clone(),
                    t.vertex,
                    vertex_count,
                ));
            }
            if !names.insert(t.name.clone()) {
                return Err(GraphError::DuplicateTerminal(t.name.clone()));
            }
        }
        Ok(GraphTopology {
            vertex_count,
            edges: set,
            terminals,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    pub fn terminal(&self, name: &str) -> Result<&Terminal, GraphError> {
        self.terminals
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| GraphError::UnknownTerminal(name.to_string()))
    }

    /// Number of leads attached at each vertex.
    pub fn lead_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.vertex_count];
        for t in &self.terminals {
            counts[t.vertex] += 1;
        }
        counts
    }

    pub fn adjacency_list(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Maximum vertex degree counting one attached lead per terminal.
    pub fn max_degree_with_leads(&self) -> usize {
        let mut deg = vec![0usize; self.vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        for t in &self.terminals {
            deg[t.vertex] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// 2-colorability check.
    pub fn is_bipartite(&self) -> bool {
        let adj = self.adjacency_list();
        let mut color = vec![-1i8; self.vertex_count];
        for start in 0..self.vertex_count {
            if color[start] >= 0 {
                continue;
            }
            color[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &u in &adj[v] {
                    if color[u] < 0 {
                        color[u] = 1 - color[v];
                        queue.push_back(u);
                    } else if color[u] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Merge the paired terminals of `self` (outputs) with terminals of
    /// `other` (inputs). Paired terminal vertices are identified, so a chain
    /// of wires keeps its total length. Unpaired terminals survive; names
    /// from `other` are prefixed with "2:" when they would collide.
    pub fn glue(
        &self,
        other: &GraphTopology,
        pairing: &[(&str, &str)],
    ) -> Result<GraphTopology, GraphError> {
        let mut used_left = BTreeSet::new();
        let mut used_right = BTreeSet::new();
        // other-vertex -> self-vertex merge map
        let mut merge: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for &(out_name, in_name) in pairing {
            let t_out = self.terminal(out_name)?;
            if t_out.kind != TerminalKind::Output {
                return Err(GraphError::TerminalKindMismatch(
                    out_name.to_string(),
                    t_out.kind,
                    TerminalKind::Output,
                ));
            }
            let t_in = other.terminal(in_name)?;
            if t_in.kind != TerminalKind::Input {
                return Err(GraphError::TerminalKindMismatch(
                    in_name.to_string(),
                    t_in.kind,
                    TerminalKind::Input,
                ));
            }
            if !used_left.insert(out_name.to_string()) {
                return Err(GraphError::PairingReuse(out_name.to_string()));
            }
            if !used_right.insert(in_name.to_string()) {
                return Err(GraphError::PairingReuse(in_name.to_string()));
            }
            if let Some(&prev) = merge.get(&t_in.vertex) {
                if prev != t_out.vertex {
                    return Err(GraphError::GlueContradiction(in_name.to_string()));
                }
            }
            merge.insert(t_in.vertex, t_out.vertex);
        }
        // Remap other's vertices: merged ones onto self, the rest appended.
        let mut map = vec![usize::MAX; other.vertex_count];
        let mut next = self.vertex_count;
        for v in 0..other.vertex_count {
            if let Some(&target) = merge.get(&v) {
                map[v] = target;
            } else {
                map[v] = next;
                next += 1;
            }
        }
        let mut edges = self.edges.clone();
        for (u, v) in other.edges() {
            let (mut a, mut b) = (map[u], map[v]);
            if a == b {
                let (on, inn) = pairing
                    .iter()
                    .find(|(_, i)| {
                        other
                            .terminal(i)
                            .map(|t| map[t.vertex] == a)
                            .unwrap_or(false)
                    })
                    .copied()
                    .unwrap_or(("?", "?"));
                return Err(GraphError::GlueSelfLoop(on.to_string(), inn.to_string()));
            }
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            if !edges.insert((a, b)) {
                return Err(GraphError::GlueMultiEdge(a, b));
            }
        }
        let mut terminals: Vec<Terminal> = self
            .terminals
            .iter()
            .filter(|t| !used_left.contains(&t.name))
            .cloned()
            .collect();
        let mut taken: BTreeSet<String> = terminals.iter().map(|t| t.name.clone()).collect();
        for t in &other.terminals {
            if used_right.contains(&t.name) {
                continue;
            }
            let mut name = t.name.clone();
            let mut suffix = 2usize;
            while taken.contains(&name) {
                name = format!("{suffix}:{}", t.name);
                suffix += 1;
            }
            taken.insert(name.clone());
            terminals.push(Terminal {
                name,
                vertex: map[t.vertex],
                kind: t.kind,
            });
        }
        GraphTopology::new(next, edges, terminals)
    }

    /// Serialize to the graph file format (JSON document).
    pub fn to_text(&self) -> String {
        let doc = GraphDoc {
            vertices: self.vertex_count,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            terminals: self.terminals.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail")
    }

    /// Parse the graph file format.
    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_str(text)
            .map_err(|e| GraphError::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))?;
        let mut edges = Vec::with_capacity(doc.edges.len());
        for [u, v] in doc.edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if u > v {
                return Err(GraphError::EdgeOrder(u, v));
            }
            edges.push((u, v));
        }
        GraphTopology::new(doc.vertices, edges, doc.terminals)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertices: usize,
    edges: Vec<[VertexId; 2]>,
    terminals: Vec<Terminal>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::widgets::{self, Widget};

    fn wire(n: usize) -> GraphTopology {
        widgets::Wire(n).build()
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(matches!(
            GraphTopology::new(2, [(0, 0)], vec![]),
            Err(GraphError::SelfLoop(0))
        ));
        assert!(matches!(
            GraphTopology::new(2, [(0, 1), (1, 0)], vec![]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
    }

    #[test]
    fn glue_concatenates_wires() {
        let g = wire(2).glue(&wire(3), &[("out", "in")]).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.terminals().len(), 2);
        assert!(g.terminal("in").is_ok());
        assert!(g.terminal("out").is_ok());
        // path: every interior vertex degree 2
        let max_deg = (0..g.vertex_count()).map(|v| g.degree(v)).max().unwrap();
        assert_eq!(max_deg, 2);
    }

    #[test]
    fn glue_rejects_multi_edge() {
        // Gluing both ends of two single edges onto each other doubles the edge.
        let b = GraphTopology::new(
            2,
            [(0, 1)],
            vec![
                Terminal { name: "in".into(), vertex: 0, kind: TerminalKind::Input },
                Terminal { name: "in2".into(), vertex: 1, kind: TerminalKind::Input },
            ],
        )
        .unwrap();
        let a2 = GraphTopology::new(
            2,
            [(0, 1)],
            vec![
                Terminal { name: "out".into(), vertex: 0, kind: TerminalKind::Output },
                Terminal { name: "out2".into(), vertex: 1, kind: TerminalKind::Output },
            ],
        )
        .unwrap();
        let err = a2.glue(&b, &[("out", "in"), ("out2", "in2")]).unwrap_err();
        assert!(matches!(err, GraphError::GlueMultiEdge(..)));
    }

    #[test]
    fn text_roundtrip() {
        let g = widgets::PhaseShift.build();
        let text = g.to_text();
        let back = GraphTopology::from_text(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn parse_rejects_self_loop_edge() {
        let text = r#"{ "vertices": 2, "edges": [[0, 0]], "terminals": [] }"#;
        assert!(matches!(
            GraphTopology::from_text(text),
            Err(GraphError::SelfLoop(0))
        ));
    }

    #[test]
    fn parse_reports_position_for_malformed_text() {
        let err = GraphTopology::from_text("{ vertices: ").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn bipartiteness_of_catalog() {
        assert!(wire(4).is_bipartite());
        assert!(widgets::Cnot.build().is_bipartite());
        assert!(widgets::PhaseShift.build().is_bipartite());
        assert!(widgets::BasisChange.build().is_bipartite());
        assert!(widgets::Filter.build().is_bipartite());
        assert!(!widgets::Separator.build().is_bipartite());
    }
}
