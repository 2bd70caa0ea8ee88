//! Directed graphs over scalar subsystems.
//!
//! Adjacency follows the column-source convention: `s[(i, j)] == true` iff
//! the edge `j -> i` exists, i.e. subsystem `j` may influence subsystem `i`.
//! With this convention a matrix `A` conforms to a graph when every nonzero
//! `a_ij` sits on an edge.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    adjacency: DMatrix<bool>,
}

impl DirectedGraph {
    /// Graph with no edges (totally disconnected, no self-loops).
    pub fn empty(q: usize) -> Self {
        DirectedGraph {
            adjacency: DMatrix::from_element(q, q, false),
        }
    }

    /// Self-loops only.
    pub fn identity(q: usize) -> Self {
        DirectedGraph {
            adjacency: DMatrix::from_fn(q, q, |i, j| i == j),
        }
    }

    /// Every edge including self-loops.
    pub fn complete(q: usize) -> Self {
        DirectedGraph {
            adjacency: DMatrix::from_element(q, q, true),
        }
    }

    pub fn from_adjacency(adjacency: DMatrix<bool>) -> Result<Self> {
        if adjacency.nrows() != adjacency.ncols() {
            return Err(Error::Dimension {
                field: "adjacency".into(),
                expected: adjacency.nrows(),
                found: adjacency.ncols(),
            });
        }
        Ok(DirectedGraph { adjacency })
    }

    /// Build from rows of 0/1 entries; any other value is rejected.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let q = rows.len();
        let mut adjacency = DMatrix::from_element(q, q, false);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != q {
                return Err(Error::Dimension {
                    field: format!("adjacency[{i}]"),
                    expected: q,
                    found: row.len(),
                });
            }
            for (j, &s) in row.iter().enumerate() {
                adjacency[(i, j)] = match s {
                    0 => false,
                    1 => true,
                    other => {
                        return Err(Error::Schema {
                            field: format!("adjacency[{i}][{j}]"),
                            reason: format!("entries must be 0 or 1, got {other}"),
                        })
                    }
                };
            }
        }
        Ok(DirectedGraph { adjacency })
    }

    /// Sparsity pattern of `a`: `s_ij = 1` iff `|a_ij| > tol`.
    pub fn from_sparsity(a: &DMatrix<f64>, tol: f64) -> Self {
        assert!(tol >= 0.0, "sparsity tolerance must be nonnegative");
        DirectedGraph {
            adjacency: a.map(|v| v.abs() > tol),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<bool> {
        &self.adjacency
    }

    /// Whether the edge `from -> to` exists.
    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adjacency[(to, from)]
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.adjacency[(to, from)] = true;
    }

    pub fn with_self_loops(&self) -> Self {
        let mut g = self.clone();
        for i in 0..g.node_count() {
            g.adjacency[(i, i)] = true;
        }
        g
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.node_count())
            .map(|i| {
                (0..self.node_count())
                    .map(|j| u8::from(self.adjacency[(i, j)]))
                    .collect()
            })
            .collect()
    }

    /// Nodes with no outgoing edge to another node. Self-loops are ignored.
    pub fn sinks(&self) -> Vec<usize> {
        let q = self.node_count();
        (0..q)
            .filter(|&i| (0..q).all(|j| j == i || !self.adjacency[(j, i)]))
            .collect()
    }

    pub fn is_sink(&self, i: usize) -> bool {
        let q = self.node_count();
        (0..q).all(|j| j == i || !self.adjacency[(j, i)])
    }

    /// Nodes without any edge to or from another node.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        let q = self.node_count();
        (0..q)
            .filter(|&i| (0..q).all(|j| j == i || (!self.adjacency[(i, j)] && !self.adjacency[(j, i)])))
            .collect()
    }

    pub fn missing_self_loops(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&i| !self.adjacency[(i, i)])
            .collect()
    }

    /// `true` iff every edge of `other` is an edge of `self`.
    pub fn is_supergraph(&self, other: &DirectedGraph) -> Result<bool> {
        Ok(self.missing_edges(other)?.is_empty())
    }

    /// Edges `(from, to)` of `other` absent from `self`.
    pub fn missing_edges(&self, other: &DirectedGraph) -> Result<Vec<(usize, usize)>> {
        if self.node_count() != other.node_count() {
            return Err(Error::Dimension {
                field: "graph".into(),
                expected: self.node_count(),
                found: other.node_count(),
            });
        }
        let q = self.node_count();
        let mut missing = Vec::new();
        for to in 0..q {
            for from in 0..q {
                if other.adjacency[(to, from)] && !self.adjacency[(to, from)] {
                    missing.push((from, to));
                }
            }
        }
        Ok(missing)
    }

    /// Permutation listing non-sinks first and sinks last, each group in
    /// increasing index order. Relabeling by it puts the adjacency matrix in
    /// the block form `[[S11, 0], [S21, S22]]` with `S22` diagonal.
    pub fn sink_ordering(&self) -> Vec<usize> {
        let sinks = self.sinks();
        let mut order: Vec<usize> = (0..self.node_count())
            .filter(|i| !sinks.contains(i))
            .collect();
        order.extend(sinks);
        order
    }

    /// Relabel nodes: node `perm[k]` of `self` becomes node `k`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let q = self.node_count();
        assert_eq!(perm.len(), q);
        DirectedGraph {
            adjacency: DMatrix::from_fn(q, q, |i, j| self.adjacency[(perm[i], perm[j])]),
        }
    }

    /// Blocks of the sink-ordered adjacency: `(S11 is zero, S22 is zero)`.
    pub fn sink_blocks_zero(&self) -> (bool, bool) {
        let sinks = self.sinks();
        let q = self.node_count();
        let non_sinks: Vec<usize> = (0..q).filter(|i| !sinks.contains(i)).collect();
        let s11_zero = non_sinks
            .iter()
            .all(|&i| non_sinks.iter().all(|&j| !self.adjacency[(i, j)]));
        let s22_zero = sinks
            .iter()
            .all(|&i| sinks.iter().all(|&j| !self.adjacency[(i, j)]));
        (s11_zero, s22_zero)
    }
}

impl fmt::Debug for DirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirectedGraph")
            .field("adjacency", &self.to_rows())
            .finish()
    }
}

/// On-disk form: `{"n": q, "adjacency": [[0/1; q]; q]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub adjacency: Vec<Vec<u8>>,
}

impl TryFrom<GraphFile> for DirectedGraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        if file.adjacency.len() != file.n {
            return Err(Error::Dimension {
                field: "adjacency".into(),
                expected: file.n,
                found: file.adjacency.len(),
            });
        }
        DirectedGraph::from_rows(&file.adjacency)
    }
}

impl From<&DirectedGraph> for GraphFile {
    fn from(g: &DirectedGraph) -> Self {
        GraphFile {
            n: g.node_count(),
            adjacency: g.to_rows(),
        }
    }
}

/// Structural findings for a (plant, control, design) graph triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureIssue {
    IsolatedPlantNode(usize),
    ControlMissingSelfLoop(usize),
    DesignMissingSelfLoop(usize),
    /// Plant edge `from -> to` absent from the control graph.
    ControlNotSupergraph { from: usize, to: usize },
    NodeCountMismatch { plant: usize, control: usize, design: usize },
}

impl fmt::Display for StructureIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureIssue::IsolatedPlantNode(i) => write!(f, "isolated node {} in plant graph", i + 1),
            StructureIssue::ControlMissingSelfLoop(i) => {
                write!(f, "control graph missing self-loop at node {}", i + 1)
            }
            StructureIssue::DesignMissingSelfLoop(i) => {
                write!(f, "design graph missing self-loop at node {}", i + 1)
            }
            StructureIssue::ControlNotSupergraph { from, to } => write!(
                f,
                "G_K not a supergraph of G_P: missing edge {} -> {}",
                from + 1,
                to + 1
            ),
            StructureIssue::NodeCountMismatch { plant, control, design } => write!(
                f,
                "node counts differ: plant {plant}, control {control}, design {design}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructureReport {
    pub issues: Vec<StructureIssue>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Standing assumptions: no isolated plant node, self-loops in the control
/// and design graphs, and `G_K ⊇ G_P`.
pub fn validate_structure(
    plant: &DirectedGraph,
    control: &DirectedGraph,
    design: &DirectedGraph,
) -> StructureReport {
    let mut issues = Vec::new();
    let (p, c, d) = (plant.node_count(), control.node_count(), design.node_count());
    if p != c || p != d {
        issues.push(StructureIssue::NodeCountMismatch {
            plant: p,
            control: c,
            design: d,
        });
        return StructureReport { issues };
    }
    issues.extend(plant.isolated_nodes().into_iter().map(StructureIssue::IsolatedPlantNode));
    issues.extend(
        control
            .missing_self_loops()
            .into_iter()
            .map(StructureIssue::ControlMissingSelfLoop),
    );
    issues.extend(
        design
            .missing_self_loops()
            .into_iter()
            .map(StructureIssue::DesignMissingSelfLoop),
    );
    // Self-loops of the plant graph are covered by the control self-loop check.
    let missing = control.missing_edges(plant).expect("node counts checked");
    issues.extend(
        missing
            .into_iter()
            .filter(|(from, to)| from != to)
            .map(|(from, to)| StructureIssue::ControlNotSupergraph { from, to }),
    );
    StructureReport { issues }
}
