//! Immutable undirected hypergraph with a node → edge membership index.
//!
//! Hyperedges are stored as strictly ascending node-id lists. Construction
//! drops edges with fewer than two nodes and collapses duplicates, so the
//! edge list behaves as a set of node sets.

mod io;
mod local;

use std::collections::HashMap;

use thiserror::Error;

pub use io::{parse_benchmark, parse_edge_list, read_benchmark, read_edge_list, DatasetFormat};
pub use local::{extract_local, extract_local_masked, spd_from_sources, LocalEnvironment};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("empty hypergraph: no edge with at least two nodes")]
    Empty,
    #[error("node id {id} out of range for a universe of {num_nodes} nodes")]
    NodeOutOfRange { id: NodeId, num_nodes: usize },
    #[error("invalid candidate set: {0}")]
    InvalidCandidate(String),
    #[error("cutoff {cutoff} must be at least q = {q}")]
    CutoffBelowHops { cutoff: u32, q: u32 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    num_nodes: usize,
    edges: Vec<Vec<NodeId>>,
    membership: Vec<Vec<EdgeId>>,
    lookup: HashMap<Vec<NodeId>, EdgeId>,
}

/// Sorts and deduplicates a node list in place, returning it.
pub fn canonical_set(mut nodes: Vec<NodeId>) -> Vec<NodeId> {
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

impl Hypergraph {
    /// Builds a hypergraph whose universe is `1 + max id`.
    pub fn from_edge_list<I, E>(raw_edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = NodeId>,
    {
        Self::build(raw_edges, None)
    }

    /// Builds a hypergraph over a declared universe `0..num_nodes`.
    pub fn with_universe<I, E>(raw_edges: I, num_nodes: usize) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = NodeId>,
    {
        Self::build(raw_edges, Some(num_nodes))
    }

    fn build<I, E>(raw_edges: I, universe: Option<usize>) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = NodeId>,
    {
        let mut edges = Vec::new();
        let mut lookup = HashMap::new();
        let mut max_id = None;
        for raw in raw_edges {
            let edge = canonical_set(raw.into_iter().collect());
            if let Some(&last) = edge.last() {
                max_id = Some(max_id.map_or(last, |m: NodeId| m.max(last)));
            }
            if edge.len() < 2 || lookup.contains_key(&edge) {
                continue;
            }
            lookup.insert(edge.clone(), edges.len());
            edges.push(edge);
        }
        if edges.is_empty() {
            return Err(HypergraphError::Empty);
        }
        let num_nodes = match universe {
            Some(n) => {
                if let Some(m) = max_id.filter(|&m| m >= n) {
                    return Err(HypergraphError::NodeOutOfRange { id: m, num_nodes: n });
                }
                n
            }
            None => max_id.map_or(0, |m| m + 1),
        };
        Ok(Self::from_parts(num_nodes, edges, lookup))
    }

    fn from_parts(
        num_nodes: usize,
        edges: Vec<Vec<NodeId>>,
        lookup: HashMap<Vec<NodeId>, EdgeId>,
    ) -> Self {
        let mut membership = vec![Vec::new(); num_nodes];
        for (e, edge) in edges.iter().enumerate() {
            for &v in edge {
                membership[v].push(e);
            }
        }
        Self { num_nodes, edges, membership, lookup }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<NodeId>] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &[NodeId] {
        &self.edges[e]
    }

    /// Edges containing `v`, in ascending edge order.
    pub fn memberships(&self, v: NodeId) -> &[EdgeId] {
        &self.membership[v]
    }

    /// Index of the edge equal to `nodes` as a set, if any.
    pub fn find_edge(&self, nodes: &[NodeId]) -> Option<EdgeId> {
        let key = canonical_set(nodes.to_vec());
        self.lookup.get(&key).copied()
    }

    pub fn contains_edge(&self, nodes: &[NodeId]) -> bool {
        self.find_edge(nodes).is_some()
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), HypergraphError> {
        if v < self.num_nodes {
            Ok(())
        } else {
            Err(HypergraphError::NodeOutOfRange { id: v, num_nodes: self.num_nodes })
        }
    }

    /// Node degrees (#edges containing each node) and edge degrees (|S|).
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let node = self.membership.iter().map(Vec::len).collect();
        let edge = self.edges.iter().map(Vec::len).collect();
        (node, edge)
    }

    /// Dense clique expansion `sign(H Hᵀ)`, row-major `n × n`.
    pub fn clique_expansion(&self) -> Vec<Vec<bool>> {
        let n = self.num_nodes;
        let mut adj = vec![vec![false; n]; n];
        for edge in &self.edges {
            for &a in edge {
                for &b in edge {
                    adj[a][b] = true;
                }
            }
        }
        adj
    }

    /// Dense `n × m` incidence matrix.
    pub fn incidence_dense(&self) -> Vec<Vec<bool>> {
        let mut h = vec![vec![false; self.edges.len()]; self.num_nodes];
        for (e, edge) in self.edges.iter().enumerate() {
            for &v in edge {
                h[v][e] = true;
            }
        }
        h
    }

    /// Copy of the hypergraph without the edge equal to `nodes` (no-op if absent).
    pub fn remove_edge(&self, nodes: &[NodeId]) -> Hypergraph {
        let Some(target) = self.find_edge(nodes) else {
            return self.clone();
        };
        let edges: Vec<Vec<NodeId>> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(e, _)| e != target)
            .map(|(_, edge)| edge.clone())
            .collect();
        let lookup = edges.iter().enumerate().map(|(e, s)| (s.clone(), e)).collect();
        Self::from_parts(self.num_nodes, edges, lookup)
    }

    /// Relabels every node through `perm` (`perm[old] = new`), keeping the
    /// edge order.
    pub fn relabel(&self, perm: &[NodeId]) -> Hypergraph {
        assert_eq!(perm.len(), self.num_nodes, "permutation length must match the universe");
        let edges: Vec<Vec<NodeId>> = self
            .edges
            .iter()
            .map(|edge| canonical_set(edge.iter().map(|&v| perm[v]).collect()))
            .collect();
        let lookup = edges.iter().enumerate().map(|(e, s)| (s.clone(), e)).collect();
        Self::from_parts(self.num_nodes, edges, lookup)
    }
}

/// Summary statistics over the edge list and the non-isolated nodes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DegreeStats {
    pub edges: usize,
    pub nodes: usize,
    pub edge_degree_mean: f64,
    pub edge_degree_std: f64,
    pub node_degree_mean: f64,
    pub node_degree_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl DegreeStats {
    /// Nodes that belong to no edge are excluded from the node count and
    /// the node-degree moments; standard deviations use the population form.
    pub fn of(hg: &Hypergraph) -> Self {
        let (node_deg, edge_deg) = hg.degrees();
        let node_deg: Vec<f64> = node_deg.into_iter().filter(|&d| d > 0).map(|d| d as f64).collect();
        let edge_deg: Vec<f64> = edge_deg.into_iter().map(|d| d as f64).collect();
        let (em, es) = mean_std(&edge_deg);
        let (nm, ns) = mean_std(&node_deg);
        Self {
            edges: edge_deg.len(),
            nodes: node_deg.len(),
            edge_degree_mean: em,
            edge_degree_std: es,
            node_degree_mean: nm,
            node_degree_std: ns,
        }
    }
}
