use std::collections::{BTreeSet, HashMap, HashSet};

use super::{EdgeId, Hypergraph, HypergraphError, NodeId};

/// Breadth-first search over the node–edge bipartite graph. Distances are in
/// hyperedge hops. Stops at `cutoff` hops, or earlier once every node in
/// `targets` has been reached.
fn bfs(
    hg: &Hypergraph,
    source: NodeId,
    cutoff: u32,
    excluded: Option<EdgeId>,
    targets: Option<&HashSet<NodeId>>,
) -> HashMap<NodeId, u32> {
    let mut dist = HashMap::new();
    dist.insert(source, 0u32);
    let mut remaining = targets.map(|t| t.len() - usize::from(t.contains(&source)));
    let mut seen_edges = HashSet::new();
    let mut frontier = vec![source];
    let mut depth = 0;
    while depth < cutoff && !frontier.is_empty() && remaining != Some(0) {
        depth += 1;
        let mut next = Vec::new();
        for &v in &frontier {
            for &e in hg.memberships(v) {
                if Some(e) == excluded || !seen_edges.insert(e) {
                    continue;
                }
                for &u in hg.edge(e) {
                    if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(u) {
                        slot.insert(depth);
                        next.push(u);
                        if let (Some(t), Some(r)) = (targets, remaining.as_mut()) {
                            if t.contains(&u) {
                                *r -= 1;
                            }
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Hop distances from each source to every node; anything beyond `cutoff`
/// (including unreachable nodes) is reported as `cutoff + 1`.
pub fn spd_from_sources(
    hg: &Hypergraph,
    sources: &[NodeId],
    cutoff: u32,
) -> Result<Vec<Vec<u32>>, HypergraphError> {
    if sources.is_empty() {
        return Err(HypergraphError::InvalidCandidate("no source nodes given".into()));
    }
    sources
        .iter()
        .map(|&s| {
            hg.check_node(s)?;
            let dist = bfs(hg, s, cutoff, None, None);
            let mut row = vec![cutoff + 1; hg.num_nodes()];
            for (v, d) in dist {
                row[v] = d;
            }
            Ok(row)
        })
        .collect()
}

/// The q-hop neighbourhood of a candidate set together with its incidence
/// and affinity matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalEnvironment {
    candidate: Vec<NodeId>,
    q: u32,
    cutoff: u32,
    nodes: Vec<NodeId>,
    edges: Vec<EdgeId>,
    /// Local row indices of the members of each local edge.
    edge_rows: Vec<Vec<usize>>,
    /// Row-major `|nodes| × |candidate|` hop distances.
    affinity: Vec<u32>,
    candidate_rows: Vec<usize>,
}

impl LocalEnvironment {
    /// Candidate members in the order they were given.
    pub fn candidate(&self) -> &[NodeId] {
        &self.candidate
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Value written for distances beyond the cutoff.
    pub fn sentinel(&self) -> u32 {
        self.cutoff + 1
    }

    /// Neighbourhood nodes in ascending id order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Indices (into the source hypergraph) of the edges fully inside the
    /// neighbourhood, ascending.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_rows(&self) -> &[Vec<usize>] {
        &self.edge_rows
    }

    /// Row index within `nodes()` of each candidate member.
    pub fn candidate_rows(&self) -> &[usize] {
        &self.candidate_rows
    }

    pub fn affinity(&self) -> &[u32] {
        &self.affinity
    }

    pub fn affinity_row(&self, i: usize) -> &[u32] {
        let c = self.candidate.len();
        &self.affinity[i * c..(i + 1) * c]
    }

    pub fn affinity_rows(&self) -> Vec<Vec<u32>> {
        (0..self.nodes.len()).map(|i| self.affinity_row(i).to_vec()).collect()
    }

    /// Dense `|nodes| × |edges|` incidence matrix.
    pub fn incidence_dense(&self) -> Vec<Vec<bool>> {
        let mut h = vec![vec![false; self.edges.len()]; self.nodes.len()];
        for (j, rows) in self.edge_rows.iter().enumerate() {
            for &i in rows {
                h[i][j] = true;
            }
        }
        h
    }
}

/// Extracts the q-hop local environment of `candidate`.
///
/// Distances are measured on the whole hypergraph, not on the induced
/// neighbourhood. Affinity entries beyond `cutoff` hops hold `cutoff + 1`.
pub fn extract_local(
    hg: &Hypergraph,
    candidate: &[NodeId],
    q: u32,
    cutoff: u32,
) -> Result<LocalEnvironment, HypergraphError> {
    extract_local_masked(hg, candidate, q, cutoff, None)
}

/// Same as [`extract_local`] but treats edge `excluded` as absent from the
/// hypergraph. Equivalent to extracting from `hg.remove_edge(..)`, without
/// the copy.
pub fn extract_local_masked(
    hg: &Hypergraph,
    candidate: &[NodeId],
    q: u32,
    cutoff: u32,
    excluded: Option<EdgeId>,
) -> Result<LocalEnvironment, HypergraphError> {
    if candidate.len() < 2 {
        return Err(HypergraphError::InvalidCandidate(format!(
            "a candidate needs at least two nodes, got {}",
            candidate.len()
        )));
    }
    if cutoff < q {
        return Err(HypergraphError::CutoffBelowHops { cutoff, q });
    }
    let mut distinct = HashSet::with_capacity(candidate.len());
    for &v in candidate {
        hg.check_node(v)?;
        if !distinct.insert(v) {
            return Err(HypergraphError::InvalidCandidate(format!("node {v} appears more than once")));
        }
    }

    let mut neighbourhood = BTreeSet::new();
    for &s in candidate {
        neighbourhood.extend(bfs(hg, s, q, excluded, None).into_keys());
    }
    let nodes: Vec<NodeId> = neighbourhood.into_iter().collect();
    let row_of: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut edge_set = BTreeSet::new();
    for &v in &nodes {
        for &e in hg.memberships(v) {
            if Some(e) != excluded && hg.edge(e).iter().all(|u| row_of.contains_key(u)) {
                edge_set.insert(e);
            }
        }
    }
    let edges: Vec<EdgeId> = edge_set.into_iter().collect();
    let edge_rows = edges.iter().map(|&e| hg.edge(e).iter().map(|u| row_of[u]).collect()).collect();

    let targets: HashSet<NodeId> = nodes.iter().copied().collect();
    let c = candidate.len();
    let mut affinity = vec![cutoff + 1; nodes.len() * c];
    for (j, &s) in candidate.iter().enumerate() {
        for (v, d) in bfs(hg, s, cutoff, excluded, Some(&targets)) {
            if let Some(&i) = row_of.get(&v) {
                affinity[i * c + j] = d;
            }
        }
    }
    let candidate_rows = candidate.iter().map(|v| row_of[v]).collect();

    Ok(LocalEnvironment {
        candidate: candidate.to_vec(),
        q,
        cutoff,
        nodes,
        edges,
        edge_rows,
        affinity,
        candidate_rows,
    })
}
