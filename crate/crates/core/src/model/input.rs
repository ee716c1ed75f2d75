use std::sync::Arc;

use crate::hypergraph::LocalEnvironment;
use crate::spectrum::{affinity_to_real, spectrum_feature, SpectrumError, SpectrumFeature};

/// Everything the network reads from one local environment, precomputed so
/// that repeated epochs do not redo graph work.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInput {
    num_nodes: usize,
    set_size: usize,
    affinity: Vec<f64>,
    /// Sorted distinct affinity values.
    distinct: Vec<f64>,
    /// For every affinity entry, its position in `distinct`; sorted within
    /// each row.
    entry_index: Vec<usize>,
    edge_rows: Arc<Vec<Vec<usize>>>,
    candidate_rows: Vec<usize>,
    edge_inv_degree: Vec<f64>,
    node_inv_sqrt_degree: Vec<f64>,
    spectrum: SpectrumFeature,
}

impl ModelInput {
    pub fn from_env(env: &LocalEnvironment) -> Result<Self, SpectrumError> {
        let spectrum = spectrum_feature(env)?;
        Ok(Self::from_parts(
            env.num_nodes(),
            env.candidate().len(),
            affinity_to_real(env),
            env.edge_rows().to_vec(),
            env.candidate_rows().to_vec(),
            spectrum,
        ))
    }

    /// Builds an input from raw pieces. `affinity` is row-major
    /// `num_nodes × set_size`; `edge_rows` lists the member rows of each edge.
    pub fn from_parts(
        num_nodes: usize,
        set_size: usize,
        affinity: Vec<f64>,
        edge_rows: Vec<Vec<usize>>,
        candidate_rows: Vec<usize>,
        spectrum: SpectrumFeature,
    ) -> Self {
        assert_eq!(affinity.len(), num_nodes * set_size, "affinity shape");
        let mut distinct = affinity.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let mut entry_index: Vec<usize> = affinity
            .iter()
            .map(|v| distinct.binary_search_by(|d| d.total_cmp(v)).expect("present"))
            .collect();
        // Rows are sets; a canonical member order makes pooling bit-stable
        // under column permutations.
        if set_size > 0 {
            entry_index.chunks_mut(set_size).for_each(|row| row.sort_unstable());
        }
        let edge_inv_degree = edge_rows.iter().map(|m| 1.0 / m.len().max(1) as f64).collect();
        let mut node_degree = vec![0usize; num_nodes];
        for members in &edge_rows {
            for &i in members {
                node_degree[i] += 1;
            }
        }
        let node_inv_sqrt_degree = node_degree.iter().map(|&d| 1.0 / (d.max(1) as f64).sqrt()).collect();
        Self {
            num_nodes,
            set_size,
            affinity,
            distinct,
            entry_index,
            edge_rows: Arc::new(edge_rows),
            candidate_rows,
            edge_inv_degree,
            node_inv_sqrt_degree,
            spectrum,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn affinity(&self) -> &[f64] {
        &self.affinity
    }

    pub fn distinct_values(&self) -> &[f64] {
        &self.distinct
    }

    pub fn entry_index(&self) -> &[usize] {
        &self.entry_index
    }

    pub fn edge_rows(&self) -> &Arc<Vec<Vec<usize>>> {
        &self.edge_rows
    }

    pub fn candidate_rows(&self) -> &[usize] {
        &self.candidate_rows
    }

    pub fn edge_inv_degree(&self) -> &[f64] {
        &self.edge_inv_degree
    }

    pub fn node_inv_sqrt_degree(&self) -> &[f64] {
        &self.node_inv_sqrt_degree
    }

    pub fn spectrum(&self) -> SpectrumFeature {
        self.spectrum
    }
}
