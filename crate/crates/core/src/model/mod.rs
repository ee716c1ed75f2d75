//! The hyperedge scorer.
//!
//! A candidate set is scored from its local environment in four stages:
//!
//! 1. a deep-sets encoder turns every affinity row (the distances from one
//!    local node to each member of the candidate) into a fixed-width node
//!    feature, treating the row as an unordered set;
//! 2. a bipartite message-passing network alternates node → edge and
//!    edge → node updates over the local incidence structure;
//! 3. the final embeddings of the candidate's own members are sort-pooled
//!    into a fixed-length vector;
//! 4. the top-two singular values of the affinity matrix (and their ratio)
//!    pass through a small dense map, are concatenated with the readout, and
//!    a linear head plus sigmoid produces the probability.

mod config;
mod input;

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::autodiff::{AutodiffError, ParamStore, Reduce, Tape, Tensor, Var};
use crate::spectrum::SpectrumError;

pub use config::{ModelConfig, NormScenario, SetPooling};
pub use input::ModelInput;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("invalid model input: {0}")]
    Input(String),
}

#[derive(Debug, Clone, PartialEq)]
struct LayerIds {
    edge_w: usize,
    edge_b: usize,
    node_w: usize,
    node_b: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct ParamIds {
    phi_w1: usize,
    phi_b1: usize,
    phi_w2: usize,
    phi_b2: usize,
    rho_w: usize,
    rho_b: usize,
    layers: Vec<LayerIds>,
    spectrum_w: usize,
    spectrum_b: usize,
    head_w: usize,
    head_b: usize,
}

/// Parameters plus architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct SnalsModel {
    config: ModelConfig,
    params: ParamStore,
    ids: ParamIds,
}

/// Loss, probability and parameter gradients of one training example.
#[derive(Debug, Clone)]
pub struct SampleGradient {
    pub loss: f64,
    pub probability: f64,
    pub grads: Vec<(usize, Tensor)>,
}

fn xavier(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Tensor {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-a..a)).collect();
    Tensor::from_vec(fan_in, fan_out, data).expect("sized")
}

/// Descending by the last channel, ties resolved by the channels to its
/// left. Equal rows compare equal, so the order depends only on content.
fn sortpool_order(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

impl SnalsModel {
    /// Fresh model with Xavier-uniform weights and zero biases. The random
    /// stream does not depend on `spectrum_enabled`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate().map_err(ModelError::Config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let d = config.embed_dim;
        let zeros = |n: usize| Tensor::zeros(1, n);

        let phi_w1 = params.add("phi.w1", xavier(&mut rng, 1, config.phi_hidden));
        let phi_b1 = params.add("phi.b1", zeros(config.phi_hidden));
        let phi_w2 = params.add("phi.w2", xavier(&mut rng, config.phi_hidden, config.phi_out));
        let phi_b2 = params.add("phi.b2", zeros(config.phi_out));
        let rho_w = params.add("rho.w", xavier(&mut rng, config.phi_out, d));
        let rho_b = params.add("rho.b", zeros(d));
        let layers = (0..config.mpnn_layers)
            .map(|l| LayerIds {
                edge_w: params.add(format!("mpnn.{l}.edge.w"), xavier(&mut rng, d, d)),
                edge_b: params.add(format!("mpnn.{l}.edge.b"), zeros(d)),
                node_w: params.add(format!("mpnn.{l}.node.w"), xavier(&mut rng, d, d)),
                node_b: params.add(format!("mpnn.{l}.node.b"), zeros(d)),
            })
            .collect();
        let spectrum_w = params.add("spectrum.w", xavier(&mut rng, 3, config.spectrum_hidden));
        let spectrum_b = params.add("spectrum.b", zeros(config.spectrum_hidden));
        let head_in = config.readout_width() + config.spectrum_hidden;
        let head_w = params.add("head.w", xavier(&mut rng, head_in, 1));
        let head_b = params.add("head.b", zeros(1));

        let ids = ParamIds {
            phi_w1,
            phi_b1,
            phi_w2,
            phi_b2,
            rho_w,
            rho_b,
            layers,
            spectrum_w,
            spectrum_b,
            head_w,
            head_b,
        };
        Ok(Self { config, params, ids })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// Ids of the head weight and bias, in that order.
    pub fn head_param_ids(&self) -> (usize, usize) {
        (self.ids.head_w, self.ids.head_b)
    }

    fn p(&self, tape: &mut Tape, id: usize) -> Var {
        tape.param(id, self.params.get(id))
    }

    fn dense(&self, tape: &mut Tape, x: Var, w: usize, b: usize) -> Result<Var, ModelError> {
        let (w, b) = (self.p(tape, w), self.p(tape, b));
        let h = tape.matmul(x, w)?;
        Ok(tape.add_broadcast_row(h, b)?)
    }

    /// Node features `|V| × embed_dim` from the affinity rows.
    ///
    /// φ is a pointwise map of scalar distances, so it is evaluated once per
    /// distinct value and gathered back to every entry before pooling.
    pub fn deepsets_standardize(&self, tape: &mut Tape, input: &ModelInput) -> Result<Var, ModelError> {
        if input.set_size() < 2 {
            return Err(ModelError::Input(format!("candidate of size {} (need ≥ 2)", input.set_size())));
        }
        if let Some(v) = input.affinity().iter().find(|v| !v.is_finite()) {
            return Err(ModelError::Input(format!("non-finite affinity entry {v}")));
        }
        let values = input.distinct_values();
        let u = tape.constant(Tensor::from_vec(values.len(), 1, values.to_vec())?);
        let h = self.dense(tape, u, self.ids.phi_w1, self.ids.phi_b1)?;
        let h = tape.relu(h);
        let h = self.dense(tape, h, self.ids.phi_w2, self.ids.phi_b2)?;
        let h = tape.relu(h);
        let per_entry = tape.gather_rows(h, input.entry_index())?;
        let kind = match self.config.set_pooling {
            SetPooling::Sum => Reduce::Sum,
            SetPooling::Mean => Reduce::Mean,
            SetPooling::Max => Reduce::Max,
        };
        let pooled = tape.reduce_row_groups(per_entry, input.set_size(), kind)?;
        self.dense(tape, pooled, self.ids.rho_w, self.ids.rho_b)
    }

    /// Alternating edge and node updates over the local incidence.
    pub fn bipartite_forward(&self, tape: &mut Tape, input: &ModelInput, x0: Var) -> Result<Var, ModelError> {
        let n = input.num_nodes();
        if tape.value(x0).rows() != n {
            return Err(ModelError::Autodiff(AutodiffError::ShapeMismatch {
                op: "bipartite_forward",
                left: (n, input.edge_rows().len()),
                right: tape.value(x0).shape(),
            }));
        }
        let scenario = self.config.norm_scenario;
        let mut x_nodes = x0;
        for layer in &self.ids.layers {
            let source = if scenario.node_side() {
                tape.scale_rows(x_nodes, input.node_inv_sqrt_degree())?
            } else {
                x_nodes
            };
            let mut to_edges = tape.incidence_to_edges(source, input.edge_rows())?;
            if scenario.edge_side() {
                to_edges = tape.scale_rows(to_edges, input.edge_inv_degree())?;
            }
            let x_edges = self.dense(tape, to_edges, layer.edge_w, layer.edge_b)?;
            let x_edges = tape.relu(x_edges);
            let mut to_nodes = tape.incidence_to_nodes(x_edges, input.edge_rows(), n)?;
            if scenario.node_side() {
                to_nodes = tape.scale_rows(to_nodes, input.node_inv_sqrt_degree())?;
            }
            let h = self.dense(tape, to_nodes, layer.node_w, layer.node_b)?;
            x_nodes = tape.relu(h);
        }
        Ok(x_nodes)
    }

    /// Sort-pools the rows at `rows` into a `1 × (k · width)` vector.
    pub fn sortpool_readout(&self, tape: &mut Tape, embeddings: Var, rows: &[usize]) -> Result<Var, ModelError> {
        let emb = tape.value(embeddings);
        let width = emb.cols();
        let mut order = rows.to_vec();
        order.sort_by(|&a, &b| sortpool_order(emb.row(a), emb.row(b)));
        let picked = tape.gather_rows(embeddings, &order)?;
        let k = self.config.sortpool_k;
        let padded = tape.pad_rows(picked, k);
        Ok(tape.reshape(padded, 1, k * width)?)
    }

    /// The structural branch: set encoder, message passing and sort-pooling.
    pub fn structural_readout(&self, tape: &mut Tape, input: &ModelInput) -> Result<Var, ModelError> {
        let x0 = self.deepsets_standardize(tape, input)?;
        let embeddings = self.bipartite_forward(tape, input, x0)?;
        self.sortpool_readout(tape, embeddings, input.candidate_rows())
    }

    fn spectrum_branch(&self, tape: &mut Tape, input: &ModelInput) -> Result<Var, ModelError> {
        if !self.config.spectrum_enabled {
            return Ok(tape.constant(Tensor::zeros(1, self.config.spectrum_hidden)));
        }
        let s = tape.constant(Tensor::row_vector(input.spectrum().to_array().to_vec()));
        let h = self.dense(tape, s, self.ids.spectrum_w, self.ids.spectrum_b)?;
        Ok(tape.relu(h))
    }

    /// Records the full forward pass and returns the `1 × 1` probability.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        tape: &mut Tape,
        input: &ModelInput,
        training: bool,
        rng: &mut R,
    ) -> Result<Var, ModelError> {
        let readout = self.structural_readout(tape, input)?;
        let readout = tape.dropout(readout, self.config.dropout, training, rng)?;
        let spectrum = self.spectrum_branch(tape, input)?;
        let joined = tape.concat_cols(readout, spectrum)?;
        let logit = self.dense(tape, joined, self.ids.head_w, self.ids.head_b)?;
        Ok(tape.sigmoid(logit))
    }

    /// Inference-mode probability.
    pub fn predict(&self, input: &ModelInput) -> Result<f64, ModelError> {
        let mut tape = Tape::new();
        // The rng is never drawn from outside training mode.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = self.forward(&mut tape, input, false, &mut rng)?;
        Ok(tape.value(p).item())
    }

    /// Training-mode forward and backward pass on a single labelled example.
    pub fn sample_gradient<R: Rng + ?Sized>(
        &self,
        input: &ModelInput,
        label: f64,
        rng: &mut R,
    ) -> Result<SampleGradient, ModelError> {
        let mut tape = Tape::new();
        let p = self.forward(&mut tape, input, true, rng)?;
        let probability = tape.value(p).item();
        let loss = tape.bce_loss(p, &[label])?;
        let loss_value = tape.value(loss).item();
        tape.backward(loss)?;
        let grads = tape.param_grads().map(|(id, g)| (id, g.clone())).collect();
        Ok(SampleGradient { loss: loss_value, probability, grads })
    }

    pub fn to_checkpoint_json(&self) -> String {
        self.params.to_json()
    }

    /// Rebuilds a model from its configuration and a checkpoint produced by
    /// [`SnalsModel::to_checkpoint_json`].
    pub fn from_checkpoint_json(config: ModelConfig, json: &str) -> Result<Self, ModelError> {
        let mut model = Self::new(config, 0)?;
        model.params.load_json(json)?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests;
