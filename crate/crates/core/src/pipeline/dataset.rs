use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hypergraph::{extract_local_masked, EdgeId, Hypergraph, LocalEnvironment, NodeId};
use crate::model::ModelInput;

use super::{derive_seed, kfold_split, sample_negatives, TrainConfig};

pub(crate) const TAG_NEGATIVES: u64 = 1;
pub(crate) const TAG_FOLDS: u64 = 2;

/// One labelled candidate set. Positives remember which edge they came from
/// so extraction can hide it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub nodes: Vec<NodeId>,
    pub label: bool,
    pub source_edge: Option<EdgeId>,
}

/// Positives (every edge, in edge order), then the sampled negatives, plus
/// a fold for each.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub samples: Vec<Sample>,
    pub folds: Vec<usize>,
    pub config: TrainConfig,
}

impl Experiment {
    /// Samples negatives once and assigns stratified folds; both streams are
    /// derived from `config.seed`.
    pub fn build(hg: &Hypergraph, config: &TrainConfig) -> crate::Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[TAG_NEGATIVES]));
        let negatives = sample_negatives(hg, config.neg_ratio, &mut rng)?;
        let mut samples: Vec<Sample> = hg
            .edges()
            .iter()
            .enumerate()
            .map(|(e, nodes)| Sample { nodes: nodes.clone(), label: true, source_edge: Some(e) })
            .collect();
        samples.extend(negatives.into_iter().map(|nodes| Sample { nodes, label: false, source_edge: None }));
        let labels: Vec<bool> = samples.iter().map(|s| s.label).collect();
        let folds = kfold_split(&labels, config.folds, derive_seed(config.seed, &[TAG_FOLDS]))?;
        Ok(Self { samples, folds, config: config.clone() })
    }

    pub fn labels(&self) -> Vec<bool> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn num_positives(&self) -> usize {
        self.samples.iter().filter(|s| s.label).count()
    }

    pub fn num_negatives(&self) -> usize {
        self.samples.len() - self.num_positives()
    }

    /// (train, test) sample indices for `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.samples.len()).partition(|&i| self.folds[i] != fold)
    }
}

/// Local environment of a sample. A positive is extracted with its own edge
/// masked, so the model never sees the answer.
pub fn sample_environment(hg: &Hypergraph, sample: &Sample, config: &TrainConfig) -> crate::Result<LocalEnvironment> {
    Ok(extract_local_masked(hg, &sample.nodes, config.q, config.cutoff(), sample.source_edge)?)
}

/// Model inputs for every sample, in sample order.
pub fn prepare_inputs(hg: &Hypergraph, samples: &[Sample], config: &TrainConfig) -> crate::Result<Vec<ModelInput>> {
    samples
        .par_iter()
        .map(|s| {
            let env = sample_environment(hg, s, config)?;
            Ok(ModelInput::from_env(&env)?)
        })
        .collect()
}
