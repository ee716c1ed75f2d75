use serde::{Deserialize, Serialize};

use crate::model::ModelConfig;

use super::PipelineError;

/// Training and evaluation protocol settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Neighbourhood radius in hyperedge hops.
    pub q: u32,
    /// BFS cutoff for affinity distances; `None` means `2q + 1`.
    pub cutoff: Option<u32>,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation-F1 improvement before stopping.
    pub patience: usize,
    pub neg_ratio: usize,
    pub folds: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub threshold: f64,
    /// Share of each training split held back for early stopping. Zero
    /// monitors the training split itself.
    pub validation_fraction: f64,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            q: 1,
            cutoff: None,
            batch_size: 50,
            max_epochs: 30,
            patience: 5,
            neg_ratio: 5,
            folds: 5,
            learning_rate: 1e-3,
            seed: 0,
            threshold: 0.5,
            validation_fraction: 0.1,
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn cutoff(&self) -> u32 {
        self.cutoff.unwrap_or(2 * self.q + 1)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if self.q == 0 {
            return fail("q must be positive".into());
        }
        if self.cutoff() < self.q {
            return fail(format!("cutoff {} is below q {}", self.cutoff(), self.q));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.neg_ratio == 0 {
            return fail("batch size, epoch cap and negative ratio must be positive".into());
        }
        if self.folds < 2 {
            return fail(format!("need at least 2 folds, got {}", self.folds));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return fail(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return fail(format!("validation fraction must lie in [0, 1), got {}", self.validation_fraction));
        }
        self.model.validate().map_err(PipelineError::Config)
    }
}

/// Mixes a base seed with stream tags (splitmix64), so every consumer of
/// randomness gets its own reproducible stream.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut x = seed;
    for &t in tags {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(t.wrapping_mul(0xBF58_476D_1CE4_E5B9));
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x = z ^ (z >> 31);
    }
    x
}
