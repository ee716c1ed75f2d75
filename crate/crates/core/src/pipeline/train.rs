use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Adam, AutodiffError, Tensor};
use crate::model::{ModelError, ModelInput, SnalsModel};

use super::{auc_score, derive_seed, f1_score, PipelineError, TrainConfig};

const TAG_INIT: u64 = 10;
const TAG_SHUFFLE: u64 = 11;
const TAG_DROPOUT: u64 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_f1: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best monitored F1.
    pub model: SnalsModel,
    pub history: Vec<EpochRecord>,
    pub epochs_run: usize,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub f1: f64,
    pub auc: f64,
}

/// Inference probabilities for `indices`, in order.
pub fn predict_all(model: &SnalsModel, inputs: &[ModelInput], indices: &[usize]) -> Result<Vec<f64>, ModelError> {
    indices.par_iter().map(|&i| model.predict(&inputs[i])).collect()
}

pub fn evaluate(
    model: &SnalsModel,
    inputs: &[ModelInput],
    labels: &[bool],
    indices: &[usize],
    threshold: f64,
) -> crate::Result<Metrics> {
    let scores = predict_all(model, inputs, indices)?;
    let truth: Vec<bool> = indices.iter().map(|&i| labels[i]).collect();
    let f1 = f1_score(&scores, &truth, threshold).map_err(PipelineError::from)?;
    let auc = auc_score(&scores, &truth).map_err(PipelineError::from)?;
    Ok(Metrics { f1, auc })
}

/// (F1, mean BCE) on the monitored split.
fn monitor(model: &SnalsModel, inputs: &[ModelInput], labels: &[bool], idx: &[usize], t: f64) -> crate::Result<(f64, f64)> {
    let scores = predict_all(model, inputs, idx)?;
    let truth: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
    let f1 = f1_score(&scores, &truth, t).map_err(PipelineError::from)?;
    let loss = scores
        .iter()
        .zip(&truth)
        .map(|(&p, &y)| {
            let p = p.clamp(1e-7, 1.0 - 1e-7);
            if y { -p.ln() } else { -(1.0 - p).ln() }
        })
        .sum::<f64>()
        / scores.len() as f64;
    Ok((f1, loss))
}

/// Minibatch BCE training with Adam and early stopping on F1.
///
/// Early stopping watches `val`, or `fit` when `val` holds no positive. An
/// epoch counts as an improvement when its F1 is higher, or equal with a
/// lower loss; the returned model carries the parameters of the best epoch. Per-sample
/// gradients run in parallel but are summed in batch order, and every
/// sample draws dropout from its own seeded stream, so results do not
/// depend on thread scheduling.
pub fn train_model(
    inputs: &[ModelInput],
    labels: &[bool],
    fit: &[usize],
    val: &[usize],
    config: &TrainConfig,
    seed: u64,
) -> crate::Result<TrainOutcome> {
    config.validate()?;
    if fit.is_empty() {
        return Err(PipelineError::Config("empty training split".into()).into());
    }
    let mut model = SnalsModel::new(config.model.clone(), derive_seed(seed, &[TAG_INIT]))?;
    let mut adam = Adam::new(config.learning_rate);
    let mut grads: Vec<Tensor> = model.params().zeros_like();
    let watched = if val.iter().any(|&i| labels[i]) { val } else { fit };

    let mut order = fit.to_vec();
    let mut history = Vec::new();
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, 0usize, model.params().clone());
    let mut stale = 0;
    for epoch in 0..config.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_SHUFFLE, epoch as u64]));
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results: Vec<_> = batch
                .par_iter()
                .map(|&i| {
                    let mut drop_rng =
                        ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_DROPOUT, epoch as u64, i as u64]));
                    let label = if labels[i] { 1.0 } else { 0.0 };
                    (i, model.sample_gradient(&inputs[i], label, &mut drop_rng))
                })
                .collect();
            for (i, result) in results {
                let sample = match result {
                    Ok(g) => g,
                    Err(ModelError::Autodiff(AutodiffError::NonFiniteLoss(value))) => {
                        return Err(PipelineError::NonFiniteLoss { epoch, sample: i, value }.into())
                    }
                    Err(e) => return Err(e.into()),
                };
                loss_sum += sample.loss;
                for (id, g) in &sample.grads {
                    grads[*id].add_assign(g);
                }
            }
            let scale = 1.0 / batch.len() as f64;
            for g in &mut grads {
                g.scale(scale);
                if !g.is_finite() {
                    return Err(PipelineError::NonFiniteLoss { epoch, sample: batch[0], value: f64::NAN }.into());
                }
            }
            adam.step(model.params_mut().tensors_mut(), &mut grads)?;
        }
        let (val_f1, val_loss) = monitor(&model, inputs, labels, watched, config.threshold)?;
        history.push(EpochRecord { epoch, train_loss: loss_sum / fit.len() as f64, val_loss, val_f1 });
        if val_f1 > best.0 || (val_f1 == best.0 && val_loss < best.1) {
            best = (val_f1, val_loss, epoch, model.params().clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    let epochs_run = history.len();
    *model.params_mut() = best.3;
    Ok(TrainOutcome { model, history, epochs_run, best_epoch: best.2 })
}
