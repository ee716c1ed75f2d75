use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::PipelineError;

/// Stratified fold assignment. Positives and negatives are shuffled
/// separately and dealt round-robin, so per-fold class counts and totals
/// each differ by at most one.
pub fn kfold_split(labels: &[bool], folds: usize, seed: u64) -> Result<Vec<usize>, PipelineError> {
    if folds < 2 {
        return Err(PipelineError::Config(format!("need at least 2 folds, got {folds}")));
    }
    if labels.len() < folds {
        return Err(PipelineError::TooFewSamples { samples: labels.len(), folds });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut assignment = vec![0; labels.len()];
    for (t, &i) in pos.iter().chain(&neg).enumerate() {
        assignment[i] = t % folds;
    }
    Ok(assignment)
}

/// Splits `train` into (fit, validation), holding back `fraction` of each
/// class.
pub fn split_validation(train: &[usize], labels: &[bool], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    if fraction <= 0.0 {
        return (train.to_vec(), Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fit = Vec::new();
    let mut val = Vec::new();
    for class in [true, false] {
        let mut members: Vec<usize> = train.iter().copied().filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let take = ((members.len() as f64) * fraction).round() as usize;
        val.extend_from_slice(&members[..take]);
        fit.extend_from_slice(&members[take..]);
    }
    fit.sort_unstable();
    val.sort_unstable();
    (fit, val)
}
