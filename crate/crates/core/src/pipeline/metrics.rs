use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
}

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize), MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    Ok((pos, labels.len() - pos))
}

/// F1 of the positive class, predicting positive when `score >= threshold`.
pub fn f1_score(scores: &[f64], labels: &[bool], threshold: f64) -> Result<f64, MetricError> {
    let (pos, _) = check(scores, labels)?;
    if pos == 0 {
        return Err(MetricError::Undefined("F1 needs at least one positive label"));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

/// ROC AUC as the Mann–Whitney statistic; tied scores count one half.
pub fn auc_score(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    let (pos, neg) = check(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(MetricError::Undefined("AUC needs both positive and negative labels"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Mean and sample standard deviation (`n − 1` denominator; zero for n < 2).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let s = [0.9, 0.8, 0.2, 0.1];
        let l = [true, true, false, false];
        assert_eq!(f1_score(&s, &l, 0.5).unwrap(), 1.0);
        assert_eq!(auc_score(&s, &l).unwrap(), 1.0);
    }

    #[test]
    fn hand_enumerated_confusion() {
        let s = [0.9, 0.6, 0.4, 0.1];
        let l = [true, false, true, false];
        assert_eq!(auc_score(&s, &l).unwrap(), 0.75);
        assert_eq!(f1_score(&s, &l, 0.5).unwrap(), 0.5);
        let s2 = [0.9, 0.4, 0.6, 0.1];
        assert_eq!(auc_score(&s2, &l).unwrap(), 1.0);
        assert_eq!(f1_score(&s2, &l, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn ties_count_half() {
        let l = [true, false, true, false, false];
        assert_eq!(auc_score(&[0.3; 5], &l).unwrap(), 0.5);
    }

    #[test]
    fn degenerate_labels() {
        assert!(matches!(auc_score(&[0.1, 0.2], &[true, true]), Err(MetricError::Undefined(_))));
        assert!(matches!(f1_score(&[0.1, 0.2], &[false, false], 0.5), Err(MetricError::Undefined(_))));
        assert!(matches!(f1_score(&[0.1], &[true, false], 0.5), Err(MetricError::LengthMismatch { .. })));
    }

    #[test]
    fn no_predicted_positives_gives_zero() {
        assert_eq!(f1_score(&[0.1, 0.2], &[true, false], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
    }
}
