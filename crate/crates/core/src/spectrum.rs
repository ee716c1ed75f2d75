//! Local spectrum of the affinity matrix.
//!
//! The two largest singular values of an `r × c` matrix are obtained from the
//! eigenvalues of the `c × c` Gram matrix `XᵀX`, diagonalised with cyclic
//! Jacobi rotations. Candidate sets are small, so `c` stays in the tens.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::LocalEnvironment;

const RATIO_EPS: f64 = 1e-9;
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("matrix must have at least 1 row and 2 columns, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFeature {
    pub sigma1: f64,
    pub sigma2: f64,
    pub ratio: f64,
}

impl SpectrumFeature {
    pub fn from_singular(sigma1: f64, sigma2: f64) -> Self {
        Self { sigma1, sigma2, ratio: sigma2 / (sigma1 + RATIO_EPS) }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.sigma1, self.sigma2, self.ratio]
    }
}

/// Eigenvalues of a symmetric matrix (row-major, `n × n`) by cyclic Jacobi.
/// Returned unsorted, in diagonal order.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    let trace: f64 = (0..n).map(|i| a[i * n + i].abs()).sum();
    let threshold = JACOBI_TOL * trace;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// The two largest singular values of a row-major `rows × cols` matrix.
pub fn top2_singular(x: &[f64], rows: usize, cols: usize) -> Result<(f64, f64), SpectrumError> {
    if rows < 1 || cols < 2 || x.len() != rows * cols {
        return Err(SpectrumError::Shape { rows, cols });
    }
    if let Some(k) = x.iter().position(|v| !v.is_finite()) {
        return Err(SpectrumError::NonFinite { row: k / cols, col: k % cols });
    }
    let mut gram = vec![0.0; cols * cols];
    for row in x.chunks_exact(cols) {
        for i in 0..cols {
            if row[i] == 0.0 {
                continue;
            }
            for j in i..cols {
                gram[i * cols + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..cols {
        for j in 0..i {
            gram[i * cols + j] = gram[j * cols + i];
        }
    }
    let trace: f64 = (0..cols).map(|i| gram[i * cols + i]).sum();
    let mut eig = symmetric_eigenvalues(gram, cols);
    eig.sort_by(|a, b| b.total_cmp(a));
    // Eigenvalues under the convergence tolerance are rounding noise; taking
    // their square root would blow that noise up to ~1e-8.
    let floor = JACOBI_TOL * trace;
    let sv = |l: f64| if l <= floor { 0.0 } else { l.sqrt() };
    Ok((sv(eig[0]), sv(eig[1])))
}

/// Integer hop distances, sentinels included, cast to reals without scaling.
pub fn affinity_to_real(env: &LocalEnvironment) -> Vec<f64> {
    env.affinity().iter().map(|&d| f64::from(d)).collect()
}

pub fn spectrum_feature(env: &LocalEnvironment) -> Result<SpectrumFeature, SpectrumError> {
    let x = affinity_to_real(env);
    let (s1, s2) = top2_singular(&x, env.num_nodes(), env.candidate().len())?;
    Ok(SpectrumFeature::from_singular(s1, s2))
}
