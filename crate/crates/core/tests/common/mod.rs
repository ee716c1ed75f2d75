//! Oracles and fixtures shared by the integration tests. Nothing here calls
//! into the crate's own distance or eigen code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use snals::autodiff::{Tape, Tensor, Var};
use snals::hypergraph::Hypergraph;

pub const UNREACHABLE: u32 = u32::MAX;

/// All-pairs hop distances on the clique expansion, by Floyd–Warshall.
pub fn floyd_warshall(n: usize, edges: &[Vec<usize>]) -> Vec<Vec<u32>> {
    let mut d = vec![vec![UNREACHABLE; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in edges {
        for &a in e {
            for &b in e {
                if a != b {
                    d[a][b] = 1;
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != UNREACHABLE && d[k][j] != UNREACHABLE && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Local environment straight from the definitions: nodes within `q` hops
/// of some member, edges whose members all lie in that set, and the clipped
/// distance matrix.
pub struct BruteLocal {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    pub affinity: Vec<Vec<u32>>,
}

pub fn brute_local(n: usize, edges: &[Vec<usize>], candidate: &[usize], q: u32, cutoff: u32) -> BruteLocal {
    let d = floyd_warshall(n, edges);
    let nodes: BTreeSet<usize> = (0..n).filter(|&v| candidate.iter().any(|&s| d[v][s] <= q)).collect();
    let local_edges = (0..edges.len()).filter(|&e| edges[e].iter().all(|v| nodes.contains(v))).collect();
    let affinity = nodes
        .iter()
        .map(|&v| candidate.iter().map(|&s| if d[v][s] <= cutoff { d[v][s] } else { cutoff + 1 }).collect())
        .collect();
    BruteLocal { nodes: nodes.into_iter().collect(), edges: local_edges, affinity }
}

pub fn random_hypergraph<R: Rng>(rng: &mut R, max_nodes: usize, max_edges: usize) -> Hypergraph {
    loop {
        let n = rng.gen_range(3..=max_nodes);
        let m = rng.gen_range(1..=max_edges);
        let edges: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let size = rng.gen_range(2..=n.min(5));
                rand::seq::index::sample(rng, n, size).into_vec()
            })
            .collect();
        if let Ok(hg) = Hypergraph::with_universe(edges, n) {
            return hg;
        }
    }
}

pub fn random_candidate<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let size = rng.gen_range(2..=n.min(5));
    rand::seq::index::sample(rng, n, size).into_vec()
}

// ---------------------------------------------------------------- spectrum

/// Coefficients of det(λI − A), highest degree first, by Faddeev–LeVerrier.
pub fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mul = |x: &[Vec<f64>], y: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
    };
    let mut coeffs = vec![1.0];
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let mut next = mul(a, &m);
        let c_prev = coeffs[k - 1];
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c_prev;
        }
        m = next;
        let am = mul(a, &m);
        let tr: f64 = (0..n).map(|i| am[i][i]).sum();
        coeffs.push(-tr / k as f64);
    }
    coeffs
}

fn horner(p: &[f64], x: f64) -> (f64, f64) {
    let (mut v, mut dv) = (0.0, 0.0);
    for &c in p {
        dv = dv * x + v;
        v = v * x + c;
    }
    (v, dv)
}

/// Largest root of a polynomial with only real roots, by Newton from an
/// upper bound (the iteration then decreases monotonically).
fn largest_root(p: &[f64], start: f64) -> f64 {
    let mut x = start;
    for _ in 0..10_000 {
        let (v, dv) = horner(p, x);
        if dv == 0.0 {
            break;
        }
        let next = x - v / dv;
        if !(next < x) {
            break;
        }
        x = next;
    }
    x
}

fn deflate(p: &[f64], root: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len() - 1);
    let mut acc = 0.0;
    for &c in &p[..p.len() - 1] {
        acc = acc * root + c;
        out.push(acc);
    }
    out
}

pub fn gram(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let c = x[0].len();
    (0..c).map(|i| (0..c).map(|j| x.iter().map(|r| r[i] * r[j]).sum()).collect()).collect()
}

/// Top two singular values through the characteristic polynomial of XᵀX.
pub fn top2_by_char_poly(x: &[Vec<f64>]) -> (f64, f64) {
    let g = gram(x);
    let p = char_poly(&g);
    // Gershgorin bound on the largest eigenvalue.
    let bound = g.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let l1 = largest_root(&p, bound);
    let l2 = largest_root(&deflate(&p, l1), l1);
    (l1.max(0.0).sqrt(), l2.max(0.0).sqrt())
}

/// Top two singular values by power iteration on XᵀX with deflation.
pub fn top2_by_power(x: &[Vec<f64>], iterations: usize) -> (f64, f64) {
    let mut g = gram(x);
    let c = g.len();
    let mut out = [0.0; 2];
    for slot in &mut out {
        let mut v: Vec<f64> = (0..c).map(|i| 1.0 + 0.1 * i as f64).collect();
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let w: Vec<f64> = (0..c).map(|i| (0..c).map(|j| g[i][j] * v[j]).sum()).collect();
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                lambda = 0.0;
                break;
            }
            v = w.iter().map(|a| a / norm).collect();
            let gv: Vec<f64> = (0..c).map(|i| (0..c).map(|j| g[i][j] * v[j]).sum()).collect();
            lambda = v.iter().zip(&gv).map(|(a, b)| a * b).sum();
        }
        *slot = lambda.max(0.0).sqrt();
        for i in 0..c {
            for j in 0..c {
                g[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    (out[0], out[1])
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

// --------------------------------------------------------- finite differences

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-4;

/// Gradient error between the tape and central differences.
///
/// `build` maps input variables to an output tensor; the scalar checked is
/// `Σ out ⊙ R` for a fixed random `R`. Returns the worst relative error,
/// measured against `max(|analytic|, |numeric|, 1e-3)` so that near-zero
/// gradients are compared absolutely.
pub fn fd_max_error<R, F>(rng: &mut R, inputs: &[Tensor], build: F) -> f64
where
    R: Rng,
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let weights = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.constant(t.clone())).collect();
        let out = build(&mut tape, &vars);
        let shape = tape.value(out).shape();
        let data = (0..shape.0 * shape.1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Tensor::from_vec(shape.0, shape.1, data).unwrap()
    };
    let objective = |values: &[Tensor]| -> f64 {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|t| tape.constant(t.clone())).collect();
        let out = build(&mut tape, &vars);
        tape.value(out).data().iter().zip(weights.data()).map(|(a, b)| a * b).sum()
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.variable(t.clone())).collect();
    let out = build(&mut tape, &vars);
    let w = tape.constant(weights.clone());
    let prod = tape.mul(out, w).unwrap();
    let loss = tape.sum(prod);
    tape.backward(loss).unwrap();

    let mut worst: f64 = 0.0;
    for (k, input) in inputs.iter().enumerate() {
        let analytic = tape.grad(vars[k]).cloned().unwrap_or_else(|| Tensor::zeros(input.rows(), input.cols()));
        for idx in 0..input.data().len() {
            let mut plus = inputs.to_vec();
            plus[k].data_mut()[idx] += FD_STEP;
            let mut minus = inputs.to_vec();
            minus[k].data_mut()[idx] -= FD_STEP;
            let numeric = (objective(&plus) - objective(&minus)) / (2.0 * FD_STEP);
            let a = analytic.data()[idx];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-3));
        }
    }
    worst
}

/// Random tensor whose entries stay at least `margin` away from zero, so
/// kinks (ReLU, max) are not straddled by the difference step.
pub fn random_tensor<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Tensor {
    let data = (0..rows * cols)
        .map(|_| {
            let m: f64 = rng.gen_range(0.05..1.5);
            if rng.gen_bool(0.5) { m } else { -m }
        })
        .collect();
    Tensor::from_vec(rows, cols, data).unwrap()
}

// ------------------------------------------------------------------ fixtures

/// Two copies of the same triangle shape: one as a single 3-edge, one as
/// three 2-edges, each with one pendant node.
pub fn edge_ambiguity_graph() -> Hypergraph {
    Hypergraph::from_edge_list(vec![
        vec![0, 1, 2],
        vec![3, 4],
        vec![4, 5],
        vec![3, 5],
        vec![0, 6],
        vec![3, 7],
    ])
    .unwrap()
}

/// Path of three edges, mirror-symmetric under 0↔5, 1↔4, 2↔3.
pub fn node_ambiguity_graph() -> Hypergraph {
    Hypergraph::from_edge_list(vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5]]).unwrap()
}

/// Planted communities: dense within blocks, sparse across. Gives a
/// learnable signal for pipeline smoke tests.
pub fn planted<R: Rng>(rng: &mut R, blocks: usize, block_size: usize, edges_per_block: usize) -> Hypergraph {
    let mut edges: Vec<Vec<usize>> = Vec::new();
    for b in 0..blocks {
        let base = b * block_size;
        for _ in 0..edges_per_block {
            let size = rng.gen_range(2..=4);
            edges.push(rand::seq::index::sample(rng, block_size, size).into_iter().map(|v| base + v).collect());
        }
    }
    Hypergraph::with_universe(edges, blocks * block_size).unwrap()
}
