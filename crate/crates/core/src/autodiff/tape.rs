use std::sync::Arc;

use rand::Rng;

use super::{AutodiffError, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduce {
    Sum,
    Mean,
    Max,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    ConcatCols(Var, Var),
    GatherRows(Var, Vec<usize>),
    /// Reduction over contiguous blocks of `group` rows. For `Max`, `argmax`
    /// holds the winning input row per output entry.
    ReduceGroups { input: Var, group: usize, kind: Reduce, argmax: Vec<usize> },
    ScaleRows(Var, Vec<f64>),
    Dropout(Var, Vec<f64>),
    ToEdges(Var, Arc<Vec<Vec<usize>>>),
    ToNodes(Var, Arc<Vec<Vec<usize>>>),
    PadRows(Var),
    Reshape(Var),
    Sum(Var),
    Bce { input: Var, labels: Vec<f64> },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
    param: Option<usize>,
}

/// Reverse-mode tape. Values are appended in evaluation order, which is a
/// valid topological order for the backward sweep.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
    consumed: bool,
}

fn mismatch(op: &'static str, a: &Tensor, b: &Tensor) -> AutodiffError {
    AutodiffError::ShapeMismatch { op, left: a.shape(), right: b.shape() }
}

const BCE_CLAMP: f64 = 1e-7;

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad, param: None });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Leaf without gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Leaf that receives a gradient.
    pub fn variable(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Trainable leaf tagged with its index in a parameter store.
    pub fn param(&mut self, id: usize, value: &Tensor) -> Var {
        let v = self.push(value.clone(), Op::Leaf, true);
        self.nodes[v.0].param = Some(id);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.cols() != y.rows() {
            return Err(mismatch("matmul", x, y));
        }
        let out = x.matmul_raw(y);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::MatMul(a, b), rg))
    }

    /// `a + 1 bias`, broadcasting a `1 × c` row over every row of `a`.
    pub fn add_broadcast_row(&mut self, a: Var, bias: Var) -> Result<Var, AutodiffError> {
        let (x, b) = (self.value(a), self.value(bias));
        if b.rows() != 1 || b.cols() != x.cols() {
            return Err(mismatch("add_broadcast_row", x, b));
        }
        let mut out = x.clone();
        let c = x.cols();
        for (k, v) in out.data_mut().iter_mut().enumerate() {
            *v += b.data()[k % c];
        }
        let rg = self.needs(a) || self.needs(bias);
        Ok(self.push(out, Op::AddRow(a, bias), rg))
    }

    /// Elementwise product of equally shaped tensors.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(mismatch("mul", x, y));
        }
        let data = x.data().iter().zip(y.data()).map(|(p, q)| p * q).collect();
        let out = Tensor::from_vec(x.rows(), x.cols(), data)?;
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Mul(a, b), rg))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let data = x.data().iter().map(|&v| v.max(0.0)).collect();
        let out = Tensor::from_vec(x.rows(), x.cols(), data).expect("same shape");
        let rg = self.needs(a);
        self.push(out, Op::Relu(a), rg)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let data = x.data().iter().map(|&v| sigmoid(v)).collect();
        let out = Tensor::from_vec(x.rows(), x.cols(), data).expect("same shape");
        let rg = self.needs(a);
        self.push(out, Op::Sigmoid(a), rg)
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.rows() != y.rows() {
            return Err(mismatch("concat_cols", x, y));
        }
        let mut data = Vec::with_capacity(x.data().len() + y.data().len());
        for i in 0..x.rows() {
            data.extend_from_slice(x.row(i));
            data.extend_from_slice(y.row(i));
        }
        let out = Tensor::from_vec(x.rows(), x.cols() + y.cols(), data)?;
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::ConcatCols(a, b), rg))
    }

    /// Rows of `a` picked by `index` (repeats allowed).
    pub fn gather_rows(&mut self, a: Var, index: &[usize]) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if let Some(&bad) = index.iter().find(|&&i| i >= x.rows()) {
            return Err(AutodiffError::InvalidArgument(format!(
                "gather_rows: row {bad} out of range for shape {:?}",
                x.shape()
            )));
        }
        let mut data = Vec::with_capacity(index.len() * x.cols());
        for &i in index {
            data.extend_from_slice(x.row(i));
        }
        let out = Tensor::from_vec(index.len(), x.cols(), data)?;
        let rg = self.needs(a);
        Ok(self.push(out, Op::GatherRows(a, index.to_vec()), rg))
    }

    /// Column-wise reduction over consecutive blocks of `group` rows:
    /// an `(n·group) × c` input yields an `n × c` output.
    pub fn reduce_row_groups(&mut self, a: Var, group: usize, kind: Reduce) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if group == 0 || x.rows() % group != 0 {
            return Err(AutodiffError::InvalidArgument(format!(
                "cannot split {} rows into groups of {group}",
                x.rows()
            )));
        }
        let (n, c) = (x.rows() / group, x.cols());
        let mut out = Tensor::zeros(n, c);
        let mut argmax = Vec::new();
        match kind {
            Reduce::Sum | Reduce::Mean => {
                let scale = if kind == Reduce::Mean { 1.0 / group as f64 } else { 1.0 };
                for g in 0..n {
                    let dst = &mut out.data_mut()[g * c..(g + 1) * c];
                    for r in g * group..(g + 1) * group {
                        for (d, v) in dst.iter_mut().zip(x.row(r)) {
                            *d += v;
                        }
                    }
                    if scale != 1.0 {
                        dst.iter_mut().for_each(|d| *d *= scale);
                    }
                }
            }
            Reduce::Max => {
                argmax = vec![0; n * c];
                for g in 0..n {
                    for j in 0..c {
                        let mut best = g * group;
                        for r in g * group + 1..(g + 1) * group {
                            if x.get(r, j) > x.get(best, j) {
                                best = r;
                            }
                        }
                        argmax[g * c + j] = best;
                        out.data_mut()[g * c + j] = x.get(best, j);
                    }
                }
            }
        }
        let rg = self.needs(a);
        Ok(self.push(out, Op::ReduceGroups { input: a, group, kind, argmax }, rg))
    }

    pub fn sum_rows(&mut self, a: Var) -> Result<Var, AutodiffError> {
        let rows = self.value(a).rows();
        self.reduce_row_groups(a, rows, Reduce::Sum)
    }

    pub fn mean_rows(&mut self, a: Var) -> Result<Var, AutodiffError> {
        let rows = self.value(a).rows();
        self.reduce_row_groups(a, rows, Reduce::Mean)
    }

    pub fn max_rows(&mut self, a: Var) -> Result<Var, AutodiffError> {
        let rows = self.value(a).rows();
        self.reduce_row_groups(a, rows, Reduce::Max)
    }

    /// `diag(scale) · a`.
    pub fn scale_rows(&mut self, a: Var, scale: &[f64]) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if scale.len() != x.rows() {
            return Err(AutodiffError::ShapeMismatch {
                op: "scale_rows",
                left: x.shape(),
                right: (scale.len(), 1),
            });
        }
        let c = x.cols();
        let data = x.data().iter().enumerate().map(|(k, v)| v * scale[k / c]).collect();
        let out = Tensor::from_vec(x.rows(), c, data)?;
        let rg = self.needs(a);
        Ok(self.push(out, Op::ScaleRows(a, scale.to_vec()), rg))
    }

    /// Inverted dropout. Identity (no new node) when `training` is false or
    /// the rate is zero.
    pub fn dropout<R: Rng + ?Sized>(
        &mut self,
        a: Var,
        rate: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<Var, AutodiffError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(AutodiffError::InvalidArgument(format!("dropout rate {rate} outside [0, 1)")));
        }
        if !training || rate == 0.0 {
            return Ok(a);
        }
        let keep = 1.0 / (1.0 - rate);
        let x = self.value(a);
        let mask: Vec<f64> = (0..x.data().len())
            .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
            .collect();
        let data = x.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        let out = Tensor::from_vec(x.rows(), x.cols(), data)?;
        let rg = self.needs(a);
        Ok(self.push(out, Op::Dropout(a, mask), rg))
    }

    /// `Hᵀ X`: row `e` of the output sums the rows of `x` listed in
    /// `edge_rows[e]`.
    pub fn incidence_to_edges(&mut self, x: Var, edge_rows: &Arc<Vec<Vec<usize>>>) -> Result<Var, AutodiffError> {
        let v = self.value(x);
        let c = v.cols();
        let mut out = Tensor::zeros(edge_rows.len(), c);
        for (e, members) in edge_rows.iter().enumerate() {
            let dst = &mut out.data_mut()[e * c..(e + 1) * c];
            for &i in members {
                if i >= v.rows() {
                    return Err(AutodiffError::InvalidArgument(format!(
                        "incidence row {i} out of range for {} nodes",
                        v.rows()
                    )));
                }
                for (d, s) in dst.iter_mut().zip(v.row(i)) {
                    *d += s;
                }
            }
        }
        let rg = self.needs(x);
        Ok(self.push(out, Op::ToEdges(x, Arc::clone(edge_rows)), rg))
    }

    /// `H X_E` for `num_nodes` rows: node `i` sums the rows of every edge
    /// containing it.
    pub fn incidence_to_nodes(
        &mut self,
        x_edges: Var,
        edge_rows: &Arc<Vec<Vec<usize>>>,
        num_nodes: usize,
    ) -> Result<Var, AutodiffError> {
        let v = self.value(x_edges);
        if v.rows() != edge_rows.len() {
            return Err(AutodiffError::ShapeMismatch {
                op: "incidence_to_nodes",
                left: (num_nodes, edge_rows.len()),
                right: v.shape(),
            });
        }
        let c = v.cols();
        let mut out = Tensor::zeros(num_nodes, c);
        for (e, members) in edge_rows.iter().enumerate() {
            for &i in members {
                if i >= num_nodes {
                    return Err(AutodiffError::InvalidArgument(format!(
                        "incidence row {i} out of range for {num_nodes} nodes"
                    )));
                }
                let dst = &mut out.data_mut()[i * c..(i + 1) * c];
                for (d, s) in dst.iter_mut().zip(v.row(e)) {
                    *d += s;
                }
            }
        }
        let rg = self.needs(x_edges);
        Ok(self.push(out, Op::ToNodes(x_edges, Arc::clone(edge_rows)), rg))
    }

    /// Keeps the first `k` rows, appending zero rows when there are fewer.
    pub fn pad_rows(&mut self, a: Var, k: usize) -> Var {
        let x = self.value(a);
        let c = x.cols();
        let mut data = vec![0.0; k * c];
        let keep = x.rows().min(k) * c;
        data[..keep].copy_from_slice(&x.data()[..keep]);
        let out = Tensor::from_vec(k, c, data).expect("sized above");
        let rg = self.needs(a);
        self.push(out, Op::PadRows(a), rg)
    }

    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        let out = Tensor::from_vec(rows, cols, x.data().to_vec())?;
        let rg = self.needs(a);
        Ok(self.push(out, Op::Reshape(a), rg))
    }

    /// Sum of every entry, as a `1 × 1` tensor.
    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        let rg = self.needs(a);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    /// Mean binary cross-entropy of a column of probabilities. Probabilities
    /// are clamped to `[1e-7, 1 - 1e-7]`.
    pub fn bce_loss(&mut self, probs: Var, labels: &[f64]) -> Result<Var, AutodiffError> {
        let p = self.value(probs);
        if p.cols() != 1 || p.rows() != labels.len() || labels.is_empty() {
            return Err(AutodiffError::ShapeMismatch {
                op: "bce_loss",
                left: p.shape(),
                right: (labels.len(), 1),
            });
        }
        let n = labels.len() as f64;
        let loss = p
            .data()
            .iter()
            .zip(labels)
            .map(|(&pi, &y)| {
                let pc = pi.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln())
            })
            .sum::<f64>()
            / n;
        if !loss.is_finite() {
            return Err(AutodiffError::NonFiniteLoss(loss));
        }
        let rg = self.needs(probs);
        Ok(self.push(Tensor::scalar(loss), Op::Bce { input: probs, labels: labels.to_vec() }, rg))
    }

    /// Gradient of the last backward pass, if `v` received one.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradients of every parameter leaf, as `(parameter id, gradient)`.
    pub fn param_grads(&self) -> impl Iterator<Item = (usize, &Tensor)> {
        self.nodes.iter().enumerate().filter_map(move |(k, n)| {
            let id = n.param?;
            self.grads.get(k).and_then(Option::as_ref).map(|g| (id, g))
        })
    }

    fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
        match &mut grads[v.0] {
            Some(existing) => existing.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    /// Back-propagates from a `1 × 1` loss. A tape supports one backward
    /// pass.
    pub fn backward(&mut self, loss: Var) -> Result<(), AutodiffError> {
        if self.consumed {
            return Err(AutodiffError::TapeConsumed);
        }
        let shape = self.value(loss).shape();
        if shape != (1, 1) {
            return Err(AutodiffError::NotScalar(shape));
        }
        self.consumed = true;
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for k in (0..=loss.0).rev() {
            if !self.nodes[k].requires_grad {
                continue;
            }
            let Some(g) = grads[k].take() else { continue };
            let node = &self.nodes[k];
            let needs = |v: &Var| self.nodes[v.0].requires_grad;
            match &node.op {
                Op::Leaf => {
                    grads[k] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    if needs(a) {
                        Self::accumulate(&mut grads, *a, grad_times_transpose(&g, y));
                    }
                    if needs(b) {
                        Self::accumulate(&mut grads, *b, transpose_times_grad(x, &g));
                    }
                }
                Op::AddRow(a, bias) => {
                    if needs(bias) {
                        let c = g.cols();
                        let mut gb = Tensor::zeros(1, c);
                        for (k2, v) in g.data().iter().enumerate() {
                            gb.data_mut()[k2 % c] += v;
                        }
                        Self::accumulate(&mut grads, *bias, gb);
                    }
                    if needs(a) {
                        Self::accumulate(&mut grads, *a, g);
                    }
                }
                Op::Mul(a, b) => {
                    let (x, y) = (self.value(*a), self.value(*b));
                    if needs(a) {
                        Self::accumulate(&mut grads, *a, zip_with(&g, y, |p, q| p * q));
                    }
                    if needs(b) {
                        Self::accumulate(&mut grads, *b, zip_with(&g, x, |p, q| p * q));
                    }
                }
                Op::Relu(a) => {
                    let gx = zip_with(&g, &node.value, |p, y| if y > 0.0 { p } else { 0.0 });
                    Self::accumulate(&mut grads, *a, gx);
                }
                Op::Sigmoid(a) => {
                    let gx = zip_with(&g, &node.value, |p, y| p * y * (1.0 - y));
                    Self::accumulate(&mut grads, *a, gx);
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.value(*a).cols();
                    let cb = self.value(*b).cols();
                    let rows = g.rows();
                    let mut ga = Vec::with_capacity(rows * ca);
                    let mut gb = Vec::with_capacity(rows * cb);
                    for i in 0..rows {
                        let r = g.row(i);
                        ga.extend_from_slice(&r[..ca]);
                        gb.extend_from_slice(&r[ca..]);
                    }
                    if needs(a) {
                        Self::accumulate(&mut grads, *a, Tensor::from_vec(rows, ca, ga)?);
                    }
                    if needs(b) {
                        Self::accumulate(&mut grads, *b, Tensor::from_vec(rows, cb, gb)?);
                    }
                }
                Op::GatherRows(a, index) => {
                    let (r, c) = self.value(*a).shape();
                    let mut gx = Tensor::zeros(r, c);
                    for (dst_row, &src) in index.iter().enumerate() {
                        let d = &mut gx.data_mut()[src * c..(src + 1) * c];
                        for (acc, v) in d.iter_mut().zip(g.row(dst_row)) {
                            *acc += v;
                        }
                    }
                    Self::accumulate(&mut grads, *a, gx);
                }
                Op::ReduceGroups { input, group, kind, argmax } => {
                    let (r, c) = self.value(*input).shape();
                    let mut gx = Tensor::zeros(r, c);
                    match kind {
                        Reduce::Sum | Reduce::Mean => {
                            let scale = if *kind == Reduce::Mean { 1.0 / *group as f64 } else { 1.0 };
                            for row in 0..r {
                                let src = g.row(row / group);
                                let d = &mut gx.data_mut()[row * c..(row + 1) * c];
                                for (acc, v) in d.iter_mut().zip(src) {
                                    *acc = v * scale;
                                }
                            }
                        }
                        Reduce::Max => {
                            for (k2, &row) in argmax.iter().enumerate() {
                                gx.data_mut()[row * c + k2 % c] += g.data()[k2];
                            }
                        }
                    }
                    Self::accumulate(&mut grads, *input, gx);
                }
                Op::ScaleRows(a, scale) => {
                    let c = g.cols();
                    let data = g.data().iter().enumerate().map(|(k2, v)| v * scale[k2 / c]).collect();
                    Self::accumulate(&mut grads, *a, Tensor::from_vec(g.rows(), c, data)?);
                }
                Op::Dropout(a, mask) => {
                    let data = g.data().iter().zip(mask).map(|(v, m)| v * m).collect();
                    Self::accumulate(&mut grads, *a, Tensor::from_vec(g.rows(), g.cols(), data)?);
                }
                Op::ToEdges(x, edge_rows) => {
                    let (r, c) = self.value(*x).shape();
                    let mut gx = Tensor::zeros(r, c);
                    for (e, members) in edge_rows.iter().enumerate() {
                        for &i in members {
                            let d = &mut gx.data_mut()[i * c..(i + 1) * c];
                            for (acc, v) in d.iter_mut().zip(g.row(e)) {
                                *acc += v;
                            }
                        }
                    }
                    Self::accumulate(&mut grads, *x, gx);
                }
                Op::ToNodes(x, edge_rows) => {
                    let (r, c) = self.value(*x).shape();
                    let mut gx = Tensor::zeros(r, c);
                    for (e, members) in edge_rows.iter().enumerate() {
                        let d = &mut gx.data_mut()[e * c..(e + 1) * c];
                        for &i in members {
                            for (acc, v) in d.iter_mut().zip(g.row(i)) {
                                *acc += v;
                            }
                        }
                    }
                    Self::accumulate(&mut grads, *x, gx);
                }
                Op::PadRows(a) => {
                    let (r, c) = self.value(*a).shape();
                    let mut gx = Tensor::zeros(r, c);
                    let keep = r.min(g.rows()) * c;
                    gx.data_mut()[..keep].copy_from_slice(&g.data()[..keep]);
                    Self::accumulate(&mut grads, *a, gx);
                }
                Op::Reshape(a) => {
                    let (r, c) = self.value(*a).shape();
                    Self::accumulate(&mut grads, *a, Tensor::from_vec(r, c, g.into_data())?);
                }
                Op::Sum(a) => {
                    let (r, c) = self.value(*a).shape();
                    Self::accumulate(&mut grads, *a, Tensor::filled(r, c, g.item()));
                }
                Op::Bce { input, labels } => {
                    let p = self.value(*input);
                    let n = labels.len() as f64;
                    let scale = g.item() / n;
                    let data = p
                        .data()
                        .iter()
                        .zip(labels)
                        .map(|(&pi, &y)| {
                            if pi < BCE_CLAMP || pi > 1.0 - BCE_CLAMP {
                                0.0
                            } else {
                                scale * (pi - y) / (pi * (1.0 - pi))
                            }
                        })
                        .collect();
                    Self::accumulate(&mut grads, *input, Tensor::from_vec(p.rows(), 1, data)?);
                }
            }
        }
        self.grads = grads;
        Ok(())
    }
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn zip_with(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&p, &q)| f(p, q)).collect();
    Tensor::from_vec(a.rows(), a.cols(), data).expect("same shape")
}

/// `g · yᵀ`
fn grad_times_transpose(g: &Tensor, y: &Tensor) -> Tensor {
    let n = g.rows();
    let k = y.rows();
    let mut out = Tensor::zeros(n, k);
    for i in 0..n {
        let gi = g.row(i);
        for p in 0..k {
            let yp = y.row(p);
            out.data_mut()[i * k + p] = gi.iter().zip(yp).map(|(a, b)| a * b).sum();
        }
    }
    out
}

/// `xᵀ · g`
fn transpose_times_grad(x: &Tensor, g: &Tensor) -> Tensor {
    let (n, k) = x.shape();
    let m = g.cols();
    let mut out = Tensor::zeros(k, m);
    for i in 0..n {
        let gi = g.row(i);
        for p in 0..k {
            let a = x.get(i, p);
            if a == 0.0 {
                continue;
            }
            let dst = &mut out.data_mut()[p * m..(p + 1) * m];
            for (d, v) in dst.iter_mut().zip(gi) {
                *d += a * v;
            }
        }
    }
    out
}
