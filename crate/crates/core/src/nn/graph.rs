//! Tape-based reverse-mode differentiation.
//!
//! Every operation appends a node holding its output; [`Graph::backward`]
//! walks the tape in reverse and accumulates gradients into the inputs of
//! each node that needs them.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::conv::{gemm, ConvGeometry};
use super::Tensor;
use crate::{Error, Result};

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Regression loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LossKind {
    /// Weighted mean absolute error.
    #[default]
    L1,
    /// Weighted mean squared error.
    L2,
}

/// Batch-norm statistics source.
#[derive(Debug)]
pub enum NormStats<'a> {
    /// Use batch statistics and fold them into the running estimates.
    Train {
        running_mean: &'a mut [f64],
        running_var: &'a mut [f64],
        momentum: f64,
        eps: f64,
    },
    /// Use the running estimates.
    Eval {
        running_mean: &'a [f64],
        running_var: &'a [f64],
        eps: f64,
    },
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Conv2d {
        x: Var,
        w: Var,
        geom: ConvGeometry,
    },
    BatchNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        xhat: Vec<f64>,
        inv_std: Vec<f64>,
        batch_stats: bool,
    },
    Relu {
        x: Var,
    },
    Add {
        a: Var,
        b: Var,
    },
    Mean {
        x: Var,
        outer: usize,
        axis: usize,
        inner: usize,
    },
    Reshape {
        x: Var,
    },
    Linear {
        x: Var,
        w: Var,
        b: Var,
    },
    Loss {
        pred: Var,
        target: Vec<f64>,
        weights: Vec<f64>,
        kind: LossKind,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    grad: Vec<f64>,
    requires_grad: bool,
    op: Op,
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, requires_grad: bool, op: Op) -> Var {
        self.nodes.push(Node {
            value,
            grad: Vec::new(),
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Constant input; no gradient is computed for it.
    pub fn input(&mut self, value: Tensor) -> Var {
        self.push(value, false, Op::Leaf)
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, true, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient after [`backward`](Self::backward); `None` when never reached.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        let g = &self.nodes[v.0].grad;
        (!g.is_empty()).then_some(g.as_slice())
    }

    /// Same-padded cross-correlation of `x` `[N, C, H, W]` with `w` `[O, C, kh, kw]`.
    pub fn conv2d(&mut self, x: Var, w: Var, stride: [usize; 2]) -> Result<Var> {
        let [n, c, h, wd] = self.value(x).dims4()?;
        let [o, wc, kh, kw] = self.value(w).dims4()?;
        if wc != c || self.value(w).shape.len() != 4 {
            return Err(Error::Shape(alloc::format!(
                "conv2d: input has {c} channels, kernel {:?}",
                self.value(w).shape
            )));
        }
        if stride[0] == 0 || stride[1] == 0 {
            return Err(Error::Shape("conv2d: zero stride".into()));
        }
        let geom = ConvGeometry::new(c, h, wd, kh, kw, stride);
        let (patch, pos) = (geom.patch(), geom.positions());
        let mut out = vec![0.0; n * o * pos];
        let mut cols = vec![0.0; patch * pos];
        {
            let xv = &self.value(x).data;
            let wv = &self.value(w).data;
            for s in 0..n {
                geom.im2col(&xv[s * c * h * wd..(s + 1) * c * h * wd], &mut cols);
                gemm(o, patch, pos, wv, false, &cols, false, 0.0, &mut out[s * o * pos..(s + 1) * o * pos]);
            }
        }
        let rg = self.needs(x) || self.needs(w);
        let value = Tensor::new(&[n, o, geom.out_h, geom.out_w], out)?;
        Ok(self.push(value, rg, Op::Conv2d { x, w, geom }))
    }

    /// Per-channel normalisation of `[N, C, H, W]` followed by `gamma · x̂ + beta`.
    pub fn batch_norm(&mut self, x: Var, gamma: Var, beta: Var, stats: NormStats<'_>) -> Result<Var> {
        let [n, c, h, w] = self.value(x).dims4()?;
        if self.value(gamma).len() != c || self.value(beta).len() != c {
            return Err(Error::Shape(alloc::format!("batch_norm: {c} channels vs gamma/beta")));
        }
        let hw = h * w;
        let count = (n * hw) as f64;
        let xv = &self.value(x).data;
        let (mean, var, eps, batch_stats) = match stats {
            NormStats::Train {
                running_mean,
                running_var,
                momentum,
                eps,
            } => {
                let mut mean = vec![0.0; c];
                let mut var = vec![0.0; c];
                for ch in 0..c {
                    let mut s = 0.0;
                    for b in 0..n {
                        s += xv[(b * c + ch) * hw..(b * c + ch + 1) * hw].iter().sum::<f64>();
                    }
                    let m = s / count;
                    let mut q = 0.0;
                    for b in 0..n {
                        q += xv[(b * c + ch) * hw..(b * c + ch + 1) * hw]
                            .iter()
                            .map(|v| (v - m) * (v - m))
                            .sum::<f64>();
                    }
                    mean[ch] = m;
                    var[ch] = q / count;
                    let unbiased = if count > 1.0 { q / (count - 1.0) } else { var[ch] };
                    running_mean[ch] = momentum * running_mean[ch] + (1.0 - momentum) * m;
                    running_var[ch] = momentum * running_var[ch] + (1.0 - momentum) * unbiased;
                }
                (mean, var, eps, true)
            }
            NormStats::Eval {
                running_mean,
                running_var,
                eps,
            } => (running_mean.to_vec(), running_var.to_vec(), eps, false),
        };
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
        let (g, bt) = (&self.value(gamma).data, &self.value(beta).data);
        let mut xhat = vec![0.0; xv.len()];
        let mut out = vec![0.0; xv.len()];
        for b in 0..n {
            for ch in 0..c {
                let r = (b * c + ch) * hw..(b * c + ch + 1) * hw;
                for i in r {
                    let z = (xv[i] - mean[ch]) * inv_std[ch];
                    xhat[i] = z;
                    out[i] = g[ch] * z + bt[ch];
                }
            }
        }
        let shape = self.value(x).shape.clone();
        let rg = self.needs(x) || self.needs(gamma) || self.needs(beta);
        Ok(self.push(
            Tensor::new(&shape, out)?,
            rg,
            Op::BatchNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
                batch_stats,
            },
        ))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let value = Tensor {
            shape: t.shape.clone(),
            data: t.data.iter().map(|&v| v.max(0.0)).collect(),
        };
        let rg = self.needs(x);
        self.push(value, rg, Op::Relu { x })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape != tb.shape {
            return Err(Error::Shape(alloc::format!("add: {:?} vs {:?}", ta.shape, tb.shape)));
        }
        let value = Tensor {
            shape: ta.shape.clone(),
            data: ta.data.iter().zip(&tb.data).map(|(x, y)| x + y).collect(),
        };
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(value, rg, Op::Add { a, b }))
    }

    /// Mean over `axis`, which is kept with extent 1.
    pub fn mean_axis(&mut self, x: Var, axis: usize) -> Result<Var> {
        let shape = self.value(x).shape.clone();
        if axis >= shape.len() || shape[axis] == 0 {
            return Err(Error::Shape(alloc::format!("mean over axis {axis} of {shape:?}")));
        }
        let outer: usize = shape[..axis].iter().product();
        let len = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let xv = &self.value(x).data;
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            for k in 0..len {
                let src = &xv[(o * len + k) * inner..(o * len + k + 1) * inner];
                for (d, s) in out[o * inner..(o + 1) * inner].iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
        out.iter_mut().for_each(|v| *v /= len as f64);
        let mut new_shape = shape;
        new_shape[axis] = 1;
        let rg = self.needs(x);
        Ok(self.push(
            Tensor::new(&new_shape, out)?,
            rg,
            Op::Mean {
                x,
                outer,
                axis: len,
                inner,
            },
        ))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let value = Tensor::new(shape, self.value(x).data.clone())?;
        let rg = self.needs(x);
        Ok(self.push(value, rg, Op::Reshape { x }))
    }

    /// `x` `[N, K]` times `wᵀ` with `w` `[M, K]`, plus `b` `[M]`.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let xs = &self.value(x).shape;
        let ws = &self.value(w).shape;
        if xs.len() != 2 || ws.len() != 2 || xs[1] != ws[1] || self.value(b).len() != ws[0] {
            return Err(Error::Shape(alloc::format!("linear: x {xs:?}, w {ws:?}")));
        }
        let (n, k, m) = (xs[0], xs[1], ws[0]);
        let mut out = vec![0.0; n * m];
        for row in out.chunks_exact_mut(m) {
            row.copy_from_slice(&self.value(b).data);
        }
        gemm(n, k, m, &self.value(x).data, false, &self.value(w).data, true, 1.0, &mut out);
        let rg = self.needs(x) || self.needs(w) || self.needs(b);
        Ok(self.push(Tensor::new(&[n, m], out)?, rg, Op::Linear { x, w, b }))
    }

    /// Weighted loss `Σ wᵢ ℓ(predᵢ − targetᵢ) / Σ wᵢ`; `weights` may be empty for all-ones.
    pub fn loss(&mut self, pred: Var, target: &[f64], weights: &[f64], kind: LossKind) -> Result<Var> {
        let p = &self.value(pred).data;
        if p.is_empty() {
            return Err(Error::TooShort("loss over an empty batch".into()));
        }
        if p.len() != target.len() || (!weights.is_empty() && weights.len() != p.len()) {
            return Err(Error::Shape(alloc::format!(
                "loss: {} predictions, {} targets, {} weights",
                p.len(),
                target.len(),
                weights.len()
            )));
        }
        let weights = if weights.is_empty() {
            vec![1.0; p.len()]
        } else {
            weights.to_vec()
        };
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::param("weights", "must have a positive sum"));
        }
        let value: f64 = p
            .iter()
            .zip(target)
            .zip(&weights)
            .map(|((y, t), w)| {
                let e = y - t;
                w * match kind {
                    LossKind::L1 => e.abs(),
                    LossKind::L2 => e * e,
                }
            })
            .sum::<f64>()
            / total;
        let rg = self.needs(pred);
        Ok(self.push(
            Tensor::new(&[1], vec![value])?,
            rg,
            Op::Loss {
                pred,
                target: target.to_vec(),
                weights,
                kind,
            },
        ))
    }

    fn accumulate(&mut self, v: Var, g: &[f64]) {
        let node = &mut self.nodes[v.0];
        if !node.requires_grad {
            return;
        }
        if node.grad.is_empty() {
            node.grad = g.to_vec();
        } else {
            node.grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
    }

    fn grad_slot(&mut self, v: Var) -> Option<&mut Vec<f64>> {
        let node = &mut self.nodes[v.0];
        if !node.requires_grad {
            return None;
        }
        if node.grad.is_empty() {
            node.grad = vec![0.0; node.value.len()];
        }
        Some(&mut node.grad)
    }

    /// Back-propagates from the scalar `root`, seeding its gradient with 1.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        if self.value(root).len() != 1 {
            return Err(Error::Shape("backward needs a scalar root".into()));
        }
        for node in &mut self.nodes {
            node.grad.clear();
        }
        if !self.needs(root) {
            return Ok(());
        }
        self.nodes[root.0].grad = vec![1.0];
        for idx in (0..=root.0).rev() {
            if self.nodes[idx].grad.is_empty() {
                continue;
            }
            let gy = core::mem::take(&mut self.nodes[idx].grad);
            let op = core::mem::replace(&mut self.nodes[idx].op, Op::Leaf);
            self.backward_op(idx, &op, &gy)?;
            self.nodes[idx].op = op;
            self.nodes[idx].grad = gy;
        }
        Ok(())
    }

    fn backward_op(&mut self, idx: usize, op: &Op, gy: &[f64]) -> Result<()> {
        match op {
            Op::Leaf => {}
            Op::Conv2d { x, w, geom } => {
                let (x, w, geom) = (*x, *w, *geom);
                let n = self.value(x).shape[0];
                let o = self.value(w).shape[0];
                let (patch, pos) = (geom.patch(), geom.positions());
                let img = geom.channels * geom.height * geom.width;
                let mut cols = vec![0.0; patch * pos];
                if self.needs(w) {
                    let mut gw = vec![0.0; o * patch];
                    let xv = &self.nodes[x.0].value.data;
                    for s in 0..n {
                        geom.im2col(&xv[s * img..(s + 1) * img], &mut cols);
                        gemm(o, pos, patch, &gy[s * o * pos..(s + 1) * o * pos], false, &cols, true, 1.0, &mut gw);
                    }
                    self.accumulate(w, &gw);
                }
                if self.needs(x) {
                    let mut gx = vec![0.0; n * img];
                    let wv = &self.nodes[w.0].value.data;
                    for s in 0..n {
                        gemm(patch, o, pos, wv, true, &gy[s * o * pos..(s + 1) * o * pos], false, 0.0, &mut cols);
                        geom.col2im(&cols, &mut gx[s * img..(s + 1) * img]);
                    }
                    self.accumulate(x, &gx);
                }
            }
            Op::BatchNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
                batch_stats,
            } => {
                let [n, c, h, w] = self.value(*x).dims4()?;
                let hw = h * w;
                let count = (n * hw) as f64;
                let mut sum_gy = vec![0.0; c];
                let mut sum_gy_xhat = vec![0.0; c];
                for b in 0..n {
                    for ch in 0..c {
                        for i in (b * c + ch) * hw..(b * c + ch + 1) * hw {
                            sum_gy[ch] += gy[i];
                            sum_gy_xhat[ch] += gy[i] * xhat[i];
                        }
                    }
                }
                if self.needs(*x) {
                    let g = &self.nodes[gamma.0].value.data;
                    let mut gx = vec![0.0; gy.len()];
                    for b in 0..n {
                        for ch in 0..c {
                            let k = g[ch] * inv_std[ch];
                            for i in (b * c + ch) * hw..(b * c + ch + 1) * hw {
                                gx[i] = if *batch_stats {
                                    k * (gy[i] - sum_gy[ch] / count - xhat[i] * sum_gy_xhat[ch] / count)
                                } else {
                                    k * gy[i]
                                };
                            }
                        }
                    }
                    self.accumulate(*x, &gx);
                }
                self.accumulate(*gamma, &sum_gy_xhat);
                self.accumulate(*beta, &sum_gy);
            }
            Op::Relu { x } => {
                let out = &self.nodes[idx].value.data;
                let gx: Vec<f64> = gy.iter().zip(out).map(|(g, &y)| if y > 0.0 { *g } else { 0.0 }).collect();
                self.accumulate(*x, &gx);
            }
            Op::Add { a, b } => {
                self.accumulate(*a, gy);
                self.accumulate(*b, gy);
            }
            Op::Mean { x, outer, axis, inner } => {
                let (outer, len, inner) = (*outer, *axis, *inner);
                if let Some(gx) = self.grad_slot(*x) {
                    let scale = 1.0 / len as f64;
                    for o in 0..outer {
                        let src = &gy[o * inner..(o + 1) * inner];
                        for k in 0..len {
                            for (d, s) in gx[(o * len + k) * inner..(o * len + k + 1) * inner].iter_mut().zip(src) {
                                *d += s * scale;
                            }
                        }
                    }
                }
            }
            Op::Reshape { x } => self.accumulate(*x, gy),
            Op::Linear { x, w, b } => {
                let (n, k) = (self.value(*x).shape[0], self.value(*x).shape[1]);
                let m = self.value(*w).shape[0];
                if self.needs(*w) {
                    let mut gw = vec![0.0; m * k];
                    gemm(m, n, k, gy, true, &self.nodes[x.0].value.data, false, 0.0, &mut gw);
                    self.accumulate(*w, &gw);
                }
                if self.needs(*x) {
                    let mut gx = vec![0.0; n * k];
                    gemm(n, m, k, gy, false, &self.nodes[w.0].value.data, false, 0.0, &mut gx);
                    self.accumulate(*x, &gx);
                }
                let mut gb = vec![0.0; m];
                for row in gy.chunks_exact(m) {
                    gb.iter_mut().zip(row).for_each(|(a, b)| *a += b);
                }
                self.accumulate(*b, &gb);
            }
            Op::Loss {
                pred,
                target,
                weights,
                kind,
            } => {
                let total: f64 = weights.iter().sum();
                let p = &self.nodes[pred.0].value.data;
                let gx: Vec<f64> = p
                    .iter()
                    .zip(target)
                    .zip(weights)
                    .map(|((y, t), w)| {
                        let e = y - t;
                        let d = match kind {
                            LossKind::L1 => {
                                if e > 0.0 {
                                    1.0
                                } else if e < 0.0 {
                                    -1.0
                                } else {
                                    0.0
                                }
                            }
                            LossKind::L2 => 2.0 * e,
                        };
                        gy[0] * w * d / total
                    })
                    .collect();
                self.accumulate(*pred, &gx);
            }
        }
        Ok(())
    }

    /// Fails with the layer's name if `v` holds a non-finite value.
    pub fn check_finite(&self, v: Var, layer: &str) -> Result<()> {
        if self.value(v).is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(String::from(layer)))
        }
    }
}
