//! The 2D+1D ResNet regressor.
//!
//! Input `[N, 1, T, S]`. A strided 2D stem and two strided 2D stages reduce
//! both axes by 8; the spatial axis is averaged away; a strided 1D stem and
//! four strided 1D stages reduce time by a further 32; time is averaged and a
//! fully connected layer emits one value per example.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, Normal};

use super::graph::{Graph, NormStats, Var};
use super::params::ParameterStore;
use super::Tensor;
use crate::rng::{self, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageSpec {
    pub blocks: usize,
    pub filters: usize,
    pub stride: usize,
}

impl StageSpec {
    pub const fn new(blocks: usize, filters: usize, stride: usize) -> Self {
        StageSpec { blocks, filters, stride }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub stem2d_filters: usize,
    pub stem2d_kernel: usize,
    pub stem2d_stride: usize,
    pub stages2d: Vec<StageSpec>,
    /// Kernel of the 2D residual convolutions (square).
    pub kernel2d: usize,
    pub stem1d_filters: usize,
    pub stem1d_kernel: usize,
    pub stem1d_stride: usize,
    pub stages1d: Vec<StageSpec>,
    pub kernel1d: usize,
    pub bn_momentum: f64,
    pub bn_eps: f64,
}

impl ModelSpec {
    /// Full-width network: 64/128 filters in 2D, 128–1024 in 1D, two blocks per stage.
    pub fn paper() -> Self {
        ModelSpec {
            stem2d_filters: 64,
            stem2d_kernel: 3,
            stem2d_stride: 2,
            stages2d: vec![StageSpec::new(2, 64, 2), StageSpec::new(2, 128, 2)],
            kernel2d: 3,
            stem1d_filters: 128,
            stem1d_kernel: 3,
            stem1d_stride: 2,
            stages1d: vec![
                StageSpec::new(2, 128, 2),
                StageSpec::new(2, 256, 2),
                StageSpec::new(2, 512, 2),
                StageSpec::new(2, 1024, 2),
            ],
            kernel1d: 3,
            bn_momentum: 0.9,
            bn_eps: 1e-5,
        }
    }

    /// Same topology and reductions at a width that trains on one CPU core.
    pub fn desk() -> Self {
        ModelSpec {
            stem2d_filters: 8,
            stages2d: vec![StageSpec::new(1, 8, 2), StageSpec::new(1, 16, 2)],
            stem1d_filters: 16,
            stages1d: vec![
                StageSpec::new(1, 16, 2),
                StageSpec::new(1, 32, 2),
                StageSpec::new(1, 32, 2),
                StageSpec::new(1, 64, 2),
            ],
            ..Self::paper()
        }
    }

    pub fn embedding_width(&self) -> usize {
        self.stages1d.last().map_or(self.stem1d_filters, |s| s.filters)
    }

    pub fn width2d(&self) -> usize {
        self.stages2d.last().map_or(self.stem2d_filters, |s| s.filters)
    }

    /// Extents after the 2D section and at the end of the 1D section for a `T × S` input.
    pub fn output_extents(&self, time: usize, width: usize) -> ([usize; 2], usize) {
        let mut t = time.div_ceil(self.stem2d_stride);
        let mut s = width.div_ceil(self.stem2d_stride);
        for st in &self.stages2d {
            t = t.div_ceil(st.stride);
            s = s.div_ceil(st.stride);
        }
        let after2d = [t, s];
        t = t.div_ceil(self.stem1d_stride);
        for st in &self.stages1d {
            t = t.div_ceil(st.stride);
        }
        (after2d, t)
    }

    pub fn validate(&self) -> Result<()> {
        let stages = self.stages2d.iter().chain(&self.stages1d);
        if self.stem2d_filters == 0 || self.stem1d_filters == 0 {
            return Err(Error::param("model", "stem filters must be positive"));
        }
        for s in stages {
            if s.blocks == 0 || s.filters == 0 || s.stride == 0 {
                return Err(Error::param("model", "every stage needs blocks, filters and a stride"));
            }
        }
        if [self.stem2d_kernel, self.kernel2d, self.stem1d_kernel, self.kernel1d].contains(&0) {
            return Err(Error::param("model", "kernels must be positive"));
        }
        if !(self.bn_momentum >= 0.0 && self.bn_momentum < 1.0 && self.bn_eps > 0.0) {
            return Err(Error::param("model", "batch-norm momentum in [0, 1) and eps > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Conv {
    weight: usize,
    stride: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
struct Norm {
    gamma: usize,
    beta: usize,
    mean: usize,
    var: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Block {
    conv1: Conv,
    bn1: Norm,
    conv2: Conv,
    bn2: Norm,
    projection: Option<(Conv, Norm)>,
    name: String,
}

struct Builder<'a> {
    store: &'a mut ParameterStore,
    rng: rng::Rng,
}

impl Builder<'_> {
    fn conv(&mut self, name: &str, cin: usize, cout: usize, kernel: [usize; 2], stride: [usize; 2]) -> Conv {
        let fan_in = cin * kernel[0] * kernel[1];
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
        let n = cout * fan_in;
        let value: Vec<f64> = (0..n).map(|_| normal.sample(&mut self.rng)).collect();
        let weight = self
            .store
            .add_param(format!("{name}.weight"), &[cout, cin, kernel[0], kernel[1]], value, true);
        Conv { weight, stride }
    }

    fn norm(&mut self, name: &str, channels: usize) -> Norm {
        Norm {
            gamma: self.store.add_param(format!("{name}.gamma"), &[channels], vec![1.0; channels], false),
            beta: self.store.add_param(format!("{name}.beta"), &[channels], vec![0.0; channels], false),
            mean: self.store.add_buffer(format!("{name}.running_mean"), vec![0.0; channels]),
            var: self.store.add_buffer(format!("{name}.running_var"), vec![1.0; channels]),
        }
    }

    fn block(&mut self, name: String, cin: usize, cout: usize, kernel: [usize; 2], stride: [usize; 2]) -> Block {
        let conv1 = self.conv(&format!("{name}.conv1"), cin, cout, kernel, stride);
        let bn1 = self.norm(&format!("{name}.bn1"), cout);
        let conv2 = self.conv(&format!("{name}.conv2"), cout, cout, kernel, [1, 1]);
        let bn2 = self.norm(&format!("{name}.bn2"), cout);
        let projection = (cin != cout || stride != [1, 1]).then(|| {
            (
                self.conv(&format!("{name}.proj"), cin, cout, [1, 1], stride),
                self.norm(&format!("{name}.proj_bn"), cout),
            )
        });
        Block {
            conv1,
            bn1,
            conv2,
            bn2,
            projection,
            name,
        }
    }
}

/// Named intermediate results of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Predictions, `[N]`.
    pub output: Var,
    /// 2D-section output, `[N, C, T/8, S/8]`.
    pub after_2d: Var,
    /// Time-averaged embedding, `[N, C]`.
    pub embedding: Var,
    /// Graph leaf of every parameter, in store order.
    pub params: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ModelSpec,
    pub store: ParameterStore,
    stem2d: (Conv, Norm),
    blocks2d: Vec<Block>,
    stem1d: (Conv, Norm),
    blocks1d: Vec<Block>,
    fc_weight: usize,
    fc_bias: usize,
}

impl Model {
    /// Builds the network with fan-in scaled normal weights and a zero head bias.
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut store = ParameterStore::default();
        let mut b = Builder {
            store: &mut store,
            rng: rng::seeded(seed, stream::INIT),
        };
        let k2 = [spec.stem2d_kernel, spec.stem2d_kernel];
        let s2 = [spec.stem2d_stride, spec.stem2d_stride];
        let stem2d = (
            b.conv("stem2d.conv", 1, spec.stem2d_filters, k2, s2),
            b.norm("stem2d.bn", spec.stem2d_filters),
        );
        let mut cin = spec.stem2d_filters;
        let mut blocks2d = Vec::new();
        for (i, st) in spec.stages2d.iter().enumerate() {
            for j in 0..st.blocks {
                let stride = if j == 0 { [st.stride, st.stride] } else { [1, 1] };
                blocks2d.push(b.block(
                    format!("stage2d.{i}.block{j}"),
                    cin,
                    st.filters,
                    [spec.kernel2d, spec.kernel2d],
                    stride,
                ));
                cin = st.filters;
            }
        }
        let stem1d = (
            b.conv("stem1d.conv", cin, spec.stem1d_filters, [spec.stem1d_kernel, 1], [spec.stem1d_stride, 1]),
            b.norm("stem1d.bn", spec.stem1d_filters),
        );
        cin = spec.stem1d_filters;
        let mut blocks1d = Vec::new();
        for (i, st) in spec.stages1d.iter().enumerate() {
            for j in 0..st.blocks {
                let stride = if j == 0 { [st.stride, 1] } else { [1, 1] };
                blocks1d.push(b.block(format!("stage1d.{i}.block{j}"), cin, st.filters, [spec.kernel1d, 1], stride));
                cin = st.filters;
            }
        }
        let normal = Normal::new(0.0, (1.0 / cin as f64).sqrt()).expect("positive std");
        let fc: Vec<f64> = (0..cin).map(|_| normal.sample(&mut b.rng)).collect();
        let fc_weight = b.store.add_param("head.weight".into(), &[1, cin], fc, true);
        let fc_bias = b.store.add_param("head.bias".into(), &[1], vec![0.0], false);
        Ok(Model {
            spec,
            store,
            stem2d,
            blocks2d,
            stem1d,
            blocks1d,
            fc_weight,
            fc_bias,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.store.count()
    }

    /// Runs the network on `input` `[N, 1, T, S]`. In training mode batch
    /// statistics are used and folded into the running estimates.
    pub fn forward(&mut self, g: &mut Graph, input: Var, training: bool) -> Result<ForwardPass> {
        let shape = &g.value(input).shape;
        if shape.len() != 4 || shape[1] != 1 || shape[0] == 0 || shape[2] == 0 || shape[3] == 0 {
            return Err(Error::Shape(format!("model input must be [N, 1, T, S], got {shape:?}")));
        }
        let params: Vec<Var> = self
            .store
            .params
            .iter()
            .map(|p| g.param(Tensor::new(&p.shape, p.value.clone()).expect("consistent parameter")))
            .collect();
        let mut f = Pass {
            g,
            store: &mut self.store,
            params: &params,
            training,
            momentum: self.spec.bn_momentum,
            eps: self.spec.bn_eps,
        };
        let mut x = f.conv_norm(&self.stem2d.0, &self.stem2d.1, input, true, "stem2d")?;
        for block in &self.blocks2d {
            x = f.block(block, x)?;
        }
        let after_2d = x;
        // Collapse the spatial axis: [N, C, T', S'] -> [N, C, T', 1].
        x = f.g.mean_axis(x, 3)?;
        x = f.conv_norm(&self.stem1d.0, &self.stem1d.1, x, true, "stem1d")?;
        for block in &self.blocks1d {
            x = f.block(block, x)?;
        }
        x = f.g.mean_axis(x, 2)?;
        let n = f.g.value(x).shape[0];
        let c = f.g.value(x).shape[1];
        let embedding = f.g.reshape(x, &[n, c])?;
        let y = f.g.linear(embedding, params[self.fc_weight], params[self.fc_bias])?;
        let output = f.g.reshape(y, &[n])?;
        f.g.check_finite(output, "head")?;
        Ok(ForwardPass {
            output,
            after_2d,
            embedding,
            params,
        })
    }

    /// Predictions for a batch `[N, 1, T, S]` using running statistics.
    pub fn predict(&mut self, input: Tensor) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let x = g.input(input);
        let pass = self.forward(&mut g, x, false)?;
        Ok(g.value(pass.output).data.clone())
    }

    /// Runs residual block `index` (2D blocks first) on its own.
    pub fn block_forward(&mut self, g: &mut Graph, index: usize, input: Var, training: bool) -> Result<Var> {
        let params: Vec<Var> = self
            .store
            .params
            .iter()
            .map(|p| g.param(Tensor::new(&p.shape, p.value.clone()).expect("consistent parameter")))
            .collect();
        let block = self
            .blocks2d
            .iter()
            .chain(&self.blocks1d)
            .nth(index)
            .cloned()
            .ok_or_else(|| Error::param("block", "index out of range"))?;
        let mut f = Pass {
            g,
            store: &mut self.store,
            params: &params,
            training,
            momentum: self.spec.bn_momentum,
            eps: self.spec.bn_eps,
        };
        f.block(&block, input)
    }

    /// Parameter-name prefix of residual block `index` (2D blocks first).
    pub fn block_name(&self, index: usize) -> Option<&str> {
        self.blocks2d.iter().chain(&self.blocks1d).nth(index).map(|b| b.name.as_str())
    }
}

struct Pass<'a> {
    g: &'a mut Graph,
    store: &'a mut ParameterStore,
    params: &'a [Var],
    training: bool,
    momentum: f64,
    eps: f64,
}

impl Pass<'_> {
    fn norm(&mut self, n: &Norm, x: Var) -> Result<Var> {
        let (gamma, beta) = (self.params[n.gamma], self.params[n.beta]);
        if self.training {
            let [mean, var] = self
                .store
                .buffers
                .get_disjoint_mut([n.mean, n.var])
                .expect("distinct running statistics");
            let (running_mean, running_var) = (&mut mean.value, &mut var.value);
            self.g.batch_norm(
                x,
                gamma,
                beta,
                NormStats::Train {
                    running_mean,
                    running_var,
                    momentum: self.momentum,
                    eps: self.eps,
                },
            )
        } else {
            self.g.batch_norm(
                x,
                gamma,
                beta,
                NormStats::Eval {
                    running_mean: &self.store.buffers[n.mean].value,
                    running_var: &self.store.buffers[n.var].value,
                    eps: self.eps,
                },
            )
        }
    }

    fn conv_norm(&mut self, conv: &Conv, norm: &Norm, x: Var, relu: bool, layer: &str) -> Result<Var> {
        let y = self.g.conv2d(x, self.params[conv.weight], conv.stride)?;
        let mut y = self.norm(norm, y)?;
        if relu {
            y = self.g.relu(y);
        }
        self.g.check_finite(y, layer)?;
        Ok(y)
    }

    fn block(&mut self, b: &Block, x: Var) -> Result<Var> {
        let h = self.conv_norm(&b.conv1, &b.bn1, x, true, &b.name)?;
        let h = self.conv_norm(&b.conv2, &b.bn2, h, false, &b.name)?;
        let skip = match &b.projection {
            Some((conv, norm)) => self.conv_norm(conv, norm, x, false, &b.name)?,
            None => x,
        };
        let y = self.g.add(h, skip)?;
        let y = self.g.relu(y);
        self.g.check_finite(y, &b.name)?;
        Ok(y)
    }
}
