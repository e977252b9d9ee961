//! Reverse-mode autograd, the 2D+1D ResNet and its optimizer.
//!
//! Everything is `f64`. Convolutions are lowered with im2col onto
//! `matrixmultiply`'s `dgemm` and always use "same" padding, so an axis of
//! length `n` convolved with stride `s` has length `ceil(n / s)`.

mod conv;
mod graph;
mod model;
mod optim;
mod params;
mod tensor;

pub use conv::same_padding;
pub use graph::{Graph, LossKind, NormStats, Var};
pub use model::{ForwardPass, Model, ModelSpec, StageSpec};
pub use optim::{AdamW, LrSchedule};
pub use params::{Parameter, ParameterStore};
pub use tensor::Tensor;

use alloc::vec::Vec;

use crate::featurize::FeatureTensor;
use crate::{Error, Result};

/// Stacks feature tensors of equal shape into a `[N, 1, T, S]` batch.
pub fn batch_tensor(items: &[&FeatureTensor]) -> Result<Tensor> {
    let first = items.first().ok_or_else(|| Error::TooShort("empty batch".into()))?;
    let (t, s) = (first.time, first.width);
    let mut data = Vec::with_capacity(items.len() * t * s);
    for x in items {
        if (x.time, x.width) != (t, s) {
            return Err(Error::Shape(alloc::format!(
                "batch mixes {}x{} and {t}x{s} inputs",
                x.time,
                x.width
            )));
        }
        data.extend_from_slice(&x.values);
    }
    Tensor::new(&[items.len(), 1, t, s], data)
}
