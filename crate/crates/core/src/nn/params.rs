use alloc::string::String;
use alloc::vec::Vec;

use crate::rng::Fnv1a;
use crate::{Error, Result};

/// A named array: a trainable weight or a running statistic.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Parameter {
    pub name: String,
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
    /// Subject to decoupled weight decay.
    pub decay: bool,
}

/// All model state in construction order.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterStore {
    pub params: Vec<Parameter>,
    /// Batch-norm running statistics; never touched by the optimizer.
    pub buffers: Vec<Parameter>,
}

impl ParameterStore {
    pub(crate) fn add_param(&mut self, name: String, shape: &[usize], value: Vec<f64>, decay: bool) -> usize {
        debug_assert_eq!(shape.iter().product::<usize>(), value.len());
        self.params.push(Parameter {
            name,
            shape: shape.to_vec(),
            value,
            decay,
        });
        self.params.len() - 1
    }

    pub(crate) fn add_buffer(&mut self, name: String, value: Vec<f64>) -> usize {
        let shape = alloc::vec![value.len()];
        self.buffers.push(Parameter {
            name,
            shape,
            value,
            decay: false,
        });
        self.buffers.len() - 1
    }

    /// Number of trainable scalars.
    pub fn count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn param(&self, name: &str) -> Option<&Parameter> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Parameter> {
        self.params.iter_mut().find(|p| p.name == name)
    }

    /// FNV-1a over names, shapes and the bit patterns of every value.
    pub fn checksum(&self) -> u64 {
        let mut h = Fnv1a::default();
        for p in self.params.iter().chain(&self.buffers) {
            h.write(p.name.as_bytes());
            for &d in &p.shape {
                h.write(&(d as u64).to_le_bytes());
            }
            for &v in &p.value {
                h.write_f64(v);
            }
        }
        h.finish()
    }

    /// Copies values from `other`, which must have the same layout.
    pub fn load(&mut self, other: &ParameterStore) -> Result<()> {
        let same = |a: &[Parameter], b: &[Parameter]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.name == y.name && x.shape == y.shape)
        };
        if !same(&self.params, &other.params) || !same(&self.buffers, &other.buffers) {
            return Err(Error::Shape("parameter layout differs from the model".into()));
        }
        self.clone_from(other);
        Ok(())
    }
}
