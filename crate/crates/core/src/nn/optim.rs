use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::params::ParameterStore;
use crate::{Error, Result};

/// Learning rate as a function of the step counter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LrSchedule {
    Constant { lr: f64 },
    /// `initial · rate^(step / decay_steps)`.
    Exponential { initial: f64, rate: f64, decay_steps: usize },
}

impl LrSchedule {
    pub fn at(&self, step: usize) -> f64 {
        match *self {
            LrSchedule::Constant { lr } => lr,
            LrSchedule::Exponential {
                initial,
                rate,
                decay_steps,
            } => initial * rate.powf(step as f64 / decay_steps.max(1) as f64),
        }
    }

    pub fn initial(&self) -> f64 {
        self.at(0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LrSchedule::Constant { lr } => lr > 0.0,
            LrSchedule::Exponential { initial, rate, .. } => initial > 0.0 && rate > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param("lr", "learning rate and decay rate must be positive"))
        }
    }
}

/// Adam with decoupled weight decay.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub step: usize,
    /// First and second moments, aligned with [`ParameterStore::params`].
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamW {
    pub fn new(store: &ParameterStore, weight_decay: f64) -> Self {
        let zeros: Vec<Vec<f64>> = store.params.iter().map(|p| alloc::vec![0.0; p.value.len()]).collect();
        AdamW {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// One update with learning rate `lr`. Missing gradients count as zero.
    pub fn update(&mut self, store: &mut ParameterStore, grads: &[Option<&[f64]>], lr: f64) -> Result<()> {
        if grads.len() != store.params.len() || self.m.len() != store.params.len() {
            return Err(Error::Shape("optimizer state does not match the parameters".into()));
        }
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for (i, p) in store.params.iter_mut().enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            let decay = if p.decay { 1.0 - lr * self.weight_decay } else { 1.0 };
            for (j, w) in p.value.iter_mut().enumerate() {
                let g = grads[i].map_or(0.0, |g| g[j]);
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g * g;
                *w *= decay;
                *w -= lr * (m[j] / c1) / ((v[j] / c2).sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
