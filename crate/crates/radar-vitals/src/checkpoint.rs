//! Checkpoint directories: a JSON index plus one f64 RVDS blob per tensor.
//!
//! ```text
//! index.json
//! params/<name>.rvds      trainable weights
//! buffers/<name>.rvds     batch-norm running statistics
//! adam/m/<name>.rvds      optimizer first moments (when saved)
//! adam/v/<name>.rvds      optimizer second moments
//! ```

use std::fs;
use std::path::Path;

use radar_vitals_core::nn::{AdamW, ModelSpec, Parameter, ParameterStore};
use radar_vitals_core::train::Checkpoint;
use serde::{Deserialize, Serialize};

use crate::rvds::Array;
use crate::{Error, Result};

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub decay: bool,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerEntry {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub step: usize,
    pub m: Vec<String>,
    pub v: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointIndex {
    pub spec: ModelSpec,
    pub step: usize,
    pub config_fingerprint: u64,
    pub label_offset: f64,
    pub label_scale: f64,
    pub input_width: usize,
    pub history: Vec<(usize, f64)>,
    /// FNV-1a of all parameters and buffers, checked on load.
    pub checksum: u64,
    pub params: Vec<TensorEntry>,
    pub buffers: Vec<TensorEntry>,
    pub optimizer: Option<OptimizerEntry>,
}

fn blob_name(dir: &str, name: &str) -> String {
    format!("{dir}/{name}.rvds")
}

fn save_tensors(root: &Path, dir: &str, tensors: &[Parameter]) -> Result<Vec<TensorEntry>> {
    let path = root.join(dir);
    fs::create_dir_all(&path).map_err(|e| Error::io(&path, e))?;
    tensors
        .iter()
        .map(|p| {
            let file = blob_name(dir, &p.name);
            Array::f64(&p.shape, p.value.clone())?.save(&root.join(&file))?;
            Ok(TensorEntry {
                name: p.name.clone(),
                shape: p.shape.clone(),
                decay: p.decay,
                file,
            })
        })
        .collect()
}

fn load_values(root: &Path, file: &str, shape: &[usize]) -> Result<Vec<f64>> {
    let a = Array::load(&root.join(file))?;
    if a.shape() != shape {
        return Err(Error::Format(format!(
            "{file}: shape {:?}, index declares {shape:?}",
            a.shape()
        )));
    }
    a.to_f64()
}

fn load_tensors(root: &Path, entries: &[TensorEntry]) -> Result<Vec<Parameter>> {
    entries
        .iter()
        .map(|e| {
            Ok(Parameter {
                name: e.name.clone(),
                shape: e.shape.clone(),
                value: load_values(root, &e.file, &e.shape)?,
                decay: e.decay,
            })
        })
        .collect()
}

pub fn save_checkpoint(ck: &Checkpoint, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let params = save_tensors(dir, "params", &ck.params.params)?;
    let buffers = save_tensors(dir, "buffers", &ck.params.buffers)?;
    let optimizer = match &ck.optimizer {
        Some(opt) => {
            let moments = |which: &str, values: &[Vec<f64>]| -> Result<Vec<String>> {
                let tensors: Vec<Parameter> = ck
                    .params
                    .params
                    .iter()
                    .zip(values)
                    .map(|(p, v)| Parameter {
                        value: v.clone(),
                        ..p.clone()
                    })
                    .collect();
                Ok(save_tensors(dir, &format!("adam/{which}"), &tensors)?
                    .into_iter()
                    .map(|e| e.file)
                    .collect())
            };
            Some(OptimizerEntry {
                beta1: opt.beta1,
                beta2: opt.beta2,
                eps: opt.eps,
                weight_decay: opt.weight_decay,
                step: opt.step,
                m: moments("m", &opt.m)?,
                v: moments("v", &opt.v)?,
            })
        }
        None => None,
    };
    let index = CheckpointIndex {
        spec: ck.spec.clone(),
        step: ck.step,
        config_fingerprint: ck.config_fingerprint,
        label_offset: ck.label_offset,
        label_scale: ck.label_scale,
        input_width: ck.input_width,
        history: ck.history.clone(),
        checksum: ck.params.checksum(),
        params,
        buffers,
        optimizer,
    };
    crate::json::write(&dir.join(INDEX_FILE), &index)
}

pub fn load_checkpoint(dir: &Path) -> Result<Checkpoint> {
    let index: CheckpointIndex = crate::json::read(&dir.join(INDEX_FILE))?;
    let params = ParameterStore {
        params: load_tensors(dir, &index.params)?,
        buffers: load_tensors(dir, &index.buffers)?,
    };
    if params.checksum() != index.checksum {
        return Err(Error::Format(format!("{}: parameter checksum mismatch", dir.display())));
    }
    let optimizer = match &index.optimizer {
        Some(o) => {
            if o.m.len() != index.params.len() || o.v.len() != index.params.len() {
                return Err(Error::Format("optimizer moments do not match the parameters".into()));
            }
            let read = |files: &[String]| -> Result<Vec<Vec<f64>>> {
                files
                    .iter()
                    .zip(&index.params)
                    .map(|(f, p)| load_values(dir, f, &p.shape))
                    .collect()
            };
            Some(AdamW {
                beta1: o.beta1,
                beta2: o.beta2,
                eps: o.eps,
                weight_decay: o.weight_decay,
                step: o.step,
                m: read(&o.m)?,
                v: read(&o.v)?,
            })
        }
        None => None,
    };
    let ck = Checkpoint {
        spec: index.spec,
        params,
        optimizer,
        step: index.step,
        config_fingerprint: index.config_fingerprint,
        label_offset: index.label_offset,
        label_scale: index.label_scale,
        history: index.history,
        input_width: index.input_width,
    };
    // Layout must match the declared architecture.
    ck.model()?;
    Ok(ck)
}
