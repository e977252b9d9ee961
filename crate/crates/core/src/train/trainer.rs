use alloc::collections::BTreeSet;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;

use super::augment::{augment_feature_swap, augment_gaussian, augment_hr_accelerate};
use super::config::TrainConfig;
use crate::featurize::{FeatureTensor, RawFeatures};
use crate::nn::{batch_tensor, AdamW, Graph, Model, ModelSpec, ParameterStore};
use crate::rng::{self, stream};
use crate::{Error, Result};

/// One labelled training item.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Example {
    pub features: RawFeatures,
    pub subject: u32,
}

impl Example {
    pub fn label(&self) -> f64 {
        self.features.label_hr
    }
}

/// Fails if any subject appears in more than one of `splits`.
pub fn check_split_hygiene(splits: &[&[Example]]) -> Result<()> {
    let sets: Vec<BTreeSet<u32>> = splits
        .iter()
        .map(|s| s.iter().map(|e| e.subject).collect())
        .collect();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if let Some(s) = sets[i].intersection(&sets[j]).next() {
                return Err(Error::Split(alloc::format!("subject {s} is in splits {i} and {j}")));
            }
        }
    }
    Ok(())
}

/// Trained (or initial) model state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Checkpoint {
    pub spec: ModelSpec,
    pub params: ParameterStore,
    pub optimizer: Option<AdamW>,
    /// Optimizer steps taken when this state was captured.
    pub step: usize,
    pub config_fingerprint: u64,
    /// The network regresses `(hr - label_offset) / label_scale`.
    pub label_offset: f64,
    pub label_scale: f64,
    /// `(step, validation MAE)` for every validation run.
    pub history: Vec<(usize, f64)>,
    /// Model input width `S` seen in training.
    pub input_width: usize,
}

impl Checkpoint {
    pub fn model(&self) -> Result<Model> {
        let mut m = Model::new(self.spec.clone(), 0)?;
        m.store.load(&self.params)?;
        Ok(m)
    }

    /// Heart rates for each tensor, bpm.
    pub fn predict(&self, inputs: &[FeatureTensor]) -> Result<Vec<f64>> {
        let mut model = self.model()?;
        predict_with(&mut model, inputs, self.label_offset, self.label_scale)
    }

    /// Best validation MAE in the history.
    pub fn best_mae(&self) -> Option<f64> {
        self.history.iter().map(|h| h.1).fold(None, |m, v| Some(m.map_or(v, |m: f64| m.min(v))))
    }
}

const EVAL_CHUNK: usize = 64;

fn predict_with(model: &mut Model, inputs: &[FeatureTensor], offset: f64, scale: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(EVAL_CHUNK) {
        let refs: Vec<&FeatureTensor> = chunk.iter().collect();
        out.extend(model.predict(batch_tensor(&refs)?)?.into_iter().map(|z| z * scale + offset));
    }
    Ok(out)
}

fn mae(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len().max(1) as f64
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// State with the lowest validation MAE (earliest on ties).
    pub best: Checkpoint,
    /// Training loss per step, in normalized label units.
    pub losses: Vec<f64>,
}

/// Trains per `cfg`, optionally starting from `base`.
///
/// Labels are standardized with the training-set mean and standard
/// deviation, or inherited from `base` when fine-tuning. Without validation
/// examples the final state is returned.
pub fn train(
    cfg: &TrainConfig,
    train_set: &[Example],
    validation: &[Example],
    base: Option<&Checkpoint>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_split_hygiene(&[train_set, validation])?;
    let used = ((cfg.train_fraction * train_set.len() as f64).ceil() as usize).min(train_set.len());
    let train_set = &train_set[..used];
    if train_set.is_empty() && cfg.steps > 0 {
        return Err(Error::TooShort("no training examples".into()));
    }
    let width = train_set
        .first()
        .or(validation.first())
        .map_or(0, |e| e.features.rows);
    if let Some(bad) = train_set.iter().chain(validation).find(|e| e.features.rows != width) {
        return Err(Error::Shape(alloc::format!(
            "examples have widths {width} and {}",
            bad.features.rows
        )));
    }

    let (mut model, label_offset, label_scale) = match base {
        Some(b) => {
            if b.spec != cfg.model {
                return Err(Error::param("base_checkpoint", "model spec differs from the configuration"));
            }
            if b.input_width != 0 && width != 0 && b.input_width != width {
                return Err(Error::Shape(alloc::format!(
                    "base checkpoint was trained on width {}, data has {width}",
                    b.input_width
                )));
            }
            (b.model()?, b.label_offset, b.label_scale)
        }
        None => {
            let labels: Vec<f64> = train_set.iter().map(Example::label).collect();
            let n = labels.len().max(1) as f64;
            let mean = labels.iter().sum::<f64>() / n;
            let var = labels.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
            let scale = if var > 1e-12 { var.sqrt() } else { 1.0 };
            (Model::new(cfg.model.clone(), cfg.seed)?, mean, scale)
        }
    };
    let mut opt = AdamW::new(&model.store, cfg.weight_decay);

    let val_inputs: Vec<FeatureTensor> = validation.iter().map(|e| e.features.normalize()).collect();
    let val_truth: Vec<f64> = validation.iter().map(Example::label).collect();

    let snapshot = |model: &Model, opt: &AdamW, step: usize, history: &Vec<(usize, f64)>| Checkpoint {
        spec: model.spec.clone(),
        params: model.store.clone(),
        optimizer: Some(opt.clone()),
        step,
        config_fingerprint: cfg.fingerprint(),
        label_offset,
        label_scale,
        history: history.clone(),
        input_width: width,
    };

    let mut history = Vec::new();
    let mut best: Option<(f64, Checkpoint)> = None;
    let mut validate = |model: &mut Model, opt: &AdamW, step: usize, history: &mut Vec<(usize, f64)>| -> Result<()> {
        if val_inputs.is_empty() {
            return Ok(());
        }
        let pred = predict_with(model, &val_inputs, label_offset, label_scale)?;
        let m = mae(&pred, &val_truth);
        history.push((step, m));
        if best.as_ref().is_none_or(|(b, _)| m < *b) {
            best = Some((m, snapshot(model, opt, step, history)));
        }
        Ok(())
    };

    validate(&mut model, &opt, 0, &mut history)?;

    let mut batch_rng = rng::seeded(cfg.seed, stream::BATCH);
    let mut aug_rng = rng::seeded(cfg.seed, stream::AUGMENT);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut cursor = order.len();
    let every = cfg.validation_interval();
    let aug = &cfg.augmentations;
    let mut losses = Vec::with_capacity(cfg.steps);

    for step in 1..=cfg.steps {
        let mut inputs = Vec::with_capacity(cfg.batch_size);
        let mut targets = Vec::with_capacity(cfg.batch_size);
        let mut weights = Vec::with_capacity(cfg.batch_size);
        for _ in 0..cfg.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut batch_rng);
                cursor = 0;
            }
            let ex = &train_set[order[cursor]];
            cursor += 1;
            let (raw, weight) = augment_hr_accelerate(
                &ex.features,
                aug.hr_accelerate.as_ref(),
                aug.upweight.as_ref(),
                &mut aug_rng,
            );
            let mut x = raw.normalize();
            if let Some(noise) = &aug.gaussian_noise {
                augment_gaussian(&mut x, noise, &mut aug_rng);
            }
            augment_feature_swap(&mut x, aug.feature_swap, &mut aug_rng)?;
            targets.push((raw.label_hr - label_offset) / label_scale);
            weights.push(weight);
            inputs.push(x);
        }
        let refs: Vec<&FeatureTensor> = inputs.iter().collect();
        let mut g = Graph::new();
        let x = g.input(batch_tensor(&refs)?);
        let pass = model.forward(&mut g, x, true)?;
        let loss = g.loss(pass.output, &targets, &weights, cfg.loss)?;
        let value = g.value(loss).data[0];
        if !value.is_finite() {
            return Err(Error::Diverged { step, loss: value });
        }
        losses.push(value);
        g.backward(loss)?;
        let grads: Vec<Option<&[f64]>> = pass.params.iter().map(|&p| g.grad(p)).collect();
        opt.update(&mut model.store, &grads, cfg.lr.at(step - 1))?;
        if step % every == 0 || step == cfg.steps {
            validate(&mut model, &opt, step, &mut history)?;
        }
    }

    let best = match best {
        Some((_, mut b)) => {
            b.history = history;
            b
        }
        None => snapshot(&model, &opt, cfg.steps, &history),
    };
    Ok(TrainOutcome { best, losses })
}

/// Mean absolute error of `checkpoint` on `examples`, bpm.
pub fn evaluate_mae(checkpoint: &Checkpoint, examples: &[Example]) -> Result<f64> {
    let inputs: Vec<FeatureTensor> = examples.iter().map(|e| e.features.normalize()).collect();
    let truth: Vec<f64> = examples.iter().map(Example::label).collect();
    Ok(mae(&checkpoint.predict(&inputs)?, &truth))
}

/// MAE of always predicting the mean training label.
pub fn mean_predictor_mae(train_set: &[Example], test: &[Example]) -> f64 {
    let mean = train_set.iter().map(Example::label).sum::<f64>() / train_set.len().max(1) as f64;
    test.iter().map(|e| (e.label() - mean).abs()).sum::<f64>() / test.len().max(1) as f64
}
