use crate::featurize::{AntennaMode, FeatureConfig, FeatureOrder};
use crate::nn::{LossKind, LrSchedule, ModelSpec};
use crate::rng::Fnv1a;
use crate::{Error, Result};

use super::augment::{Augmentations, FeatureSwap, GaussianNoise, HrAccelerate, Upweight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    /// Three antennas, 32 bins of FMCW.
    FmcwFull,
    /// FMCW reduced to one bin of one antenna, pretraining for IR-UWB.
    TransferBase,
    /// IR-UWB starting from a transfer-base checkpoint.
    UwbFinetune,
    /// IR-UWB from random initialization.
    UwbScratch,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::FmcwFull => "fmcw_full",
            Regime::TransferBase => "transfer_base",
            Regime::UwbFinetune => "uwb_finetune",
            Regime::UwbScratch => "uwb_scratch",
        }
    }

    /// Featurization each regime trains on.
    pub fn feature_config(self) -> FeatureConfig {
        match self {
            Regime::FmcwFull => FeatureConfig::default(),
            // The second receive antenna, counted from one.
            Regime::TransferBase => FeatureConfig::single(1),
            Regime::UwbFinetune => FeatureConfig {
                feature_order: FeatureOrder::MagnitudeAngle,
                ..FeatureConfig::single(0)
            },
            Regime::UwbScratch => FeatureConfig {
                num_range_bins: 1,
                antennas: AntennaMode::Split,
                ..FeatureConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub regime: Regime,
    pub steps: usize,
    pub batch_size: usize,
    pub lr: LrSchedule,
    pub weight_decay: f64,
    pub loss: LossKind,
    pub augmentations: Augmentations,
    /// Leading fraction of the training examples that is used, (0, 1].
    pub train_fraction: f64,
    pub seed: u64,
    /// Validation cadence in steps; `None` means every `max(steps / 100, 10)`.
    pub validation_every: Option<usize>,
    pub model: ModelSpec,
}

impl TrainConfig {
    /// Step budgets, batch sizes and augmentations of the full-scale runs.
    pub fn paper(regime: Regime) -> Self {
        let constant = |lr| LrSchedule::Constant { lr };
        let (steps, batch_size, lr, augmentations) = match regime {
            Regime::FmcwFull => (
                200_000,
                32,
                constant(1e-3),
                Augmentations {
                    gaussian_noise: Some(GaussianNoise::new(0.7)),
                    hr_accelerate: Some(HrAccelerate::default()),
                    upweight: Some(Upweight::default()),
                    ..Augmentations::default()
                },
            ),
            Regime::TransferBase => (
                140_000,
                64,
                constant(1e-3),
                Augmentations {
                    gaussian_noise: Some(GaussianNoise::new(0.7)),
                    feature_swap: FeatureSwap::Random,
                    ..Augmentations::default()
                },
            ),
            Regime::UwbFinetune => (
                2_700,
                2048,
                LrSchedule::Exponential {
                    initial: 3e-4,
                    rate: 0.1,
                    decay_steps: 2_700,
                },
                Augmentations {
                    gaussian_noise: Some(GaussianNoise::new(0.6)),
                    ..Augmentations::default()
                },
            ),
            Regime::UwbScratch => (
                55_000,
                2048,
                constant(1e-3),
                Augmentations {
                    gaussian_noise: Some(GaussianNoise::new(0.6)),
                    ..Augmentations::default()
                },
            ),
        };
        TrainConfig {
            regime,
            steps,
            batch_size,
            lr,
            weight_decay: 0.01,
            loss: LossKind::L1,
            augmentations,
            train_fraction: 1.0,
            seed: 0,
            validation_every: None,
            model: ModelSpec::paper(),
        }
    }

    /// Reduced width and budget that finish on a single CPU core.
    pub fn desk(regime: Regime) -> Self {
        let paper = Self::paper(regime);
        let (steps, batch_size, lr) = match regime {
            Regime::FmcwFull => (800, 16, LrSchedule::Constant { lr: 2e-3 }),
            Regime::TransferBase => (600, 32, LrSchedule::Constant { lr: 2e-3 }),
            Regime::UwbFinetune => (
                150,
                32,
                LrSchedule::Exponential {
                    initial: 2e-3,
                    rate: 0.1,
                    decay_steps: 150,
                },
            ),
            Regime::UwbScratch => (150, 32, LrSchedule::Constant { lr: 2e-3 }),
        };
        TrainConfig {
            steps,
            batch_size,
            lr,
            model: ModelSpec::desk(),
            ..paper
        }
    }

    pub fn validation_interval(&self) -> usize {
        self.validation_every.unwrap_or((self.steps / 100).max(10)).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be positive"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::param("train_fraction", "must lie in (0, 1]"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::param("weight_decay", "must be non-negative"));
        }
        self.lr.validate()?;
        self.augmentations.validate()?;
        self.model.validate()
    }

    /// Hash of every field, recorded in checkpoints.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::default();
        h.write(alloc::format!("{self:?}").as_bytes());
        h.finish()
    }
}
