//! Training regimes, augmentations and the ablation harness.

mod ablation;
mod augment;
mod config;
mod trainer;

pub use ablation::{ablation_suite, AblationCell, AblationGrid, AblationRow, AblationSpec, Splits};
pub use augment::{
    accelerate, augment_feature_swap, augment_gaussian, augment_hr_accelerate, sample_weight, Augmentations,
    FeatureSwap, GaussianNoise, HrAccelerate, Upweight,
};
pub use config::{Regime, TrainConfig};
pub use trainer::{check_split_hygiene, evaluate_mae, mean_predictor_mae, train, Checkpoint, Example, TrainOutcome};
