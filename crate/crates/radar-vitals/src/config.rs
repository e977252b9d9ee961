//! Command configurations. A JSON file only needs the fields it changes;
//! everything else comes from the selected preset.

use std::path::Path;

use radar_vitals_core::featurize::FeatureConfig;
use radar_vitals_core::metrics::ReportConfig;
use radar_vitals_core::pipeline::CohortSpec;
use radar_vitals_core::presence::CfarConfig;
use radar_vitals_core::simkit::{RadarKind, SplitRatios};
use radar_vitals_core::train::{AblationGrid, Regime, TrainConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

/// Merges `patch` into `base`. Objects merge key by key and reject keys the
/// base does not have; any other value replaces the base value. A
/// single-key object over a different single-key object replaces it, which
/// is how enum variants with data are switched.
pub fn merge(base: &mut Value, patch: Value, path: &str) -> Result<()> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            let switch = b.len() == 1 && p.len() == 1 && b.keys().next() != p.keys().next();
            if switch {
                *b = p;
                return Ok(());
            }
            for (k, v) in p {
                let field = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &field)?,
                    None => return Err(Error::Usage(format!("unknown field `{field}`"))),
                }
            }
            Ok(())
        }
        (b, p) => {
            *b = p;
            Ok(())
        }
    }
}

/// `base` with the fields of the JSON object `patch` overridden.
pub fn overlay<T: Serialize + DeserializeOwned>(base: &T, patch: Value) -> Result<T> {
    let mut merged = serde_json::to_value(base).map_err(|e| Error::Format(e.to_string()))?;
    merge(&mut merged, patch, "")?;
    let text = merged.to_string();
    crate::json::parse_config(&text).map_err(Error::Usage)
}

/// Reads `path` as a patch over `base`, or returns `base` when absent.
pub fn load_over<T: Serialize + DeserializeOwned>(base: T, path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => {
            let patch: Value = crate::json::read_config(p)?;
            overlay(&base, patch).map_err(|e| match e {
                Error::Usage(m) => Error::Usage(format!("{}: {m}", p.display())),
                e => e,
            })
        }
        None => Ok(base),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub cohort: CohortSpec,
    /// Recording length per subject, s. Overrides `cohort.segments_per_subject`.
    pub duration: Option<f64>,
    pub splits: SplitRatios,
}

impl SimulateConfig {
    pub fn preset(kind: RadarKind) -> Self {
        match kind {
            RadarKind::Fmcw => SimulateConfig {
                cohort: CohortSpec::fmcw(),
                duration: None,
                splits: SplitRatios::FMCW,
            },
            RadarKind::IrUwb => SimulateConfig {
                cohort: CohortSpec::uwb(),
                duration: None,
                splits: SplitRatios::UWB,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cohort;
        if c.subjects == 0 {
            return Err(Error::Usage("field `cohort.subjects`: must be positive".into()));
        }
        if self.duration.is_none() && c.segments_per_subject == 0 {
            return Err(Error::Usage("field `cohort.segments_per_subject`: must be positive".into()));
        }
        if let Some(d) = self.duration {
            if !(d >= radar_vitals_core::dsp::SEGMENT_SECONDS) {
                return Err(Error::Usage(format!(
                    "field `duration`: {d} s is shorter than one {} s segment",
                    radar_vitals_core::dsp::SEGMENT_SECONDS
                )));
            }
        }
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        for (name, range) in [
            ("heart_rate", c.heart_rate),
            ("distance", c.distance),
            ("respiration_rate", c.respiration_rate),
            ("respiration_amplitude", c.respiration_amplitude),
        ] {
            if !ordered(range) || range.0 <= 0.0 {
                return Err(Error::Usage(format!(
                    "field `cohort.{name}`: expected a positive [low, high] range"
                )));
            }
        }
        self.splits
            .validate()
            .map_err(|e| Error::Usage(format!("field `splits`: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub features: FeatureConfig,
    pub cfar: CfarConfig,
}

impl PreprocessConfig {
    pub fn for_regime(regime: Regime) -> Self {
        PreprocessConfig {
            features: regime.feature_config(),
            cfar: CfarConfig::default(),
        }
    }
}

/// Training budget scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

pub fn train_preset(regime: Regime, scale: Scale) -> TrainConfig {
    match scale {
        Scale::Desk => TrainConfig::desk(regime),
        Scale::Paper => TrainConfig::paper(regime),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluateConfig {
    pub report: ReportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblateConfig {
    pub grid: AblationGrid,
    pub train: TrainConfig,
    pub cfar: CfarConfig,
    pub bootstrap: radar_vitals_core::metrics::BootstrapConfig,
}

impl AblateConfig {
    pub fn preset(regime: Regime, scale: Scale) -> Self {
        AblateConfig {
            grid: AblationGrid {
                base: regime.feature_config(),
                ..AblationGrid::default()
            },
            train: train_preset(regime, scale),
            cfar: CfarConfig::default(),
            bootstrap: Default::default(),
        }
    }
}
