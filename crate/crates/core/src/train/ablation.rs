use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::config::TrainConfig;
use super::trainer::{train, Example};
use crate::featurize::{AntennaMode, FeatureConfig, FeatureSet, FeatureTensor};
use crate::metrics::{bootstrap_ci, BootstrapConfig};
use crate::Result;

/// Train / validation / test examples for one featurization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Splits {
    pub train: Vec<Example>,
    pub validation: Vec<Example>,
    pub test: Vec<Example>,
}

/// One configuration of the grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AblationCell {
    pub name: String,
    pub features: FeatureConfig,
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AblationSpec {
    /// Everything but the train fraction is shared by all cells.
    pub train: TrainConfig,
    pub cells: Vec<AblationCell>,
    pub bootstrap: BootstrapConfig,
}

/// Grid axes; each axis varies alone around `base`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct AblationGrid {
    pub base: FeatureConfig,
    pub antenna_modes: Vec<AntennaMode>,
    pub feature_sets: Vec<FeatureSet>,
    pub bin_counts: Vec<usize>,
    pub train_fractions: Vec<f64>,
}

impl Default for AblationGrid {
    fn default() -> Self {
        AblationGrid {
            base: FeatureConfig::default(),
            antenna_modes: alloc::vec![
                AntennaMode::Split,
                AntennaMode::All,
                AntennaMode::Select(alloc::vec![1]),
                AntennaMode::Pca(alloc::vec![0, 1, 2]),
            ],
            feature_sets: alloc::vec![FeatureSet::AngleOnly, FeatureSet::MagnitudeOnly, FeatureSet::Both],
            bin_counts: alloc::vec![1, 4, 16, 32],
            train_fractions: (1..=10).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

impl AblationGrid {
    pub fn cells(&self) -> Vec<AblationCell> {
        let cell = |name: String, features: FeatureConfig, train_fraction: f64| AblationCell {
            name,
            features,
            train_fraction,
        };
        let mut out = Vec::new();
        for m in &self.antenna_modes {
            let f = FeatureConfig {
                antennas: m.clone(),
                ..self.base.clone()
            };
            out.push(cell(alloc::format!("antennas={m:?}"), f, 1.0));
        }
        for s in &self.feature_sets {
            let f = FeatureConfig {
                features: *s,
                ..self.base.clone()
            };
            out.push(cell(alloc::format!("features={s:?}"), f, 1.0));
        }
        for &b in &self.bin_counts {
            let f = FeatureConfig {
                num_range_bins: b,
                ..self.base.clone()
            };
            out.push(cell(alloc::format!("bins={b}"), f, 1.0));
        }
        for &p in &self.train_fractions {
            out.push(cell(alloc::format!("train_fraction={p}"), self.base.clone(), p));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AblationRow {
    pub name: String,
    pub train_fraction: f64,
    /// Test MAE, bpm; `None` when the cell is absent.
    pub mae: Option<f64>,
    pub mae_ci: Option<[f64; 2]>,
    pub test_count: usize,
    /// Why the cell is absent.
    pub absent: Option<String>,
}

/// Trains and scores every cell. `data` supplies the splits for a
/// featurization, or `None` when that configuration is unavailable; absent
/// and failing cells are reported and the suite moves on.
pub fn ablation_suite<F>(spec: &AblationSpec, mut data: F) -> Vec<AblationRow>
where
    F: FnMut(&FeatureConfig) -> Result<Option<Splits>>,
{
    spec.cells
        .iter()
        .map(|cell| {
            let absent = |why: String| AblationRow {
                name: cell.name.clone(),
                train_fraction: cell.train_fraction,
                mae: None,
                mae_ci: None,
                test_count: 0,
                absent: Some(why),
            };
            let splits = match data(&cell.features) {
                Ok(Some(s)) => s,
                Ok(None) => return absent("no data for this configuration".into()),
                Err(e) => return absent(e.to_string()),
            };
            match run_cell(spec, cell, &splits) {
                Ok((mae, ci)) => AblationRow {
                    name: cell.name.clone(),
                    train_fraction: cell.train_fraction,
                    mae: Some(mae),
                    mae_ci: ci,
                    test_count: splits.test.len(),
                    absent: None,
                },
                Err(e) => absent(e.to_string()),
            }
        })
        .collect()
}

fn run_cell(spec: &AblationSpec, cell: &AblationCell, splits: &Splits) -> Result<(f64, Option<[f64; 2]>)> {
    let cfg = TrainConfig {
        train_fraction: cell.train_fraction,
        ..spec.train.clone()
    };
    let best = train(&cfg, &splits.train, &splits.validation, None)?.best;
    let inputs: Vec<FeatureTensor> = splits.test.iter().map(|e| e.features.normalize()).collect();
    let pred = best.predict(&inputs)?;
    let errors: Vec<f64> = pred.iter().zip(&splits.test).map(|(p, e)| (p - e.label()).abs()).collect();
    if errors.is_empty() {
        return Err(crate::Error::TooShort("empty test split".into()));
    }
    let mae = errors.iter().sum::<f64>() / errors.len() as f64;
    let ci = if errors.len() >= 2 {
        Some(bootstrap_ci(&errors, &spec.bootstrap)?)
    } else {
        None
    };
    Ok((mae, ci))
}
