use crate::{Error, Result};

/// Train / validation / test proportions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    /// 60:10:30, the FMCW study split.
    pub const FMCW: SplitRatios = SplitRatios {
        train: 0.6,
        validation: 0.1,
        test: 0.3,
    };
    /// 50:20:30, the IR-UWB study split.
    pub const UWB: SplitRatios = SplitRatios {
        train: 0.5,
        validation: 0.2,
        test: 0.3,
    };

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::param("split_ratios", "ratios must be non-negative"));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::param("split_ratios", alloc::format!("ratios sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Subjects per split: train and validation take `floor(ratio · n)`, test
/// takes the remainder. When that leaves train empty (tiny cohorts) every
/// subject goes to train.
pub fn split_counts(subjects: usize, ratios: &SplitRatios) -> Result<[usize; 3]> {
    ratios.validate()?;
    let floor = |r: f64| num_traits::Float::floor(r * subjects as f64 + 1e-9) as usize;
    let train = floor(ratios.train);
    let validation = floor(ratios.validation);
    if train == 0 {
        return Ok([subjects, 0, 0]);
    }
    Ok([train, validation, subjects - train - validation])
}
