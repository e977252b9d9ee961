//! Accuracy and agreement metrics over per-segment heart-rate estimates.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use crate::rng::{self, stream};
use crate::{Error, Result};

/// Mean absolute error and mean absolute percentage error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaeMape {
    /// bpm.
    pub mae: f64,
    /// Percent. Elements with zero truth are left out.
    pub mape: f64,
    /// How many elements had zero truth and were left out of the MAPE.
    pub zero_truth: usize,
}

pub fn mae_mape(pred: &[f64], truth: &[f64]) -> Result<MaeMape> {
    same_length(pred, truth, 1)?;
    let n = pred.len() as f64;
    let mae = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / n;
    let mut zero_truth = 0;
    let mut sum = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        if *t == 0.0 {
            zero_truth += 1;
        } else {
            sum += ((p - t) / t).abs();
        }
    }
    let kept = pred.len() - zero_truth;
    let mape = if kept == 0 { 0.0 } else { 100.0 * sum / kept as f64 };
    Ok(MaeMape { mae, mape, zero_truth })
}

fn same_length(pred: &[f64], truth: &[f64], min: usize) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(alloc::format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.len() < min {
        return Err(Error::TooShort(alloc::format!("need at least {min} pairs, got {}", pred.len())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct BootstrapConfig {
    pub replicates: usize,
    /// Central coverage, e.g. 0.95.
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 1000,
            level: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::param("replicates", "must be positive"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::param("level", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn interval(mut stats: Vec<f64>, level: f64) -> [f64; 2] {
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    [percentile(&stats, tail), percentile(&stats, 1.0 - tail)]
}

/// Percentile bootstrap interval of the mean of `errors` (absolute errors,
/// so the statistic is the MAE). Replicate `r` draws from its own stream
/// seeded by `seed + r`.
pub fn bootstrap_ci(errors: &[f64], cfg: &BootstrapConfig) -> Result<[f64; 2]> {
    cfg.validate()?;
    let n = errors.len();
    if n < 2 {
        return Err(Error::TooShort(alloc::format!("bootstrap needs at least 2 errors, got {n}")));
    }
    let stats = (0..cfg.replicates)
        .map(|r| {
            let mut rng = rng::seeded(cfg.seed.wrapping_add(r as u64), stream::BOOTSTRAP);
            (0..n).map(|_| errors[rng.random_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    Ok(interval(stats, cfg.level))
}

/// Cluster bootstrap: resamples whole groups (subjects) and pools their
/// errors in each replicate.
pub fn bootstrap_ci_grouped(errors: &[f64], groups: &[u32], cfg: &BootstrapConfig) -> Result<[f64; 2]> {
    cfg.validate()?;
    if errors.len() != groups.len() {
        return Err(Error::Shape(alloc::format!(
            "{} errors for {} group ids",
            errors.len(),
            groups.len()
        )));
    }
    let mut clusters: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (e, g) in errors.iter().zip(groups) {
        let c = clusters.entry(*g).or_default();
        c.0 += e;
        c.1 += 1;
    }
    let clusters: Vec<(f64, usize)> = clusters.into_values().collect();
    let k = clusters.len();
    if k < 2 {
        return Err(Error::TooShort(alloc::format!("bootstrap needs at least 2 groups, got {k}")));
    }
    let stats = (0..cfg.replicates)
        .map(|r| {
            let mut rng = rng::seeded(cfg.seed.wrapping_add(r as u64), stream::BOOTSTRAP);
            let (sum, count) = (0..k).fold((0.0, 0usize), |(s, c), _| {
                let (cs, cn) = clusters[rng.random_range(0..k)];
                (s + cs, c + cn)
            });
            sum / count as f64
        })
        .collect();
    Ok(interval(stats, cfg.level))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlandAltman {
    /// Mean of `pred - truth`, bpm.
    pub bias: f64,
    /// Sample standard deviation of the differences.
    pub sd: f64,
    pub loa_low: f64,
    pub loa_high: f64,
}

/// Limits of agreement at `bias ± 1.96 sd`.
pub fn bland_altman(pred: &[f64], truth: &[f64]) -> Result<BlandAltman> {
    same_length(pred, truth, 2)?;
    let n = pred.len() as f64;
    let diffs = pred.iter().zip(truth).map(|(p, t)| p - t);
    let bias = diffs.clone().sum::<f64>() / n;
    let sd = (diffs.map(|d| (d - bias) * (d - bias)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(BlandAltman {
        bias,
        sd,
        loa_low: bias - 1.96 * sd,
        loa_high: bias + 1.96 * sd,
    })
}

/// `(mean of pair, difference)` for a Bland–Altman scatter.
pub fn bland_altman_points(pred: &[f64], truth: &[f64]) -> Vec<(f64, f64)> {
    pred.iter().zip(truth).map(|(p, t)| ((p + t) / 2.0, p - t)).collect()
}

/// One evaluated segment with its grouping metadata.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prediction {
    pub pred: f64,
    pub truth: f64,
    pub subject: u32,
    /// Chest distance, m.
    pub distance: Option<f64>,
    /// Categorical metadata such as posture or site.
    pub tags: BTreeMap<String, String>,
}

/// How to band results for a breakdown.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GroupKey {
    /// Half-open bands of the reference heart rate, bpm.
    HeartRate { width: f64 },
    /// Half-open bands of chest distance, m. Results without one are skipped.
    Distance { width: f64 },
    /// Value of a categorical tag. Results without it are skipped.
    Tag(String),
}

impl GroupKey {
    pub fn heart_rate() -> Self {
        GroupKey::HeartRate { width: 10.0 }
    }

    pub fn distance() -> Self {
        GroupKey::Distance { width: 0.5 }
    }

    pub fn name(&self) -> String {
        match self {
            GroupKey::HeartRate { .. } => "heart_rate".into(),
            GroupKey::Distance { .. } => "distance".into(),
            GroupKey::Tag(t) => t.clone(),
        }
    }

    /// Sortable position and label of the group `p` belongs to.
    fn group(&self, p: &Prediction) -> Option<(i64, String)> {
        let band = |v: f64, w: f64| {
            let k = (v / w).floor();
            (k as i64, alloc::format!("[{}, {})", k * w, (k + 1.0) * w))
        };
        match self {
            GroupKey::HeartRate { width } => Some(band(p.truth, *width)),
            GroupKey::Distance { width } => p.distance.map(|d| band(d, *width)),
            GroupKey::Tag(t) => p.tags.get(t).map(|v| (0, v.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubgroupRow {
    pub key: String,
    pub group: String,
    pub count: usize,
    /// Fraction of all examples offered, rejected ones included.
    pub share: f64,
    pub mae: f64,
    /// `None` for single-segment groups.
    pub mae_ci: Option<[f64; 2]>,
}

/// MAE, interval and share of `total` for every non-empty group under each key.
pub fn subgroup_report(
    results: &[Prediction],
    keys: &[GroupKey],
    total: usize,
    cfg: &BootstrapConfig,
) -> Result<Vec<SubgroupRow>> {
    let total = total.max(results.len()).max(1) as f64;
    let mut rows = Vec::new();
    for key in keys {
        let mut groups: BTreeMap<(i64, String), Vec<f64>> = BTreeMap::new();
        for p in results {
            if let Some(g) = key.group(p) {
                groups.entry(g).or_default().push((p.pred - p.truth).abs());
            }
        }
        for ((_, group), errors) in groups {
            let mae = errors.iter().sum::<f64>() / errors.len() as f64;
            let mae_ci = if errors.len() >= 2 {
                Some(contain(bootstrap_ci(&errors, cfg)?, mae))
            } else {
                None
            };
            rows.push(SubgroupRow {
                key: key.name(),
                group,
                count: errors.len(),
                share: errors.len() as f64 / total,
                mae,
                mae_ci,
            });
        }
    }
    Ok(rows)
}

/// Widens a percentile interval to include the point estimate.
fn contain([lo, hi]: [f64; 2], v: f64) -> [f64; 2] {
    [lo.min(v), hi.max(v)]
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub count: usize,
    pub mae: f64,
    pub mape: f64,
    pub mae_ci: [f64; 2],
    pub recall: f64,
    pub bland_altman: BlandAltman,
    pub subgroups: Vec<SubgroupRow>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ReportConfig {
    pub bootstrap: BootstrapConfig,
    /// Resample subjects instead of segments.
    pub per_subject: bool,
    pub keys: Vec<GroupKey>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            bootstrap: BootstrapConfig::default(),
            per_subject: false,
            keys: alloc::vec![GroupKey::heart_rate(), GroupKey::distance()],
        }
    }
}

/// Full report over the scored examples. Recall is `detected / offered`
/// segments; subgroup shares are scaled by it so they count rejected
/// segments in the denominator.
pub fn evaluate(results: &[Prediction], detected: usize, offered: usize, cfg: &ReportConfig) -> Result<EvalReport> {
    if detected > offered || offered == 0 {
        return Err(Error::param("offered", "need 0 < offered and detected <= offered"));
    }
    let pred: Vec<f64> = results.iter().map(|r| r.pred).collect();
    let truth: Vec<f64> = results.iter().map(|r| r.truth).collect();
    let errors: Vec<f64> = pred.iter().zip(&truth).map(|(p, t)| (p - t).abs()).collect();
    let mm = mae_mape(&pred, &truth)?;
    let ci = if cfg.per_subject {
        let groups: Vec<u32> = results.iter().map(|r| r.subject).collect();
        bootstrap_ci_grouped(&errors, &groups, &cfg.bootstrap)?
    } else {
        bootstrap_ci(&errors, &cfg.bootstrap)?
    };
    let recall = detected as f64 / offered as f64;
    let mut subgroups = subgroup_report(results, &cfg.keys, results.len(), &cfg.bootstrap)?;
    subgroups.iter_mut().for_each(|r| r.share *= recall);
    Ok(EvalReport {
        count: results.len(),
        mae: mm.mae,
        mape: mm.mape,
        mae_ci: contain(ci, mm.mae),
        recall,
        bland_altman: bland_altman(&pred, &truth)?,
        subgroups,
    })
}

impl EvalReport {
    /// Rows of one breakdown key.
    pub fn subgroup(&self, key: &str) -> impl Iterator<Item = &SubgroupRow> {
        let key = key.to_string();
        self.subgroups.iter().filter(move |r| r.key == key)
    }
}
