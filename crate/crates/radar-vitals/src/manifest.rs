//! JSON manifests describing segment datasets and feature stores.

use std::collections::BTreeMap;
use std::path::Path;

use radar_vitals_core::featurize::FeatureConfig;
use radar_vitals_core::presence::CfarConfig;
use radar_vitals_core::simkit::{RadarKind, RadarSpec};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

/// One 60 s segment of range profiles on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    /// Path relative to the manifest directory.
    pub file: String,
    /// bpm.
    pub label_hr: f64,
    pub subject: u32,
    pub valid: bool,
    /// Offset within the subject's recording, s.
    pub start_time: f64,
    /// Chest distance, m.
    pub distance: Option<f64>,
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub radar_kind: RadarKind,
    pub radar: RadarSpec,
    pub seed: u64,
    /// Split of every subject id.
    pub splits: BTreeMap<u32, Split>,
    pub segments: Vec<SegmentRecord>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl DatasetManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let m: DatasetManifest = crate::json::read(&dir.join(MANIFEST_FILE))?;
        m.validate(dir)?;
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        crate::json::write(&dir.join(MANIFEST_FILE), self)
    }

    /// Referenced files exist, valid labels are positive, every subject has a split.
    pub fn validate(&self, dir: &Path) -> Result<()> {
        if self.radar.kind != self.radar_kind {
            return Err(Error::Format("radar_kind disagrees with the radar spec".into()));
        }
        for s in &self.segments {
            if !dir.join(&s.file).is_file() {
                return Err(Error::Format(format!("segment file {} is missing", s.file)));
            }
            if s.valid && !(s.label_hr > 0.0) {
                return Err(Error::Format(format!("segment {} has label {}", s.file, s.label_hr)));
            }
            if !self.splits.contains_key(&s.subject) {
                return Err(Error::Format(format!("subject {} has no split", s.subject)));
            }
        }
        Ok(())
    }

    pub fn split_of(&self, subject: u32) -> Option<Split> {
        self.splits.get(&subject).copied()
    }

    pub fn count(&self, split: Split) -> usize {
        self.segments
            .iter()
            .filter(|s| self.split_of(s.subject) == Some(split))
            .count()
    }
}

/// Presence outcome for one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresenceRecord {
    pub segment: String,
    pub subject: u32,
    pub split: Split,
    pub detected: bool,
    pub bin_index: usize,
}

/// One stored feature example (`[S, T]` pre-normalization rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub file: String,
    pub label_hr: f64,
    pub subject: u32,
    pub split: Split,
    /// Index of the source segment in the dataset manifest.
    pub segment: usize,
    /// Antenna group within the segment.
    pub group: usize,
    pub distance: Option<f64>,
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub radar_kind: RadarKind,
    pub features: FeatureConfig,
    pub cfar: CfarConfig,
    /// Feature rows `S` per example.
    pub width: usize,
    /// Samples `T` per row.
    pub time: usize,
    pub examples: Vec<FeatureRecord>,
    pub presence: Vec<PresenceRecord>,
}

impl FeatureManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let m: FeatureManifest = crate::json::read(&dir.join(MANIFEST_FILE))?;
        for e in &m.examples {
            if !dir.join(&e.file).is_file() {
                return Err(Error::Format(format!("feature file {} is missing", e.file)));
            }
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        crate::json::write(&dir.join(MANIFEST_FILE), self)
    }

    /// Detected and offered segments of a split.
    pub fn presence_counts(&self, split: Split) -> (usize, usize) {
        let offered: Vec<&PresenceRecord> = self.presence.iter().filter(|p| p.split == split).collect();
        (offered.iter().filter(|p| p.detected).count(), offered.len())
    }
}
