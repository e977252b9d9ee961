//! Synthetic datasets on disk and their preprocessing into feature stores.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use radar_vitals_core::dsp::{Cube3, RangeProfileCube, Segment};
use radar_vitals_core::featurize::{FeatureConfig, RawFeatures};
use radar_vitals_core::pipeline::{process_segment, render_segments};
use radar_vitals_core::presence::CfarConfig;
use radar_vitals_core::simkit::{split_counts, RadarSpec};
use radar_vitals_core::train::Example;
use rayon::prelude::*;

use crate::config::{PreprocessConfig, SimulateConfig};
use crate::manifest::{DatasetManifest, FeatureManifest, FeatureRecord, PresenceRecord, SegmentRecord, Split};
use crate::rvds::Array;
use crate::{Error, Result};

pub const SEGMENT_DIR: &str = "segments";
pub const FEATURE_DIR: &str = "features";

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Subjects in id order take train, then validation, then test places.
fn assign_splits(cfg: &SimulateConfig) -> Result<BTreeMap<u32, Split>> {
    let [train, validation, _] = split_counts(cfg.cohort.subjects, &cfg.splits)?;
    Ok((0..cfg.cohort.subjects)
        .map(|i| {
            let split = if i < train {
                Split::Train
            } else if i < train + validation {
                Split::Validation
            } else {
                Split::Test
            };
            (cfg.cohort.first_subject + i as u32, split)
        })
        .collect())
}

/// Renders every subject, writes one complex64 `[bins, antennas, T]` RVDS
/// file per segment under `out/segments`, and writes the manifest.
pub fn simulate_dataset(cfg: &SimulateConfig, out: &Path) -> Result<DatasetManifest> {
    cfg.validate()?;
    let cohort = &cfg.cohort;
    let spec = cohort.radar();
    let splits = assign_splits(cfg)?;
    create_dir(&out.join(SEGMENT_DIR))?;
    let per_subject: Vec<Vec<SegmentRecord>> = (0..cohort.subjects)
        .into_par_iter()
        .map(|i| -> Result<Vec<SegmentRecord>> {
            let mut scene = cohort.scene(i);
            if let Some(d) = cfg.duration {
                scene.duration = d;
            }
            let subject = cohort.first_subject + i as u32;
            let mut records = Vec::new();
            for (k, seg) in render_segments(&scene, &spec)?.iter().enumerate() {
                let file = format!("{SEGMENT_DIR}/s{subject:05}_{k:03}.rvds");
                let v = &seg.cube.values;
                Array::complex(&[v.rows(), v.antennas(), v.time()], v.as_slice())?.save(&out.join(&file))?;
                records.push(SegmentRecord {
                    file,
                    label_hr: seg.label_hr,
                    subject,
                    valid: seg.valid,
                    start_time: seg.cube.start_time,
                    distance: Some(scene.target_range),
                    tags: BTreeMap::from([("site".to_string(), "synthetic".to_string())]),
                });
            }
            Ok(records)
        })
        .collect::<Result<_>>()?;
    let manifest = DatasetManifest {
        radar_kind: spec.kind,
        radar: spec,
        seed: cohort.seed,
        splits,
        segments: per_subject.into_iter().flatten().collect(),
    };
    manifest.save(out)?;
    Ok(manifest)
}

pub fn load_segment(dir: &Path, record: &SegmentRecord, spec: &RadarSpec) -> Result<Segment> {
    let a = Array::load(&dir.join(&record.file))?;
    let shape = a.shape();
    let [bins, antennas, time] = shape[..] else {
        return Err(Error::Format(format!("{}: expected 3 dimensions, found {shape:?}", record.file)));
    };
    let values = Cube3::from_vec(bins, antennas, time, a.to_complex()?)?;
    Ok(Segment {
        cube: RangeProfileCube {
            values,
            slow_time_rate: spec.slow_time_rate,
            spec: *spec,
            truth_hr: Vec::new(),
            start_time: record.start_time,
        },
        label_hr: record.label_hr,
        valid: record.valid,
    })
}

/// Featurized examples of a dataset held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Featurized {
    pub records: Vec<FeatureRecord>,
    pub features: Vec<RawFeatures>,
    pub presence: Vec<PresenceRecord>,
}

impl Featurized {
    pub fn examples(&self, split: Split) -> Vec<Example> {
        self.records
            .iter()
            .zip(&self.features)
            .filter(|(r, _)| r.split == split)
            .map(|(r, f)| Example {
                features: f.clone(),
                subject: r.subject,
            })
            .collect()
    }
}

/// Presence detection and feature extraction for every valid segment.
/// Segments without a detected user yield no examples.
pub fn featurize_dataset(
    dir: &Path,
    manifest: &DatasetManifest,
    features: &FeatureConfig,
    cfar: &CfarConfig,
) -> Result<Featurized> {
    features.validate()?;
    cfar.validate()?;
    type Item = (PresenceRecord, Vec<(FeatureRecord, RawFeatures)>);
    let items: Vec<Option<Item>> = manifest
        .segments
        .par_iter()
        .enumerate()
        .map(|(index, rec)| -> Result<Option<Item>> {
            if !rec.valid {
                return Ok(None);
            }
            let split = manifest
                .split_of(rec.subject)
                .ok_or_else(|| Error::Format(format!("subject {} has no split", rec.subject)))?;
            let seg = load_segment(dir, rec, &manifest.radar)?;
            let mut presence = PresenceRecord {
                segment: rec.file.clone(),
                subject: rec.subject,
                split,
                detected: false,
                bin_index: 0,
            };
            let raws = match process_segment(&seg, cfar, features) {
                Ok((p, raws)) => {
                    presence.detected = true;
                    presence.bin_index = p.bin_index;
                    raws
                }
                Err(radar_vitals_core::Error::Rejected(_)) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            let stem = Path::new(&rec.file)
                .file_stem()
                .map_or_else(|| format!("seg{index}"), |s| s.to_string_lossy().into_owned());
            let examples = raws
                .into_iter()
                .enumerate()
                .map(|(group, raw)| {
                    let record = FeatureRecord {
                        file: format!("{FEATURE_DIR}/{stem}_g{group}.rvds"),
                        label_hr: raw.label_hr,
                        subject: rec.subject,
                        split,
                        segment: index,
                        group,
                        distance: rec.distance,
                        tags: rec.tags.clone(),
                    };
                    (record, raw)
                })
                .collect();
            Ok(Some((presence, examples)))
        })
        .collect::<Result<_>>()?;
    let mut out = Featurized {
        records: Vec::new(),
        features: Vec::new(),
        presence: Vec::new(),
    };
    for (presence, examples) in items.into_iter().flatten() {
        out.presence.push(presence);
        for (r, f) in examples {
            out.records.push(r);
            out.features.push(f);
        }
    }
    Ok(out)
}

/// Featurizes `dataset` and writes `[S, T]` f64 RVDS files plus a feature manifest to `out`.
pub fn preprocess_dataset(dataset: &Path, cfg: &PreprocessConfig, out: &Path) -> Result<FeatureManifest> {
    let manifest = DatasetManifest::load(dataset)?;
    let f = featurize_dataset(dataset, &manifest, &cfg.features, &cfg.cfar)?;
    create_dir(&out.join(FEATURE_DIR))?;
    for (r, raw) in f.records.iter().zip(&f.features) {
        Array::f64(&[raw.rows, raw.time], raw.values.clone())?.save(&out.join(&r.file))?;
    }
    let (width, time) = f.features.first().map_or((0, 0), |r| (r.rows, r.time));
    let fm = FeatureManifest {
        radar_kind: manifest.radar_kind,
        features: cfg.features.clone(),
        cfar: cfg.cfar,
        width,
        time,
        examples: f.records,
        presence: f.presence,
    };
    fm.save(out)?;
    Ok(fm)
}

/// Examples of one split from a feature store.
pub fn load_examples(dir: &Path, manifest: &FeatureManifest, split: Split) -> Result<Vec<(FeatureRecord, Example)>> {
    manifest
        .examples
        .par_iter()
        .filter(|r| r.split == split)
        .map(|r| {
            let a = Array::load(&dir.join(&r.file))?;
            let shape = a.shape();
            let [rows, time] = shape[..] else {
                return Err(Error::Format(format!("{}: expected 2 dimensions, found {shape:?}", r.file)));
            };
            if rows != manifest.width {
                return Err(Error::Format(format!(
                    "{}: {rows} rows, manifest declares {}",
                    r.file, manifest.width
                )));
            }
            let features = RawFeatures {
                rows,
                time,
                values: a.to_f64()?,
                label_hr: r.label_hr,
            };
            Ok((
                r.clone(),
                Example {
                    features,
                    subject: r.subject,
                },
            ))
        })
        .collect()
}
