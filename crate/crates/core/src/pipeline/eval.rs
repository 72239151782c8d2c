//! Training-set construction, detection and lesion-level evaluation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::config::{indices_of, PipelineConfig, SplitConfig};
use super::mias::{centroid_matches, gt_to_image_coords, parse_info_file, MiasRecord};
use super::phantom::{generate_phantom, phantom_records, PhantomSpec};
use super::PipelineError;
use crate::enhance::enhance;
use crate::features::{extract_features, FeatureVector};
use crate::image::{load_pgm, GrayImage};
use crate::segment::{segment, BoundingBox, Region};
use crate::svm::{sign, train_scaled, Sample, SvmModel, TrainOutcome};

/// Where an image's pixels come from. Sources are loaded on demand so a
/// large corpus never sits in memory at once.
#[derive(Debug, Clone)]
pub enum ImageSource {
    File(PathBuf),
    Phantom(PhantomSpec),
    Memory(Arc<GrayImage>),
}

impl ImageSource {
    pub fn load(&self) -> Result<GrayImage, PipelineError> {
        match self {
            ImageSource::File(path) => {
                let bytes = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
                load_pgm(&bytes).map_err(|source| PipelineError::ImageFile {
                    path: path.clone(),
                    source,
                })
            }
            ImageSource::Phantom(spec) => generate_phantom(spec).map(|(img, _)| img),
            ImageSource::Memory(img) => Ok(img.as_ref().clone()),
        }
    }
}

/// One image with its ground-truth records.
#[derive(Debug, Clone)]
pub struct DatasetEntry {
    pub reference: String,
    pub records: Vec<MiasRecord>,
    pub source: ImageSource,
}

impl DatasetEntry {
    pub fn from_phantom(spec: PhantomSpec) -> Result<Self, PipelineError> {
        spec.validate()?;
        Ok(Self {
            reference: spec.reference.clone(),
            records: phantom_records(&spec),
            source: ImageSource::Phantom(spec),
        })
    }

    pub fn has_lesions(&self) -> bool {
        self.records.iter().any(|r| !r.is_normal())
    }

    pub fn is_normal(&self) -> bool {
        !self.records.is_empty() && !self.has_lesions()
    }

    /// Lesions whose position is not recorded.
    pub fn unlocalized_lesions(&self) -> usize {
        self.records
            .iter()
            .filter(|r| !r.is_normal() && !r.is_localized())
            .count()
    }
}

/// Reads an info file and pairs every reference with `{images_dir}/{ref}.pgm`.
/// Entries come back sorted by reference; a reference listed on several
/// lines (one per lesion) yields one entry.
pub fn load_dataset(
    images_dir: &Path,
    info_text: &str,
) -> Result<Vec<DatasetEntry>, PipelineError> {
    let mut by_ref: BTreeMap<String, Vec<MiasRecord>> = BTreeMap::new();
    for rec in parse_info_file(info_text)? {
        by_ref.entry(rec.reference.clone()).or_default().push(rec);
    }
    by_ref
        .into_iter()
        .map(|(reference, records)| {
            let path = images_dir.join(format!("{reference}.pgm"));
            if !path.is_file() {
                return Err(PipelineError::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "image file not found"),
                ));
            }
            Ok(DatasetEntry {
                reference,
                records,
                source: ImageSource::File(path),
            })
        })
        .collect()
}

/// Enhance, segment and describe every region of one image.
pub fn analyze_image(
    img: &GrayImage,
    cfg: &PipelineConfig,
) -> Result<Vec<(Region, FeatureVector)>, PipelineError> {
    let enhanced = enhance(img, &cfg.enhance)?;
    let regions = segment(&enhanced, &cfg.segment)?;
    Ok(regions
        .into_iter()
        .map(|r| {
            let f = extract_features(&r);
            (r, f)
        })
        .collect())
}

/// `((row, col), radius)` of every localized lesion.
pub fn lesion_targets(records: &[MiasRecord], image_height: usize) -> Vec<((f64, f64), f64)> {
    records
        .iter()
        .filter(|r| r.is_localized())
        .filter_map(|r| Some((gt_to_image_coords(r, image_height).ok()?, r.radius?)))
        .collect()
}

fn select(fv: &FeatureVector, indices: &[usize]) -> Vec<f64> {
    indices.iter().map(|&i| fv.values()[i]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub samples: Vec<Sample>,
    pub feature_names: Vec<String>,
    /// `(reference, reason)` of images that failed a stage.
    pub skipped: Vec<(String, String)>,
    /// Images left out because a lesion has no recorded position, so their
    /// regions cannot be labeled.
    pub excluded: Vec<String>,
}

impl TrainingSet {
    pub fn positives(&self) -> usize {
        self.samples.iter().filter(|s| s.y > 0).count()
    }

    pub fn negatives(&self) -> usize {
        self.samples.len() - self.positives()
    }
}

/// Labels every segmented region: `+1` if its centroid falls inside a
/// ground-truth circle, else `−1`. Images are processed in parallel and
/// merged in input order.
pub fn build_training_set(
    entries: &[DatasetEntry],
    cfg: &PipelineConfig,
) -> Result<TrainingSet, PipelineError> {
    let indices = cfg.features.indices()?;
    // `None` marks an image left out for an unlocalized lesion
    type ImageSamples<'a> = (&'a DatasetEntry, Option<Result<Vec<Sample>, PipelineError>>);
    let per_image: Vec<ImageSamples> = entries
        .par_iter()
        .map(|e| {
            if e.unlocalized_lesions() > 0 {
                return (e, None);
            }
            let result = e.source.load().and_then(|img| {
                let targets = lesion_targets(&e.records, img.height());
                let regions = analyze_image(&img, cfg)?;
                Ok(regions
                    .iter()
                    .map(|(region, fv)| {
                        let hit = targets
                            .iter()
                            .any(|&(c, r)| centroid_matches(region.centroid(), c, r));
                        Sample::new(select(fv, &indices), if hit { 1 } else { -1 })
                    })
                    .collect())
            });
            (e, Some(result))
        })
        .collect();

    let mut set = TrainingSet {
        samples: Vec::new(),
        feature_names: cfg.features.names(),
        skipped: Vec::new(),
        excluded: Vec::new(),
    };
    for (e, result) in per_image {
        match result {
            None => {
                info!(
                    "{}: lesion without coordinates, left out of training",
                    e.reference
                );
                set.excluded.push(e.reference.clone());
            }
            Some(Err(err)) => {
                warn!("{}: skipped: {err}", e.reference);
                set.skipped.push((e.reference.clone(), err.to_string()));
            }
            Some(Ok(samples)) => {
                if samples.is_empty() {
                    info!("{}: no regions", e.reference);
                }
                set.samples.extend(samples);
            }
        }
    }
    Ok(set)
}

/// [`build_training_set`] followed by scaled SMO training.
pub fn train_model(
    entries: &[DatasetEntry],
    cfg: &PipelineConfig,
) -> Result<(TrainOutcome, TrainingSet), PipelineError> {
    let set = build_training_set(entries, cfg)?;
    info!(
        "training on {} samples ({} positive, {} negative)",
        set.samples.len(),
        set.positives(),
        set.negatives()
    );
    let outcome = train_scaled(
        &set.samples,
        &cfg.svm.kernel,
        &cfg.svm.train,
        set.feature_names.clone(),
    )?;
    if !outcome.converged {
        warn!(
            "SMO stopped after {} passes with KKT violations left",
            outcome.passes
        );
    }
    Ok((outcome, set))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    Tumor,
    Normal,
}

/// A classified region.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_ref: String,
    /// Position in the area-sorted region list.
    pub region_index: usize,
    pub bbox: BoundingBox,
    pub centroid: (f64, f64),
    pub area: usize,
    pub feature_vector: FeatureVector,
    /// SVM decision value.
    pub score: f64,
    /// `Tumor` exactly when `sign(score) = +1`.
    pub predicted: Prediction,
}

/// Runs the image stages and classifies every region with `model`. The
/// model's feature names decide which features are used.
pub fn detect(
    model: &SvmModel,
    img: &GrayImage,
    cfg: &PipelineConfig,
    reference: &str,
) -> Result<Vec<Detection>, PipelineError> {
    let indices = indices_of(&model.feature_names)?;
    analyze_image(img, cfg)?
        .into_iter()
        .enumerate()
        .map(|(region_index, (region, fv))| {
            let score = model.decision_value(&select(&fv, &indices))?;
            Ok(Detection {
                image_ref: reference.to_string(),
                region_index,
                bbox: region.bbox(),
                centroid: region.centroid(),
                area: region.area(),
                feature_vector: fv,
                score,
                predicted: if sign(score) > 0 {
                    Prediction::Tumor
                } else {
                    Prediction::Normal
                },
            })
        })
        .collect()
}

/// Per-image accounting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageEval {
    pub reference: String,
    pub regions: usize,
    pub tumor_regions: usize,
    /// Localized lesions.
    pub lesions: usize,
    pub matched_lesions: usize,
    pub false_positives: usize,
    pub true_negative: bool,
    pub unlocalized_lesions: usize,
    /// Set when the image could not be processed; its lesions count as missed.
    pub error: Option<String>,
}

/// Scores one image's detections against its records.
pub fn score_image(
    reference: &str,
    detections: &[Detection],
    records: &[MiasRecord],
    image_height: usize,
) -> ImageEval {
    let targets = lesion_targets(records, image_height);
    let tumors: Vec<&Detection> = detections
        .iter()
        .filter(|d| d.predicted == Prediction::Tumor)
        .collect();
    let matched_lesions = targets
        .iter()
        .filter(|&&(c, r)| tumors.iter().any(|d| centroid_matches(d.centroid, c, r)))
        .count();
    let false_positives = tumors
        .iter()
        .filter(|d| {
            !targets
                .iter()
                .any(|&(c, r)| centroid_matches(d.centroid, c, r))
        })
        .count();
    let normal = !records.is_empty() && records.iter().all(MiasRecord::is_normal);
    ImageEval {
        reference: reference.to_string(),
        regions: detections.len(),
        tumor_regions: tumors.len(),
        lesions: targets.len(),
        matched_lesions,
        false_positives,
        true_negative: normal && tumors.is_empty(),
        unlocalized_lesions: records
            .iter()
            .filter(|r| !r.is_normal() && !r.is_localized())
            .count(),
        error: None,
    }
}

/// Lesion-level results.
///
/// `tp`/`fn` count localized ground-truth lesions, `fp` counts
/// tumor-predicted regions outside every circle and `tn` counts normal
/// images without a tumor-predicted region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub format: String,
    pub version: u32,
    pub images: usize,
    pub failed_images: usize,
    pub lesions: usize,
    pub unlocalized_lesions: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    /// `tp / (tp + fn)`; `None` when there are no lesions.
    pub sensitivity: Option<f64>,
    pub no_lesions: bool,
    pub per_image: Vec<ImageEval>,
}

pub const REPORT_FORMAT: &str = "mammocad-eval-report";

impl EvalReport {
    pub fn from_images(per_image: Vec<ImageEval>) -> Self {
        let lesions: usize = per_image.iter().map(|e| e.lesions).sum();
        let tp: usize = per_image.iter().map(|e| e.matched_lesions).sum();
        EvalReport {
            format: REPORT_FORMAT.to_string(),
            version: 1,
            images: per_image.len(),
            failed_images: per_image.iter().filter(|e| e.error.is_some()).count(),
            lesions,
            unlocalized_lesions: per_image.iter().map(|e| e.unlocalized_lesions).sum(),
            tp,
            fp: per_image.iter().map(|e| e.false_positives).sum(),
            fn_: lesions - tp,
            tn: per_image.iter().filter(|e| e.true_negative).count(),
            sensitivity: (lesions > 0).then(|| tp as f64 / lesions as f64),
            no_lesions: lesions == 0,
            per_image,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Classifies every region of every entry and tallies the results.
/// Images that fail to load or process are reported, not fatal.
pub fn evaluate(
    model: &SvmModel,
    entries: &[DatasetEntry],
    cfg: &PipelineConfig,
) -> Result<EvalReport, PipelineError> {
    indices_of(&model.feature_names)?;
    let per_image: Vec<ImageEval> = entries
        .par_iter()
        .map(|e| {
            let run = e.source.load().and_then(|img| {
                let dets = detect(model, &img, cfg, &e.reference)?;
                Ok(score_image(&e.reference, &dets, &e.records, img.height()))
            });
            run.unwrap_or_else(|err| {
                warn!("{}: evaluation failed: {err}", e.reference);
                let localized = e.records.iter().filter(|r| r.is_localized()).count();
                ImageEval {
                    reference: e.reference.clone(),
                    regions: 0,
                    tumor_regions: 0,
                    lesions: localized,
                    matched_lesions: 0,
                    false_positives: 0,
                    true_negative: false,
                    unlocalized_lesions: e.unlocalized_lesions(),
                    error: Some(err.to_string()),
                }
            })
        })
        .collect();
    let report = EvalReport::from_images(per_image);
    if report.no_lesions {
        warn!("no localized lesions in the evaluated set; sensitivity undefined");
    }
    Ok(report)
}

/// Indices of the `(train, test)` entries under `split`.
pub fn split_dataset(entries: &[DatasetEntry], split: &SplitConfig) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| {
        entries[a]
            .reference
            .cmp(&entries[b].reference)
            .then(a.cmp(&b))
    });
    let (mut train, mut test) = (Vec::new(), Vec::new());
    let mut seen = [0usize; 2];
    for i in order {
        let stratum = usize::from(entries[i].has_lesions());
        let fold = seen[stratum] % split.folds;
        seen[stratum] += 1;
        if fold == split.test_fold {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    (train, test)
}
