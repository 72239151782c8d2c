//! Dataset ingestion, training, evaluation, phantoms and overlays.

mod config;
mod eval;
mod mias;
mod overlay;
mod phantom;

pub use config::{FeatureConfig, PipelineConfig, SplitConfig, SvmConfig};
pub use eval::{
    analyze_image, build_training_set, detect, evaluate, lesion_targets, load_dataset, score_image,
    split_dataset, train_model, DatasetEntry, Detection, EvalReport, ImageEval, ImageSource,
    Prediction, TrainingSet,
};
pub use mias::{
    gt_to_image_coords, match_region, parse_info_file, parse_mias_info, Abnormality, MiasRecord,
    Severity, Tissue,
};
pub use overlay::{render_overlay, GT_INTENSITY, TUMOR_INTENSITY};
pub use phantom::{generate_phantom, phantom_records, Blob, CorpusSpec, PhantomSpec, SplitMix64};

use std::path::PathBuf;

use thiserror::Error;

use crate::enhance::EnhanceError;
use crate::image::ImageError;
use crate::segment::SegmentError;
use crate::svm::SvmError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("expected 3, 4 or 7 tokens, found {0}")]
    BadTokenCount(usize),
    #[error("unknown code `{0}`")]
    UnknownCode(String),
    #[error("coordinate `{0}` is not a non-negative number")]
    NonNumericCoordinate(String),
    #[error("record {0} has no lesion coordinates")]
    MissingCoordinates(String),
    #[error("info file line {line}: {source}")]
    InfoLine {
        line: usize,
        source: Box<PipelineError>,
    },
    #[error("invalid phantom: {0}")]
    InvalidPhantom(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    ImageFile { path: PathBuf, source: ImageError },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Enhance(#[from] EnhanceError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Svm(#[from] SvmError),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }
}
