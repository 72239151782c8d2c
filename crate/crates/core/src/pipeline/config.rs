//! Run configuration, stored as TOML.
//!
//! ```toml
//! seed = 2024
//!
//! [enhance]
//! gaussian_sigma = 1.5
//! se_radius = 45
//!
//! [segment]
//! threshold = "otsu"        # or { fixed = 120 }
//! min_area = 50
//!
//! [features]
//! select = ["area", "eccentricity", "solidity"]
//!
//! [svm.kernel]
//! kind = "rbf"
//!
//! [svm.train]
//! c = 1.0
//!
//! [split]
//! folds = 2
//! test_fold = 1
//! ```
//!
//! Every table and key is optional; missing ones take their defaults.
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::enhance::EnhanceConfig;
use crate::features::FEATURE_NAMES;
use crate::segment::SegmentConfig;
use crate::svm::{KernelSpec, TrainConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Feature names to feed the classifier, in this order. `None` keeps all
    /// 26.
    pub select: Option<Vec<String>>,
}

impl FeatureConfig {
    pub fn names(&self) -> Vec<String> {
        match &self.select {
            Some(names) => names.clone(),
            None => FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Positions of the selected names in the full feature vector.
    pub fn indices(&self) -> Result<Vec<usize>, PipelineError> {
        indices_of(&self.names())
    }
}

pub(crate) fn indices_of(names: &[String]) -> Result<Vec<usize>, PipelineError> {
    if names.is_empty() {
        return Err(PipelineError::Config("feature selection is empty".into()));
    }
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let i = FEATURE_NAMES
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| PipelineError::Config(format!("unknown feature `{name}`")))?;
        if out.contains(&i) {
            return Err(PipelineError::Config(format!(
                "feature `{name}` selected twice"
            )));
        }
        out.push(i);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    pub train: TrainConfig,
}

/// Deterministic train/test assignment.
///
/// Images are sorted by reference and split into two strata, images with
/// lesions and normal images. Within a stratum the `i`-th image goes to fold
/// `i mod folds`; fold `test_fold` is the test set. The default (2 folds,
/// test fold 1) sends even positions to training and odd ones to testing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub folds: usize,
    pub test_fold: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            folds: 2,
            test_fold: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub enhance: EnhanceConfig,
    pub segment: SegmentConfig,
    pub features: FeatureConfig,
    pub svm: SvmConfig,
    pub split: SplitConfig,
    /// Phantom generation only.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            enhance: EnhanceConfig::default(),
            segment: SegmentConfig::default(),
            features: FeatureConfig::default(),
            svm: SvmConfig::default(),
            split: SplitConfig::default(),
            seed: 2024,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.enhance.validate()?;
        self.segment.validate()?;
        self.features.indices()?;
        self.svm.kernel.validate()?;
        self.svm.train.validate()?;
        if self.split.folds < 2 || self.split.test_fold >= self.split.folds {
            return Err(PipelineError::Config(format!(
                "split needs folds ≥ 2 and test_fold < folds, got {} / {}",
                self.split.folds, self.split.test_fold
            )));
        }
        Ok(())
    }

    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
