//! Mammogram enhancement: Gaussian smoothing, contrast stretching,
//! background removal by white top-hat, and wavelet detail suppression.
//!
//! [`enhance`] runs the stages in that fixed order and clamps the result to
//! `[0, 255]`.

mod gaussian;
mod morphology;
mod stretch;
mod wavelet;

pub use gaussian::{gaussian_kernel_1d, gaussian_smooth};
pub use morphology::{dilate, disk_se, erode, open, tophat, StructuringElement};
pub use stretch::{contrast_stretch, percentile};
pub use wavelet::{
    denoise_reconstruct, dwt2_forward, dwt2_inverse, DetailBands, DetailPolicy, WaveletPyramid,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::GrayImage;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnhanceError {
    #[error("gaussian sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("invalid structuring element: {0}")]
    InvalidStructuringElement(String),
    #[error("wavelet pyramid dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid enhancement config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnhanceConfig {
    pub gaussian_sigma: f64,
    /// Disk radius of the top-hat structuring element, px.
    pub se_radius: u32,
    /// Percentiles mapped to 0 and 255. The full range is the default:
    /// clipping at (1, 99) lets background noise fill the output range
    /// whenever the bright structures cover less than 1% of the image.
    pub stretch_low: f64,
    pub stretch_high: f64,
    pub dwt_levels: usize,
    pub detail_policy: DetailPolicy,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.5,
            se_radius: 45,
            stretch_low: 0.0,
            stretch_high: 100.0,
            dwt_levels: 2,
            detail_policy: DetailPolicy::ZeroLevel1,
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<(), EnhanceError> {
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(EnhanceError::NonPositiveSigma(self.gaussian_sigma));
        }
        if self.se_radius == 0 {
            return Err(EnhanceError::InvalidConfig("se_radius must be ≥ 1".into()));
        }
        let pct = 0.0..=100.0;
        if !(pct.contains(&self.stretch_low)
            && pct.contains(&self.stretch_high)
            && self.stretch_low < self.stretch_high)
        {
            return Err(EnhanceError::InvalidConfig(format!(
                "stretch percentiles must satisfy 0 ≤ low < high ≤ 100, got ({}, {})",
                self.stretch_low, self.stretch_high
            )));
        }
        if self.dwt_levels == 0 {
            return Err(EnhanceError::InvalidConfig("dwt_levels must be ≥ 1".into()));
        }
        if let DetailPolicy::SoftThreshold(t) = self.detail_policy {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(EnhanceError::InvalidConfig(format!(
                    "soft threshold must be a finite value ≥ 0, got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Smooth, stretch, top-hat, wavelet-denoise, clamp.
pub fn enhance(img: &GrayImage, cfg: &EnhanceConfig) -> Result<GrayImage, EnhanceError> {
    cfg.validate()?;
    let smoothed = gaussian_smooth(img, cfg.gaussian_sigma)?;
    let stretched = contrast_stretch(&smoothed, cfg.stretch_low, cfg.stretch_high);
    let background_removed = tophat(&stretched, &disk_se(cfg.se_radius));
    let denoised = denoise_reconstruct(&background_removed, cfg.dwt_levels, cfg.detail_policy);
    Ok(denoised.clamped())
}
