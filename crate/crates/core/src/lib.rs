//! Mass detection in digitized mammograms.
//!
//! The pipeline runs in fixed stages:
//!
//! 1. [`enhance`]: Gaussian smoothing, contrast stretch, white top-hat and
//!    Haar wavelet denoising;
//! 2. [`segment`]: Otsu thresholding, mask smoothing and 8-connected
//!    labeling;
//! 3. [`features`]: 26 geometric descriptors per region;
//! 4. [`svm`]: an SMO-trained soft-margin SVM labels regions tumor/normal.
//!
//! [`pipeline`] ties the stages to the mini-MIAS ground truth, synthetic
//! phantoms, evaluation reports and overlays.
//!
//! ```
//! use mammocad::image::GrayImage;
//! use mammocad::pipeline::{analyze_image, PipelineConfig};
//!
//! // a bright 20×20 square on a dark background
//! let img = GrayImage::from_fn(128, 128, |r, c| {
//!     if (50..70).contains(&r) && (40..60).contains(&c) { 200.0 } else { 30.0 }
//! });
//! let regions = analyze_image(&img, &PipelineConfig::default()).unwrap();
//! assert_eq!(regions.len(), 1);
//! let (region, features) = &regions[0];
//! assert!((region.centroid().0 - 59.5).abs() < 1.0);
//! assert!(features.get("solidity").unwrap() > 0.9);
//! ```

pub mod enhance;
pub mod features;
pub mod image;
pub mod pipeline;
pub mod segment;
pub mod svm;
