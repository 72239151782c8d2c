//! Threshold segmentation and connected-component extraction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enhance::{gaussian_smooth, EnhanceError};
use crate::image::{quantize_value, BinaryMask, GrayImage};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("histogram is degenerate: every pixel has value {0}")]
    DegenerateHistogram(u8),
    #[error(transparent)]
    Smoothing(#[from] EnhanceError),
    #[error("invalid segmentation config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Four,
    Eight,
}

/// `a · b` for a 128-bit `a` and 64-bit `b`, as `(high, low)` 128-bit words.
fn widening_mul(a: u128, b: u64) -> (u128, u128) {
    let b = u128::from(b);
    let lo = (a & u128::from(u64::MAX)) * b;
    let hi = (a >> 64) * b;
    // hi·2^64 + lo
    let (low, carry) = lo.overflowing_add(hi << 64);
    ((hi >> 64) + u128::from(carry), low)
}

/// Between-class variance of a split, as the exact ratio
/// `(S0·N − S·n0)² / (n0·n1)`, which is `N²` times `w0·w1·(μ0 − μ1)²`.
#[derive(Clone, Copy)]
struct SplitScore {
    num: u128,
    den: u64,
}

impl SplitScore {
    fn greater_than(self, other: SplitScore) -> bool {
        widening_mul(self.num, other.den) > widening_mul(other.num, self.den)
    }
}

/// 256-bin histogram of the quantized intensities.
pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.pixels() {
        hist[quantize_value(v) as usize] += 1;
    }
    hist
}

/// Otsu threshold of a 256-bin histogram. Foreground is `> t`; ties go to
/// the smallest `t`.
pub fn otsu_from_histogram(hist: &[u64; 256]) -> Result<u8, SegmentError> {
    let total: u64 = hist.iter().sum();
    let sum: u64 = hist.iter().enumerate().map(|(v, &n)| v as u64 * n).sum();
    let occupied: Vec<usize> = (0..256).filter(|&v| hist[v] > 0).collect();
    if occupied.len() <= 1 {
        return Err(SegmentError::DegenerateHistogram(
            occupied.first().copied().unwrap_or(0) as u8,
        ));
    }

    let mut best: Option<(u8, SplitScore)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (t, &count) in hist.iter().enumerate().take(255) {
        n0 += count;
        s0 += t as u64 * count;
        let n1 = total - n0;
        let score = if n0 == 0 || n1 == 0 {
            SplitScore { num: 0, den: 1 }
        } else {
            let d = i128::from(s0) * i128::from(total) - i128::from(sum) * i128::from(n0);
            SplitScore {
                num: d.unsigned_abs().pow(2),
                den: n0 * n1,
            }
        };
        if best.is_none_or(|(_, b)| score.greater_than(b)) {
            best = Some((t as u8, score));
        }
    }
    Ok(best.expect("255 candidates scanned").0)
}

/// Threshold in `[0, 254]` maximizing between-class variance.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8, SegmentError> {
    otsu_from_histogram(&histogram(img))
}

/// Bit set iff the quantized intensity is strictly greater than `t`.
pub fn binarize(img: &GrayImage, t: i32) -> BinaryMask {
    let bits = img
        .pixels()
        .iter()
        .map(|&v| i32::from(quantize_value(v)) > t)
        .collect();
    BinaryMask::new(img.width(), img.height(), bits).expect("same dims as the image")
}

/// Gaussian-smooths the mask as a `{0, 255}` image and re-thresholds it at
/// half maximum. Removes speckle and rounds jagged boundaries.
pub fn mask_smooth(mask: &BinaryMask, sigma: f64) -> Result<BinaryMask, SegmentError> {
    let smoothed = gaussian_smooth(&mask.to_image(), sigma)?;
    let bits = smoothed.pixels().iter().map(|&v| v > 127.5).collect();
    Ok(BinaryMask::new(mask.width(), mask.height(), bits).expect("same dims as the mask"))
}

/// Connected-component labels. `0` is background; regions are numbered
/// from 1 in raster-scan order of their first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    region_count: u32,
}

impl LabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    pub fn region_count(&self) -> u32 {
        self.region_count
    }
}

pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> LabelMap {
    let (h, w) = mask.dims();
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    let neighbours: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
        Connectivity::Eight => &[
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ],
    };
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (r, c) = ((i / w) as isize, (i % w) as isize);
            for &(dr, dc) in neighbours {
                let (rr, cc) = (r + dr, c + dc);
                if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                    continue;
                }
                let j = rr as usize * w + cc as usize;
                if mask.bits()[j] && labels[j] == 0 {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
    }
    LabelMap {
        width: w,
        height: h,
        labels,
        region_count: next,
    }
}

/// Tight bounding box, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

impl BoundingBox {
    pub fn height(&self) -> usize {
        self.max_row - self.min_row + 1
    }

    pub fn width(&self) -> usize {
        self.max_col - self.min_col + 1
    }
}

/// One connected component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    label: u32,
    pixels: Vec<(usize, usize)>,
    bbox: BoundingBox,
}

impl Region {
    /// Builds a region from `(row, col)` pixels. Duplicates are dropped and
    /// the pixels are stored in raster order. Connectivity is not checked.
    ///
    /// # Panics
    /// If `pixels` is empty.
    pub fn new(label: u32, mut pixels: Vec<(usize, usize)>) -> Self {
        assert!(!pixels.is_empty(), "a region needs at least one pixel");
        pixels.sort_unstable();
        pixels.dedup();
        let mut bbox = BoundingBox {
            min_row: usize::MAX,
            min_col: usize::MAX,
            max_row: 0,
            max_col: 0,
        };
        for &(r, c) in &pixels {
            bbox.min_row = bbox.min_row.min(r);
            bbox.min_col = bbox.min_col.min(c);
            bbox.max_row = bbox.max_row.max(r);
            bbox.max_col = bbox.max_col.max(c);
        }
        Self {
            label,
            pixels,
            bbox,
        }
    }

    pub fn label(&self) -> u32 {
        self.label
    }

    /// Pixels in raster order.
    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    /// Mean pixel coordinate `(row, col)`.
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let (sr, sc) = self
            .pixels
            .iter()
            .fold((0.0, 0.0), |(a, b), &(r, c)| (a + r as f64, b + c as f64));
        (sr / n, sc / n)
    }
}

/// Regions with at least `min_area` pixels, largest first, ties by label.
pub fn extract_regions(lm: &LabelMap, min_area: usize) -> Vec<Region> {
    let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); lm.region_count as usize];
    for (i, &l) in lm.labels.iter().enumerate() {
        if l > 0 {
            buckets[l as usize - 1].push((i / lm.width, i % lm.width));
        }
    }
    let mut regions: Vec<Region> = buckets
        .into_iter()
        .enumerate()
        .filter(|(_, px)| !px.is_empty() && px.len() >= min_area)
        .map(|(i, px)| Region::new(i as u32 + 1, px))
        .collect();
    regions.sort_by(|a, b| b.area().cmp(&a.area()).then(a.label.cmp(&b.label)));
    regions
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    Otsu,
    Fixed(i32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    pub threshold: ThresholdMode,
    /// Smallest kept region, px².
    pub min_area: usize,
    /// Sigma of the post-threshold mask smoothing, px.
    pub mask_sigma: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdMode::Otsu,
            min_area: 50,
            mask_sigma: 2.0,
        }
    }
}

impl SegmentConfig {
    pub fn validate(&self) -> Result<(), SegmentError> {
        if !(self.mask_sigma > 0.0 && self.mask_sigma.is_finite()) {
            return Err(SegmentError::InvalidConfig(format!(
                "mask_sigma must be positive, got {}",
                self.mask_sigma
            )));
        }
        Ok(())
    }
}

/// Everything [`segment`] computes along the way.
#[derive(Debug, Clone)]
pub struct Segmentation {
    /// `None` when the histogram was degenerate and nothing was segmented.
    pub threshold: Option<i32>,
    pub mask: BinaryMask,
    pub labels: LabelMap,
    pub regions: Vec<Region>,
}

/// Threshold, smooth the mask, label with 8-connectivity, filter by area.
///
/// A degenerate histogram under Otsu yields an empty segmentation.
pub fn segment_detailed(
    img: &GrayImage,
    cfg: &SegmentConfig,
) -> Result<Segmentation, SegmentError> {
    cfg.validate()?;
    let threshold = match cfg.threshold {
        ThresholdMode::Fixed(t) => t,
        ThresholdMode::Otsu => match otsu_threshold(img) {
            Ok(t) => i32::from(t),
            Err(SegmentError::DegenerateHistogram(_)) => {
                let mask = BinaryMask::empty(img.width(), img.height());
                let labels = connected_components(&mask, Connectivity::Eight);
                return Ok(Segmentation {
                    threshold: None,
                    mask,
                    labels,
                    regions: Vec::new(),
                });
            }
            Err(e) => return Err(e),
        },
    };
    let mask = mask_smooth(&binarize(img, threshold), cfg.mask_sigma)?;
    let labels = connected_components(&mask, Connectivity::Eight);
    let regions = extract_regions(&labels, cfg.min_area);
    Ok(Segmentation {
        threshold: Some(threshold),
        mask,
        labels,
        regions,
    })
}

pub fn segment(img: &GrayImage, cfg: &SegmentConfig) -> Result<Vec<Region>, SegmentError> {
    segment_detailed(img, cfg).map(|s| s.regions)
}
