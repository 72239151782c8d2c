//! Percentile contrast stretching.

use crate::image::GrayImage;

/// Nearest-rank percentile: the value at 1-based rank `ceil(p/100 · n)`,
/// with rank 0 promoted to 1.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty set");
    let n = values.len();
    let rank = ((p / 100.0) * n as f64).ceil().clamp(1.0, n as f64) as usize;
    let mut scratch = values.to_vec();
    let (_, v, _) = scratch.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *v
}

/// Maps the `p_low` and `p_high` percentiles to 0 and 255, clamping outside.
///
/// A degenerate range (both percentiles equal) returns the image unchanged.
///
/// # Panics
/// Unless `0 ≤ p_low < p_high ≤ 100`.
pub fn contrast_stretch(img: &GrayImage, p_low: f64, p_high: f64) -> GrayImage {
    assert!(
        (0.0..=100.0).contains(&p_low) && (0.0..=100.0).contains(&p_high) && p_low < p_high,
        "invalid percentiles ({p_low}, {p_high})"
    );
    let lo = percentile(img.pixels(), p_low);
    let hi = percentile(img.pixels(), p_high);
    if lo == hi {
        return img.clone();
    }
    let span = hi - lo;
    img.map(|x| (255.0 * (x - lo) / span).clamp(0.0, 255.0))
}
