//! Separable orthonormal Haar transform with per-level edge padding.
//!
//! One analysis level pads an odd width or height by repeating the last
//! column or row, then transforms rows and columns with
//! `low = (a + b)/√2`, `high = (a − b)/√2`. The approximation band is
//! recursed on.

use serde::{Deserialize, Serialize};

use super::EnhanceError;
use crate::image::GrayImage;

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The three detail bands of one level.
///
/// `lh` is high-pass along rows and low-pass along columns (horizontal
/// detail), `hl` the reverse (vertical detail), `hh` diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    pub lh: GrayImage,
    pub hl: GrayImage,
    pub hh: GrayImage,
}

impl DetailBands {
    fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> Self {
        Self {
            lh: self.lh.map(f),
            hl: self.hl.map(f),
            hh: self.hh.map(f),
        }
    }
}

/// A multi-level Haar decomposition.
///
/// `details[0]` is the finest level. `original_dims` is `(height, width)`
/// before any padding.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub ll: GrayImage,
    pub details: Vec<DetailBands>,
    pub original_dims: (usize, usize),
}

impl WaveletPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }
}

/// What to do with the detail bands between analysis and synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetailPolicy {
    /// Zero the finest level only.
    ZeroLevel1,
    ZeroAll,
    /// Shrink every detail coefficient toward zero by `t`.
    SoftThreshold(f64),
    KeepAll,
}

/// Dimension sequence `d_0 = dims, d_k = ceil(d_{k-1}/2)`.
fn level_dims(dims: (usize, usize), levels: usize) -> Vec<(usize, usize)> {
    let mut out = vec![dims];
    for _ in 0..levels {
        let (h, w) = *out.last().unwrap();
        out.push((h.div_ceil(2), w.div_ceil(2)));
    }
    out
}

fn analyze_level(img: &GrayImage) -> (GrayImage, DetailBands) {
    let (h, w) = img.dims();
    let (h2, w2) = (h.div_ceil(2), w.div_ceil(2));
    let at = |r: usize, c: usize| img.get(r.min(h - 1), c.min(w - 1));

    let mut ll = Vec::with_capacity(h2 * w2);
    let mut lh = Vec::with_capacity(h2 * w2);
    let mut hl = Vec::with_capacity(h2 * w2);
    let mut hh = Vec::with_capacity(h2 * w2);
    for r in 0..h2 {
        for c in 0..w2 {
            let (a, b) = (at(2 * r, 2 * c), at(2 * r, 2 * c + 1));
            let (p, q) = (at(2 * r + 1, 2 * c), at(2 * r + 1, 2 * c + 1));
            // rows first
            let (top_lo, top_hi) = ((a + b) * INV_SQRT2, (a - b) * INV_SQRT2);
            let (bot_lo, bot_hi) = ((p + q) * INV_SQRT2, (p - q) * INV_SQRT2);
            // then columns
            ll.push((top_lo + bot_lo) * INV_SQRT2);
            hl.push((top_lo - bot_lo) * INV_SQRT2);
            lh.push((top_hi + bot_hi) * INV_SQRT2);
            hh.push((top_hi - bot_hi) * INV_SQRT2);
        }
    }
    let mk = |v| GrayImage::new(w2, h2, v).expect("band dims");
    (
        mk(ll),
        DetailBands {
            lh: mk(lh),
            hl: mk(hl),
            hh: mk(hh),
        },
    )
}

/// Inverts one level and crops to `out_dims`.
fn synthesize_level(ll: &GrayImage, d: &DetailBands, out_dims: (usize, usize)) -> GrayImage {
    let (h, w) = out_dims;
    let w2 = ll.width();
    let mut out = vec![0.0; w * h];
    let mut put = |r: usize, c: usize, v: f64| {
        if r < h && c < w {
            out[r * w + c] = v;
        }
    };
    for r in 0..ll.height() {
        for c in 0..w2 {
            let (s, lh, hl, hh) = (ll.get(r, c), d.lh.get(r, c), d.hl.get(r, c), d.hh.get(r, c));
            let top_lo = (s + hl) * INV_SQRT2;
            let bot_lo = (s - hl) * INV_SQRT2;
            let top_hi = (lh + hh) * INV_SQRT2;
            let bot_hi = (lh - hh) * INV_SQRT2;
            put(2 * r, 2 * c, (top_lo + top_hi) * INV_SQRT2);
            put(2 * r, 2 * c + 1, (top_lo - top_hi) * INV_SQRT2);
            put(2 * r + 1, 2 * c, (bot_lo + bot_hi) * INV_SQRT2);
            put(2 * r + 1, 2 * c + 1, (bot_lo - bot_hi) * INV_SQRT2);
        }
    }
    GrayImage::new(w, h, out).expect("level dims")
}

/// Forward transform to `levels` levels.
///
/// # Panics
/// If `levels` is zero.
pub fn dwt2_forward(img: &GrayImage, levels: usize) -> WaveletPyramid {
    assert!(levels >= 1, "at least one decomposition level");
    let mut ll = img.clone();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (next, d) = analyze_level(&ll);
        details.push(d);
        ll = next;
    }
    WaveletPyramid {
        ll,
        details,
        original_dims: img.dims(),
    }
}

/// Inverse transform, cropped to the original dimensions.
pub fn dwt2_inverse(pyr: &WaveletPyramid) -> Result<GrayImage, EnhanceError> {
    if pyr.details.is_empty() {
        return Err(EnhanceError::DimensionMismatch(
            "pyramid has no levels".into(),
        ));
    }
    let dims = level_dims(pyr.original_dims, pyr.levels());
    if pyr.ll.dims() != dims[pyr.levels()] {
        return Err(EnhanceError::DimensionMismatch(format!(
            "approximation band is {:?}, expected {:?}",
            pyr.ll.dims(),
            dims[pyr.levels()]
        )));
    }
    for (k, d) in pyr.details.iter().enumerate() {
        let want = dims[k + 1];
        for (name, band) in [("lh", &d.lh), ("hl", &d.hl), ("hh", &d.hh)] {
            if band.dims() != want {
                return Err(EnhanceError::DimensionMismatch(format!(
                    "level {} {name} band is {:?}, expected {want:?}",
                    k + 1,
                    band.dims()
                )));
            }
        }
    }
    let mut ll = pyr.ll.clone();
    for k in (0..pyr.levels()).rev() {
        ll = synthesize_level(&ll, &pyr.details[k], dims[k]);
    }
    Ok(ll)
}

fn soft(v: f64, t: f64) -> f64 {
    (v.abs() - t).max(0.0) * v.signum()
}

/// Forward transform, detail suppression per `policy`, inverse transform.
pub fn denoise_reconstruct(img: &GrayImage, levels: usize, policy: DetailPolicy) -> GrayImage {
    let mut pyr = dwt2_forward(img, levels);
    match policy {
        DetailPolicy::KeepAll => {}
        DetailPolicy::ZeroLevel1 => pyr.details[0] = pyr.details[0].map(|_| 0.0),
        DetailPolicy::ZeroAll => {
            for d in &mut pyr.details {
                *d = d.map(|_| 0.0);
            }
        }
        DetailPolicy::SoftThreshold(t) => {
            for d in &mut pyr.details {
                *d = d.map(|v| soft(v, t));
            }
        }
    }
    dwt2_inverse(&pyr).expect("pyramid produced by dwt2_forward is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_image(w: usize, h: usize, mut seed: u64) -> GrayImage {
        GrayImage::from_fn(w, h, |_, _| {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 255.0
        })
    }

    fn max_abs_diff(a: &GrayImage, b: &GrayImage) -> f64 {
        a.pixels()
            .iter()
            .zip(b.pixels())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_by_two_closed_forms() {
        let ones = GrayImage::filled(2, 2, 1.0);
        let p = dwt2_forward(&ones, 1);
        assert!((p.ll.get(0, 0) - 2.0).abs() < 1e-15);
        assert_eq!(p.details[0].lh.get(0, 0), 0.0);

        let (a, b, c, d) = (3.0, -1.5, 8.25, 2.0);
        let p = dwt2_forward(&GrayImage::from_rows(&[[a, b], [c, d]]), 1);
        let close = |x: f64, y: f64| assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        close(p.ll.get(0, 0), (a + b + c + d) / 2.0);
        close(p.details[0].lh.get(0, 0), (a - b + c - d) / 2.0);
        close(p.details[0].hl.get(0, 0), (a + b - c - d) / 2.0);
        close(p.details[0].hh.get(0, 0), (a - b - c + d) / 2.0);
    }

    #[test]
    fn inverse_of_flat_pyramid() {
        let z = GrayImage::filled(1, 1, 0.0);
        let pyr = WaveletPyramid {
            ll: GrayImage::filled(1, 1, 2.0),
            details: vec![DetailBands {
                lh: z.clone(),
                hl: z.clone(),
                hh: z,
            }],
            original_dims: (2, 2),
        };
        let out = dwt2_inverse(&pyr).unwrap();
        assert!(max_abs_diff(&out, &GrayImage::filled(2, 2, 1.0)) < 1e-15);
    }

    #[test]
    fn zero_pyramid_gives_zero_image() {
        let p = dwt2_forward(&GrayImage::filled(7, 5, 0.0), 2);
        assert!(dwt2_inverse(&p).unwrap().pixels().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_has_no_detail() {
        let p = dwt2_forward(&GrayImage::filled(13, 9, 37.0), 3);
        for d in &p.details {
            for band in [&d.lh, &d.hl, &d.hh] {
                assert!(band.pixels().iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn band_dims_follow_ceil_halving() {
        let p = dwt2_forward(&GrayImage::filled(13, 9, 0.0), 2);
        assert_eq!(p.details[0].lh.dims(), (5, 7));
        assert_eq!(p.details[1].hh.dims(), (3, 4));
        assert_eq!(p.ll.dims(), (3, 4));
    }

    #[test]
    fn perfect_reconstruction_64() {
        let img = random_image(64, 64, 11);
        let back = dwt2_inverse(&dwt2_forward(&img, 2)).unwrap();
        assert!(max_abs_diff(&img, &back) < 1e-9);
    }

    #[test]
    fn inconsistent_pyramid_rejected() {
        let mut p = dwt2_forward(&random_image(8, 8, 1), 2);
        p.details[1].hl = GrayImage::filled(3, 3, 0.0);
        assert!(matches!(
            dwt2_inverse(&p),
            Err(EnhanceError::DimensionMismatch(_))
        ));
        p.details.clear();
        assert!(dwt2_inverse(&p).is_err());
    }

    #[test]
    fn policies() {
        let img = random_image(16, 12, 5);
        let keep = denoise_reconstruct(&img, 2, DetailPolicy::KeepAll);
        assert!(max_abs_diff(&img, &keep) < 1e-9);
        let soft0 = denoise_reconstruct(&img, 2, DetailPolicy::SoftThreshold(0.0));
        assert!(max_abs_diff(&keep, &soft0) < 1e-12);

        // zero_all on sizes divisible by 4 equals 4x4 block means
        let flat = denoise_reconstruct(&img, 2, DetailPolicy::ZeroAll);
        for r in 0..12 {
            for c in 0..16 {
                let (br, bc) = (r / 4 * 4, c / 4 * 4);
                let mut mean = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        mean += img.get(br + i, bc + j);
                    }
                }
                assert!((flat.get(r, c) - mean / 16.0).abs() < 1e-9);
            }
        }

        // zero_level1 keeps 2x2 block means
        let half = denoise_reconstruct(&img, 2, DetailPolicy::ZeroLevel1);
        let m = (img.get(0, 0) + img.get(0, 1) + img.get(1, 0) + img.get(1, 1)) / 4.0;
        assert!((half.get(0, 0) - m).abs() < 1e-9);
        assert!((half.get(1, 1) - m).abs() < 1e-9);
    }
}
