//! Flat grayscale morphology: erosion, dilation and the white top-hat.
//!
//! Out-of-bounds samples are ignored rather than padded, so the min/max at
//! a border pixel is taken over the in-bounds part of the structuring
//! element only.
//!
//! The structuring element is decomposed into horizontal runs, one or more
//! per row offset. Each distinct run length gets a van Herk/Gil-Werman
//! running min (or max) per source row, and an output pixel then combines
//! one lookup per run. For a disk of radius `r` that is `2r + 1` lookups per
//! pixel instead of roughly `πr²`.

use std::collections::BTreeMap;

use super::EnhanceError;
use crate::image::GrayImage;

/// A flat structuring element: a set of `(drow, dcol)` offsets that
/// contains the origin and is symmetric under negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    offsets: Vec<(i32, i32)>,
}

impl StructuringElement {
    pub fn new(mut offsets: Vec<(i32, i32)>) -> Result<Self, EnhanceError> {
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.binary_search(&(0, 0)).is_err() {
            return Err(EnhanceError::InvalidStructuringElement(
                "origin not included".into(),
            ));
        }
        if let Some(&(dr, dc)) = offsets
            .iter()
            .find(|&&(dr, dc)| offsets.binary_search(&(-dr, -dc)).is_err())
        {
            return Err(EnhanceError::InvalidStructuringElement(format!(
                "offset ({dr}, {dc}) has no mirror"
            )));
        }
        Ok(Self { offsets })
    }

    /// Sorted, deduplicated offsets.
    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// `(drow, first dcol, run length)` for each maximal horizontal run.
    fn runs(&self, reflect: bool) -> Vec<(i32, i32, usize)> {
        let mut pts: Vec<(i32, i32)> = if reflect {
            self.offsets.iter().map(|&(r, c)| (-r, -c)).collect()
        } else {
            self.offsets.clone()
        };
        pts.sort_unstable();
        let mut runs: Vec<(i32, i32, usize)> = Vec::new();
        for (dr, dc) in pts {
            match runs.last_mut() {
                Some((r, start, len)) if *r == dr && *start + *len as i32 == dc => *len += 1,
                _ => runs.push((dr, dc, 1)),
            }
        }
        runs
    }
}

/// Offsets `{(dr, dc) : dr² + dc² ≤ radius²}`.
pub fn disk_se(radius: u32) -> StructuringElement {
    let r = radius as i32;
    let r2 = i64::from(r) * i64::from(r);
    let mut offsets = Vec::new();
    for dr in -r..=r {
        for dc in -r..=r {
            if i64::from(dr * dr) + i64::from(dc * dc) <= r2 {
                offsets.push((dr, dc));
            }
        }
    }
    StructuringElement { offsets }
}

#[derive(Clone, Copy)]
enum Extremum {
    Min,
    Max,
}

impl Extremum {
    #[inline(always)]
    fn pick(self, a: f64, b: f64) -> f64 {
        match self {
            Extremum::Min => {
                if b < a {
                    b
                } else {
                    a
                }
            }
            Extremum::Max => {
                if b > a {
                    b
                } else {
                    a
                }
            }
        }
    }

    fn identity(self) -> f64 {
        match self {
            Extremum::Min => f64::INFINITY,
            Extremum::Max => f64::NEG_INFINITY,
        }
    }
}

/// Scratch buffers reused across rows.
#[derive(Default)]
struct Scratch {
    padded: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
    window: Vec<f64>,
}

/// Running extremum of every length-`len` window of `row` padded by
/// `len - 1` identity samples on each side (van Herk / Gil–Werman). Entry
/// `k` of `s.window` covers source columns `k - (len - 1) ..= k`.
#[inline(always)]
fn sliding_extremum(row: &[f64], len: usize, op: Extremum, s: &mut Scratch) {
    let pad = len - 1;
    let id = op.identity();
    s.padded.clear();
    s.padded.resize(pad, id);
    s.padded.extend_from_slice(row);
    s.padded.resize(row.len() + 2 * pad, id);

    let n = s.padded.len();
    s.prefix.clear();
    s.prefix.resize(n, id);
    s.suffix.clear();
    s.suffix.resize(n, id);
    for (p, x) in s.prefix.chunks_mut(len).zip(s.padded.chunks(len)) {
        let mut acc = id;
        for (pi, &xi) in p.iter_mut().zip(x) {
            acc = op.pick(acc, xi);
            *pi = acc;
        }
    }
    for (sf, x) in s.suffix.chunks_mut(len).zip(s.padded.chunks(len)) {
        let mut acc = id;
        for (si, &xi) in sf.iter_mut().zip(x).rev() {
            acc = op.pick(acc, xi);
            *si = acc;
        }
    }
    s.window.clear();
    s.window.extend(
        s.suffix[..row.len() + pad]
            .iter()
            .zip(&s.prefix[pad..])
            .map(|(&a, &b)| op.pick(a, b)),
    );
}

fn flat_filter(img: &GrayImage, se: &StructuringElement, op: Extremum, reflect: bool) -> GrayImage {
    let (h, w) = img.dims();
    let runs = se.runs(reflect);
    let mut by_len: BTreeMap<usize, Vec<(i32, i32)>> = BTreeMap::new();
    for &(dr, dc, len) in &runs {
        by_len.entry(len).or_default().push((dr, dc));
    }

    let mut out = vec![op.identity(); w * h];
    let mut scratch = Scratch::default();
    for src_row in 0..h {
        let row = img.row(src_row);
        for (&len, starts) in &by_len {
            sliding_extremum(row, len, op, &mut scratch);
            let window = &scratch.window;
            let pad = (len - 1) as i64;
            for &(dr, dc) in starts {
                let dst_row = src_row as i64 - i64::from(dr);
                if dst_row < 0 || dst_row >= h as i64 {
                    continue;
                }
                let dst = &mut out[dst_row as usize * w..(dst_row as usize + 1) * w];
                // window k ends at source column k; the run for output
                // column c covers c+dc ..= c+dc+len-1.
                let shift = i64::from(dc) + pad;
                let c_lo = (-shift).max(0);
                let c_hi = (window.len() as i64 - shift).min(w as i64);
                if c_lo >= c_hi {
                    continue;
                }
                let src = &window[(c_lo + shift) as usize..(c_hi + shift) as usize];
                for (d, &v) in dst[c_lo as usize..c_hi as usize].iter_mut().zip(src) {
                    *d = op.pick(*d, v);
                }
            }
        }
    }
    GrayImage::new(w, h, out).expect("origin in the element keeps every output finite")
}

/// Minimum over `se` offsets.
pub fn erode(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    flat_filter(img, se, Extremum::Min, false)
}

/// Maximum over the reflected `se` offsets.
pub fn dilate(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    flat_filter(img, se, Extremum::Max, true)
}

/// Erosion followed by dilation.
pub fn open(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    dilate(&erode(img, se), se)
}

/// White top-hat: the image minus its opening.
pub fn tophat(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    img.zip_map(&open(img, se), |a, b| a - b)
}
