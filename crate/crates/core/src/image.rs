//! Grayscale rasters, binary masks and 8-bit PGM I/O.
//!
//! Intensities are kept as `f64` through every processing stage and only
//! rounded to 8 bits when an image is written out. Coordinates are
//! `(row, col)` with the origin at the top-left corner.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated PGM data: expected {expected} samples, found {found}")]
    TruncatedData { expected: usize, found: usize },
    #[error("unsupported PGM maxval {0} (at most 255)")]
    UnsupportedMaxval(u32),
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
}

/// A row-major raster of real intensities, nominally in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from row-major pixels.
    ///
    /// Fails if either dimension is zero, the buffer length does not match,
    /// or any sample is NaN or infinite.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidRaster(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(ImageError::InvalidRaster(format!(
                "{} pixels for a {width}x{height} raster",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(ImageError::InvalidRaster(format!(
                "non-finite intensity at index {i}"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// A `width × height` image filled with `value`.
    ///
    /// # Panics
    /// If a dimension is zero or `value` is not finite.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("valid constant raster")
    }

    /// Builds an image from nested rows. Convenient in tests and examples.
    ///
    /// # Panics
    /// If the rows are ragged, empty, or hold non-finite values.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        assert!(
            rows.iter().all(|r| r.as_ref().len() == width),
            "ragged rows"
        );
        let pixels = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(width, height, pixels).expect("valid raster")
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels).expect("valid raster")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    pub fn min(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.pixels
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Applies `f` to every sample. The result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        let pixels: Vec<f64> = self.pixels.iter().map(|&v| f(v)).collect();
        Self::new(self.width, self.height, pixels).expect("map produced a non-finite value")
    }

    /// Pointwise combination of two equally sized images.
    ///
    /// # Panics
    /// If the dimensions differ.
    pub fn zip_map(&self, other: &GrayImage, f: impl Fn(f64, f64) -> f64) -> GrayImage {
        assert_eq!(self.dims(), other.dims(), "dimension mismatch");
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.width, self.height, pixels).expect("zip_map produced a non-finite value")
    }

    /// Every intensity clamped to `[0, 255]`.
    pub fn clamped(&self) -> GrayImage {
        self.map(|v| v.clamp(0.0, 255.0))
    }
}

/// A row-major `{0, 1}` raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidRaster(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(ImageError::InvalidRaster(format!(
                "{} bits for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![false; width * height]).expect("valid mask")
    }

    /// Builds a mask from rows of 0/1 values; any non-zero entry is set.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        assert!(
            rows.iter().all(|r| r.as_ref().len() == width),
            "ragged rows"
        );
        let bits = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().map(|&b| b != 0))
            .collect();
        Self::new(width, height, bits).expect("valid mask")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c));
            }
        }
        Self::new(width, height, bits).expect("valid mask")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Set bits become 255, clear bits 0.
    pub fn to_image(&self) -> GrayImage {
        let pixels = self
            .bits
            .iter()
            .map(|&b| if b { 255.0 } else { 0.0 })
            .collect();
        GrayImage::new(self.width, self.height, pixels).expect("valid raster")
    }
}

/// Rounds half-up and clamps to `[0, 255]`.
#[inline]
pub fn quantize_value(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Every intensity rounded half-up and clamped to `[0, 255]`.
pub fn quantize(img: &GrayImage) -> GrayImage {
    img.map(|v| f64::from(quantize_value(v)))
}

/// Encodes `img` as a binary (P5) PGM with maxval 255.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(img.pixels().iter().map(|&v| quantize_value(v)));
    out
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            if self.bytes[self.pos] == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32, ImageError> {
        let tok = self
            .token()
            .ok_or_else(|| ImageError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                ImageError::MalformedHeader(format!(
                    "bad {what}: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Decodes a P5 (binary) or P2 (ASCII) PGM with maxval at most 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    let mut rd = HeaderReader { bytes, pos: 0 };
    let binary = match rd.token() {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some(other) => {
            return Err(ImageError::MalformedHeader(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
        None => return Err(ImageError::MalformedHeader("empty input".into())),
    };
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(ImageError::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    let maxval = rd.number("maxval")?;
    if maxval == 0 {
        return Err(ImageError::MalformedHeader("maxval 0".into()));
    }
    if maxval > 255 {
        return Err(ImageError::UnsupportedMaxval(maxval));
    }
    let expected = width * height;
    let pixels: Vec<f64> = if binary {
        // exactly one whitespace byte separates maxval from the raster
        match bytes.get(rd.pos) {
            Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
            _ => return Err(ImageError::TruncatedData { expected, found: 0 }),
        }
        let data = &bytes[rd.pos..];
        if data.len() < expected {
            return Err(ImageError::TruncatedData {
                expected,
                found: data.len(),
            });
        }
        data[..expected]
            .iter()
            .map(|&b| f64::from(b.min(maxval as u8)))
            .collect()
    } else {
        let mut out = Vec::with_capacity(expected);
        while out.len() < expected {
            match rd.token() {
                Some(tok) => {
                    let v = std::str::from_utf8(tok)
                        .ok()
                        .and_then(|s| s.parse::<u32>().ok())
                        .ok_or_else(|| {
                            ImageError::MalformedHeader(format!(
                                "bad ASCII sample {:?}",
                                String::from_utf8_lossy(tok)
                            ))
                        })?;
                    out.push(f64::from(v.min(maxval)));
                }
                None => {
                    return Err(ImageError::TruncatedData {
                        expected,
                        found: out.len(),
                    })
                }
            }
        }
        out
    };
    GrayImage::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loads_binary_pgm() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 128, 64]);
        let img = load_pgm(&bytes).unwrap();
        assert_eq!(img, GrayImage::from_rows(&[[0.0, 255.0], [128.0, 64.0]]));
    }

    #[test]
    fn loads_ascii_pgm_with_comments() {
        let img = load_pgm(b"P2\n# a comment\n1 1 # trailing\n255\n7\n").unwrap();
        assert_eq!(img.pixels(), &[7.0]);
    }

    #[test]
    fn rejects_color_and_bad_headers() {
        assert!(matches!(
            load_pgm(b"P6\n1 1\n255\n\x00\x00\x00"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            load_pgm(b"P5\nx 1\n255\n\x00"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            load_pgm(b"P5\n0 1\n255\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(load_pgm(b""), Err(ImageError::MalformedHeader(_))));
    }

    #[test]
    fn rejects_wide_maxval_and_short_data() {
        assert_eq!(
            load_pgm(b"P5\n1 1\n65535\n\x00\x00"),
            Err(ImageError::UnsupportedMaxval(65535))
        );
        assert_eq!(
            load_pgm(b"P5\n2 2\n255\n\x01\x02"),
            Err(ImageError::TruncatedData {
                expected: 4,
                found: 2
            })
        );
        assert_eq!(
            load_pgm(b"P2\n2 1\n255\n9"),
            Err(ImageError::TruncatedData {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn save_rounds_and_clamps() {
        for (v, expected) in [(7.0, 7u8), (254.7, 255), (-3.0, 0), (127.5, 128)] {
            let bytes = save_pgm(&GrayImage::filled(1, 1, v));
            assert_eq!(&bytes[..11], b"P5\n1 1\n255\n");
            assert_eq!(bytes[11], expected, "value {v}");
        }
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(&GrayImage::filled(1, 1, 127.5)).pixels(), &[128.0]);
        assert_eq!(quantize(&GrayImage::filled(1, 1, 300.0)).pixels(), &[255.0]);
        let ints = GrayImage::from_rows(&[[0.0, 255.0]]);
        assert_eq!(quantize(&ints), ints);
    }

    #[test]
    fn invalid_rasters_rejected() {
        assert!(GrayImage::new(0, 1, vec![]).is_err());
        assert!(GrayImage::new(2, 1, vec![1.0]).is_err());
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
        assert!(BinaryMask::new(2, 2, vec![true]).is_err());
    }

    proptest! {
        #[test]
        fn pgm_round_trip_is_exact(
            w in 1usize..40, h in 1usize..40, seed in any::<u64>()
        ) {
            let mut s = seed;
            let img = GrayImage::from_fn(w, h, |_, _| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from((s >> 56) as u8)
            });
            prop_assert_eq!(load_pgm(&save_pgm(&img)).unwrap(), img);
        }

        #[test]
        fn quantize_is_idempotent(v in -1e6f64..1e6) {
            let once = quantize(&GrayImage::filled(1, 1, v));
            prop_assert_eq!(quantize(&once), once.clone());
            prop_assert!((0.0..=255.0).contains(&once.pixels()[0]));
        }
    }
}
