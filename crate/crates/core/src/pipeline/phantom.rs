//! Synthetic mammogram phantoms: a flat background, Gaussian noise and
//! radial Gaussian blobs standing in for masses.
//!
//! All randomness comes from SplitMix64 (Steele, Lea & Flood 2014):
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! with wrapping 64-bit arithmetic. A uniform variate is
//! `(next >> 11) · 2⁻⁵³` in `[0, 1)`. A standard normal uses one
//! Box–Muller draw per pair of uniforms `u1, u2`:
//! `sqrt(−2 ln(1 − u1)) · cos(2π u2)`. Pixels receive their noise in
//! raster order.

use serde::{Deserialize, Serialize};

use super::mias::{Abnormality, MiasRecord, Severity, Tissue};
use super::PipelineError;
use crate::image::GrayImage;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    /// `(row, col)`, px.
    pub center: (f64, f64),
    pub radius: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub reference: String,
    /// `(height, width)`.
    pub dims: (usize, usize),
    pub background_level: f64,
    pub noise_std: f64,
    pub blobs: Vec<Blob>,
    pub seed: u64,
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let (h, w) = self.dims;
        let bad = |m: String| Err(PipelineError::InvalidPhantom(m));
        if h == 0 || w == 0 {
            return bad(format!("dims {h}x{w}"));
        }
        if !(self.noise_std >= 0.0
            && self.noise_std.is_finite()
            && self.background_level.is_finite())
        {
            return bad("background and noise must be finite, noise ≥ 0".into());
        }
        for b in &self.blobs {
            let (r, c) = b.center;
            if !(r >= 0.0 && c >= 0.0 && r <= (h - 1) as f64 && c <= (w - 1) as f64) {
                return bad(format!("blob centre {:?} outside {h}x{w}", b.center));
            }
            if !(b.radius > 0.0 && b.radius.is_finite()) {
                return bad(format!("blob radius {}", b.radius));
            }
            if b.amplitude.is_nan() || b.amplitude <= self.noise_std {
                return bad(format!(
                    "blob amplitude {} must exceed noise_std {}",
                    b.amplitude, self.noise_std
                ));
            }
        }
        Ok(())
    }
}

/// Renders the phantom and one ground-truth record per blob.
///
/// Intensities are `background + noise_std·N(0,1) + Σ amplitude·exp(−d²/(2(radius/2)²))`,
/// not clamped or quantized. A phantom without blobs gets a single normal
/// record. Records use the mini-MIAS bottom-origin `y`.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(GrayImage, Vec<MiasRecord>), PipelineError> {
    spec.validate()?;
    let (h, w) = spec.dims;
    let mut rng = SplitMix64::new(spec.seed);
    let img = GrayImage::from_fn(w, h, |r, c| {
        let mut v = spec.background_level + spec.noise_std * rng.standard_normal();
        for b in &spec.blobs {
            let s = b.radius / 2.0;
            let (dr, dc) = (r as f64 - b.center.0, c as f64 - b.center.1);
            v += b.amplitude * (-(dr * dr + dc * dc) / (2.0 * s * s)).exp();
        }
        v
    });
    Ok((img, phantom_records(spec)))
}

/// The ground truth [`generate_phantom`] returns, without rendering.
pub fn phantom_records(spec: &PhantomSpec) -> Vec<MiasRecord> {
    let h = spec.dims.0;
    if spec.blobs.is_empty() {
        return vec![MiasRecord::normal(spec.reference.clone(), Tissue::F)];
    }
    spec.blobs
        .iter()
        .map(|b| MiasRecord {
            reference: spec.reference.clone(),
            tissue: Tissue::F,
            abnormality: Abnormality::Circ,
            severity: Some(Severity::B),
            center: Some((b.center.1, (h as f64 - 1.0) - b.center.0)),
            radius: Some(b.radius),
        })
        .collect()
}

/// Parameters for a reproducible set of phantoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub count: usize,
    /// Images without blobs, appended after the `count` lesion images.
    pub normal_count: usize,
    pub height: usize,
    pub width: usize,
    pub background_level: f64,
    pub noise_std: f64,
    pub blobs_per_image: usize,
    /// `[low, high)` ranges, sampled uniformly.
    pub amplitude: (f64, f64),
    pub radius: (f64, f64),
    pub seed: u64,
    pub prefix: String,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            count: 200,
            normal_count: 10,
            height: 1024,
            width: 1024,
            background_level: 40.0,
            noise_std: 5.0,
            blobs_per_image: 1,
            amplitude: (40.0, 120.0),
            radius: (20.0, 40.0),
            seed: 2024,
            prefix: "phantom".into(),
        }
    }
}

impl CorpusSpec {
    /// One [`PhantomSpec`] per image, named `{prefix}{index:04}`. Blob
    /// centres keep two radii from the border and from each other.
    pub fn phantoms(&self) -> Result<Vec<PhantomSpec>, PipelineError> {
        let ((lo_r, hi_r), (lo_a, hi_a)) = (self.radius, self.amplitude);
        let ranges_ok = lo_r > 0.0 && lo_r <= hi_r && lo_a <= hi_a;
        if !ranges_ok {
            return Err(PipelineError::InvalidPhantom(
                "empty radius or amplitude range".into(),
            ));
        }
        let mut rng = SplitMix64::new(self.seed);
        let mut out = Vec::with_capacity(self.count + self.normal_count);
        for index in 0..self.count + self.normal_count {
            let mut blobs: Vec<Blob> = Vec::new();
            if index < self.count {
                let mut attempts = 0;
                while blobs.len() < self.blobs_per_image {
                    attempts += 1;
                    if attempts > 10_000 {
                        return Err(PipelineError::InvalidPhantom(
                            "cannot place blobs without overlap".into(),
                        ));
                    }
                    let radius = rng.uniform(lo_r, hi_r);
                    let amplitude = rng.uniform(self.amplitude.0, self.amplitude.1);
                    let margin = 2.0 * radius;
                    if 2.0 * margin >= self.height as f64 || 2.0 * margin >= self.width as f64 {
                        return Err(PipelineError::InvalidPhantom("blobs do not fit".into()));
                    }
                    let row = rng.uniform(margin, self.height as f64 - margin).floor();
                    let col = rng.uniform(margin, self.width as f64 - margin).floor();
                    let clear = blobs.iter().all(|b| {
                        let d = ((b.center.0 - row).powi(2) + (b.center.1 - col).powi(2)).sqrt();
                        d > 2.0 * (b.radius + radius)
                    });
                    if clear {
                        blobs.push(Blob {
                            center: (row, col),
                            radius,
                            amplitude,
                        });
                    }
                }
            }
            out.push(PhantomSpec {
                reference: format!("{}{:04}", self.prefix, index),
                dims: (self.height, self.width),
                background_level: self.background_level,
                noise_std: self.noise_std,
                blobs,
                seed: rng.next_u64(),
            });
        }
        Ok(out)
    }
}
