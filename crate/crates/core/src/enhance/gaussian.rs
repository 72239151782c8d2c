//! Separable Gaussian smoothing with edge replication.

use super::EnhanceError;
use crate::image::GrayImage;

/// Normalized 1-D Gaussian of half-width `ceil(3σ)`.
pub fn gaussian_kernel_1d(sigma: f64) -> Result<Vec<f64>, EnhanceError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(EnhanceError::NonPositiveSigma(sigma));
    }
    let half = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    Ok(k)
}

fn convolve_line(src: &[f64], kernel: &[f64], dst: &mut [f64]) {
    let n = src.len() as isize;
    let half = (kernel.len() / 2) as isize;
    for (i, out) in dst.iter_mut().enumerate() {
        let i = i as isize;
        let mut acc = 0.0;
        for (k, &w) in kernel.iter().enumerate() {
            let j = (i + k as isize - half).clamp(0, n - 1);
            acc += w * src[j as usize];
        }
        *out = acc;
    }
}

/// Convolves rows, then columns, with [`gaussian_kernel_1d`].
pub fn gaussian_smooth(img: &GrayImage, sigma: f64) -> Result<GrayImage, EnhanceError> {
    let kernel = gaussian_kernel_1d(sigma)?;
    let (h, w) = img.dims();

    let mut rows = vec![0.0; w * h];
    for r in 0..h {
        convolve_line(img.row(r), &kernel, &mut rows[r * w..(r + 1) * w]);
    }

    let mut out = vec![0.0; w * h];
    let mut column = vec![0.0; h];
    let mut smoothed = vec![0.0; h];
    for c in 0..w {
        for r in 0..h {
            column[r] = rows[r * w + c];
        }
        convolve_line(&column, &kernel, &mut smoothed);
        for r in 0..h {
            out[r * w + c] = smoothed[r];
        }
    }
    Ok(GrayImage::new(w, h, out).expect("smoothing keeps dimensions"))
}
