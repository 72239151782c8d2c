//! Burned-in visual summaries of a detection run.

use super::eval::{Detection, Prediction};
use super::mias::{gt_to_image_coords, MiasRecord};
use crate::image::GrayImage;

pub const GT_INTENSITY: f64 = 128.0;
pub const TUMOR_INTENSITY: f64 = 255.0;

/// Copy of `img` with ground-truth circles at 128, then the bounding-box
/// outline of every tumor-predicted detection at 255.
///
/// A circle covers the pixels whose distance to the centre is within half a
/// pixel of the radius. Records without coordinates draw nothing.
pub fn render_overlay(
    img: &GrayImage,
    detections: &[Detection],
    records: &[MiasRecord],
) -> GrayImage {
    let (h, w) = img.dims();
    let mut px = img.pixels().to_vec();
    for rec in records.iter().filter(|r| r.is_localized()) {
        let Ok((cr, cc)) = gt_to_image_coords(rec, h) else {
            continue;
        };
        let radius = rec.radius.unwrap_or(0.0);
        let lo_r = (cr - radius - 1.0).floor().max(0.0) as usize;
        let hi_r = (cr + radius + 1.0).ceil().min((h - 1) as f64);
        let lo_c = (cc - radius - 1.0).floor().max(0.0) as usize;
        let hi_c = (cc + radius + 1.0).ceil().min((w - 1) as f64);
        if hi_r < 0.0 || hi_c < 0.0 {
            continue;
        }
        for r in lo_r..=hi_r as usize {
            for c in lo_c..=hi_c as usize {
                let d = ((r as f64 - cr).powi(2) + (c as f64 - cc).powi(2)).sqrt();
                if (d - radius).abs() < 0.5 {
                    px[r * w + c] = GT_INTENSITY;
                }
            }
        }
    }
    for det in detections
        .iter()
        .filter(|d| d.predicted == Prediction::Tumor)
    {
        let b = det.bbox;
        if b.max_row >= h || b.max_col >= w {
            continue;
        }
        for c in b.min_col..=b.max_col {
            px[b.min_row * w + c] = TUMOR_INTENSITY;
            px[b.max_row * w + c] = TUMOR_INTENSITY;
        }
        for r in b.min_row..=b.max_row {
            px[r * w + b.min_col] = TUMOR_INTENSITY;
            px[r * w + b.max_col] = TUMOR_INTENSITY;
        }
    }
    GrayImage::new(w, h, px).expect("same dims as input")
}
