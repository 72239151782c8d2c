//! mini-MIAS ground truth.
//!
//! Each line of the info file reads
//! `ref tissue class [severity x y radius]`, e.g. `mdb001 G CIRC B 535 425 197`.
//! `x` counts columns from the left, `y` counts rows from the BOTTOM of the
//! image. A lesion line may stop after the severity when the lesion has no
//! recorded centre; a trailing `*NOTE…` annotation in place of the
//! coordinates is treated the same way.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::segment::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tissue {
    F,
    G,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Abnormality {
    Calc,
    Circ,
    Spic,
    Misc,
    Arch,
    Asym,
    Norm,
}

impl Abnormality {
    fn code(self) -> &'static str {
        match self {
            Abnormality::Calc => "CALC",
            Abnormality::Circ => "CIRC",
            Abnormality::Spic => "SPIC",
            Abnormality::Misc => "MISC",
            Abnormality::Arch => "ARCH",
            Abnormality::Asym => "ASYM",
            Abnormality::Norm => "NORM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    B,
    M,
}

/// One info-file line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiasRecord {
    pub reference: String,
    pub tissue: Tissue,
    pub abnormality: Abnormality,
    pub severity: Option<Severity>,
    /// `(x from the left, y from the bottom)`, px.
    pub center: Option<(f64, f64)>,
    pub radius: Option<f64>,
}

impl MiasRecord {
    /// A normal-image record.
    pub fn normal(reference: impl Into<String>, tissue: Tissue) -> Self {
        Self {
            reference: reference.into(),
            tissue,
            abnormality: Abnormality::Norm,
            severity: None,
            center: None,
            radius: None,
        }
    }

    pub fn is_normal(&self) -> bool {
        self.abnormality == Abnormality::Norm
    }

    /// A lesion with a centre and radius.
    pub fn is_localized(&self) -> bool {
        !self.is_normal() && self.center.is_some() && self.radius.is_some()
    }
}

impl fmt::Display for MiasRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tissue = match self.tissue {
            Tissue::F => "F",
            Tissue::G => "G",
            Tissue::D => "D",
        };
        write!(
            f,
            "{} {} {}",
            self.reference,
            tissue,
            self.abnormality.code()
        )?;
        if let Some(s) = self.severity {
            write!(f, " {}", if s == Severity::B { "B" } else { "M" })?;
            if let (Some((x, y)), Some(r)) = (self.center, self.radius) {
                write!(f, " {x} {y} {r}")?;
            }
        }
        Ok(())
    }
}

fn parse_tissue(tok: &str) -> Result<Tissue, PipelineError> {
    match tok {
        "F" => Ok(Tissue::F),
        "G" => Ok(Tissue::G),
        "D" => Ok(Tissue::D),
        _ => Err(PipelineError::UnknownCode(tok.to_string())),
    }
}

fn parse_abnormality(tok: &str) -> Result<Abnormality, PipelineError> {
    Ok(match tok {
        "CALC" => Abnormality::Calc,
        "CIRC" => Abnormality::Circ,
        "SPIC" => Abnormality::Spic,
        "MISC" => Abnormality::Misc,
        "ARCH" => Abnormality::Arch,
        "ASYM" => Abnormality::Asym,
        "NORM" => Abnormality::Norm,
        _ => return Err(PipelineError::UnknownCode(tok.to_string())),
    })
}

fn parse_severity(tok: &str) -> Result<Severity, PipelineError> {
    match tok {
        "B" => Ok(Severity::B),
        "M" => Ok(Severity::M),
        _ => Err(PipelineError::UnknownCode(tok.to_string())),
    }
}

fn parse_coordinate(tok: &str) -> Result<f64, PipelineError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() && *v >= 0.0)
        .ok_or_else(|| PipelineError::NonNumericCoordinate(tok.to_string()))
}

pub fn parse_mias_info(line: &str) -> Result<MiasRecord, PipelineError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() < 3 {
        return Err(PipelineError::BadTokenCount(toks.len()));
    }
    let reference = toks[0].to_string();
    let tissue = parse_tissue(toks[1])?;
    let abnormality = parse_abnormality(toks[2])?;
    if abnormality == Abnormality::Norm {
        if toks.len() != 3 {
            return Err(PipelineError::BadTokenCount(toks.len()));
        }
        return Ok(MiasRecord::normal(reference, tissue));
    }
    let mut rec = MiasRecord {
        reference,
        tissue,
        abnormality,
        severity: None,
        center: None,
        radius: None,
    };
    match toks.len() {
        3 => {}
        4 => rec.severity = Some(parse_severity(toks[3])?),
        n if n >= 5 && toks[4].starts_with('*') => rec.severity = Some(parse_severity(toks[3])?),
        7 => {
            rec.severity = Some(parse_severity(toks[3])?);
            let x = parse_coordinate(toks[4])?;
            let y = parse_coordinate(toks[5])?;
            let r = parse_coordinate(toks[6])?;
            if r <= 0.0 {
                return Err(PipelineError::NonNumericCoordinate(toks[6].to_string()));
            }
            rec.center = Some((x, y));
            rec.radius = Some(r);
        }
        n => return Err(PipelineError::BadTokenCount(n)),
    }
    Ok(rec)
}

/// Parses a whole info file, skipping blank lines and `#` comments.
pub fn parse_info_file(text: &str) -> Result<Vec<MiasRecord>, PipelineError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            parse_mias_info(l).map_err(|e| PipelineError::InfoLine {
                line: i + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

/// `(row, col)` of the lesion centre: `row = height − 1 − y`, `col = x`.
pub fn gt_to_image_coords(
    rec: &MiasRecord,
    image_height: usize,
) -> Result<(f64, f64), PipelineError> {
    let (x, y) = rec
        .center
        .ok_or_else(|| PipelineError::MissingCoordinates(rec.reference.clone()))?;
    Ok((image_height as f64 - 1.0 - y, x))
}

/// Whether the region centroid lies within `gt_radius` of `gt_center`
/// (boundary inclusive).
pub fn match_region(region: &Region, gt_center: (f64, f64), gt_radius: f64) -> bool {
    centroid_matches(region.centroid(), gt_center, gt_radius)
}

pub(crate) fn centroid_matches(
    centroid: (f64, f64),
    gt_center: (f64, f64),
    gt_radius: f64,
) -> bool {
    let (dr, dc) = (centroid.0 - gt_center.0, centroid.1 - gt_center.1);
    dr * dr + dc * dc <= gt_radius * gt_radius
}
