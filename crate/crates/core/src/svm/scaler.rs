use super::{Sample, SvmError};

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ScalerStats {
    /// Mean 0, std 1: `apply` is the identity.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Indices of zero-variance features.
    pub fn constant_features(&self) -> Vec<usize> {
        (0..self.std.len())
            .filter(|&i| self.std[i] == 0.0)
            .collect()
    }

    /// `(x − mean) / std`, with constant features mapped to 0.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, SvmError> {
        if x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| if s == 0.0 { 0.0 } else { (v - m) / s })
            .collect())
    }
}

pub fn fit_scaler(data: &[Sample]) -> Result<ScalerStats, SvmError> {
    let first = data.first().ok_or(SvmError::EmptyDataset)?;
    let dim = first.x.len();
    let n = data.len() as f64;
    let mut mean = vec![0.0; dim];
    for s in data {
        if s.x.len() != dim {
            return Err(SvmError::DimensionMismatch {
                expected: dim,
                found: s.x.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(&s.x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for s in data {
        for ((acc, v), m) in var.iter_mut().zip(&s.x).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
    Ok(ScalerStats { mean, std })
}

pub fn apply_scaler(stats: &ScalerStats, x: &[f64]) -> Result<Vec<f64>, SvmError> {
    stats.apply(x)
}
