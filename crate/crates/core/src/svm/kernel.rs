use serde::{Deserialize, Serialize};

use super::SvmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
    Sigmoid,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Polynomial => "polynomial",
            KernelKind::Rbf => "rbf",
            KernelKind::Sigmoid => "sigmoid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(KernelKind::Linear),
            "polynomial" => Some(KernelKind::Polynomial),
            "rbf" => Some(KernelKind::Rbf),
            "sigmoid" => Some(KernelKind::Sigmoid),
            _ => None,
        }
    }
}

/// Kernel choice and its parameters.
///
/// * linear: `x·y`
/// * polynomial: `(γ x·y + coef)^degree`
/// * rbf: `exp(−γ |x − y|²)`, or `exp(−|x − y|² / 2σ²)` when `sigma` is set
/// * sigmoid: `tanh(γ x·y + coef)`
///
/// A missing `gamma` means `1/m` for `m`-dimensional inputs. Parameters
/// that do not apply to `kind` are kept but ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: Option<f64>,
    pub coef: f64,
    pub degree: u32,
    pub sigma: Option<f64>,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            kind: KernelKind::Rbf,
            gamma: None,
            coef: 1.0,
            degree: 3,
            sigma: None,
        }
    }
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            ..Self::default()
        }
    }

    pub fn polynomial(gamma: f64, coef: f64, degree: u32) -> Self {
        Self {
            kind: KernelKind::Polynomial,
            gamma: Some(gamma),
            coef,
            degree,
            sigma: None,
        }
    }

    pub fn rbf(gamma: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            gamma: Some(gamma),
            ..Self::default()
        }
    }

    /// RBF with width `sigma`; `gamma` is set to `1/(2σ²)` as well.
    pub fn rbf_sigma(sigma: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            gamma: Some(1.0 / (2.0 * sigma * sigma)),
            sigma: Some(sigma),
            ..Self::default()
        }
    }

    pub fn sigmoid(gamma: f64, coef: f64) -> Self {
        Self {
            kind: KernelKind::Sigmoid,
            gamma: Some(gamma),
            coef,
            degree: 3,
            sigma: None,
        }
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(SvmError::InvalidKernel(format!(
                    "gamma must be positive, got {g}"
                )));
            }
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(SvmError::InvalidKernel(format!(
                    "sigma must be positive, got {s}"
                )));
            }
            if let Some(g) = self.gamma {
                let implied = 1.0 / (2.0 * s * s);
                if (g - implied).abs() > 1e-12 {
                    return Err(SvmError::InvalidKernel(format!(
                        "gamma {g} disagrees with sigma {s} (implies {implied})"
                    )));
                }
            }
        }
        if !self.coef.is_finite() {
            return Err(SvmError::InvalidKernel("coef must be finite".into()));
        }
        if self.kind == KernelKind::Polynomial && self.degree == 0 {
            return Err(SvmError::InvalidKernel("degree must be ≥ 1".into()));
        }
        Ok(())
    }

    /// γ in effect for `dim`-dimensional inputs.
    pub fn effective_gamma(&self, dim: usize) -> f64 {
        match (self.sigma, self.gamma) {
            (Some(s), _) if self.kind == KernelKind::Rbf => 1.0 / (2.0 * s * s),
            (_, Some(g)) => g,
            _ => 1.0 / dim.max(1) as f64,
        }
    }

    /// A copy with `gamma` filled in for `dim`-dimensional inputs.
    pub fn resolved(&self, dim: usize) -> Self {
        Self {
            gamma: Some(self.effective_gamma(dim)),
            ..self.clone()
        }
    }

    /// Kernel value without a dimension check.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let dot = || x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        match self.kind {
            KernelKind::Linear => dot(),
            KernelKind::Polynomial => {
                (self.effective_gamma(x.len()) * dot() + self.coef).powi(self.degree as i32)
            }
            KernelKind::Rbf => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-self.effective_gamma(x.len()) * d2).exp()
            }
            KernelKind::Sigmoid => (self.effective_gamma(x.len()) * dot() + self.coef).tanh(),
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, SvmError> {
    if x.len() != y.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(spec.eval_unchecked(x, y))
}
