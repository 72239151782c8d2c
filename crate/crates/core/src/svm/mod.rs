//! Binary soft-margin SVM: kernels, feature scaling, a deterministic SMO
//! trainer, a grid-search oracle for the dual, and model files.
//!
//! Labels are `+1` (tumor) and `−1` (normal). A trained [`SvmModel`]
//! carries its own [`ScalerStats`], so callers always pass raw feature
//! vectors.

mod kernel;
mod model_io;
mod oracle;
mod scaler;
mod smo;

pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use model_io::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use oracle::{
    brute_force_qp, decision_values, dual_objective, kkt_violations, BRUTE_FORCE_MAX_SAMPLES,
};
pub use scaler::{apply_scaler, fit_scaler, ScalerStats};
pub use smo::{smo_solve, DualSolution, TrainConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training data holds a single class")]
    SingleClass,
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("brute-force QP supports at most 6 samples, got {0}")]
    TooLarge(usize),
    #[error("unsupported model version {0}")]
    UnsupportedVersion(String),
    #[error("model file schema violation: {0}")]
    SchemaViolation(String),
}

/// A feature vector with a `±1` label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: i8,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: i8) -> Self {
        Self { x, y }
    }
}

/// Maps the `{0, 1}` label convention to `{−1, +1}`.
pub fn label_from_binary(b: u8) -> i8 {
    if b == 0 {
        -1
    } else {
        1
    }
}

/// Maps `{−1, +1}` back to `{0, 1}`.
pub fn label_to_binary(y: i8) -> u8 {
    u8::from(y > 0)
}

/// A trained classifier.
///
/// `support_vectors` live in scaled feature space; `coeffs[i]` is `αᵢ·yᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub coeffs: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub scaler: ScalerStats,
    pub c: f64,
    pub feature_names: Vec<String>,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    /// `Σ coeffsᵢ K(svᵢ, scale(x)) + b` for a raw feature vector `x`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        let z = self.scaler.apply(x)?;
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.coeffs)
            .map(|(sv, &a)| a * self.kernel.eval_unchecked(sv, &z))
            .sum();
        Ok(sum + self.bias)
    }

    /// `+1` when the decision value is `≥ 0`, else `−1`.
    pub fn predict(&self, x: &[f64]) -> Result<i8, SvmError> {
        self.decision_value(x).map(sign)
    }
}

/// `sign` with `sign(0) = +1`.
pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn decision_value(model: &SvmModel, x: &[f64]) -> Result<f64, SvmError> {
    model.decision_value(x)
}

pub fn predict(model: &SvmModel, x: &[f64]) -> Result<i8, SvmError> {
    model.predict(x)
}

/// Output of training: the model plus solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: SvmModel,
    /// One α per training sample, in input order.
    pub alphas: Vec<f64>,
    /// `false` means the model is usable but KKT violations remain.
    pub converged: bool,
    pub passes: usize,
}

impl TrainOutcome {
    pub fn support_vector_count(&self) -> usize {
        self.model.support_vectors.len()
    }
}

fn build_model(
    data: &[Sample],
    kernel: &KernelSpec,
    cfg: &TrainConfig,
    sol: DualSolution,
    scaler: ScalerStats,
    feature_names: Vec<String>,
) -> TrainOutcome {
    let mut support_vectors = Vec::new();
    let mut coeffs = Vec::new();
    for (s, &a) in data.iter().zip(&sol.alphas) {
        if a > cfg.eps {
            support_vectors.push(s.x.clone());
            coeffs.push(a * f64::from(s.y));
        }
    }
    TrainOutcome {
        model: SvmModel {
            support_vectors,
            coeffs,
            bias: sol.bias,
            kernel: kernel.resolved(scaler.dim()),
            scaler,
            c: cfg.c,
            feature_names,
        },
        alphas: sol.alphas,
        converged: sol.converged,
        passes: sol.passes,
    }
}

/// Trains on `data` exactly as given. The model's scaler is the identity
/// and its features are named `x0, x1, …`.
pub fn smo_train(
    data: &[Sample],
    kernel: &KernelSpec,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, SvmError> {
    let sol = smo_solve(data, kernel, cfg)?;
    let dim = data[0].x.len();
    let names = (0..dim).map(|i| format!("x{i}")).collect();
    Ok(build_model(
        data,
        kernel,
        cfg,
        sol,
        ScalerStats::identity(dim),
        names,
    ))
}

/// Fits a scaler on `data`, standardizes it, and trains on the result.
pub fn train_scaled(
    data: &[Sample],
    kernel: &KernelSpec,
    cfg: &TrainConfig,
    feature_names: Vec<String>,
) -> Result<TrainOutcome, SvmError> {
    let scaler = fit_scaler(data)?;
    if feature_names.len() != scaler.dim() {
        return Err(SvmError::DimensionMismatch {
            expected: scaler.dim(),
            found: feature_names.len(),
        });
    }
    let scaled = data
        .iter()
        .map(|s| Ok(Sample::new(scaler.apply(&s.x)?, s.y)))
        .collect::<Result<Vec<_>, SvmError>>()?;
    let sol = smo_solve(&scaled, kernel, cfg)?;
    Ok(build_model(
        &scaled,
        kernel,
        cfg,
        sol,
        scaler,
        feature_names,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> Vec<Sample> {
        vec![Sample::new(vec![-1.0], -1), Sample::new(vec![1.0], 1)]
    }

    #[test]
    fn analytic_two_point_solution() {
        let cfg = TrainConfig {
            c: 10.0,
            ..Default::default()
        };
        let out = smo_train(&two_points(), &KernelSpec::linear(), &cfg).unwrap();
        assert!(out.converged);
        assert!((out.alphas[0] - 0.5).abs() < 1e-6 && (out.alphas[1] - 0.5).abs() < 1e-6);
        assert!(out.model.bias.abs() < 1e-6);
        assert_eq!(out.support_vector_count(), 2);
        let f0 = out.model.decision_value(&[0.0]).unwrap();
        assert!(f0.abs() < 1e-12);
        assert_eq!(out.model.predict(&[0.0]).unwrap(), 1);
        assert!((out.model.decision_value(&[0.3]).unwrap() - 0.3).abs() < 1e-9);
    }

    #[test]
    fn xor_with_rbf() {
        let data = vec![
            Sample::new(vec![0.0, 0.0], -1),
            Sample::new(vec![1.0, 1.0], -1),
            Sample::new(vec![0.0, 1.0], 1),
            Sample::new(vec![1.0, 0.0], 1),
        ];
        let cfg = TrainConfig {
            c: 10.0,
            ..Default::default()
        };
        let out = smo_train(&data, &KernelSpec::rbf(1.0), &cfg).unwrap();
        for s in &data {
            assert_eq!(out.model.predict(&s.x).unwrap(), s.y);
        }
    }

    #[test]
    fn single_class_rejected() {
        let data = vec![Sample::new(vec![0.0], 1), Sample::new(vec![1.0], 1)];
        assert_eq!(
            smo_train(&data, &KernelSpec::linear(), &TrainConfig::default()),
            Err(SvmError::SingleClass)
        );
    }

    #[test]
    fn scaled_training_uses_raw_inputs() {
        let data: Vec<Sample> = (0..20)
            .map(|i| {
                let x = i as f64 * 100.0;
                Sample::new(vec![x, 5.0], if i < 10 { -1 } else { 1 })
            })
            .collect();
        let names = vec!["a".to_string(), "b".to_string()];
        let out = train_scaled(
            &data,
            &KernelSpec::default(),
            &TrainConfig::default(),
            names,
        )
        .unwrap();
        assert_eq!(out.model.scaler.constant_features(), vec![1]);
        assert_eq!(out.model.predict(&[0.0, 5.0]).unwrap(), -1);
        assert_eq!(out.model.predict(&[1900.0, 5.0]).unwrap(), 1);
        let a = out.model.decision_value(&[700.0, 5.0]).unwrap();
        assert_eq!(a, out.model.decision_value(&[700.0, 5.0]).unwrap());
    }

    #[test]
    fn label_mapping() {
        assert_eq!(label_from_binary(0), -1);
        assert_eq!(label_from_binary(1), 1);
        assert_eq!(label_to_binary(-1), 0);
        assert_eq!(label_to_binary(1), 1);
        assert_eq!(sign(0.0), 1);
        assert_eq!(sign(-0.0), 1);
    }
}
