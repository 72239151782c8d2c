//! Deterministic sequential minimal optimization for the soft-margin dual
//!
//! ```text
//! maximize   W(α) = Σ αᵢ − ½ ΣΣ αᵢ αⱼ yᵢ yⱼ K(xᵢ, xⱼ)
//! subject to 0 ≤ αᵢ ≤ C,  Σ αᵢ yᵢ = 0
//! ```
//!
//! Each pass scans the samples in index order. A sample that violates the
//! KKT conditions by more than `tol` is paired with the sample maximizing
//! `|Eᵢ − Eⱼ|` (lowest index on ties); if that pair cannot move, the other
//! samples are tried in index order. The bias is recomputed after every
//! step: the mean of `yᵢ − gᵢ` over free samples (`0 < αᵢ < C`), or the
//! midpoint of the feasible interval when no sample is free.

use serde::{Deserialize, Serialize};

use super::{KernelSpec, Sample, SvmError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Penalty on slack.
    pub c: f64,
    /// KKT tolerance.
    pub tol: f64,
    /// Defaults to `10·n` for `n` samples.
    pub max_passes: Option<usize>,
    /// Smallest α change that counts as progress; also the support-vector
    /// cut-off.
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: None,
            eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), SvmError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.c) {
            return Err(SvmError::InvalidConfig(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !positive(self.tol) {
            return Err(SvmError::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !positive(self.eps) {
            return Err(SvmError::InvalidConfig(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.max_passes == Some(0) {
            return Err(SvmError::InvalidConfig("max_passes must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Dual variables and bias found by [`smo_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// `false` when `max_passes` ran out, or no pair could make progress,
    /// with violators remaining.
    pub converged: bool,
    pub passes: usize,
}

pub(crate) fn check_dataset(data: &[Sample]) -> Result<usize, SvmError> {
    let first = data.first().ok_or(SvmError::EmptyDataset)?;
    let dim = first.x.len();
    for s in data {
        if s.x.len() != dim {
            return Err(SvmError::DimensionMismatch {
                expected: dim,
                found: s.x.len(),
            });
        }
        if s.x.iter().any(|v| !v.is_finite()) {
            return Err(SvmError::InvalidSample("non-finite feature".into()));
        }
        if s.y != 1 && s.y != -1 {
            return Err(SvmError::InvalidSample(format!("label {} is not ±1", s.y)));
        }
    }
    let positives = data.iter().filter(|s| s.y == 1).count();
    if positives == 0 || positives == data.len() {
        return Err(SvmError::SingleClass);
    }
    Ok(dim)
}

pub(crate) fn gram_matrix(data: &[Sample], kernel: &KernelSpec) -> Vec<f64> {
    let n = data.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval_unchecked(&data[i].x, &data[j].x);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Bias from the current state. `g[i] = Σⱼ αⱼ yⱼ K(xⱼ, xᵢ)`.
pub(crate) fn compute_bias(alphas: &[f64], y: &[f64], g: &[f64], c: f64, eps: f64) -> f64 {
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..alphas.len() {
        let r = y[i] - g[i];
        let a = alphas[i];
        if a > eps && a < c - eps {
            free_sum += r;
            free_n += 1;
        } else {
            let at_zero = a <= eps;
            // b ≥ r for (y=+1, α=0) and (y=−1, α=C); b ≤ r otherwise
            if at_zero == (y[i] > 0.0) {
                lower = lower.max(r);
            } else {
                upper = upper.min(r);
            }
        }
    }
    if free_n > 0 {
        free_sum / free_n as f64
    } else if lower.is_finite() && upper.is_finite() {
        (lower + upper) / 2.0
    } else if lower.is_finite() {
        lower
    } else if upper.is_finite() {
        upper
    } else {
        0.0
    }
}

/// Above this many samples kernel values are recomputed on demand instead
/// of stored (the dense matrix would need `n²` reals).
const DENSE_GRAM_MAX: usize = 4096;

enum Gram<'a> {
    Dense(Vec<f64>),
    Lazy {
        data: &'a [Sample],
        kernel: KernelSpec,
    },
}

struct Solver<'a> {
    n: usize,
    k: Gram<'a>,
    y: Vec<f64>,
    alphas: Vec<f64>,
    g: Vec<f64>,
    errors: Vec<f64>,
    bias: f64,
    c: f64,
    eps: f64,
}

impl Solver<'_> {
    fn kij(&self, i: usize, j: usize) -> f64 {
        match &self.k {
            Gram::Dense(k) => k[i * self.n + j],
            Gram::Lazy { data, kernel } => {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                kernel.eval_unchecked(&data[a].x, &data[b].x)
            }
        }
    }

    fn refresh_errors(&mut self) {
        self.bias = compute_bias(&self.alphas, &self.y, &self.g, self.c, self.eps);
        for i in 0..self.n {
            self.errors[i] = self.g[i] + self.bias - self.y[i];
        }
    }

    fn violates(&self, i: usize, tol: f64) -> bool {
        let r = self.y[i] * self.errors[i];
        (r < -tol && self.alphas[i] < self.c - self.eps) || (r > tol && self.alphas[i] > self.eps)
    }

    /// Objective change along the pair direction, as a function of αⱼ.
    fn pair_objective(&self, i: usize, j: usize, aj: f64) -> f64 {
        let s = self.y[i] * self.y[j];
        let ai = self.alphas[i] + s * (self.alphas[j] - aj);
        let (di, dj) = (ai - self.alphas[i], aj - self.alphas[j]);
        // W(α + Δ) − W(α) restricted to coordinates i, j
        let lin = di + dj - self.y[i] * di * self.g[i] - self.y[j] * dj * self.g[j];
        let quad = di * di * self.kij(i, i)
            + dj * dj * self.kij(j, j)
            + 2.0 * s * di * dj * self.kij(i, j);
        lin - 0.5 * quad
    }

    /// Jointly optimizes αᵢ and αⱼ. Returns whether anything moved.
    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (ai, aj) = (self.alphas[i], self.alphas[j]);
        let (yi, yj) = (self.y[i], self.y[j]);
        let c = self.c;
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (c + aj - ai).min(c))
        } else {
            ((ai + aj - c).max(0.0), (ai + aj).min(c))
        };
        if hi - lo < self.eps {
            return false;
        }
        let eta = self.kij(i, i) + self.kij(j, j) - 2.0 * self.kij(i, j);
        let mut aj_new = if eta > 0.0 {
            (aj + yj * (self.errors[i] - self.errors[j]) / eta).clamp(lo, hi)
        } else {
            let (w_lo, w_hi) = (self.pair_objective(i, j, lo), self.pair_objective(i, j, hi));
            if w_lo > w_hi + self.eps {
                lo
            } else if w_hi > w_lo + self.eps {
                hi
            } else {
                aj
            }
        };
        if aj_new < self.eps {
            aj_new = 0.0;
        } else if aj_new > c - self.eps {
            aj_new = c;
        }
        if (aj_new - aj).abs() < self.eps * (aj_new + aj + self.eps) {
            return false;
        }
        let mut ai_new = ai + yi * yj * (aj - aj_new);
        if ai_new < self.eps {
            ai_new = 0.0;
        } else if ai_new > c - self.eps {
            ai_new = c;
        }
        let (di, dj) = ((ai_new - ai) * yi, (aj_new - aj) * yj);
        for k in 0..self.n {
            self.g[k] += di * self.kij(i, k) + dj * self.kij(j, k);
        }
        self.alphas[i] = ai_new;
        self.alphas[j] = aj_new;
        self.refresh_errors();
        true
    }

    fn partner(&self, i: usize) -> usize {
        let mut best = usize::MAX;
        let mut best_gap = f64::NEG_INFINITY;
        for j in 0..self.n {
            if j == i {
                continue;
            }
            let gap = (self.errors[i] - self.errors[j]).abs();
            if gap > best_gap {
                best_gap = gap;
                best = j;
            }
        }
        best
    }
}

/// Solves the dual on `data` as given (no scaling).
pub fn smo_solve(
    data: &[Sample],
    kernel: &KernelSpec,
    cfg: &TrainConfig,
) -> Result<DualSolution, SvmError> {
    solve(data, kernel, cfg, data.len() <= DENSE_GRAM_MAX)
}

fn solve(
    data: &[Sample],
    kernel: &KernelSpec,
    cfg: &TrainConfig,
    dense: bool,
) -> Result<DualSolution, SvmError> {
    cfg.validate()?;
    kernel.validate()?;
    let dim = check_dataset(data)?;
    let kernel = kernel.resolved(dim);
    let n = data.len();
    let k = if dense {
        Gram::Dense(gram_matrix(data, &kernel))
    } else {
        Gram::Lazy { data, kernel }
    };
    let max_passes = cfg.max_passes.unwrap_or(10 * n);

    let mut s = Solver {
        n,
        k,
        y: data.iter().map(|s| f64::from(s.y)).collect(),
        alphas: vec![0.0; n],
        g: vec![0.0; n],
        errors: vec![0.0; n],
        bias: 0.0,
        c: cfg.c,
        eps: cfg.eps,
    };
    s.refresh_errors();

    let mut passes = 0;
    let mut converged = false;
    while passes < max_passes {
        passes += 1;
        let mut violators = 0;
        let mut moved = 0;
        for i in 0..n {
            if !s.violates(i, cfg.tol) {
                continue;
            }
            violators += 1;
            let first = s.partner(i);
            if s.take_step(i, first) || (0..n).any(|j| j != first && s.take_step(i, j)) {
                moved += 1;
            }
        }
        if violators == 0 {
            converged = true;
            break;
        }
        if moved == 0 {
            break;
        }
    }
    if !converged {
        converged = (0..n).all(|i| !s.violates(i, cfg.tol));
    }
    Ok(DualSolution {
        alphas: s.alphas,
        bias: s.bias,
        converged,
        passes,
    })
}
