//! Dual objective and an exhaustive grid search over the dual, for checking
//! the SMO solver on tiny problems.

use super::{
    smo::check_dataset, smo::compute_bias, smo::gram_matrix, KernelSpec, Sample, SvmError,
};

/// `W(α) = Σ αᵢ − ½ ΣΣ αᵢ αⱼ yᵢ yⱼ K(xᵢ, xⱼ)`.
///
/// # Panics
/// If `alphas` and `data` differ in length.
pub fn dual_objective(data: &[Sample], kernel: &KernelSpec, alphas: &[f64]) -> f64 {
    assert_eq!(data.len(), alphas.len(), "one alpha per sample");
    let dim = data.first().map_or(0, |s| s.x.len());
    let kernel = kernel.resolved(dim);
    let mut w: f64 = alphas.iter().sum();
    for (i, si) in data.iter().enumerate() {
        for (j, sj) in data.iter().enumerate() {
            let yy = f64::from(si.y * sj.y);
            w -= 0.5 * alphas[i] * alphas[j] * yy * kernel.eval_unchecked(&si.x, &sj.x);
        }
    }
    w
}

/// Training-point decision values `f(xᵢ) = Σⱼ αⱼ yⱼ K(xⱼ, xᵢ) + b` for an
/// arbitrary feasible `alphas`, with `b` chosen the way the solver chooses
/// it (mean over free vectors, else the middle of the feasible interval).
pub fn decision_values(
    data: &[Sample],
    kernel: &KernelSpec,
    alphas: &[f64],
    c: f64,
    eps: f64,
) -> Vec<f64> {
    assert_eq!(data.len(), alphas.len(), "one alpha per sample");
    let dim = data.first().map_or(0, |s| s.x.len());
    let kernel = kernel.resolved(dim);
    let y: Vec<f64> = data.iter().map(|s| f64::from(s.y)).collect();
    let g: Vec<f64> = data
        .iter()
        .map(|si| {
            data.iter()
                .zip(alphas)
                .zip(&y)
                .map(|((sj, &a), &yj)| a * yj * kernel.eval_unchecked(&sj.x, &si.x))
                .sum()
        })
        .collect();
    let b = compute_bias(alphas, &y, &g, c, eps);
    g.into_iter().map(|v| v + b).collect()
}

/// Indices of samples breaking the KKT conditions at tolerance `tol`:
/// `α = 0 ⇒ y f ≥ 1 − tol`, `0 < α < C ⇒ |y f − 1| ≤ tol`,
/// `α = C ⇒ y f ≤ 1 + tol`. An α within `eps` of a bound counts as at it.
pub fn kkt_violations(
    data: &[Sample],
    alphas: &[f64],
    decision: &[f64],
    c: f64,
    tol: f64,
    eps: f64,
) -> Vec<usize> {
    (0..data.len())
        .filter(|&i| {
            let m = f64::from(data[i].y) * decision[i];
            let a = alphas[i];
            let low_ok = a > eps || m >= 1.0 - tol;
            let high_ok = a < c - eps || m <= 1.0 + tol;
            let box_ok = (-eps..=c + eps).contains(&a);
            !(low_ok && high_ok && box_ok)
        })
        .collect()
}

pub const BRUTE_FORCE_MAX_SAMPLES: usize = 6;

/// Grid argmax of `W` over `α ∈ {0, C/g, …, C}ⁿ` with `|Σ αᵢ yᵢ| ≤ C/g`.
/// Ties keep the first point in lexicographic order.
pub fn brute_force_qp(
    data: &[Sample],
    kernel: &KernelSpec,
    c: f64,
    grid_steps: usize,
) -> Result<Vec<f64>, SvmError> {
    if data.len() > BRUTE_FORCE_MAX_SAMPLES {
        return Err(SvmError::TooLarge(data.len()));
    }
    if grid_steps == 0 {
        return Err(SvmError::InvalidConfig("grid_steps must be ≥ 1".into()));
    }
    let dim = check_dataset(data)?;
    let kernel = kernel.resolved(dim);
    let n = data.len();
    let k = gram_matrix(data, &kernel);
    let q: Vec<f64> = (0..n * n)
        .map(|idx| f64::from(data[idx / n].y * data[idx % n].y) * k[idx])
        .collect();
    let step = c / grid_steps as f64;
    let y: Vec<f64> = data.iter().map(|s| f64::from(s.y)).collect();

    struct Search<'a> {
        n: usize,
        q: &'a [f64],
        y: &'a [f64],
        step: f64,
        grid: usize,
        c: f64,
        current: Vec<f64>,
        best: Option<(f64, Vec<f64>)>,
    }

    impl Search<'_> {
        // `cross[k] = Σ_{i<depth} αᵢ Q_ik`, `w` = objective over the first `depth` coordinates
        fn visit(&mut self, depth: usize, w: f64, balance: f64, cross: &[f64]) {
            let remaining = (self.n - depth) as f64 * self.c;
            if balance.abs() - remaining > self.step * (1.0 + 1e-12) {
                return;
            }
            if depth == self.n {
                if balance.abs() <= self.step * (1.0 + 1e-12)
                    && self.best.as_ref().is_none_or(|(bw, _)| w > *bw)
                {
                    self.best = Some((w, self.current.clone()));
                }
                return;
            }
            let mut next = cross.to_vec();
            for g in 0..=self.grid {
                let a = if g == self.grid {
                    self.c
                } else {
                    g as f64 * self.step
                };
                let dw = a - a * cross[depth] - 0.5 * a * a * self.q[depth * self.n + depth];
                for (kk, slot) in next.iter_mut().enumerate() {
                    *slot = cross[kk] + a * self.q[depth * self.n + kk];
                }
                self.current[depth] = a;
                self.visit(depth + 1, w + dw, balance + a * self.y[depth], &next);
            }
            self.current[depth] = 0.0;
        }
    }

    let mut search = Search {
        n,
        q: &q,
        y: &y,
        step,
        grid: grid_steps,
        c,
        current: vec![0.0; n],
        best: None,
    };
    search.visit(0, 0.0, 0.0, &vec![0.0; n]);
    Ok(search.best.expect("α = 0 is always feasible").1)
}
