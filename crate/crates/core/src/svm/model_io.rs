//! Plain-text model files.
//!
//! ```text
//! mammocad-svm-model
//! version = 1
//! kernel = rbf
//! gamma = 4.0000000000000001e-2
//! coef = 1.0000000000000000e0
//! degree = 3
//! sigma = none
//! c = 1.0000000000000000e0
//! bias = -1.2345678901234567e-1
//! feature_count = 2
//! feature_names = area solidity
//! scaler_mean = <feature_count reals>
//! scaler_std = <feature_count reals>
//! support_vector_count = 3
//! coeffs = <support_vector_count reals>
//! support_vectors
//! <support_vector_count lines of feature_count reals>
//! end
//! ```
//!
//! Keys appear in exactly this order. Reals are written with 17
//! significant digits, so every stored value reads back bit-exactly.

use std::fmt::Write as _;

use super::{KernelKind, KernelSpec, ScalerStats, SvmError, SvmModel};

pub const MODEL_MAGIC: &str = "mammocad-svm-model";
pub const MODEL_VERSION: u32 = 1;

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn reals(vs: &[f64]) -> String {
    vs.iter().map(|&v| real(v)).collect::<Vec<_>>().join(" ")
}

pub fn save_model(model: &SvmModel) -> Vec<u8> {
    let k = &model.kernel;
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC}");
    let _ = writeln!(out, "version = {MODEL_VERSION}");
    let _ = writeln!(out, "kernel = {}", k.kind.as_str());
    let _ = writeln!(out, "gamma = {}", k.gamma.map_or("none".into(), real));
    let _ = writeln!(out, "coef = {}", real(k.coef));
    let _ = writeln!(out, "degree = {}", k.degree);
    let _ = writeln!(out, "sigma = {}", k.sigma.map_or("none".into(), real));
    let _ = writeln!(out, "c = {}", real(model.c));
    let _ = writeln!(out, "bias = {}", real(model.bias));
    let _ = writeln!(out, "feature_count = {}", model.scaler.dim());
    let _ = writeln!(out, "feature_names = {}", model.feature_names.join(" "));
    let _ = writeln!(out, "scaler_mean = {}", reals(&model.scaler.mean));
    let _ = writeln!(out, "scaler_std = {}", reals(&model.scaler.std));
    let _ = writeln!(
        out,
        "support_vector_count = {}",
        model.support_vectors.len()
    );
    let _ = writeln!(out, "coeffs = {}", reals(&model.coeffs));
    let _ = writeln!(out, "support_vectors");
    for sv in &model.support_vectors {
        let _ = writeln!(out, "{}", reals(sv));
    }
    let _ = writeln!(out, "end");
    out.into_bytes()
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

fn violation(msg: impl Into<String>) -> SvmError {
    SvmError::SchemaViolation(msg.into())
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), SvmError> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .ok_or_else(|| violation(format!("document ends before {what}")))
    }

    fn field(&mut self, key: &str) -> Result<&'a str, SvmError> {
        let (no, line) = self.next_line(key)?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| violation(format!("line {no}: expected `{key} = …`")))?;
        if k.trim() != key {
            return Err(violation(format!(
                "line {no}: expected key `{key}`, found `{}`",
                k.trim()
            )));
        }
        Ok(v.trim())
    }

    fn literal(&mut self, expected: &str) -> Result<(), SvmError> {
        let (no, line) = self.next_line(expected)?;
        if line.trim() != expected {
            return Err(violation(format!("line {no}: expected `{expected}`")));
        }
        Ok(())
    }
}

fn parse_real(s: &str, what: &str) -> Result<f64, SvmError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| violation(format!("{what}: `{s}` is not a finite real")))
}

fn parse_opt_real(s: &str, what: &str) -> Result<Option<f64>, SvmError> {
    if s == "none" {
        Ok(None)
    } else {
        parse_real(s, what).map(Some)
    }
}

fn parse_count(s: &str, what: &str) -> Result<usize, SvmError> {
    s.parse::<usize>()
        .map_err(|_| violation(format!("{what}: `{s}` is not a count")))
}

fn parse_reals(s: &str, count: usize, what: &str) -> Result<Vec<f64>, SvmError> {
    let vs = s
        .split_whitespace()
        .map(|t| parse_real(t, what))
        .collect::<Result<Vec<_>, _>>()?;
    if vs.len() != count {
        return Err(violation(format!(
            "{what}: expected {count} values, found {}",
            vs.len()
        )));
    }
    Ok(vs)
}

pub fn load_model(bytes: &[u8]) -> Result<SvmModel, SvmError> {
    let text = std::str::from_utf8(bytes).map_err(|_| violation("model file is not UTF-8"))?;
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    lines.literal(MODEL_MAGIC)?;
    let version = lines.field("version")?;
    if version != MODEL_VERSION.to_string() {
        return Err(SvmError::UnsupportedVersion(version.to_string()));
    }
    let kind_str = lines.field("kernel")?;
    let kind = KernelKind::parse(kind_str)
        .ok_or_else(|| violation(format!("unknown kernel `{kind_str}`")))?;
    let gamma = parse_opt_real(lines.field("gamma")?, "gamma")?;
    let coef = parse_real(lines.field("coef")?, "coef")?;
    let degree = lines
        .field("degree")?
        .parse::<u32>()
        .map_err(|_| violation("degree is not an integer"))?;
    let sigma = parse_opt_real(lines.field("sigma")?, "sigma")?;
    let c = parse_real(lines.field("c")?, "c")?;
    let bias = parse_real(lines.field("bias")?, "bias")?;
    let dim = parse_count(lines.field("feature_count")?, "feature_count")?;
    let feature_names: Vec<String> = lines
        .field("feature_names")?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    if feature_names.len() != dim {
        return Err(violation(format!(
            "feature_names: expected {dim} names, found {}",
            feature_names.len()
        )));
    }
    let mean = parse_reals(lines.field("scaler_mean")?, dim, "scaler_mean")?;
    let std = parse_reals(lines.field("scaler_std")?, dim, "scaler_std")?;
    let n_sv = parse_count(lines.field("support_vector_count")?, "support_vector_count")?;
    let coeffs = parse_reals(lines.field("coeffs")?, n_sv, "coeffs")?;
    lines.literal("support_vectors")?;
    let mut support_vectors = Vec::with_capacity(n_sv);
    for i in 0..n_sv {
        let (_, line) = lines.next_line("support vector rows")?;
        support_vectors.push(parse_reals(line, dim, &format!("support vector {i}"))?);
    }
    lines.literal("end")?;

    let kernel = KernelSpec {
        kind,
        gamma,
        coef,
        degree,
        sigma,
    };
    kernel.validate().map_err(|e| violation(e.to_string()))?;
    if std.iter().any(|&s| s < 0.0) {
        return Err(violation("negative scaler_std"));
    }
    Ok(SvmModel {
        support_vectors,
        coeffs,
        bias,
        kernel,
        scaler: ScalerStats { mean, std },
        c,
        feature_names,
    })
}
