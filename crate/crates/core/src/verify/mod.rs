//! Sampled pass/fail checks with quantified residuals.

mod report;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_sample, gradient_norm_sq, invert_metric, laplacian, scalar_curvature};
use crate::error::Result;
use crate::geometry::{FdConfig, MetricField, ScalarField};
use crate::immerse::{pullback_metric, ImmersionMap};
use crate::warp::EinsteinData;

pub use report::{EngineConfig, VerificationReport};

/// Default tolerance of checks that only take first derivatives.
pub const ISOMETRY_TOL: f64 = 1e-6;
/// Default tolerance of checks that go through nested finite differences.
pub const CURVATURE_TOL: f64 = 1e-3;
pub const DEFAULT_SAMPLES: usize = 64;
/// Slack on `‖∇φ‖ ≤ 1`.
pub const GRADIENT_SLACK: f64 = 1e-8;

/// Outcome of one check over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub estimated_constant: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub samples_used: usize,
    /// Per-sample residuals, in sample order; not serialised.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl CheckResult {
    /// `passed` is `max_residual <= tolerance`; any NaN residual fails.
    pub fn from_residuals(
        check_id: impl Into<String>,
        residuals: Vec<f64>,
        tolerance: f64,
        estimated_constant: Option<f64>,
    ) -> Self {
        let n = residuals.len();
        let any_nan = residuals.iter().any(|r| r.is_nan());
        let max_residual = if any_nan {
            f64::MAX
        } else {
            residuals.iter().fold(0.0f64, |a, &r| a.max(r.abs()))
        };
        let mean_residual = if n == 0 || any_nan {
            max_residual
        } else {
            residuals.iter().map(|r| r.abs()).sum::<f64>() / n as f64
        };
        Self {
            check_id: check_id.into(),
            max_residual,
            mean_residual,
            estimated_constant,
            tolerance,
            passed: n > 0 && max_residual <= tolerance,
            samples_used: n,
            residuals: residuals.iter().map(|r| r.abs()).collect(),
        }
    }

    /// Same result under another id.
    pub fn renamed(mut self, id: impl Into<String>) -> Self {
        self.check_id = id.into();
        self
    }
}

fn par_map<T, F>(samples: &[Vec<f64>], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T> + Sync + Send,
{
    samples.par_iter().map(|p| f(p)).collect()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

/// Fits `Ric ≈ ρ̂ g` by least squares over all sampled `(i <= j)` components;
/// per-sample residual `max |Ric_ij − ρ̂ g_ij| / (1 + |ρ̂| ‖g‖∞)`.
pub fn einstein_check(g: &MetricField, samples: &[Vec<f64>], tol: f64, cfg: &FdConfig) -> Result<CheckResult> {
    Ok(einstein_fit(g, samples, tol, cfg)?.0)
}

/// [`einstein_check`] plus the scalar curvature at every sample.
pub fn einstein_fit(
    g: &MetricField,
    samples: &[Vec<f64>],
    tol: f64,
    cfg: &FdConfig,
) -> Result<(CheckResult, Vec<f64>)> {
    let curv = par_map(samples, |p| curvature_sample(g, p, cfg))?;
    let d = g.dim();
    let (mut num, mut den) = (0.0, 0.0);
    for c in &curv {
        for i in 0..d {
            for j in i..d {
                num += c.ricci[(i, j)] * c.metric[(i, j)];
                den += c.metric[(i, j)].powi(2);
            }
        }
    }
    let rho = if den > 0.0 { num / den } else { 0.0 };
    let residuals = curv
        .iter()
        .map(|c| max_abs(&(&c.ricci - &c.metric * rho)) / (1.0 + rho.abs() * max_abs(&c.metric)))
        .collect();
    let scalars = curv.iter().map(|c| c.scalar).collect();
    Ok((CheckResult::from_residuals("einstein", residuals, tol, Some(rho)), scalars))
}

/// `max |pullback(f) − g_expected| / ‖g_expected‖∞` per sample.
pub fn isometry_check(
    f: &ImmersionMap,
    expected: &MetricField,
    samples: &[Vec<f64>],
    tol: f64,
    cfg: &FdConfig,
) -> Result<CheckResult> {
    let residuals = par_map(samples, |p| {
        let pb = pullback_metric(f, p, cfg)?;
        let ge = expected.value(p)?;
        Ok(max_abs(&(pb - &ge)) / max_abs(&ge))
    })?;
    Ok(CheckResult::from_residuals("isometry", residuals, tol, None))
}

/// `(n−m)Δφ − φ(S_L − mρ)` with `S_L` computed from the base metric; the
/// estimated constant is the mean sampled `S_L`.
pub fn trace_identity_check(
    data: &EinsteinData,
    base: &MetricField,
    phi: &ScalarField,
    samples: &[Vec<f64>],
    tol: f64,
    cfg: &FdConfig,
) -> Result<CheckResult> {
    let (n, m) = (data.n as f64, data.m as f64);
    let rows = par_map(samples, |p| {
        let s_l = scalar_curvature(base, p, cfg)?;
        let lap = laplacian(phi, base, p, cfg)?;
        let v = phi.value(p)?;
        Ok(((n - m) * lap - v * (s_l - m * data.rho), s_l))
    })?;
    let mean_s = rows.iter().map(|r| r.1).sum::<f64>() / rows.len().max(1) as f64;
    Ok(CheckResult::from_residuals(
        "trace-identity",
        rows.into_iter().map(|r| r.0).collect(),
        tol,
        Some(mean_s),
    ))
}

/// `S_L + (n−2m)ρ − (n−m)(n−m−1)(ε − ‖∇φ‖²)/φ²` per sample.
pub fn combined_identity_check(
    data: &EinsteinData,
    base: &MetricField,
    phi: &ScalarField,
    samples: &[Vec<f64>],
    tol: f64,
    cfg: &FdConfig,
) -> Result<CheckResult> {
    let (n, m) = (data.n as f64, data.m as f64);
    let k = (n - m) * (n - m - 1.0);
    let residuals = par_map(samples, |p| {
        let s_l = scalar_curvature(base, p, cfg)?;
        let grad2 = gradient_norm_sq(phi, base, p, cfg)?;
        let v = phi.value(p)?;
        Ok(s_l + (n - 2.0 * m) * data.rho - k * (data.eps.value() - grad2) / (v * v))
    })?;
    Ok(CheckResult::from_residuals("combined-identity", residuals, tol, None))
}

/// `‖∇φ‖² − 1 + φ²/a²`: the `ε = 1` form of the combined identity with the
/// bound `a` from the scalar curvature.
pub fn gradient_identity_check(
    base: &MetricField,
    phi: &ScalarField,
    a: f64,
    samples: &[Vec<f64>],
    tol: f64,
    cfg: &FdConfig,
) -> Result<CheckResult> {
    let residuals = par_map(samples, |p| {
        let grad2 = gradient_norm_sq(phi, base, p, cfg)?;
        let v = phi.value(p)?;
        Ok(grad2 - 1.0 + v * v / (a * a))
    })?;
    Ok(CheckResult::from_residuals("gradient-identity", residuals, tol, Some(a)))
}

/// `‖∇φ‖` for `φ` the last ambient coordinate of an isometric profile, i.e.
/// the length of the tangential part of the last basis vector. The residual
/// is the excess over 1; the estimated constant is `max ‖∇φ‖`.
pub fn gradient_bound_check(profile: &ImmersionMap, samples: &[Vec<f64>], cfg: &FdConfig) -> Result<CheckResult> {
    let last = profile.ambient_dim() - 1;
    let norms = par_map(samples, |p| {
        let j = profile.jacobian(p, cfg)?;
        let g = pullback_metric(profile, p, cfg)?;
        let inv = invert_metric(&g)?;
        let row = j.row(last).transpose();
        Ok((row.transpose() * inv * &row)[(0, 0)].max(0.0).sqrt())
    })?;
    let max = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let residuals = norms.iter().map(|&v| (v - 1.0).max(0.0)).collect();
    Ok(CheckResult::from_residuals("gradient-bound", residuals, GRADIENT_SLACK, Some(max)))
}

/// `max |f(p) − median f|`; the estimated constant is the median.
pub fn constancy_check(field: &ScalarField, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let values = par_map(samples, |p| field.value(p))?;
    let median = median(&values);
    let residuals = values.iter().map(|v| v - median).collect();
    Ok(CheckResult::from_residuals("constancy", residuals, tol, Some(median)))
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    if s.len() % 2 == 1 {
        s[k]
    } else {
        0.5 * (s[k - 1] + s[k])
    }
}

/// `|estimate − expected|` as a single-sample check.
pub fn constant_check(id: &str, estimate: f64, expected: f64, tol: f64) -> CheckResult {
    CheckResult::from_residuals(id, vec![estimate - expected], tol, Some(estimate))
}

/// Passes when `value >= threshold`; residual `max(0, threshold − value)`.
pub fn lower_bound_check(id: &str, values: Vec<f64>, threshold: f64, tol: f64) -> CheckResult {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let residuals = values.iter().map(|v| (threshold - v).max(0.0)).collect();
    CheckResult::from_residuals(id, residuals, tol, Some(min))
}
