//! Standard model metrics on single charts.

use std::f64::consts::PI;

use super::chart::Chart;
use super::field::MetricField;
use crate::error::{GeomError, Result};

/// Distance kept between sampled points and the coordinate singularities of
/// spherical coordinates.
pub const POLE_MARGIN: f64 = 0.15;

/// Spherical coordinates on `S^k`: `k-1` polar angles in `[0, π]` followed by
/// one azimuth in `[0, 2π]`, all with [`POLE_MARGIN`].
pub fn sphere_chart(k: usize) -> Result<Chart> {
    if k == 0 {
        return Err(GeomError::InvalidChart("sphere dimension must be >= 1".into()));
    }
    let names: Vec<String> = (1..=k).map(|i| format!("theta{i}")).collect();
    let mut bounds = vec![(0.0, PI); k - 1];
    bounds.push((0.0, 2.0 * PI));
    Chart::with_margins(format!("S{k}"), names, &bounds, &vec![POLE_MARGIN; k])
}

/// Unit-sphere point for spherical coordinates `theta` (length `k`), in `R^{k+1}`.
///
/// `x_0 = cos θ1`, `x_1 = sin θ1 cos θ2`, ..., `x_k = sin θ1 ... sin θ_k`;
/// for `k = 1` this is `(cos θ, sin θ)`.
pub fn unit_sphere_point(theta: &[f64]) -> Vec<f64> {
    let k = theta.len();
    let mut out = Vec::with_capacity(k + 1);
    let mut prod = 1.0;
    for &a in theta {
        out.push(prod * a.cos());
        prod *= a.sin();
    }
    out.push(prod);
    out
}

/// Diagonal of the round metric of `S^k(1)` in spherical coordinates.
pub fn unit_round_diagonal(theta: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(theta.len());
    let mut prod = 1.0;
    for &a in theta {
        out.push(prod);
        prod *= a.sin().powi(2);
    }
    out
}

/// Round metric of the radius-`r` sphere `S^k(r)`.
pub fn round_sphere(k: usize, r: f64) -> Result<MetricField> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeomError::InvalidChart(format!("sphere radius must be positive, got {r}")));
    }
    let r2 = r * r;
    Ok(MetricField::diagonal(sphere_chart(k)?, move |p| {
        unit_round_diagonal(p).into_iter().map(|d| r2 * d).collect()
    }))
}

/// Upper half-space model of hyperbolic space with constant sectional
/// curvature `-kappa²`: `g = δ / (kappa x_last)²`, on a box with
/// `x_last ∈ [1, 2]` and the remaining coordinates in `[-0.5, 0.5]`.
pub fn hyperbolic(k: usize, kappa: f64) -> Result<MetricField> {
    if k == 0 || !(kappa > 0.0) {
        return Err(GeomError::InvalidChart(format!(
            "hyperbolic space needs k >= 1 and kappa > 0 (k = {k}, kappa = {kappa})"
        )));
    }
    let mut bounds = vec![(-0.5, 0.5); k - 1];
    bounds.push((1.0, 2.0));
    let names: Vec<String> = (0..k).map(|i| format!("u{i}")).collect();
    let chart = Chart::with_margins(format!("H{k}"), names, &bounds, &vec![0.05; k])?;
    Ok(MetricField::diagonal(chart, move |p| {
        let w = 1.0 / (kappa * p[k - 1]).powi(2);
        vec![w; k]
    }))
}

/// Flat metric on `[lo, hi]^dim`.
pub fn flat_box(dim: usize, lo: f64, hi: f64) -> Result<MetricField> {
    Ok(MetricField::euclidean(Chart::cube("R", dim, lo, hi)?))
}

/// Simply connected space form of dimension `k` with Ricci constant
/// `(k-1)·curvature`: a round sphere, a flat box or hyperbolic space.
pub fn space_form(k: usize, curvature: f64) -> Result<MetricField> {
    if curvature > 0.0 {
        round_sphere(k, 1.0 / curvature.sqrt())
    } else if curvature < 0.0 {
        hyperbolic(k, (-curvature).sqrt())
    } else {
        flat_box(k, -0.5, 0.5)
    }
}
