//! Central finite-difference stencils.
//!
//! Steps are relative: along coordinate `i` the absolute step is
//! `cfg.step * chart.scale(i)`. Every stencil point is checked against the
//! chart box before the field is evaluated.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::chart::Chart;
use crate::error::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FdOrder {
    Second,
    Fourth,
}

impl FdOrder {
    pub fn as_usize(self) -> usize {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }

    pub fn from_usize(order: usize) -> Result<Self> {
        match order {
            2 => Ok(FdOrder::Second),
            4 => Ok(FdOrder::Fourth),
            other => Err(GeomError::InvalidFdConfig(format!(
                "stencil order must be 2 or 4, got {other}"
            ))),
        }
    }

    /// Stencil half-width in units of the step.
    fn radius(self) -> f64 {
        match self {
            FdOrder::Second => 1.0,
            FdOrder::Fourth => 2.0,
        }
    }

    /// Antisymmetric pairs `(k, w)` and denominator `D`:
    /// `f' ≈ Σ w (f(x+kh) − f(x−kh)) / (D h)`.
    fn first(self) -> (&'static [(f64, f64)], f64) {
        match self {
            FdOrder::Second => (&[(1.0, 1.0)], 2.0),
            FdOrder::Fourth => (&[(1.0, 8.0), (2.0, -1.0)], 12.0),
        }
    }

    /// Centre weight, symmetric pairs and denominator:
    /// `f'' ≈ (c f(x) + Σ w (f(x+kh) + f(x−kh))) / (D h²)`.
    fn second(self) -> (f64, &'static [(f64, f64)], f64) {
        match self {
            FdOrder::Second => (-2.0, &[(1.0, 1.0)], 1.0),
            FdOrder::Fourth => (-30.0, &[(1.0, 16.0), (2.0, -1.0)], 12.0),
        }
    }
}

/// Relative step and stencil order shared by every derivative in a computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub step: f64,
    pub order: FdOrder,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            step: Self::DEFAULT_STEP,
            order: FdOrder::Fourth,
        }
    }
}

impl FdConfig {
    /// Truncation near the 0.15 rad pole margin dominates at larger steps;
    /// round-off in nested differences dominates below ~1e-4.
    pub const DEFAULT_STEP: f64 = 2.5e-4;
    pub const MIN_STEP: f64 = 1e-6;
    pub const MAX_STEP: f64 = 1e-1;

    pub fn new(step: f64, order: FdOrder) -> Result<Self> {
        if !(Self::MIN_STEP..=Self::MAX_STEP).contains(&step) {
            return Err(GeomError::InvalidFdConfig(format!(
                "step {step} outside [{}, {}]",
                Self::MIN_STEP,
                Self::MAX_STEP
            )));
        }
        Ok(Self { step, order })
    }

    pub(crate) fn abs_step(&self, chart: &Chart, i: usize) -> f64 {
        self.step * chart.scale(i)
    }
}

/// Values that can be linearly combined by a stencil.
pub trait Linear: Sized {
    fn scale_by(self, w: f64) -> Self;
    fn add_scaled(&mut self, w: f64, other: &Self);
}

impl Linear for f64 {
    fn scale_by(self, w: f64) -> Self {
        self * w
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += w * other;
    }
}

impl Linear for Vec<f64> {
    fn scale_by(mut self, w: f64) -> Self {
        self.iter_mut().for_each(|x| *x *= w);
        self
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += w * b;
        }
    }
}

impl Linear for DMatrix<f64> {
    fn scale_by(self, w: f64) -> Self {
        self * w
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        self.zip_apply(other, |a, b| *a += w * b);
    }
}

fn check_stencil(chart: &Chart, p: &[f64], i: usize, reach: f64) -> Result<()> {
    let (lo, hi) = (chart.lower()[i], chart.upper()[i]);
    // Slack absorbs rounding when a point sits exactly one reach from the edge.
    let slack = 1e-12 * chart.scale(i);
    for value in [p[i] - reach, p[i] + reach] {
        if value < lo - slack || value > hi + slack {
            return Err(GeomError::BoundaryViolation {
                coord: i,
                value,
                lower: lo,
                upper: hi,
            });
        }
    }
    Ok(())
}

fn check_point(chart: &Chart, p: &[f64]) -> Result<()> {
    if p.len() != chart.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: chart.dim(),
            found: p.len(),
        });
    }
    Ok(())
}

fn antisymmetric<T, F>(pairs: &[(f64, f64)], mut at: F) -> Result<T>
where
    T: Linear,
    F: FnMut(f64) -> Result<T>,
{
    let mut acc: Option<T> = None;
    for &(k, w) in pairs {
        let mut d = at(k)?;
        d.add_scaled(-1.0, &at(-k)?);
        match acc.as_mut() {
            None => acc = Some(d.scale_by(w)),
            Some(a) => a.add_scaled(w, &d),
        }
    }
    Ok(acc.expect("stencils are non-empty"))
}

/// Step actually realised at `x`, so that `x + h` is exact.
fn realised_step(x: f64, h: f64) -> f64 {
    (x + h) - x
}

/// First derivative along coordinate `i` of an arbitrary linear-valued map.
pub fn diff1<T, F>(chart: &Chart, p: &[f64], i: usize, cfg: &FdConfig, mut f: F) -> Result<T>
where
    T: Linear,
    F: FnMut(&[f64]) -> Result<T>,
{
    check_point(chart, p)?;
    let h = realised_step(p[i], cfg.abs_step(chart, i));
    check_stencil(chart, p, i, cfg.order.radius() * h)?;
    let (pairs, den) = cfg.order.first();
    let mut q = p.to_vec();
    let acc = antisymmetric(pairs, |off| {
        q[i] = p[i] + off * h;
        f(&q)
    })?;
    Ok(acc.scale_by(1.0 / (den * h)))
}

/// Second derivative `d^2/dx_i dx_j`. The pair is canonicalised to `i <= j`
/// so that swapping the indices evaluates the identical stencil.
pub fn diff2<T, F>(
    chart: &Chart,
    p: &[f64],
    i: usize,
    j: usize,
    cfg: &FdConfig,
    mut f: F,
) -> Result<T>
where
    T: Linear,
    F: FnMut(&[f64]) -> Result<T>,
{
    check_point(chart, p)?;
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    let hi = realised_step(p[i], cfg.abs_step(chart, i));
    let reach = cfg.order.radius();
    check_stencil(chart, p, i, reach * hi)?;
    let mut q = p.to_vec();
    if i == j {
        let (centre, pairs, den) = cfg.order.second();
        let mut acc = f(&q)?.scale_by(centre);
        for &(k, w) in pairs {
            q[i] = p[i] + k * hi;
            let plus = f(&q)?;
            q[i] = p[i] - k * hi;
            let minus = f(&q)?;
            acc.add_scaled(w, &plus);
            acc.add_scaled(w, &minus);
        }
        return Ok(acc.scale_by(1.0 / (den * hi * hi)));
    }
    let hj = realised_step(p[j], cfg.abs_step(chart, j));
    check_stencil(chart, p, j, reach * hj)?;
    let (pairs, den) = cfg.order.first();
    let acc = antisymmetric(pairs, |off_i| {
        antisymmetric(pairs, |off_j| {
            q[i] = p[i] + off_i * hi;
            q[j] = p[j] + off_j * hj;
            f(&q)
        })
    })?;
    Ok(acc.scale_by(1.0 / (den * den * hi * hj)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> Chart {
        Chart::new("plane", &["x", "y"], &[(-3.0, 3.0), (-3.0, 3.0)], 0.1).unwrap()
    }

    #[test]
    fn config_bounds() {
        assert!(FdConfig::new(1e-7, FdOrder::Fourth).is_err());
        assert!(FdConfig::new(0.2, FdOrder::Fourth).is_err());
        assert!(FdConfig::new(1e-3, FdOrder::Second).is_ok());
        assert!(FdOrder::from_usize(3).is_err());
    }

    #[test]
    fn stencil_near_edge_is_rejected() {
        let c = plane();
        let cfg = FdConfig::default();
        let err = diff1(&c, &[2.999, 0.0], 0, &cfg, |q| Ok(q[0])).unwrap_err();
        assert!(matches!(err, GeomError::BoundaryViolation { coord: 0, .. }));
        assert!(diff1(&c, &[0.0], 0, &cfg, |q| Ok(q[0])).is_err());
    }

    #[test]
    fn second_order_stencils() {
        let c = plane();
        let cfg = FdConfig::new(1e-3, FdOrder::Second).unwrap();
        let d = diff1(&c, &[0.5, 0.2], 0, &cfg, |q| Ok(q[0] * q[0] * q[1])).unwrap();
        assert!((d - 2.0 * 0.5 * 0.2).abs() < 1e-9);
        let d2 = diff2(&c, &[0.5, 0.2], 0, 1, &cfg, |q| Ok(q[0] * q[0] * q[1])).unwrap();
        assert!((d2 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn matrix_valued_derivative() {
        let c = plane();
        let cfg = FdConfig::default();
        let m = diff1(&c, &[1.0, 2.0], 1, &cfg, |q| {
            Ok(DMatrix::from_row_slice(1, 2, &[q[1] * q[1], 3.0 * q[0]]))
        })
        .unwrap();
        assert!((m[(0, 0)] - 4.0).abs() < 1e-9);
        assert!(m[(0, 1)].abs() < 1e-9);
    }
}
