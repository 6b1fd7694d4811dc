use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ode::rk4;
use super::{EinsteinData, Eps};
use crate::error::{GeomError, Result};
use crate::geometry::{Chart, ScalarField};

/// Default RK4 step for [`gs_warp`].
pub const GS_DEFAULT_STEP: f64 = 1e-3;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarpCase {
    Zero,
    Positive,
    Negative,
    Gs,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WarpParams {
    pub a: f64,
    pub b: f64,
    pub t0: f64,
    /// GS constant, negative for the GS case.
    pub c: f64,
}

/// Interval of admissible `t`; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
    pub closed: bool,
}

impl Domain {
    pub fn open(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            closed: false,
        }
    }

    pub fn closed(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            closed: true,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        if self.closed {
            t >= self.lower && t <= self.upper
        } else {
            t > self.lower && t < self.upper
        }
    }

    /// Whether `[lo, hi]` fits, up to open endpoints.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        lo <= hi
            && (self.contains(lo) || (!self.closed && lo == self.lower))
            && (self.contains(hi) || (!self.closed && hi == self.upper))
    }
}

/// A warping function `φ(t)` with its first two derivatives.
#[derive(Clone)]
pub struct WarpSolution {
    pub case: WarpCase,
    pub params: WarpParams,
    pub data: EinsteinData,
    pub domain: Domain,
    phi: RealFn,
    phi1: RealFn,
    phi2: RealFn,
    phi3: Option<RealFn>,
}

impl std::fmt::Debug for WarpSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WarpSolution")
            .field("case", &self.case)
            .field("params", &self.params)
            .field("data", &self.data)
            .field("domain", &self.domain)
            .finish()
    }
}

impl WarpSolution {
    /// User-supplied `φ, φ', φ''`; third derivatives come from differencing `φ''`.
    pub fn custom<F0, F1, F2>(data: EinsteinData, phi: F0, phi1: F1, phi2: F2, domain: Domain) -> Self
    where
        F0: Fn(f64) -> f64 + Send + Sync + 'static,
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            case: WarpCase::Custom,
            params: WarpParams::default(),
            data,
            domain,
            phi: Arc::new(phi),
            phi1: Arc::new(phi1),
            phi2: Arc::new(phi2),
            phi3: None,
        }
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.domain.contains(t) {
            Ok(())
        } else {
            Err(GeomError::OutsideDomain {
                t,
                lower: self.domain.lower,
                upper: self.domain.upper,
            })
        }
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok((self.phi)(t))
    }

    pub fn phi1(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok((self.phi1)(t))
    }

    pub fn phi2(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok((self.phi2)(t))
    }

    /// `(φ, φ', φ'')` at `t`.
    pub fn jet(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check(t)?;
        Ok(((self.phi)(t), (self.phi1)(t), (self.phi2)(t)))
    }

    /// `φ'''`, analytic where available, otherwise a central difference of `φ''`.
    pub fn phi3(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        if let Some(f) = &self.phi3 {
            return Ok(f(t));
        }
        let h = 1e-4 * t.abs().max(1.0);
        let (lo, hi) = (t - h, t + h);
        let v = match (self.domain.contains(lo), self.domain.contains(hi)) {
            (true, true) => ((self.phi2)(hi) - (self.phi2)(lo)) / (hi - lo),
            (false, true) => ((self.phi2)(hi) - (self.phi2)(t)) / (hi - t),
            (true, false) => ((self.phi2)(t) - (self.phi2)(lo)) / (t - lo),
            (false, false) => f64::NAN,
        };
        Ok(v)
    }

    /// `φ(p[coord])` as a field on `chart`, with exact derivatives.
    pub fn as_field(&self, chart: &Chart, coord: usize) -> Result<ScalarField> {
        self.field_from(chart, coord, self.phi.clone(), self.phi1.clone(), self.phi2.clone())
    }

    /// `|φ'(p[coord])|`, the warping of the circle/sphere factor in
    /// `dt² + φ'² g_N`; `φ'` must not change sign on the chart.
    pub fn speed_field(&self, chart: &Chart, coord: usize) -> Result<ScalarField> {
        let (lo, hi) = (chart.lower()[coord], chart.upper()[coord]);
        self.check_covers(lo, hi)?;
        let sign = (self.phi1)(0.5 * (lo + hi)).signum();
        let (d1, d2) = (self.phi1.clone(), self.phi2.clone());
        let d3 = self.phi3.clone();
        let me = self.clone();
        let third: RealFn = match d3 {
            Some(f) => f,
            None => Arc::new(move |t| me.phi3(t).unwrap_or(f64::NAN)),
        };
        self.field_from(
            chart,
            coord,
            Arc::new(move |t| sign * d1(t)),
            Arc::new(move |t| sign * d2(t)),
            Arc::new(move |t| sign * third(t)),
        )
    }

    fn check_covers(&self, lo: f64, hi: f64) -> Result<()> {
        if self.domain.covers(lo, hi) {
            Ok(())
        } else {
            let bad = if self.domain.covers(lo, lo) { hi } else { lo };
            Err(GeomError::OutsideDomain {
                t: bad,
                lower: self.domain.lower,
                upper: self.domain.upper,
            })
        }
    }

    fn field_from(
        &self,
        chart: &Chart,
        coord: usize,
        f: RealFn,
        f1: RealFn,
        f2: RealFn,
    ) -> Result<ScalarField> {
        let dim = chart.dim();
        if coord >= dim {
            return Err(GeomError::DimensionMismatch {
                expected: coord + 1,
                found: dim,
            });
        }
        self.check_covers(chart.lower()[coord], chart.upper()[coord])?;
        let dom = self.domain;
        let guard = move |t: f64, v: f64| if dom.contains(t) { v } else { f64::NAN };
        Ok(ScalarField::new(chart.clone(), move |p| guard(p[coord], f(p[coord])))
            .with_gradient(move |p| {
                let mut g = vec![0.0; dim];
                g[coord] = guard(p[coord], f1(p[coord]));
                g
            })
            .with_hessian(move |p| {
                let mut h = DMatrix::zeros(dim, dim);
                h[(coord, coord)] = guard(p[coord], f2(p[coord]));
                h
            }))
    }
}

fn violated(msg: String) -> GeomError {
    GeomError::ParameterConstraintViolated(msg)
}

fn close(lhs: f64, rhs: f64) -> bool {
    (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0)
}

/// Closed-form warping functions on a one-dimensional base, translated by `t0`:
///
/// * `ρ = 0`: `φ = t − t0`, which forces `ε = 1`;
/// * `ρ > 0`: `φ = a cos κs + b sin κs`, `a² + b² = (n−1)/ρ`, `a, b >= 0`, on
///   `s ∈ (0, π/(2κ))`;
/// * `ρ < 0`: `φ = a cosh κs + b sinh κs`, `a² − b² = ε(n−1)/ρ`, on the
///   maximal interval where `φ > 0`,
///
/// with `s = t − t0` and `κ = √(|ρ|/(n−1))`.
pub fn closed_form_warp(data: &EinsteinData, a: f64, b: f64, t0: f64) -> Result<WarpSolution> {
    if !(a.is_finite() && b.is_finite() && t0.is_finite()) {
        return Err(violated("a, b and t0 must be finite".into()));
    }
    let rho = data.rho;
    let n1 = data.n as f64 - 1.0;
    let params = WarpParams { a, b, t0, c: 0.0 };
    let build = |case, domain, phi: RealFn, phi1: RealFn, phi2: RealFn, phi3: RealFn| WarpSolution {
        case,
        params,
        data: *data,
        domain,
        phi,
        phi1,
        phi2,
        phi3: Some(phi3),
    };

    if rho == 0.0 {
        if data.eps != Eps::Plus {
            return Err(violated(format!("rho = 0 requires eps = 1 (got {})", data.eps)));
        }
        return Ok(build(
            WarpCase::Zero,
            Domain::open(t0, f64::INFINITY),
            Arc::new(move |t| t - t0),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
        ));
    }

    let kappa = (rho.abs() / n1).sqrt();
    let k2 = kappa * kappa;
    if rho > 0.0 {
        if data.eps != Eps::Plus {
            return Err(violated(format!("rho > 0 requires eps = 1 (got {})", data.eps)));
        }
        if a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0) {
            return Err(violated(format!("rho > 0 requires a, b >= 0, not both zero (a = {a}, b = {b})")));
        }
        let target = n1 / rho;
        if !close(a * a + b * b, target) {
            return Err(violated(format!(
                "a^2 + b^2 = (n-1)/rho fails: {} vs {target}",
                a * a + b * b
            )));
        }
        let f = move |t: f64| a * (kappa * (t - t0)).cos() + b * (kappa * (t - t0)).sin();
        let f1 = move |t: f64| kappa * (b * (kappa * (t - t0)).cos() - a * (kappa * (t - t0)).sin());
        return Ok(build(
            WarpCase::Positive,
            Domain::open(t0, t0 + FRAC_PI_2 / kappa),
            Arc::new(f),
            Arc::new(f1),
            Arc::new(move |t| -k2 * f(t)),
            Arc::new(move |t| -k2 * f1(t)),
        ));
    }

    let target = data.eps.value() * n1 / rho;
    if !close(a * a - b * b, target) {
        return Err(violated(format!(
            "a^2 - b^2 = eps(n-1)/rho fails: {} vs {target}",
            a * a - b * b
        )));
    }
    // a cosh x + b sinh x > 0  <=>  a + b tanh x > 0
    let (lo, hi) = if a.abs() >= b.abs() {
        if a > 0.0 {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            return Err(violated(format!("phi = a cosh + b sinh is never positive (a = {a}, b = {b})")));
        }
    } else {
        let x = (-a / b).atanh() / kappa;
        if b > 0.0 {
            (x, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, x)
        }
    };
    let f = move |t: f64| a * (kappa * (t - t0)).cosh() + b * (kappa * (t - t0)).sinh();
    let f1 = move |t: f64| kappa * (a * (kappa * (t - t0)).sinh() + b * (kappa * (t - t0)).cosh());
    Ok(build(
        WarpCase::Negative,
        Domain::open(t0 + lo, t0 + hi),
        Arc::new(f),
        Arc::new(f1),
        Arc::new(move |t| k2 * f(t)),
        Arc::new(move |t| k2 * f1(t)),
    ))
}

/// Solution of `φ'² = 1 + c/φ^{n−3}` with `φ(0) = (−c)^{1/(n−3)}`, `φ'(0) = 0`,
/// on `[0, t_max]`.
///
/// Integrates the differentiated form `φ'' = −(n−3)c / (2φ^{n−2})`, which is
/// regular at the turning point; the first-order equation is left as a
/// conserved quantity.
pub fn gs_warp(n: usize, c: f64, t_max: f64, step: f64) -> Result<WarpSolution> {
    if n < 5 {
        return Err(GeomError::InvalidGSParameters(format!("need n >= 5 (got {n})")));
    }
    if !(c < 0.0 && c.is_finite()) {
        return Err(GeomError::InvalidGSParameters(format!("need c < 0 (got {c})")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(GeomError::InvalidGSParameters(format!("need t_max > 0 (got {t_max})")));
    }
    if !(step > 0.0 && step <= t_max) {
        return Err(GeomError::InvalidGSParameters(format!(
            "need 0 < step <= t_max (got {step})"
        )));
    }
    let k = (n - 3) as f64;
    let accel = move |phi: f64| -k * c / (2.0 * phi.powi(n as i32 - 2));
    let phi0 = (-c).powf(1.0 / k);
    let table = Arc::new(rk4(
        move |_, y| vec![y[1], accel(y[0])],
        0.0,
        &[phi0, 0.0],
        t_max,
        step,
    ));
    let data = EinsteinData::new(n, 2, 0.0, Eps::Plus)?;
    let (t1, t2, t3) = (table.clone(), table.clone(), table.clone());
    let jerk = move |t: f64| {
        let (v, _) = t3.eval(t, 0);
        let (d1, _) = t3.eval(t, 1);
        k * (n as f64 - 2.0) * c / 2.0 * d1 / v.powi(n as i32 - 1)
    };
    Ok(WarpSolution {
        case: WarpCase::Gs,
        params: WarpParams {
            c,
            ..WarpParams::default()
        },
        data,
        domain: Domain::closed(0.0, t_max),
        phi: Arc::new(move |t| table.eval(t, 0).0),
        // φ' is interpolated as its own component with slope φ''
        phi1: Arc::new(move |t| t1.eval(t, 1).0),
        phi2: Arc::new(move |t| accel(t2.eval(t, 0).0)),
        phi3: Some(Arc::new(jerk)),
    })
}

/// First-integral residual `φ'² − 1 − c/φ^{n−3}` of a GS solution.
pub fn gs_first_integral(sol: &WarpSolution, t: f64) -> Result<f64> {
    let (v, d1, _) = sol.jet(t)?;
    Ok(d1 * d1 - 1.0 - sol.params.c / v.powi(sol.data.n as i32 - 3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{partial, partial2, FdConfig};
    use proptest::prelude::*;

    fn data(n: usize, m: usize, rho: f64, eps: Eps) -> EinsteinData {
        EinsteinData::new(n, m, rho, eps).unwrap()
    }

    #[test]
    fn zero_case() {
        let s = closed_form_warp(&data(5, 2, 0.0, Eps::Plus), 0.0, 0.0, 0.0).unwrap();
        assert_eq!(s.case, WarpCase::Zero);
        assert_eq!(s.jet(2.5).unwrap(), (2.5, 1.0, 0.0));
        assert!(s.phi(0.0).is_err());
        assert!(closed_form_warp(&data(5, 2, 0.0, Eps::Minus), 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn positive_case_is_cosine() {
        let s = closed_form_warp(&data(6, 2, 5.0, Eps::Plus), 1.0, 0.0, 0.0).unwrap();
        for t in [0.1, 0.8, 1.5] {
            assert!((s.phi(t).unwrap() - f64::cos(t)).abs() < 1e-15);
            assert!((s.phi1(t).unwrap() + f64::sin(t)).abs() < 1e-15);
        }
        assert_eq!(s.domain.upper, FRAC_PI_2);
        assert!(matches!(s.phi(1.6), Err(GeomError::OutsideDomain { .. })));
        assert!(s.phi(0.0).is_err());
        let bad = closed_form_warp(&data(6, 2, 5.0, Eps::Plus), 1.0, 0.1, 0.0);
        assert!(matches!(bad, Err(GeomError::ParameterConstraintViolated(m)) if m.contains("a^2 + b^2")));
    }

    #[test]
    fn translated_domain() {
        let s = closed_form_warp(&data(6, 2, 5.0, Eps::Plus), 1.0, 0.0, 2.0).unwrap();
        assert!((s.phi(2.5).unwrap() - 0.5f64.cos()).abs() < 1e-15);
        assert!(s.phi(1.9).is_err());
    }

    #[test]
    fn negative_case_constraint() {
        let d = data(7, 3, -6.0, Eps::Plus);
        let err = closed_form_warp(&d, 1.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, GeomError::ParameterConstraintViolated(ref m) if m.contains("a^2 - b^2")));
        let s = closed_form_warp(&d, 0.0, 1.0, 0.0).unwrap();
        assert!((s.phi(1.2).unwrap() - 1.2f64.sinh()).abs() < 1e-15);
        assert_eq!(s.domain.lower, 0.0);
        // the sinh warp belongs to eps = +1 only
        assert!(closed_form_warp(&data(8, 5, -7.0, Eps::Minus), 0.0, 1.0, 0.0).is_err());
        // eps = -1: a cosh with a² = 1 is positive everywhere
        let c = closed_form_warp(&data(8, 5, -7.0, Eps::Minus), 1.0, 0.0, 0.0).unwrap();
        assert!(c.phi(-30.0).is_ok());
        // eps = 0: pure exponential
        let e = closed_form_warp(&data(8, 5, -7.0, Eps::Zero), 2.0, -2.0, 0.0).unwrap();
        assert!((e.phi(1.0).unwrap() - 2.0 * (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gs_matches_closed_form_for_n5() {
        let s = gs_warp(5, -1.0, 5.0, GS_DEFAULT_STEP).unwrap();
        assert_eq!(s.jet(0.0).unwrap().0, 1.0);
        assert_eq!(s.jet(0.0).unwrap().1, 0.0);
        assert!((s.phi(2.0).unwrap() - 5f64.sqrt()).abs() < 1e-7);
        for i in 0..=500 {
            let t = 5.0 * i as f64 / 500.0;
            let exact = (1.0 + t * t).sqrt();
            assert!((s.phi(t).unwrap() - exact).abs() < 1e-7, "t = {t}");
            assert!((s.phi1(t).unwrap() - t / exact).abs() < 1e-7);
            assert!((s.phi2(t).unwrap() - exact.powi(-3)).abs() < 1e-7);
        }
    }

    #[test]
    fn gs_first_integral_conserved() {
        let s = gs_warp(6, -8.0, 5.0, GS_DEFAULT_STEP).unwrap();
        assert!((s.phi(0.0).unwrap() - 2.0).abs() < 1e-15);
        let mut last = -1.0;
        for i in 0..=2000 {
            let t = 5.0 * i as f64 / 2000.0;
            assert!(gs_first_integral(&s, t).unwrap().abs() < 1e-8, "t = {t}");
            let d1 = s.phi1(t).unwrap();
            assert!(d1 > last);
            last = d1;
        }
        assert!(last > 0.0 && last < 1.0);
    }

    #[test]
    fn gs_bad_parameters() {
        assert!(matches!(gs_warp(4, -1.0, 1.0, 1e-3), Err(GeomError::InvalidGSParameters(_))));
        assert!(matches!(gs_warp(5, 0.0, 1.0, 1e-3), Err(GeomError::InvalidGSParameters(_))));
        assert!(gs_warp(5, -1.0, 1.0, 2.0).is_err());
        assert!(gs_warp(5, -1.0, 1.0, 0.1).unwrap().phi(1.01).is_err());
    }

    #[test]
    fn gs_third_derivative() {
        let s = gs_warp(5, -1.0, 3.0, GS_DEFAULT_STEP).unwrap();
        // φ = √(1+t²): φ''' = −3t/(1+t²)^{5/2}
        for t in [0.5f64, 1.0, 2.0] {
            let exact = -3.0 * t / (1.0f64 + t * t).powf(2.5);
            assert!((s.phi3(t).unwrap() - exact).abs() < 1e-7);
        }
    }

    #[test]
    fn custom_third_derivative_by_differencing() {
        let s = WarpSolution::custom(
            data(5, 2, 0.0, Eps::Plus),
            f64::exp,
            f64::exp,
            f64::exp,
            Domain::open(0.0, 2.0),
        );
        assert!((s.phi3(1.0).unwrap() - 1f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn field_rejects_chart_outside_domain() {
        let s = closed_form_warp(&data(6, 2, 5.0, Eps::Plus), 1.0, 0.0, 0.0).unwrap();
        let ok = Chart::new("I", &["t"], &[(0.0, 1.5)], 0.1).unwrap();
        assert!(s.as_field(&ok, 0).is_ok());
        let bad = Chart::new("I", &["t"], &[(0.1, 1.7)], 0.1).unwrap();
        assert!(matches!(s.as_field(&bad, 0), Err(GeomError::OutsideDomain { .. })));
    }

    #[test]
    fn speed_field_is_abs_derivative() {
        let s = closed_form_warp(&data(6, 2, 5.0, Eps::Plus), 1.0, 0.0, 0.0).unwrap();
        let chart = Chart::new("I", &["t"], &[(0.2, 1.4)], 0.05).unwrap();
        let f = s.speed_field(&chart, 0).unwrap();
        assert!((f.value(&[1.0]).unwrap() - 1f64.sin()).abs() < 1e-15);
        let cfg = FdConfig::default();
        assert!((partial(&f, &[1.0], 0, &cfg).unwrap() - 1f64.cos()).abs() < 1e-15);
    }

    fn closed_form_strategy() -> impl Strategy<Value = (EinsteinData, f64, f64)> {
        (5usize..10, 1usize..4, 0usize..3, 0.1f64..10.0, 0.0f64..1.0, 0usize..3).prop_filter_map(
            "dimensions",
            |(n, m, case, r, frac, e)| {
                if n < m + 2 {
                    return None;
                }
                let n1 = n as f64 - 1.0;
                let eps = [Eps::Minus, Eps::Zero, Eps::Plus][e];
                match case {
                    0 => Some((EinsteinData::new(n, m, 0.0, Eps::Plus).ok()?, 0.0, 0.0)),
                    1 => {
                        let rr = (n1 / r).sqrt();
                        let ang = frac * FRAC_PI_2;
                        Some((EinsteinData::new(n, m, r, Eps::Plus).ok()?, rr * ang.cos(), rr * ang.sin()))
                    }
                    _ => {
                        let rho = -r;
                        let target = eps.value() * n1 / rho;
                        // a² − b² = target with b = frac·scale
                        let b = 2.0 * frac;
                        let a2 = target + b * b;
                        if a2 < 0.0 {
                            return None;
                        }
                        Some((EinsteinData::new(n, m, rho, eps).ok()?, a2.sqrt(), b))
                    }
                }
            },
        )
    }

    fn sample_ts(s: &WarpSolution, count: usize) -> Vec<f64> {
        let lo = if s.domain.lower.is_finite() { s.domain.lower } else { -2.0 };
        let hi = if s.domain.upper.is_finite() { s.domain.upper } else { lo + 4.0 };
        let (lo, hi) = (lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo));
        (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn closed_forms_solve_the_reduced_system((d, a, b) in closed_form_strategy()) {
            let s = closed_form_warp(&d, a, b, 0.0).unwrap();
            for t in sample_ts(&s, 200) {
                let (v, d1, d2) = s.jet(t).unwrap();
                prop_assert!(v > 0.0);
                let scale = 1.0 + v * v + d1 * d1 + d2.abs();
                let (r1, r2) = super::super::residuals_reduced(&d, &s, t).unwrap();
                prop_assert!(r1.abs() <= 1e-10 * scale && r2.abs() <= 1e-10 * scale, "{r1} {r2}");
                let r3 = super::super::residual_eq3(&d, &s, t).unwrap();
                let r4 = super::super::residual_eq4(&d, &s, t).unwrap();
                prop_assert!(r3.abs() <= 1e-10 * scale && r4.abs() <= 1e-10 * scale, "{r3} {r4}");
            }
        }

        #[test]
        fn analytic_derivatives_match_differences((d, a, b) in closed_form_strategy()) {
            let s = closed_form_warp(&d, a, b, 0.0).unwrap();
            let ts = sample_ts(&s, 5);
            let chart = Chart::new("I", &["t"], &[(ts[0], ts[4])], 0.0).unwrap();
            let exact = s.as_field(&chart, 0).unwrap();
            let fd = exact.without_derivatives();
            let cfg = FdConfig::default();
            for t in &ts[1..4] {
                let p = [*t];
                let g = partial(&fd, &p, 0, &cfg).unwrap();
                let h = partial2(&fd, &p, 0, 0, &cfg).unwrap();
                let (v, d1, d2) = s.jet(*t).unwrap();
                prop_assert!((g - d1).abs() <= 1e-7 * (1.0 + v.abs()), "{g} {d1}");
                prop_assert!((h - d2).abs() <= 1e-7 * (1.0 + v.abs()), "{h} {d2}");
            }
        }

        #[test]
        fn relation_is_forced((d, a, b) in closed_form_strategy(), dmu in -1.0f64..1.0) {
            prop_assume!(d.rho != 0.0 && dmu.abs() > 1e-3);
            let s = closed_form_warp(&d, a, b, 0.0).unwrap();
            let wrong = d.with_mu(d.mu_or_forced() + dmu);
            let ts = sample_ts(&s, 3);
            let vanish = ts.iter().all(|&t| {
                super::super::residual_eq3(&wrong, &s, t).unwrap().abs() <= 1e-10
                    && super::super::residual_eq4(&wrong, &s, t).unwrap().abs() <= 1e-10
            });
            prop_assert!(!vanish);
        }
    }
}
