//! Warped products `L ×_φ F`, the Einstein system for the warping function
//! and its closed-form and ODE solutions.

mod ode;
mod solution;
mod table;

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curvature::{gradient_norm_sq, hessian, laplacian, ricci};
use crate::error::{GeomError, Result};
use crate::geometry::{Chart, FdConfig, MetricField, ScalarField};

pub use ode::{rk4, DenseSolution};
pub use solution::{
    closed_form_warp, gs_first_integral, gs_warp, Domain, WarpCase, WarpParams, WarpSolution, GS_DEFAULT_STEP,
};
pub use table::{parse_warp_table, write_warp_table};

/// Fiber normalisation `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Eps {
    Minus,
    Zero,
    Plus,
}

impl Eps {
    pub fn value(self) -> f64 {
        match self {
            Eps::Minus => -1.0,
            Eps::Zero => 0.0,
            Eps::Plus => 1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == -1.0 {
            Ok(Eps::Minus)
        } else if v == 0.0 {
            Ok(Eps::Zero)
        } else if v == 1.0 {
            Ok(Eps::Plus)
        } else {
            Err(GeomError::ParameterConstraintViolated(format!(
                "eps must be one of -1, 0, 1 (got {v})"
            )))
        }
    }
}

impl fmt::Display for Eps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Dimensions and curvature constants of a warped product `M^n = L^m ×_φ F^{n-m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EinsteinData {
    pub n: usize,
    pub m: usize,
    /// Ricci constant of `M`.
    pub rho: f64,
    /// Ricci constant of `L`, when `L` is Einstein.
    pub mu: Option<f64>,
    pub eps: Eps,
    /// Scalar curvature of `L`.
    pub s_l: Option<f64>,
}

impl EinsteinData {
    /// Requires `m >= 1` and `n >= m + 2`.
    pub fn new(n: usize, m: usize, rho: f64, eps: Eps) -> Result<Self> {
        if m == 0 || n < m + 2 {
            return Err(GeomError::ParameterConstraintViolated(format!(
                "need m >= 1 and n >= m + 2 (n = {n}, m = {m})"
            )));
        }
        if !rho.is_finite() {
            return Err(GeomError::ParameterConstraintViolated("rho must be finite".into()));
        }
        Ok(Self {
            n,
            m,
            rho,
            mu: None,
            eps,
            s_l: None,
        })
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_scalar(mut self, s_l: f64) -> Self {
        self.s_l = Some(s_l);
        self
    }

    /// The stricter `n >= m + 3` used by the immersion classification.
    pub fn check_theorem_dims(&self) -> Result<()> {
        if self.n < self.m + 3 {
            return Err(GeomError::ParameterConstraintViolated(format!(
                "need n >= m + 3 (n = {}, m = {})",
                self.n, self.m
            )));
        }
        Ok(())
    }

    /// Checks `(n-1)μ = (m-1)ρ` when `μ` is set.
    pub fn check_relation(&self) -> Result<()> {
        if let Some(mu) = self.mu {
            let lhs = (self.n as f64 - 1.0) * mu;
            let rhs = (self.m as f64 - 1.0) * self.rho;
            if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()).max(1.0) {
                return Err(GeomError::ParameterConstraintViolated(format!(
                    "(n-1)mu = (m-1)rho fails: {lhs} vs {rhs}"
                )));
            }
        }
        Ok(())
    }

    /// `μ` if set, otherwise the value forced by [`mu_from_rho`].
    pub fn mu_or_forced(&self) -> f64 {
        self.mu.unwrap_or_else(|| mu_from_rho(self.n, self.m, self.rho))
    }

    fn codim(&self) -> f64 {
        (self.n - self.m) as f64
    }
}

/// `μ = (m-1)ρ/(n-1)`.
pub fn mu_from_rho(n: usize, m: usize, rho: f64) -> f64 {
    (m as f64 - 1.0) * rho / (n as f64 - 1.0)
}

/// Ricci constant `(m-2)ερ/(n-1)` of the base factor `N` when `L = I ×_{φ'} N`.
pub fn fiber_ricci_constant(n: usize, m: usize, eps: Eps, rho: f64) -> f64 {
    (m as f64 - 2.0) * eps.value() * rho / (n as f64 - 1.0)
}

/// `g = g_base ⊕ φ² g_fiber` on the product chart.
pub fn warped_metric(base: &MetricField, fiber: &MetricField, phi: &ScalarField) -> Result<MetricField> {
    if phi.chart().dim() != base.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: base.dim(),
            found: phi.chart().dim(),
        });
    }
    let mut probes = base.chart().sample(64, 0);
    probes.push(base.chart().center());
    for p in &probes {
        let v = phi.value(p)?;
        if !(v > 0.0) {
            return Err(GeomError::NonPositiveWarp {
                point: p.clone(),
                value: v,
            });
        }
    }
    let chart = Chart::product(base.chart(), fiber.chart());
    let (b, f, phi) = (base.clone(), fiber.clone(), phi.clone());
    let db = b.dim();
    let total = chart.dim();
    Ok(MetricField::new(chart, move |p| {
        let mut g = DMatrix::from_element(total, total, f64::NAN);
        let (Ok(gb), Ok(gf), Ok(w)) = (b.value(&p[..db]), f.value(&p[db..]), phi.value(&p[..db]))
        else {
            return g;
        };
        g.fill(0.0);
        g.view_mut((0, 0), (db, db)).copy_from(&gb);
        g.view_mut((db, db), (total - db, total - db))
            .copy_from(&(gf * (w * w)));
        g
    }))
}

/// `(n-m) Hess φ − (Ric_L − ρ g_L) φ` as a matrix at `p`.
pub fn residual_eq1_tensor(
    data: &EinsteinData,
    base: &MetricField,
    phi: &ScalarField,
    p: &[f64],
    cfg: &FdConfig,
) -> Result<DMatrix<f64>> {
    let h = hessian(phi, base, p, cfg)?;
    let ric = ricci(base, p, cfg)?;
    let g = base.value(p)?;
    let v = phi.value(p)?;
    Ok(h * data.codim() - (ric - g * data.rho) * v)
}

/// Tensor residual contracted with `x`, `y`.
pub fn residual_eq1(
    data: &EinsteinData,
    base: &MetricField,
    phi: &ScalarField,
    p: &[f64],
    x: &[f64],
    y: &[f64],
    cfg: &FdConfig,
) -> Result<f64> {
    let d = base.dim();
    if x.len() != d || y.len() != d {
        return Err(GeomError::DimensionMismatch {
            expected: d,
            found: x.len().min(y.len()),
        });
    }
    let r = residual_eq1_tensor(data, base, phi, p, cfg)?;
    let (x, y) = (DVector::from_column_slice(x), DVector::from_column_slice(y));
    Ok((x.transpose() * r * y)[(0, 0)])
}

/// `Δφ + (n-m-1)(‖∇φ‖² − ε)/φ + ρφ` at `p`.
pub fn residual_eq2(
    data: &EinsteinData,
    base: &MetricField,
    phi: &ScalarField,
    p: &[f64],
    cfg: &FdConfig,
) -> Result<f64> {
    let v = phi.value(p)?;
    if !(v > 0.0) {
        return Err(GeomError::NonPositiveWarp {
            point: p.to_vec(),
            value: v,
        });
    }
    let lap = laplacian(phi, base, p, cfg)?;
    let grad2 = gradient_norm_sq(phi, base, p, cfg)?;
    Ok(lap + (data.codim() - 1.0) * (grad2 - data.eps.value()) / v + data.rho * v)
}

/// `(n-m)φ'' − (μ−ρ)φ` on a one-dimensional base.
pub fn residual_eq3(data: &EinsteinData, sol: &WarpSolution, t: f64) -> Result<f64> {
    let (v, _, d2) = sol.jet(t)?;
    Ok(data.codim() * d2 - (data.mu_or_forced() - data.rho) * v)
}

/// `φ'² − ε + (mμ + (n−2m)ρ) φ² / ((n−m)(n−m−1))` on a one-dimensional base.
pub fn residual_eq4(data: &EinsteinData, sol: &WarpSolution, t: f64) -> Result<f64> {
    let (v, d1, _) = sol.jet(t)?;
    let (n, m) = (data.n as f64, data.m as f64);
    let k = (m * data.mu_or_forced() + (n - 2.0 * m) * data.rho) / (data.codim() * (data.codim() - 1.0));
    Ok(d1 * d1 - data.eps.value() + k * v * v)
}

/// `((n−1)φ'' + ρφ, φ'² − ε + ρφ²/(n−1))`.
pub fn residuals_reduced(data: &EinsteinData, sol: &WarpSolution, t: f64) -> Result<(f64, f64)> {
    let (v, d1, d2) = sol.jet(t)?;
    let n1 = data.n as f64 - 1.0;
    Ok((
        n1 * d2 + data.rho * v,
        d1 * d1 - data.eps.value() + data.rho * v * v / n1,
    ))
}

/// `((m−1)ρφ'² + (n−1)φ'φ''' + (n−1)(m−2)φ''²)/(n−1)`, the Ricci constant
/// `N` must carry for `I ×_{φ'} N` to fit the system.
pub fn fiber_ricci_formula(data: &EinsteinData, sol: &WarpSolution, t: f64) -> Result<f64> {
    let (_, d1, d2) = sol.jet(t)?;
    let d3 = sol.phi3(t)?;
    let (n1, m) = (data.n as f64 - 1.0, data.m as f64);
    Ok(((m - 1.0) * data.rho * d1 * d1 + n1 * d1 * d3 + n1 * (m - 2.0) * d2 * d2) / n1)
}

/// Non-constant solution `u(s) = a sin(shift + s/a)` of `u'² + u²/a² = 1`
/// with `a = √((n−m)(n−m−1)/(S_L + (n−2m)ρ))`.
///
/// The returned field lives on the interval where `u > 0`, with a 5% margin.
pub fn closed_form_u(data: &EinsteinData, shift: f64) -> Result<(ScalarField, f64)> {
    let s_l = data.s_l.ok_or_else(|| {
        GeomError::ParameterConstraintViolated("scalar curvature S_L of the base is required".into())
    })?;
    let (n, m) = (data.n as f64, data.m as f64);
    let denom = s_l + (n - 2.0 * m) * data.rho;
    if !(denom > 0.0) {
        return Err(GeomError::NonPositiveDenominator(denom));
    }
    if !shift.is_finite() {
        return Err(GeomError::ParameterConstraintViolated("shift must be finite".into()));
    }
    let a = (data.codim() * (data.codim() - 1.0) / denom).sqrt();
    // sin(shift + s/a) > 0 on the branch starting at the largest zero <= shift
    let k = (shift / PI).floor();
    let branch = if k.rem_euclid(2.0) == 0.0 { k * PI } else { (k + 1.0) * PI };
    let (lo, hi) = (a * (branch - shift), a * (branch + PI - shift));
    let chart = Chart::new("s", &["s"], &[(lo, hi)], 0.05 * (hi - lo))?;
    let u = ScalarField::new(chart, move |p| a * (shift + p[0] / a).sin())
        .with_gradient(move |p| vec![(shift + p[0] / a).cos()])
        .with_hessian(move |p| DMatrix::from_element(1, 1, -(shift + p[0] / a).sin() / a));
    Ok((u, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::models::round_sphere;
    use crate::geometry::partial;

    fn data(n: usize, m: usize, rho: f64, eps: Eps) -> EinsteinData {
        EinsteinData::new(n, m, rho, eps).unwrap()
    }

    #[test]
    fn rel_examples() {
        assert_eq!(mu_from_rho(8, 5, 7.0), 4.0);
        assert_eq!(mu_from_rho(6, 3, 0.0), 0.0);
        assert_eq!(mu_from_rho(9, 6, -8.0), -5.0);
    }

    #[test]
    fn fiber_constant_examples() {
        assert_eq!(fiber_ricci_constant(8, 5, Eps::Plus, 7.0), 3.0);
        assert_eq!(fiber_ricci_constant(8, 5, Eps::Minus, 0.0), 0.0);
        assert_eq!(fiber_ricci_constant(8, 5, Eps::Minus, -7.0), 3.0);
    }

    #[test]
    fn data_invariants() {
        assert!(EinsteinData::new(4, 3, 1.0, Eps::Plus).is_err());
        let d = data(7, 5, 1.0, Eps::Plus);
        assert!(d.check_theorem_dims().is_err());
        assert!(data(8, 5, 7.0, Eps::Plus).with_mu(4.0).check_relation().is_ok());
        assert!(data(8, 5, 7.0, Eps::Plus).with_mu(4.1).check_relation().is_err());
        assert_eq!(Eps::from_value(-1.0).unwrap(), Eps::Minus);
        assert!(Eps::from_value(0.5).is_err());
    }

    #[test]
    fn warped_unit_warp_is_direct_sum() {
        let base = round_sphere(2, 1.0).unwrap();
        let fiber = round_sphere(1, 2.0).unwrap();
        let one = ScalarField::constant(base.chart().clone(), 1.0);
        let w = warped_metric(&base, &fiber, &one).unwrap();
        let s = base.direct_sum(&fiber);
        for p in w.chart().sample(20, 3) {
            assert_eq!(w.value(&p).unwrap(), s.value(&p).unwrap());
        }
    }

    fn half_line() -> Chart {
        Chart::new("I", &["t"], &[(0.5, 2.0)], 0.05).unwrap()
    }

    #[test]
    fn flat_polar_plane() {
        let base = MetricField::euclidean(half_line());
        let fiber = round_sphere(1, 1.0).unwrap();
        let t = ScalarField::coordinate(half_line(), 0);
        let g = warped_metric(&base, &fiber, &t).unwrap();
        let cfg = FdConfig::default();
        for p in g.chart().sample(8, 1) {
            let r = ricci(&g, &p, &cfg).unwrap();
            assert!(r.amax() < 1e-6, "{r}");
        }
    }

    #[test]
    fn non_positive_warp_rejected() {
        let base = MetricField::euclidean(Chart::new("I", &["t"], &[(-1.0, 1.0)], 0.05).unwrap());
        let fiber = round_sphere(1, 1.0).unwrap();
        let t = ScalarField::coordinate(base.chart().clone(), 0);
        assert!(matches!(
            warped_metric(&base, &fiber, &t),
            Err(GeomError::NonPositiveWarp { .. })
        ));
    }

    #[test]
    fn eq1_trivial_cases() {
        let cfg = FdConfig::default();
        // φ = t on a flat line, ρ = 0
        let base = MetricField::euclidean(half_line());
        let t = ScalarField::coordinate(half_line(), 0);
        let d = data(3, 1, 0.0, Eps::Plus);
        let r = residual_eq1(&d, &base, &t, &[1.0], &[1.0], &[1.0], &cfg).unwrap();
        assert!(r.abs() < 1e-6);
        // constant φ on S² (μ = 1) with ρ = μ
        let s2 = round_sphere(2, 1.0).unwrap();
        let c = ScalarField::constant(s2.chart().clone(), 2.0);
        let d = data(5, 2, 1.0, Eps::Plus);
        let m = residual_eq1_tensor(&d, &s2, &c, &[1.0, 2.0], &cfg).unwrap();
        assert!(m.amax() < 1e-6, "{m}");
    }

    #[test]
    fn eq2_flat_polar_is_exact_zero() {
        let base = MetricField::euclidean(half_line());
        let t = ScalarField::coordinate(half_line(), 0);
        let d = data(2 + 1, 1, 0.0, Eps::Plus);
        let r = residual_eq2(&d, &base, &t, &[1.3], &FdConfig::default()).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn eq1_and_eq2_on_closed_form_einstein_pair() {
        // n = 8, m = 1, ρ = 7: φ = cos t on dt², so M is a round S^8 piece.
        let d = data(8, 1, 7.0, Eps::Plus);
        let sol = closed_form_warp(&d, 1.0, 0.0, 0.0).unwrap();
        let chart = Chart::new("I", &["t"], &[(0.2, 1.3)], 0.05).unwrap();
        let base = MetricField::euclidean(chart.clone());
        let phi = sol.as_field(&chart, 0).unwrap();
        let cfg = FdConfig::default();
        for p in chart.sample(10, 4) {
            let e1 = residual_eq1(&d, &base, &phi, &p, &[1.0], &[1.0], &cfg).unwrap();
            let e2 = residual_eq2(&d, &base, &phi, &p, &cfg).unwrap();
            assert!(e1.abs() < 1e-4 && e2.abs() < 1e-6, "{e1} {e2}");
        }
    }

    #[test]
    fn eq2_on_gs_base() {
        // 2-D base dt² + φ'²dθ² with φ from the GS integrator; the oracle
        // substitutes the tabulated φ, φ', φ'' into the closed expression.
        let sol = gs_warp(5, -1.0, 4.0, GS_DEFAULT_STEP).unwrap();
        let chart = Chart::new("L", &["t", "theta"], &[(0.5, 3.0), (0.0, 6.0)], 0.1).unwrap();
        let s1 = sol.clone();
        let base = MetricField::diagonal(chart.clone(), move |p| {
            let d1 = s1.phi1(p[0]).unwrap_or(f64::NAN);
            vec![1.0, d1 * d1]
        });
        let phi = sol.as_field(&chart, 0).unwrap();
        let d = data(5, 2, 0.0, Eps::Plus);
        let cfg = FdConfig::default();
        for p in chart.sample(6, 9) {
            let r = residual_eq2(&d, &base, &phi, &p, &cfg).unwrap();
            let (v, d1, d2) = sol.jet(p[0]).unwrap();
            // Δφ on dt² + φ'²dθ² for φ = φ(t): φ'' + (φ''/φ')·φ' = 2φ''
            let oracle = 2.0 * d2 + 2.0 * (d1 * d1 - 1.0) / v;
            assert!((r - oracle).abs() < 1e-4 && r.abs() < 1e-4, "{r} {oracle}");
        }
    }

    #[test]
    fn reduced_residual_examples() {
        let z = closed_form_warp(&data(6, 3, 0.0, Eps::Plus), 0.0, 0.0, 0.0).unwrap();
        assert_eq!(residuals_reduced(&z.data, &z, 1.7).unwrap(), (0.0, 0.0));

        let d = data(8, 5, 7.0, Eps::Plus);
        let p = closed_form_warp(&d, 1.0, 0.0, 0.0).unwrap();
        let (a, b) = residuals_reduced(&d, &p, 0.9).unwrap();
        assert!(a.abs() < 1e-14 && b.abs() < 1e-14);

        let d = data(8, 5, -7.0, Eps::Plus);
        let q = closed_form_warp(&d, 0.0, 1.0, 0.0).unwrap();
        for t in [0.1, 1.0, 2.5] {
            assert!((q.phi(t).unwrap() - t.sinh()).abs() < 1e-15 * t.cosh());
            let (a, b) = residuals_reduced(&d, &q, t).unwrap();
            assert!(a.abs() < 1e-12 * t.cosh() && b.abs() < 1e-12 * t.cosh().powi(2));
        }
    }

    #[test]
    fn wrong_mu_is_detected() {
        let d = data(8, 5, 7.0, Eps::Plus);
        let sol = closed_form_warp(&d, 1.0, 0.0, 0.0).unwrap();
        let bad = d.with_mu(mu_from_rho(8, 5, 7.0) + 0.1);
        for t in [0.2, 0.7, 1.2] {
            let phi = sol.phi(t).unwrap();
            // (n-m)φ'' is unchanged, so eq3 shifts by exactly -0.1·φ
            let r3 = residual_eq3(&bad, &sol, t).unwrap();
            assert!((r3 + 0.1 * phi).abs() < 1e-12);
            let r4 = residual_eq4(&bad, &sol, t).unwrap();
            assert!((r4 - 5.0 * 0.1 * phi * phi / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_warp_satisfies_reduced_einstein_system() {
        // φ ≡ c with μ = ρ and ε = (mμ + (n-2m)ρ) c² / ((n-m)(n-m-1))
        let (n, m, rho) = (7usize, 3usize, 2.0);
        let d = data(n, m, rho, Eps::Plus).with_mu(rho);
        let c = (12.0 / ((m as f64) * rho + (n as f64 - 6.0) * rho)).sqrt();
        let sol = WarpSolution::custom(
            d,
            move |_| c,
            |_| 0.0,
            |_| 0.0,
            Domain::open(0.0, 1.0),
        );
        assert!(residual_eq3(&d, &sol, 0.5).unwrap().abs() < 1e-15);
        assert!(residual_eq4(&d, &sol, 0.5).unwrap().abs() < 1e-14);
    }

    #[test]
    fn closed_form_u_examples() {
        let d = data(8, 5, 0.0, Eps::Plus).with_scalar(6.0);
        let (u, a) = closed_form_u(&d, 0.0).unwrap();
        assert_eq!(a, 1.0);
        assert!((u.value(&[0.4]).unwrap() - 0.4f64.sin()).abs() < 1e-15);

        let d = data(8, 5, 7.0, Eps::Plus).with_scalar(20.0);
        let (u, a) = closed_form_u(&d, 1.1).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        assert!((u.value(&[0.0]).unwrap() - a * 1.1f64.sin()).abs() < 1e-15);
        let cfg = FdConfig::default();
        for p in u.chart().sample(100, 2) {
            let v = u.value(&p).unwrap();
            let d1 = partial(&u, &p, 0, &cfg).unwrap();
            assert!(v > 0.0);
            assert!((d1 * d1 - 1.0 + v * v / (a * a)).abs() < 1e-12);
        }

        let bad = data(8, 5, 7.0, Eps::Plus).with_scalar(14.0);
        assert!(matches!(
            closed_form_u(&bad, 0.0),
            Err(GeomError::NonPositiveDenominator(_))
        ));
        assert!(closed_form_u(&data(8, 5, 7.0, Eps::Plus), 0.0).is_err());
    }

    #[test]
    fn fiber_formula_matches_constant() {
        for (rho, eps, a, b) in [(7.0, Eps::Plus, 1.0, 0.0), (-7.0, Eps::Plus, 0.0, 1.0), (-7.0, Eps::Minus, 1.0, 0.0)] {
            let d = data(8, 5, rho, eps);
            let sol = closed_form_warp(&d, a, b, 0.0).unwrap();
            for t in [0.3, 0.8, 1.4] {
                let f = fiber_ricci_formula(&d, &sol, t).unwrap();
                assert!((f - fiber_ricci_constant(8, 5, eps, rho)).abs() < 1e-12, "{f}");
            }
        }
    }
}
