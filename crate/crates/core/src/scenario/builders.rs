use std::f64::consts::PI;

use rayon::prelude::*;

use super::{Ctx, ParamSpec, Scenario, ScenarioError, ScenarioResult, Suite, MAX_DIM};
use crate::curvature::{coordinate_sectionals, gradient_norm_sq, scalar_curvature};
use crate::error::{GeomError, Result};
use crate::geometry::models::{round_sphere, space_form, sphere_chart, unit_round_diagonal, unit_sphere_point};
use crate::geometry::{gradient, Chart, MetricField, ScalarField};
use crate::immerse::{
    cone_map, cylinder_immersion, product_immersion, rotational_from_profile, sphere_inclusion,
    warped_representation, ImmersionMap, WarpedRepresentation,
};
use crate::verify::{
    combined_identity_check, constancy_check, constant_check, einstein_check, einstein_fit,
    gradient_bound_check, gradient_identity_check, isometry_check, lower_bound_check, trace_identity_check,
    CheckResult, ISOMETRY_TOL,
};
use crate::warp::{
    closed_form_u, closed_form_warp, fiber_ricci_constant, gs_first_integral, gs_warp, mu_from_rho,
    residual_eq1_tensor, residual_eq2, residual_eq3, residual_eq4, residuals_reduced, rk4, warped_metric,
    EinsteinData, Eps, WarpSolution, GS_DEFAULT_STEP,
};

/// Residual budget of closed-form ODE identities evaluated pointwise.
const CLOSED_FORM_TOL: f64 = 1e-10;
const FIRST_INTEGRAL_TOL: f64 = 1e-8;
const GS_CLOSED_FORM_TOL: f64 = 1e-7;
const CONSTANCY_TOL: f64 = 1e-8;
const EXACT_TOL: f64 = 1e-12;
/// Smallest spread of sectional curvatures that certifies non-flatness.
const NONFLAT_SPREAD: f64 = 1e-2;
const MU_PERTURBATION: f64 = 0.1;
const DETECTION_FLOOR: f64 = 1e-3;
const ONE_D_SAMPLES: usize = 200;

pub(super) fn registry() -> Vec<Scenario> {
    let n = |d: usize, lo: usize| ParamSpec::int("n", d, lo, MAX_DIM, "total dimension");
    let m = |d: usize, lo: usize| ParamSpec::int("m", d, lo, MAX_DIM - 2, "base dimension");
    vec![
        Scenario {
            id: "spheres-product",
            description: "S^m(r1) x S^(n-m)(r2), radii sqrt((m-1)/rho), sqrt((n-m-1)/rho): Einstein, not a cylinder",
            params: vec![n(8, 4), m(5, 2), ParamSpec::real("rho", 4.0, 1e-3, 1e3, "Einstein constant")],
            theorem_level: false,
            build: spheres_product,
        },
        Scenario {
            id: "gs-metric",
            description: "generalized Schwarzschild dt^2 + phi'^2 dtheta^2 + phi^2 g_S(n-2): Ricci flat, not flat",
            params: vec![
                n(5, 5),
                ParamSpec::real("c", -1.0, -100.0, -1e-6, "first-integral constant"),
                ParamSpec::real("t_max", 5.0, 1.0, 20.0, "integration range [0, t_max]"),
                ParamSpec::real("t_lo", 0.5, 0.2, 19.0, "lowest sampled t"),
                ParamSpec::real("t_hi", 3.0, 0.5, 19.8, "highest sampled t"),
            ],
            theorem_level: false,
            build: gs_metric,
        },
        Scenario {
            id: "flat-cone",
            description: "f0 x j with j(t, y) = t y over S^(n-m)(1/sqrt c): flat, |grad phi| constant",
            params: vec![n(8, 4), m(5, 2), ParamSpec::real("c", 0.25, 0.01, 100.0, "cone constant")],
            theorem_level: true,
            build: flat_cone,
        },
        Scenario {
            id: "cylinder",
            description: "f0 x id over a flat box: Ricci flat, constant warping",
            params: vec![n(8, 4), m(5, 2)],
            theorem_level: true,
            build: cylinder,
        },
        Scenario {
            id: "prop2-zero",
            description: "rho = 0 closed form phi = t - t0 on I x_phi' N, full warped Einstein check",
            params: vec![n(8, 4), m(5, 2), ParamSpec::real("t0", 0.0, -100.0, 100.0, "translation")],
            theorem_level: false,
            build: |ctx| prop2(ctx, 0.0, Eps::Plus, 0.0, 0.0),
        },
        Scenario {
            id: "prop2-positive",
            description: "rho > 0 closed form a cos + b sin on I x_phi' N, full warped Einstein check",
            params: vec![
                n(8, 4),
                m(5, 2),
                ParamSpec::real("rho", 7.0, 1e-3, 1e3, "Einstein constant"),
                ParamSpec::real("a", 1.0, 0.0, 1e3, "cos coefficient"),
                ParamSpec::real("b", 0.0, 0.0, 1e3, "sin coefficient"),
                ParamSpec::real("t0", 0.0, -100.0, 100.0, "translation"),
            ],
            theorem_level: false,
            build: |ctx| {
                let p = ctx.params;
                prop2(ctx, p.get("rho"), Eps::Plus, p.get("a"), p.get("b"))
            },
        },
        Scenario {
            id: "prop2-negative",
            description: "rho < 0 closed form a cosh + b sinh on I x_phi' N, full warped Einstein check",
            params: vec![
                n(8, 4),
                m(5, 2),
                ParamSpec::real("rho", -7.0, -1e3, -1e-3, "Einstein constant"),
                ParamSpec::int("eps", 1, 0, 1, "fiber normalisation, with eps = -1 written as --set eps=-1")
                    .with_min(-1.0),
                ParamSpec::real("a", 0.0, -1e3, 1e3, "cosh coefficient"),
                ParamSpec::real("b", 1.0, -1e3, 1e3, "sinh coefficient"),
                ParamSpec::real("t0", 0.0, -100.0, 100.0, "translation"),
            ],
            theorem_level: false,
            build: |ctx| {
                let p = ctx.params;
                let eps = Eps::from_value(p.get("eps"))?;
                prop2(ctx, p.get("rho"), eps, p.get("a"), p.get("b"))
            },
        },
        Scenario {
            id: "thm2-identities",
            description: "S^n(R) = S^m_+(R) x_(R cos) S^(n-m): trace, combined and gradient identities, u(s) closed form",
            params: vec![n(8, 4), m(5, 2), ParamSpec::real("rho", 7.0, 1e-3, 1e3, "Einstein constant")],
            theorem_level: true,
            build: thm2_identities,
        },
        Scenario {
            id: "warped-representation",
            description: "R^d = V x_sigma S^(d-v)(r) through psi(p0, p1) = p0 + sigma(p0)(p1 - q)",
            params: vec![
                ParamSpec::int("d", 3, 2, MAX_DIM, "ambient dimension"),
                ParamSpec::int("v", 2, 1, MAX_DIM - 1, "dimension of V"),
                ParamSpec::real("r", 1.0, 1e-2, 1e2, "sphere radius"),
            ],
            theorem_level: false,
            build: warped_rep,
        },
    ]
}

impl ParamSpec {
    const fn with_min(mut self, min: f64) -> Self {
        self.min = min;
        self
    }
}

fn constraint(msg: String) -> ScenarioError {
    GeomError::ParameterConstraintViolated(msg).into()
}

fn par_values<T: Send>(points: &[Vec<f64>], f: impl Fn(&[f64]) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    points.par_iter().map(|p| f(p)).collect()
}

fn prefix(points: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    points.iter().map(|p| p[..d].to_vec()).collect()
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

/// A warped product `total = base ×_φ fiber` with its Einstein data.
struct Warped<'a> {
    data: &'a EinsteinData,
    base: &'a MetricField,
    phi: &'a ScalarField,
    total: &'a MetricField,
}

/// Einstein fit on the total space and the base-level identities, with the
/// `phi`, `grad_norm` and `scalar_curvature` columns.
fn warped_block(ctx: &Ctx, w: &Warped, suite: &mut Suite) -> ScenarioResult<()> {
    let (cfg, tol) = (&ctx.run.fd, ctx.run.curvature_tol);
    let base_pts = prefix(&suite.points, w.base.dim());
    let (einstein, scalars) = einstein_fit(w.total, &suite.points, tol, cfg)?;
    let rho_hat = einstein.estimated_constant.unwrap_or(f64::NAN);
    suite.push_column(einstein);
    suite.push(constant_check("rho-estimate", rho_hat, w.data.rho, tol));
    suite.push_column(trace_identity_check(w.data, w.base, w.phi, &base_pts, tol, cfg)?);
    suite.push_column(combined_identity_check(w.data, w.base, w.phi, &base_pts, tol, cfg)?);
    let eq1 = par_values(&base_pts, |p| Ok(residual_eq1_tensor(w.data, w.base, w.phi, p, cfg)?.amax()))?;
    suite.push_column(CheckResult::from_residuals("eq1", eq1, tol, None));
    let eq2 = par_values(&base_pts, |p| residual_eq2(w.data, w.base, w.phi, p, cfg))?;
    suite.push_column(CheckResult::from_residuals("eq2", eq2, tol, None));
    extra_columns(ctx, suite, w.base, w.phi, Some(scalars))
}

fn extra_columns(
    ctx: &Ctx,
    suite: &mut Suite,
    base: &MetricField,
    phi: &ScalarField,
    scalars: Option<Vec<f64>>,
) -> ScenarioResult<()> {
    let cfg = ctx.run.fd;
    let base_pts = prefix(&suite.points, base.dim());
    let values = par_values(&base_pts, |p| phi.value(p))?;
    let grads = par_values(&base_pts, |p| Ok(gradient_norm_sq(phi, base, p, &cfg)?.sqrt()))?;
    suite.column("phi", values);
    suite.column("grad_norm", grads);
    if let Some(s) = scalars {
        suite.column("scalar_curvature", s);
    }
    Ok(())
}

fn spheres_product(ctx: &Ctx) -> ScenarioResult<Suite> {
    let p = ctx.params;
    let (n, m, rho) = (p.int("n"), p.int("m"), p.get("rho"));
    let k = n - m;
    let (cfg, tol) = (&ctx.run.fd, ctx.run.curvature_tol);
    let r1 = ((m as f64 - 1.0) / rho).sqrt();
    let r2 = ((k as f64 - 1.0) / rho).sqrt();
    // constant warping r2 over a unit fiber
    let base = round_sphere(m, r1)?;
    let phi = ScalarField::constant(base.chart().clone(), r2);
    let total = warped_metric(&base, &round_sphere(k, 1.0)?, &phi)?;
    let data = EinsteinData::new(n, m, rho, Eps::Plus)?;
    let points = total.chart().sample(ctx.run.samples, ctx.run.seed);
    let mut suite = Suite::new(total.chart().names(), points);

    warped_block(ctx, &Warped { data: &data, base: &base, phi: &phi, total: &total }, &mut suite)?;

    let (c1, c2) = (1.0 / (r1 * r1), 1.0 / (r2 * r2));
    let sect = par_values(&suite.points, |q| {
        let ks = coordinate_sectionals(&total, q, cfg)?;
        Ok(ks.iter().fold(0.0f64, |acc, &((i, j), kk)| {
            let expected = match (i < m, j < m) {
                (true, true) => c1,
                (false, false) => c2,
                _ => 0.0,
            };
            acc.max((kk - expected).abs())
        }))
    })?;
    suite.push_column(CheckResult::from_residuals("sectional-factors", sect, tol, None));

    let f = product_immersion(&sphere_inclusion(m, r1)?, &sphere_inclusion(k, r2)?);
    let expected = round_sphere(m, r1)?.direct_sum(&round_sphere(k, r2)?);
    suite.push_column(isometry_check(&f, &expected, &suite.points, ISOMETRY_TOL, cfg)?);
    Ok(suite)
}

fn gs_metric(ctx: &Ctx) -> ScenarioResult<Suite> {
    let p = ctx.params;
    let (n, c, t_max) = (p.int("n"), p.get("c"), p.get("t_max"));
    let (t_lo, t_hi) = (p.get("t_lo"), p.get("t_hi"));
    let cfg = &ctx.run.fd;
    let pad = 0.15;
    if !(t_lo < t_hi && t_lo - pad > 0.0 && t_hi + pad <= t_max) {
        return Err(constraint(format!(
            "need {pad} < t_lo < t_hi <= t_max - {pad} (t_lo = {t_lo}, t_hi = {t_hi}, t_max = {t_max})"
        )));
    }
    let sol = gs_warp(n, c, t_max, GS_DEFAULT_STEP)?;

    let grid = linspace(0.0, t_max, 2001);
    let fi = grid.iter().map(|&t| gs_first_integral(&sol, t)).collect::<Result<Vec<_>>>()?;
    let first_integral = CheckResult::from_residuals("first-integral", fi, FIRST_INTEGRAL_TOL, None);
    let closed = if n == 5 {
        let r = linspace(0.0, t_max, 501)
            .iter()
            .map(|&t| Ok(sol.phi(t)? - (t * t - c).sqrt()))
            .collect::<Result<Vec<_>>>()?;
        Some(CheckResult::from_residuals("closed-form", r, GS_CLOSED_FORM_TOL, None))
    } else {
        None
    };
    let phis = grid.iter().map(|&t| sol.phi(t)).collect::<Result<Vec<_>>>()?;
    let mono = phis.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect();
    let monotone = CheckResult::from_residuals("phi-monotone", mono, 0.0, None);

    let i_chart = Chart::new("I", &["t"], &[(t_lo - pad, t_hi + pad)], pad)?;
    let base = warped_metric(&MetricField::euclidean(i_chart.clone()), &round_sphere(1, 1.0)?, &sol.speed_field(&i_chart, 0)?)?;
    let phi = sol.as_field(base.chart(), 0)?;
    let total = warped_metric(&base, &round_sphere(n - 2, 1.0)?, &phi)?;
    let points = total.chart().sample(ctx.run.samples, ctx.run.seed);
    let mut suite = Suite::new(total.chart().names(), points);
    if let Some(cf) = closed {
        suite.push(cf);
    }
    suite.push(first_integral);
    suite.push(monotone);

    warped_block(ctx, &Warped { data: &sol.data, base: &base, phi: &phi, total: &total }, &mut suite)?;

    let t_star = 1.0f64.clamp(t_lo, t_hi);
    let mut at = vec![t_star, PI];
    at.extend(sphere_chart(n - 2)?.center());
    let ks: Vec<f64> = coordinate_sectionals(&total, &at, cfg)?.into_iter().map(|x| x.1).collect();
    let spread = ks.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ks.iter().cloned().fold(f64::INFINITY, f64::min);
    suite.push(lower_bound_check("nonflat", vec![spread], NONFLAT_SPREAD, 0.0));

    let profile = gs_profile(&sol, base.chart())?;
    let rot = rotational_from_profile(&profile, n - 2)?;
    suite.push_column(isometry_check(&rot, &total, &suite.points, ISOMETRY_TOL, cfg)?);
    let base_pts = prefix(&suite.points, 2);
    let bound = gradient_bound_check(&profile, &base_pts, cfg)?;
    suite.push_column(bound);
    Ok(suite)
}

/// Isometric profile `(φ'/λ cos λθ, φ'/λ sin λθ, w(t), φ(t))` of
/// `dt² + φ'² dθ²`, with `w' = √(1 − φ'² − φ''²/λ²)` and `λ >= 1` large
/// enough to keep the root real on the chart.
fn gs_profile(sol: &WarpSolution, chart: &Chart) -> ScenarioResult<ImmersionMap> {
    let (lo, hi) = (chart.lower()[0], chart.upper()[0]);
    let mut worst = 0.0f64;
    for t in linspace(lo, hi, 1001) {
        let (_, d1, d2) = sol.jet(t)?;
        if !(d1.abs() < 1.0) {
            return Err(constraint(format!("|phi'| reaches {d1} at t = {t}; no isometric profile")));
        }
        worst = worst.max(d2 * d2 / (1.0 - d1 * d1));
    }
    let lambda = (1.25 * worst.sqrt()).max(1.0);
    let s1 = sol.clone();
    let w_prime = move |t: f64| {
        let (_, d1, d2) = s1.jet(t).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        (1.0 - d1 * d1 - d2 * d2 / (lambda * lambda)).sqrt()
    };
    let w = rk4(|t, _| vec![w_prime(t)], lo, &[0.0], hi, GS_DEFAULT_STEP);
    let s2 = sol.clone();
    Ok(ImmersionMap::new(chart.clone(), 4, move |p| {
        let (t, th) = (p[0], p[1]);
        let (Ok(v), Ok(d1)) = (s2.phi(t), s2.phi1(t)) else {
            return vec![f64::NAN; 4];
        };
        let r = d1 / lambda;
        vec![r * (lambda * th).cos(), r * (lambda * th).sin(), w.eval(t, 0).0, v]
    }))
}

/// Helix `u ↦ (cos(u/√2), sin(u/√2), u/√2)` times the identity of
/// `R^{extra}`; unit speed, so the induced metric is Euclidean.
fn helix_cylinder(extra: usize) -> ScenarioResult<ImmersionMap> {
    let mut names = vec!["u".to_string()];
    names.extend((1..=extra).map(|i| format!("v{i}")));
    let mut bounds = vec![(0.0, 2.0)];
    bounds.extend(std::iter::repeat_n((-1.0, 1.0), extra));
    let chart = Chart::with_margins("N", names, &bounds, &vec![0.1; extra + 1])?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(ImmersionMap::new(chart, extra + 3, move |p| {
        let mut x = vec![(s * p[0]).cos(), (s * p[0]).sin(), s * p[0]];
        x.extend_from_slice(&p[1..]);
        x
    }))
}

fn flat_cone(ctx: &Ctx) -> ScenarioResult<Suite> {
    let p = ctx.params;
    let (n, m, c) = (p.int("n"), p.int("m"), p.get("c"));
    let k = n - m;
    let cfg = ctx.run.fd;
    let radius = 1.0 / c.sqrt();
    let (t0, t1) = (0.5, 2.0);

    let f0 = helix_cylinder(m - 2)?;
    let j = cone_map(&sphere_inclusion(k, radius)?, (t0, t1), 1.0)?;
    let f = product_immersion(&f0, &j);
    let l_dim = m;
    let l_chart = Chart::product(f0.chart(), &Chart::new("I", &["t"], &[(t0, t1)], 0.05 * (t1 - t0))?);
    // |y| = 1/√c turns dt² into dt²/c
    let base = MetricField::diagonal(l_chart.clone(), move |_| {
        let mut d = vec![1.0; l_dim];
        d[l_dim - 1] = 1.0 / c;
        d
    });
    let phi = ScalarField::coordinate(l_chart.clone(), m - 1);
    let total = warped_metric(&base, &round_sphere(k, radius)?, &phi)?;
    let points = f.chart().sample(ctx.run.samples, ctx.run.seed);
    let mut suite = Suite::new(f.chart().names(), points);
    let base_pts = prefix(&suite.points, m);

    suite.push_column(isometry_check(&f, &total, &suite.points, ISOMETRY_TOL, &cfg)?);

    // same space over the unit sphere: warping t/√c with ε = 1
    let sc = c.sqrt();
    let phi_unit = ScalarField::new(l_chart.clone(), move |q| q[m - 1] / sc).with_gradient(move |q| {
        let mut g = vec![0.0; q.len()];
        g[m - 1] = 1.0 / sc;
        g
    });
    let data = EinsteinData::new(n, m, 0.0, Eps::Plus)?;
    let pulled = f.pullback_field(&cfg);
    warped_block(ctx, &Warped { data: &data, base: &base, phi: &phi_unit, total: &pulled }, &mut suite)?;

    let (b, ph) = (base.clone(), phi.clone());
    let norm = ScalarField::new(l_chart.clone(), move |q| gradient_norm_sq(&ph, &b, q, &cfg).map_or(f64::NAN, f64::sqrt));
    let constancy = constancy_check(&norm, &base_pts, CONSTANCY_TOL)?;
    let value = constancy.estimated_constant.unwrap_or(f64::NAN);
    suite.push_column(constancy);
    suite.push(constant_check("grad-norm-value", value, sc, CONSTANCY_TOL));

    let f0c = f0.clone();
    let profile = ImmersionMap::new(l_chart, m + 2, move |q| {
        let mut x = f0c.value(&q[..m - 1]).unwrap_or_else(|_| vec![f64::NAN; m + 1]);
        x.push(q[m - 1] / sc);
        x
    });
    suite.push_column(gradient_bound_check(&profile, &base_pts, &cfg)?);
    Ok(suite)
}

fn cylinder(ctx: &Ctx) -> ScenarioResult<Suite> {
    let p = ctx.params;
    let (n, m) = (p.int("n"), p.int("m"));
    let cfg = ctx.run.fd;
    let f0 = helix_cylinder(m - 1)?;
    let f = cylinder_immersion(&f0, n - m)?;
    let points = f.chart().sample(ctx.run.samples, ctx.run.seed);
    let mut suite = Suite::new(f.chart().names(), points);
    let base_pts = prefix(&suite.points, m);

    suite.push_column(isometry_check(&f, &MetricField::euclidean(f.chart().clone()), &suite.points, ISOMETRY_TOL, &cfg)?);
    let base = MetricField::euclidean(f0.chart().clone());
    let phi = ScalarField::constant(f0.chart().clone(), 1.0);
    let data = EinsteinData::new(n, m, 0.0, Eps::Zero)?;
    let pulled = f.pullback_field(&cfg);
    warped_block(ctx, &Warped { data: &data, base: &base, phi: &phi, total: &pulled }, &mut suite)?;

    let (b, ph) = (base.clone(), phi.clone());
    let norm = ScalarField::new(f0.chart().clone(), move |q| gradient_norm_sq(&ph, &b, q, &cfg).map_or(f64::NAN, f64::sqrt));
    suite.push_column(constancy_check(&norm, &base_pts, CONSTANCY_TOL)?);
    Ok(suite)
}

/// Longest stretch of the solution domain where `φ` and `|φ'|` both stay
/// above a tenth of their maxima (so `I ×_{|φ'|} N` is non-degenerate),
/// searched within a few `1/κ` of `t0`.
fn usable_interval(sol: &WarpSolution, kappa: f64) -> ScenarioResult<(f64, f64)> {
    let span = 2.0 / if kappa > 0.0 { kappa } else { 1.0 };
    let (lower, upper) = (sol.domain.lower, sol.domain.upper);
    let t0 = sol.params.t0;
    let (lo, hi) = match (lower.is_finite(), upper.is_finite()) {
        (true, true) => (lower, upper),
        (true, false) => (lower, lower + 2.0 * span),
        (false, true) => (upper - 2.0 * span, upper),
        (false, false) => (t0 - span, t0 + span),
    };
    let ts: Vec<f64> = linspace(lo, hi, 2003)[1..2002].to_vec();
    let jets = ts.iter().map(|&t| sol.jet(t)).collect::<Result<Vec<_>>>()?;
    let vmax = jets.iter().map(|j| j.0).fold(0.0, f64::max);
    let dmax = jets.iter().map(|j| j.1.abs()).fold(0.0, f64::max);
    let ok: Vec<bool> = jets.iter().map(|j| j.0 >= 0.1 * vmax && j.1.abs() >= 0.1 * dmax).collect();
    let (mut best, mut start) = ((0, 0), None);
    for (i, &g) in ok.iter().chain(std::iter::once(&false)).enumerate() {
        match (g, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s > best.1 - best.0 {
                    best = (s, i);
                }
                start = None;
            }
            _ => {}
        }
    }
    if best.1 - best.0 < 20 {
        return Err(constraint("the warping function has no usable interval with phi > 0 and phi' != 0".into()));
    }
    Ok((ts[best.0], ts[best.1 - 1]))
}

fn prop2(ctx: &Ctx, rho: f64, eps: Eps, a: f64, b: f64) -> ScenarioResult<Suite> {
    let p = ctx.params;
    let (n, m, t0) = (p.int("n"), p.int("m"), p.get("t0"));
    let (cfg, tol) = (&ctx.run.fd, ctx.run.curvature_tol);
    let mu = mu_from_rho(n, m, rho);
    let data = EinsteinData::new(n, m, rho, eps)?.with_mu(mu);
    let sol = closed_form_warp(&data, a, b, t0)?;
    let kappa = (rho.abs() / (n as f64 - 1.0)).sqrt();
    let (lo, hi) = usable_interval(&sol, kappa)?;

    let ts = linspace(lo, hi, ONE_D_SAMPLES);
    let collect = |f: &dyn Fn(f64) -> Result<f64>| ts.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>();
    let red1 = collect(&|t| Ok(residuals_reduced(&data, &sol, t)?.0))?;
    let red2 = collect(&|t| Ok(residuals_reduced(&data, &sol, t)?.1))?;
    let eq3 = collect(&|t| residual_eq3(&data, &sol, t))?;
    let eq4 = collect(&|t| residual_eq4(&data, &sol, t))?;
    let fiber_const = fiber_ricci_constant(n, m, eps, rho);
    let fib = collect(&|t| Ok(crate::warp::fiber_ricci_formula(&data, &sol, t)? - fiber_const))?;
    let wrong = data.with_mu(mu + MU_PERTURBATION);
    let detect = collect(&|t| Ok(residual_eq3(&wrong, &sol, t)?.abs().max(residual_eq4(&wrong, &sol, t)?.abs())))?;
    let detect_max = detect.iter().cloned().fold(0.0, f64::max);

    let i_chart = Chart::new("I", &["t"], &[(lo, hi)], 0.05 * (hi - lo))?;
    let curvature_n = eps.value() * rho / (n as f64 - 1.0);
    let n_metric = space_form(m - 1, curvature_n)?;
    let base = warped_metric(&MetricField::euclidean(i_chart.clone()), &n_metric, &sol.speed_field(&i_chart, 0)?)?;
    let phi = sol.as_field(base.chart(), 0)?;
    let total = warped_metric(&base, &space_form(n - m, eps.value())?, &phi)?;
    let points = total.chart().sample(ctx.run.samples, ctx.run.seed);
    let mut suite = Suite::new(total.chart().names(), points);

    suite.push(CheckResult::from_residuals("reduced-1", red1, CLOSED_FORM_TOL, None));
    suite.push(CheckResult::from_residuals("reduced-2", red2, CLOSED_FORM_TOL, None));
    suite.push(CheckResult::from_residuals("eq3", eq3, CLOSED_FORM_TOL, Some(mu)));
    suite.push(CheckResult::from_residuals("eq4", eq4, CLOSED_FORM_TOL, Some(mu)));
    suite.push(CheckResult::from_residuals("fiber-ricci", fib, CLOSED_FORM_TOL, Some(fiber_const)));
    suite.push(lower_bound_check("mu-perturbation", vec![detect_max], DETECTION_FLOOR, 0.0));

    warped_block(ctx, &Warped { data: &data, base: &base, phi: &phi, total: &total }, &mut suite)?;
    let base_pts = prefix(&suite.points, m);
    let base_fit = einstein_check(&base, &base_pts, tol, cfg)?.renamed("einstein-base");
    let mu_hat = base_fit.estimated_constant.unwrap_or(f64::NAN);
    suite.push_column(base_fit);
    suite.push(constant_check("mu-estimate", mu_hat, mu, tol));

    if let Some(profile) = prop2_profile(&sol, base.chart(), rho, n, m)? {
        suite.push_column(gradient_bound_check(&profile, &base_pts, cfg)?);
        let rot = rotational_from_profile(&profile, n - m)?;
        suite.push_column(isometry_check(&rot, &total, &suite.points, ISOMETRY_TOL, cfg)?);
    }
    Ok(suite)
}

/// Isometric profile of `I ×_{|φ'|} N` with last coordinate `φ`, for the
/// cases with a Euclidean model (`ρ >= 0`, `ε = 1`).
fn prop2_profile(sol: &WarpSolution, chart: &Chart, rho: f64, n: usize, m: usize) -> ScenarioResult<Option<ImmersionMap>> {
    let s = sol.clone();
    if sol.data.eps != Eps::Plus || rho < 0.0 {
        return Ok(None);
    }
    if rho == 0.0 {
        // N flat: h(t, z) = (z, 0, 0)
        return Ok(Some(ImmersionMap::new(chart.clone(), m + 2, move |p| {
            let mut x = p[1..].to_vec();
            x.extend([0.0, 0.0, s.phi(p[0]).unwrap_or(f64::NAN)]);
            x
        })));
    }
    // φ = R cos(κs − δ), N = S^{m−1}(R): h = (R sin(κs − δ)·z, 0)
    let r = ((n as f64 - 1.0) / rho).sqrt();
    let (a, b, t0) = (sol.params.a, sol.params.b, sol.params.t0);
    let delta = b.atan2(a);
    Ok(Some(ImmersionMap::new(chart.clone(), m + 2, move |p| {
        let arg = (p[0] - t0) / r - delta;
        let mut x: Vec<f64> = unit_sphere_point(&p[1..]).into_iter().map(|z| r * arg.sin() * z).collect();
        x.extend([0.0, s.phi(p[0]).unwrap_or(f64::NAN)]);
        x
    })))
}

fn thm2_identities(ctx: &Ctx) -> ScenarioResult<Suite> {
    let p = ctx.params;
    let (n, m, rho) = (p.int("n"), p.int("m"), p.get("rho"));
    let k = n - m;
    let (cfg, tol) = (&ctx.run.fd, ctx.run.curvature_tol);
    let r = ((n as f64 - 1.0) / rho).sqrt();

    // upper hemisphere θ1 < π/2 of S^m(R), where R cos θ1 > 0
    let sphere = sphere_chart(m)?;
    let mut bounds: Vec<(f64, f64)> = sphere.lower().iter().copied().zip(sphere.upper().iter().copied()).collect();
    bounds[0] = (0.0, PI / 2.0);
    let chart = Chart::with_margins("S+", sphere.names().to_vec(), &bounds, sphere.margins())?;
    let r2 = r * r;
    let base = MetricField::diagonal(chart.clone(), move |q| unit_round_diagonal(q).into_iter().map(|d| r2 * d).collect());
    let phi = ScalarField::new(chart.clone(), move |q| r * q[0].cos()).with_gradient(move |q| {
        let mut g = vec![0.0; q.len()];
        g[0] = -r * q[0].sin();
        g
    });
    let total = warped_metric(&base, &round_sphere(k, 1.0)?, &phi)?;
    let mu = mu_from_rho(n, m, rho);
    let data = EinsteinData::new(n, m, rho, Eps::Plus)?.with_mu(mu);
    let points = total.chart().sample(ctx.run.samples, ctx.run.seed);
    let mut suite = Suite::new(total.chart().names(), points);
    let base_pts = prefix(&suite.points, m);

    warped_block(ctx, &Warped { data: &data, base: &base, phi: &phi, total: &total }, &mut suite)?;
    let base_fit = einstein_check(&base, &base_pts, tol, cfg)?.renamed("einstein-base");
    let mu_hat = base_fit.estimated_constant.unwrap_or(f64::NAN);
    suite.push_column(base_fit);
    suite.push(constant_check("mu-estimate", mu_hat, mu, tol));

    let s_l = par_values(&base_pts, |q| scalar_curvature(&base, q, cfg))?;
    let s_mean = s_l.iter().sum::<f64>() / s_l.len() as f64;
    let floor = (2.0 * m as f64 - n as f64) * rho;
    suite.push_column(lower_bound_check("scalar-bound", s_l, floor, tol));

    // u(s) = a sin(π/2 + s/a) with a from the sampled scalar curvature
    let (u, a) = closed_form_u(&data.with_scalar(s_mean), PI / 2.0)?;
    suite.push(constant_check("a-estimate", a, r, tol));
    let u_pts: Vec<Vec<f64>> = u.chart().sample(100, ctx.run.seed);
    let ode = par_values(&u_pts, |q| {
        let (v, d) = (u.value(q)?, gradient(&u, q, cfg)?[0]);
        Ok(d * d - 1.0 + v * v / (a * a))
    })?;
    suite.push(CheckResult::from_residuals("u-ode", ode, EXACT_TOL, Some(a)));
    let line = MetricField::euclidean(u.chart().clone());
    suite.push(gradient_identity_check(&line, &u, a, &u_pts, ISOMETRY_TOL, cfg)?);
    let u_chart_hi = u.chart().upper()[0];
    let along = par_values(&base_pts, |q| {
        let s = r * q[0];
        if s > u_chart_hi {
            return Ok(f64::NAN);
        }
        Ok(u.value(&[s])? - phi.value(q)?)
    })?;
    suite.push_column(CheckResult::from_residuals("u-profile", along, tol, None));

    // S^n(R) ⊂ R^{n+1} ⊂ R^{n+2}: profile R·(x_1, ..., x_m, 0, x_0)
    let profile = ImmersionMap::new(chart, m + 2, move |q| {
        let x = unit_sphere_point(q);
        let mut out: Vec<f64> = x[1..].iter().map(|v| r * v).collect();
        out.extend([0.0, r * x[0]]);
        out
    });
    suite.push_column(gradient_bound_check(&profile, &base_pts, cfg)?);
    let rot = rotational_from_profile(&profile, k)?;
    suite.push_column(isometry_check(&rot, &total, &suite.points, ISOMETRY_TOL, cfg)?);
    Ok(suite)
}

fn warped_rep(ctx: &Ctx) -> ScenarioResult<Suite> {
    let p = ctx.params;
    let (d, v, r) = (p.int("d"), p.int("v"), p.get("r"));
    if v >= d {
        return Err(constraint(format!("need v < d (v = {v}, d = {d})")));
    }
    let (cfg, tol) = (&ctx.run.fd, ctx.run.curvature_tol);
    let k = d - v;
    let names: Vec<String> = (0..v).map(|i| format!("x{i}")).collect();
    let mut bounds = vec![(0.5 * r, 1.5 * r)];
    bounds.extend(std::iter::repeat_n((-r, r), v - 1));
    let margins: Vec<f64> = bounds.iter().map(|b| 0.05 * (b.1 - b.0)).collect();
    let v_chart = Chart::with_margins("V", names, &bounds, &margins)?;
    let v_map = ImmersionMap::new(v_chart.clone(), d, move |x| {
        let mut out = x.to_vec();
        out.resize(d, 0.0);
        out
    });
    // sphere in span(e_0, e_v, ..., e_{d-1}), q = r e_0
    let sphere_map = ImmersionMap::new(sphere_chart(k)?, d, move |th| {
        let y = unit_sphere_point(th);
        let mut out = vec![0.0; d];
        out[0] = r * y[0];
        out[v..].iter_mut().zip(&y[1..]).for_each(|(o, yi)| *o = r * yi);
        out
    });
    let mut q = vec![0.0; d];
    q[0] = r;
    let rep = WarpedRepresentation { q: q.clone(), r, v_map: v_map.clone(), sphere_map: sphere_map.clone() };
    let psi = warped_representation(&rep)?;
    let sigma = rep.sigma_field();
    let intrinsic = warped_metric(&MetricField::euclidean(v_chart.clone()), &round_sphere(k, r)?, &sigma)?;
    let points = psi.chart().sample(ctx.run.samples, ctx.run.seed);
    let mut suite = Suite::new(psi.chart().names(), points);

    suite.push_column(isometry_check(&psi, &intrinsic, &suite.points, ISOMETRY_TOL, cfg)?);
    let (fit, scalars) = einstein_fit(&psi.pullback_field(cfg), &suite.points, tol, cfg)?;
    let rho_hat = fit.estimated_constant.unwrap_or(f64::NAN);
    suite.push_column(fit);
    suite.push(constant_check("rho-estimate", rho_hat, 0.0, tol));

    let sphere_pts = sphere_chart(k)?.sample(ctx.run.samples, ctx.run.seed);
    let fixed = par_values(&sphere_pts, |th| {
        let y = sphere_map.value(th)?;
        let img = rep.psi(&q, &y);
        Ok(img.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    })?;
    suite.push(CheckResult::from_residuals("psi-fixes-sphere", fixed, EXACT_TOL, None));
    extra_columns(ctx, &mut suite, &MetricField::euclidean(v_chart), &sigma, Some(scalars))?;
    Ok(suite)
}
