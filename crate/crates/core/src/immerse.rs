//! Explicit immersions into Euclidean space and their first fundamental forms.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::geometry::fd::diff1;
use crate::geometry::field::PointFn;
use crate::geometry::models::{sphere_chart, unit_sphere_point};
use crate::geometry::{Chart, FdConfig, MetricField, ScalarField};

/// Smallest admissible singular value of a Jacobian.
pub const MIN_SINGULAR: f64 = 1e-8;

/// A map from a chart into `R^ambient_dim`.
#[derive(Clone)]
pub struct ImmersionMap {
    chart: Chart,
    ambient_dim: usize,
    eval: PointFn<Vec<f64>>,
}

impl fmt::Debug for ImmersionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionMap")
            .field("chart", &self.chart.name())
            .field("dim", &self.chart.dim())
            .field("ambient_dim", &self.ambient_dim)
            .finish()
    }
}

impl ImmersionMap {
    pub fn new<F>(chart: Chart, ambient_dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            chart,
            ambient_dim,
            eval: Arc::new(eval),
        }
    }

    /// The inclusion of a chart into `R^dim`.
    pub fn identity(chart: Chart) -> Self {
        let d = chart.dim();
        Self::new(chart, d, |p| p.to_vec())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn value(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        let x = (self.eval)(p);
        if x.len() != self.ambient_dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.len(),
            });
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(GeomError::NonFiniteValue { point: p.to_vec() })
        }
    }

    /// Finite-difference Jacobian, `ambient_dim × dim`.
    pub fn jacobian(&self, p: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.ambient_dim, self.dim());
        for i in 0..self.dim() {
            let col = diff1(&self.chart, p, i, cfg, |q| self.value(q))?;
            j.column_mut(i).copy_from_slice(&col);
        }
        Ok(j)
    }

    /// Same map on a chart of equal dimension.
    pub fn on_chart(&self, chart: Chart) -> Result<Self> {
        if chart.dim() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                found: chart.dim(),
            });
        }
        Ok(Self {
            chart,
            ..self.clone()
        })
    }

    /// Reorders the chart coordinates: new coordinate `i` is old `perm[i]`.
    pub fn reorder(&self, perm: &[usize]) -> Result<Self> {
        let chart = self.chart.permuted(perm)?;
        let perm = perm.to_vec();
        let eval = self.eval.clone();
        Ok(Self::new(chart, self.ambient_dim, move |p| {
            let mut q = vec![0.0; p.len()];
            for (i, &k) in perm.iter().enumerate() {
                q[k] = p[i];
            }
            eval(&q)
        }))
    }

    /// Appends fixed ambient coordinates: the product with a point.
    pub fn append_constant(&self, point: &[f64]) -> Self {
        let eval = self.eval.clone();
        let point = point.to_vec();
        Self::new(self.chart.clone(), self.ambient_dim + point.len(), move |p| {
            let mut x = eval(p);
            x.extend_from_slice(&point);
            x
        })
    }

    /// Component `k` of the map as a scalar field.
    pub fn component(&self, k: usize) -> Result<ScalarField> {
        if k >= self.ambient_dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.ambient_dim,
                found: k,
            });
        }
        let me = self.clone();
        Ok(ScalarField::new(self.chart.clone(), move |p| {
            me.value(p).map(|x| x[k]).unwrap_or(f64::NAN)
        }))
    }

    /// The induced metric as a field, for curvature computations.
    pub fn pullback_field(&self, cfg: &FdConfig) -> MetricField {
        let me = self.clone();
        let cfg = *cfg;
        let d = self.dim();
        MetricField::new(self.chart.clone(), move |p| match me.jacobian(p, &cfg) {
            Ok(j) => j.transpose() * j,
            Err(_) => DMatrix::from_element(d, d, f64::NAN),
        })
    }
}

/// `JᵀJ` at `p`.
pub fn pullback_metric(f: &ImmersionMap, p: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
    let j = f.jacobian(p, cfg)?;
    let sigma_min = j
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(sigma_min >= MIN_SINGULAR) || j.ncols() > j.nrows() {
        return Err(GeomError::RankDeficient {
            sigma_min: if j.ncols() > j.nrows() { 0.0 } else { sigma_min },
        });
    }
    let g = j.transpose() * &j;
    Ok((&g + g.transpose()) * 0.5)
}

/// Radius-`r` sphere `S^k(r) ⊂ R^{k+1}` in spherical coordinates.
pub fn sphere_inclusion(k: usize, r: f64) -> Result<ImmersionMap> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeomError::InvalidChart(format!("sphere radius must be positive, got {r}")));
    }
    Ok(ImmersionMap::new(sphere_chart(k)?, k + 1, move |p| {
        unit_sphere_point(p).into_iter().map(|x| r * x).collect()
    }))
}

fn check_positive(phi: &ScalarField) -> Result<()> {
    let mut probes = phi.chart().sample(64, 0);
    probes.push(phi.chart().center());
    for p in probes {
        let v = phi.value(&p)?;
        if !(v > 0.0) {
            return Err(GeomError::NonPositiveWarp { point: p, value: v });
        }
    }
    Ok(())
}

/// `f(z, y) = (h(z), φ(z)·y)` with `y` on the unit sphere `S^{fiber_k}`.
pub fn rotational_immersion(h: &ImmersionMap, phi: &ScalarField, fiber_k: usize) -> Result<ImmersionMap> {
    if phi.chart().dim() != h.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: h.dim(),
            found: phi.chart().dim(),
        });
    }
    check_positive(phi)?;
    let chart = Chart::product(h.chart(), &sphere_chart(fiber_k)?);
    let (h, phi) = (h.clone(), phi.clone());
    let d = h.dim();
    let ambient = h.ambient_dim() + fiber_k + 1;
    Ok(ImmersionMap::new(chart, ambient, move |p| {
        let (Ok(mut x), Ok(w)) = (h.value(&p[..d]), phi.value(&p[..d])) else {
            return vec![f64::NAN; ambient];
        };
        x.extend(unit_sphere_point(&p[d..]).into_iter().map(|y| w * y));
        x
    }))
}

/// Rotational immersion generated by a profile `g = (h, φ)` whose last
/// ambient coordinate is `φ`.
pub fn rotational_from_profile(profile: &ImmersionMap, fiber_k: usize) -> Result<ImmersionMap> {
    let a = profile.ambient_dim();
    if a < 2 {
        return Err(GeomError::DimensionMismatch { expected: 2, found: a });
    }
    let g = profile.clone();
    let h = ImmersionMap::new(profile.chart().clone(), a - 1, move |p| {
        let mut x = g.value(p).unwrap_or_else(|_| vec![f64::NAN; a]);
        x.pop();
        x
    });
    rotational_immersion(&h, &profile.component(a - 1)?, fiber_k)
}

/// `f0 × id` on `chart(f0) × [-1, 1]^k`.
pub fn cylinder_immersion(f0: &ImmersionMap, k: usize) -> Result<ImmersionMap> {
    let chart = Chart::product(f0.chart(), &Chart::cube("R", k, -1.0, 1.0)?);
    let f0 = f0.clone();
    let d = f0.dim();
    let fa = f0.ambient_dim();
    Ok(ImmersionMap::new(chart, fa + k, move |p| {
        let mut x = f0.value(&p[..d]).unwrap_or_else(|_| vec![f64::NAN; fa]);
        x.extend_from_slice(&p[d..]);
        x
    }))
}

/// Cone `(t, y) ↦ (t/R)·fiber(y)` over a map into the sphere of radius `R`,
/// for `t` in `t_interval ⊂ (0, ∞)`.
///
/// The induced metric is `dt² + (t/R)² g_fiber`; for `R = 1` this is the map
/// `(t, y) ↦ t y`.
pub fn cone_map(fiber: &ImmersionMap, t_interval: (f64, f64), radius: f64) -> Result<ImmersionMap> {
    let (lo, hi) = t_interval;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(GeomError::InvalidChart(format!(
            "cone interval must lie in (0, inf), got ({lo}, {hi})"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GeomError::InvalidChart(format!("cone radius must be positive, got {radius}")));
    }
    let t_chart = Chart::new("I", &["t"], &[(lo, hi)], 0.05 * (hi - lo))?;
    let chart = Chart::product(&t_chart, fiber.chart());
    let fiber = fiber.clone();
    let ambient = fiber.ambient_dim();
    Ok(ImmersionMap::new(chart, ambient, move |p| {
        let s = p[0] / radius;
        match fiber.value(&p[1..]) {
            Ok(y) => y.into_iter().map(|v| s * v).collect(),
            Err(_) => vec![f64::NAN; ambient],
        }
    }))
}

/// `(f1(x), f2(y))` on the product chart.
pub fn product_immersion(f1: &ImmersionMap, f2: &ImmersionMap) -> ImmersionMap {
    let chart = Chart::product(f1.chart(), f2.chart());
    let (a, b) = (f1.clone(), f2.clone());
    let d = a.dim();
    let ambient = a.ambient_dim() + b.ambient_dim();
    ImmersionMap::new(chart, ambient, move |p| match (a.value(&p[..d]), b.value(&p[d..])) {
        (Ok(mut x), Ok(y)) => {
            x.extend(y);
            x
        }
        _ => vec![f64::NAN; ambient],
    })
}

/// Euclidean space as a warped product `V ×_σ S(r)`.
///
/// `v_map` parametrises an open piece of a linear subspace `V`, `sphere_map`
/// an open piece of the radius-`r` sphere in the subspace spanned by `q` and
/// `V^⊥`; both map into the same ambient space, and `q ∈ V` with `|q| = r`.
#[derive(Debug, Clone)]
pub struct WarpedRepresentation {
    pub q: Vec<f64>,
    pub r: f64,
    pub v_map: ImmersionMap,
    pub sphere_map: ImmersionMap,
}

impl WarpedRepresentation {
    /// `σ(p₀) = ⟨p₀, q⟩ / r²`.
    pub fn sigma(&self, p0: &[f64]) -> f64 {
        dot(p0, &self.q) / (self.r * self.r)
    }

    /// `ψ(p₀, p₁) = p₀ + σ(p₀)(p₁ − q)` on ambient points.
    pub fn psi(&self, p0: &[f64], p1: &[f64]) -> Vec<f64> {
        let s = self.sigma(p0);
        p0.iter()
            .zip(p1)
            .zip(&self.q)
            .map(|((a, b), q)| a + s * (b - q))
            .collect()
    }

    /// `σ` as a field on the `V` chart.
    pub fn sigma_field(&self) -> ScalarField {
        let rep = self.clone();
        ScalarField::new(self.v_map.chart().clone(), move |p| match rep.v_map.value(p) {
            Ok(x) => rep.sigma(&x),
            Err(_) => f64::NAN,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ψ ∘ (v_map × sphere_map)` on the product chart.
pub fn warped_representation(rep: &WarpedRepresentation) -> Result<ImmersionMap> {
    let n = rep.q.len();
    if rep.v_map.ambient_dim() != n || rep.sphere_map.ambient_dim() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            found: rep.v_map.ambient_dim().min(rep.sphere_map.ambient_dim()),
        });
    }
    let qn = dot(&rep.q, &rep.q).sqrt();
    if !(rep.r > 0.0) || (qn - rep.r).abs() > 1e-12 * rep.r {
        return Err(GeomError::ParameterConstraintViolated(format!(
            "|q| = r fails: |q| = {qn}, r = {}",
            rep.r
        )));
    }
    let mut probes = rep.v_map.chart().sample(64, 0);
    probes.push(rep.v_map.chart().center());
    for p in &probes {
        let s = rep.sigma(&rep.v_map.value(p)?);
        if !(s > 0.0) {
            return Err(GeomError::NonPositiveSigma { value: s });
        }
    }
    let chart = Chart::product(rep.v_map.chart(), rep.sphere_map.chart());
    let rep = rep.clone();
    let d = rep.v_map.dim();
    Ok(ImmersionMap::new(chart, n, move |p| {
        match (rep.v_map.value(&p[..d]), rep.sphere_map.value(&p[d..])) {
            (Ok(p0), Ok(p1)) => rep.psi(&p0, &p1),
            _ => vec![f64::NAN; n],
        }
    }))
}

/// Rows of ambient coordinates at `count` sampled chart points.
pub fn point_cloud(f: &ImmersionMap, count: usize, seed: u64) -> Result<String> {
    let mut out = String::new();
    let header: Vec<String> = (0..f.ambient_dim()).map(|i| format!("x{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for p in f.chart().sample(count, seed) {
        let x = f.value(&p)?;
        let row: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{ricci, scalar_curvature};
    use crate::geometry::models::unit_round_diagonal;

    fn cfg() -> FdConfig {
        FdConfig::default()
    }

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    fn circle() -> ImmersionMap {
        sphere_inclusion(1, 1.0).unwrap()
    }

    #[test]
    fn sphere_examples() {
        assert_eq!(circle().value(&[0.0]).unwrap(), vec![1.0, 0.0]);
        let s = sphere_inclusion(2, 2.0).unwrap();
        for p in s.chart().sample(100, 5) {
            let x = s.value(&p).unwrap();
            assert!((dot(&x, &x).sqrt() - 2.0).abs() < 1e-12);
        }
        let s = sphere_inclusion(2, 1.0).unwrap();
        for p in s.chart().sample(100, 6) {
            let g = pullback_metric(&s, &p, &cfg()).unwrap();
            let d = unit_round_diagonal(&p);
            assert!(max_diff(&g, &DMatrix::from_diagonal(&d.into())) < 1e-7);
        }
    }

    #[test]
    fn identity_pullback() {
        let f = ImmersionMap::identity(Chart::cube("R", 3, -1.0, 1.0).unwrap());
        let g = pullback_metric(&f, &[0.1, 0.2, -0.3], &cfg()).unwrap();
        assert!(max_diff(&g, &DMatrix::identity(3, 3)) < 1e-10);
    }

    #[test]
    fn rank_deficiency_detected() {
        let chart = Chart::cube("R", 2, -1.0, 1.0).unwrap();
        let f = ImmersionMap::new(chart, 2, |p| vec![p[0] + p[1], p[0] + p[1]]);
        assert!(matches!(
            pullback_metric(&f, &[0.0, 0.0], &cfg()),
            Err(GeomError::RankDeficient { .. })
        ));
    }

    #[test]
    fn rotational_examples() {
        // constant h, φ ≡ 1: the unit circle in the last two coordinates
        let base = Chart::new("L", &["z"], &[(0.0, 1.0)], 0.05).unwrap();
        let h = ImmersionMap::new(base.clone(), 2, |_| vec![3.0, 4.0]);
        let one = ScalarField::constant(base.clone(), 1.0);
        let f = rotational_immersion(&h, &one, 1).unwrap();
        for p in f.chart().sample(20, 1) {
            let x = f.value(&p).unwrap();
            assert_eq!(&x[..2], &[3.0, 4.0]);
            assert!((x[2].hypot(x[3]) - 1.0).abs() < 1e-15);
        }
        // isometric profile g(t) = (0, t): flat R³ in cylindrical form
        let h = ImmersionMap::new(base.clone(), 1, |_| vec![0.0]);
        let t = ScalarField::coordinate(Chart::new("L", &["z"], &[(0.5, 2.0)], 0.05).unwrap(), 0);
        let h = h.on_chart(t.chart().clone()).unwrap();
        let f = rotational_immersion(&h, &t, 2).unwrap();
        for p in f.chart().sample(50, 2) {
            let x = f.value(&p).unwrap();
            assert!((dot(&x[1..], &x[1..]).sqrt() - p[0]).abs() < 1e-14);
            let g = pullback_metric(&f, &p, &cfg()).unwrap();
            let mut d = vec![1.0];
            d.extend(unit_round_diagonal(&p[1..]).iter().map(|v| p[0] * p[0] * v));
            assert!(max_diff(&g, &DMatrix::from_diagonal(&d.into())) < 1e-7);
        }
        let neg = ScalarField::constant(base.clone(), -1.0);
        let h = ImmersionMap::new(base, 1, |_| vec![0.0]);
        assert!(matches!(
            rotational_immersion(&h, &neg, 1),
            Err(GeomError::NonPositiveWarp { .. })
        ));
    }

    #[test]
    fn profile_split_puts_phi_last() {
        let chart = Chart::new("L", &["t"], &[(0.5, 2.0)], 0.05).unwrap();
        let g = ImmersionMap::new(chart, 2, |p| vec![p[0].sin(), 2.0 + p[0].cos()]);
        let f = rotational_from_profile(&g, 1).unwrap();
        let x = f.value(&[1.0, 0.7]).unwrap();
        assert_eq!(x[0], 1f64.sin());
        assert!((x[1].hypot(x[2]) - (2.0 + 1f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn cylinder_examples() {
        let line = ImmersionMap::identity(Chart::new("I", &["s"], &[(0.0, 1.0)], 0.05).unwrap());
        let plane = cylinder_immersion(&line, 1).unwrap();
        for p in plane.chart().sample(10, 3) {
            let g = pullback_metric(&plane, &p, &cfg()).unwrap();
            assert!(max_diff(&g, &DMatrix::identity(2, 2)) < 1e-10);
        }
        let cyl = cylinder_immersion(&circle(), 1).unwrap();
        for p in cyl.chart().sample(20, 4) {
            let j = cyl.jacobian(&p, &cfg()).unwrap();
            let g = j.transpose() * &j;
            assert!(max_diff(&g, &DMatrix::identity(2, 2)) < 1e-8);
            assert!(j.column(0).dot(&j.column(1)).abs() < 1e-12);
        }
        // cylinder over a flat torus is flat
        let torus = product_immersion(&circle(), &circle());
        let c = cylinder_immersion(&torus, 1).unwrap();
        let g = c.pullback_field(&cfg());
        for p in c.chart().sample(4, 5) {
            assert!(ricci(&g, &p, &cfg()).unwrap().amax() < 1e-5);
        }
    }

    #[test]
    fn cone_examples() {
        let polar = cone_map(&circle(), (0.5, 2.0), 1.0).unwrap();
        for p in polar.chart().sample(50, 7) {
            let g = pullback_metric(&polar, &p, &cfg()).unwrap();
            let want = DMatrix::from_diagonal(&vec![1.0, p[0] * p[0]].into());
            assert!(max_diff(&g, &want) < 1e-7);
        }
        let cone = cone_map(&sphere_inclusion(2, 1.0).unwrap(), (0.5, 2.0), 1.0).unwrap();
        let g = cone.pullback_field(&cfg());
        for p in cone.chart().sample(4, 8) {
            assert!(scalar_curvature(&g, &p, &cfg()).unwrap().abs() < 1e-4);
        }
        // fiber S²(1/√c): dt² + c t² g_{S²(1/√c)} = dt² + t² (unit round)
        let c: f64 = 4.0;
        let r = 1.0 / c.sqrt();
        let cone = cone_map(&sphere_inclusion(2, r).unwrap(), (0.5, 2.0), r).unwrap();
        for p in cone.chart().sample(50, 9) {
            let g = pullback_metric(&cone, &p, &cfg()).unwrap();
            let mut d = vec![1.0];
            d.extend(unit_round_diagonal(&p[1..]).iter().map(|v| c * p[0] * p[0] * r * r * v));
            assert!(max_diff(&g, &DMatrix::from_diagonal(&d.into())) < 1e-7);
        }
        assert!(cone_map(&circle(), (0.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn product_examples() {
        let torus = product_immersion(&circle(), &circle());
        assert_eq!(torus.ambient_dim(), 4);
        for p in torus.chart().sample(10, 1) {
            let g = pullback_metric(&torus, &p, &cfg()).unwrap();
            assert!(max_diff(&g, &DMatrix::identity(2, 2)) < 1e-8);
        }
        let g = torus.pullback_field(&cfg());
        for p in torus.chart().sample(4, 2) {
            assert!(ricci(&g, &p, &cfg()).unwrap().amax() < 1e-5);
        }
        let with_point = circle().append_constant(&[2.0]);
        let p = [0.4];
        assert_eq!(pullback_metric(&with_point, &p, &cfg()).unwrap(), pullback_metric(&circle(), &p, &cfg()).unwrap());
    }

    #[test]
    fn reorder_swaps_coordinates() {
        let torus = product_immersion(&sphere_inclusion(1, 1.0).unwrap(), &sphere_inclusion(1, 2.0).unwrap());
        let swapped = torus.reorder(&[1, 0]).unwrap();
        assert_eq!(swapped.value(&[0.3, 0.7]).unwrap(), torus.value(&[0.7, 0.3]).unwrap());
        let g = pullback_metric(&swapped, &[1.0, 2.0], &cfg()).unwrap();
        assert!((g[(0, 0)] - 4.0).abs() < 1e-8 && (g[(1, 1)] - 1.0).abs() < 1e-8);
    }

    fn polar_rep() -> WarpedRepresentation {
        let ray = Chart::new("V", &["s"], &[(0.5, 2.0)], 0.05).unwrap();
        WarpedRepresentation {
            q: vec![1.0, 0.0],
            r: 1.0,
            v_map: ImmersionMap::new(ray, 2, |p| vec![p[0], 0.0]),
            sphere_map: circle(),
        }
    }

    #[test]
    fn warped_representation_polar() {
        let rep = polar_rep();
        assert_eq!(rep.psi(&[1.0, 0.0], &[0.6, 0.8]), vec![0.6, 0.8]);
        assert_eq!(rep.psi(&[1.7, 0.0], &[1.0, 0.0]), vec![1.7, 0.0]);
        let f = warped_representation(&rep).unwrap();
        for p in f.chart().sample(100, 3) {
            let g = pullback_metric(&f, &p, &cfg()).unwrap();
            let want = DMatrix::from_diagonal(&vec![1.0, p[0] * p[0]].into());
            assert!(max_diff(&g, &want) < 1e-7);
        }
    }

    #[test]
    fn warped_representation_rotation() {
        let plane = Chart::new("V", &["x", "y"], &[(0.5, 2.0), (-1.0, 1.0)], 0.05).unwrap();
        let rep = WarpedRepresentation {
            q: vec![1.0, 0.0, 0.0],
            r: 1.0,
            v_map: ImmersionMap::new(plane, 3, |p| vec![p[0], p[1], 0.0]),
            sphere_map: ImmersionMap::new(sphere_chart(1).unwrap(), 3, |p| {
                vec![p[0].cos(), 0.0, p[0].sin()]
            }),
        };
        let f = warped_representation(&rep).unwrap();
        let (x, y, th) = (1.3, 0.2, 0.9);
        let v = f.value(&[x, y, th]).unwrap();
        let want = [x * f64::cos(th), y, x * f64::sin(th)];
        for k in 0..3 {
            assert!((v[k] - want[k]).abs() < 1e-15);
        }
        let g = pullback_metric(&f, &[x, y, th], &cfg()).unwrap();
        assert!(max_diff(&g, &DMatrix::from_diagonal(&vec![1.0, 1.0, x * x].into())) < 1e-7);
    }

    #[test]
    fn sigma_must_be_positive() {
        let mut rep = polar_rep();
        rep.v_map = ImmersionMap::new(Chart::new("V", &["s"], &[(-2.0, -0.5)], 0.05).unwrap(), 2, |p| {
            vec![p[0], 0.0]
        });
        assert!(matches!(
            warped_representation(&rep),
            Err(GeomError::NonPositiveSigma { .. })
        ));
        let mut rep = polar_rep();
        rep.q = vec![2.0, 0.0];
        assert!(warped_representation(&rep).is_err());
    }

    #[test]
    fn point_cloud_rows() {
        let text = point_cloud(&circle(), 5, 0).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x0,x1");
        assert_eq!(lines.len(), 6);
    }
}
