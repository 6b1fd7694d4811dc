//! Levi-Civita connection and curvature of a [`MetricField`].
//!
//! Conventions: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, stored as
//! `R^l_{ijk}` with `R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l`, and
//! `Ric_{jk} = R^i_{ijk}`. Round spheres have positive Ricci curvature.
//!
//! Second derivatives of the metric are never taken directly: the Christoffel
//! symbols are differentiated numerically (nested finite differences).

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::geometry::fd::diff1;
use crate::geometry::{gradient, metric_partial, second_derivatives, FdConfig, MetricField, ScalarField};

/// Largest accepted condition number of a metric matrix.
pub const MAX_CONDITION: f64 = 1e12;
/// Smallest accepted Gram determinant of a plane in [`sectional`].
pub const MIN_GRAM: f64 = 1e-10;

/// Inverse of a symmetric positive-definite metric matrix.
///
/// Eigenvalues only gate the conditioning; the inverse itself comes from a
/// Cholesky solve, which is markedly more accurate than the iterative
/// eigen-decomposition on nearly diagonal input.
pub fn invert_metric(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (g + g.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let lmin = eig.min();
    let lmax = eig.max();
    if !(lmin > 0.0) || lmax / lmin > MAX_CONDITION {
        let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
        return Err(GeomError::SingularMetric { condition });
    }
    let chol = sym.cholesky().ok_or(GeomError::SingularMetric {
        condition: f64::INFINITY,
    })?;
    let inv = chol.inverse();
    Ok((&inv + inv.transpose()) * 0.5)
}

/// `Γ^k_{ij}` at one point, dense.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_{ij}`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }
}

/// Christoffel symbols of the second kind,
/// `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`.
pub fn christoffel(g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<Christoffel> {
    let gp = g.value(p)?;
    let inv = invert_metric(&gp)?;
    let d = g.dim();
    let dg: Vec<DMatrix<f64>> = (0..d)
        .map(|i| metric_partial(g, p, i, cfg))
        .collect::<Result<_>>()?;
    Ok(christoffel_from(&inv, &dg))
}

fn christoffel_from(inv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Christoffel {
    let d = dg.len();
    let mut data = vec![0.0; d * d * d];
    for i in 0..d {
        for j in i..d {
            // first-kind symbols Γ_{ijl}
            let lowered: Vec<f64> = (0..d)
                .map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                .collect();
            for k in 0..d {
                let v: f64 = (0..d).map(|l| inv[(k, l)] * lowered[l]).sum();
                data[(k * d + i) * d + j] = v;
                data[(k * d + j) * d + i] = v;
            }
        }
    }
    Christoffel { dim: d, data }
}

/// Connection data at a point: metric, inverse, `Γ` and `∂_m Γ` for every `m`.
#[derive(Debug, Clone)]
pub struct ConnectionJet {
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub gamma: Christoffel,
    dgamma: Vec<Christoffel>,
}

impl ConnectionJet {
    pub fn compute(g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<Self> {
        let metric = g.value(p)?;
        let inverse = invert_metric(&metric)?;
        let gamma = christoffel(g, p, cfg)?;
        let d = g.dim();
        let dgamma = (0..d)
            .map(|m| {
                diff1(g.chart(), p, m, cfg, |q| christoffel(g, q, cfg).map(|c| c.data)).map(
                    |data| Christoffel { dim: d, data },
                )
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            metric,
            inverse,
            gamma,
            dgamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim
    }

    /// `∂_m Γ^k_{ij}`.
    pub fn dgamma(&self, m: usize, k: usize, i: usize, j: usize) -> f64 {
        self.dgamma[m].get(k, i, j)
    }

    /// `R^l_{ijk}`.
    pub fn riemann_component(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let g = &self.gamma;
        let mut r = self.dgamma(i, l, j, k) - self.dgamma(j, l, i, k);
        for m in 0..self.dim() {
            r += g.get(l, i, m) * g.get(m, j, k) - g.get(l, j, m) * g.get(m, i, k);
        }
        r
    }

    pub fn riemann(&self) -> Riemann {
        let d = self.dim();
        let mut data = vec![0.0; d * d * d * d];
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        data[((l * d + i) * d + j) * d + k] = self.riemann_component(l, i, j, k);
                    }
                }
            }
        }
        Riemann {
            dim: d,
            data,
            metric: self.metric.clone(),
        }
    }

    /// Ricci tensor, symmetrised.
    pub fn ricci(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut ric = DMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                ric[(j, k)] = (0..d).map(|i| self.riemann_component(i, i, j, k)).sum();
            }
        }
        (&ric + ric.transpose()) * 0.5
    }
}

/// Full Riemann tensor `R^l_{ijk}` at a point, with the metric for lowering.
#[derive(Debug, Clone)]
pub struct Riemann {
    dim: usize,
    data: Vec<f64>,
    metric: DMatrix<f64>,
}

impl Riemann {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R^l_{ijk}`.
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim;
        self.data[((l * d + i) * d + j) * d + k]
    }

    /// `R_{lijk} = g_{lm} R^m_{ijk}`.
    pub fn lowered(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        (0..self.dim)
            .map(|m| self.metric[(l, m)] * self.get(m, i, j, k))
            .sum()
    }

    /// `⟨R(u,v)w, z⟩`.
    pub fn apply(&self, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        s += z[l] * u[i] * v[j] * w[k] * self.lowered(l, i, j, k);
                    }
                }
            }
        }
        s
    }
}

/// Ricci tensor and scalar curvature at one point.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub metric: DMatrix<f64>,
}

pub fn curvature_sample(g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<CurvatureSample> {
    let jet = ConnectionJet::compute(g, p, cfg)?;
    let ricci = jet.ricci();
    let scalar = trace_product(&jet.inverse, &ricci);
    Ok(CurvatureSample {
        point: p.to_vec(),
        ricci,
        scalar,
        metric: jet.metric,
    })
}

fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(&b.transpose()).sum()
}

pub fn riemann(g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<Riemann> {
    Ok(ConnectionJet::compute(g, p, cfg)?.riemann())
}

pub fn ricci(g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
    Ok(ConnectionJet::compute(g, p, cfg)?.ricci())
}

/// `trace(g⁻¹ Ric)`.
pub fn scalar_curvature(g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<f64> {
    Ok(curvature_sample(g, p, cfg)?.scalar)
}

/// Sectional curvature of the plane spanned by `u`, `v`.
pub fn sectional(g: &MetricField, p: &[f64], u: &[f64], v: &[f64], cfg: &FdConfig) -> Result<f64> {
    let d = g.dim();
    if u.len() != d || v.len() != d {
        return Err(GeomError::DimensionMismatch {
            expected: d,
            found: u.len().min(v.len()),
        });
    }
    let gp = g.value(p)?;
    let (uu, vv) = (DVector::from_column_slice(u), DVector::from_column_slice(v));
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &gp * b)[(0, 0)];
    let gram = inner(&uu, &uu) * inner(&vv, &vv) - inner(&uu, &vv).powi(2);
    if !(gram > MIN_GRAM) {
        return Err(GeomError::DegeneratePlane { gram });
    }
    let r = riemann(g, p, cfg)?;
    Ok(r.apply(u, v, v, u) / gram)
}

/// All coordinate-plane sectional curvatures `K(∂_i, ∂_j)`, `i < j`, from one
/// Riemann evaluation.
pub fn coordinate_sectionals(
    g: &MetricField,
    p: &[f64],
    cfg: &FdConfig,
) -> Result<Vec<((usize, usize), f64)>> {
    let r = riemann(g, p, cfg)?;
    let gp = g.value(p)?;
    let d = g.dim();
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let gram = gp[(i, i)] * gp[(j, j)] - gp[(i, j)].powi(2);
            if !(gram > MIN_GRAM) {
                return Err(GeomError::DegeneratePlane { gram });
            }
            // ⟨R(∂_i,∂_j)∂_j, ∂_i⟩ = R_{iijj} in the lowered storage
            out.push(((i, j), r.lowered(i, i, j, j) / gram));
        }
    }
    Ok(out)
}

fn check_same_dim(f: &ScalarField, g: &MetricField) -> Result<()> {
    if f.chart().dim() != g.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: g.dim(),
            found: f.chart().dim(),
        });
    }
    Ok(())
}

/// Covariant Hessian `∂_i∂_j f − Γ^k_{ij} ∂_k f`.
pub fn hessian(f: &ScalarField, g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
    check_same_dim(f, g)?;
    let gamma = christoffel(g, p, cfg)?;
    let df = gradient(f, p, cfg)?;
    let mut h = second_derivatives(f, p, cfg)?;
    let d = g.dim();
    for i in 0..d {
        for j in i..d {
            let corr: f64 = (0..d).map(|k| gamma.get(k, i, j) * df[k]).sum();
            h[(i, j)] -= corr;
            if i != j {
                h[(j, i)] -= corr;
            }
        }
    }
    Ok(h)
}

/// `trace(g⁻¹ Hess f)`.
pub fn laplacian(f: &ScalarField, g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<f64> {
    let inv = invert_metric(&g.value(p)?)?;
    Ok(trace_product(&inv, &hessian(f, g, p, cfg)?))
}

/// `g^{ij} ∂_i f ∂_j f`, clamped at zero.
pub fn gradient_norm_sq(f: &ScalarField, g: &MetricField, p: &[f64], cfg: &FdConfig) -> Result<f64> {
    check_same_dim(f, g)?;
    let inv = invert_metric(&g.value(p)?)?;
    let df = DVector::from_vec(gradient(f, p, cfg)?);
    Ok((df.transpose() * inv * &df)[(0, 0)].max(0.0))
}
