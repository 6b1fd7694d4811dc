use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::chart::Chart;
use super::fd::{diff1, diff2, FdConfig};
use crate::error::{GeomError, Result};

pub type PointFn<T> = Arc<dyn Fn(&[f64]) -> T + Send + Sync>;
pub type MetricDerivativeFn = Arc<dyn Fn(&[f64], usize) -> DMatrix<f64> + Send + Sync>;

/// A real function on a chart.
///
/// Derivatives are numerical unless an exact gradient or Hessian callback has
/// been attached, in which case the callback wins.
#[derive(Clone)]
pub struct ScalarField {
    chart: Chart,
    eval: PointFn<f64>,
    gradient: Option<PointFn<Vec<f64>>>,
    hessian: Option<PointFn<DMatrix<f64>>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("chart", &self.chart.name())
            .field("exact_gradient", &self.gradient.is_some())
            .field("exact_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(chart: Chart, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            chart,
            eval: Arc::new(eval),
            gradient: None,
            hessian: None,
        }
    }

    pub fn constant(chart: Chart, value: f64) -> Self {
        let dim = chart.dim();
        Self::new(chart, move |_| value)
            .with_gradient(move |_| vec![0.0; dim])
            .with_hessian(move |_| DMatrix::zeros(dim, dim))
    }

    /// The `i`-th coordinate function.
    pub fn coordinate(chart: Chart, i: usize) -> Self {
        let dim = chart.dim();
        Self::new(chart, move |p| p[i])
            .with_gradient(move |_| {
                let mut g = vec![0.0; dim];
                g[i] = 1.0;
                g
            })
            .with_hessian(move |_| DMatrix::zeros(dim, dim))
    }

    pub fn with_gradient<F>(mut self, grad: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(grad));
        self
    }

    pub fn with_hessian<F>(mut self, hess: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(hess));
        self
    }

    /// Same values, derivatives forced through finite differences.
    pub fn without_derivatives(&self) -> Self {
        Self {
            chart: self.chart.clone(),
            eval: self.eval.clone(),
            gradient: None,
            hessian: None,
        }
    }

    /// Same function on a chart of equal dimension (typically a sub-box).
    pub fn on_chart(&self, chart: Chart) -> Result<Self> {
        same_dim(&self.chart, &chart)?;
        Ok(Self {
            chart,
            ..self.clone()
        })
    }

    /// Pulls the field back along the projection onto the first coordinates
    /// of a product chart whose leading block is this field's chart.
    pub fn lift_to(&self, product: Chart) -> Result<Self> {
        let d = self.chart.dim();
        if product.dim() < d {
            return Err(GeomError::DimensionMismatch {
                expected: d,
                found: product.dim(),
            });
        }
        let total = product.dim();
        let eval = self.eval.clone();
        let mut lifted = ScalarField::new(product, move |p| eval(&p[..d]));
        if let Some(g) = self.gradient.clone() {
            lifted = lifted.with_gradient(move |p| {
                let mut out = g(&p[..d]);
                out.resize(total, 0.0);
                out
            });
        }
        if let Some(h) = self.hessian.clone() {
            lifted = lifted.with_hessian(move |p| {
                let mut out = DMatrix::zeros(total, total);
                out.view_mut((0, 0), (d, d)).copy_from(&h(&p[..d]));
                out
            });
        }
        Ok(lifted)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn has_exact_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        check_len(&self.chart, p)?;
        let v = (self.eval)(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeomError::NonFiniteValue { point: p.to_vec() })
        }
    }
}

/// A symmetric matrix-valued field: the metric coefficients `g_ij` on a chart.
#[derive(Clone)]
pub struct MetricField {
    chart: Chart,
    eval: PointFn<DMatrix<f64>>,
    derivative: Option<MetricDerivativeFn>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("chart", &self.chart.name())
            .field("dim", &self.chart.dim())
            .finish()
    }
}

impl MetricField {
    pub fn new<F>(chart: Chart, eval: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            chart,
            eval: Arc::new(eval),
            derivative: None,
        }
    }

    /// Metric with coefficients `diag(d(p))`.
    pub fn diagonal<F>(chart: Chart, diag: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::new(chart, move |p| DMatrix::from_diagonal(&diag(p).into()))
    }

    pub fn euclidean(chart: Chart) -> Self {
        let dim = chart.dim();
        Self::new(chart, move |_| DMatrix::identity(dim, dim))
            .with_derivative(move |_, _| DMatrix::zeros(dim, dim))
    }

    /// Attaches `(p, i) -> d g / d x_i`, used instead of finite differences.
    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(&[f64], usize) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn without_derivatives(&self) -> Self {
        Self {
            chart: self.chart.clone(),
            eval: self.eval.clone(),
            derivative: None,
        }
    }

    pub fn on_chart(&self, chart: Chart) -> Result<Self> {
        same_dim(&self.chart, &chart)?;
        Ok(Self {
            chart,
            ..self.clone()
        })
    }

    /// Block-diagonal sum `self ⊕ other` on the product chart.
    pub fn direct_sum(&self, other: &MetricField) -> MetricField {
        let chart = Chart::product(&self.chart, &other.chart);
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let da = self.chart.dim();
        let total = chart.dim();
        MetricField::new(chart, move |p| {
            let mut g = DMatrix::zeros(total, total);
            g.view_mut((0, 0), (da, da)).copy_from(&a(&p[..da]));
            g.view_mut((da, da), (total - da, total - da))
                .copy_from(&b(&p[da..]));
            g
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn value(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        check_len(&self.chart, p)?;
        let g = (self.eval)(p);
        let d = self.chart.dim();
        if g.nrows() != d || g.ncols() != d {
            return Err(GeomError::DimensionMismatch {
                expected: d,
                found: g.nrows(),
            });
        }
        if g.iter().all(|x| x.is_finite()) {
            Ok(g)
        } else {
            Err(GeomError::NonFiniteValue { point: p.to_vec() })
        }
    }
}

fn check_len(chart: &Chart, p: &[f64]) -> Result<()> {
    if p.len() != chart.dim() {
        Err(GeomError::DimensionMismatch {
            expected: chart.dim(),
            found: p.len(),
        })
    } else {
        Ok(())
    }
}

fn same_dim(a: &Chart, b: &Chart) -> Result<()> {
    if a.dim() != b.dim() {
        Err(GeomError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        })
    } else {
        Ok(())
    }
}

/// `∂f/∂x_i` at `p`.
pub fn partial(field: &ScalarField, p: &[f64], i: usize, cfg: &FdConfig) -> Result<f64> {
    if let Some(g) = &field.gradient {
        check_len(&field.chart, p)?;
        let v = g(p)[i];
        return finite(v, p);
    }
    diff1(&field.chart, p, i, cfg, |q| field.value(q))
}

/// `∂²f/∂x_i∂x_j` at `p`; identical for `(i, j)` and `(j, i)`.
pub fn partial2(
    field: &ScalarField,
    p: &[f64],
    i: usize,
    j: usize,
    cfg: &FdConfig,
) -> Result<f64> {
    if let Some(h) = &field.hessian {
        check_len(&field.chart, p)?;
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        return finite(h(p)[(i, j)], p);
    }
    diff2(&field.chart, p, i, j, cfg, |q| field.value(q))
}

pub fn gradient(field: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    (0..field.chart.dim())
        .map(|i| partial(field, p, i, cfg))
        .collect()
}

/// Matrix of plain coordinate second derivatives.
pub fn second_derivatives(field: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
    let d = field.chart.dim();
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = partial2(field, p, i, j, cfg)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// `∂g/∂x_i` at `p`, symmetrised.
pub fn metric_partial(g: &MetricField, p: &[f64], i: usize, cfg: &FdConfig) -> Result<DMatrix<f64>> {
    let d = match &g.derivative {
        Some(d) => {
            check_len(&g.chart, p)?;
            let m = d(p, i);
            if !m.iter().all(|x| x.is_finite()) {
                return Err(GeomError::NonFiniteValue { point: p.to_vec() });
            }
            m
        }
        None => diff1(&g.chart, p, i, cfg, |q| g.value(q))?,
    };
    Ok((&d + d.transpose()) * 0.5)
}

fn finite(v: f64, p: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GeomError::NonFiniteValue { point: p.to_vec() })
    }
}
