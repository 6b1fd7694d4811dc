//! Fixed-step classical Runge–Kutta with cubic Hermite dense output.

/// Tabulated solution of `y' = f(t, y)` on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    t0: f64,
    step: f64,
    ts: Vec<f64>,
    ys: Vec<Vec<f64>>,
    dys: Vec<Vec<f64>>,
}

/// Integrates with constant `step`; the last step is shortened so the table
/// ends exactly at `t1`. Nodes are `t0 + k·step`, never accumulated.
pub fn rk4<F>(f: F, t0: f64, y0: &[f64], t1: f64, step: f64) -> DenseSolution
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    assert!(t1 > t0 && step > 0.0, "rk4 needs t1 > t0 and a positive step");
    let n_full = ((t1 - t0) / step).floor() as usize;
    let mut ts: Vec<f64> = (0..=n_full).map(|k| t0 + k as f64 * step).collect();
    if t1 - ts[n_full] > 1e-12 * step {
        ts.push(t1);
    } else {
        ts[n_full] = t1;
    }

    let axpy = |y: &[f64], h: f64, k: &[f64]| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };
    let mut ys = Vec::with_capacity(ts.len());
    let mut dys = Vec::with_capacity(ts.len());
    let mut y = y0.to_vec();
    for w in ts.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
        let k3 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
        let k4 = f(t + h, &axpy(&y, h, &k3));
        let next: Vec<f64> = (0..y.len())
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        ys.push(std::mem::replace(&mut y, next));
        dys.push(k1);
    }
    let last_t = *ts.last().unwrap();
    dys.push(f(last_t, &y));
    ys.push(y);
    DenseSolution {
        t0,
        step,
        ts,
        ys,
        dys,
    }
}

impl DenseSolution {
    pub fn nodes(&self) -> &[f64] {
        &self.ts
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.ys[k]
    }

    pub fn start(&self) -> f64 {
        self.ts[0]
    }

    pub fn end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    fn interval(&self, t: f64) -> usize {
        let last = self.ts.len() - 2;
        let k = ((t - self.t0) / self.step).floor();
        let mut k = if k < 0.0 { 0 } else { (k as usize).min(last) };
        // rounding in the division can land one cell off
        while k > 0 && t < self.ts[k] {
            k -= 1;
        }
        while k < last && t > self.ts[k + 1] {
            k += 1;
        }
        k
    }

    /// Cubic Hermite interpolant of component `c` and its first derivative;
    /// NaN outside the table.
    pub fn eval(&self, t: f64, c: usize) -> (f64, f64) {
        if !(t >= self.start() && t <= self.end()) {
            return (f64::NAN, f64::NAN);
        }
        let k = self.interval(t);
        let (ta, tb) = (self.ts[k], self.ts[k + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        let (ya, yb) = (self.ys[k][c], self.ys[k + 1][c]);
        let (ma, mb) = (self.dys[k][c], self.dys[k + 1][c]);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * ya
            + (s3 - 2.0 * s2 + s) * h * ma
            + (-2.0 * s3 + 3.0 * s2) * yb
            + (s3 - s2) * h * mb;
        let slope = ((6.0 * s2 - 6.0 * s) * ya + (-6.0 * s2 + 6.0 * s) * yb) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * ma
            + (3.0 * s2 - 2.0 * s) * mb;
        (value, slope)
    }
}
