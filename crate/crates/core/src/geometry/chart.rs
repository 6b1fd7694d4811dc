use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result};

/// A named coordinate box.
///
/// Every coordinate carries a closed interval `[lower, upper]` and a margin.
/// Sampling only ever happens inside `[lower + margin, upper - margin]`, which
/// keeps finite-difference stencils centred on sampled points inside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    margin: Vec<f64>,
}

impl Chart {
    /// Builds a chart with one margin shared by every coordinate.
    pub fn new<S: Into<String>>(
        name: S,
        names: &[&str],
        bounds: &[(f64, f64)],
        margin: f64,
    ) -> Result<Self> {
        let margins = vec![margin; bounds.len()];
        Self::with_margins(
            name,
            names.iter().map(|s| s.to_string()).collect(),
            bounds,
            &margins,
        )
    }

    pub fn with_margins<S: Into<String>>(
        name: S,
        names: Vec<String>,
        bounds: &[(f64, f64)],
        margins: &[f64],
    ) -> Result<Self> {
        let dim = bounds.len();
        if dim == 0 {
            return Err(GeomError::InvalidChart("dimension must be at least 1".into()));
        }
        if names.len() != dim || margins.len() != dim {
            return Err(GeomError::InvalidChart(format!(
                "{} names and {} margins for {dim} coordinates",
                names.len(),
                margins.len()
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(GeomError::InvalidChart(format!("duplicate coordinate name {a:?}")));
            }
        }
        for (i, (&(lo, hi), &mg)) in bounds.iter().zip(margins).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && mg.is_finite()) || mg < 0.0 {
                return Err(GeomError::InvalidChart(format!(
                    "coordinate {i}: bounds and margin must be finite, margin >= 0"
                )));
            }
            if lo + 2.0 * mg >= hi {
                return Err(GeomError::InvalidChart(format!(
                    "coordinate {i}: lower + 2*margin must stay below upper ({lo} + 2*{mg} >= {hi})"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            names,
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            margin: margins.to_vec(),
        })
    }

    /// Euclidean box `[lo, hi]^dim` with a 5% margin.
    pub fn cube(name: &str, dim: usize, lo: f64, hi: f64) -> Result<Self> {
        let names: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        let bounds = vec![(lo, hi); dim];
        let margins = vec![0.05 * (hi - lo); dim];
        Self::with_margins(name, names, &bounds, &margins)
    }

    /// Cartesian product; coordinate names that collide get a numeric suffix.
    pub fn product(a: &Chart, b: &Chart) -> Chart {
        let mut names = a.names.clone();
        for n in &b.names {
            let mut candidate = n.clone();
            let mut k = 2;
            while names.contains(&candidate) {
                candidate = format!("{n}_{k}");
                k += 1;
            }
            names.push(candidate);
        }
        let cat = |x: &[f64], y: &[f64]| x.iter().chain(y).copied().collect::<Vec<_>>();
        Chart {
            name: format!("{}x{}", a.name, b.name),
            names,
            lower: cat(&a.lower, &b.lower),
            upper: cat(&a.upper, &b.upper),
            margin: cat(&a.margin, &b.margin),
        }
    }

    /// Reorders coordinates so that new coordinate `i` is old coordinate `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Chart> {
        check_permutation(perm, self.dim())?;
        let pick = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Ok(Chart {
            name: self.name.clone(),
            names: perm.iter().map(|&i| self.names[i].clone()).collect(),
            lower: pick(&self.lower),
            upper: pick(&self.upper),
            margin: pick(&self.margin),
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn margins(&self) -> &[f64] {
        &self.margin
    }

    /// Coordinate span `upper - lower`; finite-difference steps are relative to it.
    pub fn scale(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    /// Centre of the sampling box.
    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// Maps a unit-cube point onto the margined sampling box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let lo = self.lower[i] + self.margin[i];
                let hi = self.upper[i] - self.margin[i];
                lo + u[i] * (hi - lo)
            })
            .collect()
    }

    /// Deterministic quasi-uniform points inside the sampling box.
    ///
    /// Halton sequence with a Cranley-Patterson shift drawn from a ChaCha
    /// stream seeded by `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        (0..count)
            .map(|k| {
                let u: Vec<f64> = (0..dim)
                    .map(|i| (radical_inverse(k as u64 + 1, prime(i)) + shift[i]).fract())
                    .collect();
                self.from_unit(&u)
            })
            .collect()
    }
}

pub(crate) fn check_permutation(perm: &[usize], dim: usize) -> Result<()> {
    let mut seen = vec![false; dim];
    if perm.len() != dim {
        return Err(GeomError::DimensionMismatch {
            expected: dim,
            found: perm.len(),
        });
    }
    for &i in perm {
        if i >= dim || seen[i] {
            return Err(GeomError::InvalidChart(format!("{perm:?} is not a permutation")));
        }
        seen[i] = true;
    }
    Ok(())
}

fn prime(i: usize) -> u64 {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    PRIMES[i % PRIMES.len()]
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += f * (k % base) as f64;
        k /= base;
        f *= inv;
    }
    r
}
