//! Riesz and logarithmic pair interactions and the discrete energy functionals.
//!
//! All values are extended reals carried as `f64`: `+inf` is a legitimate
//! result (coincident points) and propagates through every sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;

/// Riesz exponent `s >= 0`; `s == 0` selects `-log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    s: f64,
}

impl KernelSpec {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Riesz exponent must be finite and >= 0, got {s}"
            )));
        }
        Ok(Self { s })
    }

    pub fn logarithmic() -> Self {
        Self { s: 0.0 }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn is_logarithmic(&self) -> bool {
        self.s == 0.0
    }

    /// `K(t; s)` for a distance `t >= 0`.
    #[inline]
    pub fn at_distance(&self, t: f64) -> f64 {
        if t == 0.0 {
            return f64::INFINITY;
        }
        if self.s == 0.0 {
            -t.ln()
        } else if self.s == 1.0 {
            1.0 / t
        } else {
            t.powf(-self.s)
        }
    }

    /// `K` evaluated from a squared distance; saves the square root in hot loops.
    #[inline]
    pub fn at_sq_distance(&self, t2: f64) -> f64 {
        if t2 == 0.0 {
            return f64::INFINITY;
        }
        if self.s == 0.0 {
            -0.5 * t2.ln()
        } else if self.s == 1.0 {
            1.0 / t2.sqrt()
        } else if self.s == 2.0 {
            1.0 / t2
        } else {
            t2.powf(-0.5 * self.s)
        }
    }

    /// Kernel between two points of equal dimension.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.at_sq_distance(sq_distance(x, y))
    }

    /// Energy `E(w) = sum_{i != j} k(x_i, x_j)`.
    pub fn energy(&self, cfg: &Configuration) -> Result<f64> {
        if cfg.len() < 2 {
            return Err(Error::TooFewPoints {
                required: 2,
                found: cfg.len(),
            });
        }
        let mut pairs = 0.0;
        for i in 0..cfg.len() {
            let xi = cfg.point(i);
            for j in (i + 1)..cfg.len() {
                pairs += self.eval_unchecked(xi, cfg.point(j));
            }
        }
        Ok(2.0 * pairs)
    }

    /// Weighted energy `E_f(w) = E(w) + 2(N-1) sum_i f(x_i)`.
    pub fn weighted_energy(&self, field: &FieldSpec, cfg: &Configuration) -> Result<f64> {
        let e = self.energy(cfg)?;
        if field.is_zero() {
            return Ok(e);
        }
        let mut field_sum = 0.0;
        for x in cfg.points() {
            field_sum += field.eval(x)?;
        }
        Ok(e + 2.0 * (cfg.len() as f64 - 1.0) * field_sum)
    }
}

#[inline]
pub fn sq_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Ordered list of points in `R^p`, duplicates allowed. Stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    dim: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(1);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    /// Convenience constructor for 1-D configurations.
    pub fn from_reals(xs: &[f64]) -> Self {
        Self {
            dim: 1,
            coords: xs.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}
