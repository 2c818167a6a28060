//! Equilibrium laws on an interval, integrated in the angle variable
//! `x = c - r cos(theta)`, which absorbs the square-root endpoint behavior.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::quadrature::{adaptive_simpson, bisect};

const CACHE_NODES: usize = 1024;
const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Shape {
    /// `C (1 - x^2)^{(s-1)/2}` on `[-1, 1]`.
    Riesz { s: f64, constant: f64 },
    /// `(1 + l1 + l2)/pi * sqrt((x-a)(b-x)) / (1 - x^2)` on `[a, b]`.
    Jacobi { scale: f64 },
}

#[derive(Debug, Clone)]
pub struct IntervalLaw {
    shape: Shape,
    a: f64,
    b: f64,
    cumulative: Vec<f64>,
}

/// `Gamma(1 + s/2) / (sqrt(pi) Gamma((1+s)/2))`
pub fn riesz_constant(s: f64) -> f64 {
    gamma(1.0 + 0.5 * s) / (PI.sqrt() * gamma(0.5 * (1.0 + s)))
}

/// Support `[a, b]` of the equilibrium measure for `-log w`,
/// `w(x) = (1-x)^l1 (1+x)^l2`.
pub fn jacobi_endpoints(lambda1: f64, lambda2: f64) -> (f64, f64) {
    let total = 1.0 + lambda1 + lambda2;
    let t1 = lambda1 / total;
    let t2 = lambda2 / total;
    let delta = (1.0 - (t1 + t2).powi(2)) * (1.0 - (t1 - t2).powi(2));
    let center = t2 * t2 - t1 * t1;
    (center - delta.sqrt(), center + delta.sqrt())
}

impl IntervalLaw {
    pub(crate) fn riesz(s: f64) -> Self {
        Self::build(
            Shape::Riesz {
                s,
                constant: riesz_constant(s),
            },
            -1.0,
            1.0,
        )
    }

    pub(crate) fn jacobi(lambda1: f64, lambda2: f64) -> Self {
        let (a, b) = jacobi_endpoints(lambda1, lambda2);
        Self::build(
            Shape::Jacobi {
                scale: (1.0 + lambda1 + lambda2) / PI,
            },
            a,
            b,
        )
    }

    fn build(shape: Shape, a: f64, b: f64) -> Self {
        let mut law = Self {
            shape,
            a,
            b,
            cumulative: Vec::new(),
        };
        let step = PI / CACHE_NODES as f64;
        let mut cumulative = Vec::with_capacity(CACHE_NODES + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 0..CACHE_NODES {
            acc += adaptive_simpson(&|t| law.angular(t), j as f64 * step, (j + 1) as f64 * step, QUAD_TOL / CACHE_NODES as f64);
            cumulative.push(acc);
        }
        law.cumulative = cumulative;
        law
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    fn radius(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    fn x_of(&self, theta: f64) -> f64 {
        self.center() - self.radius() * theta.cos()
    }

    fn theta_of(&self, x: f64) -> f64 {
        ((self.center() - x) / self.radius()).clamp(-1.0, 1.0).acos()
    }

    /// density(x(theta)) * dx/dtheta
    fn angular(&self, theta: f64) -> f64 {
        let sin = theta.sin().max(0.0);
        match self.shape {
            Shape::Riesz { s, constant } => {
                if s == 0.0 {
                    constant
                } else {
                    constant * sin.powf(s)
                }
            }
            Shape::Jacobi { scale } => {
                let x = self.x_of(theta);
                let r = self.radius();
                scale * r * r * sin * sin / (1.0 - x * x)
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        match self.shape {
            Shape::Riesz { s, constant } => {
                let base = 1.0 - x * x;
                if base == 0.0 {
                    if s < 1.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    constant * base.powf(0.5 * (s - 1.0))
                }
            }
            Shape::Jacobi { scale } => {
                scale * ((x - self.a) * (self.b - x)).max(0.0).sqrt() / (1.0 - x * x)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return *self.cumulative.last().unwrap();
        }
        let theta = self.theta_of(x);
        let step = PI / CACHE_NODES as f64;
        let j = ((theta / step) as usize).min(CACHE_NODES - 1);
        self.cumulative[j] + adaptive_simpson(&|t| self.angular(t), j as f64 * step, theta, QUAD_TOL / CACHE_NODES as f64)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u <= 0.0 {
            return self.a;
        }
        if u >= 1.0 {
            return self.b;
        }
        let theta = bisect(|t| self.cdf(self.x_of(t)) - u, 0.0, PI, 1e-14).unwrap_or(PI * u);
        self.x_of(theta)
    }
}
