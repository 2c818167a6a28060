//! Catalog of external fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FieldKind {
    Zero,
    /// `f(x) = |x|`
    AbsoluteValue,
    /// `f(x) = -lambda1 log(1 - x) - lambda2 log(1 + x)` on `(-1, 1)`, `+inf` elsewhere.
    JacobiLogWeight { lambda1: f64, lambda2: f64 },
    /// `f(x) = coefficient * |x|^exponent`
    RadialPower { exponent: f64, coefficient: f64 },
    /// `f(x) = |x|^2`
    QuadraticNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    kind: FieldKind,
    dim: usize,
}

impl FieldSpec {
    pub fn new(kind: FieldKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("field dimension must be >= 1".into()));
        }
        match kind {
            FieldKind::JacobiLogWeight { lambda1, lambda2 } => {
                if dim != 1 {
                    return Err(Error::InvalidParameter(
                        "Jacobi log-weight field is only defined for p = 1".into(),
                    ));
                }
                if !(lambda1 > 0.0 && lambda2 > 0.0) || !lambda1.is_finite() || !lambda2.is_finite()
                {
                    return Err(Error::InvalidParameter(format!(
                        "Jacobi exponents must be > 0, got ({lambda1}, {lambda2})"
                    )));
                }
            }
            FieldKind::RadialPower {
                exponent,
                coefficient,
            } => {
                if !(exponent > 0.0 && coefficient > 0.0)
                    || !exponent.is_finite()
                    || !coefficient.is_finite()
                {
                    return Err(Error::InvalidParameter(format!(
                        "radial power needs exponent > 0 and coefficient > 0, got ({exponent}, {coefficient})"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self { kind, dim })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            kind: FieldKind::Zero,
            dim,
        }
    }

    pub fn absolute_value(dim: usize) -> Self {
        Self {
            kind: FieldKind::AbsoluteValue,
            dim,
        }
    }

    pub fn quadratic_norm(dim: usize) -> Self {
        Self {
            kind: FieldKind::QuadraticNorm,
            dim,
        }
    }

    pub fn jacobi(lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(FieldKind::JacobiLogWeight { lambda1, lambda2 }, 1)
    }

    pub fn radial_power(exponent: f64, coefficient: f64, dim: usize) -> Result<Self> {
        Self::new(
            FieldKind::RadialPower {
                exponent,
                coefficient,
            },
            dim,
        )
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, FieldKind::Zero)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self.kind {
            FieldKind::Zero => 0.0,
            FieldKind::AbsoluteValue => norm(x),
            FieldKind::JacobiLogWeight { lambda1, lambda2 } => {
                let t = x[0];
                if t <= -1.0 || t >= 1.0 {
                    f64::INFINITY
                } else {
                    -lambda1 * (-t).ln_1p() - lambda2 * t.ln_1p()
                }
            }
            FieldKind::RadialPower {
                exponent,
                coefficient,
            } => coefficient * norm(x).powf(exponent),
            FieldKind::QuadraticNorm => x.iter().map(|v| v * v).sum(),
        }
    }

    /// Radial profile `r -> (f(r), f'(r), (r^{p-1} f'(r))')` for radially symmetric fields.
    pub fn radial_profile(&self) -> Option<RadialProfile> {
        let (exponent, coefficient) = match self.kind {
            FieldKind::RadialPower {
                exponent,
                coefficient,
            } => (exponent, coefficient),
            FieldKind::QuadraticNorm => (2.0, 1.0),
            FieldKind::AbsoluteValue => (1.0, 1.0),
            _ => return None,
        };
        Some(RadialProfile {
            exponent,
            coefficient,
        })
    }

    /// Whether `f(x) -> +inf` as `|x| -> inf`. Only ever used for warnings.
    pub fn growth_admissible(&self, kernel: &KernelSpec, unbounded_conductor: bool) -> GrowthCheck {
        let grows = matches!(
            self.kind,
            FieldKind::AbsoluteValue | FieldKind::RadialPower { .. } | FieldKind::QuadraticNorm
        );
        if grows {
            let mut note = "field tends to +inf at infinity".to_string();
            if kernel.is_logarithmic() && self.dim == 2 {
                note.push_str("; for p = 2, s = 0 the stronger condition f(x) - log|x| -> +inf is required");
            }
            return GrowthCheck {
                admissible: true,
                note,
            };
        }
        match self.kind {
            FieldKind::JacobiLogWeight { .. } => GrowthCheck {
                admissible: true,
                note: "field lives on (-1, 1): conductor is compact, growth condition vacuous".into(),
            },
            _ if !unbounded_conductor => GrowthCheck {
                admissible: true,
                note: "conductor is compact, growth condition vacuous".into(),
            },
            _ => GrowthCheck {
                admissible: false,
                note: "constant field does not tend to +inf on an unbounded conductor".into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthCheck {
    pub admissible: bool,
    pub note: String,
}

/// `f(r) = c r^q` as a function on `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub exponent: f64,
    pub coefficient: f64,
}

impl RadialProfile {
    pub fn value(&self, r: f64) -> f64 {
        self.coefficient * r.powf(self.exponent)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r == 0.0 && self.exponent < 1.0 {
            return f64::INFINITY;
        }
        self.coefficient * self.exponent * r.powf(self.exponent - 1.0)
    }

    /// `r^{p-1} f'(r)`
    pub fn flux(&self, r: f64, p: usize) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        r.powi(p as i32 - 1) * self.derivative(r)
    }

    /// `(r^{p-1} f'(r))'`
    pub fn flux_derivative(&self, r: f64, p: usize) -> f64 {
        let q = self.exponent;
        let e = p as f64 + q - 2.0;
        if r == 0.0 {
            return if e > 1.0 { 0.0 } else if e == 1.0 { self.coefficient * q } else { f64::INFINITY };
        }
        self.coefficient * q * e * r.powf(e - 1.0)
    }
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
