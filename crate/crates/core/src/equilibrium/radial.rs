//! Newtonian (`s = p - 2`) equilibrium in `R^p` for a radial external field.
//!
//! The measure lives on the shell `r_0 <= |x| <= R_0`, where `r_0` is where
//! `f'` turns positive and `R_0` solves `R^{p-1} f'(R) = p - 2`; its radial
//! density is `(r^{p-1} f'(r))' / (p - 2)`.

use crate::error::{Error, Result};
use crate::field::RadialProfile;
use crate::quadrature::{adaptive_simpson, bisect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLaw {
    pub p: usize,
    pub profile: RadialProfile,
    pub inner: f64,
    pub outer: f64,
}

impl RadialLaw {
    pub(crate) fn new(p: usize, profile: RadialProfile) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParameter(format!(
                "Newtonian radial reference needs p >= 3, got {p}"
            )));
        }
        let target = (p - 2) as f64;
        let phi = |r: f64| profile.flux(r, p) - target;

        // f' > 0 on (0, inf) for the power profiles, so r_0 = 0 unless f'
        // is nonpositive near the origin
        let eps = 1e-12;
        let inner = if profile.derivative(eps) > 0.0 {
            0.0
        } else {
            bisect(|r| profile.derivative(r), eps, 1e6, 1e-12)?
        };

        let mut lo = inner.max(eps);
        let mut hi = 10.0 * (target + 1.0).powf(1.0 / profile.exponent);
        let mut expansions = 0;
        while phi(hi) <= 0.0 {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 || !hi.is_finite() {
                return Err(Error::NoRoot("R_0 bracket expansion failed".into()));
            }
        }
        if phi(lo) > 0.0 {
            return Err(Error::NoRoot(format!("flux already exceeds p - 2 at r = {lo}")));
        }
        let outer = bisect(phi, lo, hi, 1e-12)?;
        Ok(Self {
            p,
            profile,
            inner,
            outer,
        })
    }

    /// Radial density in `r` (mass per unit radius).
    pub fn density(&self, r: f64) -> f64 {
        if r < self.inner || r > self.outer {
            return 0.0;
        }
        self.profile.flux_derivative(r, self.p) / (self.p - 2) as f64
    }

    /// Mass inside radius `r`, by telescoping the flux.
    pub fn cdf(&self, r: f64) -> f64 {
        let r = r.clamp(self.inner, self.outer);
        (self.profile.flux(r, self.p) - self.profile.flux(self.inner, self.p)) / (self.p - 2) as f64
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        bisect(|r| self.cdf(r) - u, self.inner, self.outer, 1e-14).unwrap_or(self.outer)
    }

    /// `W = 1/R_0^{p-2} + f(R_0)`
    pub fn w_f(&self) -> f64 {
        self.outer.powi(-(self.p as i32 - 2)) + self.profile.value(self.outer)
    }

    /// `int f dlambda`, by quadrature in `r`.
    pub fn field_mean(&self) -> f64 {
        adaptive_simpson(&|r| self.profile.value(r) * self.density(r), self.inner, self.outer, 1e-13)
    }

    /// Three-branch closed-form potential at distance `r` from the origin.
    pub fn potential_at_radius(&self, r: f64) -> f64 {
        let w = self.w_f();
        if r <= self.inner {
            w - self.profile.value(self.inner)
        } else if r < self.outer {
            w - self.profile.value(r)
        } else {
            r.powi(-(self.p as i32 - 2))
        }
    }
}
