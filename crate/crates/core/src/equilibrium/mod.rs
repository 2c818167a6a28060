//! Equilibrium references: closed-form laws where they exist, and a discrete
//! solver for the energy constants and potentials everywhere else.

mod discrete;
mod interval;
mod radial;

pub use discrete::{
    discrete_equilibrium, project_simplex, DiscreteEquilibrium, DiscreteMeasure, SolverMethod, SolverOptions,
};
pub use interval::{jacobi_endpoints, riesz_constant, IntervalLaw};
pub use radial::RadialLaw;

use crate::conductor::{interval_grid, CandidateSet};
use crate::error::{Error, Result};
use crate::field::{norm, FieldSpec};
use crate::kernel::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKind {
    RieszInterval { s: f64 },
    JacobiLogInterval { lambda1: f64, lambda2: f64 },
    RadialNewtonian { p: usize },
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Interval { a: f64, b: f64 },
    Shell { inner: f64, outer: f64 },
    Indices(Vec<usize>),
}

/// Energy constants at each rung of a refinement ladder and their
/// first-order (in `h`) Richardson extrapolation from the two finest rungs.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub sizes: Vec<usize>,
    pub mesh: Vec<f64>,
    pub v_f: Vec<f64>,
    pub w_f: Vec<f64>,
    pub v_hat: f64,
    pub w_hat: f64,
}

impl Ladder {
    /// `|V(finest) - V_hat|`, a crude error scale for the extrapolated value.
    pub fn v_spread(&self) -> f64 {
        (self.v_f.last().copied().unwrap_or(f64::NAN) - self.v_hat).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOptions<'a> {
    pub sizes: &'a [usize],
    pub solver: SolverOptions,
}

impl Default for LadderOptions<'static> {
    fn default() -> Self {
        Self {
            sizes: &[101, 201, 401],
            solver: SolverOptions::default(),
        }
    }
}

fn extrapolate(h: &[f64], v: &[f64]) -> f64 {
    match v.len() {
        0 => f64::NAN,
        1 => v[0],
        n => {
            let (h1, h2) = (h[n - 2], h[n - 1]);
            let (v1, v2) = (v[n - 2], v[n - 1]);
            v2 - h2 * (v1 - v2) / (h1 - h2)
        }
    }
}

/// Solves the discrete problem on each candidate set produced by `build` and
/// extrapolates the energy constants. Returns the finest solution too.
pub fn refinement_ladder(
    kernel: KernelSpec,
    field: &FieldSpec,
    build: impl Fn(usize) -> Result<CandidateSet>,
    opts: &LadderOptions,
) -> Result<(Ladder, DiscreteEquilibrium)> {
    if opts.sizes.is_empty() {
        return Err(Error::InvalidParameter("refinement ladder needs at least one size".into()));
    }
    let mut ladder = Ladder {
        sizes: opts.sizes.to_vec(),
        mesh: Vec::new(),
        v_f: Vec::new(),
        w_f: Vec::new(),
        v_hat: f64::NAN,
        w_hat: f64::NAN,
    };
    let mut finest = None;
    for &m in opts.sizes {
        let cand = build(m)?;
        let sol = discrete_equilibrium(kernel, field, &cand, &opts.solver)?;
        ladder.mesh.push(cand.mesh_scale());
        ladder.v_f.push(sol.v_f);
        ladder.w_f.push(sol.w_f);
        finest = Some(sol);
    }
    ladder.v_hat = extrapolate(&ladder.mesh, &ladder.v_f);
    ladder.w_hat = extrapolate(&ladder.mesh, &ladder.w_f);
    Ok((ladder, finest.expect("at least one rung")))
}

#[derive(Debug, Clone)]
enum Law {
    Interval(IntervalLaw),
    Radial(RadialLaw),
    Discrete,
}

/// An equilibrium measure together with `V_f`, `W_f = V_f - int f dmu`, its
/// support and, where available, a CDF and a potential evaluator.
#[derive(Debug, Clone)]
pub struct EquilibriumReference {
    kind: ReferenceKind,
    v_f: f64,
    w_f: f64,
    support: Support,
    law: Law,
    discrete: Option<DiscreteEquilibrium>,
    ladder: Option<Ladder>,
}

/// Riesz `s`-equilibrium of `[-1, 1]` without field, `0 <= s < 1`.
///
/// `V = W` comes from the refinement ladder; the potential from its finest rung.
pub fn riesz_interval_reference(s: f64, opts: &LadderOptions) -> Result<EquilibriumReference> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("Riesz interval reference needs 0 <= s < 1, got {s}")));
    }
    let kernel = KernelSpec::new(s)?;
    let field = FieldSpec::zero(1);
    let (ladder, finest) = refinement_ladder(kernel, &field, |m| interval_grid(-1.0, 1.0, m), opts)?;
    Ok(EquilibriumReference {
        kind: ReferenceKind::RieszInterval { s },
        v_f: ladder.v_hat,
        w_f: ladder.w_hat,
        support: Support::Interval { a: -1.0, b: 1.0 },
        law: Law::Interval(IntervalLaw::riesz(s)),
        discrete: Some(finest),
        ladder: Some(ladder),
    })
}

/// Logarithmic equilibrium on `[-1, 1]` in the field `-log((1-x)^l1 (1+x)^l2)`.
pub fn jacobi_reference(lambda1: f64, lambda2: f64, opts: &LadderOptions) -> Result<EquilibriumReference> {
    let field = FieldSpec::jacobi(lambda1, lambda2)?;
    let law = IntervalLaw::jacobi(lambda1, lambda2);
    let (a, b) = law.support();
    let (ladder, finest) = refinement_ladder(KernelSpec::logarithmic(), &field, |m| interval_grid(-1.0, 1.0, m), opts)?;
    Ok(EquilibriumReference {
        kind: ReferenceKind::JacobiLogInterval { lambda1, lambda2 },
        v_f: ladder.v_hat,
        w_f: ladder.w_hat,
        support: Support::Interval { a, b },
        law: Law::Interval(law),
        discrete: Some(finest),
        ladder: Some(ladder),
    })
}

/// Support endpoints and laws without the (costly) energy ladder.
pub fn jacobi_law(lambda1: f64, lambda2: f64) -> Result<IntervalLaw> {
    FieldSpec::jacobi(lambda1, lambda2)?;
    Ok(IntervalLaw::jacobi(lambda1, lambda2))
}

pub fn riesz_interval_law(s: f64) -> Result<IntervalLaw> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("Riesz interval law needs 0 <= s < 1, got {s}")));
    }
    Ok(IntervalLaw::riesz(s))
}

/// Newtonian equilibrium of `R^p` (`s = p - 2`) in a radial field.
pub fn radial_newtonian_reference(p: usize, field: &FieldSpec) -> Result<EquilibriumReference> {
    let profile = field
        .radial_profile()
        .ok_or_else(|| Error::InvalidParameter("radial Newtonian reference needs a radial field".into()))?;
    if field.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: field.dim(),
        });
    }
    let law = RadialLaw::new(p, profile)?;
    let w_f = law.w_f();
    Ok(EquilibriumReference {
        kind: ReferenceKind::RadialNewtonian { p },
        v_f: w_f + law.field_mean(),
        w_f,
        support: Support::Shell {
            inner: law.inner,
            outer: law.outer,
        },
        law: Law::Radial(law),
        discrete: None,
        ladder: None,
    })
}

/// Wraps a discrete solution as a reference.
pub fn discrete_reference(sol: DiscreteEquilibrium) -> EquilibriumReference {
    EquilibriumReference {
        kind: ReferenceKind::Discrete,
        v_f: sol.v_f,
        w_f: sol.w_f,
        support: Support::Indices(sol.support(0.0)),
        law: Law::Discrete,
        discrete: Some(sol),
        ladder: None,
    }
}

impl EquilibriumReference {
    pub fn kind(&self) -> ReferenceKind {
        self.kind
    }

    pub fn v_f(&self) -> f64 {
        self.v_f
    }

    pub fn w_f(&self) -> f64 {
        self.w_f
    }

    /// `int f dmu = V_f - W_f`
    pub fn field_mean(&self) -> f64 {
        self.v_f - self.w_f
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn ladder(&self) -> Option<&Ladder> {
        self.ladder.as_ref()
    }

    pub fn discrete(&self) -> Option<&DiscreteEquilibrium> {
        self.discrete.as_ref()
    }

    pub fn interval_law(&self) -> Option<&IntervalLaw> {
        match &self.law {
            Law::Interval(l) => Some(l),
            _ => None,
        }
    }

    pub fn radial_law(&self) -> Option<&RadialLaw> {
        match &self.law {
            Law::Radial(l) => Some(l),
            _ => None,
        }
    }

    /// One-dimensional CDF: in `x` for interval laws, in `|x|` for radial ones.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        match &self.law {
            Law::Interval(l) => Ok(l.cdf(t)),
            Law::Radial(l) => Ok(l.cdf(t)),
            Law::Discrete => Err(Error::Unsupported("discrete reference has no continuous CDF".into())),
        }
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        match &self.law {
            Law::Interval(l) => Ok(l.density(t)),
            Law::Radial(l) => Ok(l.density(t)),
            Law::Discrete => Err(Error::Unsupported("discrete reference has no density".into())),
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        match &self.law {
            Law::Interval(l) => Ok(l.quantile(u)),
            Law::Radial(l) => Ok(l.quantile(u)),
            Law::Discrete => Err(Error::Unsupported("discrete reference has no quantile function".into())),
        }
    }

    pub fn has_potential(&self) -> bool {
        matches!(self.law, Law::Radial(_)) || self.discrete.is_some()
    }

    /// `U^mu(x)`: closed form for the radial law, otherwise from the discrete solution.
    pub fn potential(&self, x: &[f64]) -> Result<f64> {
        if let Law::Radial(l) = &self.law {
            if x.len() != l.p {
                return Err(Error::DimensionMismatch {
                    expected: l.p,
                    found: x.len(),
                });
            }
            return Ok(l.potential_at_radius(norm(x)));
        }
        match &self.discrete {
            Some(d) => {
                if x.len() != d.nodes().dim() {
                    return Err(Error::DimensionMismatch {
                        expected: d.nodes().dim(),
                        found: x.len(),
                    });
                }
                Ok(d.potential(x))
            }
            None => Err(Error::Unsupported("reference has no potential evaluator".into())),
        }
    }
}

/// Candidates with `U^mu(x) + f(x) <= W_f + slack`.
pub fn essential_support(
    reference: &EquilibriumReference,
    cand: &CandidateSet,
    field: &FieldSpec,
    slack: f64,
) -> Result<Vec<usize>> {
    let threshold = reference.w_f() + slack;
    let mut out = Vec::new();
    for (i, x) in cand.points().enumerate() {
        let level = reference.potential(x)? + field.eval(x)?;
        if level <= threshold {
            out.push(i);
        }
    }
    Ok(out)
}
