//! Turns a validated configuration into library calls.

use std::path::PathBuf;

use greedy_energy::analysis::{
    cell_discrepancy_2d, energy_identity_residual, tail_mean, ConvergenceReport,
};
use greedy_energy::conductor::{ball_grid, box_grid, interval_grid, load_points, sphere_points};
use greedy_energy::equilibrium::{
    discrete_equilibrium, discrete_reference, jacobi_reference, radial_newtonian_reference,
    riesz_interval_reference, EquilibriumReference, LadderOptions, SolverOptions,
};
use greedy_energy::selector::{block_greedy_run, greedy_run, optimal_configuration, BlockOptions, BlockStrategy};
use greedy_energy::{CandidateSet, Error, FieldKind, FieldSpec, GreedyTrace, KernelSpec, Start};
use serde::Serialize;

use crate::config::{LoadedConfig, StartSetting, FORMATS};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Greedy,
    Optimal,
    Blocks(BlockStrategy),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConductorShape {
    Interval { a: f64, b: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { radius: f64 },
    Sphere,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceChoice {
    None,
    RieszInterval,
    Jacobi,
    Radial,
    Discrete,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub kernel: KernelSpec,
    pub field: FieldSpec,
    pub cand: CandidateSet,
    pub shape: ConductorShape,
    pub n: usize,
    pub m: usize,
    pub start: Start,
    pub strategy: Strategy,
    pub block: BlockOptions,
    pub reference: ReferenceChoice,
    pub ladder: Vec<usize>,
    pub solver: SolverOptions,
    pub grid: Option<usize>,
    pub output_dir: PathBuf,
    pub formats: Vec<String>,
}

fn core_to_config(loaded: &LoadedConfig, section: &str, key: &str, e: Error) -> CliError {
    match e {
        Error::GuardExceeded { .. } => CliError::Guard(e.to_string()),
        Error::Io(_) => CliError::Io(e.to_string()),
        other => loaded.invalid(section, key, other),
    }
}

fn build_field(loaded: &LoadedConfig, dim: usize) -> Result<FieldSpec, CliError> {
    let f = &loaded.config.field;
    let need = |key: &str, v: Option<f64>| v.ok_or_else(|| loaded.invalid("field", key, format!("required for kind = \"{}\"", f.kind)));
    let kind = match f.kind.as_str() {
        "zero" => FieldKind::Zero,
        "abs" => FieldKind::AbsoluteValue,
        "quadratic" => FieldKind::QuadraticNorm,
        "jacobi" => FieldKind::JacobiLogWeight {
            lambda1: need("lambda1", f.lambda1)?,
            lambda2: need("lambda2", f.lambda2)?,
        },
        "radial-power" => FieldKind::RadialPower {
            exponent: need("exponent", f.exponent)?,
            coefficient: f.coefficient.unwrap_or(1.0),
        },
        other => {
            return Err(loaded.invalid(
                "field",
                "kind",
                format!("unknown field kind \"{other}\" (expected zero, abs, quadratic, jacobi or radial-power)"),
            ))
        }
    };
    FieldSpec::new(kind, dim).map_err(|e| core_to_config(loaded, "field", "kind", e))
}

fn build_conductor(loaded: &LoadedConfig) -> Result<(CandidateSet, ConductorShape), CliError> {
    if loaded.config.conductor.kind == "space" {
        return whole_space(loaded);
    }
    let c = &loaded.config.conductor;
    let m_or = |default: Option<usize>| {
        c.m.or(default)
            .ok_or_else(|| loaded.invalid("conductor", "m", format!("required for kind = \"{}\"", c.kind)))
    };
    let err = |key: &'static str| move |e: Error| core_to_config(loaded, "conductor", key, e);
    match c.kind.as_str() {
        "interval" => {
            let a = c.a.unwrap_or(-1.0);
            let b = c.b.unwrap_or(1.0);
            let set = interval_grid(a, b, m_or(None)?).map_err(err("m"))?;
            Ok((set, ConductorShape::Interval { a, b }))
        }
        "box" => {
            let lower = c
                .lower
                .clone()
                .ok_or_else(|| loaded.invalid("conductor", "lower", "required for kind = \"box\""))?;
            let upper = c
                .upper
                .clone()
                .ok_or_else(|| loaded.invalid("conductor", "upper", "required for kind = \"box\""))?;
            let set = box_grid(&lower, &upper, m_or(None)?).map_err(err("lower"))?;
            Ok((set, ConductorShape::Box { lower, upper }))
        }
        "ball" => {
            let radius = c.radius.unwrap_or(1.0);
            let dim = c
                .dim
                .ok_or_else(|| loaded.invalid("conductor", "dim", "required for kind = \"ball\""))?;
            let set = ball_grid(radius, dim, m_or(None)?).map_err(err("radius"))?;
            Ok((set, ConductorShape::Ball { radius }))
        }
        "sphere" => {
            let set = sphere_points(c.dim.unwrap_or(3), m_or(None)?).map_err(err("m"))?;
            Ok((set, ConductorShape::Sphere))
        }
        "file" => {
            let path = c
                .path
                .clone()
                .ok_or_else(|| loaded.invalid("conductor", "path", "required for kind = \"file\""))?;
            let set = load_points(&path).map_err(|e| match e {
                Error::Io(io) => CliError::Io(format!("cannot read {}: {io}", path.display())),
                other => loaded.invalid("conductor", "path", other),
            })?;
            Ok((set, ConductorShape::File))
        }
        other => Err(loaded.invalid(
            "conductor",
            "kind",
            format!("unknown conductor kind \"{other}\" (expected interval, box, ball, sphere, space or file)"),
        )),
    }
}

/// `R^p` truncated to the ball of radius `truncation * R_0`, where `R_0` is
/// the outer support radius of the Newtonian equilibrium for the field.
fn whole_space(loaded: &LoadedConfig) -> Result<(CandidateSet, ConductorShape), CliError> {
    let c = &loaded.config.conductor;
    let dim = c
        .dim
        .ok_or_else(|| loaded.invalid("conductor", "dim", "required for kind = \"space\""))?;
    let m = c
        .m
        .ok_or_else(|| loaded.invalid("conductor", "m", "required for kind = \"space\""))?;
    let factor = c.truncation.unwrap_or(1.5);
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(loaded.invalid("conductor", "truncation", "must be a positive number"));
    }
    let field = build_field(loaded, dim)?;
    let reference = radial_newtonian_reference(dim, &field).map_err(|e| {
        loaded.invalid("field", "kind", format!("kind = \"space\" needs a radial field in dimension >= 3 ({e})"))
    })?;
    let r0 = reference.radial_law().map(|l| l.outer).expect("radial reference");
    let radius = factor * r0;
    let set = ball_grid(radius, dim, m).map_err(|e| core_to_config(loaded, "conductor", "m", e))?;
    Ok((set, ConductorShape::Ball { radius }))
}

fn choose_reference(loaded: &LoadedConfig, kernel: KernelSpec, field: &FieldSpec, shape: &ConductorShape, dim: usize) -> Result<ReferenceChoice, CliError> {
    let s = kernel.s();
    let on_unit_interval = matches!(shape, ConductorShape::Interval { a, b } if *a == -1.0 && *b == 1.0);
    let riesz_ok = dim == 1 && field.is_zero() && (0.0..1.0).contains(&s);
    let jacobi_ok = matches!(field.kind(), FieldKind::JacobiLogWeight { .. }) && s == 0.0;
    let radial_ok = dim >= 3 && field.radial_profile().is_some() && s == (dim - 2) as f64;
    let choice = match loaded.config.analysis.reference.as_str() {
        "auto" => {
            if riesz_ok && on_unit_interval {
                ReferenceChoice::RieszInterval
            } else if jacobi_ok && on_unit_interval {
                ReferenceChoice::Jacobi
            } else if radial_ok {
                ReferenceChoice::Radial
            } else {
                ReferenceChoice::Discrete
            }
        }
        "none" => ReferenceChoice::None,
        "discrete" => ReferenceChoice::Discrete,
        "riesz-interval" if riesz_ok => ReferenceChoice::RieszInterval,
        "riesz-interval" => {
            return Err(loaded.invalid("analysis", "reference", "riesz-interval needs a 1-D conductor, zero field and 0 <= s < 1"))
        }
        "jacobi" if jacobi_ok => ReferenceChoice::Jacobi,
        "jacobi" => return Err(loaded.invalid("analysis", "reference", "jacobi needs field.kind = \"jacobi\" and kernel.s = 0")),
        "radial" if radial_ok => ReferenceChoice::Radial,
        "radial" => {
            return Err(loaded.invalid("analysis", "reference", "radial needs dimension p >= 3, a radial field and kernel.s = p - 2"))
        }
        other => {
            return Err(loaded.invalid(
                "analysis",
                "reference",
                format!("unknown reference \"{other}\" (expected auto, riesz-interval, jacobi, radial, discrete or none)"),
            ))
        }
    };
    Ok(choice)
}

impl Experiment {
    pub fn from_config(loaded: &LoadedConfig) -> Result<Self, CliError> {
        let cfg = &loaded.config;
        let kernel = KernelSpec::new(cfg.kernel.s).map_err(|e| loaded.invalid("kernel", "s", e))?;
        let (cand, shape) = build_conductor(loaded)?;
        let field = build_field(loaded, cand.dim())?;

        let run = &cfg.run;
        if run.n == 0 {
            return Err(loaded.invalid("run", "N", "must be positive"));
        }
        if run.m == 0 {
            return Err(loaded.invalid("run", "m", "must be positive"));
        }
        let strategy = match (run.m, run.strategy.as_deref()) {
            (1, None | Some("greedy")) => Strategy::Greedy,
            (1, Some("optimal")) => Strategy::Optimal,
            (m, None | Some("exhaustive")) if m > 1 => Strategy::Blocks(BlockStrategy::Exhaustive),
            (m, Some("alternating")) if m > 1 => Strategy::Blocks(BlockStrategy::AlternatingRefinement),
            (m, Some(other)) => {
                let expected = if m == 1 { "greedy or optimal" } else { "exhaustive or alternating" };
                return Err(loaded.invalid("run", "strategy", format!("\"{other}\" is not valid for m = {m} (expected {expected})")));
            }
            _ => unreachable!("m >= 1"),
        };
        let start = match &run.start {
            StartSetting::Index(i) if *i < cand.len() => Start::Index(*i),
            StartSetting::Index(i) => {
                return Err(loaded.invalid("run", "start", format!("index {i} outside the {} candidates", cand.len())))
            }
            StartSetting::Word(w) if w == "auto" => Start::Auto,
            StartSetting::Word(w) => return Err(loaded.invalid("run", "start", format!("expected an index or \"auto\", got \"{w}\""))),
        };
        if matches!(strategy, Strategy::Blocks(_)) && run.start != StartSetting::default() {
            return Err(loaded.invalid("run", "start", "block runs choose their first block by minimization"));
        }

        let analysis = &cfg.analysis;
        if analysis.ladder.is_empty() || analysis.ladder.iter().any(|&m| m < 2) {
            return Err(loaded.invalid("analysis", "ladder", "needs at least one size, each >= 2"));
        }
        if !(analysis.tol > 0.0) {
            return Err(loaded.invalid("analysis", "tol", "must be positive"));
        }
        let reference = choose_reference(loaded, kernel, &field, &shape, cand.dim())?;

        for f in &cfg.output.formats {
            if !FORMATS.contains(&f.as_str()) {
                return Err(loaded.invalid("output", "formats", format!("unknown format \"{f}\" (expected one of {})", FORMATS.join(", "))));
            }
        }
        Ok(Self {
            kernel,
            field,
            cand,
            shape,
            n: run.n,
            m: run.m,
            start,
            strategy,
            block: BlockOptions {
                strategy: match strategy {
                    Strategy::Blocks(b) => b,
                    _ => BlockStrategy::Exhaustive,
                },
                restarts: run.restarts,
                seed: cfg.seed,
            },
            reference,
            ladder: analysis.ladder.clone(),
            solver: SolverOptions {
                tol: analysis.tol,
                max_iters: analysis.max_iters,
                ..Default::default()
            },
            grid: analysis.grid,
            output_dir: cfg.output.dir.clone(),
            formats: cfg.output.formats.clone(),
        })
    }

    /// Candidate set for the discrete reference: the conductor itself when
    /// small enough, otherwise the same shape rebuilt on a coarser grid.
    fn reference_nodes(&self) -> Result<CandidateSet, CliError> {
        const DIRECT_LIMIT: usize = 2500;
        let rebuilt = match (&self.shape, self.grid) {
            (_, None) if self.cand.len() <= DIRECT_LIMIT => return Ok(self.cand.clone()),
            (ConductorShape::Interval { a, b }, g) => interval_grid(*a, *b, g.unwrap_or(401)),
            (ConductorShape::Box { lower, upper }, g) => {
                let default = (DIRECT_LIMIT as f64).powf(1.0 / lower.len() as f64).floor() as usize;
                box_grid(lower, upper, g.unwrap_or(default.min(41)))
            }
            (ConductorShape::Ball { radius }, g) => ball_grid(*radius, self.cand.dim(), g.unwrap_or(15)),
            (_, _) if self.cand.len() <= DIRECT_LIMIT => return Ok(self.cand.clone()),
            _ => {
                return Err(CliError::Config(format!(
                    "discrete reference on {} candidates is too large; set analysis.reference = \"none\"",
                    self.cand.len()
                )))
            }
        };
        rebuilt.map_err(|e| CliError::Config(format!("analysis.grid: {e}")))
    }

    pub fn build_reference(&self) -> Result<Option<EquilibriumReference>, CliError> {
        let opts = LadderOptions {
            sizes: &self.ladder,
            solver: self.solver,
        };
        let r = match self.reference {
            ReferenceChoice::None => return Ok(None),
            ReferenceChoice::RieszInterval => riesz_interval_reference(self.kernel.s(), &opts),
            ReferenceChoice::Jacobi => match self.field.kind() {
                FieldKind::JacobiLogWeight { lambda1, lambda2 } => jacobi_reference(lambda1, lambda2, &opts),
                _ => unreachable!("validated"),
            },
            ReferenceChoice::Radial => radial_newtonian_reference(self.cand.dim(), &self.field),
            ReferenceChoice::Discrete => {
                let nodes = self.reference_nodes()?;
                discrete_equilibrium(self.kernel, &self.field, &nodes, &self.solver).map(discrete_reference)
            }
        };
        r.map(Some).map_err(CliError::from)
    }

    pub fn run(&self) -> Result<Outcome, CliError> {
        log::info!(
            "running {:?} on {} candidates ({}), N = {}, m = {}",
            self.strategy,
            self.cand.len(),
            self.cand.label(),
            self.n,
            self.m
        );
        let result = match self.strategy {
            Strategy::Greedy => RunResult::Trace(greedy_run(self.kernel, &self.field, &self.cand, self.n, self.start)?),
            Strategy::Blocks(_) => {
                RunResult::Trace(block_greedy_run(self.kernel, &self.field, &self.cand, self.m, self.n, self.block)?)
            }
            Strategy::Optimal => {
                let mut energies = Vec::new();
                let mut last = Vec::new();
                for n in 2..=self.n {
                    let o = optimal_configuration(self.kernel, &self.field, &self.cand, n)?;
                    energies.push((n, o.energy));
                    last = o.indices;
                }
                RunResult::Optimal { energies, indices: last }
            }
        };
        let reference = self.build_reference()?;
        Ok(Outcome {
            result,
            reference,
        })
    }
}

#[derive(Debug, Clone)]
pub enum RunResult {
    Trace(GreedyTrace),
    /// Optimal energies for `N = 2..` and the optimal subset of the largest `N`.
    Optimal { energies: Vec<(usize, f64)>, indices: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: RunResult,
    pub reference: Option<EquilibriumReference>,
}

/// One row of the trajectory table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub n: usize,
    pub normalized_energy: f64,
    pub robin_value: Option<f64>,
    pub ks_distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderSummary {
    pub sizes: Vec<usize>,
    pub v_f: Vec<f64>,
    pub w_f: Vec<f64>,
    pub v_hat: f64,
    pub w_hat: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub kernel_s: f64,
    pub field: String,
    pub conductor: String,
    pub candidates: usize,
    pub strategy: String,
    pub block_size: usize,
    pub points: usize,
    pub seed: u64,
    pub reference: Option<String>,
    pub target_vf: Option<f64>,
    pub target_wf: Option<f64>,
    pub ladder: Option<LadderSummary>,
    pub final_normalized_energy: Option<f64>,
    pub final_robin_value: Option<f64>,
    pub robin_tail_mean: Option<f64>,
    pub final_ks_distance: Option<f64>,
    pub support_violation: Option<f64>,
    pub cell_discrepancy_4x4: Option<f64>,
    pub energy_identity_residual: Option<f64>,
}

impl Outcome {
    pub fn indices(&self) -> &[usize] {
        match &self.result {
            RunResult::Trace(t) => t.selected(),
            RunResult::Optimal { indices, .. } => indices,
        }
    }

    /// Unnormalized `E_f` of the first `N` points (or the optimum for `N`).
    pub fn energies(&self) -> Vec<(usize, f64)> {
        match &self.result {
            RunResult::Trace(t) => (2..=t.len()).map(|n| (n, t.energy(n))).collect(),
            RunResult::Optimal { energies, .. } => energies.clone(),
        }
    }

    pub fn convergence(&self, exp: &Experiment) -> Result<Option<ConvergenceReport>, CliError> {
        match (&self.result, &self.reference) {
            (RunResult::Trace(t), Some(r)) => Ok(Some(ConvergenceReport::build(t, &exp.field, &exp.cand, r)?)),
            _ => Ok(None),
        }
    }

    pub fn trajectory(&self, exp: &Experiment) -> Result<Vec<TrajectoryRow>, CliError> {
        if let Some(rep) = self.convergence(exp)? {
            return Ok((0..rep.n_values.len())
                .map(|i| TrajectoryRow {
                    n: rep.n_values[i],
                    normalized_energy: rep.normalized_energy[i],
                    robin_value: rep.robin_values[i],
                    ks_distance: rep.ks_distances[i],
                })
                .collect());
        }
        Ok(match &self.result {
            RunResult::Trace(t) => {
                let m = t.block_size();
                greedy_energy::analysis::energy_trajectory(t)
                    .into_iter()
                    .map(|(n, e)| TrajectoryRow {
                        n,
                        normalized_energy: e,
                        robin_value: if m == 1 {
                            Some(t.u(n) / n as f64)
                        } else {
                            t.block_values().get(n).map(|v| v / n as f64)
                        },
                        ks_distance: None,
                    })
                    .collect()
            }
            RunResult::Optimal { energies, .. } => energies
                .iter()
                .map(|&(n, e)| TrajectoryRow {
                    n,
                    normalized_energy: e / (n * n) as f64,
                    robin_value: None,
                    ks_distance: None,
                })
                .collect(),
        })
    }

    pub fn report(&self, exp: &Experiment, seed: u64) -> Result<Report, CliError> {
        let conv = self.convergence(exp)?;
        let rows = self.trajectory(exp)?;
        let last = rows.last();
        let robin: Vec<(usize, f64)> = rows.iter().filter_map(|r| r.robin_value.map(|v| (r.n, v))).collect();
        let identity = match &self.result {
            RunResult::Trace(t) if t.len() >= 2 => Some(energy_identity_residual(t, exp.kernel, &exp.field, &exp.cand, t.len())?),
            _ => None,
        };
        let cell = match (&self.reference, &exp.shape) {
            (Some(r), ConductorShape::Box { lower, upper }) if lower.len() == 2 => match r.discrete() {
                Some(d) if d.nodes().dim() == 2 => {
                    let pts: Vec<&[f64]> = self.indices().iter().map(|&i| exp.cand.point(i)).collect();
                    Some(cell_discrepancy_2d(&pts, d, [lower[0], lower[1]], [upper[0], upper[1]], 4)?)
                }
                _ => None,
            },
            _ => None,
        };
        let ladder = self.reference.as_ref().and_then(|r| r.ladder()).map(|l| LadderSummary {
            sizes: l.sizes.clone(),
            v_f: l.v_f.clone(),
            w_f: l.w_f.clone(),
            v_hat: l.v_hat,
            w_hat: l.w_hat,
        });
        Ok(Report {
            kernel_s: exp.kernel.s(),
            field: format!("{:?}", exp.field.kind()),
            conductor: exp.cand.label().to_string(),
            candidates: exp.cand.len(),
            strategy: format!("{:?}", exp.strategy),
            block_size: exp.m,
            points: self.indices().len(),
            seed,
            reference: self.reference.as_ref().map(|r| format!("{:?}", r.kind())),
            target_vf: self.reference.as_ref().map(|r| r.v_f()),
            target_wf: self.reference.as_ref().map(|r| r.w_f()),
            ladder,
            final_normalized_energy: last.map(|r| r.normalized_energy),
            final_robin_value: last.and_then(|r| r.robin_value),
            robin_tail_mean: (!robin.is_empty()).then(|| tail_mean(&robin)),
            final_ks_distance: last.and_then(|r| r.ks_distance),
            support_violation: conv.and_then(|c| c.support_violation),
            cell_discrepancy_4x4: cell,
            energy_identity_residual: identity,
        })
    }
}
