//! Discrete Gauss variational problem on a candidate set.
//!
//! Minimizes `q(w) = w.K w + 2 w.f` over the probability simplex, where
//! `K_ij = k(x_i, x_j)` off the diagonal and `K_ii = K(h/2; s)`. The
//! diagonal stands in for the self-energy of a cell of width `h`.

use rayon::prelude::*;
use serde::Serialize;

use crate::conductor::CandidateSet;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::kernel::{sq_distance, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolverMethod {
    /// Fixed step `1/L` projected gradient.
    ProjectedGradient,
    /// Projected gradient with Nesterov momentum and a monotone safeguard
    /// (the objective never increases).
    Accelerated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Frank-Wolfe gap at which the iteration stops.
    pub tol: f64,
    pub max_iters: usize,
    pub method: SolverMethod,
    /// Keep the objective value of every iterate.
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iters: 200_000,
            method: SolverMethod::Accelerated,
            record_history: false,
        }
    }
}

/// Probability weights aligned with a candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Result of [`discrete_equilibrium`].
#[derive(Debug, Clone)]
pub struct DiscreteEquilibrium {
    kernel: KernelSpec,
    nodes: CandidateSet,
    measure: DiscreteMeasure,
    field_values: Vec<f64>,
    diagonal: f64,
    /// Minimal value of the quadratic form, the estimate of `V_f`.
    pub v_f: f64,
    /// `V_f - sum_i w_i f(x_i)`.
    pub w_f: f64,
    /// Frank-Wolfe gap at the returned weights.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each iteration, if requested.
    pub history: Vec<f64>,
}

impl DiscreteEquilibrium {
    pub fn nodes(&self) -> &CandidateSet {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        self.measure.weights()
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn field_values(&self) -> &[f64] {
        &self.field_values
    }

    /// Self-interaction `K(h/2; s)` used on the diagonal.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// `U(x) = sum_j w_j k(x, x_j)`; a node at zero distance contributes the
    /// diagonal value instead of `+inf`.
    pub fn potential(&self, x: &[f64]) -> f64 {
        self.nodes
            .points()
            .zip(self.measure.weights())
            .filter(|(_, w)| **w > 0.0)
            .map(|(p, w)| {
                let d2 = sq_distance(p, x);
                let k = if d2 == 0.0 { self.diagonal } else { self.kernel.at_sq_distance(d2) };
                w * k
            })
            .sum()
    }

    /// Indices of nodes whose weight exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > threshold)
            .map(|(i, _)| i)
            .collect()
    }
}

struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    fn matvec(&self, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Solves the discrete weighted equilibrium problem on `cand`.
///
/// Candidates where the field is `+inf` carry no mass. Non-convergence is
/// not an error: the result comes back with `converged == false`.
pub fn discrete_equilibrium(
    kernel: KernelSpec,
    field: &FieldSpec,
    cand: &CandidateSet,
    opts: &SolverOptions,
) -> Result<DiscreteEquilibrium> {
    if field.dim() != cand.dim() {
        return Err(Error::DimensionMismatch {
            expected: cand.dim(),
            found: field.dim(),
        });
    }
    let field_values: Vec<f64> = cand.points().map(|p| field.eval_unchecked(p)).collect();
    let active: Vec<usize> = (0..cand.len()).filter(|&i| field_values[i].is_finite()).collect();
    if active.is_empty() {
        return Err(Error::NoFiniteCandidate(1));
    }
    let diagonal = kernel.at_distance(0.5 * cand.mesh_scale());
    let n = active.len();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(a, row)| {
        let xa = cand.point(active[a]);
        for (b, v) in row.iter_mut().enumerate() {
            *v = if a == b {
                diagonal
            } else {
                kernel.eval_unchecked(xa, cand.point(active[b]))
            };
        }
    });
    let gram = Gram { n, data };
    let f: Vec<f64> = active.iter().map(|&i| field_values[i]).collect();

    let row_bound = gram
        .data
        .par_chunks(n)
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .reduce(|| 0.0, f64::max);
    // gradient 2(Kw + f) is Lipschitz with constant 2 lambda_max(K) <= 2 max row sum
    let step = 1.0 / (2.0 * row_bound);

    let objective = |w: &[f64], kw: &[f64]| dot(w, kw) + 2.0 * dot(w, &f);
    let fw_gap = |w: &[f64], kw: &[f64]| {
        // gradient / 2 = Kw + f; gap = grad.w - min grad
        let mut min_g = f64::INFINITY;
        let mut gw = 0.0;
        for i in 0..n {
            let g = 2.0 * (kw[i] + f[i]);
            min_g = min_g.min(g);
            gw += g * w[i];
        }
        gw - min_g
    };

    let mut x = vec![1.0 / n as f64; n];
    let mut kx = vec![0.0; n];
    gram.matvec(&x, &mut kx);
    let mut qx = objective(&x, &kx);
    let mut gap = fw_gap(&x, &kx);
    let mut history = Vec::new();
    if opts.record_history {
        history.push(qx);
    }

    let mut y = x.clone();
    let mut ky = kx.clone();
    let mut z = vec![0.0; n];
    let mut kz = vec![0.0; n];
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut converged = gap <= opts.tol;

    while !converged && iterations < opts.max_iters {
        iterations += 1;
        let (base, kbase) = match opts.method {
            SolverMethod::ProjectedGradient => (&x, &kx),
            SolverMethod::Accelerated => (&y, &ky),
        };
        for i in 0..n {
            z[i] = base[i] - step * 2.0 * (kbase[i] + f[i]);
        }
        project_simplex(&mut z);
        gram.matvec(&z, &mut kz);
        // q(z) - q(x) = (z - x).(Kz + Kx + 2f) on the simplex. Shifting the
        // second factor by a constant changes nothing there but removes the
        // rounding drift of sum(z - x), which otherwise swamps small decreases.
        let heaviest = (0..n).fold(0, |a, i| if x[i] > x[a] { i } else { a });
        let shift = kz[heaviest] + kx[heaviest] + 2.0 * f[heaviest];
        let delta: f64 = (0..n)
            .map(|i| (z[i] - x[i]) * (kz[i] + kx[i] + 2.0 * f[i] - shift))
            .sum();
        let qz = qx + delta;

        match opts.method {
            SolverMethod::ProjectedGradient => {
                if delta <= 0.0 {
                    x.copy_from_slice(&z);
                    kx.copy_from_slice(&kz);
                    qx = qz;
                }
            }
            SolverMethod::Accelerated => {
                // gradient restart: the step z - x_prev points against the
                // gradient mapping y - z
                let uphill: f64 = (0..n).map(|i| (y[i] - z[i]) * (z[i] - x[i])).sum();
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let x_prev = x.clone();
                let kx_prev = kx.clone();
                let accepted = delta <= 0.0;
                if accepted {
                    x.copy_from_slice(&z);
                    kx.copy_from_slice(&kz);
                    qx = qz;
                }
                if !accepted || uphill > 0.0 {
                    y.copy_from_slice(&x);
                    ky.copy_from_slice(&kx);
                    t = 1.0;
                } else {
                    let a = t / t_next;
                    let b = (t - 1.0) / t_next;
                    for i in 0..n {
                        y[i] = x[i] + a * (z[i] - x[i]) + b * (x[i] - x_prev[i]);
                        ky[i] = kx[i] + a * (kz[i] - kx[i]) + b * (kx[i] - kx_prev[i]);
                    }
                    t = t_next;
                }
            }
        }
        if opts.record_history {
            history.push(qx);
        }
        gap = fw_gap(&x, &kx);
        converged = gap <= opts.tol;
    }
    if !converged {
        log::warn!(
            "discrete equilibrium did not converge in {iterations} iterations (gap {gap:.3e} > {:.3e})",
            opts.tol
        );
    }

    let mut weights = vec![0.0; cand.len()];
    for (a, &i) in active.iter().enumerate() {
        weights[i] = x[a];
    }
    // renormalize away rounding from the projection
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let field_mean: f64 = dot(&x, &f);
    let v_f = objective(&x, &kx);
    Ok(DiscreteEquilibrium {
        kernel,
        nodes: cand.clone(),
        measure: DiscreteMeasure { weights },
        field_values,
        diagonal,
        v_f,
        w_f: v_f - field_mean,
        gap,
        iterations,
        converged,
        history,
    })
}
