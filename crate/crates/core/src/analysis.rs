//! Diagnostics on computed sequences: normalized energies, Robin values,
//! distribution distances and support membership.

use serde::Serialize;

use crate::conductor::CandidateSet;
use crate::equilibrium::{DiscreteEquilibrium, EquilibriumReference, ReferenceKind};
use crate::error::{Error, Result};
use crate::field::{norm, FieldSpec};
use crate::kernel::KernelSpec;
use crate::selector::GreedyTrace;

/// `(N, E_f(alpha_N) / N^2)` for `N >= 2`. For block traces `N` counts blocks
/// and the energy of the first `mN` points is divided by `(mN)^2`.
pub fn energy_trajectory(trace: &GreedyTrace) -> Vec<(usize, f64)> {
    let m = trace.block_size().max(1);
    if m == 1 {
        (2..=trace.len())
            .map(|n| (n, trace.energy(n) / (n * n) as f64))
            .collect()
    } else {
        (1..=trace.len() / m)
            .map(|b| {
                let n = b * m;
                (b, trace.energy(n) / (n * n) as f64)
            })
            .collect()
    }
}

/// `(n, U_n^f(a_n) / n)` for `n >= 2`.
pub fn robin_trajectory(trace: &GreedyTrace) -> Vec<(usize, f64)> {
    (2..=trace.len()).map(|n| (n, trace.u(n) / n as f64)).collect()
}

/// `(N, U_{mN}^{(f,m)}(next block) / N)` for `N >= 1`; tends to `m^2 W_f`.
pub fn block_robin_trajectory(trace: &GreedyTrace) -> Vec<(usize, f64)> {
    trace
        .block_values()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, v)| (n, v / n as f64))
        .collect()
}

/// Mean over the last quarter of the entries (at least one).
pub fn tail_mean(values: &[(usize, f64)]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let start = (3 * values.len() / 4).min(values.len() - 1);
    let tail = &values[start..];
    tail.iter().map(|(_, v)| v).sum::<f64>() / tail.len() as f64
}

/// Kolmogorov-Smirnov distance of the empirical law of `cdf_values` (the
/// reference CDF already evaluated at each sample) from uniform.
pub fn ks_from_cdf_values(cdf_values: &[f64]) -> f64 {
    let mut f = cdf_values.to_vec();
    f.sort_by(|a, b| a.total_cmp(b));
    let n = f.len() as f64;
    f.iter()
        .enumerate()
        .map(|(i, &fi)| {
            let hi = (i + 1) as f64 / n;
            let lo = i as f64 / n;
            (fi - hi).abs().max((fi - lo).abs())
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

/// KS distance between the sample and a one-dimensional reference CDF.
pub fn ks_distance_1d(points: &[f64], reference: &EquilibriumReference) -> Result<f64> {
    if reference.interval_law().is_none() {
        return Err(Error::Unsupported("KS distance needs a reference with a one-dimensional CDF".into()));
    }
    if points.is_empty() {
        return Err(Error::TooFewPoints { required: 1, found: 0 });
    }
    let values = points.iter().map(|&x| reference.cdf(x)).collect::<Result<Vec<_>>>()?;
    Ok(ks_from_cdf_values(&values))
}

/// KS distance between `{|x_i|}` and the radial CDF.
pub fn ks_distance_radial<P: AsRef<[f64]>>(points: &[P], reference: &EquilibriumReference) -> Result<f64> {
    let law = reference
        .radial_law()
        .ok_or_else(|| Error::Unsupported("radial KS distance needs a radial reference".into()))?;
    if points.is_empty() {
        return Err(Error::TooFewPoints { required: 1, found: 0 });
    }
    let mut values = Vec::with_capacity(points.len());
    for p in points {
        let p = p.as_ref();
        if p.len() != law.p {
            return Err(Error::DimensionMismatch {
                expected: law.p,
                found: p.len(),
            });
        }
        values.push(law.cdf(norm(p)));
    }
    Ok(ks_from_cdf_values(&values))
}

/// Reference CDF at each selected point, in the variable the reference uses.
fn cdf_at_selection(trace: &GreedyTrace, cand: &CandidateSet, reference: &EquilibriumReference) -> Option<Vec<f64>> {
    match reference.kind() {
        ReferenceKind::RieszInterval { .. } | ReferenceKind::JacobiLogInterval { .. } if cand.dim() == 1 => trace
            .selected()
            .iter()
            .map(|&i| reference.cdf(cand.point(i)[0]).ok())
            .collect(),
        ReferenceKind::RadialNewtonian { p } if cand.dim() == p => trace
            .selected()
            .iter()
            .map(|&i| reference.cdf(norm(cand.point(i))).ok())
            .collect(),
        _ => None,
    }
}

/// `max_{n >= 2} U^mu(a_n) + f(a_n) - W_f`.
pub fn support_violation(
    trace: &GreedyTrace,
    reference: &EquilibriumReference,
    field: &FieldSpec,
    cand: &CandidateSet,
) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for &i in trace.selected().iter().skip(1) {
        let x = cand.point(i);
        worst = worst.max(reference.potential(x)? + field.eval(x)? - reference.w_f());
    }
    Ok(worst)
}

/// Largest relative gap between the directly recomputed `E_f(alpha_N)`, the
/// incremental value stored in the trace, and `2 sum U_i + 2 sum (N-i) f(a_i)`.
///
/// The scale is the sum of absolute values of all terms of `E_f`, so that
/// cancellation in the logarithmic case does not inflate the ratio.
pub fn energy_identity_residual(
    trace: &GreedyTrace,
    kernel: KernelSpec,
    field: &FieldSpec,
    cand: &CandidateSet,
    n: usize,
) -> Result<f64> {
    if n < 2 || n > trace.len() {
        return Err(Error::InvalidParameter(format!("prefix length {n} outside 2..={}", trace.len())));
    }
    let sel = &trace.selected()[..n];
    let f: Vec<f64> = sel.iter().map(|&i| field.eval(cand.point(i))).collect::<Result<_>>()?;
    let mut pairs = 0.0;
    let mut pairs_abs = 0.0;
    for i in 0..n {
        for j in 0..i {
            let k = kernel.eval(cand.point(sel[i]), cand.point(sel[j]))?;
            pairs += k;
            pairs_abs += k.abs();
        }
    }
    let fsum: f64 = f.iter().sum();
    let fabs: f64 = f.iter().map(|v| v.abs()).sum();
    let direct = 2.0 * pairs + 2.0 * (n - 1) as f64 * fsum;
    let scale = (2.0 * pairs_abs + 2.0 * (n - 1) as f64 * fabs).max(f64::MIN_POSITIVE);

    let u_sum: f64 = (2..=n).map(|i| trace.u(i)).sum();
    let tail: f64 = f.iter().enumerate().map(|(i, fi)| (n - 1 - i) as f64 * fi).sum();
    let identity = 2.0 * u_sum + 2.0 * tail;
    let incremental = trace.energy(n);
    let r = (direct - identity).abs().max((direct - incremental).abs());
    Ok(r / scale)
}

/// Diagnostics for an arbitrary candidate sequence `b_n`: the hypothesis
/// trajectory `T_n^f(b_n)/n` against `W_f` and the resulting `E_f/N^2`
/// against `V_f`, both judged by last-quartile means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLimitReport {
    pub t_over_n: Vec<(usize, f64)>,
    pub normalized_energy: Vec<(usize, f64)>,
    pub t_tail_mean: f64,
    pub energy_tail_mean: f64,
    pub target_wf: f64,
    pub target_vf: f64,
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
}

pub fn energy_limit_check(
    points: &[usize],
    kernel: KernelSpec,
    field: &FieldSpec,
    cand: &CandidateSet,
    reference: &EquilibriumReference,
    tol_w: f64,
    tol_v: f64,
) -> Result<EnergyLimitReport> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            found: points.len(),
        });
    }
    let mut t_over_n = Vec::with_capacity(points.len() - 1);
    let mut normalized_energy = Vec::with_capacity(points.len() - 1);
    let mut energy = 0.0;
    let mut field_sum = 0.0;
    for (k, &b) in points.iter().enumerate() {
        let n = k + 1;
        let x = cand.point(b);
        let fx = field.eval(x)?;
        if n >= 2 {
            let interaction: f64 = points[..k]
                .iter()
                .map(|&a| kernel.at_sq_distance(crate::kernel::sq_distance(x, cand.point(a))))
                .sum();
            let t = interaction + (n - 1) as f64 * fx;
            energy += 2.0 * t + 2.0 * field_sum;
            t_over_n.push((n, t / n as f64));
            normalized_energy.push((n, energy / (n * n) as f64));
        }
        field_sum += fx;
    }
    let t_tail_mean = tail_mean(&t_over_n);
    let energy_tail_mean = tail_mean(&normalized_energy);
    let within = |v: f64, target: f64, tol: f64| v.is_finite() && (v - target).abs() <= tol;
    Ok(EnergyLimitReport {
        hypothesis_holds: within(t_tail_mean, reference.w_f(), tol_w),
        conclusion_holds: within(energy_tail_mean, reference.v_f(), tol_v),
        t_over_n,
        normalized_energy,
        t_tail_mean,
        energy_tail_mean,
        target_wf: reference.w_f(),
        target_vf: reference.v_f(),
    })
}

/// Cell index and share for coordinate `t` in `[lo, hi]` cut into `cells`
/// equal pieces; a point on an internal edge is split evenly.
fn cell_shares(t: f64, lo: f64, hi: f64, cells: usize) -> Vec<(usize, f64)> {
    let u = (t - lo) / (hi - lo) * cells as f64;
    let r = u.round();
    if (u - r).abs() < 1e-9 && r >= 1.0 && r <= (cells - 1) as f64 {
        let r = r as usize;
        vec![(r - 1, 0.5), (r, 0.5)]
    } else {
        vec![((u.floor().max(0.0) as usize).min(cells - 1), 1.0)]
    }
}

/// Mass histogram of weighted 2-D points over a `cells x cells` partition of
/// the box `[lower, upper]`, row-major in (x cell, y cell).
pub fn cell_masses_2d<P: AsRef<[f64]>>(
    points: &[P],
    weights: &[f64],
    lower: [f64; 2],
    upper: [f64; 2],
    cells: usize,
) -> Result<Vec<f64>> {
    if cells == 0 || points.len() != weights.len() {
        return Err(Error::InvalidParameter("cell histogram needs cells > 0 and one weight per point".into()));
    }
    let mut out = vec![0.0; cells * cells];
    for (p, w) in points.iter().zip(weights) {
        let p = p.as_ref();
        if p.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: p.len(),
            });
        }
        for (cx, sx) in cell_shares(p[0], lower[0], upper[0], cells) {
            for (cy, sy) in cell_shares(p[1], lower[1], upper[1], cells) {
                out[cx * cells + cy] += w * sx * sy;
            }
        }
    }
    Ok(out)
}

/// Max-norm difference between the empirical cell frequencies of `points`
/// and the cell masses of a discrete equilibrium on the same box.
pub fn cell_discrepancy_2d<P: AsRef<[f64]>>(
    points: &[P],
    reference: &DiscreteEquilibrium,
    lower: [f64; 2],
    upper: [f64; 2],
    cells: usize,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::TooFewPoints { required: 1, found: 0 });
    }
    let uniform = vec![1.0 / points.len() as f64; points.len()];
    let empirical = cell_masses_2d(points, &uniform, lower, upper, cells)?;
    let nodes: Vec<&[f64]> = reference.nodes().points().collect();
    let target = cell_masses_2d(&nodes, reference.weights(), lower, upper, cells)?;
    Ok(empirical
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Per-`N` trajectories and final diagnostics of one run.
///
/// For block traces `N` counts blocks and `robin_values` hold
/// `U_{mN}^{(f,m)}/N`, whose limit is `m^2 W_f` (not `W_f`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub block_size: usize,
    pub n_values: Vec<usize>,
    pub normalized_energy: Vec<f64>,
    pub robin_values: Vec<Option<f64>>,
    pub ks_distances: Vec<Option<f64>>,
    pub target_vf: f64,
    pub target_wf: f64,
    pub support_violation: Option<f64>,
}

impl ConvergenceReport {
    pub fn build(
        trace: &GreedyTrace,
        field: &FieldSpec,
        cand: &CandidateSet,
        reference: &EquilibriumReference,
    ) -> Result<Self> {
        let m = trace.block_size().max(1);
        let energy = energy_trajectory(trace);
        let n_values: Vec<usize> = energy.iter().map(|(n, _)| *n).collect();
        let normalized_energy = energy.iter().map(|(_, e)| *e).collect();

        let robin_values = if m == 1 {
            n_values.iter().map(|&n| Some(trace.u(n) / n as f64)).collect()
        } else {
            let blocks = trace.block_values();
            n_values
                .iter()
                .map(|&b| blocks.get(b).map(|v| v / b as f64))
                .collect()
        };

        let ks_distances = match cdf_at_selection(trace, cand, reference) {
            Some(cdf) => n_values
                .iter()
                .map(|&n| Some(ks_from_cdf_values(&cdf[..n * m])))
                .collect(),
            None => vec![None; n_values.len()],
        };

        let support_violation = if reference.has_potential() {
            Some(support_violation(trace, reference, field, cand)?)
        } else {
            None
        };

        Ok(Self {
            block_size: m,
            n_values,
            normalized_energy,
            robin_values,
            ks_distances,
            target_vf: reference.v_f(),
            target_wf: reference.w_f(),
            support_violation,
        })
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.normalized_energy.last().copied()
    }

    pub fn final_ks(&self) -> Option<f64> {
        self.ks_distances.last().copied().flatten()
    }

    /// Last-quartile mean of the available Robin values.
    pub fn robin_tail_mean(&self) -> f64 {
        let pairs: Vec<(usize, f64)> = self
            .n_values
            .iter()
            .zip(&self.robin_values)
            .filter_map(|(n, r)| r.map(|r| (*n, r)))
            .collect();
        tail_mean(&pairs)
    }
}
