//! Greedy energy sequences: single-point, m-point blocks, and the brute-force
//! optimal configuration used as an oracle.
//!
//! Minimization always runs over the whole candidate set. Ties are broken by
//! the lowest candidate index, and parallel reductions combine
//! `(score, index)` pairs so the result does not depend on the worker count.
//! Block and subset searches treat values within a relative [`TIE_RTOL`] as
//! tied, so mirror-image optima that differ only by rounding resolve to the
//! lexicographically smallest tuple.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conductor::CandidateSet;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::kernel::{sq_distance, Configuration, KernelSpec};

/// Upper bound on the number of tuples any exhaustive search may visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Relative tolerance under which two block or subset values count as tied.
pub const TIE_RTOL: f64 = 1e-12;

const PAR_MIN_LEN: usize = 2048;

fn tie_tol(a: f64, b: f64) -> f64 {
    TIE_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Whether `(v, tuple)` should replace the incumbent `(best, best_tuple)`.
fn improves(v: f64, tuple: &[usize], best: f64, best_tuple: &[usize]) -> bool {
    if !best.is_finite() {
        return v < best;
    }
    let tol = tie_tol(v, best);
    v < best - tol || (v <= best + tol && tuple < best_tuple)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Start {
    /// Candidate minimizing the field, lowest index on ties.
    #[default]
    Auto,
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStrategy {
    Exhaustive,
    AlternatingRefinement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockOptions {
    pub strategy: BlockStrategy,
    /// Random multi-starts for `AlternatingRefinement`.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for BlockOptions {
    fn default() -> Self {
        Self {
            strategy: BlockStrategy::Exhaustive,
            restarts: 8,
            seed: 0,
        }
    }
}

/// Selected candidate indices plus per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    selected: Vec<usize>,
    u_values: Vec<f64>,
    energy_prefix: Vec<f64>,
    block_size: usize,
    block_values: Vec<f64>,
}

impl GreedyTrace {
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// 1 for single-point greedy, `m` for block greedy.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// `U_n^f(a_n) = sum_{i<n} k(a_n, a_i) + (n-1) f(a_n)` for `n >= 1` (1-based).
    pub fn u(&self, n: usize) -> f64 {
        self.u_values[n - 1]
    }

    /// All `U_n^f(a_n)`, entry `n-1` for step `n`; entry 0 is 0.
    pub fn u_values(&self) -> &[f64] {
        &self.u_values
    }

    /// Incrementally accumulated `E_f(alpha_n)` (1-based, `E_f(alpha_1) = 0`).
    pub fn energy(&self, n: usize) -> f64 {
        self.energy_prefix[n - 1]
    }

    pub fn energy_prefix(&self) -> &[f64] {
        &self.energy_prefix
    }

    /// For block traces: the block functional value at each block, the first
    /// entry being `sum_{i<j} k(x_i, x_j) + (m-1) sum_i f(x_i)`.
    pub fn block_values(&self) -> &[f64] {
        &self.block_values
    }
}

/// Running state of a greedy construction.
///
/// Keeps `S(x) = sum_i k(x, a_i)` for every candidate so that each step costs
/// one kernel evaluation per candidate.
pub struct GreedyEngine<'a> {
    kernel: KernelSpec,
    cand: &'a CandidateSet,
    field_values: Vec<f64>,
    potential: Vec<f64>,
    selected: Vec<usize>,
    u_values: Vec<f64>,
    energy_prefix: Vec<f64>,
    field_sum: f64,
}

impl<'a> GreedyEngine<'a> {
    pub fn new(kernel: KernelSpec, field: &FieldSpec, cand: &'a CandidateSet) -> Result<Self> {
        if field.dim() != cand.dim() {
            return Err(Error::DimensionMismatch {
                expected: cand.dim(),
                found: field.dim(),
            });
        }
        let field_values = cand.points().map(|p| field.eval_unchecked(p)).collect();
        Ok(Self {
            kernel,
            cand,
            field_values,
            potential: vec![0.0; cand.len()],
            selected: Vec::new(),
            u_values: Vec::new(),
            energy_prefix: Vec::new(),
            field_sum: 0.0,
        })
    }

    pub fn field_values(&self) -> &[f64] {
        &self.field_values
    }

    /// `S(x)` for every candidate.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Appends candidate `idx` as the next point of the sequence.
    pub fn push(&mut self, idx: usize) {
        let n = self.selected.len() + 1;
        let f = self.field_values[idx];
        let u = if n == 1 {
            0.0
        } else {
            self.potential[idx] + (n - 1) as f64 * f
        };
        let prev = self.energy_prefix.last().copied().unwrap_or(0.0);
        let e = if n == 1 {
            0.0
        } else {
            prev + 2.0 * u + 2.0 * self.field_sum
        };
        self.selected.push(idx);
        self.u_values.push(u);
        self.energy_prefix.push(e);
        self.field_sum += f;

        let a = self.cand.point(idx);
        let kernel = self.kernel;
        let dim = self.cand.dim();
        let coords = self.cand.coords();
        self.potential
            .par_iter_mut()
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .for_each(|(i, s)| {
                *s += kernel.at_sq_distance(sq_distance(&coords[i * dim..(i + 1) * dim], a));
            });
    }

    /// Minimizer of `S(x) + n f(x)` with `n` the number of points so far.
    pub fn next_single(&self) -> Result<usize> {
        let n = self.selected.len() as f64;
        let field = &self.field_values;
        let best = self
            .potential
            .par_iter()
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .map(|(i, s)| (s + n * field[i], i))
            .reduce(|| (f64::INFINITY, usize::MAX), min_pair);
        if !best.0.is_finite() || best.1 == usize::MAX {
            return Err(Error::NoFiniteCandidate(self.selected.len() + 1));
        }
        Ok(best.1)
    }

    pub fn into_trace(self, block_size: usize, block_values: Vec<f64>) -> GreedyTrace {
        GreedyTrace {
            selected: self.selected,
            u_values: self.u_values,
            energy_prefix: self.energy_prefix,
            block_size,
            block_values,
        }
    }
}

#[inline]
fn min_pair(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    let sa = if a.0.is_nan() { f64::INFINITY } else { a.0 };
    let sb = if b.0.is_nan() { f64::INFINITY } else { b.0 };
    match sa.total_cmp(&sb) {
        std::cmp::Ordering::Less => (sa, a.1),
        std::cmp::Ordering::Greater => (sb, b.1),
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                (sa, a.1)
            } else {
                (sb, b.1)
            }
        }
    }
}

fn resolve_start(start: Start, field_values: &[f64]) -> Result<usize> {
    match start {
        Start::Index(i) => {
            if i >= field_values.len() {
                return Err(Error::StartOutOfRange {
                    index: i,
                    len: field_values.len(),
                });
            }
            if !(field_values[i] < f64::INFINITY) {
                return Err(Error::InfiniteStart(i));
            }
            Ok(i)
        }
        Start::Auto => {
            let best = field_values
                .iter()
                .enumerate()
                .fold((f64::INFINITY, usize::MAX), |acc, (i, &f)| min_pair(acc, (f, i)));
            if best.1 == usize::MAX || !best.0.is_finite() {
                return Err(Error::NoFiniteCandidate(1));
            }
            Ok(best.1)
        }
    }
}

/// Weighted greedy f-energy sequence of length `n` on the candidate set.
pub fn greedy_run(
    kernel: KernelSpec,
    field: &FieldSpec,
    cand: &CandidateSet,
    n: usize,
    start: Start,
) -> Result<GreedyTrace> {
    if n < 2 {
        return Err(Error::TooFewPoints { required: 2, found: n });
    }
    let mut engine = GreedyEngine::new(kernel, field, cand)?;
    let first = resolve_start(start, engine.field_values())?;
    engine.push(first);
    for _ in 1..n {
        let next = engine.next_single()?;
        engine.push(next);
    }
    Ok(engine.into_trace(1, Vec::new()))
}

/// Weighted greedy (m, f)-energy sequence made of `n_blocks` blocks of `m` points.
pub fn block_greedy_run(
    kernel: KernelSpec,
    field: &FieldSpec,
    cand: &CandidateSet,
    m: usize,
    n_blocks: usize,
    opts: BlockOptions,
) -> Result<GreedyTrace> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("block size m must be >= 2, got {m}")));
    }
    if n_blocks < 1 {
        return Err(Error::InvalidParameter("need at least one block".into()));
    }
    if opts.strategy == BlockStrategy::Exhaustive {
        check_guard(cand.len(), m)?;
    }
    let mut engine = GreedyEngine::new(kernel, field, cand)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let search = BlockSearch::new(kernel, cand);
    let mut block_values = Vec::with_capacity(n_blocks);
    for block in 0..n_blocks {
        let c = ((block + 1) * m - 1) as f64;
        let g: Vec<f64> = engine
            .potential()
            .iter()
            .zip(engine.field_values())
            .map(|(s, f)| s + c * f)
            .collect();
        let (value, mut tuple) = match opts.strategy {
            BlockStrategy::Exhaustive => search.exhaustive(&g, m),
            BlockStrategy::AlternatingRefinement => search.alternating(&g, m, opts.restarts, &mut rng),
        }
        .ok_or(Error::NoFiniteCandidate(block * m + 1))?;
        tuple.sort_unstable();
        for idx in tuple {
            engine.push(idx);
        }
        block_values.push(value);
    }
    Ok(engine.into_trace(m, block_values))
}

/// Minimizes `sum_i g(x_i) + sum_{i<j} k(x_i, x_j)` over m-subsets.
struct BlockSearch<'a> {
    kernel: KernelSpec,
    cand: &'a CandidateSet,
    pair_lower_bound: f64,
}

impl<'a> BlockSearch<'a> {
    fn new(kernel: KernelSpec, cand: &'a CandidateSet) -> Self {
        // the kernel is decreasing in distance, and the bounding-box diagonal
        // bounds every pairwise distance
        let (lo, hi) = cand.bounding_box();
        let pair_lower_bound = kernel.at_sq_distance(sq_distance(&lo, &hi));
        Self {
            kernel,
            cand,
            pair_lower_bound,
        }
    }

    #[inline]
    fn k(&self, i: usize, j: usize) -> f64 {
        self.kernel.eval_unchecked(self.cand.point(i), self.cand.point(j))
    }

    fn value(&self, g: &[f64], tuple: &[usize]) -> f64 {
        let mut v: f64 = tuple.iter().map(|&i| g[i]).sum();
        for a in 0..tuple.len() {
            for b in (a + 1)..tuple.len() {
                v += self.k(tuple[a], tuple[b]);
            }
        }
        v
    }

    /// Exact branch-and-bound over candidates sorted by `g`.
    fn exhaustive(&self, g: &[f64], m: usize) -> Option<(f64, Vec<usize>)> {
        let mut order: Vec<usize> = (0..g.len()).filter(|&i| g[i].is_finite()).collect();
        if order.len() < m {
            return None;
        }
        order.sort_by(|&a, &b| g[a].total_cmp(&g[b]).then(a.cmp(&b)));
        let sorted_g: Vec<f64> = order.iter().map(|&i| g[i]).collect();
        let mut prefix = vec![0.0; sorted_g.len() + 1];
        for (t, v) in sorted_g.iter().enumerate() {
            prefix[t + 1] = prefix[t] + v;
        }
        let mut state = BnbState {
            best: f64::INFINITY,
            best_tuple: Vec::new(),
            chosen: Vec::with_capacity(m),
        };
        self.descend(&order, &prefix, m, 0, 0.0, &mut state);
        if state.best.is_finite() {
            Some((state.best, state.best_tuple))
        } else {
            None
        }
    }

    fn descend(&self, order: &[usize], prefix: &[f64], m: usize, from: usize, partial: f64, st: &mut BnbState) {
        let depth = st.chosen.len();
        let remaining = m - depth;
        if remaining == 0 {
            let mut tuple = st.chosen.clone();
            tuple.sort_unstable();
            if improves(partial, &tuple, st.best, &st.best_tuple) {
                st.best = partial;
                st.best_tuple = tuple;
            }
            return;
        }
        let pairs_left = (m * (m - 1) / 2 - depth * depth.saturating_sub(1) / 2) as f64;
        let last = order.len() - remaining;
        for pos in from..=last {
            let bound = partial + (prefix[pos + remaining] - prefix[pos]) + pairs_left * self.pair_lower_bound;
            if st.best.is_finite() && bound > st.best + tie_tol(bound, st.best) {
                break;
            }
            let idx = order[pos];
            let mut inc = prefix[pos + 1] - prefix[pos];
            for &c in &st.chosen {
                inc += self.k(idx, c);
            }
            if !inc.is_finite() {
                continue;
            }
            st.chosen.push(idx);
            self.descend(order, prefix, m, pos + 1, partial + inc, st);
            st.chosen.pop();
        }
    }

    /// Multi-start cyclic coordinate descent; a heuristic, validated against
    /// `exhaustive` on small instances.
    fn alternating(&self, g: &[f64], m: usize, restarts: usize, rng: &mut ChaCha8Rng) -> Option<(f64, Vec<usize>)> {
        let n = g.len();
        if n < m {
            return None;
        }
        let mut starts = Vec::with_capacity(restarts + 1);
        // sequential greedy seed
        let mut seed: Vec<usize> = Vec::with_capacity(m);
        for _ in 0..m {
            let best = (0..n)
                .filter(|i| !seed.contains(i))
                .map(|i| (g[i] + seed.iter().map(|&c| self.k(i, c)).sum::<f64>(), i))
                .fold((f64::INFINITY, usize::MAX), min_pair);
            if best.1 == usize::MAX {
                break;
            }
            seed.push(best.1);
        }
        if seed.len() == m {
            starts.push(seed);
        }
        for _ in 0..restarts {
            starts.push(sample(rng, n, m).into_vec());
        }

        let mut best: Option<(f64, Vec<usize>)> = None;
        for mut tuple in starts {
            let mut current = self.value(g, &tuple);
            loop {
                let mut improved = false;
                for slot in 0..m {
                    let mut contrib = (f64::INFINITY, usize::MAX);
                    for x in 0..n {
                        if tuple.iter().enumerate().any(|(t, &c)| t != slot && c == x) {
                            continue;
                        }
                        let mut v = g[x];
                        for (t, &c) in tuple.iter().enumerate() {
                            if t != slot {
                                v += self.k(x, c);
                            }
                        }
                        contrib = min_pair(contrib, (v, x));
                    }
                    if contrib.1 == usize::MAX || contrib.1 == tuple[slot] {
                        continue;
                    }
                    let mut candidate = tuple.clone();
                    candidate[slot] = contrib.1;
                    let v = self.value(g, &candidate);
                    if v < current {
                        tuple = candidate;
                        current = v;
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
            if !current.is_finite() {
                continue;
            }
            let mut sorted = tuple.clone();
            sorted.sort_unstable();
            let replace = match &best {
                None => true,
                Some((bv, bt)) => improves(current, &sorted, *bv, bt),
            };
            if replace {
                best = Some((current, sorted));
            }
        }
        best
    }
}

struct BnbState {
    best: f64,
    best_tuple: Vec<usize>,
    chosen: Vec<usize>,
}

/// Minimizer of the weighted energy over N-subsets, found by plain
/// lexicographic enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalConfiguration {
    pub indices: Vec<usize>,
    pub configuration: Configuration,
    pub energy: f64,
}

/// Weighted N-point energy of the candidate set and a minimizing subset
/// (lexicographically smallest on ties).
pub fn optimal_configuration(
    kernel: KernelSpec,
    field: &FieldSpec,
    cand: &CandidateSet,
    n: usize,
) -> Result<OptimalConfiguration> {
    if n < 2 {
        return Err(Error::TooFewPoints { required: 2, found: n });
    }
    if field.dim() != cand.dim() {
        return Err(Error::DimensionMismatch {
            expected: cand.dim(),
            found: field.dim(),
        });
    }
    if n > cand.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot choose {n} distinct points from {} candidates",
            cand.len()
        )));
    }
    check_guard(cand.len(), n)?;
    let f: Vec<f64> = cand.points().map(|p| field.eval_unchecked(p)).collect();
    let weight = 2.0 * (n as f64 - 1.0);

    // depth-first lexicographic enumeration with running pair sums
    let m = cand.len();
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    let mut partial = vec![0.0; n + 1];
    let mut best = (f64::INFINITY, Vec::new());
    let mut next = 0usize;
    loop {
        if idx.len() == n {
            let e = partial[n];
            if improves(e, &idx, best.0, &best.1) {
                best = (e, idx.clone());
            }
        }
        if idx.len() < n && next < m && m - next >= n - idx.len() {
            let d = idx.len();
            let mut inc = weight * f[next];
            for &c in &idx {
                inc += 2.0 * kernel.eval_unchecked(cand.point(next), cand.point(c));
            }
            partial[d + 1] = partial[d] + inc;
            idx.push(next);
            next += 1;
            continue;
        }
        match idx.pop() {
            Some(last) => next = last + 1,
            None => break,
        }
    }
    if best.1.is_empty() {
        return Err(Error::NoFiniteCandidate(n));
    }
    let configuration = cand.configuration(&best.1);
    let energy = kernel.weighted_energy(field, &configuration)?;
    Ok(OptimalConfiguration {
        indices: best.1,
        configuration,
        energy,
    })
}

/// Fails with `GuardExceeded` when `C(m, k)` exceeds [`ENUMERATION_LIMIT`].
pub fn check_guard(m: usize, k: usize) -> Result<()> {
    let count = binomial_capped(m as u128, k as u128, ENUMERATION_LIMIT + 1);
    if count > ENUMERATION_LIMIT {
        return Err(Error::GuardExceeded {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

fn binomial_capped(n: u128, k: u128, cap: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
        if acc >= cap {
            return cap;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conductor::interval_grid;
    use approx::assert_relative_eq;

    fn set(xs: &[f64]) -> CandidateSet {
        CandidateSet::new(1, xs.to_vec(), 0.5, "test").unwrap()
    }

    #[test]
    fn log_greedy_on_three_points() {
        let cand = set(&[-1.0, 0.0, 1.0]);
        let t = greedy_run(KernelSpec::logarithmic(), &FieldSpec::zero(1), &cand, 3, Start::Index(0)).unwrap();
        assert_eq!(t.selected(), &[0, 2, 1]);
        assert_relative_eq!(t.u(2), -(2f64.ln()), epsilon = 1e-15);
        // third point: -log 1 - log 1
        assert_eq!(t.u(3), 0.0);
    }

    #[test]
    fn riesz_second_point_is_farthest() {
        let cand = set(&[0.0, 1.0, 2.0]);
        let t = greedy_run(KernelSpec::new(1.0).unwrap(), &FieldSpec::zero(1), &cand, 2, Start::Index(0)).unwrap();
        assert_eq!(t.selected(), &[0, 2]);
        assert_eq!(t.u(2), 0.5);
    }

    #[test]
    fn log_greedy_clusters_at_endpoints() {
        let cand = interval_grid(-1.0, 1.0, 2001).unwrap();
        let t = greedy_run(KernelSpec::logarithmic(), &FieldSpec::zero(1), &cand, 50, Start::Index(0)).unwrap();
        let xs: Vec<f64> = t.selected().iter().map(|&i| cand.point(i)[0]).collect();
        let near_ends = xs.iter().filter(|x| x.abs() > 0.7).count();
        let middle = xs.iter().filter(|x| x.abs() < 0.3).count();
        // arcsine law: mass of |x| > 0.7 is 1 - 2 asin(0.7)/pi ~ 0.506, |x| < 0.3 is ~0.194
        assert!(near_ends > middle, "{near_ends} vs {middle}");
        assert_eq!(xs[1], 1.0);
    }

    #[test]
    fn start_errors() {
        let cand = set(&[-1.0, 0.0, 1.0]);
        let k = KernelSpec::logarithmic();
        assert!(matches!(
            greedy_run(k, &FieldSpec::zero(1), &cand, 3, Start::Index(3)),
            Err(Error::StartOutOfRange { .. })
        ));
        let jac = FieldSpec::jacobi(1.0, 1.0).unwrap();
        assert!(matches!(
            greedy_run(k, &jac, &cand, 2, Start::Index(0)),
            Err(Error::InfiniteStart(0))
        ));
        // auto picks argmin f = 0
        let t = greedy_run(k, &jac, &cand, 2, Start::Auto);
        // only x = 0 has finite field, so step 2 has no finite candidate
        assert!(matches!(t, Err(Error::NoFiniteCandidate(2))));
        assert!(greedy_run(k, &FieldSpec::zero(2), &cand, 2, Start::Auto).is_err());
    }

    #[test]
    fn auto_start_is_field_argmin() {
        let cand = interval_grid(-1.0, 1.0, 11).unwrap();
        let t = greedy_run(KernelSpec::logarithmic(), &FieldSpec::absolute_value(1), &cand, 4, Start::Auto).unwrap();
        assert_eq!(t.selected()[0], 5);
        let t = greedy_run(KernelSpec::logarithmic(), &FieldSpec::zero(1), &cand, 4, Start::Auto).unwrap();
        assert_eq!(t.selected()[0], 0);
    }

    #[test]
    fn riesz_repeats_only_when_forced() {
        let cand = set(&[0.0, 1.0]);
        let r = greedy_run(KernelSpec::new(1.0).unwrap(), &FieldSpec::zero(1), &cand, 3, Start::Index(0));
        assert!(matches!(r, Err(Error::NoFiniteCandidate(3))));
    }

    #[test]
    fn first_block_examples() {
        let cand = set(&[-1.0, 0.0, 1.0]);
        let opts = BlockOptions::default();
        let t = block_greedy_run(KernelSpec::new(1.0).unwrap(), &FieldSpec::zero(1), &cand, 2, 1, opts).unwrap();
        assert_eq!(t.selected(), &[0, 2]);
        assert_eq!(t.block_values(), &[0.5]);
        let t = block_greedy_run(KernelSpec::logarithmic(), &FieldSpec::zero(1), &cand, 2, 1, opts).unwrap();
        assert_eq!(t.selected(), &[0, 2]);
        assert_relative_eq!(t.energy(2), -2.0 * 2f64.ln(), epsilon = 1e-15);
    }

    // brute force over all pairs of the functional of a later block
    fn block_oracle(k: KernelSpec, cand: &CandidateSet, prior: &[usize], c: f64, f: &FieldSpec) -> (f64, Vec<usize>) {
        let mut best = (f64::INFINITY, vec![]);
        for i in 0..cand.len() {
            for j in (i + 1)..cand.len() {
                let mut v = k.eval_unchecked(cand.point(i), cand.point(j));
                for &x in [i, j].iter() {
                    for &a in prior {
                        v += k.eval_unchecked(cand.point(x), cand.point(a));
                    }
                    v += c * f.eval_unchecked(cand.point(x));
                }
                if improves(v, &[i, j], best.0, &best.1) {
                    best = (v, vec![i, j]);
                }
            }
        }
        best
    }

    #[test]
    fn second_block_matches_oracle_for_both_strategies() {
        let cand = set(&[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let k = KernelSpec::new(1.0).unwrap();
        let zero = FieldSpec::zero(1);
        let (value, tuple) = block_oracle(k, &cand, &[0, 4], 3.0, &zero);
        assert_eq!(tuple, vec![1, 3]);
        for strategy in [BlockStrategy::Exhaustive, BlockStrategy::AlternatingRefinement] {
            let opts = BlockOptions { strategy, restarts: 8, seed: 7 };
            let t = block_greedy_run(k, &zero, &cand, 2, 2, opts).unwrap();
            assert_eq!(&t.selected()[..2], &[0, 4]);
            assert_eq!(&t.selected()[2..], &tuple[..]);
            assert_relative_eq!(t.block_values()[1], value, epsilon = 1e-12);
        }
    }

    fn block_value(k: KernelSpec, cand: &CandidateSet, prior: &[usize], c: f64, f: &FieldSpec, tuple: &[usize]) -> f64 {
        let mut v = k.eval_unchecked(cand.point(tuple[0]), cand.point(tuple[1]));
        for &x in tuple {
            for &a in prior {
                v += k.eval_unchecked(cand.point(x), cand.point(a));
            }
            v += c * f.eval_unchecked(cand.point(x));
        }
        v
    }

    #[test]
    fn block_strategies_agree_with_oracle_on_weighted_instances() {
        let cand = interval_grid(-1.0, 1.0, 15).unwrap();
        // f = |x| makes every pair straddling 0 at a given distance tie, and
        // symmetric priors tie mirror images
        for (s, field) in [
            (0.5, FieldSpec::absolute_value(1)),
            (0.0, FieldSpec::quadratic_norm(1)),
            (1.0, FieldSpec::zero(1)),
        ] {
            let k = KernelSpec::new(s).unwrap();
            let ex = block_greedy_run(k, &field, &cand, 2, 4, BlockOptions::default()).unwrap();
            let mut prior = vec![];
            for b in 0..4 {
                let c = ((b + 1) * 2 - 1) as f64;
                let (v, tuple) = block_oracle(k, &cand, &prior, c, &field);
                let got = &ex.selected()[2 * b..2 * b + 2];
                assert_relative_eq!(ex.block_values()[b], v, max_relative = 1e-12);
                assert_relative_eq!(block_value(k, &cand, &prior, c, &field, got), v, max_relative = 1e-12);
                assert_eq!(got, &tuple[..]);
                prior.extend_from_slice(got);
            }
        }
    }

    #[test]
    fn block_errors() {
        let cand = interval_grid(-1.0, 1.0, 5).unwrap();
        let k = KernelSpec::logarithmic();
        let z = FieldSpec::zero(1);
        assert!(block_greedy_run(k, &z, &cand, 1, 2, BlockOptions::default()).is_err());
        let big = interval_grid(-1.0, 1.0, 500).unwrap();
        assert!(matches!(
            block_greedy_run(k, &z, &big, 4, 1, BlockOptions::default()),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn optimal_examples() {
        let cand = set(&[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let o = optimal_configuration(KernelSpec::logarithmic(), &FieldSpec::zero(1), &cand, 2).unwrap();
        assert_eq!(o.indices, vec![0, 4]);
        assert_relative_eq!(o.energy, -2.0 * 2f64.ln(), epsilon = 1e-15);

        let cand = set(&[-1.0, 0.0, 1.0]);
        let o = optimal_configuration(KernelSpec::new(1.0).unwrap(), &FieldSpec::zero(1), &cand, 3).unwrap();
        assert_eq!(o.indices, vec![0, 1, 2]);
        assert_eq!(o.energy, 5.0);

        // f = |x|: -2 log d + 2 d is minimal at d = 1 for every pair straddling
        // 0, so the symmetric pair is one of many optima
        let cand = interval_grid(-1.0, 1.0, 41).unwrap();
        let k = KernelSpec::logarithmic();
        let abs = FieldSpec::absolute_value(1);
        let o = optimal_configuration(k, &abs, &cand, 2).unwrap();
        assert_relative_eq!(o.energy, 2.0, epsilon = 1e-12);
        let sym = k.weighted_energy(&abs, &Configuration::from_reals(&[-0.5, 0.5])).unwrap();
        assert_relative_eq!(sym, o.energy, epsilon = 1e-12);

        // a strictly convex even field makes the optimum unique, hence symmetric
        let o = optimal_configuration(k, &FieldSpec::quadratic_norm(1), &cand, 2).unwrap();
        let x0 = cand.point(o.indices[0])[0];
        let x1 = cand.point(o.indices[1])[0];
        assert_eq!(x0, -x1);
    }

    #[test]
    fn optimal_guard() {
        let cand = interval_grid(-1.0, 1.0, 200).unwrap();
        assert!(matches!(
            optimal_configuration(KernelSpec::logarithmic(), &FieldSpec::zero(1), &cand, 6),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(check_guard(1001, 2).is_ok());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial_capped(5, 2, u128::MAX), 10);
        assert_eq!(binomial_capped(21, 5, u128::MAX), 20349);
        assert_eq!(binomial_capped(3, 5, u128::MAX), 0);
        assert_eq!(binomial_capped(1000, 500, 100), 100);
    }
}
