//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use greedy_energy::analysis::{
    block_robin_trajectory, cell_discrepancy_2d, energy_identity_residual, ks_distance_1d, ks_distance_radial,
    robin_trajectory, support_violation, tail_mean,
};
use greedy_energy::conductor::{ball_grid, box_grid, interval_grid};
use greedy_energy::equilibrium::{
    discrete_equilibrium, jacobi_law, jacobi_reference, radial_newtonian_reference, riesz_interval_reference,
    EquilibriumReference, LadderOptions, SolverMethod, SolverOptions,
};
use greedy_energy::selector::{block_greedy_run, greedy_run, optimal_configuration, BlockOptions, BlockStrategy, Start};
use greedy_energy::{CandidateSet, FieldSpec, GreedyTrace, KernelSpec};

const IDENTITY_RTOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Traces produced along the way, rechecked by the energy identity at the end.
struct Traces(Vec<(String, GreedyTrace, KernelSpec, FieldSpec, CandidateSet)>);

impl Traces {
    fn keep(&mut self, name: &str, t: &GreedyTrace, k: KernelSpec, f: &FieldSpec, c: &CandidateSet) {
        self.0.push((name.to_string(), t.clone(), k, *f, c.clone()));
    }
}

struct Log {
    v_hat: f64,
    w_hat: f64,
    log_reference: EquilibriumReference,
}

fn coords_1d(t: &GreedyTrace, c: &CandidateSet) -> Vec<f64> {
    t.selected().iter().map(|&i| c.point(i)[0]).collect()
}

fn c2_oracle_dominance(traces: &mut Traces) -> Outcome {
    let cand = interval_grid(-1.0, 1.0, 21).unwrap();
    let mut worst_margin = f64::INFINITY;
    let mut checked = 0;
    for s in [0.0, 0.5, 1.0] {
        let k = KernelSpec::new(s).unwrap();
        for field in [FieldSpec::zero(1), FieldSpec::absolute_value(1)] {
            let g = greedy_run(k, &field, &cand, 5, Start::Auto).unwrap();
            traces.keep(&format!("oracle s={s}"), &g, k, &field, &cand);
            for n in 2..=5 {
                let opt = optimal_configuration(k, &field, &cand, n).unwrap();
                let greedy = k.weighted_energy(&field, &cand.configuration(&g.selected()[..n])).unwrap();
                // equality cases only differ by summation order
                let margin = greedy - opt.energy + 1e-12 * opt.energy.abs().max(1.0);
                worst_margin = worst_margin.min(margin);
                if margin < 0.0 {
                    return outcome(false, format!("s={s} N={n}: greedy {greedy} < optimum {}", opt.energy));
                }
                checked += 1;
            }
            let block = block_greedy_run(k, &field, &cand, 2, 1, BlockOptions::default()).unwrap();
            let opt = optimal_configuration(k, &field, &cand, 2).unwrap();
            if block.selected() != opt.indices.as_slice() {
                return outcome(
                    false,
                    format!("s={s}: first block {:?} != optimum {:?}", block.selected(), opt.indices),
                );
            }
            let e = 2.0 * block.block_values()[0];
            if (e - opt.energy).abs() > 1e-12 * opt.energy.abs().max(1.0) {
                return outcome(false, format!("s={s}: first block energy {e} != {}", opt.energy));
            }
        }
    }
    outcome(true, format!("{checked} prefixes dominate the optimum; first blocks match (N=2) in all 6 settings"))
}

fn c3_jacobi_endpoints() -> Outcome {
    // printed to two decimals (b for (4,1) to three): accept one unit in the last digit
    let cases = [((2.0, 1.0), (-0.83, 0.45), 0.01, 0.01), ((4.0, 1.0), (-0.89, 0.062), 0.01, 0.001)];
    let mut parts = Vec::new();
    let mut pass = true;
    for ((l1, l2), (pa, pb), ta, tb) in cases {
        let law = jacobi_law(l1, l2).unwrap();
        let (a, b) = law.support();
        let ok = (a - pa).abs() < ta && (b - pb).abs() < tb;
        pass &= ok;
        parts.push(format!("({l1},{l2}) -> a={a:.4} b={b:.4} vs {pa}/{pb}"));
    }
    outcome(pass, parts.join("; "))
}

fn c4_figure8(traces: &mut Traces) -> Outcome {
    let cand = interval_grid(-1.0, 1.0, 2001).unwrap();
    let zero = cand.nearest(&[0.0]).unwrap();
    assert_eq!(cand.point(zero)[0], 0.0);
    let field = FieldSpec::jacobi(4.0, 1.0).unwrap();
    let k = KernelSpec::logarithmic();
    let t = greedy_run(k, &field, &cand, 50, Start::Index(zero)).unwrap();
    traces.keep("Jacobi(4,1) confinement", &t, k, &field, &cand);
    let (a, b) = jacobi_law(4.0, 1.0).unwrap().support();
    let xs = coords_1d(&t, &cand);
    let inside = xs.iter().filter(|&&x| x >= a - 0.05 && x <= b + 0.05).count();
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        inside >= 48,
        format!("{inside}/50 points in [a-0.05, b+0.05] = [{:.3}, {:.3}]; max point {max:.4}", a - 0.05, b + 0.05),
    )
}

fn c5_c7_log_interval(log: &Log, traces: &mut Traces) -> (Outcome, Outcome) {
    let cand = interval_grid(-1.0, 1.0, 2001).unwrap();
    let k = KernelSpec::logarithmic();
    let field = FieldSpec::zero(1);
    let n = 200;
    let t = greedy_run(k, &field, &cand, n, Start::Index(0)).unwrap();
    traces.keep("log interval N=200", &t, k, &field, &cand);
    let e = t.energy(n) / (n * (n - 1)) as f64;
    let c5 = outcome(
        (e - log.v_hat).abs() <= 0.06,
        format!("E/(N(N-1)) = {e:.5}, V_hat = {:.5}, |diff| = {:.4} <= 0.06", log.v_hat, (e - log.v_hat).abs()),
    );
    let robin = tail_mean(&robin_trajectory(&t));
    let c7 = outcome(
        (robin - log.w_hat).abs() <= 0.08,
        format!(
            "tail mean U_n/n = {robin:.5}, W_hat = {:.5}, |diff| = {:.4} <= 0.08",
            log.w_hat,
            (robin - log.w_hat).abs()
        ),
    );
    (c5, c7)
}

fn c6_equidistribution(log: &Log, traces: &mut Traces) -> Outcome {
    let cand = interval_grid(-1.0, 1.0, 4001).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for s in [0.0, 0.5] {
        let k = KernelSpec::new(s).unwrap();
        let field = FieldSpec::zero(1);
        let reference = if s == 0.0 {
            log.log_reference.clone()
        } else {
            riesz_interval_reference(s, &LadderOptions::default()).unwrap()
        };
        let t = greedy_run(k, &field, &cand, 500, Start::Index(0)).unwrap();
        traces.keep(&format!("equidistribution s={s}"), &t, k, &field, &cand);
        let xs = coords_1d(&t, &cand);
        let ks500 = ks_distance_1d(&xs, &reference).unwrap();
        let ks50 = ks_distance_1d(&xs[..50], &reference).unwrap();
        let ok = ks500 <= 0.10 && ks500 < ks50;
        pass &= ok;
        parts.push(format!("s={s}: KS(500) = {ks500:.4}, KS(50) = {ks50:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn c8_radial(traces: &mut Traces) -> Outcome {
    let field = FieldSpec::quadratic_norm(3);
    let reference = radial_newtonian_reference(3, &field).unwrap();
    let r0 = reference.radial_law().unwrap().outer;
    let cand = ball_grid(1.2 * r0, 3, 41).unwrap();
    let k = KernelSpec::new(1.0).unwrap();
    let t = greedy_run(k, &field, &cand, 300, Start::Auto).unwrap();
    traces.keep("radial Newtonian", &t, k, &field, &cand);
    let violation = support_violation(&t, &reference, &field, &cand).unwrap();
    let pts: Vec<&[f64]> = t.selected().iter().map(|&i| cand.point(i)).collect();
    let ks = ks_distance_radial(&pts, &reference).unwrap();
    outcome(
        violation <= 0.05 && ks <= 0.12,
        format!(
            "R0 = {r0:.5}, {} candidates, support violation = {violation:.4} <= 0.05, radial KS = {ks:.4} <= 0.12",
            cand.len()
        ),
    )
}

fn c9_blocks(log: &Log, traces: &mut Traces) -> Outcome {
    let cand = interval_grid(-1.0, 1.0, 1001).unwrap();
    let k = KernelSpec::logarithmic();
    let field = FieldSpec::zero(1);
    let m = 2;
    let blocks = 100;
    let opts = BlockOptions {
        strategy: BlockStrategy::Exhaustive,
        ..Default::default()
    };
    let t = block_greedy_run(k, &field, &cand, m, blocks, opts).unwrap();
    traces.keep("blocks m=2", &t, k, &field, &cand);
    let n = m * blocks;
    let e = t.energy(n) / (n * n) as f64;
    let diag = tail_mean(&block_robin_trajectory(&t));
    let m2 = (m * m) as f64;
    let ok_e = (e - log.v_hat).abs() <= 0.08;
    let ok_d = (diag - m2 * log.w_hat).abs() <= 0.15 * m2;
    outcome(
        ok_e && ok_d,
        format!(
            "E/(2N)^2 = {e:.5} vs V_hat {:.5} (|diff| {:.4} <= 0.08); tail U/N = {diag:.4} vs m^2 W_hat {:.4} (|diff| {:.4} <= {:.2})",
            log.v_hat,
            (e - log.v_hat).abs(),
            m2 * log.w_hat,
            (diag - m2 * log.w_hat).abs(),
            0.15 * m2
        ),
    )
}

fn c10_solver() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let instances: Vec<(&str, KernelSpec, FieldSpec, CandidateSet, bool)> = vec![
        ("log, f=0, M=201", KernelSpec::logarithmic(), FieldSpec::zero(1), interval_grid(-1.0, 1.0, 201).unwrap(), true),
        ("s=0.5, f=0, M=201", KernelSpec::new(0.5).unwrap(), FieldSpec::zero(1), interval_grid(-1.0, 1.0, 201).unwrap(), true),
        ("s=0.5, |x|, M=151", KernelSpec::new(0.5).unwrap(), FieldSpec::absolute_value(1), interval_grid(-1.0, 1.0, 151).unwrap(), true),
        ("log, Jacobi(2,1), M=201", KernelSpec::logarithmic(), FieldSpec::jacobi(2.0, 1.0).unwrap(), interval_grid(-1.0, 1.0, 201).unwrap(), false),
        ("s=0.8, x^2+y^2, 21x21", KernelSpec::new(0.8).unwrap(), FieldSpec::quadratic_norm(2), box_grid(&[0.0, 0.0], &[1.0, 1.0], 21).unwrap(), false),
    ];
    for method in [SolverMethod::Accelerated, SolverMethod::ProjectedGradient] {
        for (name, k, f, c, symmetric) in &instances {
            let opts = SolverOptions {
                tol: 1e-7,
                max_iters: 200_000,
                method,
                record_history: true,
            };
            let sol = discrete_equilibrium(*k, f, c, &opts).unwrap();
            let monotone = sol.history.windows(2).all(|w| w[1] <= w[0]);
            let mut ok = monotone && sol.converged && sol.gap <= opts.tol;
            let mut asym = 0.0f64;
            if *symmetric {
                let w = sol.weights();
                let n = w.len();
                asym = (0..n).map(|i| (w[i] - w[n - 1 - i]).abs()).fold(0.0, f64::max);
                ok &= asym <= 1e-8;
            }
            pass &= ok;
            if !ok {
                parts.push(format!(
                    "{method:?} {name}: monotone={monotone} gap={:.2e} converged={} asym={asym:.1e}",
                    sol.gap, sol.converged
                ));
            }
        }
    }
    if pass {
        parts.push(format!(
            "{} runs: objective non-increasing, gap <= 1e-7, symmetric weights within 1e-8",
            2 * instances.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c11_square(traces: &mut Traces) -> Outcome {
    let k = KernelSpec::new(0.8).unwrap();
    let field = FieldSpec::quadratic_norm(2);
    let cand = box_grid(&[0.0, 0.0], &[1.0, 1.0], 101).unwrap();
    let t = greedy_run(k, &field, &cand, 200, Start::Auto).unwrap();
    traces.keep("square", &t, k, &field, &cand);
    let coarse = box_grid(&[0.0, 0.0], &[1.0, 1.0], 41).unwrap();
    let sol = discrete_equilibrium(k, &field, &coarse, &SolverOptions::default()).unwrap();
    let pts: Vec<&[f64]> = t.selected().iter().map(|&i| cand.point(i)).collect();
    let d = cell_discrepancy_2d(&pts, &sol, [0.0, 0.0], [1.0, 1.0], 4).unwrap();
    outcome(
        d <= 0.10 && sol.converged,
        format!("4x4 cell discrepancy = {d:.4} <= 0.10 (reference on 41x41 nodes, gap {:.1e})", sol.gap),
    )
}

fn c1_identity(traces: &Traces) -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    for (name, t, k, f, c) in &traces.0 {
        let r = energy_identity_residual(t, *k, f, c, t.len()).unwrap();
        if r > worst {
            worst = r;
            worst_name = name.clone();
        }
    }
    outcome(
        worst <= IDENTITY_RTOL,
        format!("{} traces, worst relative residual {worst:.2e} ({worst_name})", traces.0.len()),
    )
}

type Row = (usize, &'static str, Outcome, f64);

fn run(results: &mut Vec<Row>, traces: &mut Traces, id: usize, title: &'static str, f: impl FnOnce(&mut Traces) -> Outcome) {
    let t = Instant::now();
    let o = f(traces);
    results.push((id, title, o, t.elapsed().as_secs_f64()));
}

fn report(id: usize, title: &str, o: &Outcome, secs: f64) -> bool {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id:>2} {title}: {} ({secs:.1}s)", o.detail);
    o.pass
}

fn main() -> ExitCode {
    let mut traces = Traces(Vec::new());

    let clock = Instant::now();
    let log_reference = riesz_interval_reference(0.0, &LadderOptions::default()).unwrap();
    let ladder = log_reference.ladder().unwrap();
    let log = Log {
        v_hat: ladder.v_hat,
        w_hat: ladder.w_hat,
        log_reference: log_reference.clone(),
    };
    println!(
        "log-kernel ladder on [-1,1]: M = {:?}, V = {:?}, V_hat = {:.5} ({:.1}s)",
        ladder.sizes,
        ladder.v_f.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>(),
        ladder.v_hat,
        clock.elapsed().as_secs_f64()
    );
    // Jacobi ladder exercised for completeness of the reference
    let jac = jacobi_reference(2.0, 1.0, &LadderOptions::default()).unwrap();
    println!("Jacobi(2,1) ladder: V_hat = {:.5}, W_hat = {:.5}", jac.v_f(), jac.w_f());

    let mut results: Vec<Row> = Vec::new();
    run(&mut results, &mut traces, 2, "oracle dominance", c2_oracle_dominance);
    run(&mut results, &mut traces, 3, "Jacobi support endpoints", |_| c3_jacobi_endpoints());
    run(&mut results, &mut traces, 4, "Jacobi(4,1) support confinement", c4_figure8);
    let t = Instant::now();
    let (c5, c7) = c5_c7_log_interval(&log, &mut traces);
    let dt = t.elapsed().as_secs_f64();
    results.push((5, "energy convergence", c5, dt));
    results.push((7, "Robin convergence (same run as 5)", c7, dt));
    run(&mut results, &mut traces, 6, "equidistribution", |tr| c6_equidistribution(&log, tr));
    run(&mut results, &mut traces, 8, "radial Newtonian", c8_radial);
    run(&mut results, &mut traces, 9, "block asymptotics", |tr| c9_blocks(&log, tr));
    run(&mut results, &mut traces, 10, "discrete solver properties", |_| c10_solver());
    run(&mut results, &mut traces, 11, "2-D square equidistribution", c11_square);

    let t = Instant::now();
    let c1 = c1_identity(&traces);
    results.push((1, "energy identity", c1, t.elapsed().as_secs_f64()));
    results.sort_by_key(|r| r.0);

    let mut all = true;
    for (id, title, o, secs) in &results {
        all &= report(*id, title, o, *secs);
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
