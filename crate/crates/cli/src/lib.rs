//! Command-line driver: reads a TOML run configuration, generates greedy
//! or optimal point sets, and writes points, trajectories and a report.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid configuration,
//! 3 enumeration guard exceeded, 4 I/O failure.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub mod config;
pub mod experiment;
pub mod output;

use experiment::{Experiment, ReferenceChoice, RunResult};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Guard(String),
    Io(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Io(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Guard(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<greedy_energy::Error> for CliError {
    fn from(e: greedy_energy::Error) -> Self {
        use greedy_energy::Error as E;
        match e {
            E::GuardExceeded { .. } => CliError::Guard(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "greedy-energy", version, about = "Weighted greedy energy sequences on discretized conductors")]
pub struct Cli {
    /// Overrides `output.dir` from the config.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a sequence and write points, trajectory and report.
    Run { config: PathBuf },
    /// Run two configs on the same conductor and compare them per N.
    Compare { config_a: PathBuf, config_b: PathBuf },
    /// Dump density and CDF samples (or discrete weights) of the reference.
    Equilibrium {
        config: PathBuf,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Brute-force optimal weighted configuration for `run.N`.
    Brute { config: PathBuf },
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Run { config } => run(config, cli.output_dir.as_deref()),
        Command::Compare { config_a, config_b } => compare(config_a, config_b),
        Command::Equilibrium { config, samples } => equilibrium(config, *samples, cli.output_dir.as_deref()),
        Command::Brute { config } => brute(config, cli.output_dir.as_deref()),
    }
}

fn load_experiment(path: &Path, output_dir: Option<&Path>) -> Result<(Experiment, u64), CliError> {
    let loaded = config::load(path)?;
    let mut exp = Experiment::from_config(&loaded)?;
    if let Some(dir) = output_dir {
        exp.output_dir = dir.to_path_buf();
    }
    Ok((exp, loaded.config.seed))
}

pub fn run(path: &Path, output_dir: Option<&Path>) -> Result<(), CliError> {
    let (exp, seed) = load_experiment(path, output_dir)?;
    let outcome = exp.run()?;
    output::create_dir(&exp.output_dir)?;
    let wants = |f: &str| exp.formats.iter().any(|x| x == f);
    if wants("points-csv") {
        output::write_points(&exp.output_dir.join("points.csv"), &exp.cand, outcome.indices())?;
    }
    let report = outcome.report(&exp, seed)?;
    if wants("trajectory-csv") {
        output::write_trajectory(&exp.output_dir.join("trajectory.csv"), &outcome.trajectory(&exp)?)?;
    }
    if wants("report-json") {
        output::write_json(&exp.output_dir.join("report.json"), &report)?;
    }
    println!(
        "{} points written to {}; final normalized energy {}",
        report.points,
        exp.output_dir.display(),
        output::fmt_opt(report.final_normalized_energy)
    );
    if let (Some(v), Some(w)) = (report.target_vf, report.target_wf) {
        println!("reference V_f = {v:.6}, W_f = {w:.6}");
    }
    Ok(())
}

pub fn compare(path_a: &Path, path_b: &Path) -> Result<(), CliError> {
    let (mut a, seed_a) = load_experiment(path_a, None)?;
    let (mut b, seed_b) = load_experiment(path_b, None)?;
    if a.cand.dim() != b.cand.dim() || a.cand.coords() != b.cand.coords() {
        return Err(CliError::Config(format!(
            "{} and {} use different conductors ({} vs {}); compare needs the same candidate set",
            path_a.display(),
            path_b.display(),
            a.cand.label(),
            b.cand.label()
        )));
    }
    // the comparison is about energies; skip equilibrium solves
    a.reference = ReferenceChoice::None;
    b.reference = ReferenceChoice::None;
    let ra = a.run()?;
    let rb = b.run()?;
    let rep_a = ra.report(&a, seed_a)?;
    let rep_b = rb.report(&b, seed_b)?;

    println!("{:<28} {:>22} {:>22}", "", path_a.display(), path_b.display());
    let row = |name: &str, x: String, y: String| println!("{name:<28} {x:>22} {y:>22}");
    row("kernel s", rep_a.kernel_s.to_string(), rep_b.kernel_s.to_string());
    row("strategy", rep_a.strategy.clone(), rep_b.strategy.clone());
    row("block size", rep_a.block_size.to_string(), rep_b.block_size.to_string());
    row("points", rep_a.points.to_string(), rep_b.points.to_string());
    row(
        "final normalized energy",
        output::fmt_opt(rep_a.final_normalized_energy),
        output::fmt_opt(rep_b.final_normalized_energy),
    );
    row("final robin value", output::fmt_opt(rep_a.final_robin_value), output::fmt_opt(rep_b.final_robin_value));

    // per point count, so block runs line up with single-point runs
    let ea = point_energies(&ra, a.m);
    let eb = point_energies(&rb, b.m);
    println!();
    println!("{:>6} {:>22} {:>22} {:>14}", "N", "E_f(a)", "E_f(b)", "ratio a/b");
    for (n, x) in &ea {
        if let Some((_, y)) = eb.iter().find(|(m, _)| m == n) {
            println!("{n:>6} {x:>22.12e} {y:>22.12e} {:>14.10}", x / y);
        }
    }
    println!();
    let same = ra.indices() == rb.indices();
    println!("point sets: {}", if same { "identical" } else { "distinct" });
    Ok(())
}

fn point_energies(o: &experiment::Outcome, m: usize) -> Vec<(usize, f64)> {
    match &o.result {
        RunResult::Trace(t) if m > 1 => (1..=t.len() / m).filter(|b| b * m >= 2).map(|b| (b * m, t.energy(b * m))).collect(),
        _ => o.energies(),
    }
}

pub fn equilibrium(path: &Path, samples: usize, output_dir: Option<&Path>) -> Result<(), CliError> {
    if samples < 2 {
        return Err(CliError::Config("--samples must be at least 2".into()));
    }
    let (exp, _) = load_experiment(path, output_dir)?;
    let reference = exp
        .build_reference()?
        .ok_or_else(|| CliError::Config("analysis.reference = \"none\" leaves nothing to dump".into()))?;
    output::create_dir(&exp.output_dir)?;
    let file = exp.output_dir.join("equilibrium.csv");
    output::write_reference(&file, &reference, samples)?;
    println!("{:?}: V_f = {:.8}, W_f = {:.8}", reference.kind(), reference.v_f(), reference.w_f());
    println!("samples written to {}", file.display());
    Ok(())
}

pub fn brute(path: &Path, output_dir: Option<&Path>) -> Result<(), CliError> {
    let (exp, _) = load_experiment(path, output_dir)?;
    let best = greedy_energy::selector::optimal_configuration(exp.kernel, &exp.field, &exp.cand, exp.n)?;
    output::create_dir(&exp.output_dir)?;
    let file = exp.output_dir.join("optimal_points.csv");
    output::write_points(&file, &exp.cand, &best.indices)?;
    println!("optimal weighted {}-point energy: {}", exp.n, best.energy);
    println!("indices: {:?}", best.indices);
    println!("points written to {}", file.display());
    Ok(())
}
