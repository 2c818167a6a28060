//! File writers. Floats use Rust's shortest round-trip formatting so the
//! files are byte-stable and re-readable without loss.

use std::fs;
use std::path::Path;

use greedy_energy::equilibrium::ReferenceKind;
use greedy_energy::{CandidateSet, EquilibriumReference};
use serde::Serialize;

use crate::experiment::TrajectoryRow;
use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn finish(path: &Path, mut w: csv::Writer<fs::File>) -> Result<(), CliError> {
    w.flush().map_err(|e| io_err(path, e))
}

/// One point per row in selection order, header `x1,...,xp`.
pub fn write_points(path: &Path, cand: &CandidateSet, indices: &[usize]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let header: Vec<String> = (1..=cand.dim()).map(|k| format!("x{k}")).collect();
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for &i in indices {
        w.write_record(cand.point(i).iter().map(f64::to_string))
            .map_err(|e| io_err(path, e))?;
    }
    finish(path, w)
}

/// Columns `N,normalized_energy,robin_value,ks_distance`; missing values
/// are empty cells.
pub fn write_trajectory(path: &Path, rows: &[TrajectoryRow]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["N", "normalized_energy", "robin_value", "ks_distance"])
        .map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.normalized_energy.to_string(),
            fmt_opt(r.robin_value),
            fmt_opt(r.ks_distance),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    finish(path, w)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Density and CDF on `samples` equispaced abscissae of the support
/// (`t` is `x` on an interval and `r` for radial laws), or the node
/// weights of a discrete reference.
pub fn write_reference(path: &Path, reference: &EquilibriumReference, samples: usize) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let mut put = |rec: Vec<String>| w.write_record(&rec).map_err(|e| io_err(path, e));
    let sampled = |lo: f64, hi: f64, put: &mut dyn FnMut(Vec<String>) -> Result<(), CliError>| {
        for k in 0..samples {
            let t = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
            put(vec![
                t.to_string(),
                reference.density(t)?.to_string(),
                reference.cdf(t)?.to_string(),
            ])?;
        }
        Ok::<(), CliError>(())
    };
    match reference.kind() {
        ReferenceKind::Discrete => {
            let d = reference.discrete().expect("discrete reference carries its solution");
            let mut header: Vec<String> = (1..=d.nodes().dim()).map(|k| format!("x{k}")).collect();
            header.push("weight".into());
            put(header)?;
            for (x, wgt) in d.nodes().points().zip(d.weights()) {
                let mut rec: Vec<String> = x.iter().map(f64::to_string).collect();
                rec.push(wgt.to_string());
                put(rec)?;
            }
        }
        ReferenceKind::RadialNewtonian { .. } => {
            let law = reference.radial_law().expect("radial reference carries its law");
            put(vec!["r".into(), "density".into(), "cdf".into()])?;
            sampled(law.inner, law.outer, &mut put)?;
        }
        _ => {
            let law = reference.interval_law().expect("interval reference carries its law");
            let (a, b) = law.support();
            put(vec!["x".into(), "density".into(), "cdf".into()])?;
            sampled(a, b, &mut put)?;
        }
    }
    drop(put);
    finish(path, w)
}
