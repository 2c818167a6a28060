//! Run configuration: a TOML file with the sections `kernel`, `field`,
//! `conductor`, `run`, `analysis`, `output` and a top-level `seed`.
//!
//! Dotted keys (`kernel.s = 0.5`) and table headers (`[kernel]`) are
//! interchangeable, as TOML defines them.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub kernel: KernelSection,
    #[serde(default)]
    pub field: FieldSection,
    pub conductor: ConductorSection,
    pub run: RunSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub s: f64,
}

/// `kind` is one of `zero`, `abs`, `quadratic`, `jacobi`, `radial-power`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(default = "default_field_kind")]
    pub kind: String,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub exponent: Option<f64>,
    pub coefficient: Option<f64>,
}

fn default_field_kind() -> String {
    "zero".into()
}

impl Default for FieldSection {
    fn default() -> Self {
        Self {
            kind: default_field_kind(),
            lambda1: None,
            lambda2: None,
            exponent: None,
            coefficient: None,
        }
    }
}

/// `kind` is one of `interval` (`a`, `b`, `m`), `box` (`lower`, `upper`, `m`),
/// `ball` (`radius`, `dim`, `m`), `sphere` (`m`), `file` (`path`) or
/// `space` (`dim`, `m`, `truncation`): all of `R^p`, cut to the ball of
/// radius `truncation * R_0` (default 1.5) around the Newtonian support.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConductorSection {
    pub kind: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub m: Option<usize>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub dim: Option<usize>,
    pub path: Option<PathBuf>,
    pub truncation: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum StartSetting {
    Index(usize),
    Word(String),
}

impl Default for StartSetting {
    fn default() -> Self {
        StartSetting::Word("auto".into())
    }
}

/// `strategy` is `greedy` or `optimal` for `m = 1`, and `exhaustive` or
/// `alternating` for blocks.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default)]
    pub start: StartSetting,
    pub strategy: Option<String>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn one() -> usize {
    1
}

fn default_restarts() -> usize {
    8
}

/// `reference` is `auto`, `riesz-interval`, `jacobi`, `radial`, `discrete`
/// or `none`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_reference")]
    pub reference: String,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Nodes per axis when the discrete reference is solved on a rebuilt grid.
    pub grid: Option<usize>,
}

fn default_reference() -> String {
    "auto".into()
}

fn default_ladder() -> Vec<usize> {
    vec![101, 201, 401]
}

fn default_tol() -> f64 {
    1e-7
}

fn default_max_iters() -> usize {
    200_000
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            reference: default_reference(),
            ladder: default_ladder(),
            tol: default_tol(),
            max_iters: default_max_iters(),
            grid: None,
        }
    }
}

pub const FORMATS: [&str; 3] = ["points-csv", "trajectory-csv", "report-json"];

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<String> {
    FORMATS.iter().map(|s| s.to_string()).collect()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

/// Parsed configuration plus its source text, kept for error positions.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: String,
    pub origin: String,
}

impl LoadedConfig {
    /// Invalid-config error pointing at `section.key` when it can be found.
    pub fn invalid(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
        match key_line(&self.source, section, key) {
            Some(line) => CliError::Config(format!("{}:{line}: {section}.{key}: {msg}", self.origin)),
            None => CliError::Config(format!("{}: {section}.{key}: {msg}", self.origin)),
        }
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse(&source, &path.display().to_string())
}

pub fn parse(source: &str, origin: &str) -> Result<LoadedConfig, CliError> {
    let de = toml::Deserializer::parse(source).map_err(|e| located(source, origin, None, &e))?;
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        located(source, origin, Some(path), e.inner())
    })?;
    Ok(LoadedConfig {
        config,
        source: source.to_string(),
        origin: origin.to_string(),
    })
}

fn located(source: &str, origin: &str, path: Option<String>, err: &toml::de::Error) -> CliError {
    let mut msg = err.message().trim().to_string();
    let mut key = path.filter(|p| p != ".");
    // name the missing key itself rather than its table
    if let Some(rest) = msg.strip_prefix("missing field `") {
        if let Some(field) = rest.split('`').next() {
            key = Some(match key {
                Some(k) => format!("{k}.{field}"),
                None => field.to_string(),
            });
            msg = "missing required key".into();
        }
    }
    let line = err.span().map(|s| line_of_offset(source, s.start));
    let mut out = origin.to_string();
    if let Some(line) = line {
        out.push_str(&format!(":{line}"));
    }
    out.push_str(": ");
    if let Some(k) = key {
        out.push_str(&format!("{k}: "));
    }
    out.push_str(&msg);
    CliError::Config(out)
}

fn line_of_offset(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// 1-based line of `key` inside `[section]`, or of `section.key` at the root.
pub fn key_line(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let dotted = format!("{section}.{key}");
    for (i, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = header.trim().to_string();
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else {
            continue;
        };
        let lhs: String = lhs.split('.').map(str::trim).collect::<Vec<_>>().join(".");
        let full = if current.is_empty() {
            lhs
        } else {
            format!("{current}.{lhs}")
        };
        if full == dotted {
            return Some(i + 1);
        }
    }
    None
}
