//! Experiment configuration and the input formats shared by all subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use visilat::counting::{Caps, Region, Shape};
use visilat::ideals::{dedup_points, PointTuple};
use visilat::numfield::{make_field, FieldKind, FieldSpec};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Predict,
    Direct,
    Sieve,
    Mc,
    Oracle,
    LemmaCheck,
}

/// Pass/fail thresholds, checked on the last region of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest distance from a count density to the predicted interval.
    pub density: f64,
    /// Multiple of the standard error added to `density` for Monte Carlo.
    pub mc_sigmas: f64,
    /// Largest log-log growth rate of the lemma check's normalized error.
    pub lemma_growth: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { density: 0.015, mc_sigmas: 5.0, lemma_growth: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapsConfig {
    pub region: u64,
    pub tuples: u64,
    pub crt: u64,
}

impl Default for CapsConfig {
    fn default() -> Self {
        let caps = Caps::default();
        CapsConfig { region: caps.region, tuples: caps.tuples, crt: visilat::density::DEFAULT_CRT_CAP }
    }
}

impl CapsConfig {
    pub fn counting(&self) -> Caps {
        Caps { region: self.region, tuples: self.tuples }
    }
}

fn default_cutoff() -> u64 {
    10_000
}

fn default_samples() -> u64 {
    100_000
}

fn default_window() -> usize {
    2
}

fn default_lemma_norm() -> u64 {
    100
}

/// A full experiment, as read from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldKind,
    pub m: usize,
    /// Inline `S`: a list of `m`-tuples of coordinate vectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<Vec<i64>>>>,
    /// Path of a JSON file holding `S`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_file: Option<PathBuf>,
    /// Regions such as `cube:L=60` or `ball:R=30`, in schedule order.
    pub regions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_transform: Option<Vec<Vec<i64>>>,
    #[serde(default = "default_cutoff")]
    pub cutoff_x: u64,
    pub modes: Vec<Mode>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Number of rational primes in the exact oracle's window.
    #[serde(default = "default_window")]
    pub oracle_window: usize,
    /// Prime norm bound for the lemma check.
    #[serde(default = "default_lemma_norm")]
    pub lemma_max_norm: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub caps: CapsConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A configuration that passed validation, with its inputs resolved.
#[derive(Clone, Debug)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub field: FieldSpec,
    pub set: Vec<PointTuple>,
    pub regions: Vec<Region>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::InvalidConfig(format!("{}: {e}", path.display())))?;
        if let (Some(file), Some(dir)) = (&config.s_file, path.parent()) {
            if file.is_relative() {
                config.s_file = Some(dir.join(file));
            }
        }
        Ok(config)
    }

    /// Checks every parameter and resolves the field, `S` and the regions
    /// before any computation.
    pub fn validate(&self) -> Result<Validated, CliError> {
        if self.m < 2 {
            return Err(CliError::InvalidConfig(format!("m must be at least 2, got {}", self.m)));
        }
        if self.regions.is_empty() && self.modes.iter().any(|m| matches!(m, Mode::Direct | Mode::Sieve | Mode::Mc | Mode::LemmaCheck)) {
            return Err(CliError::InvalidConfig("region schedule is empty".into()));
        }
        if self.modes.is_empty() {
            return Err(CliError::InvalidConfig("no modes selected".into()));
        }
        if self.modes.contains(&Mode::Mc) && self.samples < 100 {
            return Err(CliError::InvalidConfig(format!("at least 100 samples are required, got {}", self.samples)));
        }
        if self.cutoff_x < 2 {
            return Err(CliError::InvalidConfig("cutoff_x must be at least 2".into()));
        }
        if self.modes.contains(&Mode::Oracle) && self.oracle_window == 0 {
            return Err(CliError::InvalidConfig("oracle_window must be positive".into()));
        }
        let field = build_field(&self.field)?;
        let raw = match (&self.s, &self.s_file) {
            (Some(_), Some(_)) => return Err(CliError::InvalidConfig("give either s or s_file, not both".into())),
            (Some(s), None) => s.clone(),
            (None, Some(path)) => read_set_file(path)?,
            (None, None) => return Err(CliError::InvalidConfig("S is missing (set s or s_file)".into())),
        };
        let set = parse_set(&raw, self.m, field.degree())?;
        let regions = self
            .regions
            .iter()
            .map(|r| parse_region(r, field.degree(), self.basis_transform.clone()))
            .collect::<Result<_, _>>()?;
        Ok(Validated { config: self.clone(), field, set, regions })
    }
}

/// Builds a field, mapping rejected descriptors to the unsupported-field error.
pub fn build_field(kind: &FieldKind) -> Result<FieldSpec, CliError> {
    make_field(kind.clone()).map_err(|e| CliError::UnsupportedField(format!("{kind}: {e}")))
}

/// Parses a field descriptor: JSON such as `{"kind":"quadratic","d":-1}`, or
/// the shorthands `rational`, `quadratic:D` and `monogenic:c0,c1,...`.
pub fn parse_field(text: &str) -> Result<FieldKind, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| CliError::InvalidConfig(format!("field descriptor: {e}")));
    }
    let bad = || CliError::InvalidConfig(format!("unrecognized field descriptor {text:?}"));
    match text.split_once(':') {
        None if text == "rational" || text == "Q" => Ok(FieldKind::Rational),
        Some(("quadratic", d)) => Ok(FieldKind::Quadratic { d: d.trim().parse().map_err(|_| bad())? }),
        Some(("monogenic", coeffs)) => Ok(FieldKind::Monogenic {
            minpoly: coeffs.split(',').map(|c| c.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

pub fn read_set_file(path: &Path) -> Result<Vec<Vec<Vec<i64>>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    parse_set_json(&text)
}

pub fn parse_set_json(text: &str) -> Result<Vec<Vec<Vec<i64>>>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::InvalidConfig(format!("S: {e}")))
}

/// Checks the shape of `S` and removes duplicates with a warning.
pub fn parse_set(raw: &[Vec<Vec<i64>>], m: usize, n: usize) -> Result<Vec<PointTuple>, CliError> {
    if raw.is_empty() {
        return Err(CliError::InvalidConfig("S is empty".into()));
    }
    for (i, t) in raw.iter().enumerate() {
        if t.len() != m || t.iter().any(|c| c.len() != n) {
            return Err(CliError::InvalidConfig(format!(
                "S entry {i} is not an {m}-tuple of length-{n} coordinate vectors"
            )));
        }
    }
    let mut set: Vec<PointTuple> = raw.iter().map(|t| PointTuple::from_i64s(t)).collect();
    let dropped = dedup_points(&mut set);
    if dropped > 0 {
        log::warn!("dropped {dropped} duplicate entries of S");
    }
    Ok(set)
}

/// Parses `cube:L=20` or `ball:R=30`.
pub fn parse_shape(text: &str) -> Result<Shape, CliError> {
    let bad = || CliError::InvalidConfig(format!("region {text:?} is not cube:L=<int> or ball:R=<real>"));
    let (kind, param) = text.trim().split_once(':').ok_or_else(bad)?;
    let (key, value) = param.split_once('=').ok_or_else(bad)?;
    match (kind, key) {
        ("cube", "L") => Ok(Shape::Cube { l: value.parse().map_err(|_| bad())? }),
        ("ball", "R") => {
            let r: f64 = value.parse().map_err(|_| bad())?;
            if !(r.is_finite() && r > 0.0) {
                return Err(bad());
            }
            Ok(Shape::Ball { r })
        }
        _ => Err(bad()),
    }
}

pub fn parse_region(text: &str, degree: usize, transform: Option<Vec<Vec<i64>>>) -> Result<Region, CliError> {
    let region = Region::new(degree, parse_shape(text)?).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    match transform {
        None => Ok(region),
        Some(t) => region
            .with_transform(t)
            .map_err(|e| CliError::InvalidConfig(format!("basis transform: {e}"))),
    }
}
