//! Run configuration: a TOML file plus `--section.key value` overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ddflux::budget::density_exponent;
use ddflux::factory::GeneratorSpec;
use ddflux::solver::{content_hash, Forcing, SolverConfig, MAX_CFL};
use ddflux::{CutoffKind, CutoffProfile, TorusGrid};

use crate::error::{CliError, CliResult};

/// Tolerance on `1/a + 3/b = 1` when the hypothesis regime is requested.
pub const EXPONENT_TOLERANCE: f64 = 1e-12;

fn default_dt() -> f64 {
    1e-3
}

fn default_true() -> bool {
    true
}

fn default_pressure_tol() -> f64 {
    1e-12
}

fn default_iterations() -> usize {
    200
}

fn default_cfl() -> f64 {
    MAX_CFL
}

fn default_one() -> usize {
    1
}

/// Time-stepping keys; grid and initial data live in their own sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_pressure_tol")]
    pub pressure_tol: f64,
    #[serde(default = "default_iterations")]
    pub max_pressure_iterations: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub forcing: Forcing,
    #[serde(default = "default_one")]
    pub snapshot_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            mu: 0.0,
            t_end: 0.0,
            dt: default_dt(),
            dealias: true,
            pressure_tol: default_pressure_tol(),
            max_pressure_iterations: default_iterations(),
            cfl: MAX_CFL,
            forcing: Forcing::None,
            snapshot_every: 1,
        }
    }
}

fn default_cutoff() -> CutoffKind {
    CutoffKind::Smooth
}

fn default_s() -> f64 {
    1.0 / 3.0
}

fn default_b() -> f64 {
    3.0
}

/// Which array of a snapshot `project` and `besov` analyse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    Rho,
    #[default]
    U,
    P,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_cutoff")]
    pub cutoff: CutoffKind,
    /// `[inner, outer]` radii of the smooth transition band.
    #[serde(default)]
    pub transition: Option<[f64; 2]>,
    #[serde(default)]
    pub field: FieldChoice,
    #[serde(default = "default_s")]
    pub s: f64,
    /// Density integrability; defaults to `b / (b - 3)`.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default)]
    pub q_min: i32,
    /// Defaults to the top shell of the grid.
    #[serde(default)]
    pub q_max: Option<i32>,
    /// Half-width of the cubic lag grid; defaults to `N/4`.
    #[serde(default)]
    pub lag_radius: Option<i64>,
    /// First shell of the Besov tail diagnostic; defaults to `q_max - 4`.
    #[serde(default)]
    pub tail_start: Option<i32>,
    /// Require `1/a + 3/b = 1` with `b >= 3`.
    #[serde(default)]
    pub hypothesis: bool,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            cutoff: default_cutoff(),
            transition: None,
            field: FieldChoice::U,
            s: default_s(),
            a: None,
            b: default_b(),
            q_min: 0,
            q_max: None,
            lag_radius: None,
            tail_start: None,
            hypothesis: false,
        }
    }
}

impl AnalysisSection {
    pub fn cutoff_profile(&self) -> CliResult<CutoffProfile> {
        Ok(CutoffProfile::new(self.cutoff, self.transition.map(|[i, o]| (i, o)))?)
    }

    pub fn a(&self) -> CliResult<f64> {
        match self.a {
            Some(a) => Ok(a),
            None => Ok(density_exponent(self.b)?),
        }
    }

    pub fn q_range(&self, grid: &TorusGrid) -> CliResult<(i32, i32)> {
        let hi = self.q_max.unwrap_or(grid.q_max());
        if self.q_min < -1 || hi > grid.q_max() || self.q_min > hi {
            return Err(CliError::Validation(format!(
                "shell range [{}, {hi}] outside [-1, {}]",
                self.q_min,
                grid.q_max()
            )));
        }
        Ok((self.q_min, hi))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.cutoff_profile()?;
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(CliError::Validation(format!("s = {} not in (0, 1]", self.s)));
        }
        let a = self.a()?;
        if !(a >= 1.0) || !(self.b >= 1.0) {
            return Err(CliError::Validation(format!("integrability exponents a = {a}, b = {} must be >= 1", self.b)));
        }
        if self.hypothesis {
            if self.b < 3.0 {
                return Err(CliError::Validation(format!("hypothesis regime needs b >= 3, got {}", self.b)));
            }
            let gap = (1.0 / a + 3.0 / self.b - 1.0).abs();
            if gap > EXPONENT_TOLERANCE {
                return Err(CliError::Validation(format!(
                    "hypothesis regime needs 1/a + 3/b = 1; a = {a}, b = {} misses by {gap:e}",
                    self.b
                )));
            }
        }
        Ok(())
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: Option<TorusGrid>,
    #[serde(default)]
    pub density: Option<GeneratorSpec>,
    #[serde(default)]
    pub velocity: Option<GeneratorSpec>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Parses a command-line value as a TOML value, falling back to a string.
fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `--a.b.c value` pairs to `table`.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> CliResult<()> {
    let mut it = overrides.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .filter(|k| !k.is_empty())
            .ok_or_else(|| CliError::Validation(format!("expected --key, found `{flag}`")))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k, v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| CliError::Validation(format!("--{key} needs a value")))?;
                (key, v.clone())
            }
        };
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts.pop().expect("split yields one part");
        let mut node = &mut *table;
        for p in parts {
            let entry = node.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            node = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Validation(format!("--{key}: `{p}` is not a section")))?;
        }
        node.insert(last.to_string(), parse_value(&value));
    }
    Ok(())
}

impl RunConfig {
    /// Reads `path` (if any), applies the overrides and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(CliError::io(p))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        apply_overrides(&mut table, overrides)?;
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("config: {}", e.message())))?;
        config.analysis.validate()?;
        Ok(config)
    }

    pub fn hash(&self) -> String {
        content_hash(self)
    }

    pub fn grid(&self) -> CliResult<TorusGrid> {
        self.grid.ok_or_else(|| CliError::Validation("config needs a [grid] section".into()))
    }

    fn spec(&self, which: &str) -> CliResult<GeneratorSpec> {
        let spec = if which == "density" { &self.density } else { &self.velocity };
        spec.clone().ok_or_else(|| CliError::Validation(format!("config needs a [{which}] section")))
    }

    pub fn density_spec(&self) -> CliResult<GeneratorSpec> {
        self.spec("density")
    }

    pub fn velocity_spec(&self) -> CliResult<GeneratorSpec> {
        self.spec("velocity")
    }

    pub fn solver_config(&self) -> CliResult<SolverConfig> {
        let s = &self.solver;
        let config = SolverConfig {
            grid: self.grid()?,
            mu: s.mu,
            t_end: s.t_end,
            dt: s.dt,
            dealias: s.dealias,
            pressure_tol: s.pressure_tol,
            max_pressure_iterations: s.max_pressure_iterations,
            cfl: s.cfl,
            forcing: s.forcing.clone(),
            initial_density: self.density_spec()?,
            initial_velocity: self.velocity_spec()?,
            snapshot_every: s.snapshot_every,
        };
        config.validate()?;
        Ok(config)
    }
}
