use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::factory::GeneratorSpec;
use crate::scalar::Scalar;
use crate::spectral::{dealias, Field, TorusGrid};

/// Largest admissible advective Courant number.
pub const MAX_CFL: f64 = 0.5;
/// Loosest admissible relative tolerance of the pressure solve.
pub const MAX_PRESSURE_TOL: f64 = 1e-10;

/// Band-limited body force, steady or oscillating as `cos(omega t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Forcing {
    #[default]
    None,
    Steady { field: GeneratorSpec },
    Periodic { field: GeneratorSpec, omega: f64 },
}

fn default_true() -> bool {
    true
}

fn default_pressure_tol() -> f64 {
    1e-12
}

fn default_max_iterations() -> usize {
    200
}

fn default_cfl() -> f64 {
    MAX_CFL
}

fn default_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: TorusGrid,
    #[serde(default)]
    pub mu: f64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_pressure_tol")]
    pub pressure_tol: f64,
    #[serde(default = "default_max_iterations")]
    pub max_pressure_iterations: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub forcing: Forcing,
    pub initial_density: GeneratorSpec,
    pub initial_velocity: GeneratorSpec,
    /// Store a snapshot every this many steps (the final state is always stored).
    #[serde(default = "default_every")]
    pub snapshot_every: usize,
}

impl SolverConfig {
    pub fn new(grid: TorusGrid, initial_density: GeneratorSpec, initial_velocity: GeneratorSpec) -> Self {
        Self {
            grid,
            mu: 0.0,
            t_end: 0.0,
            dt: 1e-3,
            dealias: true,
            pressure_tol: default_pressure_tol(),
            max_pressure_iterations: default_max_iterations(),
            cfl: MAX_CFL,
            forcing: Forcing::None,
            initial_density,
            initial_velocity,
            snapshot_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.dim() != 2 {
            return Err(Error::Dimension(format!("the solver is two-dimensional, grid has d = {}", self.grid.dim())));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("viscosity {}", self.mu)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("end time {}", self.t_end)));
        }
        if !(self.pressure_tol > 0.0 && self.pressure_tol <= MAX_PRESSURE_TOL) {
            return Err(Error::InvalidParameter(format!(
                "pressure_tol {} not in (0, {MAX_PRESSURE_TOL}]",
                self.pressure_tol
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return Err(Error::InvalidParameter(format!("cfl {} not in (0, {MAX_CFL}]", self.cfl)));
        }
        if self.snapshot_every == 0 || self.max_pressure_iterations == 0 {
            return Err(Error::InvalidParameter("snapshot_every and max_pressure_iterations must be positive".into()));
        }
        self.steps()?;
        Ok(())
    }

    /// Number of steps; `t_end` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::InvalidParameter(format!(
                "end time {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        content_hash(self)
    }
}

/// Hex SHA-256 of the JSON serialisation of `value`.
pub fn content_hash<S: Serialize>(value: &S) -> String {
    let text = serde_json::to_string(value).expect("value serialises to JSON");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Spatial profile and time modulation of the force.
#[derive(Debug, Clone)]
pub(crate) struct ForceField<T: Scalar> {
    profile: Option<Field<T>>,
    omega: Option<f64>,
}

impl<T: Scalar> ForceField<T> {
    pub(crate) fn build(forcing: &Forcing, grid: TorusGrid) -> Result<Self> {
        let (spec, omega) = match forcing {
            Forcing::None => return Ok(Self { profile: None, omega: None }),
            Forcing::Steady { field } => (field, None),
            Forcing::Periodic { field, omega } => (field, Some(*omega)),
        };
        let f: Field<T> = spec.generate(grid, grid.dim())?;
        let resolved = dealias(&f);
        let defect = f.sub(&resolved)?.max_abs().as_f64();
        if defect > 1e-12 * f.max_abs().as_f64().max(1.0) {
            return Err(Error::InvalidParameter("force is not band-limited to the dealiased range".into()));
        }
        Ok(Self { profile: Some(resolved), omega })
    }

    pub(crate) fn at(&self, t: f64) -> Option<Field<T>> {
        let f = self.profile.as_ref()?;
        Some(match self.omega {
            None => f.clone(),
            Some(w) => f.scale(T::lit((w * t).cos())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SolverConfig {
        let g = TorusGrid::new(2, 16).unwrap();
        let mut c = SolverConfig::new(
            g,
            GeneratorSpec::Constant { value: vec![1.0] },
            GeneratorSpec::TaylorGreen { mu: 0.0, t: 0.0, amplitude: 1.0 },
        );
        c.t_end = 0.1;
        c.dt = 0.01;
        c
    }

    #[test]
    fn validation() {
        let c = base();
        assert!(c.validate().is_ok());
        assert_eq!(c.steps().unwrap(), 10);
        assert!(SolverConfig { dt: 0.03, ..c.clone() }.validate().is_err());
        assert!(SolverConfig { cfl: 0.6, ..c.clone() }.validate().is_err());
        assert!(SolverConfig { pressure_tol: 1e-9, ..c.clone() }.validate().is_err());
        assert!(SolverConfig { grid: TorusGrid::new(3, 8).unwrap(), ..c }.validate().is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let c = base();
        assert_eq!(c.hash(), base().hash());
        assert_ne!(c.hash(), SolverConfig { mu: 0.1, ..base() }.hash());
        let text = serde_json::to_string(&c).unwrap();
        let back: SolverConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn force_must_be_resolved() {
        let g = TorusGrid::new(2, 16).unwrap();
        let ok = Forcing::Steady {
            field: GeneratorSpec::SingleMode { wavevector: vec![1, 0], amplitude: vec![0.0, 1.0], phase: 0.0 },
        };
        assert!(ForceField::<f64>::build(&ok, g).is_ok());
        let bad = Forcing::Steady {
            field: GeneratorSpec::SingleMode { wavevector: vec![7, 0], amplitude: vec![0.0, 1.0], phase: 0.0 },
        };
        assert!(ForceField::<f64>::build(&bad, g).is_err());
    }
}
