//! Two-dimensional pseudo-spectral solver for variable-density
//! incompressible flow, `rho_t + div(rho u) = 0`,
//! `u_t + (u.grad) u + grad(p) / rho = mu Lap(u) / rho + f`, `div u = 0`.

mod config;
mod integrate;
mod pressure;
mod weak;

pub use config::{content_hash, Forcing, SolverConfig, MAX_CFL, MAX_PRESSURE_TOL};
pub use integrate::{initial_fields, run, step, Integrator, RunOutput, RunRecord, SCHEME};
pub use pressure::{solve_pressure, variable_laplacian, PressureStats};
pub use weak::{test_function_bank, weak_residuals, TestFunction, WeakResidualReport};
