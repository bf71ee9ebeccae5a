use serde::{Deserialize, Serialize};

use super::config::{ForceField, SolverConfig};
use super::pressure::{solve_pressure, PressureStats};
use crate::budget::SolutionState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{
    dealias, divergence, divergence_defect, extrema, gradient, integral, laplacian, leray_project, Field,
};

/// Scheme tag written to run records.
pub const SCHEME: &str = "rk4-pseudospectral-u-form";

/// Provenance and health figures of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub scheme: String,
    pub version: String,
    pub steps: usize,
    pub snapshots: usize,
    pub initial_mass: f64,
    /// `max_n |int rho(t_n) - int rho(0)|`.
    pub mass_drift: f64,
    pub max_divergence_defect: f64,
    /// Largest excursion of `rho` outside its initial range, both taken
    /// from the trigonometric interpolant.
    pub density_overshoot: f64,
    pub max_pressure_iterations: usize,
    pub last_contraction: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput<T: Scalar> {
    pub snapshots: Vec<SolutionState<T>>,
    pub record: RunRecord,
}

/// Above this the density excursion is reported as a Gibbs warning.
const OVERSHOOT_WARNING: f64 = 1e-8;

/// Time stepper holding the configuration, the force and the warm-start pressure.
#[derive(Debug)]
pub struct Integrator<T: Scalar> {
    config: SolverConfig,
    force: ForceField<T>,
    pressure: Option<Field<T>>,
    max_iterations_seen: usize,
    last_contraction: f64,
}

struct Tendency<T: Scalar> {
    drho: Field<T>,
    du: Field<T>,
}

impl<T: Scalar> Integrator<T> {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let force = ForceField::build(&config.forcing, config.grid)?;
        Ok(Self { config, force, pressure: None, max_iterations_seen: 0, last_contraction: 0.0 })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn truncate(&self, f: Field<T>) -> Field<T> {
        if self.config.dealias {
            dealias(&f)
        } else {
            f
        }
    }

    fn note(&mut self, stats: PressureStats) {
        self.max_iterations_seen = self.max_iterations_seen.max(stats.iterations);
        if stats.iterations > 0 {
            self.last_contraction = stats.contraction;
        }
    }

    /// Velocity tendency before the pressure gradient, and `1/rho`.
    fn momentum_tendency(&self, rho: &Field<T>, u: &Field<T>, t: f64) -> Result<(Field<T>, Field<T>)> {
        let d = u.ncomp();
        let len = u.grid().len();
        let grad = gradient(u);
        let mut adv = vec![T::zero(); d * len];
        for i in 0..d {
            for j in 0..d {
                let uj = u.component(j);
                let dj = grad.component(i * d + j);
                for x in 0..len {
                    adv[i * len + x] = adv[i * len + x] - uj[x] * dj[x];
                }
            }
        }
        let mut g = Field::new(*u.grid(), d, adv)?;
        let inv_rho = rho.map(|v| v.recip());
        if self.config.mu > 0.0 {
            g = g.add(&laplacian(u).mul_scalar_field(&inv_rho)?.scale(T::lit(self.config.mu)))?;
        }
        if let Some(f) = self.force.at(t) {
            g = g.add(&f)?;
        }
        Ok((self.truncate(g), inv_rho))
    }

    fn pressure_for(&mut self, g: &Field<T>, inv_rho: &Field<T>) -> Result<Field<T>> {
        let rhs = divergence(g)?;
        let (p, stats) = solve_pressure(
            &rhs,
            inv_rho,
            self.pressure.as_ref(),
            self.config.pressure_tol,
            self.config.max_pressure_iterations,
            self.config.dealias,
        )?;
        self.note(stats);
        self.pressure = Some(p.clone());
        Ok(p)
    }

    fn tendency(&mut self, rho: &Field<T>, u: &Field<T>, t: f64) -> Result<Tendency<T>> {
        let drho = self.truncate(divergence(&u.mul_scalar_field(rho)?)?.scale(-T::one()));
        let (g, inv_rho) = self.momentum_tendency(rho, u, t)?;
        let p = self.pressure_for(&g, &inv_rho)?;
        let du = self.truncate(g.sub(&gradient(&p).mul_scalar_field(&inv_rho)?)?);
        Ok(Tendency { drho, du })
    }

    /// Pressure and force of a state at time `t`, attached as a snapshot.
    pub fn snapshot(&mut self, rho: &Field<T>, u: &Field<T>, t: f64) -> Result<SolutionState<T>> {
        let (g, inv_rho) = self.momentum_tendency(rho, u, t)?;
        let p = self.pressure_for(&g, &inv_rho)?;
        let mut s = SolutionState::new(rho.clone(), u.clone(), self.config.mu, t)?.with_pressure(p)?;
        if let Some(f) = self.force.at(t) {
            s = s.with_force(f)?;
        }
        Ok(s)
    }

    fn check_cfl(&self, u: &Field<T>) -> Result<()> {
        let umax = u.magnitude().max_abs().as_f64();
        if umax > 0.0 {
            let limit = self.config.cfl * self.config.grid.spacing() / umax;
            if self.config.dt > limit {
                return Err(Error::CflViolation { dt: self.config.dt, limit });
            }
        }
        Ok(())
    }

    /// One classical RK4 step from `t` followed by a Leray projection.
    pub fn advance(&mut self, rho: &Field<T>, u: &Field<T>, t: f64) -> Result<(Field<T>, Field<T>)> {
        self.check_cfl(u)?;
        let dt = self.config.dt;
        let h = T::lit(dt);
        let half = T::lit(0.5 * dt);
        let k1 = self.tendency(rho, u, t)?;
        let k2 = self.tendency(&rho.add(&k1.drho.scale(half))?, &u.add(&k1.du.scale(half))?, t + 0.5 * dt)?;
        let k3 = self.tendency(&rho.add(&k2.drho.scale(half))?, &u.add(&k2.du.scale(half))?, t + 0.5 * dt)?;
        let k4 = self.tendency(&rho.add(&k3.drho.scale(h))?, &u.add(&k3.du.scale(h))?, t + dt)?;
        let w = |a: &Field<T>, b: &Field<T>, c: &Field<T>, d: &Field<T>| -> Result<Field<T>> {
            a.add(&b.scale(T::lit(2.0)))?.add(&c.scale(T::lit(2.0)))?.add(d).map(|s| s.scale(T::lit(dt / 6.0)))
        };
        let rho_next = rho.add(&w(&k1.drho, &k2.drho, &k3.drho, &k4.drho)?)?;
        let u_next = leray_project(&u.add(&w(&k1.du, &k2.du, &k3.du, &k4.du)?)?)?;
        if rho_next.values().iter().chain(u_next.values()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok((rho_next, u_next))
    }
}

/// Initial `(rho, u)`: generated, truncated when dealiasing, velocity projected.
pub fn initial_fields<T: Scalar>(config: &SolverConfig) -> Result<(Field<T>, Field<T>)> {
    let grid = config.grid;
    let mut rho: Field<T> = config.initial_density.generate(grid, 1)?;
    let mut u: Field<T> = config.initial_velocity.generate(grid, grid.dim())?;
    if config.dealias {
        rho = dealias(&rho);
        u = dealias(&u);
    }
    Ok((rho, leray_project(&u)?))
}

/// One step of the scheme from `state` (cold-started pressure).
pub fn step<T: Scalar>(state: &SolutionState<T>, config: &SolverConfig) -> Result<SolutionState<T>> {
    if state.grid() != &config.grid {
        return Err(Error::GridMismatch);
    }
    let mut integ = Integrator::new(config.clone())?;
    let (rho, u) = integ.advance(state.rho(), state.u(), state.t())?;
    integ.snapshot(&rho, &u, state.t() + config.dt)
}

pub fn run<T: Scalar>(config: &SolverConfig) -> Result<RunOutput<T>> {
    let mut integ = Integrator::<T>::new(config.clone())?;
    let steps = config.steps()?;
    let (mut rho, mut u) = initial_fields::<T>(config)?;
    let (lo, hi) = extrema(&rho)?;
    let mass0 = integral(&rho)[0].as_f64();
    let mut mass_drift = 0.0f64;
    let mut max_div = divergence_defect(&u)?;
    let mut overshoot = 0.0f64;
    let mut snapshots = vec![integ.snapshot(&rho, &u, 0.0)?];
    for n in 1..=steps {
        let t = (n - 1) as f64 * config.dt;
        let (r, v) = integ.advance(&rho, &u, t)?;
        rho = r;
        u = v;
        mass_drift = mass_drift.max((integral(&rho)[0].as_f64() - mass0).abs());
        max_div = max_div.max(divergence_defect(&u)?);
        let (now_lo, now_hi) = extrema(&rho)?;
        let ex = (lo - now_lo).max(now_hi - hi).max(0.0);
        if ex > OVERSHOOT_WARNING && overshoot <= OVERSHOOT_WARNING {
            log::warn!("density leaves its initial range [{lo}, {hi}] by {ex:e} at step {n}");
        }
        overshoot = overshoot.max(ex);
        if n % config.snapshot_every == 0 || n == steps {
            snapshots.push(integ.snapshot(&rho, &u, n as f64 * config.dt)?);
        }
    }
    if overshoot > OVERSHOOT_WARNING {
        log::warn!("largest density excursion over the run: {overshoot:e}");
    }
    let record = RunRecord {
        config_hash: config.hash(),
        scheme: SCHEME.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        steps,
        snapshots: snapshots.len(),
        initial_mass: mass0,
        mass_drift,
        max_divergence_defect: max_div,
        density_overshoot: overshoot,
        max_pressure_iterations: integ.max_iterations_seen,
        last_contraction: integ.last_contraction,
    };
    Ok(RunOutput { snapshots, record })
}
