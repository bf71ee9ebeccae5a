use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{divergence_defect, Field, TorusGrid};

/// Relative divergence tolerance `max |k.u_k| <= tol * ||u_k||`.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

/// Snapshot `(rho, u, p, f)` at time `t`.
#[derive(Debug, Clone)]
pub struct SolutionState<T: Scalar> {
    rho: Field<T>,
    u: Field<T>,
    p: Option<Field<T>>,
    force: Option<Field<T>>,
    t: f64,
    mu: f64,
    rho_lo: f64,
    rho_hi: f64,
}

/// Plain metadata of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateInfo {
    pub grid: TorusGrid,
    pub t: f64,
    pub mu: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub has_pressure: bool,
    pub has_force: bool,
}

fn divergence_limit<T: Scalar>() -> f64 {
    T::tolerance(DIVERGENCE_TOLERANCE)
}

impl<T: Scalar> SolutionState<T> {
    /// Validates shapes, positivity of `rho` and incompressibility of `u`.
    pub fn new(rho: Field<T>, u: Field<T>, mu: f64, t: f64) -> Result<Self> {
        let grid = *rho.grid();
        if u.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        if rho.ncomp() != 1 {
            return Err(Error::ComponentMismatch(format!("density has {} components", rho.ncomp())));
        }
        if u.ncomp() != grid.dim() {
            return Err(Error::ComponentMismatch(format!(
                "velocity has {} components on a {}-dimensional grid",
                u.ncomp(),
                grid.dim()
            )));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("viscosity {mu}")));
        }
        if !t.is_finite() {
            return Err(Error::NonFinite);
        }
        let lo = rho.min_value().as_f64();
        let hi = rho.max_value().as_f64();
        if !(lo > 0.0) {
            return Err(Error::DensityBounds { min: lo, max: hi });
        }
        let ratio = divergence_defect(&u)?;
        if ratio > divergence_limit::<T>() {
            return Err(Error::NotDivergenceFree { ratio });
        }
        Ok(Self { rho, u, p: None, force: None, t, mu, rho_lo: lo, rho_hi: hi })
    }

    /// Replaces the measured density bounds by declared ones.
    pub fn with_bounds(mut self, rho_lo: f64, rho_hi: f64) -> Result<Self> {
        let lo = self.rho.min_value().as_f64();
        let hi = self.rho.max_value().as_f64();
        if !(rho_lo > 0.0) || rho_lo > lo || rho_hi < hi {
            return Err(Error::DensityBounds { min: lo, max: hi });
        }
        self.rho_lo = rho_lo;
        self.rho_hi = rho_hi;
        Ok(self)
    }

    pub fn with_pressure(mut self, p: Field<T>) -> Result<Self> {
        if p.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        if p.ncomp() != 1 {
            return Err(Error::ComponentMismatch("pressure must be scalar".into()));
        }
        self.p = Some(p);
        Ok(self)
    }

    pub fn with_force(mut self, f: Field<T>) -> Result<Self> {
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        if f.ncomp() != self.grid().dim() {
            return Err(Error::ComponentMismatch("force must match the velocity".into()));
        }
        self.force = Some(f);
        Ok(self)
    }

    pub fn grid(&self) -> &TorusGrid {
        self.rho.grid()
    }

    pub fn rho(&self) -> &Field<T> {
        &self.rho
    }

    pub fn u(&self) -> &Field<T> {
        &self.u
    }

    pub fn pressure(&self) -> Option<&Field<T>> {
        self.p.as_ref()
    }

    pub fn force(&self) -> Option<&Field<T>> {
        self.force.as_ref()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho_bounds(&self) -> (f64, f64) {
        (self.rho_lo, self.rho_hi)
    }

    pub fn info(&self) -> StateInfo {
        StateInfo {
            grid: *self.grid(),
            t: self.t,
            mu: self.mu,
            rho_lo: self.rho_lo,
            rho_hi: self.rho_hi,
            has_pressure: self.p.is_some(),
            has_force: self.force.is_some(),
        }
    }

    pub fn into_parts(self) -> (Field<T>, Field<T>, Option<Field<T>>, Option<Field<T>>) {
        (self.rho, self.u, self.p, self.force)
    }

    pub fn momentum(&self) -> Field<T> {
        self.u.mul_scalar_field(&self.rho).expect("validated shapes")
    }
}
