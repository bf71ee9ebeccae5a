use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{dealias, divergence, gradient, integral, inverse_laplacian, lp_norm, Field};

/// Iteration count, final relative residual and last residual ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureStats {
    pub iterations: usize,
    pub residual: f64,
    pub contraction: f64,
}

/// `div(grad(p) / rho)` with the products optionally truncated.
pub fn variable_laplacian<T: Scalar>(p: &Field<T>, inv_rho: &Field<T>, truncate: bool) -> Result<Field<T>> {
    let flux = gradient(p).mul_scalar_field(inv_rho)?;
    let flux = if truncate { dealias(&flux) } else { flux };
    divergence(&flux)
}

/// Solves `div(grad(p) / rho) = rhs` by Richardson iteration preconditioned
/// with `mean(1/rho) Lap`, starting from `guess`. The result has zero mean.
pub fn solve_pressure<T: Scalar>(
    rhs: &Field<T>,
    inv_rho: &Field<T>,
    guess: Option<&Field<T>>,
    tol: f64,
    max_iterations: usize,
    truncate: bool,
) -> Result<(Field<T>, PressureStats)> {
    let grid = *rhs.grid();
    let rhs_norm = lp_norm(rhs, 2.0)?.as_f64();
    let zero = Field::zeros(grid, 1);
    if rhs_norm == 0.0 {
        return Ok((zero, PressureStats { iterations: 0, residual: 0.0, contraction: 0.0 }));
    }
    let scale = T::one() / integral(inv_rho)[0];
    let mut p = guess.cloned().unwrap_or(zero);
    let mut last = f64::INFINITY;
    let mut contraction = 0.0;
    let mut growth = 0;
    for iteration in 0..=max_iterations {
        let residual = rhs.sub(&variable_laplacian(&p, inv_rho, truncate)?)?;
        let r = lp_norm(&residual, 2.0)?.as_f64() / rhs_norm;
        if !r.is_finite() {
            return Err(Error::NonFinite);
        }
        if iteration > 0 {
            contraction = r / last;
        }
        if r <= tol {
            return Ok((p, PressureStats { iterations: iteration, residual: r, contraction }));
        }
        growth = if r > last { growth + 1 } else { 0 };
        if growth >= 3 || iteration == max_iterations {
            return Err(Error::PressureDivergence { iterations: iteration, residual: r, contraction });
        }
        last = r;
        p = p.add(&inverse_laplacian(&residual).scale(scale))?;
    }
    unreachable!("loop returns on its last iteration")
}
