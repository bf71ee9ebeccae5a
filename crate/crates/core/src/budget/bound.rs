use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::flux::CoarseScale;
use super::state::SolutionState;
use crate::besov::{localized_sum, shell_coefficients, BesovParams, Summation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{lp_norm, CutoffProfile, Field};

const ONSAGER: f64 = 1.0 / 3.0;

/// Density integrability `a` paired with velocity integrability `b` by
/// `1/a + 3/b = 1`; infinite for `b = 3`.
pub fn density_exponent(b: f64) -> Result<f64> {
    if !(b >= 3.0) {
        return Err(Error::InvalidExponent(format!("velocity integrability {b} < 3")));
    }
    if b == 3.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(b / (b - 3.0))
    }
}

/// `|Pi_Q|` against `D_u [D_rho ||u||_b + D_u] + D_rho D_p`, all `D` at
/// smoothness 1/3 (`b`, `a`, `b/2` integrability for `u`, `rho`, `p`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxBoundRow {
    pub q: i32,
    pub flux: f64,
    pub d_u: f64,
    pub d_rho: f64,
    pub d_p: Option<f64>,
    pub u_norm: f64,
    pub bracket: f64,
    /// `|Pi_Q| / (D_u * bracket)`.
    pub ratio: f64,
}

fn localized<T: Scalar>(f: &Field<T>, p: f64, cutoff: &CutoffProfile) -> Result<Vec<f64>> {
    let params = BesovParams::new(ONSAGER, p, Summation::Infinity)?;
    let c = shell_coefficients(f, params, cutoff)?;
    Ok(localized_sum(&c).as_slice().iter().map(|v| v.as_f64()).collect())
}

pub fn flux_bound_sweep<T: Scalar>(
    state: &SolutionState<T>,
    b: f64,
    q_range: RangeInclusive<i32>,
    cutoff: &CutoffProfile,
) -> Result<Vec<FluxBoundRow>> {
    let a = density_exponent(b)?;
    let d_u = localized(state.u(), b, cutoff)?;
    let d_rho = localized(state.rho(), a, cutoff)?;
    let d_p = match state.pressure() {
        Some(p) => Some(localized(p, b / 2.0, cutoff)?),
        None => None,
    };
    let u_norm = lp_norm(state.u(), b)?.as_f64();
    q_range
        .map(|q| {
            let i = (q + 1) as usize;
            let flux = CoarseScale::new(state, q, cutoff)?.flux()?.total().as_f64();
            let du = d_u[i];
            let dr = d_rho[i];
            let dp = d_p.as_ref().map(|v| v[i]);
            let bracket = du * (dr * u_norm + du) + dr * dp.unwrap_or(0.0);
            let denom = du * bracket;
            Ok(FluxBoundRow {
                q,
                flux,
                d_u: du,
                d_rho: dr,
                d_p: dp,
                u_norm,
                bracket,
                ratio: if denom > 0.0 { flux.abs() / denom } else { f64::NAN },
            })
        })
        .collect()
}
