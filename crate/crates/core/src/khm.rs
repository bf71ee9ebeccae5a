//! Two-point structure-function flux of variable-density flow:
//! `pi(l) = -1/4 div_l <(d(rho u) . du) du>` and the equivalent symmetric form
//! `-1/8 div_l <drho du ((u' + u) . du)> - 1/8 div_l <(rho' + rho) |du|^2 du>`,
//! with `<.>` the torus average and `du = u(r + l) - u(r)`.
//!
//! Lags are integer cell vectors; `div_l` is a centred difference with
//! spacing one cell.

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::SolutionState;
use crate::error::{Error, Result};
use crate::scalar::{fit_slope, order_free_sum, Scalar};
use crate::spectral::{correlation, Field, TorusGrid};

pub type Lag = [i64; 3];

/// Set of lag vectors whose axis neighbours `l +- e_i` stay inside the
/// half-period box `|l_i| + 1 <= N/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagGrid {
    grid: TorusGrid,
    lags: Vec<Lag>,
}

impl LagGrid {
    pub fn new(grid: TorusGrid, lags: Vec<Lag>) -> Result<Self> {
        let half = (grid.points_per_axis() / 2) as i64;
        for lag in &lags {
            let bad_axis = (0..3).any(|a| if a < grid.dim() { lag[a].abs() + 1 > half } else { lag[a] != 0 });
            if bad_axis {
                return Err(Error::LagGridBoundary(lag[..grid.dim()].to_vec()));
            }
        }
        Ok(Self { grid, lags })
    }

    /// All lags with `max_i |l_i| <= radius`.
    pub fn cube(grid: TorusGrid, radius: i64) -> Result<Self> {
        let r = |a: usize| if a < grid.dim() { -radius..=radius } else { 0..=0 };
        let mut lags = Vec::new();
        for l0 in r(0) {
            for l1 in r(1) {
                for l2 in r(2) {
                    lags.push([l0, l1, l2]);
                }
            }
        }
        Self::new(grid, lags)
    }

    /// `l = k e_axis` for `k = 0..=max`.
    pub fn axis(grid: TorusGrid, axis: usize, max: i64) -> Result<Self> {
        if axis >= grid.dim() {
            return Err(Error::Dimension(format!("axis {axis} on a {}-dimensional grid", grid.dim())));
        }
        let lags = (0..=max)
            .map(|k| {
                let mut l = [0; 3];
                l[axis] = k;
                l
            })
            .collect();
        Self::new(grid, lags)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn lags(&self) -> &[Lag] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// Physical length `|l| / N`.
    pub fn length(&self, lag: Lag) -> f64 {
        let n = self.grid.points_per_axis() as f64;
        (lag.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt() / n
    }

    /// The lags together with all their axis neighbours, sorted and deduplicated.
    pub fn stencil(&self) -> Vec<Lag> {
        let mut set = std::collections::BTreeSet::new();
        for &l in &self.lags {
            set.insert(l);
            for a in 0..self.grid.dim() {
                for s in [-1, 1] {
                    let mut m = l;
                    m[a] += s;
                    set.insert(m);
                }
            }
        }
        set.into_iter().collect()
    }
}

/// Torus averages of third-order increment products at one lag, each a
/// `d`-vector: `transfer = <(d(rho u) . du) du>`,
/// `density = <drho du ((u' + u) . du)>`, `inertial = <(rho' + rho) |du|^2 du>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementStats {
    pub lag: Lag,
    pub transfer: Vec<f64>,
    pub density: Vec<f64>,
    pub inertial: Vec<f64>,
}

pub fn increment_stats<T: Scalar>(state: &SolutionState<T>, lag: Lag) -> Result<IncrementStats> {
    let grid = *state.grid();
    let d = grid.dim();
    if (d..3).any(|a| lag[a] != 0) {
        return Err(Error::LagGridBoundary(lag.to_vec()));
    }
    let len = grid.len();
    let rho = state.rho().values();
    let u = state.u().values();
    let mut transfer = vec![vec![T::zero(); len]; d];
    let mut density = vec![vec![T::zero(); len]; d];
    let mut inertial = vec![vec![T::zero(); len]; d];
    let mut du = [T::zero(); 3];
    let mut su = [T::zero(); 3];
    for r in 0..len {
        let rl = grid.shifted_index(r, lag);
        let (rho0, rho1) = (rho[r], rho[rl]);
        let drho = rho1 - rho0;
        let mut dm_du = T::zero();
        let mut du2 = T::zero();
        let mut su_du = T::zero();
        for c in 0..d {
            let (a, b) = (u[c * len + r], u[c * len + rl]);
            du[c] = b - a;
            su[c] = b + a;
            dm_du = dm_du + (rho1 * b - rho0 * a) * du[c];
            du2 = du2 + du[c] * du[c];
            su_du = su_du + su[c] * du[c];
        }
        for j in 0..d {
            transfer[j][r] = dm_du * du[j];
            density[j][r] = drho * du[j] * su_du;
            inertial[j][r] = (rho1 + rho0) * du2 * du[j];
        }
    }
    let cv = T::lit(grid.cell_volume());
    let avg = |v: &mut Vec<Vec<T>>| v.iter_mut().map(|c| (cv * order_free_sum(c)).as_f64()).collect::<Vec<f64>>();
    Ok(IncrementStats {
        lag,
        transfer: avg(&mut transfer),
        density: avg(&mut density),
        inertial: avg(&mut inertial),
    })
}

/// One lag of the flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KhmRow {
    pub lag: Lag,
    pub length: f64,
    pub pi_div: f64,
    pub pi_sym: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFunctionFlux {
    pub dim: usize,
    pub rows: Vec<KhmRow>,
    /// Averaged vectors on the lag stencil.
    pub third_order: Vec<IncrementStats>,
}

impl StructureFunctionFlux {
    /// `max |pi_div - pi_sym| / max |pi_div|` (absolute gap when the flux vanishes).
    pub fn form_gap(&self) -> f64 {
        let gap = self.rows.iter().fold(0.0f64, |m, r| m.max((r.pi_div - r.pi_sym).abs()));
        let scale = self.rows.iter().fold(0.0f64, |m, r| m.max(r.pi_div.abs()));
        if scale > 0.0 {
            gap / scale
        } else {
            gap
        }
    }

    /// Slope of `log |pi_div|` against `log |l|` over the nonzero lags.
    pub fn small_lag_slope(&self) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter(|r| r.length > 0.0 && r.pi_div != 0.0)
            .map(|r| (r.length.ln(), r.pi_div.abs().ln()))
            .unzip();
        fit_slope(&xs, &ys)
    }
}

/// Centred-difference divergence in the lag variable of a vector sampled on the stencil.
fn lag_divergence(
    table: &BTreeMap<Lag, &IncrementStats>,
    lag: Lag,
    dim: usize,
    h: f64,
    pick: impl Fn(&IncrementStats, usize) -> f64,
) -> f64 {
    let mut div = 0.0;
    for j in 0..dim {
        let mut up = lag;
        let mut down = lag;
        up[j] += 1;
        down[j] -= 1;
        div += (pick(table[&up], j) - pick(table[&down], j)) / (2.0 * h);
    }
    div
}

pub fn khm_flux<T: Scalar>(state: &SolutionState<T>, lags: &LagGrid) -> Result<StructureFunctionFlux> {
    if lags.grid() != state.grid() {
        return Err(Error::GridMismatch);
    }
    let stencil = lags.stencil();
    let third_order: Vec<IncrementStats> =
        stencil.par_iter().map(|&l| increment_stats(state, l)).collect::<Result<Vec<_>>>()?;
    let table: BTreeMap<Lag, &IncrementStats> = third_order.iter().map(|s| (s.lag, s)).collect();
    let dim = state.grid().dim();
    let h = state.grid().spacing();
    let rows = lags
        .lags()
        .iter()
        .map(|&lag| {
            let pi_div = -0.25 * lag_divergence(&table, lag, dim, h, |s, j| s.transfer[j]);
            let pi_sym = -0.125 * lag_divergence(&table, lag, dim, h, |s, j| s.density[j])
                - 0.125 * lag_divergence(&table, lag, dim, h, |s, j| s.inertial[j]);
            KhmRow { lag, length: lags.length(lag), pi_div, pi_sym }
        })
        .collect();
    Ok(StructureFunctionFlux { dim, rows, third_order })
}

pub fn khm_flux_div<T: Scalar>(state: &SolutionState<T>, lags: &LagGrid) -> Result<Vec<f64>> {
    Ok(khm_flux(state, lags)?.rows.iter().map(|r| r.pi_div).collect())
}

pub fn khm_flux_sym<T: Scalar>(state: &SolutionState<T>, lags: &LagGrid) -> Result<Vec<f64>> {
    Ok(khm_flux(state, lags)?.rows.iter().map(|r| r.pi_sym).collect())
}

/// `sum_j d/dl_j c_j` for `(j, c_j)` pairs, by spectral differentiation.
fn spectral_lag_derivative<T: Scalar>(parts: &[(usize, &Field<T>)]) -> Field<T> {
    let grid = *parts[0].1.grid();
    let len = grid.len();
    let two_pi = T::lit(2.0 * std::f64::consts::PI);
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); len];
    for &(j, c) in parts {
        let spec = c.spectrum();
        for (i, out) in coeffs.iter_mut().enumerate() {
            let k = T::lit(grid.derivative_wavevector(i)[j] as f64) * two_pi;
            *out = *out + spec[i] * Complex::new(T::zero(), k);
        }
    }
    Field::from_spectrum(grid, 1, coeffs)
}

/// `<a(r) b(r + l)>` summed over a list of `(a, b)` pairs.
fn correlation_sum<T: Scalar>(pairs: &[(Field<T>, Field<T>)]) -> Result<Field<T>> {
    let mut acc = correlation(&pairs[0].0, &pairs[0].1)?;
    for (a, b) in &pairs[1..] {
        acc = acc.add(&correlation(a, b)?)?;
    }
    Ok(acc)
}

/// `pi_div` on every lattice lag at once: the transfer vector is assembled
/// from FFT correlations and differentiated spectrally in `l`. Indexed like a
/// field, with lag `l` stored at the point `l / N`.
pub fn khm_flux_spectral<T: Scalar>(state: &SolutionState<T>) -> Result<Field<T>> {
    let d = state.grid().dim();
    let u: Vec<Field<T>> = (0..d).map(|c| state.u().component_field(c)).collect();
    let m: Vec<Field<T>> = (0..d).map(|c| state.momentum().component_field(c)).collect();
    let rho_u2 = state.u().contract(state.u())?.mul_scalar_field(state.rho())?;
    let mut transfer = Vec::with_capacity(d);
    for j in 0..d {
        let uj = &u[j];
        // <(m' - m).(u' - u) (u'_j - u_j)> without the lag-independent terms.
        let mut plus = vec![(rho_u2.clone(), uj.clone())];
        let mut minus = vec![(uj.clone(), rho_u2.clone())];
        for i in 0..d {
            let uiuj = u[i].mul_scalar_field(uj)?;
            let miuj = m[i].mul_scalar_field(uj)?;
            plus.push((uiuj.clone(), m[i].clone()));
            plus.push((miuj, u[i].clone()));
            minus.push((u[i].clone(), m[i].mul_scalar_field(uj)?));
            minus.push((m[i].clone(), uiuj));
        }
        transfer.push(correlation_sum(&plus)?.sub(&correlation_sum(&minus)?)?);
    }
    let parts: Vec<(usize, &Field<T>)> = transfer.iter().enumerate().collect();
    Ok(spectral_lag_derivative(&parts).scale(T::lit(-0.25)))
}

/// Residual of `div_l <rho |u|^2 (r) u(r + l)> = 0`, relative to the largest
/// single-direction derivative.
pub fn divergence_free_check<T: Scalar>(state: &SolutionState<T>) -> Result<f64> {
    let d = state.grid().dim();
    let rho_u2 = state.u().contract(state.u())?.mul_scalar_field(state.rho())?;
    let parts: Vec<Field<T>> = (0..d)
        .map(|j| correlation(&rho_u2, &state.u().component_field(j)))
        .collect::<Result<_>>()?;
    let all: Vec<(usize, &Field<T>)> = parts.iter().enumerate().collect();
    let div = spectral_lag_derivative(&all).max_abs().as_f64();
    let scale = all
        .iter()
        .map(|&p| spectral_lag_derivative(&[p]).max_abs().as_f64())
        .fold(0.0f64, f64::max);
    Ok(if scale > 0.0 { div / scale } else { div })
}
