//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use ddflux::factory::{density_profile, random_besov, DensitySmoothness, RandomBesovSpec};
use ddflux::khm::Lag;
use ddflux::spectral::correlation;
use ddflux::{CutoffProfile, Field, SolutionState, TorusGrid};

/// Seeded variable-density state with a divergence-free random velocity.
pub fn random_state(n: usize, seed: u64, contrast: f64, sigma: f64) -> SolutionState<f64> {
    let g = TorusGrid::new(2, n).unwrap();
    let rho = density_profile(g, contrast, DensitySmoothness::Smooth { kmax: 4 }, seed).unwrap();
    let spec = RandomBesovSpec::new(1.0 / 3.0, 3.0, sigma, seed.wrapping_add(1000)).divergence_free(true);
    let u = random_besov(g, &spec, 2).unwrap();
    SolutionState::new(rho, u, 0.0, 0.0).unwrap()
}

fn coords(grid: &TorusGrid, idx: usize) -> Vec<i64> {
    let n = grid.points_per_axis();
    let mut out = vec![0; grid.dim()];
    let mut rest = idx;
    for a in (0..grid.dim()).rev() {
        out[a] = (rest % n) as i64;
        rest /= n;
    }
    out
}

fn index_of(grid: &TorusGrid, c: &[i64]) -> usize {
    let n = grid.points_per_axis() as i64;
    c.iter().fold(0usize, |acc, &v| acc * n as usize + v.rem_euclid(n) as usize)
}

fn wavenumber(grid: &TorusGrid, j: i64) -> i64 {
    let n = grid.points_per_axis() as i64;
    if j <= n / 2 {
        j
    } else {
        j - n
    }
}

/// Low-pass kernel `h~_Q(y) = sum_k chi_Q(k) e^{2 pi i k.y}` by a direct sum
/// over the lattice, sampled at the grid points.
pub fn low_pass_kernel(grid: &TorusGrid, q: i32, cutoff: &CutoffProfile) -> Vec<f64> {
    let len = grid.len();
    let modes: Vec<(Vec<i64>, f64)> = (0..len)
        .map(|i| {
            let k: Vec<i64> = coords(grid, i).iter().map(|&j| wavenumber(grid, j)).collect();
            let k2: i64 = k.iter().map(|c| c * c).sum();
            (k, cutoff.low_pass(k2, q))
        })
        .filter(|(_, m)| *m != 0.0)
        .collect();
    let n = grid.points_per_axis() as f64;
    (0..len)
        .map(|y| {
            let yc = coords(grid, y);
            modes
                .iter()
                .map(|(k, m)| {
                    let phase: f64 = k.iter().zip(&yc).map(|(&a, &b)| a as f64 * b as f64 / n).sum();
                    m * (2.0 * PI * phase).cos()
                })
                .sum()
        })
        .collect()
}

/// `r_Q(f, g)(x) = int h~_Q(y) (f(x-y) - f(x)) (g(x-y) - g(x)) dy` by direct
/// quadrature over the grid, scalar `f`, `g`.
pub fn remainder_oracle(f: &Field<f64>, g: &Field<f64>, q: i32, cutoff: &CutoffProfile) -> Vec<f64> {
    let grid = *f.grid();
    let h = low_pass_kernel(&grid, q, cutoff);
    let cv = grid.cell_volume();
    let (fv, gv) = (f.values(), g.values());
    (0..grid.len())
        .map(|x| {
            let xc = coords(&grid, x);
            let mut acc = 0.0;
            for (y, hy) in h.iter().enumerate() {
                let yc = coords(&grid, y);
                let d: Vec<i64> = xc.iter().zip(&yc).map(|(a, b)| a - b).collect();
                let xy = index_of(&grid, &d);
                acc += hy * (fv[xy] - fv[x]) * (gv[xy] - gv[x]);
            }
            cv * acc
        })
        .collect()
}

/// `<(d(rho u) . du) du>` at one lag by a plain double loop over points.
pub fn transfer_oracle(state: &SolutionState<f64>, lag: Lag) -> Vec<f64> {
    let grid = *state.grid();
    let d = grid.dim();
    let len = grid.len();
    let rho = state.rho().values();
    let u = state.u().values();
    let mut out = vec![0.0; d];
    for r in 0..len {
        let rc = coords(&grid, r);
        let shifted: Vec<i64> = rc.iter().enumerate().map(|(a, &c)| c + lag[a]).collect();
        let rl = index_of(&grid, &shifted);
        let mut dot = 0.0;
        for c in 0..d {
            let du = u[c * len + rl] - u[c * len + r];
            dot += (rho[rl] * u[c * len + rl] - rho[r] * u[c * len + r]) * du;
        }
        for j in 0..d {
            out[j] += dot * (u[j * len + rl] - u[j * len + r]);
        }
    }
    out.iter().map(|v| v * grid.cell_volume()).collect()
}

/// Classical `pi(l) = -1/4 div_l <|du|^2 du>` for unit density, with the
/// third-order moment assembled from FFT two-point correlations:
/// `<|du|^2 du_j> = C[|u|^2, u_j] - C[u_j, |u|^2] + 2 sum_i (C[u_i u_j, u_i] - C[u_i, u_i u_j])`
/// and the lag divergence taken by centred differences.
pub fn homogeneous_khm_oracle(u: &Field<f64>, lags: &[Lag]) -> Vec<f64> {
    let grid = *u.grid();
    let d = grid.dim();
    let comps: Vec<Field<f64>> = (0..d).map(|c| u.component_field(c)).collect();
    let u2 = u.contract(u).unwrap();
    let moments: Vec<Field<f64>> = (0..d)
        .map(|j| {
            let mut acc = correlation(&u2, &comps[j]).unwrap().sub(&correlation(&comps[j], &u2).unwrap()).unwrap();
            for i in 0..d {
                let uiuj = comps[i].mul_scalar_field(&comps[j]).unwrap();
                let t = correlation(&uiuj, &comps[i]).unwrap().sub(&correlation(&comps[i], &uiuj).unwrap()).unwrap();
                acc = acc.add(&t.scale(2.0)).unwrap();
            }
            acc
        })
        .collect();
    let h = grid.spacing();
    lags.iter()
        .map(|lag| {
            let mut div = 0.0;
            for j in 0..d {
                let mut up = lag.to_vec();
                let mut down = lag.to_vec();
                up.truncate(d);
                down.truncate(d);
                up[j] += 1;
                down[j] -= 1;
                div += (moments[j].values()[index_of(&grid, &up)] - moments[j].values()[index_of(&grid, &down)]) / (2.0 * h);
            }
            -0.25 * div
        })
        .collect()
}

/// `E = 1/2 sum rho |u|^2 dV` by a plain loop.
pub fn kinetic_energy(state: &SolutionState<f64>) -> f64 {
    let len = state.grid().len();
    let d = state.grid().dim();
    let (rho, u) = (state.rho().values(), state.u().values());
    let mut e = 0.0;
    for x in 0..len {
        let u2: f64 = (0..d).map(|c| u[c * len + x].powi(2)).sum();
        e += 0.5 * rho[x] * u2;
    }
    e * state.grid().cell_volume()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
