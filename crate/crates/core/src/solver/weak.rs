use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::budget::{check_series, cumulative_trapezoid, SolutionState};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::spectral::{inner, Field, TorusGrid};

/// `cos(2 pi k.x)` or `sin(2 pi k.x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFunction {
    pub k: [i64; 3],
    pub sine: bool,
}

impl TestFunction {
    fn phase(&self, x: [f64; 3]) -> f64 {
        2.0 * PI * (self.k[0] as f64 * x[0] + self.k[1] as f64 * x[1] + self.k[2] as f64 * x[2])
    }

    pub fn value<T: Scalar>(&self, grid: TorusGrid) -> Field<T> {
        Field::scalar_from_fn(grid, |x| if self.sine { self.phase(x).sin() } else { self.phase(x).cos() })
    }

    pub fn gradient<T: Scalar>(&self, grid: TorusGrid) -> Field<T> {
        Field::from_fn(grid, grid.dim(), |x, j| {
            let a = 2.0 * PI * self.k[j] as f64;
            if self.sine {
                a * self.phase(x).cos()
            } else {
                -a * self.phase(x).sin()
            }
        })
    }

    pub fn k_sq(&self) -> i64 {
        self.k.iter().map(|c| c * c).sum()
    }
}

/// Real Fourier modes with `|k| <= 4`, one of each `+-k` pair, the constant included.
pub fn test_function_bank(grid: TorusGrid) -> Vec<TestFunction> {
    let d = grid.dim();
    let r = |a: usize| if a < d { -4i64..=4 } else { 0..=0 };
    let mut bank = Vec::new();
    for k0 in r(0) {
        for k1 in r(1) {
            for k2 in r(2) {
                let k = [k0, k1, k2];
                if k.iter().map(|c| c * c).sum::<i64>() > 16 {
                    continue;
                }
                let first = k.iter().find(|&&c| c != 0);
                match first {
                    None => bank.push(TestFunction { k, sine: false }),
                    Some(&c) if c > 0 => {
                        bank.push(TestFunction { k, sine: false });
                        bank.push(TestFunction { k, sine: true });
                    }
                    _ => {}
                }
            }
        }
    }
    bank
}

/// Largest residuals of the weak momentum, density and incompressibility
/// identities over the bank and all snapshot times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakResidualReport {
    pub test_functions: usize,
    pub momentum: f64,
    pub density: f64,
    pub incompressibility: f64,
    /// Momentum identity for constant `psi` (momentum balance).
    pub momentum_constant: f64,
    /// Density identity for `eta = 1` (mass conservation).
    pub mass: f64,
    pub pressure_included: bool,
}

pub fn weak_residuals<T: Scalar>(states: &[SolutionState<T>], bank: &[TestFunction]) -> Result<WeakResidualReport> {
    check_series(states)?;
    let grid = *states[0].grid();
    let d = grid.dim();
    let times: Vec<f64> = states.iter().map(|s| s.t()).collect();
    let momenta: Vec<Field<T>> = states.iter().map(|s| s.momentum()).collect();
    let fluxes: Vec<Field<T>> = states
        .iter()
        .zip(&momenta)
        .map(|(s, m)| m.outer(s.u()))
        .collect::<Result<_>>()?;
    let mut report = WeakResidualReport {
        test_functions: bank.len(),
        momentum: 0.0,
        density: 0.0,
        incompressibility: 0.0,
        momentum_constant: 0.0,
        mass: 0.0,
        pressure_included: states[0].pressure().is_some(),
    };
    for tf in bank {
        let phi: Field<T> = tf.value(grid);
        let grad: Field<T> = tf.gradient(grid);
        let lap = T::lit(-4.0 * PI * PI * tf.k_sq() as f64);
        let constant = tf.k_sq() == 0;

        let mass: Vec<f64> = states.iter().map(|s| inner(s.rho(), &phi)).map(|v| v.map(|x| x.as_f64())).collect::<Result<_>>()?;
        let mass_rate: Vec<f64> = momenta.iter().map(|m| inner(m, &grad).map(|v| v.as_f64())).collect::<Result<_>>()?;
        let mass_int = cumulative_trapezoid(&times, &mass_rate);
        for n in 0..states.len() {
            let r = (mass[n] - mass[0] - mass_int[n]).abs();
            report.density = report.density.max(r);
            if constant {
                report.mass = report.mass.max(r);
            }
        }
        for s in states {
            let r = inner(s.u(), &grad)?.as_f64().abs();
            report.incompressibility = report.incompressibility.max(r);
        }

        for c in 0..d {
            let psi = Field::from_fn(grid, d, |_, j| if j == c { 1.0 } else { 0.0 }).mul_scalar_field(&phi)?;
            // grad psi with component (c, j) = d_j phi.
            let len = grid.len();
            let mut gp = vec![T::zero(); d * d * len];
            for j in 0..d {
                gp[(c * d + j) * len..(c * d + j + 1) * len].copy_from_slice(grad.component(j));
            }
            let grad_psi = Field::new(grid, d * d, gp)?;
            let div_psi = Field::new(grid, 1, grad.component(c).to_vec())?;
            let lap_psi = psi.scale(lap);
            let mut held = Vec::with_capacity(states.len());
            let mut rate = Vec::with_capacity(states.len());
            for (n, s) in states.iter().enumerate() {
                held.push(inner(&momenta[n], &psi)?.as_f64());
                let mut r = inner(&fluxes[n], &grad_psi)?;
                if let Some(p) = s.pressure() {
                    r = r + inner(p, &div_psi)?;
                }
                r = r + T::lit(s.mu()) * inner(s.u(), &lap_psi)?;
                if let Some(f) = s.force() {
                    r = r + inner(&f.mul_scalar_field(s.rho())?, &psi)?;
                }
                rate.push(r.as_f64());
            }
            let integral = cumulative_trapezoid(&times, &rate);
            for n in 0..states.len() {
                let r = (held[n] - held[0] - integral[n]).abs();
                report.momentum = report.momentum.max(r);
                if constant {
                    report.momentum_constant = report.momentum_constant.max(r);
                }
            }
        }
    }
    Ok(report)
}
