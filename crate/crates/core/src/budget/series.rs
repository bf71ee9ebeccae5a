use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flux::{dissipation_rate, force_power, total_energy, CoarseScale, ScaleBudget};
use super::state::SolutionState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::CutoffProfile;

/// Instantaneous global and per-scale budget terms of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotBudget {
    pub t: f64,
    pub energy: f64,
    pub dissipation_rate: f64,
    pub force_power: f64,
    pub scales: Vec<ScaleBudget<f64>>,
}

/// One line of the flux spectrum at time `t` and scale `q`. Time integrals
/// (`flux_integral`, `eps_q`, `force_q`) run from the first snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxRow {
    pub t: f64,
    pub q: i32,
    pub e_le_q: f64,
    /// Instantaneous `Pi_Q`, pressure part included when available.
    pub pi_q: f64,
    pub pi_q_pressure: Option<f64>,
    pub flux_integral: f64,
    pub eps_q: f64,
    pub force_q: f64,
    /// `E_{<=Q}(t) - E_{<=Q}(0) - int Pi_Q + eps_Q - force_Q`.
    pub budget_residual: f64,
}

/// Budget of every scale at one snapshot, with the global `E` and `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSpectrum {
    pub t: f64,
    pub energy: f64,
    /// `mu int_0^t ||grad u||^2`.
    pub eps: f64,
    /// `int_0^t int rho u . f`.
    pub force_work: f64,
    pub rows: Vec<FluxRow>,
}

/// Checks that the snapshots form one run: same grid and viscosity,
/// increasing times, uniform presence of pressure and forcing.
pub fn check_series<T: Scalar>(states: &[SolutionState<T>]) -> Result<()> {
    if states.len() < 2 {
        return Err(Error::TooFewSnapshots(states.len()));
    }
    let first = &states[0];
    for (n, pair) in states.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if b.grid() != first.grid() {
            return Err(Error::InconsistentSeries(format!("snapshot {} is on another grid", n + 1)));
        }
        if b.mu() != first.mu() {
            return Err(Error::InconsistentSeries(format!("snapshot {} has viscosity {}", n + 1, b.mu())));
        }
        if !(b.t() > a.t()) {
            return Err(Error::InconsistentSeries(format!("time stamps not increasing at snapshot {}", n + 1)));
        }
        if b.pressure().is_some() != first.pressure().is_some() || b.force().is_some() != first.force().is_some() {
            return Err(Error::InconsistentSeries(format!("snapshot {} carries different fields", n + 1)));
        }
    }
    Ok(())
}

pub fn snapshot_budget<T: Scalar>(
    state: &SolutionState<T>,
    q_range: RangeInclusive<i32>,
    cutoff: &CutoffProfile,
) -> Result<SnapshotBudget> {
    let scales = q_range
        .map(|q| {
            let b = CoarseScale::new(state, q, cutoff)?.budget()?;
            Ok(ScaleBudget {
                q,
                energy: b.energy.as_f64(),
                flux: super::flux::FluxTerms {
                    transport: b.flux.transport.as_f64(),
                    pressure: b.flux.pressure.map(|p| p.as_f64()),
                },
                viscous: b.viscous.as_f64(),
                force: b.force.as_f64(),
                min_coarse_density: b.min_coarse_density,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SnapshotBudget {
        t: state.t(),
        energy: total_energy(state).as_f64(),
        dissipation_rate: dissipation_rate(state).as_f64(),
        force_power: force_power(state).as_f64(),
        scales,
    })
}

/// Running trapezoid integral of `rate` sampled at `times`.
pub fn cumulative_trapezoid(times: &[f64], rate: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rate.len());
    let mut acc = 0.0;
    for n in 0..rate.len() {
        if n > 0 {
            acc += 0.5 * (times[n] - times[n - 1]) * (rate[n] + rate[n - 1]);
        }
        out.push(acc);
    }
    out
}

/// Per-snapshot budgets followed by the time-integrated flux spectra.
pub fn budget_series<T: Scalar>(
    states: &[SolutionState<T>],
    q_range: RangeInclusive<i32>,
    cutoff: &CutoffProfile,
) -> Result<(Vec<SnapshotBudget>, Vec<FluxSpectrum>)> {
    check_series(states)?;
    let snaps: Vec<SnapshotBudget> = states
        .par_iter()
        .map(|s| snapshot_budget(s, q_range.clone(), cutoff))
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let column = |f: &dyn Fn(&SnapshotBudget) -> f64| -> Vec<f64> { snaps.iter().map(f).collect() };
    let eps = cumulative_trapezoid(&times, &column(&|s| s.dissipation_rate));
    let work = cumulative_trapezoid(&times, &column(&|s| s.force_power));
    let nq = q_range.clone().count();
    let mut spectra: Vec<FluxSpectrum> = snaps
        .iter()
        .enumerate()
        .map(|(n, s)| FluxSpectrum { t: s.t, energy: s.energy, eps: eps[n], force_work: work[n], rows: Vec::with_capacity(nq) })
        .collect();
    for k in 0..nq {
        let pi = column(&|s| s.scales[k].flux.total());
        let flux_int = cumulative_trapezoid(&times, &pi);
        let eps_q = cumulative_trapezoid(&times, &column(&|s| s.scales[k].viscous));
        let force_q = cumulative_trapezoid(&times, &column(&|s| s.scales[k].force));
        let e0 = snaps[0].scales[k].energy;
        for (n, s) in snaps.iter().enumerate() {
            let sc = &s.scales[k];
            spectra[n].rows.push(FluxRow {
                t: s.t,
                q: sc.q,
                e_le_q: sc.energy,
                pi_q: pi[n],
                pi_q_pressure: sc.flux.pressure,
                flux_integral: flux_int[n],
                eps_q: eps_q[n],
                force_q: force_q[n],
                budget_residual: (sc.energy - e0) - flux_int[n] + eps_q[n] - force_q[n],
            });
        }
    }
    Ok((snaps, spectra))
}

/// `eps_Q(t)` at the last snapshot.
pub fn viscous_term<T: Scalar>(states: &[SolutionState<T>], q: i32, cutoff: &CutoffProfile) -> Result<f64> {
    let (_, spectra) = budget_series(states, q..=q, cutoff)?;
    Ok(spectra.last().expect("non-empty").rows[0].eps_q)
}

/// `eps(t) = mu int_0^t ||grad u||^2` at the last snapshot.
pub fn viscous_total<T: Scalar>(states: &[SolutionState<T>]) -> Result<f64> {
    check_series(states)?;
    let times: Vec<f64> = states.iter().map(|s| s.t()).collect();
    let rate: Vec<f64> = states.par_iter().map(|s| dissipation_rate(s).as_f64()).collect();
    Ok(*cumulative_trapezoid(&times, &rate).last().expect("non-empty"))
}

/// `|budget residual|` at the last snapshot for one scale.
pub fn budget_residual<T: Scalar>(states: &[SolutionState<T>], q: i32, cutoff: &CutoffProfile) -> Result<f64> {
    let (_, spectra) = budget_series(states, q..=q, cutoff)?;
    Ok(spectra.last().expect("non-empty").rows[0].budget_residual.abs())
}

/// `(Q, |residual|)` at the last snapshot over a range of scales.
pub fn budget_sweep<T: Scalar>(
    states: &[SolutionState<T>],
    q_range: RangeInclusive<i32>,
    cutoff: &CutoffProfile,
) -> Result<Vec<(i32, f64)>> {
    let (_, spectra) = budget_series(states, q_range, cutoff)?;
    Ok(spectra.last().expect("non-empty").rows.iter().map(|r| (r.q, r.budget_residual.abs())).collect())
}

/// Global energy balance and the scale-by-scale limits at `tail_q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalanceReport {
    pub t0: f64,
    pub t1: f64,
    pub e0: f64,
    pub e1: f64,
    pub dissipation: f64,
    pub force_work: f64,
    /// `E(t) - E(0) + eps(t) - W(t)`.
    pub residual: f64,
    pub tail_q: i32,
    /// `E(t) - E_{<=Q}(t)`.
    pub energy_gap: f64,
    /// `int_0^t Pi_Q`.
    pub flux_integral: f64,
    /// `eps(t) - eps_Q(t)`.
    pub dissipation_gap: f64,
    /// `W(t) - force_Q(t)`.
    pub force_gap: f64,
    /// `eps_Q / eps - 1`, absent when `eps = 0`.
    pub eta: Option<f64>,
    /// Scale-by-scale budget residual at `tail_q`.
    pub tail_budget_residual: f64,
}

pub fn energy_balance_check<T: Scalar>(states: &[SolutionState<T>], cutoff: &CutoffProfile) -> Result<EnergyBalanceReport> {
    check_series(states)?;
    let tail_q = states[0].grid().q_max() - 2;
    let (snaps, spectra) = budget_series(states, tail_q..=tail_q, cutoff)?;
    let last = spectra.last().expect("non-empty");
    let row = last.rows[0];
    Ok(EnergyBalanceReport {
        t0: snaps[0].t,
        t1: last.t,
        e0: snaps[0].energy,
        e1: last.energy,
        dissipation: last.eps,
        force_work: last.force_work,
        residual: last.energy - snaps[0].energy + last.eps - last.force_work,
        tail_q,
        energy_gap: last.energy - row.e_le_q,
        flux_integral: row.flux_integral,
        dissipation_gap: last.eps - row.eps_q,
        force_gap: last.force_work - row.force_q,
        eta: if last.eps != 0.0 { Some(row.eps_q / last.eps - 1.0) } else { None },
        tail_budget_residual: row.budget_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::taylor_green;
    use crate::spectral::{Field, TorusGrid};

    #[test]
    fn trapezoid_is_exact_for_linear_rates() {
        let t = [0.0, 0.5, 1.5, 2.0];
        let c = cumulative_trapezoid(&t, &t.map(|x| 2.0 * x));
        for (ti, ci) in t.iter().zip(c) {
            assert!((ci - ti * ti).abs() < 1e-15);
        }
    }

    #[test]
    fn series_validation() {
        let g = TorusGrid::new(2, 16).unwrap();
        let a = taylor_green::<f64>(g, 0.01, 0.0).unwrap();
        assert!(matches!(viscous_total(std::slice::from_ref(&a)), Err(Error::TooFewSnapshots(1))));
        assert!(matches!(viscous_total(&[a.clone(), a.clone()]), Err(Error::InconsistentSeries(_))));
        let b = taylor_green::<f64>(g, 0.02, 0.1).unwrap();
        assert!(budget_residual(&[a, b], 2, &CutoffProfile::smooth()).is_err());
    }

    #[test]
    fn resting_fluid_has_zero_budget() {
        let g = TorusGrid::new(2, 16).unwrap();
        let states: Vec<_> = (0..3)
            .map(|n| {
                SolutionState::new(Field::constant(g, &[1.0]), Field::zeros(g, 2), 0.1, n as f64 * 0.1).unwrap()
            })
            .collect();
        for (_, r) in budget_sweep(&states, -1..=g.q_max(), &CutoffProfile::smooth()).unwrap() {
            assert_eq!(r, 0.0);
        }
        assert_eq!(viscous_total(&states).unwrap(), 0.0);
    }

    #[test]
    fn taylor_green_exact_series() {
        let g = TorusGrid::new(2, 32).unwrap();
        let mu = 0.01;
        let states: Vec<_> = (0..=20).map(|n| taylor_green::<f64>(g, mu, n as f64 * 0.005).unwrap()).collect();
        let eps = viscous_total(&states).unwrap();
        let e0 = 0.25;
        let exact = e0 * (1.0 - (-16.0 * std::f64::consts::PI.powi(2) * mu * 0.1).exp());
        assert!((eps - exact).abs() < 1e-6, "{eps} {exact}");
        let report = energy_balance_check(&states, &CutoffProfile::smooth()).unwrap();
        assert!(report.residual.abs() < 1e-5);
        assert!(report.energy_gap.abs() < 1e-14);
        assert!(report.eta.unwrap().abs() < 1e-12);
    }
}
