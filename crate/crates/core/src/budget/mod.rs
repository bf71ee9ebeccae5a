//! Scale-by-scale energy budget of variable-density flow.

mod bound;
mod flux;
mod remainder;
mod series;
mod state;

pub use bound::{density_exponent, flux_bound_sweep, FluxBoundRow};
pub use flux::{
    coarse_energy, decomposition_check, dissipation_rate, favre_velocity, flux, flux_tensor, force_power,
    homogeneous_pressure, total_energy, CoarseScale, DecompositionResidual, FluxTerms, LemmaDecomposition,
    ScaleBudget,
};
pub use remainder::{remainder, remainder3};
pub use series::{
    budget_residual, budget_series, budget_sweep, check_series, cumulative_trapezoid, energy_balance_check,
    snapshot_budget, viscous_term, viscous_total, EnergyBalanceReport, FluxRow, FluxSpectrum, SnapshotBudget,
};
pub use state::{SolutionState, StateInfo, DIVERGENCE_TOLERANCE};
