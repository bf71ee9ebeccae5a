use serde::{Deserialize, Serialize};

use super::remainder::remainder3;
use super::state::SolutionState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{divergence, gradient, inner, lp_norm, project_high, project_low, CutoffProfile, Field};

/// Coarse quantities of a state at scale `Q`, computed once and shared.
#[derive(Debug, Clone)]
pub struct CoarseScale<'a, T: Scalar> {
    state: &'a SolutionState<T>,
    q: i32,
    cutoff: CutoffProfile,
    rho_low: Field<T>,
    momentum: Field<T>,
    momentum_low: Field<T>,
    favre: Field<T>,
    min_coarse_density: f64,
}

/// The two addends of `Pi_Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxTerms<T> {
    pub transport: T,
    /// `None` when the state carries no pressure.
    pub pressure: Option<T>,
}

impl<T: Scalar> FluxTerms<T> {
    pub fn total(&self) -> T {
        self.transport + self.pressure.unwrap_or_else(T::zero)
    }
}

/// All instantaneous budget densities at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleBudget<T> {
    pub q: i32,
    pub energy: T,
    pub flux: FluxTerms<T>,
    /// `mu int grad u_{<=Q} : grad U`.
    pub viscous: T,
    /// `int (rho f)_{<=Q} . U`.
    pub force: T,
    pub min_coarse_density: f64,
}

/// The five terms splitting `F_Q`, in order: trilinear remainder,
/// `-w (x) w / rho_{<=Q}`, `rho_{>Q} u_{>Q} (x) u_{>Q}`, `2 Sym(w (x) u_{>Q})`
/// and `rho [(u (x) u)_{<=Q} - u_{<=Q} (x) u_{<=Q}]`, where
/// `w = (rho u)_{<=Q} - rho_{<=Q} u_{<=Q}`.
#[derive(Debug, Clone)]
pub struct LemmaDecomposition<T: Scalar> {
    pub flux_tensor: Field<T>,
    pub terms: [Field<T>; 5],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResidual {
    pub absolute: f64,
    pub relative: f64,
    /// `||F_Q||_2`.
    pub flux_norm: f64,
    /// Norm used in the denominator of `relative`.
    pub reference_norm: f64,
}

/// Below this fraction of `||(rho u (x) u)_{<=Q}||` the flux tensor is
/// treated as round-off and the residual is measured against the product.
const NEGLIGIBLE_FLUX: f64 = 1e-10;

impl<'a, T: Scalar> CoarseScale<'a, T> {
    pub fn new(state: &'a SolutionState<T>, q: i32, cutoff: &CutoffProfile) -> Result<Self> {
        let rho_low = project_low(state.rho(), q, cutoff)?;
        let min = rho_low.min_value().as_f64();
        if !(min > 0.0) {
            return Err(Error::NonPositiveCoarseDensity { q, min });
        }
        let momentum = state.momentum();
        let momentum_low = project_low(&momentum, q, cutoff)?;
        let favre = momentum_low.div_scalar_field(&rho_low)?;
        Ok(Self {
            state,
            q,
            cutoff: *cutoff,
            rho_low,
            momentum,
            momentum_low,
            favre,
            min_coarse_density: min,
        })
    }

    pub fn q(&self) -> i32 {
        self.q
    }

    /// `U = (rho u)_{<=Q} / rho_{<=Q}`.
    pub fn favre_velocity(&self) -> &Field<T> {
        &self.favre
    }

    pub fn coarse_density(&self) -> &Field<T> {
        &self.rho_low
    }

    pub fn coarse_momentum(&self) -> &Field<T> {
        &self.momentum_low
    }

    pub fn min_coarse_density(&self) -> f64 {
        self.min_coarse_density
    }

    fn low(&self, f: &Field<T>) -> Result<Field<T>> {
        project_low(f, self.q, &self.cutoff)
    }

    /// `E_{<=Q} = 1/2 int |(rho u)_{<=Q}|^2 / rho_{<=Q}`.
    pub fn energy(&self) -> T {
        T::lit(0.5) * inner(&self.momentum_low, &self.favre).expect("shapes")
    }

    /// `F_Q = (rho u (x) u)_{<=Q} - U (x) (rho u)_{<=Q}`.
    pub fn flux_tensor(&self) -> Result<Field<T>> {
        let rho_uu = self.momentum.outer(self.state.u())?;
        self.low(&rho_uu)?.sub(&self.favre.outer(&self.momentum_low)?)
    }

    pub fn flux(&self) -> Result<FluxTerms<T>> {
        let grad_u = gradient(&self.favre);
        let transport = inner(&self.flux_tensor()?, &grad_u)?;
        let pressure = match self.state.pressure() {
            Some(p) => {
                let div_u = divergence(&self.favre)?;
                Some(inner(&self.low(p)?, &div_u)?)
            }
            None => None,
        };
        Ok(FluxTerms { transport, pressure })
    }

    /// `mu int grad u_{<=Q} : grad U` (instantaneous).
    pub fn viscous(&self) -> Result<T> {
        let mu = T::lit(self.state.mu());
        if mu == T::zero() {
            return Ok(T::zero());
        }
        let u_low = self.low(self.state.u())?;
        Ok(mu * inner(&gradient(&u_low), &gradient(&self.favre))?)
    }

    /// `int (rho f)_{<=Q} . U` (instantaneous).
    pub fn force(&self) -> Result<T> {
        match self.state.force() {
            Some(f) => inner(&self.low(&f.mul_scalar_field(self.state.rho())?)?, &self.favre),
            None => Ok(T::zero()),
        }
    }

    pub fn budget(&self) -> Result<ScaleBudget<T>> {
        Ok(ScaleBudget {
            q: self.q,
            energy: self.energy(),
            flux: self.flux()?,
            viscous: self.viscous()?,
            force: self.force()?,
            min_coarse_density: self.min_coarse_density,
        })
    }

    pub fn decomposition(&self) -> Result<LemmaDecomposition<T>> {
        let rho = self.state.rho();
        let u = self.state.u();
        let u_low = self.low(u)?;
        let u_high = project_high(u, self.q, &self.cutoff)?;
        let rho_high = project_high(rho, self.q, &self.cutoff)?;
        let w = self.momentum_low.sub(&u_low.mul_scalar_field(&self.rho_low)?)?;
        let t1 = remainder3(rho, u, self.q, &self.cutoff)?;
        let t2 = w.outer(&w)?.div_scalar_field(&self.rho_low)?.scale(-T::one());
        let t3 = u_high.outer(&u_high)?.mul_scalar_field(&rho_high)?;
        let t4 = w.outer(&u_high)?.add(&u_high.outer(&w)?)?;
        let t5 = self.low(&u.outer(u)?)?.sub(&u_low.outer(&u_low)?)?.mul_scalar_field(rho)?;
        Ok(LemmaDecomposition { flux_tensor: self.flux_tensor()?, terms: [t1, t2, t3, t4, t5] })
    }

    /// `||F_Q - sum of the five terms||_2` relative to `||F_Q||_2`.
    pub fn decomposition_check(&self) -> Result<DecompositionResidual> {
        let dec = self.decomposition()?;
        let mut sum = dec.terms[0].clone();
        for t in &dec.terms[1..] {
            sum = sum.add(t)?;
        }
        let absolute = lp_norm(&dec.flux_tensor.sub(&sum)?, 2.0)?.as_f64();
        let flux_norm = lp_norm(&dec.flux_tensor, 2.0)?.as_f64();
        let product_norm = lp_norm(&self.low(&self.momentum.outer(self.state.u())?)?, 2.0)?.as_f64();
        let reference_norm = if flux_norm > NEGLIGIBLE_FLUX * product_norm {
            flux_norm
        } else {
            product_norm
        };
        let relative = if reference_norm > 0.0 { absolute / reference_norm } else { absolute };
        Ok(DecompositionResidual { absolute, relative, flux_norm, reference_norm })
    }
}

pub fn favre_velocity<T: Scalar>(state: &SolutionState<T>, q: i32, cutoff: &CutoffProfile) -> Result<(Field<T>, f64)> {
    let c = CoarseScale::new(state, q, cutoff)?;
    Ok((c.favre.clone(), c.min_coarse_density))
}

pub fn coarse_energy<T: Scalar>(state: &SolutionState<T>, q: i32, cutoff: &CutoffProfile) -> Result<T> {
    Ok(CoarseScale::new(state, q, cutoff)?.energy())
}

pub fn flux_tensor<T: Scalar>(state: &SolutionState<T>, q: i32, cutoff: &CutoffProfile) -> Result<Field<T>> {
    CoarseScale::new(state, q, cutoff)?.flux_tensor()
}

pub fn flux<T: Scalar>(state: &SolutionState<T>, q: i32, cutoff: &CutoffProfile) -> Result<FluxTerms<T>> {
    CoarseScale::new(state, q, cutoff)?.flux()
}

pub fn decomposition_check<T: Scalar>(
    state: &SolutionState<T>,
    q: i32,
    cutoff: &CutoffProfile,
) -> Result<DecompositionResidual> {
    CoarseScale::new(state, q, cutoff)?.decomposition_check()
}

/// `E = 1/2 int rho |u|^2`.
pub fn total_energy<T: Scalar>(state: &SolutionState<T>) -> T {
    T::lit(0.5) * inner(&state.momentum(), state.u()).expect("shapes")
}

/// `mu ||grad u||_2^2` (instantaneous).
pub fn dissipation_rate<T: Scalar>(state: &SolutionState<T>) -> T {
    let g = gradient(state.u());
    T::lit(state.mu()) * inner(&g, &g).expect("shapes")
}

/// `int rho u . f` (instantaneous).
pub fn force_power<T: Scalar>(state: &SolutionState<T>) -> T {
    match state.force() {
        Some(f) => inner(&state.momentum(), f).expect("shapes"),
        None => T::zero(),
    }
}

/// Pressure of a unit-density flow: `-Lap p = div div (u (x) u) - div f`.
pub fn homogeneous_pressure<T: Scalar>(u: &Field<T>, force: Option<&Field<T>>) -> Result<Field<T>> {
    let div_uu = divergence(&u.outer(u)?)?;
    let mut source = divergence(&div_uu)?.scale(-T::one());
    if let Some(f) = force {
        source = source.add(&divergence(f)?)?;
    }
    Ok(crate::spectral::inverse_laplacian(&source))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::taylor_green;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    fn variable_state(g: TorusGrid) -> SolutionState<f64> {
        let rho = Field::scalar_from_fn(g, |x| 1.0 + 0.3 * (2.0 * PI * x[0]).cos() + 0.1 * (2.0 * PI * 2.0 * x[1]).sin());
        let u = Field::from_fn(g, 2, |x, c| {
            let (a, b) = (2.0 * PI * x[0], 2.0 * PI * 3.0 * x[1]);
            if c == 0 {
                3.0 * a.sin() * b.cos()
            } else {
                -a.cos() * b.sin()
            }
        });
        SolutionState::new(rho, u, 0.01, 0.0).unwrap()
    }

    #[test]
    fn unit_density_favre_is_low_pass() {
        let g = TorusGrid::new(2, 32).unwrap();
        let s = taylor_green::<f64>(g, 0.0, 0.0).unwrap();
        let c = CoarseScale::new(&s, 0, &CutoffProfile::smooth()).unwrap();
        let u_low = project_low(s.u(), 0, &CutoffProfile::smooth()).unwrap();
        assert!(c.favre_velocity().sub(&u_low).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn energy_saturates() {
        let g = TorusGrid::new(2, 32).unwrap();
        let s = variable_state(g);
        let e = total_energy(&s);
        let eq = coarse_energy(&s, g.q_max(), &CutoffProfile::smooth()).unwrap();
        assert!((eq - e).abs() <= 1e-8 * e);
    }

    #[test]
    fn lemma_identity_holds() {
        let g = TorusGrid::new(2, 32).unwrap();
        let s = variable_state(g);
        for cutoff in [CutoffProfile::smooth(), CutoffProfile::sharp()] {
            for q in 1..=g.q_max() {
                let r = decomposition_check(&s, q, &cutoff).unwrap();
                assert!(r.relative < 1e-10, "q={q} {r:?}");
            }
        }
    }

    #[test]
    fn constant_velocity_has_no_flux() {
        let g = TorusGrid::new(2, 16).unwrap();
        let rho: Field<f64> = Field::scalar_from_fn(g, |x| 1.0 + 0.2 * (2.0 * PI * x[1]).sin());
        let u = Field::constant(g, &[0.3, -0.7]);
        let s = SolutionState::new(rho, u, 0.0, 0.0).unwrap();
        let f = flux_tensor(&s, 1, &CutoffProfile::smooth()).unwrap();
        assert!(f.max_abs() < 1e-14);
        let terms = flux(&s, 1, &CutoffProfile::smooth()).unwrap();
        assert!(terms.transport.abs() < 1e-14 && terms.pressure.is_none());
    }

    #[test]
    fn taylor_green_flux_and_pressure() {
        let g = TorusGrid::new(2, 32).unwrap();
        let s = taylor_green::<f64>(g, 0.01, 0.0).unwrap();
        let p = homogeneous_pressure(s.u(), None).unwrap();
        assert!(p.sub(s.pressure().unwrap()).unwrap().max_abs() < 1e-13);
        for q in 0..=g.q_max() {
            let f = flux(&s, q, &CutoffProfile::smooth()).unwrap();
            assert!(f.pressure.unwrap().abs() < 1e-13);
            if q >= 2 {
                assert!(f.total().abs() < 1e-13, "q={q}");
            }
        }
    }

    #[test]
    fn coarse_density_guard() {
        let g = TorusGrid::new(1, 64).unwrap();
        let rho = Field::scalar_from_fn(g, |x| 0.01 + (-(x[0] - 0.5).powi(2) / 0.002).exp());
        let s = SolutionState::new(rho, Field::constant(g, &[1.0]), 0.0, 0.0).unwrap();
        assert!(matches!(
            CoarseScale::new(&s, 0, &CutoffProfile::sharp()),
            Err(Error::NonPositiveCoarseDensity { q: 0, .. })
        ));
        assert!(CoarseScale::new(&s, g.q_max(), &CutoffProfile::sharp()).is_ok());
    }
}
