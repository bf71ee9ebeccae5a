mod common;

use std::f64::consts::PI;

use common::{kinetic_energy, max_abs, max_abs_diff, random_state, remainder_oracle};
use ddflux::budget::{
    budget_series, budget_sweep, coarse_energy, decomposition_check, energy_balance_check, favre_velocity, flux,
    flux_bound_sweep, flux_tensor, remainder, remainder3, total_energy, viscous_term, viscous_total, CoarseScale,
};
use ddflux::factory::taylor_green;
use ddflux::spectral::{project_high, project_low};
use ddflux::{CutoffProfile, Error, Field64, SolutionState, TorusGrid};

fn cutoffs() -> [CutoffProfile; 2] {
    [CutoffProfile::smooth(), CutoffProfile::sharp()]
}

#[test]
fn favre_velocity_matches_pointwise_quotient() {
    let g = TorusGrid::new(2, 32).unwrap();
    let rho = Field64::scalar_from_fn(g, |x| 1.0 + 0.3 * (2.0 * PI * x[0]).cos());
    let u = Field64::from_fn(g, 2, |x, c| if c == 1 { 0.8 * (2.0 * PI * x[0]).sin() } else { 0.0 });
    let s = SolutionState::new(rho, u, 0.0, 0.0).unwrap();
    for cutoff in cutoffs() {
        let (big_u, min) = favre_velocity(&s, 0, &cutoff).unwrap();
        assert!((min - 0.7).abs() < 1e-12);
        let oracle = Field64::from_fn(g, 2, |x, c| {
            if c == 1 {
                0.8 * (2.0 * PI * x[0]).sin() / (1.0 + 0.3 * (2.0 * PI * x[0]).cos())
            } else {
                0.0
            }
        });
        assert!(big_u.sub(&oracle).unwrap().max_abs() < 1e-13, "{cutoff:?}");
    }
}

#[test]
fn resting_fluid_has_no_coarse_velocity() {
    let s = random_state(16, 1, 0.4, 0.0);
    let rest = SolutionState::new(s.rho().clone(), Field64::zeros(*s.grid(), 2), 0.0, 0.0).unwrap();
    let (big_u, _) = favre_velocity(&rest, 2, &CutoffProfile::smooth()).unwrap();
    assert_eq!(big_u.max_abs(), 0.0);
    assert_eq!(coarse_energy(&rest, 2, &CutoffProfile::smooth()).unwrap(), 0.0);
}

#[test]
fn coarse_energy_reaches_total_energy() {
    for seed in 0..3 {
        let s = random_state(32, seed, 0.3, 0.2);
        let e = kinetic_energy(&s);
        assert!((total_energy(&s) - e).abs() < 1e-14 * e);
        for cutoff in cutoffs() {
            let top = coarse_energy(&s, s.grid().q_max(), &cutoff).unwrap();
            assert!((top - e).abs() <= 1e-8 * e, "{top} vs {e}");
        }
    }
}

#[test]
fn unit_density_band_limited_energy_is_half_l2() {
    let g = TorusGrid::new(2, 32).unwrap();
    let s = taylor_green::<f64>(g, 0.0, 0.0).unwrap();
    for q in 1..=g.q_max() {
        let e = coarse_energy(&s, q, &CutoffProfile::smooth()).unwrap();
        assert!((e - 0.25).abs() < 1e-14);
    }
}

#[test]
fn unit_density_flux_tensor_is_filtered_stress() {
    let s0 = random_state(32, 5, 0.0, 0.0);
    let u = s0.u();
    for cutoff in cutoffs() {
        let q = 3;
        let f = flux_tensor(&s0, q, &cutoff).unwrap();
        let ul = project_low(u, q, &cutoff).unwrap();
        let expected = project_low(&u.outer(u).unwrap(), q, &cutoff).unwrap().sub(&ul.outer(&ul).unwrap()).unwrap();
        assert!(f.sub(&expected).unwrap().max_abs() < 1e-13);
        let dec = CoarseScale::new(&s0, q, &cutoff).unwrap().decomposition().unwrap();
        for t in &dec.terms[..4] {
            assert!(t.max_abs() < 1e-13);
        }
        assert!(dec.terms[4].sub(&f).unwrap().max_abs() < 1e-13);
    }
}

#[test]
fn remainder_matches_direct_quadrature() {
    let s = random_state(32, 9, 0.4, 0.0);
    let f = s.rho().clone();
    let g = s.u().component_field(0);
    for cutoff in cutoffs() {
        for q in [0, 2, 3] {
            let spectral = remainder(&f, &g, q, &cutoff).unwrap();
            let oracle = remainder_oracle(&f, &g, q, &cutoff);
            let scale = max_abs(&oracle).max(1e-300);
            let err = max_abs_diff(spectral.values(), &oracle);
            assert!(err <= 1e-8 * scale.max(1.0), "q={q} err={err}");
        }
    }
}

#[test]
fn remainder_product_identity_on_random_fields() {
    for seed in 0..4 {
        let s = random_state(32, seed, 0.5, 0.0);
        let f = s.rho();
        let g = s.u();
        for cutoff in cutoffs() {
            for q in -1..=s.grid().q_max() {
                let r = remainder(f, g, q, &cutoff).unwrap();
                let lhs = project_low(&f.outer(g).unwrap(), q, &cutoff)
                    .unwrap()
                    .sub(&project_low(f, q, &cutoff).unwrap().outer(&project_low(g, q, &cutoff).unwrap()).unwrap())
                    .unwrap();
                let hi = project_high(f, q, &cutoff).unwrap().outer(&project_high(g, q, &cutoff).unwrap()).unwrap();
                assert!(lhs.sub(&r).unwrap().add(&hi).unwrap().max_abs() < 1e-10);
            }
        }
    }
}

#[test]
fn trilinear_remainder_vanishes_for_constant_density() {
    let s = random_state(16, 2, 0.0, 0.0);
    let r = remainder3(s.rho(), s.u(), 2, &CutoffProfile::smooth()).unwrap();
    assert!(r.max_abs() < 1e-14);
}

#[test]
fn lemma_identity_on_random_states() {
    for seed in 0..5 {
        let s = random_state(32, seed, 0.3, 0.0);
        for cutoff in cutoffs() {
            for q in 0..=s.grid().q_max() {
                match decomposition_check(&s, q, &cutoff) {
                    Ok(r) => assert!(r.relative <= 1e-8, "seed={seed} q={q} {r:?}"),
                    Err(Error::NonPositiveCoarseDensity { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}

#[test]
fn lemma_identity_small_exact_case() {
    let g = TorusGrid::new(2, 32).unwrap();
    let rho = Field64::scalar_from_fn(g, |x| 1.0 + 0.2 * (2.0 * PI * x[0]).cos() + 0.1 * (2.0 * PI * 3.0 * x[1]).sin());
    let u = Field64::from_fn(g, 2, |x, c| if c == 0 { (2.0 * PI * 2.0 * x[1]).sin() } else { 0.0 });
    let s = SolutionState::new(rho, u, 0.0, 0.0).unwrap();
    for q in 0..=g.q_max() {
        assert!(decomposition_check(&s, q, &CutoffProfile::smooth()).unwrap().relative <= 1e-10);
    }
}

#[test]
fn taylor_green_flux_vanishes_above_band() {
    let g = TorusGrid::new(2, 64).unwrap();
    let s = taylor_green::<f64>(g, 0.01, 0.0).unwrap();
    for cutoff in cutoffs() {
        for q in 2..=g.q_max() {
            let f = flux(&s, q, &cutoff).unwrap();
            assert!(f.total().abs() <= 1e-10, "q={q}");
            assert!(f.pressure.unwrap().abs() <= 1e-10);
        }
    }
}

#[test]
fn taylor_green_viscous_terms_follow_closed_form() {
    let g = TorusGrid::new(2, 32).unwrap();
    let mu = 0.01;
    let dt = 0.0025;
    let states: Vec<_> = (0..=40).map(|n| taylor_green::<f64>(g, mu, n as f64 * dt).unwrap()).collect();
    let t = 0.1;
    let exact = 0.25 * (1.0 - (-16.0 * PI * PI * mu * t).exp());
    let eps = viscous_total(&states).unwrap();
    assert!((eps - exact).abs() < 1e-6);
    let eps_q = viscous_term(&states, 3, &CutoffProfile::smooth()).unwrap();
    assert!((eps_q - eps).abs() < 1e-14);
    for (_, r) in budget_sweep(&states, 2..=g.q_max(), &CutoffProfile::smooth()).unwrap() {
        assert!(r < 1e-6);
    }
    let report = energy_balance_check(&states, &CutoffProfile::sharp()).unwrap();
    assert!(report.residual.abs() < 1e-6);
    assert!(report.flux_integral.abs() < 1e-12);
}

#[test]
fn flux_spectrum_rows_are_finite_and_complete() {
    let a = random_state(32, 3, 0.3, 0.0);
    let b = SolutionState::new(a.rho().clone(), a.u().clone(), 0.0, 0.01).unwrap();
    let (snaps, spectra) = budget_series(&[a, b], -1..=5, &CutoffProfile::smooth()).unwrap();
    assert_eq!(snaps.len(), 2);
    for sp in &spectra {
        assert_eq!(sp.rows.len(), 7);
        for r in &sp.rows {
            assert!(r.e_le_q.is_finite() && r.pi_q.is_finite() && r.budget_residual.is_finite());
            assert!(r.pi_q_pressure.is_none());
        }
    }
}

#[test]
fn flux_bound_rows_for_rough_and_decaying_velocity() {
    let rough = random_state(64, 4, 0.3, 0.0);
    let smooth = random_state(64, 4, 0.3, 1.0 / 3.0);
    let q_range = 3..=rough.grid().q_max() - 2;
    let a = flux_bound_sweep(&rough, 3.0, q_range.clone(), &CutoffProfile::smooth()).unwrap();
    let b = flux_bound_sweep(&smooth, 3.0, q_range, &CutoffProfile::smooth()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(x.ratio.is_finite() && y.ratio.is_finite());
        assert!(y.d_u < x.d_u);
        assert!(x.d_rho.is_finite() && x.d_rho > 0.0);
    }
}
