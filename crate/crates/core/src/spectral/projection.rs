//! Littlewood-Paley projections realised as Fourier multipliers.

use num_complex::Complex;

use super::cutoff::CutoffProfile;
use super::field::Field;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Applies a real, radial multiplier `m(|k|^2)` to every component.
pub fn apply_radial<T: Scalar>(f: &Field<T>, m: impl Fn(i64) -> f64) -> Field<T> {
    let grid = *f.grid();
    let len = grid.len();
    let table: Vec<T> = (0..len).map(|i| T::lit(m(grid.wavenumber_sq(i)))).collect();
    let spec = f.spectrum();
    let coeffs: Vec<Complex<T>> = spec
        .iter()
        .enumerate()
        .map(|(i, &c)| c * table[i % len])
        .collect();
    Field::from_spectrum(grid, f.ncomp(), coeffs)
}

fn check_shell<T: Scalar>(f: &Field<T>, q: i32) -> Result<()> {
    let q_max = f.grid().q_max();
    if q < -1 || q > q_max {
        return Err(Error::ShellOutOfRange { q, q_max });
    }
    Ok(())
}

/// `f_q`, the dyadic shell `q` of `f`.
pub fn project_shell<T: Scalar>(f: &Field<T>, q: i32, cutoff: &CutoffProfile) -> Result<Field<T>> {
    check_shell(f, q)?;
    Ok(apply_radial(f, |k2| cutoff.shell(k2, q)))
}

/// `f_{<=Q}` with multiplier `chi(k / lambda_{Q+1})`. Any `Q >= q_max` is the identity.
pub fn project_low<T: Scalar>(f: &Field<T>, q: i32, cutoff: &CutoffProfile) -> Result<Field<T>> {
    if q < -1 {
        return Err(Error::ShellOutOfRange { q, q_max: f.grid().q_max() });
    }
    Ok(apply_radial(f, |k2| cutoff.low_pass(k2, q)))
}

/// `f_{>Q} = f - f_{<=Q}`, formed in spectral space.
pub fn project_high<T: Scalar>(f: &Field<T>, q: i32, cutoff: &CutoffProfile) -> Result<Field<T>> {
    if q < -1 {
        return Err(Error::ShellOutOfRange { q, q_max: f.grid().q_max() });
    }
    Ok(apply_radial(f, |k2| 1.0 - cutoff.low_pass(k2, q)))
}

/// `f_{~Q} = sum_{q=Q-2}^{Q+2} f_q`, clipped to the stored shells.
pub fn project_near<T: Scalar>(f: &Field<T>, q: i32, cutoff: &CutoffProfile) -> Result<Field<T>> {
    if q < -1 {
        return Err(Error::ShellOutOfRange { q, q_max: f.grid().q_max() });
    }
    let q_max = f.grid().q_max();
    let lo = (q - 2).max(-1);
    let hi = (q + 2).min(q_max);
    Ok(apply_radial(f, |k2| (lo..=hi).map(|s| cutoff.shell(k2, s)).sum()))
}

/// The family of shells `f_q`, `q = -1..=q_max`.
#[derive(Debug, Clone)]
pub struct ShellDecomposition<T: Scalar> {
    shells: Vec<Field<T>>,
}

impl<T: Scalar> ShellDecomposition<T> {
    pub fn new(f: &Field<T>, cutoff: &CutoffProfile) -> Self {
        let q_max = f.grid().q_max();
        let shells = (-1..=q_max)
            .map(|q| apply_radial(f, |k2| cutoff.shell(k2, q)))
            .collect();
        Self { shells }
    }

    pub fn q_max(&self) -> i32 {
        self.shells.len() as i32 - 2
    }

    pub fn shell(&self, q: i32) -> Option<&Field<T>> {
        if q < -1 {
            return None;
        }
        self.shells.get((q + 1) as usize)
    }

    /// Iterates `(q, f_q)`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &Field<T>)> {
        self.shells.iter().enumerate().map(|(i, f)| (i as i32 - 1, f))
    }

    /// Sum of all shells, which reconstructs the source field.
    pub fn reconstruct(&self) -> Field<T> {
        let mut acc = self.shells[0].clone();
        for s in &self.shells[1..] {
            acc = acc.add(s).expect("shells share a grid");
        }
        acc
    }
}

/// Partition-of-unity defect `max_k |sum_q phi_q(k) - 1|` over the lattice of `grid`.
pub fn partition_defect(grid: &super::grid::TorusGrid, cutoff: &CutoffProfile) -> f64 {
    let q_max = grid.q_max();
    (0..grid.len())
        .map(|i| {
            let k2 = grid.wavenumber_sq(i);
            let total: f64 = (-1..=q_max).map(|q| cutoff.shell(k2, q)).sum();
            (total - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::TorusGrid;
    use std::f64::consts::PI;

    fn cos3(g: TorusGrid) -> Field<f64> {
        Field::scalar_from_fn(g, |x| (2.0 * PI * 3.0 * x[0]).cos())
    }

    fn rough(g: TorusGrid) -> Field<f64> {
        Field::scalar_from_fn(g, |x| {
            let s = (17.0 * x[0] + 29.0 * x[1] * x[1]).sin();
            s * s.abs() + (3.0 * x[0] * x[1]).cos()
        })
    }

    #[test]
    fn constant_field_lives_in_lowest_shell() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = Field::<f64>::constant(g, &[2.5]);
        for cutoff in [CutoffProfile::smooth(), CutoffProfile::sharp()] {
            let low = project_shell(&f, -1, &cutoff).unwrap();
            assert!(low.sub(&f).unwrap().max_abs() < 1e-14);
            for q in 0..=g.q_max() {
                assert!(project_shell(&f, q, &cutoff).unwrap().max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sharp_single_mode_occupies_one_shell() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = cos3(g);
        let cutoff = CutoffProfile::sharp();
        for q in -1..=g.q_max() {
            let s = project_shell(&f, q, &cutoff).unwrap();
            if q == 2 {
                assert!(s.sub(&f).unwrap().max_abs() < 1e-13);
            } else {
                assert!(s.max_abs() < 1e-13, "shell {q}");
            }
        }
        let low = project_low(&f, 1, &cutoff).unwrap();
        assert!(low.max_abs() < 1e-13);
        let high = project_high(&f, 1, &cutoff).unwrap();
        assert!(high.sub(&f).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn smooth_single_mode_splits_between_shells_one_and_two() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = cos3(g);
        let cutoff = CutoffProfile::smooth();
        let w = cutoff.chi(0.75);
        let s1 = project_shell(&f, 1, &cutoff).unwrap();
        let s2 = project_shell(&f, 2, &cutoff).unwrap();
        assert!(s1.sub(&f.scale(w)).unwrap().max_abs() < 1e-13);
        assert!(s1.add(&s2).unwrap().sub(&f).unwrap().max_abs() < 1e-13);
        let k = g.index_of_wavevector([3, 0, 0]);
        assert!((s1.spectrum()[k].re - 0.5 * w).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_and_complement() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = rough(g);
        let scale = crate::spectral::lp_norm(&f, 2.0).unwrap();
        for cutoff in [CutoffProfile::smooth(), CutoffProfile::sharp()] {
            let rec = ShellDecomposition::new(&f, &cutoff).reconstruct();
            let err = crate::spectral::lp_norm(&rec.sub(&f).unwrap(), 2.0).unwrap();
            assert!(err <= 1e-10 * scale);
            let full = project_low(&f, g.q_max(), &cutoff).unwrap();
            assert!(full.sub(&f).unwrap().max_abs() < 1e-12);
            for q in -1..=g.q_max() {
                let lo = project_low(&f, q, &cutoff).unwrap();
                let hi = project_high(&f, q, &cutoff).unwrap();
                assert!(lo.add(&hi).unwrap().sub(&f).unwrap().max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sharp_low_pass_is_idempotent() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = rough(g);
        let cutoff = CutoffProfile::sharp();
        for q in -1..=g.q_max() {
            let once = project_low(&f, q, &cutoff).unwrap();
            let twice = project_low(&once, q, &cutoff).unwrap();
            assert!(twice.sub(&once).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn near_band_sums_five_shells() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = rough(g);
        let cutoff = CutoffProfile::smooth();
        let dec = ShellDecomposition::new(&f, &cutoff);
        let near = project_near(&f, 3, &cutoff).unwrap();
        let mut acc = Field::zeros(g, 1);
        for q in 1..=5 {
            acc = acc.add(dec.shell(q).unwrap()).unwrap();
        }
        assert!(near.sub(&acc).unwrap().max_abs() < 1e-12);
        // clipped at the bottom
        let near0 = project_near(&f, 0, &cutoff).unwrap();
        let low2 = project_low(&f, 2, &cutoff).unwrap();
        assert!(near0.sub(&low2).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn shell_range_is_checked() {
        let g = TorusGrid::new(1, 16).unwrap();
        let f = Field::<f64>::zeros(g, 1);
        let c = CutoffProfile::sharp();
        assert!(matches!(project_shell(&f, -2, &c), Err(Error::ShellOutOfRange { .. })));
        assert!(project_shell(&f, g.q_max() + 1, &c).is_err());
        assert!(project_low(&f, -2, &c).is_err());
    }

    #[test]
    fn partition_of_unity_small_grid() {
        for n in [16usize, 64] {
            let g = TorusGrid::new(2, n).unwrap();
            assert!(partition_defect(&g, &CutoffProfile::smooth()) <= 1e-12);
            assert!(partition_defect(&g, &CutoffProfile::sharp()) <= 1e-12);
        }
    }

    #[test]
    fn parseval() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = rough(g);
        let spectral: f64 = f.spectrum().iter().map(|c| c.norm_sqr()).sum();
        let physical: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        assert!((spectral - physical).abs() <= 1e-12 * physical);
    }
}
