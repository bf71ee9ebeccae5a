//! N-dimensional complex transforms on the torus grid with per-thread plan caching.
//!
//! Normalisation follows the torus Fourier series: the forward transform is
//! `f_hat(k) = N^-d sum_x f(x) e^{-2 pi i k.x}` and the inverse is the plain
//! sum over `k`.

use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::TorusGrid;
use crate::scalar::Scalar;

thread_local! {
    static PLANS: RefCell<HashMap<(TypeId, usize, bool), Box<dyn Any>>> =
        RefCell::new(HashMap::new());
}

fn plan<T: Scalar>(n: usize, direction: FftDirection) -> Arc<dyn Fft<T>> {
    let forward = matches!(direction, FftDirection::Forward);
    let key = (TypeId::of::<T>(), n, forward);
    PLANS.with(|cell| {
        let mut plans = cell.borrow_mut();
        let entry = plans.entry(key).or_insert_with(|| {
            let mut planner = FftPlanner::<T>::new();
            let fft = planner.plan_fft(n, direction);
            Box::new(fft)
        });
        entry
            .downcast_ref::<Arc<dyn Fft<T>>>()
            .expect("plan cache keyed by scalar type")
            .clone()
    })
}

fn transform_in_place<T: Scalar>(grid: &TorusGrid, data: &mut [Complex<T>], direction: FftDirection) {
    let n = grid.points_per_axis();
    let fft = plan::<T>(n, direction);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex::new(T::zero(), T::zero()); n];
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
        }
    }
}

/// Forward transform of one real component.
pub fn forward_real<T: Scalar>(grid: &TorusGrid, values: &[T]) -> Vec<Complex<T>> {
    let mut data: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
    transform_in_place(grid, &mut data, FftDirection::Forward);
    let scale = T::from_count(grid.len()).recip();
    for v in data.iter_mut() {
        *v = *v * scale;
    }
    data
}

/// Inverse transform; returns the complex samples.
pub fn inverse<T: Scalar>(grid: &TorusGrid, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut data = coeffs.to_vec();
    transform_in_place(grid, &mut data, FftDirection::Inverse);
    data
}

/// Inverse transform keeping only the real part.
pub fn inverse_real<T: Scalar>(grid: &TorusGrid, coeffs: &[Complex<T>]) -> Vec<T> {
    inverse(grid, coeffs).into_iter().map(|c| c.re).collect()
}
