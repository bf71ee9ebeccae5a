use std::sync::OnceLock;

use num_complex::Complex;

use super::fft;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Real samples of a scalar, vector or tensor field on a torus grid.
///
/// Components are stored one after another (`values[c * len + i]`). Fourier
/// coefficients are computed on first use and cached.
#[derive(Debug, Clone)]
pub struct Field<T: Scalar> {
    grid: TorusGrid,
    ncomp: usize,
    values: Vec<T>,
    spectrum: OnceLock<Vec<Complex<T>>>,
}

impl<T: Scalar> Field<T> {
    pub fn new(grid: TorusGrid, ncomp: usize, values: Vec<T>) -> Result<Self> {
        if ncomp == 0 || values.len() != ncomp * grid.len() {
            return Err(Error::ComponentMismatch(format!(
                "{} samples for {} components on {} points",
                values.len(),
                ncomp,
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::from_parts(grid, ncomp, values))
    }

    pub(crate) fn from_parts(grid: TorusGrid, ncomp: usize, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), ncomp * grid.len());
        Self {
            grid,
            ncomp,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: TorusGrid, ncomp: usize) -> Self {
        Self::from_parts(grid, ncomp, vec![T::zero(); ncomp * grid.len()])
    }

    pub fn constant(grid: TorusGrid, value: &[T]) -> Self {
        let len = grid.len();
        let values = value
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, len))
            .collect();
        Self::from_parts(grid, value.len(), values)
    }

    /// Samples `f(x, component)` at every grid point.
    pub fn from_fn<F: Fn([f64; 3], usize) -> f64>(grid: TorusGrid, ncomp: usize, f: F) -> Self {
        let len = grid.len();
        let mut values = Vec::with_capacity(ncomp * len);
        for c in 0..ncomp {
            values.extend((0..len).map(|i| T::lit(f(grid.point(i), c))));
        }
        Self::from_parts(grid, ncomp, values)
    }

    pub fn scalar_from_fn<F: Fn([f64; 3]) -> f64>(grid: TorusGrid, f: F) -> Self {
        Self::from_fn(grid, 1, |x, _| f(x))
    }

    /// Builds a real field from Fourier coefficients (component-major). The
    /// coefficients must be conjugate-symmetric; they are kept as the cache.
    pub fn from_spectrum(grid: TorusGrid, ncomp: usize, coeffs: Vec<Complex<T>>) -> Self {
        let len = grid.len();
        debug_assert_eq!(coeffs.len(), ncomp * len);
        let mut values = Vec::with_capacity(ncomp * len);
        for c in 0..ncomp {
            values.extend(fft::inverse_real(&grid, &coeffs[c * len..(c + 1) * len]));
        }
        let field = Self::from_parts(grid, ncomp, values);
        let _ = field.spectrum.set(coeffs);
        field
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[T] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    /// Extracts component `c` as a scalar field.
    pub fn component_field(&self, c: usize) -> Field<T> {
        let field = Self::from_parts(self.grid, 1, self.component(c).to_vec());
        if let Some(spec) = self.spectrum.get() {
            let len = self.grid.len();
            let _ = field.spectrum.set(spec[c * len..(c + 1) * len].to_vec());
        }
        field
    }

    /// Stacks scalar (or multi-component) fields into one field.
    pub fn stack(parts: &[&Field<T>]) -> Result<Field<T>> {
        let grid = *parts.first().ok_or_else(|| Error::ComponentMismatch("nothing to stack".into()))?.grid();
        let mut values = Vec::new();
        let mut ncomp = 0;
        for p in parts {
            if *p.grid() != grid {
                return Err(Error::GridMismatch);
            }
            ncomp += p.ncomp;
            values.extend_from_slice(&p.values);
        }
        Ok(Self::from_parts(grid, ncomp, values))
    }

    /// Cached Fourier coefficients, component-major.
    pub fn spectrum(&self) -> &[Complex<T>] {
        self.spectrum.get_or_init(|| {
            let mut out = Vec::with_capacity(self.values.len());
            for c in 0..self.ncomp {
                out.extend(fft::forward_real(&self.grid, self.component(c)));
            }
            out
        })
    }

    pub fn component_spectrum(&self, c: usize) -> &[Complex<T>] {
        let len = self.grid.len();
        &self.spectrum()[c * len..(c + 1) * len]
    }

    pub fn has_cached_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    /// Pointwise map over all samples.
    pub fn map(&self, f: impl Fn(T) -> T) -> Field<T> {
        Self::from_parts(self.grid, self.ncomp, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, alpha: T) -> Field<T> {
        self.map(|v| v * alpha)
    }

    fn check_same_shape(&self, other: &Field<T>) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.ncomp != other.ncomp {
            return Err(Error::ComponentMismatch(format!("{} vs {} components", self.ncomp, other.ncomp)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Field<T>) -> Result<Field<T>> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Ok(Self::from_parts(self.grid, self.ncomp, values))
    }

    pub fn sub(&self, other: &Field<T>) -> Result<Field<T>> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Ok(Self::from_parts(self.grid, self.ncomp, values))
    }

    /// Multiplies every component by the scalar field `s`.
    pub fn mul_scalar_field(&self, s: &Field<T>) -> Result<Field<T>> {
        if self.grid != s.grid {
            return Err(Error::GridMismatch);
        }
        if s.ncomp != 1 {
            return Err(Error::ComponentMismatch("multiplier must be scalar".into()));
        }
        let len = self.grid.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| v * s.values[i % len])
            .collect();
        Ok(Self::from_parts(self.grid, self.ncomp, values))
    }

    /// Divides every component by the scalar field `s`.
    pub fn div_scalar_field(&self, s: &Field<T>) -> Result<Field<T>> {
        let inv = s.map(|v| v.recip());
        self.mul_scalar_field(&inv)
    }

    /// Outer product: component `i * other.ncomp + j` is `self_i * other_j`.
    pub fn outer(&self, other: &Field<T>) -> Result<Field<T>> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let len = self.grid.len();
        let mut values = Vec::with_capacity(self.ncomp * other.ncomp * len);
        for i in 0..self.ncomp {
            let a = self.component(i);
            for j in 0..other.ncomp {
                let b = other.component(j);
                values.extend(a.iter().zip(b).map(|(&x, &y)| x * y));
            }
        }
        Ok(Self::from_parts(self.grid, self.ncomp * other.ncomp, values))
    }

    /// Transpose of a square tensor field.
    pub fn transpose(&self) -> Result<Field<T>> {
        let d = (self.ncomp as f64).sqrt().round() as usize;
        if d * d != self.ncomp {
            return Err(Error::ComponentMismatch("not a square tensor".into()));
        }
        let len = self.grid.len();
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..d {
            for j in 0..d {
                values.extend_from_slice(&self.values[(j * d + i) * len..(j * d + i + 1) * len]);
            }
        }
        Ok(Self::from_parts(self.grid, self.ncomp, values))
    }

    /// Pointwise contraction `sum_c a_c b_c` into a scalar field.
    pub fn contract(&self, other: &Field<T>) -> Result<Field<T>> {
        self.check_same_shape(other)?;
        let len = self.grid.len();
        let values = (0..len)
            .map(|i| (0..self.ncomp).fold(T::zero(), |acc, c| acc + self.values[c * len + i] * other.values[c * len + i]))
            .collect();
        Ok(Self::from_parts(self.grid, 1, values))
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude(&self) -> Field<T> {
        let len = self.grid.len();
        let values = (0..len)
            .map(|i| {
                (0..self.ncomp)
                    .fold(T::zero(), |acc, c| acc + self.values[c * len + i] * self.values[c * len + i])
                    .sqrt()
            })
            .collect();
        Self::from_parts(self.grid, 1, values)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// Bitwise equality of the samples.
    pub fn bit_eq(&self, other: &Field<T>) -> bool {
        self.grid == other.grid
            && self.ncomp == other.ncomp
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.as_f64().to_bits() == b.as_f64().to_bits())
    }
}
