//! Spectral differential operators, quadrature and projections on fields.

use num_complex::Complex;

use super::field::Field;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, pairwise_sum_by, Scalar};

fn two_pi<T: Scalar>() -> T {
    T::lit(2.0) * T::PI()
}

fn require_same_grid<T: Scalar>(a: &Field<T>, b: &Field<T>) -> Result<()> {
    if a.grid() != b.grid() {
        Err(Error::GridMismatch)
    } else {
        Ok(())
    }
}

/// Gradient. For an `m`-component field the result has `m * d` components with
/// `(i, j) -> i * d + j` holding `d f_i / d x_j`.
pub fn gradient<T: Scalar>(f: &Field<T>) -> Field<T> {
    let grid = *f.grid();
    let d = grid.dim();
    let len = grid.len();
    let tp = two_pi::<T>();
    let mut coeffs = Vec::with_capacity(f.ncomp() * d * len);
    for c in 0..f.ncomp() {
        let spec = f.component_spectrum(c);
        for j in 0..d {
            coeffs.extend(spec.iter().enumerate().map(|(i, &v)| {
                let k = grid.derivative_wavevector(i)[j];
                v * Complex::new(T::zero(), tp * T::lit(k as f64))
            }));
        }
    }
    Field::from_spectrum(grid, f.ncomp() * d, coeffs)
}

/// Divergence over the last index: a vector gives a scalar, a `d x d` tensor
/// `F_ij` gives the vector `sum_j d_j F_ij`.
pub fn divergence<T: Scalar>(f: &Field<T>) -> Result<Field<T>> {
    let grid = *f.grid();
    let d = grid.dim();
    if !f.ncomp().is_multiple_of(d) {
        return Err(Error::ComponentMismatch(format!(
            "divergence of a {}-component field in {} dimensions",
            f.ncomp(),
            d
        )));
    }
    let rows = f.ncomp() / d;
    let len = grid.len();
    let tp = two_pi::<T>();
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); rows * len];
    for r in 0..rows {
        for j in 0..d {
            let spec = f.component_spectrum(r * d + j);
            for (i, out) in coeffs[r * len..(r + 1) * len].iter_mut().enumerate() {
                let k = grid.derivative_wavevector(i)[j];
                *out = *out + spec[i] * Complex::new(T::zero(), tp * T::lit(k as f64));
            }
        }
    }
    Ok(Field::from_spectrum(grid, rows, coeffs))
}

/// Componentwise Laplacian.
pub fn laplacian<T: Scalar>(f: &Field<T>) -> Field<T> {
    let grid = *f.grid();
    let tp = two_pi::<T>();
    let len = grid.len();
    let coeffs = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(i, &v)| v * (-(tp * tp) * T::lit(grid.wavenumber_sq(i % len) as f64)))
        .collect();
    Field::from_spectrum(grid, f.ncomp(), coeffs)
}

/// Inverse Laplacian on mean-zero data (the `k = 0` mode is set to zero).
pub fn inverse_laplacian<T: Scalar>(f: &Field<T>) -> Field<T> {
    let grid = *f.grid();
    let tp = two_pi::<T>();
    let len = grid.len();
    let coeffs = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let k2 = grid.wavenumber_sq(i % len);
            if k2 == 0 {
                Complex::new(T::zero(), T::zero())
            } else {
                v / (-(tp * tp) * T::lit(k2 as f64))
            }
        })
        .collect();
    Field::from_spectrum(grid, f.ncomp(), coeffs)
}

/// `L^p` norm by midpoint quadrature of the pointwise Euclidean magnitude;
/// `p = inf` is the grid maximum.
pub fn lp_norm<T: Scalar>(f: &Field<T>, p: f64) -> Result<T> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(format!("L^p exponent {p} < 1")));
    }
    let mag = if f.ncomp() == 1 {
        f.map(|v| v.abs())
    } else {
        f.magnitude()
    };
    if p.is_infinite() {
        return Ok(mag.max_abs());
    }
    let cv = T::lit(f.grid().cell_volume());
    let vals = mag.values();
    let total = if p == 2.0 {
        pairwise_sum_by(vals.len(), |i| vals[i] * vals[i])
    } else if p == 1.0 {
        pairwise_sum(vals)
    } else {
        let pp = T::lit(p);
        pairwise_sum_by(vals.len(), |i| vals[i].powf(pp))
    };
    Ok((cv * total).powf(T::lit(p).recip()))
}

/// `int f` over the torus, per component.
pub fn integral<T: Scalar>(f: &Field<T>) -> Vec<T> {
    let cv = T::lit(f.grid().cell_volume());
    (0..f.ncomp()).map(|c| cv * pairwise_sum(f.component(c))).collect()
}

/// `int f . g` (full contraction over components).
pub fn inner<T: Scalar>(f: &Field<T>, g: &Field<T>) -> Result<T> {
    require_same_grid(f, g)?;
    if f.ncomp() != g.ncomp() {
        return Err(Error::ComponentMismatch("inner product of mismatched fields".into()));
    }
    let cv = T::lit(f.grid().cell_volume());
    let (a, b) = (f.values(), g.values());
    Ok(cv * pairwise_sum_by(a.len(), |i| a[i] * b[i]))
}

/// Leray projection onto divergence-free vector fields. Nyquist components are
/// treated like the derivative multipliers so the result stays real and has
/// zero discrete divergence.
pub fn leray_project<T: Scalar>(u: &Field<T>) -> Result<Field<T>> {
    let grid = *u.grid();
    let d = grid.dim();
    if u.ncomp() != d {
        return Err(Error::ComponentMismatch("Leray projection needs a vector field".into()));
    }
    let len = grid.len();
    let spec = u.spectrum();
    let mut out = spec.to_vec();
    for i in 0..len {
        let k = grid.derivative_wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0 {
            continue;
        }
        if d == 1 {
            // every nonzero mode is longitudinal; subtracting would leave round-off
            out[i] = Complex::new(T::zero(), T::zero());
            continue;
        }
        let mut dot = Complex::new(T::zero(), T::zero());
        for j in 0..d {
            dot = dot + spec[j * len + i] * T::lit(k[j] as f64);
        }
        let scale = T::lit(k2 as f64).recip();
        for j in 0..d {
            out[j * len + i] = out[j * len + i] - dot * (T::lit(k[j] as f64) * scale);
        }
    }
    Ok(Field::from_spectrum(grid, d, out))
}

/// `max_k |k . u_hat(k)| / ||u_hat||_2`, the divergence defect of a vector field.
pub fn divergence_defect<T: Scalar>(u: &Field<T>) -> Result<f64> {
    let grid = *u.grid();
    let d = grid.dim();
    if u.ncomp() != d {
        return Err(Error::ComponentMismatch("divergence defect needs a vector field".into()));
    }
    let len = grid.len();
    let spec = u.spectrum();
    let norm = spec.iter().map(|c| c.norm_sqr().as_f64()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for i in 0..len {
        let k = grid.derivative_wavevector(i);
        let mut dot = Complex::new(0.0, 0.0);
        for j in 0..d {
            let c = spec[j * len + i];
            dot += Complex::new(c.re.as_f64(), c.im.as_f64()) * k[j] as f64;
        }
        worst = worst.max(dot.norm());
    }
    Ok(worst / norm)
}

/// Zeroes modes with any `|k_i| > N/3` (2/3-rule truncation).
pub fn dealias<T: Scalar>(f: &Field<T>) -> Field<T> {
    let grid = *f.grid();
    let len = grid.len();
    let cut = (grid.points_per_axis() / 3) as i64;
    let coeffs = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let k = grid.wavevector(i % len);
            if k.iter().any(|c| c.abs() > cut) {
                Complex::new(T::zero(), T::zero())
            } else {
                v
            }
        })
        .collect();
    Field::from_spectrum(grid, f.ncomp(), coeffs)
}

/// Lag correlation `C(l) = int a(r) b(r + l) dr` for every lattice lag `l`,
/// returned as a field indexed by the lag. Both inputs must be scalar.
pub fn correlation<T: Scalar>(a: &Field<T>, b: &Field<T>) -> Result<Field<T>> {
    require_same_grid(a, b)?;
    if a.ncomp() != 1 || b.ncomp() != 1 {
        return Err(Error::ComponentMismatch("correlation of scalar fields only".into()));
    }
    let coeffs = a
        .spectrum()
        .iter()
        .zip(b.spectrum())
        .map(|(x, y)| x.conj() * y)
        .collect();
    Ok(Field::from_spectrum(*a.grid(), 1, coeffs))
}

/// Trigonometric interpolation of a scalar field onto a grid `factor` times
/// finer. Nyquist coefficients are split evenly between `+-N/2`.
pub fn refine<T: Scalar>(f: &Field<T>, factor: usize) -> Result<Field<T>> {
    if f.ncomp() != 1 {
        return Err(Error::ComponentMismatch("refinement of scalar fields only".into()));
    }
    let grid = *f.grid();
    let fine = TorusGrid::new(grid.dim(), grid.points_per_axis() * factor)?;
    let nyq = (grid.points_per_axis() / 2) as i64;
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); fine.len()];
    for (i, &c) in f.spectrum().iter().enumerate() {
        let k = grid.wavevector(i);
        let axes: Vec<usize> = (0..grid.dim()).filter(|&a| k[a] == nyq).collect();
        let copies = 1usize << axes.len();
        let share = c / T::from_count(copies);
        for mask in 0..copies {
            let mut kk = k;
            for (b, &a) in axes.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    kk[a] = -nyq;
                }
            }
            let j = fine.index_of_wavevector(kk);
            coeffs[j] = coeffs[j] + share;
        }
    }
    Ok(Field::from_spectrum(fine, 1, coeffs))
}

struct Interpolant {
    dim: usize,
    modes: Vec<([f64; 3], f64, f64)>,
}

impl Interpolant {
    // value, gradient and Hessian of the trigonometric interpolant at `x`
    fn eval(&self, x: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let tau = 2.0 * std::f64::consts::PI;
        let (mut v, mut g, mut h) = (0.0, [0.0; 3], [[0.0; 3]; 3]);
        for &(k, re, im) in &self.modes {
            let arg = tau * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            let (s, c) = arg.sin_cos();
            let val = re * c - im * s;
            let der = -(re * s + im * c);
            v += val;
            for a in 0..self.dim {
                g[a] += tau * k[a] * der;
                for b in 0..self.dim {
                    h[a][b] -= tau * tau * k[a] * k[b] * val;
                }
            }
        }
        (v, g, h)
    }

    fn polish(&self, mut x: [f64; 3], spacing: f64) -> f64 {
        let mut best = self.eval(x).0;
        for _ in 0..30 {
            let (_, g, h) = self.eval(x);
            let Some(step) = solve_small(self.dim, h, g) else { break };
            let len = step.iter().map(|s| s * s).sum::<f64>().sqrt();
            if !len.is_finite() || len > spacing {
                break;
            }
            for a in 0..self.dim {
                x[a] -= step[a];
            }
            best = self.eval(x).0;
            if len < 1e-15 {
                break;
            }
        }
        best
    }
}

fn solve_small(dim: usize, mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..dim {
        let p = (c..dim).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..dim {
            let f = a[r][c] / a[c][c];
            for k in c..dim {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..dim).rev() {
        let tail: f64 = (c + 1..dim).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - tail) / a[c][c];
    }
    Some(x)
}

/// Minimum and maximum of the trigonometric interpolant of a scalar field.
///
/// Every local extremum of a 4x refined grid that could hold the global one
/// is polished by Newton steps on the interpolant, so the result does not
/// depend on where the extremum sits relative to the grid.
pub fn extrema<T: Scalar>(f: &Field<T>) -> Result<(f64, f64)> {
    let fine = refine(f, 4)?;
    let grid = *fine.grid();
    let mut kmax_sq = 0i64;
    let mut amplitude = 0.0;
    let modes: Vec<_> = fine
        .spectrum()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != T::zero() || c.im != T::zero())
        .map(|(i, c)| {
            let k = grid.wavevector(i);
            kmax_sq = kmax_sq.max(grid.wavenumber_sq(i));
            amplitude += (c.re.as_f64().powi(2) + c.im.as_f64().powi(2)).sqrt();
            ([k[0] as f64, k[1] as f64, k[2] as f64], c.re.as_f64(), c.im.as_f64())
        })
        .collect();
    let interp = Interpolant { dim: grid.dim(), modes };
    let h = grid.spacing();
    // bound on how far a grid sample can sit below the extremum it approximates
    let slack = 0.5 * std::f64::consts::TAU.powi(2) * kmax_sq as f64 * amplitude * grid.dim() as f64 * h * h / 4.0;
    let v: Vec<f64> = fine.values().iter().map(|x| x.as_f64()).collect();
    let neighbours = |i: usize| {
        (0..grid.dim()).flat_map(move |a| {
            [1, -1].map(|s| {
                let mut lag = [0i64; 3];
                lag[a] = s;
                grid.shifted_index(i, lag)
            })
        })
    };
    let search = |sign: f64| {
        let top = v.iter().fold(f64::NEG_INFINITY, |b, &x| b.max(sign * x));
        let mut best = top;
        for i in 0..v.len() {
            let here = sign * v[i];
            if here < top - slack || neighbours(i).any(|j| sign * v[j] > here) {
                continue;
            }
            best = best.max(sign * interp.polish(grid.point(i), h));
        }
        sign * best
    };
    Ok((search(-1.0), search(1.0)))
}
