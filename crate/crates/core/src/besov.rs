//! Besov shell coefficients `d_q = lambda_q^s ||f_q||_p`, norms, and the
//! localisation kernel `K^s_m` with its convolution `D_Q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fit_slope, Scalar};
use crate::spectral::{lambda, lp_norm, CutoffProfile, Field, ShellDecomposition};

/// Summation exponent `r` of `B^s_{p,r}`; `C0` is the closed subspace of
/// `B^s_{p,inf}` whose shell coefficients vanish at high frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    Finite(f64),
    Infinity,
    C0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: Summation,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: Summation) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidExponent(format!("smoothness {s} not in (0, 1]")));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidExponent(format!("integrability {p} < 1")));
        }
        if let Summation::Finite(r) = r {
            if !(r >= 1.0) {
                return Err(Error::InvalidExponent(format!("summation exponent {r} < 1")));
            }
        }
        Ok(Self { s, p, r })
    }
}

/// `d_q` for `q = -1..=q_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellCoefficients<T: Scalar> {
    pub params: BesovParams,
    coeffs: Vec<T>,
}

impl<T: Scalar> ShellCoefficients<T> {
    /// Wraps a raw sequence indexed from `q = -1`.
    pub fn from_sequence(params: BesovParams, coeffs: Vec<T>) -> Self {
        Self { params, coeffs }
    }

    pub fn q_max(&self) -> i32 {
        self.coeffs.len() as i32 - 2
    }

    pub fn get(&self, q: i32) -> T {
        if q < -1 {
            return T::zero();
        }
        self.coeffs.get((q + 1) as usize).copied().unwrap_or_else(T::zero)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.coeffs
    }

    /// `(q, d_q)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &d)| (i as i32 - 1, d))
    }

    /// Least-squares slope of `log2 d_q` against `q` over `q_lo..=q_hi`,
    /// ignoring vanishing coefficients.
    pub fn decay_slope(&self, q_lo: i32, q_hi: i32) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (q_lo..=q_hi)
            .map(|q| (q as f64, self.get(q).as_f64()))
            .filter(|(_, d)| *d > 0.0)
            .map(|(q, d)| (q, d.log2()))
            .unzip();
        fit_slope(&xs, &ys)
    }
}

/// Computes `d_q = lambda_q^s ||f_q||_{L^p}` from a precomputed decomposition.
pub fn shell_coefficients_of<T: Scalar>(
    shells: &ShellDecomposition<T>,
    params: BesovParams,
) -> Result<ShellCoefficients<T>> {
    let coeffs = shells
        .iter()
        .map(|(q, fq)| Ok(T::lit(lambda(q).powf(params.s)) * lp_norm(fq, params.p)?))
        .collect::<Result<Vec<T>>>()?;
    Ok(ShellCoefficients { params, coeffs })
}

pub fn shell_coefficients<T: Scalar>(
    f: &Field<T>,
    params: BesovParams,
    cutoff: &CutoffProfile,
) -> Result<ShellCoefficients<T>> {
    shell_coefficients_of(&ShellDecomposition::new(f, cutoff), params)
}

/// Value of a Besov norm. For `r = c0` the tail supremum over the top three
/// shells is reported alongside the `B^s_{p,inf}` norm as a decay diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovNorm<T: Scalar> {
    pub value: T,
    pub tail_sup: Option<T>,
}

pub fn sequence_norm<T: Scalar>(coeffs: &ShellCoefficients<T>) -> BesovNorm<T> {
    let sup = coeffs.as_slice().iter().fold(T::zero(), |m, &d| m.max(d));
    match coeffs.params.r {
        Summation::Infinity => BesovNorm { value: sup, tail_sup: None },
        Summation::C0 => {
            let start = coeffs.q_max() - 2;
            let tail = coeffs
                .iter()
                .filter(|(q, _)| *q >= start)
                .fold(T::zero(), |m, (_, d)| m.max(d));
            BesovNorm { value: sup, tail_sup: Some(tail) }
        }
        Summation::Finite(r) => {
            let rr = T::lit(r);
            let total: T = coeffs.as_slice().iter().map(|&d| d.powf(rr)).sum();
            BesovNorm { value: total.powf(rr.recip()), tail_sup: None }
        }
    }
}

pub fn besov_norm<T: Scalar>(f: &Field<T>, params: BesovParams, cutoff: &CutoffProfile) -> Result<BesovNorm<T>> {
    Ok(sequence_norm(&shell_coefficients(f, params, cutoff)?))
}

/// Localisation kernel `K^s_m`: `lambda_m^{s-1}` for `m >= 0`, `lambda_m^s` for `m < 0`.
pub fn kernel(s: f64, m: i32) -> f64 {
    if m >= 0 {
        lambda(m).powf(s - 1.0)
    } else {
        lambda(m).powf(s)
    }
}

/// Closed form of `sum_{m in Z} K^s_m` for `s in (0, 1)`.
pub fn kernel_sum(s: f64) -> f64 {
    let up = 1.0 / (1.0 - 2f64.powf(s - 1.0));
    let down = 2f64.powf(-s) / (1.0 - 2f64.powf(-s));
    up + down
}

/// Closed form of `sum_{m > depth} K^s_m` (the part of the kernel more than
/// `depth` levels below the output scale).
pub fn kernel_tail_above(s: f64, depth: i32) -> f64 {
    let r = 2f64.powf(s - 1.0);
    r.powi(depth + 1) / (1.0 - r)
}

/// `D_Q = sum_q K^s_{Q-q} d_q` for `Q = -1..=q_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedSum<T: Scalar> {
    pub s: f64,
    values: Vec<T>,
}

impl<T: Scalar> LocalizedSum<T> {
    pub fn get(&self, q: i32) -> T {
        if q < -1 {
            return T::zero();
        }
        self.values.get((q + 1) as usize).copied().unwrap_or_else(T::zero)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        self.values.iter().enumerate().map(|(i, &d)| (i as i32 - 1, d))
    }
}

pub fn localized_sum<T: Scalar>(coeffs: &ShellCoefficients<T>) -> LocalizedSum<T> {
    let s = coeffs.params.s;
    let q_max = coeffs.q_max();
    let values = (-1..=q_max)
        .map(|big_q| {
            coeffs
                .iter()
                .map(|(q, d)| T::lit(kernel(s, big_q - q)) * d)
                .fold(T::zero(), |acc, v| acc + v)
        })
        .collect();
    LocalizedSum { s, values }
}

/// Finite-lattice stand-in for `limsup D ~ limsup d`: tail maxima of both
/// sequences together with the kernel-sum bounds that must bracket them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailComparison {
    pub tail_start: i32,
    pub window: i32,
    pub max_localized: f64,
    pub max_coeff_tail: f64,
    /// `max_{q >= Q0 - window} d_q`
    pub max_coeff_window: f64,
    pub max_coeff_all: f64,
    /// `max_{Q >= Q0} D_Q >= lower_bound`
    pub lower_bound: f64,
    /// `max_{Q >= Q0} D_Q <= upper_bound`
    pub upper_bound: f64,
}

impl TailComparison {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * self.upper_bound.abs().max(1.0);
        self.max_localized + slack >= self.lower_bound && self.max_localized <= self.upper_bound + slack
    }
}

pub fn tail_comparison<T: Scalar>(coeffs: &ShellCoefficients<T>, tail_start: i32, window: i32) -> TailComparison {
    let s = coeffs.params.s;
    let local = localized_sum(coeffs);
    let max_localized = local
        .iter()
        .filter(|(q, _)| *q >= tail_start)
        .fold(0.0f64, |m, (_, v)| m.max(v.as_f64()));
    let tail_max = |from: i32| {
        coeffs
            .iter()
            .filter(|(q, _)| *q >= from)
            .fold(0.0f64, |m, (_, d)| m.max(d.as_f64()))
    };
    let max_coeff_tail = tail_max(tail_start);
    let max_coeff_window = tail_max(tail_start - window);
    let max_coeff_all = tail_max(-1);
    TailComparison {
        tail_start,
        window,
        max_localized,
        max_coeff_tail,
        max_coeff_window,
        max_coeff_all,
        lower_bound: kernel(s, 0) * max_coeff_tail,
        upper_bound: kernel_sum(s) * max_coeff_window + kernel_tail_above(s, window) * max_coeff_all,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    fn params(s: f64, p: f64, r: Summation) -> BesovParams {
        BesovParams::new(s, p, r).unwrap()
    }

    #[test]
    fn single_sharp_mode_coefficients() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = Field::<f64>::scalar_from_fn(g, |x| (2.0 * PI * 3.0 * x[0]).cos());
        let c = shell_coefficients(&f, params(1.0 / 3.0, 2.0, Summation::Infinity), &CutoffProfile::sharp()).unwrap();
        let expected = 4f64.powf(1.0 / 3.0) / 2f64.sqrt();
        for (q, d) in c.iter() {
            if q == 2 {
                assert!((d - expected).abs() < 1e-12);
            } else {
                assert!(d.abs() < 1e-12);
            }
        }
        let norm = sequence_norm(&c);
        assert!((norm.value - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_and_constant_fields() {
        let g = TorusGrid::new(2, 16).unwrap();
        let z = Field::<f64>::zeros(g, 1);
        let p = params(1.0 / 3.0, 3.0, Summation::Infinity);
        for cutoff in [CutoffProfile::smooth(), CutoffProfile::sharp()] {
            assert!(shell_coefficients(&z, p, &cutoff).unwrap().as_slice().iter().all(|&d| d == 0.0));
            assert_eq!(besov_norm(&z, p, &cutoff).unwrap().value, 0.0);
            let five = Field::<f64>::constant(g, &[5.0]);
            let c = shell_coefficients(&five, p, &cutoff).unwrap();
            assert!((c.get(-1) - 5.0 * 2f64.powf(-1.0 / 3.0)).abs() < 1e-12);
            assert!(c.iter().skip(1).all(|(_, d)| d.abs() < 1e-12));
        }
    }

    #[test]
    fn kernel_sum_closed_form() {
        for s in [0.1, 1.0 / 3.0, 0.5, 0.9] {
            let mut total = 0.0;
            for m in -400..=400 {
                assert!(kernel(s, m) > 0.0);
                total += kernel(s, m);
            }
            assert!((total - kernel_sum(s)).abs() <= 1e-12 * kernel_sum(s), "s = {s}");
            let tail: f64 = (4..2000).map(|m| kernel(s, m)).sum();
            assert!((tail - kernel_tail_above(s, 3)).abs() < 1e-12);
        }
    }

    #[test]
    fn localized_sum_of_single_coefficient() {
        let p = params(1.0 / 3.0, 2.0, Summation::Infinity);
        let mut seq = vec![0.0f64; 8];
        seq[3] = 1.0; // q = 2
        let c = ShellCoefficients::from_sequence(p, seq);
        let d = localized_sum(&c);
        for (q, v) in d.iter() {
            assert!((v - kernel(1.0 / 3.0, q - 2)).abs() < 1e-15);
        }
    }

    #[test]
    fn localized_sum_bounded_by_kernel_sum() {
        let s = 1.0 / 3.0;
        let c = ShellCoefficients::from_sequence(params(s, 2.0, Summation::Infinity), vec![1.0f64; 9]);
        let d = localized_sum(&c);
        for (_, v) in d.iter() {
            assert!(v <= kernel_sum(s));
            assert!(v >= 1.0);
        }
    }

    #[test]
    fn tail_comparison_brackets() {
        let s = 1.0 / 3.0;
        let p = params(s, 2.0, Summation::C0);
        for seq in [
            vec![1.0, 0.5, 2.0, 0.1, 0.3, 0.05, 0.01, 0.02, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0],
            (0..9).map(|q| 2f64.powf(-(q as f64) / 3.0)).collect(),
        ] {
            let c = ShellCoefficients::from_sequence(p, seq);
            for q0 in 0..7 {
                for window in 0..3 {
                    let t = tail_comparison(&c, q0, window);
                    assert!(t.holds(), "{t:?}");
                }
            }
        }
    }

    #[test]
    fn ell_infinity_below_ell_one() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = Field::<f64>::scalar_from_fn(g, |x| (2.0 * PI * x[0]).sin().powi(3) + (9.0 * x[1]).sin());
        let c = CutoffProfile::smooth();
        let inf = besov_norm(&f, params(1.0 / 3.0, 3.0, Summation::Infinity), &c).unwrap();
        let one = besov_norm(&f, params(1.0 / 3.0, 3.0, Summation::Finite(1.0)), &c).unwrap();
        assert!(inf.value <= one.value);
        let c0 = besov_norm(&f, params(1.0 / 3.0, 3.0, Summation::C0), &c).unwrap();
        assert_eq!(c0.value, inf.value);
        assert!(c0.tail_sup.unwrap() <= c0.value);
    }

    #[test]
    fn validates_parameters() {
        assert!(BesovParams::new(0.0, 2.0, Summation::Infinity).is_err());
        assert!(BesovParams::new(1.5, 2.0, Summation::Infinity).is_err());
        assert!(BesovParams::new(0.5, 0.5, Summation::Infinity).is_err());
        assert!(BesovParams::new(0.5, 2.0, Summation::Finite(0.5)).is_err());
        assert!(BesovParams::new(1.0, f64::INFINITY, Summation::C0).is_ok());
    }
}
