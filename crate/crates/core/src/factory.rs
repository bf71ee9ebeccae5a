//! Deterministic test-state generators.
//!
//! Random numbers come from a counter-based SplitMix64: the `counter`-th
//! draw of stream `stream` under `seed` is
//! `splitmix64(splitmix64(seed ^ stream * 0xD1B54A32D192ED03) + counter * 0x9E3779B97F4A7C15)`,
//! mapped to `[0, 1)` through its top 53 bits. Draws are keyed by the Fourier
//! index, so a field does not depend on generation order or thread count.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::budget::SolutionState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{lambda, leray_project, lp_norm, CutoffProfile, Field, TorusGrid};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_MIX: u64 = 0xD1B5_4A32_D192_ED03;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)`.
pub fn counter_uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    let key = splitmix64(seed ^ stream.wrapping_mul(STREAM_MIX));
    let bits = splitmix64(key.wrapping_add(counter.wrapping_mul(GOLDEN)));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// How rough the random part of a density profile is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySmoothness {
    /// Modes `0 < |k| <= kmax` with amplitude `|k|^-2`.
    Smooth { kmax: u32 },
    /// A scalar random field saturating `B^s_{inf,inf}`.
    Besov { s: f64 },
}

impl Default for DensitySmoothness {
    fn default() -> Self {
        DensitySmoothness::Smooth { kmax: 4 }
    }
}

fn default_one() -> f64 {
    1.0
}

/// Serializable description of a generated field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Constant per component (a single value is broadcast).
    Constant { value: Vec<f64> },
    /// `amplitude_c * cos(2 pi k.x + phase)`.
    SingleMode {
        wavevector: Vec<i64>,
        amplitude: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    /// Decaying Taylor-Green velocity at time `t` (two dimensions).
    TaylorGreen {
        #[serde(default)]
        mu: f64,
        #[serde(default)]
        t: f64,
        #[serde(default = "default_one")]
        amplitude: f64,
    },
    RandomBesov(RandomBesovSpec),
    DensityProfile {
        contrast: f64,
        #[serde(default)]
        smoothness: DensitySmoothness,
        seed: u64,
    },
}

/// Random-phase field whose sharp-shell coefficients are
/// `lambda_q^s ||f_q||_p = amplitude * lambda_q^{-sigma}` on the band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBesovSpec {
    pub s: f64,
    pub p: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_one")]
    pub amplitude: f64,
    pub seed: u64,
    #[serde(default)]
    pub divergence_free: bool,
    /// Lowest populated shell (default 0).
    #[serde(default)]
    pub q_lo: Option<i32>,
    /// Highest populated shell (default `q_max - 1`).
    #[serde(default)]
    pub q_hi: Option<i32>,
}

impl RandomBesovSpec {
    pub fn new(s: f64, p: f64, sigma: f64, seed: u64) -> Self {
        Self {
            s,
            p,
            sigma,
            amplitude: 1.0,
            seed,
            divergence_free: false,
            q_lo: None,
            q_hi: None,
        }
    }

    pub fn divergence_free(mut self, yes: bool) -> Self {
        self.divergence_free = yes;
        self
    }

    pub fn band(mut self, q_lo: i32, q_hi: i32) -> Self {
        self.q_lo = Some(q_lo);
        self.q_hi = Some(q_hi);
        self
    }

    pub fn amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

fn broadcast(values: &[f64], components: usize, what: &str) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; components]),
        n if n == components => Ok(values.to_vec()),
        n => Err(Error::ComponentMismatch(format!("{what}: {n} values for {components} components"))),
    }
}

impl GeneratorSpec {
    /// Samples the described field with `components` components.
    pub fn generate<T: Scalar>(&self, grid: TorusGrid, components: usize) -> Result<Field<T>> {
        match self {
            GeneratorSpec::Constant { value } => {
                let v: Vec<T> = broadcast(value, components, "constant")?.into_iter().map(T::lit).collect();
                Ok(Field::constant(grid, &v))
            }
            GeneratorSpec::SingleMode { wavevector, amplitude, phase } => {
                if wavevector.len() != grid.dim() {
                    return Err(Error::Dimension(format!(
                        "wavevector of length {} on a {}-dimensional grid",
                        wavevector.len(),
                        grid.dim()
                    )));
                }
                let amp = broadcast(amplitude, components, "single_mode amplitude")?;
                let mut k = [0i64; 3];
                k[..grid.dim()].copy_from_slice(wavevector);
                Ok(single_mode(grid, k, &amp, *phase))
            }
            GeneratorSpec::TaylorGreen { mu, t, amplitude } => {
                if components != 2 {
                    return Err(Error::ComponentMismatch("Taylor-Green velocity has 2 components".into()));
                }
                taylor_green_velocity(grid, *mu, *t, *amplitude)
            }
            GeneratorSpec::RandomBesov(spec) => random_besov(grid, spec, components),
            GeneratorSpec::DensityProfile { contrast, smoothness, seed } => {
                if components != 1 {
                    return Err(Error::ComponentMismatch("density profile is scalar".into()));
                }
                density_profile(grid, *contrast, *smoothness, *seed)
            }
        }
    }
}

pub fn single_mode<T: Scalar>(grid: TorusGrid, k: [i64; 3], amplitude: &[f64], phase: f64) -> Field<T> {
    Field::from_fn(grid, amplitude.len(), |x, c| {
        let arg = 2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]) + phase;
        amplitude[c] * arg.cos()
    })
}

fn require_2d(grid: &TorusGrid) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::Dimension(format!(
            "Taylor-Green data is two-dimensional, grid has d = {}",
            grid.dim()
        )));
    }
    Ok(())
}

/// `u = A e^{-8 pi^2 mu t} (sin 2pi x cos 2pi y, -cos 2pi x sin 2pi y)`.
pub fn taylor_green_velocity<T: Scalar>(grid: TorusGrid, mu: f64, t: f64, amplitude: f64) -> Result<Field<T>> {
    require_2d(&grid)?;
    let decay = amplitude * (-8.0 * PI * PI * mu * t).exp();
    Ok(Field::from_fn(grid, 2, |x, c| {
        let (a, b) = (2.0 * PI * x[0], 2.0 * PI * x[1]);
        if c == 0 {
            decay * a.sin() * b.cos()
        } else {
            -decay * a.cos() * b.sin()
        }
    }))
}

/// Matching pressure `A^2 e^{-16 pi^2 mu t} (cos 4pi x + cos 4pi y) / 4` for unit density.
pub fn taylor_green_pressure<T: Scalar>(grid: TorusGrid, mu: f64, t: f64, amplitude: f64) -> Result<Field<T>> {
    require_2d(&grid)?;
    let decay = amplitude * amplitude * (-16.0 * PI * PI * mu * t).exp();
    Ok(Field::scalar_from_fn(grid, |x| {
        0.25 * decay * ((4.0 * PI * x[0]).cos() + (4.0 * PI * x[1]).cos())
    }))
}

/// Exact decaying Taylor-Green state with `rho = 1` and no forcing.
pub fn taylor_green<T: Scalar>(grid: TorusGrid, mu: f64, t: f64) -> Result<SolutionState<T>> {
    let u = taylor_green_velocity(grid, mu, t, 1.0)?;
    let p = taylor_green_pressure(grid, mu, t, 1.0)?;
    let rho = Field::constant(grid, &[T::one()]);
    SolutionState::new(rho, u, mu, t)?.with_pressure(p)
}

fn sharp_shell_of(k_sq: i64) -> i32 {
    if k_sq == 0 {
        return -1;
    }
    let mut q = 0;
    while (1i64 << (2 * q)) < k_sq {
        q += 1;
    }
    q
}

/// Unit-modulus random phases on every non-Nyquist mode of the band.
fn random_phase_spectrum<T: Scalar>(
    grid: &TorusGrid,
    components: usize,
    seed: u64,
    stream: u64,
    weight: impl Fn(i64) -> f64,
) -> Vec<Complex<T>> {
    let len = grid.len();
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); components * len];
    for c in 0..components {
        for i in 0..len {
            let j = grid.conjugate_index(i);
            if j < i || grid.is_nyquist(i) {
                continue;
            }
            let k2 = grid.wavenumber_sq(i);
            let w = weight(k2);
            if k2 == 0 || w == 0.0 {
                continue;
            }
            let theta = 2.0 * PI * counter_uniform(seed, stream + c as u64, i as u64);
            let z = Complex::from_polar(w, theta);
            coeffs[c * len + i] = Complex::new(T::lit(z.re), T::lit(z.im));
            coeffs[c * len + j] = Complex::new(T::lit(z.re), T::lit(-z.im));
        }
    }
    coeffs
}

/// Random-phase field with prescribed sharp-shell Besov coefficients.
pub fn random_besov<T: Scalar>(grid: TorusGrid, spec: &RandomBesovSpec, components: usize) -> Result<Field<T>> {
    if !(spec.sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("shell decay sigma = {} < 0", spec.sigma)));
    }
    if !(spec.p >= 1.0) {
        return Err(Error::InvalidExponent(format!("integrability {} < 1", spec.p)));
    }
    if spec.divergence_free && components != grid.dim() {
        return Err(Error::ComponentMismatch("divergence-free output must be a vector field".into()));
    }
    let q_max = grid.q_max();
    let q_lo = spec.q_lo.unwrap_or(0).max(0);
    let q_hi = spec.q_hi.unwrap_or(q_max - 1).min(q_max);
    let len = grid.len();
    let raw = random_phase_spectrum::<T>(&grid, components, spec.seed, 0, |k2| {
        let q = sharp_shell_of(k2);
        if q >= q_lo && q <= q_hi {
            1.0
        } else {
            0.0
        }
    });
    let mut base = Field::from_spectrum(grid, components, raw);
    if spec.divergence_free {
        base = leray_project(&base)?;
    }
    let spectrum = base.spectrum().to_vec();
    let sharp = CutoffProfile::sharp();
    let mut total = vec![Complex::new(T::zero(), T::zero()); components * len];
    for q in q_lo..=q_hi {
        let shell: Vec<Complex<T>> = spectrum
            .iter()
            .enumerate()
            .map(|(i, &c)| if sharp.shell(grid.wavenumber_sq(i % len), q) == 1.0 { c } else { Complex::new(T::zero(), T::zero()) })
            .collect();
        let shell_field = Field::from_spectrum(grid, components, shell.clone());
        let norm = lp_norm(&shell_field, spec.p)?.as_f64();
        if norm == 0.0 {
            continue;
        }
        let target = spec.amplitude * lambda(q).powf(-spec.s - spec.sigma);
        let scale = T::lit(target / norm);
        for (acc, c) in total.iter_mut().zip(shell) {
            *acc = *acc + c * scale;
        }
    }
    Ok(Field::from_spectrum(grid, components, total))
}

/// `rho = 1 + A g` with `g` a normalised random field, `max |g| = 1` on the grid.
pub fn density_profile<T: Scalar>(
    grid: TorusGrid,
    contrast: f64,
    smoothness: DensitySmoothness,
    seed: u64,
) -> Result<Field<T>> {
    if !(0.0..1.0).contains(&contrast) {
        return Err(Error::InvalidParameter(format!("density contrast {contrast} not in [0, 1)")));
    }
    if contrast == 0.0 {
        return Ok(Field::constant(grid, &[T::one()]));
    }
    let g: Field<T> = match smoothness {
        DensitySmoothness::Smooth { kmax } => {
            let kmax_sq = (kmax as i64) * (kmax as i64);
            let coeffs = random_phase_spectrum::<T>(&grid, 1, seed, 1 << 20, |k2| {
                if k2 <= kmax_sq {
                    (k2 as f64).recip()
                } else {
                    0.0
                }
            });
            Field::from_spectrum(grid, 1, coeffs)
        }
        DensitySmoothness::Besov { s } => {
            random_besov(grid, &RandomBesovSpec::new(s, f64::INFINITY, 0.0, seed ^ (1 << 40)), 1)?
        }
    };
    let peak = g.max_abs();
    if peak == T::zero() {
        return Ok(Field::constant(grid, &[T::one()]));
    }
    let a = T::lit(contrast) / peak;
    Ok(g.map(|v| T::one() + a * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::besov::{shell_coefficients, BesovParams, Summation};
    use crate::spectral::divergence_defect;

    #[test]
    fn rng_is_deterministic_and_uniformish() {
        let a: Vec<f64> = (0..1000).map(|i| counter_uniform(7, 0, i)).collect();
        let b: Vec<f64> = (0..1000).map(|i| counter_uniform(7, 0, i)).collect();
        assert_eq!(a, b);
        let mean = a.iter().sum::<f64>() / 1000.0;
        assert!((mean - 0.5).abs() < 0.05);
        assert!(a.iter().all(|v| (0.0..1.0).contains(v)));
        assert_ne!(counter_uniform(7, 0, 1), counter_uniform(8, 0, 1));
        assert_ne!(counter_uniform(7, 0, 1), counter_uniform(7, 1, 1));
    }

    #[test]
    fn taylor_green_energy() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u: Field<f64> = taylor_green_velocity(g, 0.3, 0.0, 1.0).unwrap();
        let n2 = lp_norm(&u, 2.0).unwrap();
        assert!((n2 * n2 - 0.5).abs() < 1e-14);
        assert!(taylor_green_velocity::<f64>(TorusGrid::new(3, 8).unwrap(), 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn random_besov_shell_targets_are_exact_for_sharp_cutoff() {
        let g = TorusGrid::new(2, 64).unwrap();
        let spec = RandomBesovSpec::new(1.0 / 3.0, 3.0, 1.0 / 3.0, 11).amplitude(0.7);
        let f: Field<f64> = random_besov(g, &spec, 1).unwrap();
        let c = shell_coefficients(&f, BesovParams::new(1.0 / 3.0, 3.0, Summation::Infinity).unwrap(), &CutoffProfile::sharp()).unwrap();
        for q in 0..g.q_max() {
            let expected = 0.7 * lambda(q).powf(-1.0 / 3.0);
            assert!((c.get(q) - expected).abs() < 1e-12 * expected.max(1.0), "q={q}");
        }
        assert!(c.get(-1).abs() < 1e-14);
        assert!(c.get(g.q_max()).abs() < 1e-14);
    }

    #[test]
    fn random_besov_divergence_free_and_deterministic() {
        let g = TorusGrid::new(2, 32).unwrap();
        let spec = RandomBesovSpec::new(1.0 / 3.0, 3.0, 0.0, 5).divergence_free(true);
        let u: Field<f64> = random_besov(g, &spec, 2).unwrap();
        assert!(divergence_defect(&u).unwrap() <= 1e-12);
        let v: Field<f64> = random_besov(g, &spec, 2).unwrap();
        assert!(u.bit_eq(&v));
        let w: Field<f64> = random_besov(g, &RandomBesovSpec { seed: 6, ..spec }, 2).unwrap();
        assert!(!u.bit_eq(&w));
    }

    #[test]
    fn density_bounds() {
        let g = TorusGrid::new(2, 32).unwrap();
        let flat: Field<f64> = density_profile(g, 0.0, DensitySmoothness::default(), 1).unwrap();
        assert!(flat.values().iter().all(|&v| v == 1.0));
        for smooth in [DensitySmoothness::Smooth { kmax: 3 }, DensitySmoothness::Besov { s: 1.0 / 3.0 }] {
            let rho: Field<f64> = density_profile(g, 0.5, smooth, 3).unwrap();
            assert!(rho.min_value() >= 0.5 - 1e-15);
            assert!(rho.max_value() <= 1.5 + 1e-15);
            assert!((rho.max_value() - 1.5).abs() < 1e-12 || (rho.min_value() - 0.5).abs() < 1e-12);
        }
        assert!(density_profile::<f64>(g, 1.0, DensitySmoothness::default(), 1).is_err());
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let spec = GeneratorSpec::RandomBesov(RandomBesovSpec::new(0.3, 3.0, 0.1, 9).divergence_free(true));
        let text = serde_json::to_string(&spec).unwrap();
        let back: GeneratorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        let bad = r#"{"kind":"constant","value":[1.0],"bogus":2}"#;
        assert!(serde_json::from_str::<GeneratorSpec>(bad).is_err());
    }

    #[test]
    fn generate_checks_components() {
        let g = TorusGrid::new(2, 16).unwrap();
        let c = GeneratorSpec::Constant { value: vec![1.0, 2.0] };
        assert!(c.generate::<f64>(g, 3).is_err());
        let f: Field<f64> = c.generate(g, 2).unwrap();
        assert_eq!(f.component(1)[5], 2.0);
        let tg = GeneratorSpec::TaylorGreen { mu: 0.0, t: 0.0, amplitude: 1.0 };
        assert!(tg.generate::<f64>(g, 1).is_err());
        let m = GeneratorSpec::SingleMode { wavevector: vec![1, 2], amplitude: vec![1.0], phase: 0.0 };
        let f: Field<f64> = m.generate(g, 1).unwrap();
        assert!((f.values()[0] - 1.0).abs() < 1e-15);
    }
}
