//! Radial cutoff profiles generating the dyadic partition of unity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which family of cutoffs to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    Smooth,
    Sharp,
}

impl std::str::FromStr for CutoffKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(CutoffKind::Smooth),
            "sharp" => Ok(CutoffKind::Sharp),
            other => Err(Error::InvalidCutoff(format!("unknown cutoff kind '{other}'"))),
        }
    }
}

/// Low-pass profile `chi` with `chi = 1` on `|xi| <= 1/2` and support in the unit ball.
///
/// The smooth profile is `chi(xi) = S((outer - |xi|) / (outer - inner))` with
/// the `C^inf` step `S(x) = g(x) / (g(x) + g(1 - x))`, `g(x) = exp(-1/x)` for
/// `x > 0`. The default transition band is `[1/2, 1]`, i.e. `S(2 - 2|xi|)`.
/// The sharp profile is the indicator of `|xi| <= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffProfile {
    Smooth { inner: f64, outer: f64 },
    Sharp,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile::Smooth { inner: 0.5, outer: 1.0 }
    }
}

fn bump_g(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth transition from 0 (x <= 0) to 1 (x >= 1).
pub fn smooth_step(x: f64) -> f64 {
    let a = bump_g(x);
    let b = bump_g(1.0 - x);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

impl CutoffProfile {
    /// Builds a profile, rejecting transition bands that break `chi = 1` on
    /// `|xi| <= 1/2` or leave the unit ball.
    pub fn new(kind: CutoffKind, transition: Option<(f64, f64)>) -> Result<Self> {
        match kind {
            CutoffKind::Sharp => {
                if transition.is_some() {
                    return Err(Error::InvalidCutoff("sharp profile takes no transition band".into()));
                }
                Ok(CutoffProfile::Sharp)
            }
            CutoffKind::Smooth => {
                let (inner, outer) = transition.unwrap_or((0.5, 1.0));
                let profile = CutoffProfile::Smooth { inner, outer };
                profile.validate()?;
                Ok(profile)
            }
        }
    }

    pub fn smooth() -> Self {
        Self::default()
    }

    pub fn sharp() -> Self {
        CutoffProfile::Sharp
    }

    pub fn kind(&self) -> CutoffKind {
        match self {
            CutoffProfile::Smooth { .. } => CutoffKind::Smooth,
            CutoffProfile::Sharp => CutoffKind::Sharp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let CutoffProfile::Smooth { inner, outer } = *self {
            if !(inner.is_finite() && outer.is_finite()) {
                return Err(Error::InvalidCutoff("non-finite transition band".into()));
            }
            if inner < 0.5 {
                return Err(Error::InvalidCutoff(format!(
                    "inner radius {inner} < 1/2 breaks chi = 1 on |xi| <= 1/2"
                )));
            }
            if outer > 1.0 {
                return Err(Error::InvalidCutoff(format!("outer radius {outer} > 1 leaves the unit ball")));
            }
            if inner >= outer {
                return Err(Error::InvalidCutoff(format!("empty transition band [{inner}, {outer}]")));
            }
        }
        Ok(())
    }

    /// `chi(|xi|)`.
    pub fn chi(&self, radius: f64) -> f64 {
        match *self {
            CutoffProfile::Sharp => {
                if radius <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffProfile::Smooth { inner, outer } => smooth_step((outer - radius) / (outer - inner)),
        }
    }

    /// `phi(xi) = chi(xi / 2) - chi(xi)`.
    pub fn phi(&self, radius: f64) -> f64 {
        self.chi(0.5 * radius) - self.chi(radius)
    }

    /// Low-pass multiplier `chi(|k| / lambda_{Q+1})` at a lattice point with
    /// `|k|^2 = k_sq`. The sharp profile is decided in integer arithmetic:
    /// it keeps exactly `|k| <= lambda_Q`.
    pub fn low_pass(&self, k_sq: i64, q: i32) -> f64 {
        match self {
            CutoffProfile::Sharp => {
                if q < 0 {
                    if k_sq == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let lam = 1i64 << q;
                    if k_sq <= lam * lam {
                        1.0
                    } else {
                        0.0
                    }
                }
            }
            CutoffProfile::Smooth { .. } => self.chi((k_sq as f64).sqrt() / lambda(q + 1)),
        }
    }

    /// Shell multiplier `phi_q(k)`; `phi_{-1} = chi`.
    pub fn shell(&self, k_sq: i64, q: i32) -> f64 {
        if q < 0 {
            return self.low_pass(k_sq, -1);
        }
        match self {
            CutoffProfile::Sharp => self.low_pass(k_sq, q) - self.low_pass(k_sq, q - 1),
            CutoffProfile::Smooth { .. } => self.phi((k_sq as f64).sqrt() / lambda(q)),
        }
    }
}

/// Dyadic frequency `lambda_q = 2^q` (so `lambda_{-1} = 1/2`).
pub fn lambda(q: i32) -> f64 {
    2f64.powi(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_region_and_support() {
        let sharp = CutoffProfile::sharp();
        assert_eq!(sharp.chi(0.4), 1.0);
        assert_eq!(sharp.chi(0.6), 0.0);
        let smooth = CutoffProfile::smooth();
        assert_eq!(smooth.chi(0.0), 1.0);
        assert_eq!(smooth.chi(0.5), 1.0);
        assert_eq!(smooth.chi(1.0), 0.0);
        assert_eq!(smooth.chi(3.0), 0.0);
        assert!((smooth.chi(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn telescoping_at_three_quarters() {
        let smooth = CutoffProfile::smooth();
        assert_eq!(smooth.chi(0.375), 1.0);
        assert!((smooth.phi(0.75) + smooth.chi(0.75) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn monotone_profile() {
        for profile in [CutoffProfile::smooth(), CutoffProfile::sharp()] {
            let mut prev = 1.0;
            for i in 0..=2000 {
                let c = profile.chi(i as f64 / 1000.0);
                assert!((0.0..=1.0).contains(&c));
                assert!(c <= prev);
                prev = c;
            }
        }
    }

    #[test]
    fn rejects_invalid_bands() {
        assert!(CutoffProfile::new(CutoffKind::Smooth, Some((0.4, 1.0))).is_err());
        assert!(CutoffProfile::new(CutoffKind::Smooth, Some((0.5, 1.2))).is_err());
        assert!(CutoffProfile::new(CutoffKind::Smooth, Some((0.8, 0.7))).is_err());
        assert!(CutoffProfile::new(CutoffKind::Sharp, Some((0.5, 1.0))).is_err());
        assert!(CutoffProfile::new(CutoffKind::Smooth, Some((0.6, 0.9))).is_ok());
    }

    #[test]
    fn sharp_shell_boundaries() {
        let p = CutoffProfile::sharp();
        // shell 2 holds 2 < |k| <= 4
        assert_eq!(p.shell(9, 2), 1.0);
        assert_eq!(p.shell(4, 2), 0.0);
        assert_eq!(p.shell(16, 2), 1.0);
        assert_eq!(p.shell(17, 2), 0.0);
        assert_eq!(p.shell(1, 0), 1.0);
        assert_eq!(p.shell(0, -1), 1.0);
    }
}
