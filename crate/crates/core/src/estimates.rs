//! Measured constants for the Littlewood-Paley product and tail estimates.
//!
//! For every `Q` in a range the left-hand side of each estimate is computed
//! exactly on the grid and divided by its right-hand side without the
//! implicit constant. Bounded ratio sequences confirm the estimate on the
//! given data; a ratio that grows like a positive power of `lambda_Q` is
//! flagged.

use serde::Serialize;

use crate::besov::{localized_sum, shell_coefficients, BesovParams, LocalizedSum, Summation};
use crate::error::{Error, Result};
use crate::scalar::{fit_slope, Scalar};
use crate::spectral::{gradient, lambda, lp_norm, project_high, project_low, CutoffProfile, Field};

/// Growth in `log2(ratio)` per unit `Q` above which a sequence is flagged.
pub const GROWTH_SLOPE_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateId {
    /// `||(fg)_{<=Q} - f_{<=Q} g_{<=Q}||_c` vs `lambda_Q^{-s-t} D^s_a(f) D^t_b(g)`
    Commutator,
    /// `||(fg)_{<=Q} - f_{<=Q} g_{<=Q}||_a` vs `lambda_Q^{-s} D^s_a(f) ||g||_inf`
    Endpoint,
    /// `||grad f_{<=Q}||_a` vs `lambda_Q^{1-s} D^s_a(f)`
    GradientLow,
    /// `||f_{>Q}||_a` vs `lambda_Q^{-s} D^s_a(f)`
    HighTail,
    /// `||grad (fg)_{<=Q}||_c` vs `lambda_Q^{1-s} (D^s_a(f) ||g||_b + D^s_b(g) ||f||_a)`
    ProductGradient,
}

impl EstimateId {
    pub const ALL: [EstimateId; 5] = [
        EstimateId::Commutator,
        EstimateId::Endpoint,
        EstimateId::GradientLow,
        EstimateId::HighTail,
        EstimateId::ProductGradient,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimateId::Commutator => "commutator",
            EstimateId::Endpoint => "endpoint",
            EstimateId::GradientLow => "grad_low",
            EstimateId::HighTail => "high_tail",
            EstimateId::ProductGradient => "product_grad",
        }
    }
}

/// Exponents of one estimate run; `1/c = 1/a + 1/b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateExponents {
    pub s: f64,
    pub t: f64,
    pub a: f64,
    pub b: f64,
}

impl EstimateExponents {
    pub fn new(s: f64, t: f64, a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("s", s), ("t", t)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidExponent(format!("{name} = {v} not in (0, 1)")));
            }
        }
        for (name, v) in [("a", a), ("b", b)] {
            if !(v >= 1.0) {
                return Err(Error::InvalidExponent(format!("{name} = {v} < 1")));
            }
        }
        let inv_c = a.recip() + b.recip();
        if inv_c > 1.0 {
            return Err(Error::InvalidExponent(format!(
                "1/a + 1/b = {inv_c} > 1 leaves no admissible c"
            )));
        }
        Ok(Self { s, t, a, b })
    }

    pub fn c(&self) -> f64 {
        let inv = self.a.recip() + self.b.recip();
        if inv == 0.0 {
            f64::INFINITY
        } else {
            inv.recip()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateRow {
    pub q: i32,
    pub id: EstimateId,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub id: EstimateId,
    pub max_ratio: f64,
    /// Least-squares slope of `log2(ratio)` against `Q` over the positive ratios.
    pub growth_slope: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub exponents: EstimateExponents,
    pub rows: Vec<EstimateRow>,
    pub summaries: Vec<EstimateSummary>,
}

impl EstimateReport {
    pub fn flagged(&self) -> bool {
        self.summaries.iter().any(|s| s.flagged)
    }

    pub fn summary(&self, id: EstimateId) -> Option<&EstimateSummary> {
        self.summaries.iter().find(|s| s.id == id)
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

fn localized<T: Scalar>(f: &Field<T>, s: f64, p: f64, cutoff: &CutoffProfile) -> Result<LocalizedSum<T>> {
    let params = BesovParams::new(s, p, Summation::Infinity)?;
    Ok(localized_sum(&shell_coefficients(f, params, cutoff)?))
}

/// Evaluates the five estimates for `Q` in `q_range` (inclusive).
pub fn verify_kernel_estimates<T: Scalar>(
    f: &Field<T>,
    g: &Field<T>,
    exponents: EstimateExponents,
    q_range: (i32, i32),
    cutoff: &CutoffProfile,
) -> Result<EstimateReport> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let q_max = f.grid().q_max();
    let (q_lo, q_hi) = q_range;
    if q_lo < -1 || q_hi > q_max || q_lo > q_hi {
        return Err(Error::ShellOutOfRange { q: if q_lo < -1 { q_lo } else { q_hi }, q_max });
    }
    let EstimateExponents { s, t, a, b } = exponents;
    let c = exponents.c();

    let d_f_s = localized(f, s, a, cutoff)?;
    let d_g_t = localized(g, t, b, cutoff)?;
    let d_g_s = localized(g, s, b, cutoff)?;
    let g_inf = lp_norm(g, f64::INFINITY)?.as_f64();
    let f_a = lp_norm(f, a)?.as_f64();
    let g_b = lp_norm(g, b)?.as_f64();
    let fg = f.outer(g)?;

    let per_q: Vec<Result<Vec<EstimateRow>>> = (q_lo..=q_hi)
        .map(|q| {
            let lam = lambda(q);
            let f_low = project_low(f, q, cutoff)?;
            let g_low = project_low(g, q, cutoff)?;
            let commutator = project_low(&fg, q, cutoff)?.sub(&f_low.outer(&g_low)?)?;
            let df = d_f_s.get(q).as_f64();
            let mut rows = Vec::with_capacity(5);
            let mut push = |id, lhs: f64, rhs: f64| rows.push(EstimateRow { q, id, lhs, rhs, ratio: ratio(lhs, rhs) });

            let lhs = lp_norm(&commutator, c)?.as_f64();
            push(EstimateId::Commutator, lhs, lam.powf(-s - t) * df * d_g_t.get(q).as_f64());

            let lhs = lp_norm(&commutator, a)?.as_f64();
            push(EstimateId::Endpoint, lhs, lam.powf(-s) * df * g_inf);

            let lhs = lp_norm(&gradient(&f_low), a)?.as_f64();
            push(EstimateId::GradientLow, lhs, lam.powf(1.0 - s) * df);

            let lhs = lp_norm(&project_high(f, q, cutoff)?, a)?.as_f64();
            push(EstimateId::HighTail, lhs, lam.powf(-s) * df);

            let lhs = lp_norm(&gradient(&project_low(&fg, q, cutoff)?), c)?.as_f64();
            push(
                EstimateId::ProductGradient,
                lhs,
                lam.powf(1.0 - s) * (df * g_b + d_g_s.get(q).as_f64() * f_a),
            );
            Ok(rows)
        })
        .collect();

    let mut rows = Vec::new();
    for r in per_q {
        rows.extend(r?);
    }
    let summaries = EstimateId::ALL
        .iter()
        .map(|&id| summarize(id, &rows))
        .collect();
    Ok(EstimateReport { exponents, rows, summaries })
}

fn summarize(id: EstimateId, rows: &[EstimateRow]) -> EstimateSummary {
    let series: Vec<&EstimateRow> = rows.iter().filter(|r| r.id == id).collect();
    let max_ratio = series.iter().fold(0.0f64, |m, r| m.max(r.ratio));
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter(|r| r.ratio > 0.0 && r.ratio.is_finite())
        .map(|r| (r.q as f64, r.ratio.log2()))
        .unzip();
    let growth_slope = fit_slope(&xs, &ys);
    let flagged = !max_ratio.is_finite() || growth_slope.is_some_and(|sl| sl > GROWTH_SLOPE_LIMIT);
    EstimateSummary { id, max_ratio, growth_slope, flagged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn constant_factor_kills_commutators() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let f = Field::<f64>::constant(grid, &[2.0]);
        let g = Field::<f64>::scalar_from_fn(grid, |x| (2.0 * PI * (5.0 * x[0] + x[1])).sin() + (x[1] * 13.0).cos());
        let ex = EstimateExponents::new(1.0 / 3.0, 1.0 / 3.0, 4.0, 4.0).unwrap();
        let report = verify_kernel_estimates(&f, &g, ex, (0, 4), &CutoffProfile::sharp()).unwrap();
        for row in report.rows.iter().filter(|r| matches!(r.id, EstimateId::Commutator | EstimateId::Endpoint)) {
            assert!(row.lhs < 1e-12, "{row:?}");
        }
    }

    #[test]
    fn single_shell_mode_gives_finite_ratios() {
        let grid = TorusGrid::new(2, 64).unwrap();
        // |k| = 20 sits in sharp shell 5 (16 < 20 <= 32)
        let f = Field::<f64>::scalar_from_fn(grid, |x| (2.0 * PI * (12.0 * x[0] + 16.0 * x[1])).cos());
        let ex = EstimateExponents::new(1.0 / 3.0, 1.0 / 3.0, 4.0, 4.0).unwrap();
        let report = verify_kernel_estimates(&f, &f, ex, (2, 2), &CutoffProfile::sharp()).unwrap();
        let commutator = report.rows.iter().find(|r| r.id == EstimateId::Commutator).unwrap();
        // f_{<=2} = 0, so the commutator is (ff)_{<=2} = its mean 1/2.
        assert!((commutator.lhs - 0.5).abs() < 1e-12);
        let d_f = 2f64.powf(5.0 / 3.0) * kernel_weight() * (3.0f64 / 8.0).powf(0.25);
        let rhs = 2f64.powf(-4.0 / 3.0) * d_f * d_f;
        assert!((commutator.rhs - rhs).abs() < 1e-10 * rhs);
        assert!(commutator.ratio.is_finite() && commutator.ratio > 0.0);
        let tail = report.rows.iter().find(|r| r.id == EstimateId::HighTail).unwrap();
        assert!(tail.ratio <= 1.0 + 1e-12);
    }

    // K^{1/3}_{2-5} = lambda_{-3}^{1/3}
    fn kernel_weight() -> f64 {
        2f64.powf(-1.0)
    }

    #[test]
    fn exponent_validation() {
        assert!(EstimateExponents::new(0.0, 0.5, 2.0, 2.0).is_err());
        assert!(EstimateExponents::new(0.5, 1.0, 2.0, 2.0).is_err());
        assert!(EstimateExponents::new(0.5, 0.5, 1.5, 1.5).is_err());
        let e = EstimateExponents::new(0.5, 0.5, 4.0, 4.0).unwrap();
        assert_eq!(e.c(), 2.0);
        let e = EstimateExponents::new(0.5, 0.5, f64::INFINITY, 3.0).unwrap();
        assert_eq!(e.c(), 3.0);
    }
}
