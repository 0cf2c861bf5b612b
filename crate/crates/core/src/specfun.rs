//! The exponential integral `Ei(x) = ∫_{-∞}^{x} e^t / t dt` and the
//! Romberg quadrature behind it.
//!
//! Positive arguments are summed from the power series
//! `γ + ln x + Σ xⁿ / (n·n!)`. Negative arguments, and every difference
//! `Ei(b) − Ei(a)`, are integrated numerically from the defining integral
//! with successive interval halving and Richardson extrapolation (the
//! second Romberg column is Simpson's rule).
//!
//! Near `t = 0` the integrand `e^t / t` is handled in the logarithmic
//! variable `t = ±e^s`, where it becomes the smooth `exp(±e^s)`.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments closer to zero than this are rejected.
pub const SINGULARITY_GUARD: f64 = 1e-12;

/// Lower limit replacing `-∞` for negative arguments; `|e^t/t| < 1e-23` beyond it.
const LOWER_ANCHOR: f64 = -50.0;

/// Minimum number of halvings before the stop test is trusted.
const MIN_REFINEMENTS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub relative_error_target: f64,
    pub max_refinements: u32,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            relative_error_target: 1e-12,
            max_refinements: 40,
        }
    }
}

impl QuadTolerance {
    pub fn new(relative_error_target: f64, max_refinements: u32) -> Result<Self> {
        if !(relative_error_target > 0.0) || !relative_error_target.is_finite() {
            return Err(Error::InvalidInput(format!(
                "relative error target must be positive, got {relative_error_target}"
            )));
        }
        if max_refinements == 0 {
            return Err(Error::InvalidInput(
                "max_refinements must be at least 1".into(),
            ));
        }
        Ok(Self {
            relative_error_target,
            max_refinements,
        })
    }
}

/// `Ei(x)` at the default tolerance.
pub fn ei(x: f64) -> Result<f64> {
    ei_with(x, &QuadTolerance::default())
}

pub fn ei_with(x: f64, tol: &QuadTolerance) -> Result<f64> {
    guard(x)?;
    if x > 0.0 {
        Ok(ei_series(x))
    } else {
        ei_negative(x, tol)
    }
}

/// Power series `γ + ln x + Σ xⁿ/(n·n!)` for `x > 0`.
///
/// Summation stops once the next term drops below `1e-16` of the running
/// sum. All terms are positive, so the result keeps full relative accuracy
/// away from the root of `Ei` near 0.3725.
pub fn ei_series(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut power_over_factorial = 1.0;
    let mut sum = 0.0;
    let mut n = 1.0;
    loop {
        power_over_factorial *= x / n;
        let term = power_over_factorial / n;
        sum += term;
        if term < 1e-16 * sum {
            break;
        }
        n += 1.0;
    }
    EULER_GAMMA + x.ln() + sum
}

/// `Ei(x)` by quadrature alone, for either sign of `x`.
///
/// For `x > 0` this integrates the regular form `γ + ln x + ∫₀ˣ (eᵗ−1)/t dt`;
/// it exists as an independent route to cross-check [`ei_series`].
pub fn ei_quadrature(x: f64, tol: &QuadTolerance) -> Result<f64> {
    guard(x)?;
    if x < 0.0 {
        return ei_negative(x, tol);
    }
    let regular = |t: f64| if t == 0.0 { 1.0 } else { t.exp_m1() / t };
    Ok(EULER_GAMMA + x.ln() + romberg(regular, 0.0, x, tol)?)
}

/// `Ei(b) − Ei(a)` for `a`, `b` nonzero and of the same sign.
pub fn ei_delta(a: f64, b: f64) -> Result<f64> {
    ei_delta_scaled(a, b, 0.0, &QuadTolerance::default())
}

/// `e^{-shift}·(Ei(b) − Ei(a))`, integrated as `∫_a^b e^{t−shift}/t dt`.
///
/// Folding the exponential prefactor into the integrand keeps products
/// such as `e^{λx}·(Ei(−λb) − Ei(−λx))` finite for large `λ`.
pub fn ei_delta_scaled(a: f64, b: f64, shift: f64, tol: &QuadTolerance) -> Result<f64> {
    guard(a)?;
    guard(b)?;
    if (a < 0.0) != (b < 0.0) {
        return Err(Error::Domain(format!(
            "Ei difference across the singularity at 0: [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a < 0.0 {
        let f = |s: f64| (-s.exp() - shift).exp();
        return romberg(f, (-a).ln(), (-b).ln(), tol);
    }
    // Positive side: logarithmic variable below 1, plain variable above.
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut total = 0.0;
    if lo < 1.0 {
        let f = |s: f64| (s.exp() - shift).exp();
        total += romberg(f, lo.ln(), hi.min(1.0).ln(), tol)?;
    }
    if hi > 1.0 {
        let f = |t: f64| (t - shift).exp() / t;
        total += romberg(f, lo.max(1.0), hi, tol)?;
    }
    Ok(sign * total)
}

fn ei_negative(x: f64, tol: &QuadTolerance) -> Result<f64> {
    let anchor = LOWER_ANCHOR.min(x - 40.0);
    ei_delta_scaled(anchor, x, 0.0, tol)
}

fn guard(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite Ei argument {x}")));
    }
    if x.abs() < SINGULARITY_GUARD {
        return Err(Error::Domain(format!(
            "Ei argument {x} too close to the logarithmic singularity at 0"
        )));
    }
    Ok(())
}

/// Romberg integration of `f` over `[a, b]` (either orientation).
///
/// Each level halves the trapezoid step; the diagonal of the Richardson
/// tableau is accepted once two successive diagonal entries agree to the
/// relative target.
pub(crate) fn romberg<F>(f: F, a: f64, b: f64, tol: &QuadTolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let span = b - a;
    let mut prev_row: Vec<f64> = vec![0.5 * span * (f(a) + f(b))];
    let mut intervals: u64 = 1;
    for level in 1..=tol.max_refinements {
        let h = span / (2 * intervals) as f64;
        let mut midpoint_sum = 0.0;
        for i in 0..intervals {
            midpoint_sum += f(a + (2 * i + 1) as f64 * h);
        }
        intervals *= 2;
        let mut row = Vec::with_capacity(prev_row.len() + 1);
        row.push(0.5 * prev_row[0] + h * midpoint_sum);
        let mut factor = 1.0;
        for j in 1..=prev_row.len() {
            factor *= 4.0;
            let refined = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(refined);
        }
        let estimate = row[row.len() - 1];
        let change = (estimate - prev_row[prev_row.len() - 1]).abs();
        if level >= MIN_REFINEMENTS
            && (change <= tol.relative_error_target * estimate.abs() || change < f64::MIN_POSITIVE)
        {
            return Ok(estimate);
        }
        prev_row = row;
    }
    Err(Error::NoConvergence {
        lo: a,
        hi: b,
        refinements: tol.max_refinements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values from a 40-digit evaluation of the defining integral.
    const EI_ONE: f64 = 1.895_117_816_355_936_8;
    const EI_MINUS_ONE: f64 = -0.219_383_934_395_520_27;

    #[test]
    fn ei_at_plus_and_minus_one() {
        assert_relative_eq!(ei(1.0).unwrap(), EI_ONE, max_relative = 1e-13);
        assert_relative_eq!(ei(-1.0).unwrap(), EI_MINUS_ONE, max_relative = 1e-12);
    }

    #[test]
    fn ei_delta_on_negative_unit_interval() {
        let d = ei_delta(-2.0, -1.0).unwrap();
        assert_relative_eq!(d, -0.170_483_423_687_459_15, max_relative = 1e-12);
    }

    #[test]
    fn ei_delta_positive_matches_series_difference() {
        let d = ei_delta(1.0, 2.0).unwrap();
        assert_relative_eq!(d, ei_series(2.0) - ei_series(1.0), max_relative = 1e-12);
        assert_relative_eq!(d, 3.059_116_539_645_953_4, max_relative = 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(ei_delta(0.7, 0.7).unwrap(), 0.0);
        assert_eq!(ei_delta(-3.0, -3.0).unwrap(), 0.0);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let fwd = ei_delta(0.3, 4.0).unwrap();
        let back = ei_delta(4.0, 0.3).unwrap();
        assert_relative_eq!(fwd, -back, max_relative = 1e-14);
    }

    #[test]
    fn singularity_is_rejected() {
        assert!(matches!(ei(0.0), Err(Error::Domain(_))));
        assert!(matches!(ei(1e-13), Err(Error::Domain(_))));
        assert!(matches!(ei_delta(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(ei_delta(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn scaled_difference_survives_large_rates() {
        // e^{-120}(Ei(125) - Ei(120)) is O(1) even though both terms overflow-adjacent.
        let scaled = ei_delta_scaled(120.0, 125.0, 120.0, &QuadTolerance::default()).unwrap();
        let direct = (ei_series(125.0) - ei_series(120.0)) * (-120.0f64).exp();
        assert_relative_eq!(scaled, direct, max_relative = 1e-11);
    }

    #[test]
    fn far_negative_argument_uses_shifted_anchor() {
        // Ei(-60) ≈ -e^{-60}/60 · (1 - 1/60 + 2/60² - …)
        let v = ei(-60.0).unwrap();
        let asymptotic = -(-60.0f64).exp() / 60.0 * (1.0 - 1.0 / 60.0 + 2.0 / 3600.0 - 6.0 / 216_000.0);
        assert_relative_eq!(v, asymptotic, max_relative = 1e-6);
    }

    #[test]
    fn tolerance_validation() {
        assert!(QuadTolerance::new(0.0, 10).is_err());
        assert!(QuadTolerance::new(1e-10, 0).is_err());
        assert!(QuadTolerance::new(1e-10, 5).is_ok());
    }

    #[test]
    fn non_convergence_is_reported() {
        let tight = QuadTolerance::new(1e-15, 4).unwrap();
        let r = romberg(|t: f64| (50.0 * t).sin().abs(), 0.0, 3.0, &tight);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }
}
