//! Degree thresholds above which aggregation improves linear separability,
//! and Gaussian misclassification probabilities of the midpoint classifier.
//!
//! Rates are probabilities written as short decimals, so the threshold
//! `(p+q)² / (p−q')²` is evaluated in decimal arithmetic: `0.9 − 0.8` is
//! then exactly `0.1` rather than its binary approximation.

use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::Decimal;

use crate::error::{Error, Result};
use crate::stats::normal_cdf;

fn decimal_threshold(p: f64, q: f64, other: f64) -> Option<f64> {
    let (p, q, other) = (Decimal::from_f64(p)?, Decimal::from_f64(q)?, Decimal::from_f64(other)?);
    let ratio = (p + q).checked_div(p - other)?;
    ratio.checked_mul(ratio)?.to_f64()
}

/// `(p+q)² / (p−q)²`, or `(p+q)² / (p−q_other)²` across patterns.
pub fn separability_threshold(p: f64, q: f64, q_other: Option<f64>) -> Result<f64> {
    for v in [Some(p), Some(q), q_other].into_iter().flatten() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("rate {v} outside [0,1]")));
        }
    }
    let other = q_other.unwrap_or(q);
    if p == other {
        return Err(Error::InfiniteThreshold(format!("p = {p} equals {other}")));
    }
    let t = decimal_threshold(p, q, other).unwrap_or_else(|| ((p + q) / (p - other)).powi(2));
    if !t.is_finite() {
        return Err(Error::InfiniteThreshold(format!("p = {p}, q' = {other}")));
    }
    Ok(t)
}

/// `Φ(−dis)` with `dis = ρ/2` for raw features and
/// `dis = √d |p − q'| / (p + q) · ρ/2` for aggregated ones.
pub fn misclassification_prob(p: f64, q: f64, degree: f64, rho: f64, aggregated: bool, q_other: Option<f64>) -> Result<f64> {
    if !(degree >= 1.0) {
        return Err(Error::invalid(format!("degree must be at least 1, got {degree}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::invalid("rho must be non-negative"));
    }
    let dis = if aggregated {
        if !(p + q > 0.0) {
            return Err(Error::invalid("p + q must be positive"));
        }
        degree.sqrt() * (p - q_other.unwrap_or(q)).abs() / (p + q) * rho / 2.0
    } else {
        rho / 2.0
    };
    Ok(normal_cdf(-dis))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_pattern_hundred() {
        assert_eq!(separability_threshold(0.9, 0.1, Some(0.8)).unwrap(), 100.0);
    }

    #[test]
    fn within_pattern() {
        assert_eq!(separability_threshold(0.9, 0.1, None).unwrap(), 1.5625);
        assert_eq!(
            separability_threshold(0.1, 0.9, None).unwrap(),
            separability_threshold(0.9, 0.1, None).unwrap()
        );
    }

    #[test]
    fn vanishing_denominator() {
        assert!(matches!(separability_threshold(0.3, 0.3, None), Err(Error::InfiniteThreshold(_))));
        assert!(matches!(separability_threshold(0.3, 0.1, Some(0.3)), Err(Error::InfiniteThreshold(_))));
        let mut last = 0.0;
        for k in 1..8 {
            let t = separability_threshold(0.3 + 10f64.powi(-k), 0.3, None).unwrap();
            assert!(t > last);
            last = t;
        }
        assert!(last > 1e13);
    }

    #[test]
    fn raw_with_coincident_means() {
        assert_eq!(misclassification_prob(0.5, 0.1, 3.0, 0.0, false, None).unwrap(), 0.5);
        assert!(misclassification_prob(0.5, 0.1, 0.5, 1.0, true, None).is_err());
    }
}
