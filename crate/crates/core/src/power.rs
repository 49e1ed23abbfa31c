//! Power analysis for the proportion tests, carried out on the arcsine
//! (Cohen's h) scale so that h is the single effect-size currency.
//!
//! Convention: the harmonic mean `n` of the two group sizes is treated as
//! the effective number of observations behind the compared difference,
//! giving two-sided power
//!
//! ```text
//! Phi(h*sqrt(n) - z_{1-alpha/2}) + Phi(-h*sqrt(n) - z_{1-alpha/2})
//! ```
//!
//! `required_n` and `minimum_detectable_h` invert the same identity, so
//! planning numbers round-trip exactly. A pooled two-sample z-test run
//! with `n` observations per group realizes effective size `n/2` under
//! this convention; `montecarlo::simulate_power` measures that
//! realization directly.

use crate::error::{Error, Result};
use crate::normal;
use crate::proportions::Tails;

/// Power of a proportion comparison at a given effect size and design.
#[derive(Debug, Clone)]
pub struct PowerReport {
    pub h: f64,
    pub n1: u64,
    pub n2: u64,
    pub alpha: f64,
    pub tails: Tails,
    pub power: f64,
}

/// Harmonic mean of the two group sizes.
fn effective_n(n1: u64, n2: u64) -> f64 {
    2.0 / (1.0 / n1 as f64 + 1.0 / n2 as f64)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

fn check_sizes(n1: u64, n2: u64) -> Result<()> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::domain(format!(
            "group sizes must be at least 2, got ({n1}, {n2})"
        )));
    }
    Ok(())
}

fn critical_z(alpha: f64, tails: Tails) -> f64 {
    match tails {
        Tails::One => normal::quantile(1.0 - alpha),
        Tails::Two => normal::quantile(1.0 - alpha / 2.0),
    }
}

fn power_at(h: f64, n_eff: f64, alpha: f64, tails: Tails) -> f64 {
    let lambda = h * n_eff.sqrt();
    let zc = critical_z(alpha, tails);
    match tails {
        Tails::One => normal::phi(lambda - zc),
        Tails::Two => normal::phi(lambda - zc) + normal::phi(-lambda - zc),
    }
}

/// Power to detect effect size h with groups of n1 and n2.
pub fn power_two_proportions(
    h: f64,
    n1: u64,
    n2: u64,
    alpha: f64,
    tails: Tails,
) -> Result<PowerReport> {
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::domain(format!(
            "effect size h must be a non-negative finite value, got {h}"
        )));
    }
    check_sizes(n1, n2)?;
    check_alpha(alpha)?;
    Ok(PowerReport {
        h,
        n1,
        n2,
        alpha,
        tails,
        power: power_at(h, effective_n(n1, n2), alpha, tails),
    })
}

/// Smallest equal per-group size whose power reaches the target.
///
/// A closed-form seed `((z_crit + z_power)/h)^2` brackets the answer; a
/// binary search on the monotone power function then pins the exact
/// integer, which also repairs the second tail term dropped by the seed.
pub fn required_n(h: f64, alpha: f64, target_power: f64, tails: Tails) -> Result<u64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!(
            "power target is unattainable at effect size h = {h}; h must be positive"
        )));
    }
    check_alpha(alpha)?;
    if !(target_power > alpha && target_power < 1.0) {
        return Err(Error::domain(format!(
            "target power must lie in (alpha, 1), got {target_power} at alpha {alpha}"
        )));
    }

    let seed = ((critical_z(alpha, tails) + normal::quantile(target_power)) / h).powi(2);
    let mut hi = (seed.ceil().max(2.0) as u64)
        .saturating_mul(2)
        .saturating_add(4);
    while power_at(h, hi as f64, alpha, tails) < target_power {
        hi = hi.saturating_mul(2);
    }
    let mut lo = 2u64;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if power_at(h, mid as f64, alpha, tails) >= target_power {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Smallest effect size detectable at the target power with groups of n1
/// and n2. Uses the one-term inversion; the dropped two-sided minor term
/// is below 1e-6 at conventional power targets.
pub fn minimum_detectable_h(
    n1: u64,
    n2: u64,
    alpha: f64,
    target_power: f64,
    tails: Tails,
) -> Result<f64> {
    check_sizes(n1, n2)?;
    check_alpha(alpha)?;
    if !(target_power > alpha && target_power < 1.0) {
        return Err(Error::domain(format!(
            "target power must lie in (alpha, 1), got {target_power} at alpha {alpha}"
        )));
    }
    let zc = critical_z(alpha, tails);
    Ok((zc + normal::quantile(target_power)) / effective_n(n1, n2).sqrt())
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_effect_power_equals_alpha() {
        let r = power_two_proportions(0.0, 100, 100, 0.05, Tails::Two).unwrap();
        assert_relative_eq!(r.power, 0.05, epsilon = 1e-12);
        let one = power_two_proportions(0.0, 100, 100, 0.05, Tails::One).unwrap();
        assert_relative_eq!(one.power, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn power_at_planning_example() {
        let r = power_two_proportions(0.2, 197, 197, 0.05, Tails::Two).unwrap();
        assert_relative_eq!(r.power, 0.80155068832048103, epsilon = 1e-12);
        assert!(r.power >= 0.80);
        let below = power_two_proportions(0.2, 196, 196, 0.05, Tails::Two).unwrap();
        assert_relative_eq!(below.power, 0.79955687143565142, epsilon = 1e-12);
        assert!(below.power < 0.80);
    }

    #[test]
    fn one_sided_power_value() {
        let r = power_two_proportions(0.2, 197, 197, 0.05, Tails::One).unwrap();
        assert_relative_eq!(r.power, 0.87743915501785967, epsilon = 1e-12);
    }

    #[test]
    fn huge_effect_saturates() {
        let r = power_two_proportions(3.0, 50, 50, 0.05, Tails::Two).unwrap();
        assert!((1.0 - r.power).abs() < 1e-9);
    }

    #[test]
    fn power_monotone_in_h_and_n() {
        let base = power_two_proportions(0.2, 100, 100, 0.05, Tails::Two)
            .unwrap()
            .power;
        let more_h = power_two_proportions(0.25, 100, 100, 0.05, Tails::Two)
            .unwrap()
            .power;
        let more_n = power_two_proportions(0.2, 150, 100, 0.05, Tails::Two)
            .unwrap()
            .power;
        let more_alpha = power_two_proportions(0.2, 100, 100, 0.10, Tails::Two)
            .unwrap()
            .power;
        assert!(more_h > base);
        assert!(more_n > base);
        assert!(more_alpha > base);
    }

    #[test]
    fn power_symmetric_in_group_sizes() {
        let a = power_two_proportions(0.3, 80, 200, 0.05, Tails::Two)
            .unwrap()
            .power;
        let b = power_two_proportions(0.3, 200, 80, 0.05, Tails::Two)
            .unwrap()
            .power;
        assert_eq!(a, b);
    }

    #[test]
    fn required_n_round_trips() {
        // (h, expected n): seeds (z_.975 + z_.80)^2 / h^2 = 196.2, 784.9, 31.4, 12.3
        for (h, expected) in [(0.2, 197), (0.1, 785), (0.5, 32), (0.8, 13)] {
            let n = required_n(h, 0.05, 0.80, Tails::Two).unwrap();
            assert_eq!(n, expected, "required_n(h={h})");
            let at = power_two_proportions(h, n, n, 0.05, Tails::Two)
                .unwrap()
                .power;
            let below = power_two_proportions(h, n - 1, n - 1, 0.05, Tails::Two)
                .unwrap()
                .power;
            assert!(at >= 0.80, "power at n={n} is {at}");
            assert!(below < 0.80, "power at n-1={} is {below}", n - 1);
        }
    }

    #[test]
    fn required_n_barely_above_alpha_is_minimal() {
        let n = required_n(0.2, 0.05, 0.0501, Tails::Two).unwrap();
        assert_eq!(n, 2);
    }

    #[test]
    fn one_sided_test_needs_fewer_observations() {
        // seed (z_.95 + z_.80)^2 / 0.04 = 154.6
        let one = required_n(0.2, 0.05, 0.80, Tails::One).unwrap();
        let two = required_n(0.2, 0.05, 0.80, Tails::Two).unwrap();
        assert_eq!(one, 155);
        assert!(one < two);
        let at = power_two_proportions(0.2, one, one, 0.05, Tails::One)
            .unwrap()
            .power;
        let below = power_two_proportions(0.2, one - 1, one - 1, 0.05, Tails::One)
            .unwrap()
            .power;
        assert!(at >= 0.80 && below < 0.80);
    }

    #[test]
    fn required_n_rejects_zero_effect() {
        assert!(required_n(0.0, 0.05, 0.80, Tails::Two).is_err());
    }

    #[test]
    fn required_n_rejects_bad_target() {
        assert!(required_n(0.2, 0.05, 0.04, Tails::Two).is_err());
        assert!(required_n(0.2, 0.05, 1.0, Tails::Two).is_err());
    }

    #[test]
    fn minimum_detectable_h_inverts_required_n() {
        let h = minimum_detectable_h(197, 197, 0.05, 0.80, Tails::Two).unwrap();
        assert_relative_eq!(h, 0.19960468208028340, epsilon = 1e-12);
        // doubling the group sizes scales h* by 1/sqrt(2)
        let h2 = minimum_detectable_h(394, 394, 0.05, 0.80, Tails::Two).unwrap();
        assert_relative_eq!(h2, 0.14114182425555334, epsilon = 1e-12);
        assert_relative_eq!(h2, h / 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn minimum_detectable_h_vanishes_for_huge_n() {
        let h = minimum_detectable_h(100_000_000, 100_000_000, 0.05, 0.80, Tails::Two).unwrap();
        assert!(h < 0.001, "h* = {h}");
    }

    #[test]
    fn minimum_detectable_h_reproduces_target_power() {
        // the one-term inversion leaves only the second tail, < 1e-6 here
        let h = minimum_detectable_h(197, 197, 0.05, 0.80, Tails::Two).unwrap();
        let p = power_two_proportions(h, 197, 197, 0.05, Tails::Two)
            .unwrap()
            .power;
        assert!((p - 0.80).abs() < 1e-6, "power at h* is {p}");
        let h1 = minimum_detectable_h(197, 197, 0.05, 0.80, Tails::One).unwrap();
        let p1 = power_two_proportions(h1, 197, 197, 0.05, Tails::One)
            .unwrap()
            .power;
        assert!((p1 - 0.80).abs() < 1e-12, "one-sided power at h* is {p1}");
    }

    #[test]
    fn sizes_below_two_rejected() {
        assert!(power_two_proportions(0.2, 1, 100, 0.05, Tails::Two).is_err());
        assert!(minimum_detectable_h(100, 0, 0.05, 0.80, Tails::Two).is_err());
    }
}
