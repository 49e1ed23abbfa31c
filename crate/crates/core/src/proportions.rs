//! One- and two-sample z-tests for top-10% proportions, plus the Wald
//! standard error and confidence interval for a difference of proportions.
//!
//! The one-sample statistic uses the expected-proportion variance
//! `p_e(1-p_e)/n`; the two-sample statistic pools the counts, which makes
//! `z^2` equal the Pearson chi-square of the corresponding 2x2 table. The
//! interval uses the unpooled Wald standard error, so the test and the
//! interval can disagree near the boundary; both are reported.

use crate::error::{Error, Result};
use crate::normal;

/// Expected-count threshold below which results carry a small-sample warning.
pub const EXPECTED_COUNT_GUARD: f64 = 5.0;

/// Floor below which reported p-values are clamped to zero and flagged.
pub const P_UNDERFLOW_FLOOR: f64 = 1e-300;

/// One institution's publication count and top-10% count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstitutionRecord {
    pub id: String,
    pub n_pubs: u64,
    pub n_top10: u64,
}

impl InstitutionRecord {
    pub fn new(id: impl Into<String>, n_pubs: u64, n_top10: u64) -> Result<Self> {
        let id = id.into();
        if n_pubs == 0 {
            return Err(Error::domain(format!(
                "institution `{id}`: n_pubs must be at least 1"
            )));
        }
        if n_top10 > n_pubs {
            return Err(Error::domain(format!(
                "institution `{id}`: n_top10 ({n_top10}) exceeds n_pubs ({n_pubs})"
            )));
        }
        Ok(Self {
            id,
            n_pubs,
            n_top10,
        })
    }

    /// Observed top-10% proportion.
    pub fn proportion(&self) -> f64 {
        self.n_top10 as f64 / self.n_pubs as f64
    }
}

/// One-sided (upper-tail alternative) or two-sided test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tails {
    /// Alternative: the first proportion is greater.
    One,
    #[default]
    Two,
}

impl Tails {
    fn p_value(self, z: f64) -> f64 {
        match self {
            Tails::One => normal::upper_p(z),
            Tails::Two => normal::two_sided_p(z),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Tails::One => "one-sided",
            Tails::Two => "two-sided",
        }
    }
}

impl std::fmt::Display for Tails {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of a z-test at a given significance level.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
    pub tails: Tails,
    /// Set when an expected count under the null falls below
    /// [`EXPECTED_COUNT_GUARD`]; the normal approximation is still the
    /// reported method, so this is a warning rather than an error.
    pub small_sample_warning: bool,
}

impl TestResult {
    fn from_z(z: f64, alpha: f64, tails: Tails, small_sample_warning: bool) -> Self {
        let p_value = tails.p_value(z);
        TestResult {
            z,
            p_value,
            alpha,
            significant: p_value < alpha,
            tails,
            small_sample_warning,
        }
    }

    /// True when the p-value lies below the reporting floor of 1e-300.
    pub fn underflow(&self) -> bool {
        self.p_value < P_UNDERFLOW_FLOOR
    }
}

/// Wald interval for a difference of two proportions.
#[derive(Debug, Clone)]
pub struct ConfidenceInterval {
    pub estimate: f64,
    pub standard_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Set when both observed proportions sit on the boundary, forcing a
    /// zero-width interval.
    pub degenerate: bool,
}

impl ConfidenceInterval {
    /// True when the interval excludes zero, i.e. the unpooled Wald test at
    /// level `1 - level` rejects equality.
    pub fn excludes_zero(&self) -> bool {
        self.lower > 0.0 || self.upper < 0.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Tests an institution's observed proportion against an expected value.
pub fn one_sample_z(
    rec: &InstitutionRecord,
    p_expected: f64,
    alpha: f64,
    tails: Tails,
) -> Result<TestResult> {
    if !(p_expected > 0.0 && p_expected < 1.0) {
        return Err(Error::domain(format!(
            "expected proportion must lie strictly in (0,1), got {p_expected}"
        )));
    }
    check_alpha(alpha)?;

    let n = rec.n_pubs as f64;
    let p = rec.proportion();
    let se = (p_expected * (1.0 - p_expected) / n).sqrt();
    let z = (p - p_expected) / se;
    let warning =
        n * p_expected < EXPECTED_COUNT_GUARD || n * (1.0 - p_expected) < EXPECTED_COUNT_GUARD;
    Ok(TestResult::from_z(z, alpha, tails, warning))
}

/// Pooled z-test for the difference between two institutions' proportions.
pub fn two_sample_z(
    a: &InstitutionRecord,
    b: &InstitutionRecord,
    alpha: f64,
    tails: Tails,
) -> Result<TestResult> {
    check_alpha(alpha)?;

    let (na, nb) = (a.n_pubs as f64, b.n_pubs as f64);
    let pooled = (a.n_top10 + b.n_top10) as f64 / (na + nb);
    if pooled == 0.0 || pooled == 1.0 {
        return Err(Error::degenerate(format!(
            "pooled proportion is {pooled}; both samples are all-failures or all-successes"
        )));
    }

    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    let z = (a.proportion() - b.proportion()) / se;
    let warning = [
        na * pooled,
        na * (1.0 - pooled),
        nb * pooled,
        nb * (1.0 - pooled),
    ]
    .iter()
    .any(|&e| e < EXPECTED_COUNT_GUARD);
    Ok(TestResult::from_z(z, alpha, tails, warning))
}

/// Wald confidence interval for `p_a - p_b`, clamped to [-1, 1].
pub fn diff_ci(
    a: &InstitutionRecord,
    b: &InstitutionRecord,
    level: f64,
) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level must lie in (0,1), got {level}"
        )));
    }

    let (pa, pb) = (a.proportion(), b.proportion());
    let (na, nb) = (a.n_pubs as f64, b.n_pubs as f64);
    let estimate = pa - pb;
    let standard_error = (pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb).sqrt();
    let z = normal::quantile((1.0 + level) / 2.0);
    Ok(ConfidenceInterval {
        estimate,
        standard_error,
        lower: (estimate - z * standard_error).max(-1.0),
        upper: (estimate + z * standard_error).min(1.0),
        level,
        degenerate: standard_error == 0.0,
    })
}
