//! Effect sizes for proportion comparisons: Cohen's h on the arcsine
//! scale, and Cohen's w / Cramér's V for 2x2 contingency tables, with the
//! qualitative bands (including the intermediate "small-to-medium" and
//! "medium-to-large" labels).

use std::fmt;

use crate::error::{Error, Result};
use crate::proportions::InstitutionRecord;

/// Tolerance within which a value snaps to an anchor's own label, so that
/// printed round values classify intuitively.
pub const ANCHOR_SNAP_TOLERANCE: f64 = 1e-12;

/// Qualitative magnitude band. Ordered: trivial < small < small-to-medium
/// < medium < medium-to-large < large.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    Trivial,
    Small,
    SmallToMedium,
    Medium,
    MediumToLarge,
    Large,
}

impl Band {
    pub fn label(self) -> &'static str {
        match self {
            Band::Trivial => "trivial",
            Band::Small => "small",
            Band::SmallToMedium => "small-to-medium",
            Band::Medium => "medium",
            Band::MediumToLarge => "medium-to-large",
            Band::Large => "large",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which effect-size measure a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    H,
    W,
    V,
}

impl Measure {
    pub fn label(self) -> &'static str {
        match self {
            Measure::H => "h",
            Measure::W => "w",
            Measure::V => "v",
        }
    }
}

/// An effect-size value with its qualitative band.
#[derive(Debug, Clone, Copy)]
pub struct EffectSize {
    pub measure: Measure,
    pub value: f64,
    pub band: Band,
}

/// Small/medium/large cut points for a banding scheme. The defaults are
/// [`H_ANCHORS`] and [`W_ANCHORS`]; custom anchors are accepted so callers
/// can override the conventions.
#[derive(Debug, Clone, Copy)]
pub struct Anchors {
    pub small: f64,
    pub medium: f64,
    pub large: f64,
}

/// Cohen's anchors for h: 0.2 small, 0.5 medium, 0.8 large.
pub const H_ANCHORS: Anchors = Anchors {
    small: 0.2,
    medium: 0.5,
    large: 0.8,
};

/// Anchors for w (and V on 2x2 tables): 0.1 small, 0.3 medium, 0.5 large.
pub const W_ANCHORS: Anchors = Anchors {
    small: 0.1,
    medium: 0.3,
    large: 0.5,
};

impl Anchors {
    pub fn new(small: f64, medium: f64, large: f64) -> Result<Self> {
        if !(small > 0.0 && small < medium && medium < large && large.is_finite()) {
            return Err(Error::domain(format!(
                "anchors must satisfy 0 < small < medium < large, got ({small}, {medium}, {large})"
            )));
        }
        Ok(Anchors {
            small,
            medium,
            large,
        })
    }

    /// Classifies a non-negative value. Values within
    /// [`ANCHOR_SNAP_TOLERANCE`] of an anchor take the anchor's label;
    /// values strictly between anchors take the hyphenated label; values
    /// below the small anchor are "trivial" and values at or above the
    /// large anchor are "large".
    pub fn classify(&self, value: f64) -> Result<Band> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::domain(format!(
                "effect-size value must be non-negative, got {value}"
            )));
        }
        if (value - self.small).abs() <= ANCHOR_SNAP_TOLERANCE {
            return Ok(Band::Small);
        }
        if (value - self.medium).abs() <= ANCHOR_SNAP_TOLERANCE {
            return Ok(Band::Medium);
        }
        if (value - self.large).abs() <= ANCHOR_SNAP_TOLERANCE {
            return Ok(Band::Large);
        }
        Ok(if value < self.small {
            Band::Trivial
        } else if value < self.medium {
            Band::SmallToMedium
        } else if value < self.large {
            Band::MediumToLarge
        } else {
            Band::Large
        })
    }
}

/// Classifies an h value against Cohen's 0.2/0.5/0.8 anchors.
pub fn classify_h(value: f64) -> Result<Band> {
    H_ANCHORS.classify(value)
}

/// Classifies a w (or 2x2 V) value against the 0.1/0.3/0.5 anchors.
pub fn classify_w(value: f64) -> Result<Band> {
    W_ANCHORS.classify(value)
}

fn check_proportion(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("{name} must lie in [0,1], got {p}")));
    }
    Ok(())
}

/// Cohen's h: twice the absolute difference of the arcsine-square-root
/// transformed proportions.
pub fn cohens_h(p_observed: f64, p_expected: f64) -> Result<EffectSize> {
    check_proportion("observed proportion", p_observed)?;
    check_proportion("expected proportion", p_expected)?;
    let value = 2.0 * (p_observed.sqrt().asin() - p_expected.sqrt().asin()).abs();
    Ok(EffectSize {
        measure: Measure::H,
        value,
        band: classify_h(value)?,
    })
}

/// A 2x2 contingency table: rows are the two institutions, columns are
/// (top-10%, rest).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoByTwoTable {
    cells: [[u64; 2]; 2],
}

impl TwoByTwoTable {
    pub const ROWS: usize = 2;
    pub const COLS: usize = 2;

    pub fn new(a_top: u64, a_rest: u64, b_top: u64, b_rest: u64) -> Result<Self> {
        let t = TwoByTwoTable {
            cells: [[a_top, a_rest], [b_top, b_rest]],
        };
        if t.total() == 0 {
            return Err(Error::domain("table total must be at least 1"));
        }
        Ok(t)
    }

    /// Table for two institutions' top-10% counts.
    pub fn from_records(a: &InstitutionRecord, b: &InstitutionRecord) -> Self {
        TwoByTwoTable {
            cells: [
                [a.n_top10, a.n_pubs - a.n_top10],
                [b.n_top10, b.n_pubs - b.n_top10],
            ],
        }
    }

    pub fn cells(&self) -> [[u64; 2]; 2] {
        self.cells
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> [u64; 2] {
        [
            self.cells[0][0] + self.cells[0][1],
            self.cells[1][0] + self.cells[1][1],
        ]
    }

    pub fn col_totals(&self) -> [u64; 2] {
        [
            self.cells[0][0] + self.cells[1][0],
            self.cells[0][1] + self.cells[1][1],
        ]
    }
}

/// Pearson chi-square statistic, with expected counts from the marginal
/// products. Requires every marginal to be positive.
pub fn chi_square(t: &TwoByTwoTable) -> Result<f64> {
    let rows = t.row_totals();
    let cols = t.col_totals();
    if rows.contains(&0) || cols.contains(&0) {
        return Err(Error::degenerate(
            "table has a zero marginal; chi-square is undefined",
        ));
    }
    let n = t.total() as f64;
    let mut chi2 = 0.0;
    for (row, &row_total) in t.cells.iter().zip(&rows) {
        for (&cell, &col_total) in row.iter().zip(&cols) {
            let expected = row_total as f64 * col_total as f64 / n;
            let diff = cell as f64 - expected;
            chi2 += diff * diff / expected;
        }
    }
    Ok(chi2)
}

/// Cohen's w = sqrt(chi2 / n).
pub fn cohens_w(t: &TwoByTwoTable) -> Result<EffectSize> {
    let chi2 = chi_square(t)?;
    let value = (chi2 / t.total() as f64).sqrt();
    Ok(EffectSize {
        measure: Measure::W,
        value,
        band: classify_w(value)?,
    })
}

/// Cramér's V = sqrt(chi2 / (n * (min(rows, cols) - 1))); equals w on 2x2
/// tables.
pub fn cramers_v(t: &TwoByTwoTable) -> Result<EffectSize> {
    let chi2 = chi_square(t)?;
    let df_min = (TwoByTwoTable::ROWS.min(TwoByTwoTable::COLS) - 1) as f64;
    let value = (chi2 / (t.total() as f64 * df_min)).sqrt();
    Ok(EffectSize {
        measure: Measure::V,
        value,
        band: classify_w(value)?,
    })
}
