//! Dataset-level analyses over a full ranking: per-institution excellence
//! flags, the all-pairs comparison matrix, and trivial-difference
//! neighborhoods around a reference institution.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::effect::{cohens_h, EffectSize};
use crate::error::{Error, Result};
use crate::proportions::{
    diff_ci, one_sample_z, two_sample_z, ConfidenceInterval, InstitutionRecord, Tails, TestResult,
};

/// Institutions ranked by descending excellence proportion; ties broken by
/// descending publication count, then by id.
#[derive(Debug, Clone)]
pub struct RankingDataset {
    records: Vec<InstitutionRecord>,
}

impl RankingDataset {
    pub fn new(mut records: Vec<InstitutionRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::domain("ranking dataset is empty"));
        }
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.id.clone()) {
                return Err(Error::domain(format!(
                    "duplicate institution id `{}`",
                    r.id
                )));
            }
        }
        records.sort_by(|a, b| {
            b.proportion()
                .total_cmp(&a.proportion())
                .then(b.n_pubs.cmp(&a.n_pubs))
                .then(a.id.cmp(&b.id))
        });
        Ok(RankingDataset { records })
    }

    /// Records in rank order (rank = index + 1).
    pub fn records(&self) -> &[InstitutionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// 1-based rank of an institution.
    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.records.iter().position(|r| r.id == id).map(|i| i + 1)
    }
}

/// One institution's excellence test and effect size against the expected
/// proportion. `direction` is the sign of observed minus expected.
#[derive(Debug, Clone)]
pub struct ExcellenceFlag {
    pub rank: usize,
    pub id: String,
    pub test: TestResult,
    pub effect: EffectSize,
    pub direction: Ordering,
}

/// One-sample test plus Cohen's h for every institution, in rank order.
pub fn excellence_flags(
    ds: &RankingDataset,
    p_expected: f64,
    alpha: f64,
) -> Result<Vec<ExcellenceFlag>> {
    ds.records()
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let test = one_sample_z(rec, p_expected, alpha, Tails::Two)
                .map_err(|e| Error::domain(format!("institution `{}`: {e}", rec.id)))?;
            let effect = cohens_h(rec.proportion(), p_expected)
                .map_err(|e| Error::domain(format!("institution `{}`: {e}", rec.id)))?;
            Ok(ExcellenceFlag {
                rank: i + 1,
                id: rec.id.clone(),
                test,
                effect,
                direction: rec.proportion().total_cmp(&p_expected),
            })
        })
        .collect()
}

/// Comparison of one unordered pair. Degenerate pairs (pooled proportion
/// 0 or 1) carry the effect size and interval but no test.
#[derive(Debug, Clone)]
pub enum PairOutcome {
    Tested {
        test: TestResult,
        effect: EffectSize,
        ci: ConfidenceInterval,
    },
    Degenerate {
        effect: EffectSize,
        ci: ConfidenceInterval,
    },
}

/// One cell of the pairwise matrix; `a` and `b` are 0-based rank indices
/// with `a < b`.
#[derive(Debug, Clone)]
pub struct PairCell {
    pub a: usize,
    pub b: usize,
    pub outcome: PairOutcome,
}

/// Upper-triangular collection of all pairwise comparisons.
#[derive(Debug, Clone)]
pub struct PairwiseMatrix {
    pub alpha: f64,
    /// Alpha actually applied per pair (Bonferroni-adjusted when requested).
    pub effective_alpha: f64,
    /// Confidence level of the per-pair intervals, `1 - effective_alpha`.
    pub level: f64,
    pub cells: Vec<PairCell>,
}

impl PairwiseMatrix {
    /// Cell for the unordered pair of 0-based indices, if populated.
    pub fn cell(&self, i: usize, j: usize) -> Option<&PairCell> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.cells.iter().find(|c| c.a == a && c.b == b)
    }
}

/// Two-sample test, pairwise h, and difference interval for every
/// unordered pair, in rank order. `bonferroni` divides alpha by the
/// number of pairs.
pub fn pairwise_matrix(
    ds: &RankingDataset,
    alpha: f64,
    bonferroni: bool,
) -> Result<PairwiseMatrix> {
    let n = ds.len();
    if n < 2 {
        return Err(Error::domain(
            "pairwise matrix needs at least 2 institutions",
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }

    let pairs = n * (n - 1) / 2;
    let effective_alpha = if bonferroni {
        alpha / pairs as f64
    } else {
        alpha
    };
    let level = 1.0 - effective_alpha;

    let records = ds.records();
    let mut cells = Vec::with_capacity(pairs);
    for a in 0..n {
        for b in (a + 1)..n {
            let (ra, rb) = (&records[a], &records[b]);
            let effect = cohens_h(ra.proportion(), rb.proportion())?;
            let ci = diff_ci(ra, rb, level)?;
            let outcome = match two_sample_z(ra, rb, effective_alpha, Tails::Two) {
                Ok(test) => PairOutcome::Tested { test, effect, ci },
                Err(Error::Degenerate(_)) => PairOutcome::Degenerate { effect, ci },
                Err(e) => return Err(e),
            };
            cells.push(PairCell { a, b, outcome });
        }
    }

    Ok(PairwiseMatrix {
        alpha,
        effective_alpha,
        level,
        cells,
    })
}

/// Another institution's pairwise h against the reference.
#[derive(Debug, Clone)]
pub struct Neighbor {
    pub rank: usize,
    pub id: String,
    pub h: f64,
    pub trivial: bool,
}

/// Institutions whose pairwise effect against the reference falls below
/// the threshold, and the contiguous rank run around the reference.
#[derive(Debug, Clone)]
pub struct NeighborhoodReport {
    pub reference_id: String,
    pub reference_rank: usize,
    pub h_threshold: f64,
    /// Every other institution, in rank order.
    pub neighbors: Vec<Neighbor>,
    /// Ids with h below the threshold, in rank order. Excludes the reference.
    pub trivial_ids: Vec<String>,
    pub count: usize,
    /// Maximal contiguous rank run containing the reference in which every
    /// member is trivial against it.
    pub span: (usize, usize),
}

/// All institutions whose difference from the reference is below the h
/// threshold, plus the contiguous rank span around the reference.
pub fn trivial_neighborhood(
    ds: &RankingDataset,
    reference_id: &str,
    h_threshold: f64,
) -> Result<NeighborhoodReport> {
    if !(h_threshold.is_finite() && h_threshold >= 0.0) {
        return Err(Error::domain(format!(
            "h threshold must be a non-negative finite value, got {h_threshold}"
        )));
    }
    let reference_rank = ds
        .rank_of(reference_id)
        .ok_or_else(|| Error::UnknownId(reference_id.to_string()))?;
    let records = ds.records();
    let p_ref = records[reference_rank - 1].proportion();

    let mut neighbors = Vec::with_capacity(records.len() - 1);
    let mut trivial_by_rank = vec![true; records.len() + 1]; // 1-based; reference stays true
    for (i, rec) in records.iter().enumerate() {
        let rank = i + 1;
        if rank == reference_rank {
            continue;
        }
        let h = cohens_h(p_ref, rec.proportion())?.value;
        let trivial = h < h_threshold;
        trivial_by_rank[rank] = trivial;
        neighbors.push(Neighbor {
            rank,
            id: rec.id.clone(),
            h,
            trivial,
        });
    }

    let trivial_ids: Vec<String> = neighbors
        .iter()
        .filter(|n| n.trivial)
        .map(|n| n.id.clone())
        .collect();

    let mut lo = reference_rank;
    while lo > 1 && trivial_by_rank[lo - 1] {
        lo -= 1;
    }
    let mut hi = reference_rank;
    while hi < records.len() && trivial_by_rank[hi + 1] {
        hi += 1;
    }

    Ok(NeighborhoodReport {
        reference_id: reference_id.to_string(),
        reference_rank,
        h_threshold,
        count: trivial_ids.len(),
        trivial_ids,
        neighbors,
        span: (lo, hi),
    })
}
