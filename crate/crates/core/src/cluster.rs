//! Two-stage cluster sampling over consecutive publication years: build
//! year clusters, select one at random, and test the selected cluster
//! against the pooled complement.
//!
//! The comparison is cluster vs complement rather than cluster vs full
//! population, because the full population contains the cluster and the
//! two-sample test assumes independent groups.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::effect::{cohens_h, EffectSize};
use crate::error::{Error, Result};
use crate::proportions::{two_sample_z, InstitutionRecord, Tails, TestResult};

/// Year range accepted at ingestion.
pub const YEAR_RANGE: RangeInclusive<i32> = 1900..=2100;

/// A single publication: its year and top-10% membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublicationRecord {
    pub year: i32,
    pub is_top10: bool,
}

/// One consecutive-year cluster with aggregated counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearCluster {
    pub start_year: i32,
    pub end_year: i32,
    pub n_pubs: u64,
    pub n_top10: u64,
}

impl YearCluster {
    pub fn proportion(&self) -> Option<f64> {
        (self.n_pubs > 0).then(|| self.n_top10 as f64 / self.n_pubs as f64)
    }
}

/// Year-based clustering of a publication set, with an optional random
/// selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPlan {
    pub cluster_width: u32,
    pub clusters: Vec<YearCluster>,
    pub selected_index: Option<usize>,
    pub seed: Option<u64>,
}

/// Partitions publications into consecutive-year clusters anchored at the
/// earliest year. The final cluster absorbs any remainder years, so the
/// clusters jointly cover every year present.
pub fn build_clusters(pubs: &[PublicationRecord], width: u32) -> Result<ClusterPlan> {
    if pubs.is_empty() {
        return Err(Error::domain("publication list is empty"));
    }
    if width == 0 {
        return Err(Error::domain("cluster width must be at least 1 year"));
    }

    let min_year = pubs.iter().map(|p| p.year).min().unwrap();
    let max_year = pubs.iter().map(|p| p.year).max().unwrap();
    let span = (max_year - min_year + 1) as u32;
    let count = (span / width).max(1) as usize;

    let mut clusters: Vec<YearCluster> = (0..count)
        .map(|i| {
            let start_year = min_year + (i as u32 * width) as i32;
            let end_year = if i == count - 1 {
                max_year
            } else {
                start_year + width as i32 - 1
            };
            YearCluster {
                start_year,
                end_year,
                n_pubs: 0,
                n_top10: 0,
            }
        })
        .collect();

    for p in pubs {
        let idx = (((p.year - min_year) as u32 / width) as usize).min(count - 1);
        clusters[idx].n_pubs += 1;
        if p.is_top10 {
            clusters[idx].n_top10 += 1;
        }
    }

    Ok(ClusterPlan {
        cluster_width: width,
        clusters,
        selected_index: None,
        seed: None,
    })
}

/// Selects one cluster uniformly at random. The generator is ChaCha8
/// keyed by the seed, so the same (plan, seed) always selects the same
/// cluster.
pub fn select_cluster(plan: &ClusterPlan, seed: u64) -> Result<ClusterPlan> {
    if plan.clusters.is_empty() {
        return Err(Error::domain("plan has no clusters to select from"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = rng.random_range(0..plan.clusters.len());
    let mut selected = plan.clone();
    selected.selected_index = Some(index);
    selected.seed = Some(seed);
    Ok(selected)
}

/// Result of comparing one cluster against the pooled rest of the data.
#[derive(Debug, Clone)]
pub struct ClusterComparison {
    pub cluster_index: usize,
    pub cluster: YearCluster,
    pub complement_n_pubs: u64,
    pub complement_n_top10: u64,
    pub test: TestResult,
    pub effect: EffectSize,
}

fn compare_cluster(plan: &ClusterPlan, index: usize, alpha: f64) -> Result<ClusterComparison> {
    let cluster = plan.clusters[index];
    let total_pubs: u64 = plan.clusters.iter().map(|c| c.n_pubs).sum();
    let total_top10: u64 = plan.clusters.iter().map(|c| c.n_top10).sum();
    let complement_n_pubs = total_pubs - cluster.n_pubs;
    let complement_n_top10 = total_top10 - cluster.n_top10;

    if cluster.n_pubs == 0 {
        return Err(Error::domain(format!(
            "cluster {index} ({}-{}) contains no publications",
            cluster.start_year, cluster.end_year
        )));
    }
    if complement_n_pubs == 0 {
        return Err(Error::domain(
            "complement is empty; all publications fall in the selected cluster",
        ));
    }

    let a = InstitutionRecord::new("cluster", cluster.n_pubs, cluster.n_top10)?;
    let b = InstitutionRecord::new("complement", complement_n_pubs, complement_n_top10)?;
    let test = two_sample_z(&a, &b, alpha, Tails::Two)?;
    let effect = cohens_h(a.proportion(), b.proportion())?;

    Ok(ClusterComparison {
        cluster_index: index,
        cluster,
        complement_n_pubs,
        complement_n_top10,
        test,
        effect,
    })
}

/// Two-sample z-test of the selected cluster's top-10% proportion against
/// the pooled complement, with Cohen's h on the same pair.
pub fn cluster_vs_population(plan: &ClusterPlan, alpha: f64) -> Result<ClusterComparison> {
    let index = plan
        .selected_index
        .ok_or_else(|| Error::domain("no cluster has been selected"))?;
    compare_cluster(plan, index, alpha)
}

/// Runs the cluster-vs-complement test for every non-empty cluster in
/// turn. Clusters that admit no test (empty, or holding all the data)
/// are skipped.
pub fn homogeneity_sweep(plan: &ClusterPlan, alpha: f64) -> Result<Vec<ClusterComparison>> {
    let mut out = Vec::with_capacity(plan.clusters.len());
    for index in 0..plan.clusters.len() {
        let cluster = plan.clusters[index];
        let rest: u64 = plan.clusters.iter().map(|c| c.n_pubs).sum::<u64>() - cluster.n_pubs;
        if cluster.n_pubs == 0 || rest == 0 {
            continue;
        }
        match compare_cluster(plan, index, alpha) {
            Ok(c) => out.push(c),
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
