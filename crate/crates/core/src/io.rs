//! CSV ingestion and deterministic report emission.
//!
//! Ranking input is `institution,n_pubs,n_top10` (exact header, UTF-8, LF
//! or CRLF); publication input is `year,is_top10`. Reports are emitted in
//! either CSV or a `key=value` text form, with every numeric field fixed
//! at six decimal places so identical inputs produce byte-identical
//! output.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::io::{self, Read, Write};

use crate::cluster::{ClusterComparison, ClusterPlan, PublicationRecord, YEAR_RANGE};
use crate::effect::EffectSize;
use crate::error::{Error, Result};
use crate::power::PowerReport;
use crate::proportions::{ConfidenceInterval, InstitutionRecord, Tails, TestResult};
use crate::ranking::{
    ExcellenceFlag, NeighborhoodReport, PairOutcome, PairwiseMatrix, RankingDataset,
};

pub const RANKING_HEADER: [&str; 3] = ["institution", "n_pubs", "n_top10"];
pub const RANKING_PROPORTIONS_HEADER: [&str; 3] = ["institution", "n_pubs", "p_top10"];
pub const PUBLICATION_HEADER: [&str; 2] = ["year", "is_top10"];

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Text,
}

// ── Parsing ─────────────────────────────────────────────────────────

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::Utf8 { .. } => Error::parse(line, "invalid UTF-8"),
        _ => Error::parse(line, e.to_string()),
    }
}

fn check_header(record: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let fields: Vec<&str> = record.iter().collect();
    if fields != expected {
        return Err(Error::parse(
            1,
            format!(
                "header must be exactly `{}`, found `{}`",
                expected.join(","),
                fields.join(",")
            ),
        ));
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_field<T: std::str::FromStr>(line: u64, field: &str, raw: &str, kind: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(line, format!("field `{field}`: invalid {kind} `{raw}`")))
}

fn parse_ranking_rows<R: Read>(reader: R, proportions: bool) -> Result<RankingDataset> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let expected: &[&str] = if proportions {
        &RANKING_PROPORTIONS_HEADER
    } else {
        &RANKING_HEADER
    };
    check_header(&header, expected)?;

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = record_line(&row);
        if row.len() != 3 {
            return Err(Error::parse(
                line,
                format!("expected 3 fields, found {}", row.len()),
            ));
        }
        let id = row.get(0).unwrap_or("");
        if id.is_empty() {
            return Err(Error::parse(line, "field `institution`: empty id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(
                line,
                format!("duplicate institution id `{id}`"),
            ));
        }
        let n_pubs: u64 = parse_field(line, "n_pubs", row.get(1).unwrap_or(""), "integer")?;
        let n_top10 = if proportions {
            let p: f64 = parse_field(line, "p_top10", row.get(2).unwrap_or(""), "number")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::parse(
                    line,
                    format!("field `p_top10`: proportion {p} outside [0,1]"),
                ));
            }
            (p * n_pubs as f64).round() as u64
        } else {
            parse_field(line, "n_top10", row.get(2).unwrap_or(""), "integer")?
        };
        let rec = InstitutionRecord::new(id, n_pubs, n_top10)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        records.push(rec);
    }
    RankingDataset::new(records)
}

/// Parses a ranking CSV with count columns (`institution,n_pubs,n_top10`).
pub fn parse_ranking_csv<R: Read>(reader: R) -> Result<RankingDataset> {
    parse_ranking_rows(reader, false)
}

/// Parses a ranking CSV whose third column is the top-10% proportion
/// (`institution,n_pubs,p_top10`); counts are recovered as
/// `round(p * n_pubs)`.
pub fn parse_ranking_proportions_csv<R: Read>(reader: R) -> Result<RankingDataset> {
    parse_ranking_rows(reader, true)
}

/// Parses a publication-level CSV (`year,is_top10` with is_top10 in {0,1}).
pub fn parse_publication_csv<R: Read>(reader: R) -> Result<Vec<PublicationRecord>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    check_header(&header, &PUBLICATION_HEADER)?;

    let mut pubs = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = record_line(&row);
        if row.len() != 2 {
            return Err(Error::parse(
                line,
                format!("expected 2 fields, found {}", row.len()),
            ));
        }
        let year: i32 = parse_field(line, "year", row.get(0).unwrap_or(""), "integer")?;
        if !YEAR_RANGE.contains(&year) {
            return Err(Error::parse(
                line,
                format!(
                    "field `year`: {year} outside {}..={}",
                    YEAR_RANGE.start(),
                    YEAR_RANGE.end()
                ),
            ));
        }
        let is_top10 = match row.get(1).unwrap_or("") {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(
                    line,
                    format!("field `is_top10`: expected 0 or 1, found `{other}`"),
                ))
            }
        };
        pubs.push(PublicationRecord { year, is_top10 });
    }
    if pubs.is_empty() {
        return Err(Error::domain("publication file contains no rows"));
    }
    Ok(pubs)
}

/// Echoes a dataset back out as a count-column ranking CSV, in rank order.
pub fn write_ranking_csv(out: &mut dyn Write, ds: &RankingDataset) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RANKING_HEADER).map_err(io::Error::other)?;
    for rec in ds.records() {
        w.write_record([
            rec.id.as_str(),
            &rec.n_pubs.to_string(),
            &rec.n_top10.to_string(),
        ])
        .map_err(io::Error::other)?;
    }
    w.flush()
}

// ── Report formatting ───────────────────────────────────────────────

/// Fixed six-decimal rendering; negative zero normalizes to zero.
pub fn fmt6(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

fn fmt_p(test: &TestResult) -> String {
    if test.underflow() {
        "0.000000".to_string()
    } else {
        fmt6(test.p_value)
    }
}

fn flags(test: &TestResult) -> String {
    let mut parts = Vec::new();
    if test.small_sample_warning {
        parts.push("small-sample");
    }
    if test.underflow() {
        parts.push("underflow");
    }
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(";")
    }
}

fn direction_symbol(direction: Ordering) -> &'static str {
    match direction {
        Ordering::Greater => "+",
        Ordering::Less => "-",
        Ordering::Equal => "0",
    }
}

type Row = Vec<(&'static str, String)>;

fn write_rows(out: &mut dyn Write, format: Format, rows: &[Row]) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = rows.first() {
                w.write_record(first.iter().map(|(k, _)| *k))
                    .map_err(io::Error::other)?;
            }
            for row in rows {
                w.write_record(row.iter().map(|(_, v)| v.as_str()))
                    .map_err(io::Error::other)?;
            }
            w.flush()
        }
        Format::Text => {
            for row in rows {
                let line: Vec<String> = row.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(out, "{}", line.join(","))?;
            }
            Ok(())
        }
    }
}

/// One-sample test report.
pub fn write_test_one(
    out: &mut dyn Write,
    rec: &InstitutionRecord,
    p_expected: f64,
    test: &TestResult,
    effect: &EffectSize,
    format: Format,
) -> io::Result<()> {
    let direction = rec.proportion().total_cmp(&p_expected);
    let row: Row = vec![
        ("n_pubs", rec.n_pubs.to_string()),
        ("n_top10", rec.n_top10.to_string()),
        ("p_observed", fmt6(rec.proportion())),
        ("p_expected", fmt6(p_expected)),
        ("z", fmt6(test.z)),
        ("p_value", fmt_p(test)),
        ("significant", test.significant.to_string()),
        ("alpha", fmt6(test.alpha)),
        ("tails", test.tails.label().to_string()),
        ("h", fmt6(effect.value)),
        ("band", effect.band.label().to_string()),
        ("direction", direction_symbol(direction).to_string()),
        ("flags", flags(test)),
    ];
    write_rows(out, format, &[row])
}

/// Two-sample test report with the difference interval.
#[allow(clippy::too_many_arguments)]
pub fn write_test_pair(
    out: &mut dyn Write,
    a: &InstitutionRecord,
    b: &InstitutionRecord,
    test: &TestResult,
    effect: &EffectSize,
    ci: &ConfidenceInterval,
    format: Format,
) -> io::Result<()> {
    let row: Row = vec![
        ("n_pubs_a", a.n_pubs.to_string()),
        ("n_top10_a", a.n_top10.to_string()),
        ("n_pubs_b", b.n_pubs.to_string()),
        ("n_top10_b", b.n_top10.to_string()),
        ("p_a", fmt6(a.proportion())),
        ("p_b", fmt6(b.proportion())),
        ("z", fmt6(test.z)),
        ("p_value", fmt_p(test)),
        ("significant", test.significant.to_string()),
        ("alpha", fmt6(test.alpha)),
        ("tails", test.tails.label().to_string()),
        ("h", fmt6(effect.value)),
        ("band", effect.band.label().to_string()),
        ("estimate", fmt6(ci.estimate)),
        ("standard_error", fmt6(ci.standard_error)),
        ("ci_level", fmt6(ci.level)),
        ("ci_lower", fmt6(ci.lower)),
        ("ci_upper", fmt6(ci.upper)),
        ("flags", flags(test)),
    ];
    write_rows(out, format, &[row])
}

/// Per-institution excellence flags, in rank order.
pub fn write_excellence(
    out: &mut dyn Write,
    ds: &RankingDataset,
    report: &[ExcellenceFlag],
    format: Format,
) -> io::Result<()> {
    let rows: Vec<Row> = report
        .iter()
        .map(|f| {
            let rec = &ds.records()[f.rank - 1];
            vec![
                ("rank", f.rank.to_string()),
                ("institution", f.id.clone()),
                ("n_pubs", rec.n_pubs.to_string()),
                ("n_top10", rec.n_top10.to_string()),
                ("proportion", fmt6(rec.proportion())),
                ("z", fmt6(f.test.z)),
                ("p_value", fmt_p(&f.test)),
                ("significant", f.test.significant.to_string()),
                ("h", fmt6(f.effect.value)),
                ("band", f.effect.band.label().to_string()),
                ("direction", direction_symbol(f.direction).to_string()),
                ("flags", flags(&f.test)),
            ]
        })
        .collect();
    write_rows(out, format, &rows)
}

/// All-pairs comparison matrix, one row per unordered pair.
pub fn write_matrix(
    out: &mut dyn Write,
    ds: &RankingDataset,
    matrix: &PairwiseMatrix,
    format: Format,
) -> io::Result<()> {
    let records = ds.records();
    let rows: Vec<Row> = matrix
        .cells
        .iter()
        .map(|cell| {
            let (ra, rb) = (&records[cell.a], &records[cell.b]);
            let mut row: Row = vec![
                ("rank_a", (cell.a + 1).to_string()),
                ("rank_b", (cell.b + 1).to_string()),
                ("institution_a", ra.id.clone()),
                ("institution_b", rb.id.clone()),
            ];
            match &cell.outcome {
                PairOutcome::Tested { test, effect, ci } => {
                    row.extend([
                        ("z", fmt6(test.z)),
                        ("p_value", fmt_p(test)),
                        ("significant", test.significant.to_string()),
                        ("h", fmt6(effect.value)),
                        ("band", effect.band.label().to_string()),
                        ("estimate", fmt6(ci.estimate)),
                        ("ci_lower", fmt6(ci.lower)),
                        ("ci_upper", fmt6(ci.upper)),
                        ("flags", flags(test)),
                    ]);
                }
                PairOutcome::Degenerate { effect, ci } => {
                    row.extend([
                        ("z", "na".to_string()),
                        ("p_value", "na".to_string()),
                        ("significant", "na".to_string()),
                        ("h", fmt6(effect.value)),
                        ("band", effect.band.label().to_string()),
                        ("estimate", fmt6(ci.estimate)),
                        ("ci_lower", fmt6(ci.lower)),
                        ("ci_upper", fmt6(ci.upper)),
                        ("flags", "degenerate".to_string()),
                    ]);
                }
            }
            row
        })
        .collect();
    write_rows(out, format, &rows)
}

/// Trivial-difference neighborhood, one row per non-reference institution
/// with the summary repeated in the leading columns.
pub fn write_neighborhood(
    out: &mut dyn Write,
    report: &NeighborhoodReport,
    format: Format,
) -> io::Result<()> {
    let rows: Vec<Row> = report
        .neighbors
        .iter()
        .map(|n| {
            vec![
                ("reference", report.reference_id.clone()),
                ("reference_rank", report.reference_rank.to_string()),
                ("h_threshold", fmt6(report.h_threshold)),
                ("count", report.count.to_string()),
                ("span_low", report.span.0.to_string()),
                ("span_high", report.span.1.to_string()),
                ("rank", n.rank.to_string()),
                ("institution", n.id.clone()),
                ("h", fmt6(n.h)),
                ("trivial", n.trivial.to_string()),
            ]
        })
        .collect();
    write_rows(out, format, &rows)
}

/// Power report row.
pub fn write_power(out: &mut dyn Write, report: &PowerReport, format: Format) -> io::Result<()> {
    let row: Row = vec![
        ("h", fmt6(report.h)),
        ("n1", report.n1.to_string()),
        ("n2", report.n2.to_string()),
        ("alpha", fmt6(report.alpha)),
        ("tails", report.tails.label().to_string()),
        ("power", fmt6(report.power)),
    ];
    write_rows(out, format, &[row])
}

/// Required sample size row, with the power achieved at the returned n.
#[allow(clippy::too_many_arguments)]
pub fn write_sample_size(
    out: &mut dyn Write,
    h: f64,
    alpha: f64,
    target_power: f64,
    tails: Tails,
    n_per_group: u64,
    achieved_power: f64,
    format: Format,
) -> io::Result<()> {
    let row: Row = vec![
        ("h", fmt6(h)),
        ("alpha", fmt6(alpha)),
        ("target_power", fmt6(target_power)),
        ("tails", tails.label().to_string()),
        ("n_per_group", n_per_group.to_string()),
        ("achieved_power", fmt6(achieved_power)),
    ];
    write_rows(out, format, &[row])
}

/// Cluster plan table; in text form the selected-cluster comparison and
/// the homogeneity sweep are appended after the cluster rows.
pub fn write_cluster_plan(
    out: &mut dyn Write,
    plan: &ClusterPlan,
    comparison: Option<&ClusterComparison>,
    sweep: &[ClusterComparison],
    format: Format,
) -> io::Result<()> {
    let rows: Vec<Row> = plan
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                ("cluster", i.to_string()),
                ("start_year", c.start_year.to_string()),
                ("end_year", c.end_year.to_string()),
                ("n_pubs", c.n_pubs.to_string()),
                ("n_top10", c.n_top10.to_string()),
                (
                    "proportion",
                    c.proportion().map(fmt6).unwrap_or_else(|| "na".to_string()),
                ),
                ("selected", (plan.selected_index == Some(i)).to_string()),
            ]
        })
        .collect();
    write_rows(out, format, &rows)?;

    if format == Format::Text {
        if let Some(seed) = plan.seed {
            writeln!(out, "seed={seed}")?;
        }
        if let Some(cmp) = comparison {
            writeln!(
                out,
                "comparison=cluster_vs_complement,cluster={},z={},p_value={},significant={},h={},band={},flags={}",
                cmp.cluster_index,
                fmt6(cmp.test.z),
                fmt_p(&cmp.test),
                cmp.test.significant,
                fmt6(cmp.effect.value),
                cmp.effect.band.label(),
                flags(&cmp.test),
            )?;
        }
        if !sweep.is_empty() {
            let max_abs_z = sweep.iter().map(|c| c.test.z.abs()).fold(0.0, f64::max);
            writeln!(
                out,
                "homogeneity=max_abs_z,clusters_tested={},value={}",
                sweep.len(),
                fmt6(max_abs_z)
            )?;
        }
    }
    Ok(())
}

/// Calibration table row for a simulation run.
pub fn write_simulation(
    out: &mut dyn Write,
    experiment: &str,
    fields: &[(&'static str, String)],
    format: Format,
) -> io::Result<()> {
    let mut row: Row = vec![("experiment", experiment.to_string())];
    row.extend(fields.iter().cloned());
    write_rows(out, format, &[row])
}
