//! Command-line argument types and dispatch.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use rankstat::cluster::{build_clusters, cluster_vs_population, homogeneity_sweep, select_cluster};
use rankstat::effect::cohens_h;
use rankstat::error::Error;
use rankstat::io::{
    fmt6, parse_publication_csv, parse_ranking_csv, parse_ranking_proportions_csv,
    write_cluster_plan, write_excellence, write_matrix, write_neighborhood, write_power,
    write_sample_size, write_simulation, write_test_one, write_test_pair, Format,
};
use rankstat::montecarlo::{
    simulate_ci_coverage, simulate_power, simulate_type1, SimulationConfig,
};
use rankstat::normal::{normal_cdf, normal_quantile};
use rankstat::power::{power_two_proportions, required_n};
use rankstat::proportions::{diff_ci, one_sample_z, two_sample_z};
use rankstat::ranking::{excellence_flags, pairwise_matrix, trivial_neighborhood};
use rankstat::{InstitutionRecord, RankingDataset, Tails};

/// Why a run failed, mapped to the process exit code: 1 for usage errors,
/// 2 for data errors.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Error),
    Io(io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) | Failure::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Data(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
pub enum FormatArg {
    #[default]
    Text,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
pub enum TailsArg {
    One,
    #[default]
    Two,
}

impl From<TailsArg> for Tails {
    fn from(t: TailsArg) -> Tails {
        match t {
            TailsArg::One => Tails::One,
            TailsArg::Two => Tails::Two,
        }
    }
}

#[derive(Debug, Args)]
struct InputFile {
    /// Ranking CSV file (`institution,n_pubs,n_top10`)
    file: PathBuf,
    /// Read the third column as a proportion (`institution,n_pubs,p_top10`)
    #[arg(long)]
    proportions: bool,
}

#[derive(Debug, Parser)]
#[command(
    name = "rankstat",
    version,
    about = "Significance tests, effect sizes and power analysis for citation-based rankings"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test one institution's top-10% proportion against an expected value
    TestOne {
        /// Publication count
        #[arg(long)]
        n_pubs: u64,
        /// Top-10% publication count
        #[arg(long)]
        n_top10: u64,
        /// Expected proportion under the null
        #[arg(long, default_value_t = 0.10)]
        expected: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t)]
        tails: TailsArg,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Test the difference between two institutions' proportions
    TestPair {
        #[arg(long)]
        n_pubs_a: u64,
        #[arg(long)]
        n_top10_a: u64,
        #[arg(long)]
        n_pubs_b: u64,
        #[arg(long)]
        n_top10_b: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Confidence level for the difference interval
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value_t)]
        tails: TailsArg,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// One-sample test and Cohen's h for every institution in a ranking
    Excellence {
        #[command(flatten)]
        input: InputFile,
        #[arg(long, default_value_t = 0.10)]
        expected: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Pairwise tests, effect sizes and intervals for all institution pairs
    Matrix {
        #[command(flatten)]
        input: InputFile,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Divide alpha by the number of pairs
        #[arg(long)]
        bonferroni: bool,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Institutions trivially different from a reference institution
    Neighborhood {
        #[command(flatten)]
        input: InputFile,
        /// Reference institution id
        #[arg(long)]
        reference: String,
        /// Cohen's h below which a difference counts as trivial
        #[arg(long, default_value_t = 0.2)]
        h_threshold: f64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Power to detect an effect size h with the given group sizes
    Power {
        #[arg(long)]
        h: f64,
        #[arg(long)]
        n1: u64,
        #[arg(long)]
        n2: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t)]
        tails: TailsArg,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Smallest per-group sample size reaching a target power
    SampleSize {
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Target power (conventional default 0.80)
        #[arg(long, default_value_t = 0.80)]
        power: f64,
        #[arg(long, value_enum, default_value_t)]
        tails: TailsArg,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Build year clusters from publication data; optionally select one and
    /// test it against the complement
    ClusterPlan {
        /// Publication CSV file (`year,is_top10`)
        file: PathBuf,
        /// Years per cluster
        #[arg(long, default_value_t = 3)]
        width: u32,
        /// Seed for the random cluster selection; omit to skip selection
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Monte Carlo calibration of the analytic tests and intervals
    Simulate {
        #[command(subcommand)]
        experiment: SimulateCmd,
    },
}

#[derive(Debug, Subcommand)]
enum SimulateCmd {
    /// Rejection rate of the one-sample test under binomial sampling
    Type1 {
        #[arg(long)]
        n: u64,
        /// True proportion generating the data
        #[arg(long)]
        p: f64,
        /// Expected proportion tested against (defaults to --p: Type I error)
        #[arg(long)]
        expected: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Rejection rate of the pooled two-sample test
    Power {
        #[arg(long)]
        n1: u64,
        #[arg(long)]
        n2: u64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Coverage of the Wald interval for the difference of proportions
    Coverage {
        #[arg(long)]
        n1: u64,
        #[arg(long)]
        n2: u64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
}

fn check_open_unit(name: &str, v: f64) -> Result<(), Failure> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Failure::Usage(format!(
            "--{name} must lie in (0,1), got {v}"
        )));
    }
    Ok(())
}

fn check_closed_unit(name: &str, v: f64) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Failure::Usage(format!(
            "--{name} must lie in [0,1], got {v}"
        )));
    }
    Ok(())
}

fn check_non_negative(name: &str, v: f64) -> Result<(), Failure> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Failure::Usage(format!(
            "--{name} must be a non-negative finite value, got {v}"
        )));
    }
    Ok(())
}

fn read_ranking(input: &InputFile) -> Result<RankingDataset, Failure> {
    let file = File::open(&input.file).map_err(|e| {
        Failure::Data(Error::Io(io::Error::new(
            e.kind(),
            format!("{}: {e}", input.file.display()),
        )))
    })?;
    let reader = BufReader::new(file);
    let ds = if input.proportions {
        parse_ranking_proportions_csv(reader)?
    } else {
        parse_ranking_csv(reader)?
    };
    Ok(ds)
}

fn read_publications(path: &Path) -> Result<Vec<rankstat::cluster::PublicationRecord>, Failure> {
    let file = File::open(path).map_err(|e| {
        Failure::Data(Error::Io(io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })?;
    Ok(parse_publication_csv(BufReader::new(file))?)
}

/// Predicted rejection rate of the pooled two-sample z-test at the
/// simulated design, for the calibration table.
fn two_sample_rejection_rate(h: f64, n1: u64, n2: u64, alpha: f64) -> Result<f64, Failure> {
    let info = 1.0 / (1.0 / n1 as f64 + 1.0 / n2 as f64);
    let lambda = h * info.sqrt();
    let zc = normal_quantile(1.0 - alpha / 2.0)?;
    Ok(normal_cdf(lambda - zc)? + normal_cdf(-lambda - zc)?)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::TestOne {
            n_pubs,
            n_top10,
            expected,
            alpha,
            tails,
            format,
        } => {
            check_open_unit("expected", expected)?;
            check_open_unit("alpha", alpha)?;
            let rec = InstitutionRecord::new("institution", n_pubs, n_top10)?;
            let test = one_sample_z(&rec, expected, alpha, tails.into())?;
            let effect = cohens_h(rec.proportion(), expected)?;
            write_test_one(out, &rec, expected, &test, &effect, format.into())?;
        }
        Command::TestPair {
            n_pubs_a,
            n_top10_a,
            n_pubs_b,
            n_top10_b,
            alpha,
            level,
            tails,
            format,
        } => {
            check_open_unit("alpha", alpha)?;
            check_open_unit("level", level)?;
            let a = InstitutionRecord::new("a", n_pubs_a, n_top10_a)?;
            let b = InstitutionRecord::new("b", n_pubs_b, n_top10_b)?;
            let test = two_sample_z(&a, &b, alpha, tails.into())?;
            let effect = cohens_h(a.proportion(), b.proportion())?;
            let ci = diff_ci(&a, &b, level)?;
            write_test_pair(out, &a, &b, &test, &effect, &ci, format.into())?;
        }
        Command::Excellence {
            input,
            expected,
            alpha,
            format,
        } => {
            check_open_unit("expected", expected)?;
            check_open_unit("alpha", alpha)?;
            let ds = read_ranking(&input)?;
            let flags = excellence_flags(&ds, expected, alpha)?;
            write_excellence(out, &ds, &flags, format.into())?;
        }
        Command::Matrix {
            input,
            alpha,
            bonferroni,
            format,
        } => {
            check_open_unit("alpha", alpha)?;
            let ds = read_ranking(&input)?;
            let matrix = pairwise_matrix(&ds, alpha, bonferroni)?;
            write_matrix(out, &ds, &matrix, format.into())?;
        }
        Command::Neighborhood {
            input,
            reference,
            h_threshold,
            format,
        } => {
            check_non_negative("h-threshold", h_threshold)?;
            let ds = read_ranking(&input)?;
            let report = trivial_neighborhood(&ds, &reference, h_threshold)?;
            write_neighborhood(out, &report, format.into())?;
        }
        Command::Power {
            h,
            n1,
            n2,
            alpha,
            tails,
            format,
        } => {
            check_non_negative("h", h)?;
            check_open_unit("alpha", alpha)?;
            let report = power_two_proportions(h, n1, n2, alpha, tails.into())?;
            write_power(out, &report, format.into())?;
        }
        Command::SampleSize {
            h,
            alpha,
            power,
            tails,
            format,
        } => {
            if !(h.is_finite() && h > 0.0) {
                return Err(Failure::Usage(format!(
                    "--h must be a positive finite value, got {h}"
                )));
            }
            check_open_unit("alpha", alpha)?;
            check_open_unit("power", power)?;
            let tails: Tails = tails.into();
            let n = required_n(h, alpha, power, tails)?;
            let achieved = power_two_proportions(h, n, n, alpha, tails)?.power;
            write_sample_size(out, h, alpha, power, tails, n, achieved, format.into())?;
        }
        Command::ClusterPlan {
            file,
            width,
            seed,
            alpha,
            format,
        } => {
            if width == 0 {
                return Err(Failure::Usage("--width must be at least 1".to_string()));
            }
            check_open_unit("alpha", alpha)?;
            let pubs = read_publications(&file)?;
            let mut plan = build_clusters(&pubs, width)?;
            let mut comparison = None;
            if let Some(seed) = seed {
                plan = select_cluster(&plan, seed)?;
                comparison = Some(cluster_vs_population(&plan, alpha)?);
            }
            let sweep = homogeneity_sweep(&plan, alpha)?;
            write_cluster_plan(out, &plan, comparison.as_ref(), &sweep, format.into())?;
        }
        Command::Simulate { experiment } => run_simulation(experiment, out)?,
    }
    Ok(())
}

fn run_simulation(cmd: SimulateCmd, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        SimulateCmd::Type1 {
            n,
            p,
            expected,
            alpha,
            trials,
            seed,
            format,
        } => {
            check_closed_unit("p", p)?;
            let expected = expected.unwrap_or(p);
            check_open_unit("expected", expected)?;
            check_open_unit("alpha", alpha)?;
            let config = SimulationConfig::new(trials, seed).map_err(Failure::Data)?;
            let rate = simulate_type1(n, p, expected, alpha, &config)?;
            write_simulation(
                out,
                "type1",
                &[
                    ("n", n.to_string()),
                    ("p_true", fmt6(p)),
                    ("p_expected", fmt6(expected)),
                    ("alpha", fmt6(alpha)),
                    ("trials", trials.to_string()),
                    ("seed", seed.to_string()),
                    ("empirical_rate", fmt6(rate)),
                    ("nominal_alpha", fmt6(alpha)),
                ],
                format.into(),
            )?;
        }
        SimulateCmd::Power {
            n1,
            n2,
            p1,
            p2,
            alpha,
            trials,
            seed,
            format,
        } => {
            check_closed_unit("p1", p1)?;
            check_closed_unit("p2", p2)?;
            check_open_unit("alpha", alpha)?;
            let config = SimulationConfig::new(trials, seed).map_err(Failure::Data)?;
            let rate = simulate_power(n1, n2, p1, p2, alpha, &config)?;
            let h = cohens_h(p1, p2)?.value;
            let analytic = two_sample_rejection_rate(h, n1, n2, alpha)?;
            write_simulation(
                out,
                "power",
                &[
                    ("n1", n1.to_string()),
                    ("n2", n2.to_string()),
                    ("p1", fmt6(p1)),
                    ("p2", fmt6(p2)),
                    ("h", fmt6(h)),
                    ("alpha", fmt6(alpha)),
                    ("trials", trials.to_string()),
                    ("seed", seed.to_string()),
                    ("empirical_power", fmt6(rate)),
                    ("analytic_rejection_rate", fmt6(analytic)),
                ],
                format.into(),
            )?;
        }
        SimulateCmd::Coverage {
            n1,
            n2,
            p1,
            p2,
            level,
            trials,
            seed,
            format,
        } => {
            check_closed_unit("p1", p1)?;
            check_closed_unit("p2", p2)?;
            check_open_unit("level", level)?;
            let config = SimulationConfig::new(trials, seed).map_err(Failure::Data)?;
            let rate = simulate_ci_coverage(n1, n2, p1, p2, level, &config)?;
            write_simulation(
                out,
                "coverage",
                &[
                    ("n1", n1.to_string()),
                    ("n2", n2.to_string()),
                    ("p1", fmt6(p1)),
                    ("p2", fmt6(p2)),
                    ("level", fmt6(level)),
                    ("trials", trials.to_string()),
                    ("seed", seed.to_string()),
                    ("empirical_coverage", fmt6(rate)),
                    ("nominal_level", fmt6(level)),
                ],
                format.into(),
            )?;
        }
    }
    Ok(())
}
