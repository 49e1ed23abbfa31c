//! End-to-end CLI behavior: exit codes, error reporting, output formats.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rankstat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_file(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn test_one_reports_expected_values() {
    let out = run(&["test-one", "--n-pubs", "1000", "--n-top10", "130"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("z=3.162278"), "{text}");
    assert!(text.contains("p_value=0.001565"), "{text}");
    assert!(text.contains("significant=true"), "{text}");
    assert!(text.contains("band=trivial"), "{text}");
    assert!(text.contains("direction=+"), "{text}");
}

#[test]
fn test_pair_reports_interval() {
    let out = run(&[
        "test-pair",
        "--n-pubs-a",
        "1000",
        "--n-top10-a",
        "120",
        "--n-pubs-b",
        "1000",
        "--n-top10-b",
        "100",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("z=1.429301"), "{text}");
    assert!(text.contains("significant=false"), "{text}");
    assert!(text.contains("ci_lower=-0.007411"), "{text}");
    assert!(text.contains("ci_upper=0.047411"), "{text}");
}

#[test]
fn help_and_version_exit_zero() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
    assert!(run(&["matrix", "--help"]).status.success());
}

#[test]
fn usage_errors_exit_one() {
    // unknown subcommand / flag are clap usage errors
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["test-one", "--bogus"]).status.code(), Some(1));
    // out-of-range statistical parameters are usage errors too
    let out = run(&[
        "test-one",
        "--n-pubs",
        "10",
        "--n-top10",
        "1",
        "--alpha",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("alpha"), "{}", stderr(&out));
}

#[test]
fn data_errors_exit_two_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();

    let missing = run(&["excellence", "/nonexistent/path.csv"]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_header = write_file(&dir, "h.csv", "inst,n,k\nA,10,1\n");
    let out = run(&["excellence", bad_header.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));

    let bad_counts = write_file(
        &dir,
        "c.csv",
        "institution,n_pubs,n_top10\nA,10,1\nB,10,11\n",
    );
    let out = run(&["excellence", bad_counts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("n_top10"), "{err}");

    let dupes = write_file(
        &dir,
        "d.csv",
        "institution,n_pubs,n_top10\nA,10,1\nA,20,2\n",
    );
    let out = run(&["matrix", dupes.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("duplicate"), "{}", stderr(&out));
}

#[test]
fn unknown_reference_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let ranking = write_file(
        &dir,
        "r.csv",
        "institution,n_pubs,n_top10\nA,1000,100\nB,1000,110\n",
    );
    let out = run(&[
        "neighborhood",
        ranking.to_str().unwrap(),
        "--reference",
        "Nowhere",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Nowhere"), "{}", stderr(&out));
}

#[test]
fn matrix_identical_pair_row() {
    let dir = tempfile::tempdir().unwrap();
    let ranking = write_file(
        &dir,
        "r.csv",
        "institution,n_pubs,n_top10\nA,1000,100\nB,1000,100\n",
    );
    let out = run(&["matrix", ranking.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("z=0.000000"), "{text}");
    assert!(text.contains("h=0.000000,band=trivial"), "{text}");
}

#[test]
fn csv_format_emits_header_row() {
    let dir = tempfile::tempdir().unwrap();
    let ranking = write_file(
        &dir,
        "r.csv",
        "institution,n_pubs,n_top10\nA,1000,130\nB,1000,100\n",
    );
    let out = run(&["excellence", ranking.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "rank,institution,n_pubs,n_top10,proportion,z,p_value,significant,h,band,direction,flags"
    );
    assert!(text.lines().count() == 3);
    assert!(text.contains("3.162278"), "{text}");
}

#[test]
fn proportions_mode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ranking = write_file(
        &dir,
        "p.csv",
        "institution,n_pubs,p_top10\nA,1000,0.13\nB,500,0.10\n",
    );
    let out = run(&[
        "excellence",
        ranking.to_str().unwrap(),
        "--proportions",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("A,1000,130"), "{text}");
    assert!(text.contains("B,500,50"), "{text}");

    // counts file parsed under --proportions must fail on the header
    let counts = write_file(&dir, "c.csv", "institution,n_pubs,n_top10\nA,10,1\n");
    let out = run(&["excellence", counts.to_str().unwrap(), "--proportions"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cluster_plan_with_and_without_selection() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::from("year,is_top10\n");
    for i in 0..300u32 {
        rows.push_str(&format!("{},{}\n", 1990 + (i % 9), u32::from(i % 8 == 0)));
    }
    let pubs = write_file(&dir, "pubs.csv", &rows);

    let plain = run(&["cluster-plan", pubs.to_str().unwrap()]);
    assert!(plain.status.success());
    let text = stdout(&plain);
    assert!(text.contains("start_year=1990,end_year=1992"), "{text}");
    assert!(text.contains("selected=false"), "{text}");
    assert!(!text.contains("comparison="), "{text}");
    assert!(text.contains("homogeneity=max_abs_z"), "{text}");

    let seeded = run(&["cluster-plan", pubs.to_str().unwrap(), "--seed", "9"]);
    assert!(seeded.status.success());
    let text = stdout(&seeded);
    assert!(text.contains("selected=true"), "{text}");
    assert!(text.contains("seed=9"), "{text}");
    assert!(text.contains("comparison=cluster_vs_complement"), "{text}");
}

#[test]
fn simulate_emits_calibration_fields() {
    let out = run(&[
        "simulate", "type1", "--n", "100", "--p", "0.10", "--trials", "500", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("experiment=type1"), "{text}");
    assert!(text.contains("empirical_rate="), "{text}");
    assert!(text.contains("nominal_alpha=0.050000"), "{text}");

    let out = run(&[
        "simulate", "power", "--n1", "50", "--n2", "50", "--p1", "0.10", "--p2", "0.30",
        "--trials", "500", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("h=0.515778"), "{text}");
    assert!(text.contains("empirical_power="), "{text}");
    assert!(text.contains("analytic_rejection_rate="), "{text}");

    let out = run(&[
        "simulate", "coverage", "--n1", "50", "--n2", "50", "--p1", "0.12", "--p2", "0.10",
        "--trials", "500", "--seed", "3",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("empirical_coverage="));
}

#[test]
fn simulate_zero_trials_is_usage_style_data_error() {
    let out = run(&[
        "simulate", "type1", "--n", "100", "--p", "0.10", "--trials", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("trials"), "{}", stderr(&out));
}

#[test]
fn degenerate_pair_is_a_data_error() {
    let out = run(&[
        "test-pair",
        "--n-pubs-a",
        "10",
        "--n-top10-a",
        "0",
        "--n-pubs-b",
        "10",
        "--n-top10-b",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degenerate"), "{}", stderr(&out));
}
