//! Black-box tests of the installed binary: exit codes, output routing,
//! CSV/SVG shape, and seed-level reproducibility of a cheap command.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_photon-bandit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("utf-8 stdout")
}

// Small enough to finish instantly, rich enough to exercise the sweep path.
const TINY_SWEEP: &[&str] = &[
    "sweep-si",
    "--steps",
    "200",
    "--reps",
    "20",
    "--si-range",
    "1:4",
    "--t",
    "25",
    "--seed",
    "11",
];

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert!(out.status.success(), "selftest failed: {out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("selftest: all checks passed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn usage_errors_exit_nonzero() {
    for args in [
        &["run", "--pa", "1.5"] as &[&str],
        &["run", "--t", "0"],
        &["sweep-si", "--si-range", "9:3"],
        &["sweep-cp", "--cp-range", "0:5"],
        &["figure", "not-a-figure"],
        &["bogus"],
        // A single point cannot be charted.
        &["run", "--format", "svg"],
    ] {
        let out = run(args);
        assert!(!out.status.success(), "expected failure for {args:?}");
    }
}

#[test]
fn csv_goes_to_stdout_or_file() {
    let on_stdout = run(TINY_SWEEP);
    assert!(on_stdout.status.success());
    let text = stdout_of(&on_stdout);
    assert!(text.starts_with("# photon-bandit"));
    assert!(text.contains("param,mean_total_reward,stderr,reps"));
    // One data row per swept interval.
    let data_rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && l.starts_with(|c: char| c.is_ascii_digit()))
        .count();
    assert_eq!(data_rows, 4);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let to_file = bin()
        .args(TINY_SWEEP)
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty(), "file output must not echo to stdout");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn svg_output_is_a_complete_chart() {
    let mut args = TINY_SWEEP.to_vec();
    args.extend(["--format", "svg"]);
    let out = run(&args);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("<svg"));
    assert!(text.trim_end().ends_with("</svg>"));
    assert!(text.contains("polyline"));
}

#[test]
fn same_seed_means_identical_bytes() {
    let a = run(TINY_SWEEP);
    let b = run(TINY_SWEEP);
    assert_eq!(a.stdout, b.stdout);

    let mut reseeded_args: Vec<&str> = TINY_SWEEP.to_vec();
    let n = reseeded_args.len();
    reseeded_args[n - 1] = "12";
    let c = run(&reseeded_args);
    assert_ne!(a.stdout, c.stdout, "a different seed must change the data");
}
