use std::path::PathBuf;
use std::process::{Command, Output};

use qerasure::series_bounds::css2m_bound;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qerasure"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data lines after the comment header and the CSV column line.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn header_records_command_and_seed() {
    let out = stdout_ok(&["threshold", "--kind", "css2m", "--m", "8", "--seed", "17"]);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# qerasure "));
    assert_eq!(
        lines[1],
        "# command: threshold --kind css2m --m 8 --rate default"
    );
    assert_eq!(lines[2], "# seed: 17");
    assert_eq!(lines[3], "m,kind,rate,threshold");
}

#[test]
fn bound_single_value() {
    let out = stdout_ok(&["bound", "--kind", "css2m", "--m", "8", "--p", "0.2"]);
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    let expected = css2m_bound(8, 0.2).unwrap();
    assert!((num(&r[0][3]) - expected).abs() < 1e-11);

    let out = stdout_ok(&["bound", "--kind", "css2m", "--m", "5", "--p", "0.5"]);
    assert!(num(&rows(&out)[0][3]).abs() < 1e-12);
}

#[test]
fn bound_curve_rows() {
    let out = stdout_ok(&[
        "bound",
        "--kind",
        "stab",
        "--m",
        "8",
        "--grid",
        "0:0.5:0.005",
    ]);
    assert_eq!(rows(&out).len(), 101);
}

#[test]
fn threshold_values() {
    let t = |kind: &str, m: &str| {
        num(&rows(&stdout_ok(&["threshold", "--kind", kind, "--m", m]))[0][3])
    };
    assert!((t("css2m", "8") - 0.215).abs() < 5e-4);
    assert!((t("stab", "5") - 0.387).abs() < 5e-4);
    assert!((t("css2m", "40") - 0.033).abs() < 5e-4);
    let line = rows(&stdout_ok(&["threshold", "--kind", "css2m", "--m", "8"]))[0][3].clone();
    assert_eq!(line.split('.').nth(1).unwrap().len(), 9);
}

#[test]
fn threshold_without_crossing_fails() {
    let out = run(&["threshold", "--kind", "stab", "--m", "8", "--rate", "0.9"]);
    assert!(!out.status.success());
}

#[test]
fn perc_table_rows() {
    let r = rows(&stdout_ok(&["perc-table"]));
    assert_eq!(r.len(), 6);
    assert_eq!(r[0][0], "5");
    assert_eq!(num(&r[0][1]), 0.25);
    assert!((num(&r[0][2]) - 0.38).abs() < 5e-3);
    assert_eq!(num(&r[0][3]), 0.4);
    assert_eq!(r[5][0], "50");
    assert!((num(&r[5][1]) - 0.020).abs() < 5e-4);
    assert!((num(&r[5][2]) - 0.026).abs() < 5e-4);
    assert!((num(&r[5][3]) - 0.040).abs() < 5e-4);
}

#[test]
fn profile_exact_on_worked_example() {
    let code = fixture("worked_example.stab");
    let out = stdout_ok(&[
        "profile",
        "--code",
        &code,
        "--mode",
        "exact",
        "--grid",
        "0:0.5:0.05",
    ]);
    let r = rows(&out);
    assert_eq!(r.len(), 11);
    assert_eq!(r[0][1], "0");
    for row in &r {
        assert!(num(&row[3]) >= 0.0, "{row:?}");
    }
}

#[test]
fn profile_mc_is_reproducible() {
    let code = fixture("example_2_5.css");
    let args = [
        "profile", "--code", &code, "--mode", "mc", "--trials", "10000", "--seed", "5", "--grid",
        "0:1:0.25",
    ];
    let a = stdout_ok(&args);
    assert_eq!(a, stdout_ok(&args));
    assert!(a.contains("# seed: 5"));
    assert_eq!(rows(&a)[0][1], "0");
}

#[test]
fn profile_rejects_missing_file() {
    let out = run(&["profile", "--code", "/nonexistent/code.stab"]);
    assert!(!out.status.success());
}

#[test]
fn verify_example_and_series() {
    let out = stdout_ok(&["verify", "--suite", "example"]);
    assert!(out.contains("example,parameters,PASS"));
    assert!(!out.contains("FAIL"));
    let out = stdout_ok(&["verify", "--suite", "series"]);
    assert!(out.contains("series,subtree_oracle,PASS"));
    assert!(out.contains("series,functional_equation,PASS"));
}

#[test]
fn percolate_extremes() {
    let code = fixture("example_2_5.css");
    let zero = rows(&stdout_ok(&[
        "percolate",
        "--code",
        &code,
        "--p",
        "0",
        "--trials",
        "500",
    ]));
    assert!(zero[0][2..].iter().all(|v| v == "0"), "{zero:?}");
    let one = rows(&stdout_ok(&[
        "percolate",
        "--code",
        &code,
        "--p",
        "1",
        "--trials",
        "500",
    ]));
    assert_eq!(one[0][8], "1");
}

#[test]
fn percolate_g_below_f() {
    let code = fixture("example_2_5.css");
    let r = rows(&stdout_ok(&[
        "percolate",
        "--code",
        &code,
        "--p",
        "0.1",
        "--r",
        "1",
        "--trials",
        "100000",
        "--seed",
        "3",
    ]));
    let (f, fs, g) = (num(&r[0][2]), num(&r[0][3]), num(&r[0][4]));
    assert!(g <= f + 3.0 * fs);
}

#[test]
fn percolate_needs_css_file() {
    let out = run(&[
        "percolate",
        "--code",
        &fixture("worked_example.stab"),
        "--p",
        "0.1",
    ]);
    assert!(!out.status.success());
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("qerasure-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curve.csv");
    let args = [
        "bound",
        "--kind",
        "css2m",
        "--m",
        "8",
        "--grid",
        "0:0.5:0.05",
    ];
    let printed = stdout_ok(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    assert_eq!(stdout_ok(&with_file), "");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_flags_exit_nonzero() {
    assert!(!run(&["bound", "--kind", "stab", "--m", "8"])
        .status
        .success());
    assert!(!run(&["bound", "--kind", "nope", "--m", "8", "--p", "0.1"])
        .status
        .success());
    assert!(!run(&["bound", "--kind", "stab", "--m", "8", "--p", "0.7"])
        .status
        .success());
    assert!(
        !run(&["bound", "--kind", "stab", "--m", "8", "--grid", "0:1"])
            .status
            .success()
    );
}
