//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always appear in
//! `cargo test` output. Criteria that cannot hold because the published
//! data contradicts them are listed in `KNOWN_RED`; they print FAIL and do
//! not fail the run, but one that unexpectedly passes does, so the list
//! cannot go stale.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qerasure::css_graph::example_code_2_5;
use qerasure::f2la::BitVector;
use qerasure::percolation::{
    check_cluster_link, erasure_failure_rate, erasure_failure_rate_stabilizer, estimate_fr_gr,
    PercolationInstance,
};
use qerasure::rank_profile::{phi, ExpectationMode, RankView, RankWeightTable};
use qerasure::sampling::derive_seed;
use qerasure::stabilizer::{random_stabilizer, StabilizerCode, StabilizerMatrix};
use qerasure::verify::{appendix_tally, example_facts, lemma_tally, run_suite, Suite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that stay red, with the reason.
const KNOWN_RED: &[(u32, &str)] = &[
    (2, "published table prints 0.035 for 1/29 = 0.0345"),
    (
        3,
        "both graphs of the published example code have girth 4, not 5",
    ),
];

const SIGMAS: f64 = 3.0;

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// `round(value, digits) == printed`, compared as integers.
fn rounds_to(value: f64, printed: f64, digits: i32) -> bool {
    let s = 10f64.powi(digits);
    (value * s).round() as i64 == (printed * s).round() as i64
}

fn bin(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_qerasure"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').filter_map(|v| v.parse().ok()).collect())
        .collect()
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!(
        "{}; {:.2}s (limit {}s)",
        o.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    o.passed &= took < limit;
    o
}

fn threshold_table() -> Outcome {
    let cases = [
        ("stab", "8", "0.5", 0.228),
        ("css2m", "8", "0.5", 0.215),
        ("stab", "5", "0.2", 0.387),
        ("css2m", "5", "0.2", 0.381),
    ];
    let mut ok = true;
    let mut got = Vec::new();
    for (kind, m, rate, printed) in cases {
        let start = Instant::now();
        let out = bin(&["threshold", "--kind", kind, "--m", m, "--rate", rate]);
        let fast = start.elapsed() < Duration::from_secs(1);
        let t = data_rows(&out)[0][2];
        ok &= fast && rounds_to(t, printed, 3);
        got.push(format!("{kind} m={m}: {t:.6}"));
    }
    outcome(ok, got.join(", "))
}

fn percolation_table() -> Outcome {
    let printed = [
        (5, 0.25, 2, 0.38, 2, 0.40, 2),
        (10, 0.11, 2, 0.16, 2, 0.20, 2),
        (20, 0.053, 3, 0.073, 3, 0.100, 3),
        (30, 0.035, 3, 0.046, 3, 0.067, 3),
        (40, 0.026, 3, 0.033, 3, 0.050, 3),
        (50, 0.020, 3, 0.026, 3, 0.040, 3),
    ];
    timed(Duration::from_secs(10), || {
        let rows = data_rows(&bin(&["perc-table", "--m-list", "5,10,20,30,40,50"]));
        let mut bad = Vec::new();
        for (row, &(m, lo, dl, up, du, cap, dc)) in rows.iter().zip(&printed) {
            if row[0] as usize != m {
                bad.push(format!("row order at m={m}"));
            }
            if !rounds_to(row[1], lo, dl) {
                bad.push(format!("m={m} 1/(m-1)={:.4} vs {lo}", row[1]));
            }
            if !rounds_to(row[2], up, du) {
                bad.push(format!("m={m} css={:.4} vs {up}", row[2]));
            }
            if !rounds_to(row[3], cap, dc) {
                bad.push(format!("m={m} 2/m={:.4} vs {cap}", row[3]));
            }
        }
        let ok = rows.len() == 6 && bad.is_empty();
        outcome(
            ok,
            if bad.is_empty() {
                "18 cells match".into()
            } else {
                bad.join("; ")
            },
        )
    })
}

fn example_code() -> Outcome {
    timed(Duration::from_secs(30), || {
        let f = example_facts().expect("example facts");
        let ok = f.n == 40
            && f.k == 10
            && f.distance == Some(4)
            && f.valid
            && f.type_2_5 == [true, true]
            && f.components == [1, 1]
            && f.girth == [Some(5), Some(5)];
        outcome(
            ok,
            format!(
                "n={} k={} d={:?} valid={} type={:?} components={:?} girth={:?}",
                f.n, f.k, f.distance, f.valid, f.type_2_5, f.components, f.girth
            ),
        )
    })
}

fn lemma_suite() -> Outcome {
    timed(Duration::from_secs(120), || {
        let t = lemma_tally(0, 200).expect("lemma run");
        let ok = t.codes >= 200
            && t.count_mismatches == 0
            && t.entropy_mismatches == 0
            && t.correctability_mismatches == 0;
        outcome(
            ok,
            format!(
                "{} codes, {} masks, mismatches: counts {}, entropy {}, correctability {}",
                t.codes,
                t.masks,
                t.count_mismatches,
                t.entropy_mismatches,
                t.correctability_mismatches
            ),
        )
    })
}

fn worked_example() -> Outcome {
    let h = StabilizerMatrix::parse_rows(&["IXZYZ", "ZZXIZ", "IYYYZ"]).unwrap();
    let code = StabilizerCode::new(h).unwrap();
    let e = BitVector::from_bools(&[false, true, true, false, false]);
    let a = code.analyze_erasure(&e).unwrap();
    let ok = a.rank_erased == 2 && a.rank_kept == 2 && a.dim_se == 1 && !a.correctable;
    outcome(
        ok,
        format!(
            "rank H_E={} rank H_Ebar={} dim_se={} correctable={}",
            a.rank_erased, a.rank_kept, a.dim_se, a.correctable
        ),
    )
}

fn appendix_suite() -> Outcome {
    let t = appendix_tally(0).expect("appendix run");
    let ok = t.submodular_pairs >= 10_000
        && t.submodular_violations == 0
        && t.codes == 21
        && t.concavity_failures == 0
        && t.negative_delta == 0
        && t.delta_bound_failures == 0;
    outcome(
        ok,
        format!(
            "{} pairs / {} violations; {} codes: concavity failures {}, negative delta {}, bound failures {}",
            t.submodular_pairs,
            t.submodular_violations,
            t.codes,
            t.concavity_failures,
            t.negative_delta,
            t.delta_bound_failures
        ),
    )
}

fn series_suite() -> Outcome {
    let r = run_suite(Suite::Series, 0).expect("series run");
    let detail = r[0]
        .checks
        .iter()
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(r[0].passed(), detail)
}

fn monte_carlo() -> Outcome {
    const RUNS: u64 = 100;
    const TRIALS: u64 = 4_000;
    let ps = [0.1, 0.3, 0.5, 0.7];
    let mut within = 0;
    for run in 0..RUNS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(77, run));
        let n = rng.random_range(4..=12);
        let r = rng.random_range(1..n);
        let view = RankView::symplectic(random_stabilizer(n, r, 0.2, &mut rng).to_symplectic());
        let p = ps[run as usize % ps.len()];
        let exact = RankWeightTable::build(&view).unwrap().phi(p);
        let mc = phi(
            &view,
            p,
            &ExpectationMode::MonteCarlo {
                trials: TRIALS,
                seed: run,
            },
        )
        .unwrap();
        if (mc.value - exact).abs() <= SIGMAS * mc.sigma() {
            within += 1;
        }
    }
    let code = example_code_2_5();
    let mut cross = Vec::new();
    let mut cross_ok = true;
    for p in [0.05, 0.1] {
        let a = erasure_failure_rate(&code, p, 100_000, 1).unwrap();
        let b = erasure_failure_rate_stabilizer(&code, p, 100_000, 2).unwrap();
        let s = (a.sigma().powi(2) + b.sigma().powi(2)).sqrt();
        cross_ok &= (a.value - b.value).abs() <= SIGMAS * s;
        cross.push(format!(
            "p={p}: {:.5} vs {:.5} (sigma {:.1e})",
            a.value, b.value, s
        ));
    }
    outcome(
        within >= 99 && cross_ok,
        format!(
            "phi within 3 sigma in {within}/{RUNS} runs; failure rate {}",
            cross.join(", ")
        ),
    )
}

fn percolation_link() -> Outcome {
    let code = example_code_2_5();
    let mut trials = 0;
    let mut mismatches = 0;
    let mut failures = 0;
    for (i, p) in [0.1, 0.25, 0.4].into_iter().enumerate() {
        let rep = check_cluster_link(&code, p, 10_000, i as u64).unwrap();
        trials += rep.trials;
        mismatches += rep.mismatches;
        failures += rep.non_correctable;
    }
    let inst = PercolationInstance::from_code(&code).unwrap();
    let r = inst.planarity_radius();
    let est = estimate_fr_gr(&inst, 0.1, r, 100_000, 5, 0).unwrap();
    let g_ok = est.g_r.value <= est.f_r.value + SIGMAS * est.f_r.sigma();
    outcome(
        mismatches == 0 && g_ok,
        format!(
            "{trials} masks ({failures} non-correctable), {mismatches} mismatches; r={r}: g={:.5} f={:.5}",
            est.g_r.value, est.f_r.value
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "threshold table", threshold_table),
        (2, "percolation table", percolation_table),
        (3, "example code", example_code),
        (4, "lemma oracle suite", lemma_suite),
        (5, "worked example", worked_example),
        (6, "appendix suite", appendix_suite),
        (7, "series suite", series_suite),
        (8, "monte carlo consistency", monte_carlo),
        (9, "percolation link", percolation_link),
    ];
    let mut ok = true;
    for (id, name, check) in criteria {
        let o = check();
        let red = KNOWN_RED.iter().find(|(k, _)| *k == id);
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = match (red, o.passed) {
            (Some((_, why)), false) => format!(" [known red: {why}]"),
            (Some(_), true) => {
                ok = false;
                " [listed as known red but passed]".to_string()
            }
            (None, false) => {
                ok = false;
                String::new()
            }
            (None, true) => String::new(),
        };
        println!("criterion {id} {status} {name}: {}{note}", o.detail);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
