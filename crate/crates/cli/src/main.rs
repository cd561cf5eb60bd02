//! `qerasure`: bounds, thresholds, rank profiles, percolation estimates and
//! self-checks from the command line. Every output is CSV preceded by `#`
//! comment lines that record the version, subcommand, flags and seed.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qerasure::css_graph::CssCode;
use qerasure::output::{csv_num, parse_grid};
use qerasure::percolation::{PercolationInstance, PercolationRow, PERCOLATION_CSV_HEADER};
use qerasure::rank_profile::{ExpectationMode, RankProfile, RankView};
use qerasure::series_bounds::{
    bound_curve, css2m_bound, default_rate, perc_table, stab_bound, threshold_line,
    threshold_solve, BoundKind, BoundSpec, PERC_TABLE_CSV_HEADER, THRESHOLD_CSV_HEADER,
};
use qerasure::stabilizer::StabilizerMatrix;
use qerasure::verify::{run_suite, Suite};

#[derive(Parser, Debug)]
#[command(
    name = "qerasure",
    version,
    about = "Erasure bounds and checks for stabilizer and CSS codes"
)]
struct Cli {
    /// Seed for every random choice; recorded in the output header.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a rate bound at one point or along a grid.
    Bound(BoundArgs),
    /// Smallest p where a rate bound meets the target rate.
    Threshold(ThresholdArgs),
    /// Bounds on the bond-percolation threshold of m-regular tilings.
    PercTable(PercTableArgs),
    /// Mean-rank profile phi(p) and delta(p) of a code.
    Profile(ProfileArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
    /// Cluster and erasure-failure estimates on the graph of a CSS code.
    Percolate(PercolateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Stab,
    Css2m,
}

impl From<Kind> for BoundKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Stab => BoundKind::Stabilizer,
            Kind::Css2m => BoundKind::Css2m,
        }
    }
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    m: usize,
    /// Single erasure probability.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    p: Option<f64>,
    /// Grid `A:B:STEP` (endpoint included); emits the full curve.
    #[arg(long)]
    grid: Option<String>,
    /// Target rate for the curve's rate column [default: 1 - 4/m].
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    m: usize,
    /// Target rate [default: 1 - 4/m].
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args, Debug)]
struct PercTableArgs {
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,30,40,50")]
    m_list: Vec<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// Code file in the `stab n r` or `css n rX rZ` format.
    #[arg(long)]
    code: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Monte Carlo trials per grid point.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value = "0:1:0.05")]
    grid: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Lemmas,
    Appendix,
    Series,
    Example,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Lemmas => Suite::Lemmas,
            SuiteArg::Appendix => Suite::Appendix,
            SuiteArg::Series => Suite::Series,
            SuiteArg::Example => Suite::Example,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
}

#[derive(Args, Debug)]
struct PercolateArgs {
    /// CSS file: H_X is the graph's incidence matrix, H_Z its faces.
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    p: f64,
    /// Cluster-size cutoff for f_r.
    #[arg(long, default_value_t = 5)]
    r: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Edge whose cluster defines f_r and g_r.
    #[arg(long, default_value_t = 0)]
    edge: usize,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "default".to_string(), T::to_string)
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Stab => "stab",
        Kind::Css2m => "css2m",
    }
}

/// Subcommand name and its flags with defaults filled in.
fn describe(cmd: &Command) -> (&'static str, String) {
    match cmd {
        Command::Bound(a) => (
            "bound",
            format!(
                "--kind {} --m {} --p {} --grid {} --rate {}",
                kind_name(a.kind),
                a.m,
                opt(&a.p),
                opt(&a.grid),
                opt(&a.rate)
            ),
        ),
        Command::Threshold(a) => (
            "threshold",
            format!(
                "--kind {} --m {} --rate {}",
                kind_name(a.kind),
                a.m,
                opt(&a.rate)
            ),
        ),
        Command::PercTable(a) => (
            "perc-table",
            format!(
                "--m-list {}",
                a.m_list
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        ),
        Command::Profile(a) => (
            "profile",
            format!(
                "--code {} --mode {:?} --trials {} --grid {}",
                a.code.display(),
                a.mode,
                a.trials,
                a.grid
            ),
        ),
        Command::Verify(a) => ("verify", format!("--suite {:?}", a.suite).to_lowercase()),
        Command::Percolate(a) => (
            "percolate",
            format!(
                "--code {} --p {} --r {} --trials {} --edge {}",
                a.code.display(),
                a.p,
                a.r,
                a.trials,
                a.edge
            ),
        ),
    }
}

fn header(cli: &Cli) -> String {
    let (name, flags) = describe(&cli.command);
    format!(
        "# qerasure {}\n# command: {name} {flags}\n# seed: {}\n",
        qerasure::VERSION,
        cli.seed
    )
}

enum CodeFile {
    Stabilizer(StabilizerMatrix),
    Css(CssCode),
}

fn read_code(path: &PathBuf) -> Result<CodeFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    let parsed = if first.starts_with("css") {
        CodeFile::Css(CssCode::parse_text(&text)?)
    } else {
        CodeFile::Stabilizer(StabilizerMatrix::parse_text(&text)?)
    };
    Ok(parsed)
}

fn rate_or_default(rate: Option<f64>, m: usize) -> f64 {
    rate.unwrap_or_else(|| default_rate(m))
}

/// Runs the command; returns the CSV body and whether every check passed.
fn run(cli: &Cli) -> Result<(String, bool)> {
    let mut out = String::new();
    match &cli.command {
        Command::Bound(a) => {
            let spec = BoundSpec::new(a.kind.into(), a.m, rate_or_default(a.rate, a.m))?;
            match (a.p, &a.grid) {
                (Some(p), _) => {
                    let v = match a.kind {
                        Kind::Stab => stab_bound(a.m, p)?,
                        Kind::Css2m => css2m_bound(a.m, p)?,
                    };
                    writeln!(out, "m,kind,p,bound")?;
                    writeln!(out, "{},{},{},{}", a.m, spec.kind, csv_num(p), csv_num(v))?;
                }
                (None, Some(g)) => out.push_str(&bound_curve(&spec, &parse_grid(g)?)?.to_csv()),
                (None, None) => bail!("either --p or --grid is required"),
            }
        }
        Command::Threshold(a) => {
            let spec = BoundSpec::new(a.kind.into(), a.m, rate_or_default(a.rate, a.m))?;
            let t = threshold_solve(&spec)?;
            writeln!(out, "{THRESHOLD_CSV_HEADER}")?;
            writeln!(out, "{}", threshold_line(&spec, t))?;
        }
        Command::PercTable(a) => {
            writeln!(out, "{PERC_TABLE_CSV_HEADER}")?;
            for row in perc_table(&a.m_list)? {
                writeln!(out, "{}", row.to_csv())?;
            }
        }
        Command::Profile(a) => {
            let view = match read_code(&a.code)? {
                CodeFile::Stabilizer(h) => RankView::symplectic(h.to_symplectic()),
                CodeFile::Css(c) => RankView::symplectic(
                    StabilizerMatrix::from_css(c.hx(), c.hz())?.to_symplectic(),
                ),
            };
            let mode = match a.mode {
                Mode::Exact => ExpectationMode::Exact,
                Mode::Mc => ExpectationMode::MonteCarlo {
                    trials: a.trials,
                    seed: cli.seed,
                },
            };
            out.push_str(&RankProfile::compute(&view, &parse_grid(&a.grid)?, &mode)?.to_csv());
        }
        Command::Verify(a) => {
            writeln!(out, "suite,check,status,detail")?;
            let mut ok = true;
            for report in run_suite(a.suite.into(), cli.seed)? {
                ok &= report.passed();
                out.push_str(&report.to_text());
            }
            return Ok((out, ok));
        }
        Command::Percolate(a) => {
            let code = match read_code(&a.code)? {
                CodeFile::Css(c) => c,
                CodeFile::Stabilizer(_) => bail!("percolate needs a css file"),
            };
            let inst = PercolationInstance::from_code(&code)?;
            let row = PercolationRow::compute(&inst, a.p, a.r, a.trials, cli.seed, a.edge)?;
            writeln!(out, "{PERCOLATION_CSV_HEADER}")?;
            writeln!(out, "{}", row.to_csv())?;
        }
    }
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(body, ok)| {
        let text = header(&cli) + &body;
        match &cli.output {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
            }
            None => print!("{text}"),
        }
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
