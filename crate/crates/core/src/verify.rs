//! Self-check suites: brute-force oracles run against the fast algorithms.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::css_graph::{
    connected_components, css_dimension, example_code_2_5, girth, graph_from_2m, is_type_2m,
    min_distance_bounded, validate_css,
};
use crate::error::{Error, Result};
use crate::f2la::{BitMatrix, BitVector};
use crate::output::uniform_grid;
use crate::rank_profile::{
    check_monotone_concave_with, check_submodular, delta_lower_bound, RankView, RankWeightTable,
};
use crate::sampling::{bernoulli_mask, derive_seed};
use crate::series_bounds::{
    enumerate_subtrees, planted_coeffs, rooted_coeffs, verify_functional_equation,
};
use crate::stabilizer::{
    random_stabilizer, StabilizerCode, StabilizerMatrix, COVERED_ENUMERATION_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Lemmas,
    Appendix,
    Series,
    Example,
    All,
}

impl Suite {
    pub const EACH: [Suite; 4] = [
        Suite::Lemmas,
        Suite::Appendix,
        Suite::Series,
        Suite::Example,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Lemmas => "lemmas",
            Suite::Appendix => "appendix",
            Suite::Series => "series",
            Suite::Example => "example",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "appendix" => Ok(Suite::Appendix),
            "series" => Ok(Suite::Series),
            "example" => Ok(Suite::Example),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidParameter(format!("unknown suite {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One `suite,check,PASS|FAIL,detail` line per check.
    pub fn to_text(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{},{},{},{}\n",
                    self.suite,
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.detail
                )
            })
            .collect()
    }
}

/// Runs one suite, or every suite for [`Suite::All`].
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<SuiteReport>> {
    match suite {
        Suite::All => Suite::EACH.iter().map(|&s| run_one(s, seed)).collect(),
        s => Ok(vec![run_one(s, seed)?]),
    }
}

fn run_one(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Lemmas => lemma_checks(seed, LEMMA_CODES)?,
        Suite::Appendix => appendix_checks(seed)?,
        Suite::Series => series_checks()?,
        Suite::Example => example_checks()?,
        Suite::All => unreachable!("expanded by run_suite"),
    };
    Ok(SuiteReport { suite, checks })
}

pub const LEMMA_CODES: usize = 200;
pub const LEMMA_MAX_QUBITS: usize = 6;

/// Random stabilizer code number `index` of a lemma run: 1 to 6 qubits,
/// up to `n` generators, some of them redundant.
pub fn lemma_code(seed: u64, index: u64) -> StabilizerMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index));
    let n = rng.random_range(1..=LEMMA_MAX_QUBITS);
    let r = rng.random_range(1..=n);
    random_stabilizer(n, r, 0.2, &mut rng)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LemmaTally {
    pub codes: u64,
    pub masks: u64,
    pub count_mismatches: u64,
    pub entropy_mismatches: u64,
    pub correctability_mismatches: u64,
}

impl std::ops::Add for LemmaTally {
    type Output = LemmaTally;

    fn add(self, o: LemmaTally) -> LemmaTally {
        LemmaTally {
            codes: self.codes + o.codes,
            masks: self.masks + o.masks,
            count_mismatches: self.count_mismatches + o.count_mismatches,
            entropy_mismatches: self.entropy_mismatches + o.entropy_mismatches,
            correctability_mismatches: self.correctability_mismatches + o.correctability_mismatches,
        }
    }
}

/// Every erasure mask of every code: enumerated covered-operator counts
/// against the rank formulas.
pub fn lemma_tally(seed: u64, codes: usize) -> Result<LemmaTally> {
    (0..codes as u64)
        .into_par_iter()
        .map(|i| {
            let code = StabilizerCode::new(lemma_code(seed, i))?;
            let n = code.num_qubits();
            let mut t = LemmaTally {
                codes: 1,
                ..LemmaTally::default()
            };
            for bits in 0..1u64 << n {
                let e = BitVector::from_u64(n, bits);
                let a = code.analyze_erasure(&e)?;
                let c = code.enumerate_covered(&e, COVERED_ENUMERATION_CAP)?;
                t.masks += 1;
                if c.zero_syndrome != 1 << a.dim_nse || c.stabilizers != 1 << a.dim_se {
                    t.count_mismatches += 1;
                }
                if c.coset_entropy_bits
                    .iter()
                    .any(|&h| h != a.cond_entropy_bits)
                {
                    t.entropy_mismatches += 1;
                }
                if a.correctable != (c.problematic() == 0) {
                    t.correctability_mismatches += 1;
                }
            }
            Ok(t)
        })
        .try_reduce(LemmaTally::default, |a, b| Ok(a + b))
}

fn lemma_checks(seed: u64, codes: usize) -> Result<Vec<Check>> {
    let t = lemma_tally(seed, codes)?;
    let base = format!("{} codes, {} masks", t.codes, t.masks);
    Ok(vec![
        Check::new(
            "covered_counts",
            t.count_mismatches == 0,
            format!("{base}, {} mismatches", t.count_mismatches),
        ),
        Check::new(
            "coset_entropy",
            t.entropy_mismatches == 0,
            format!("{base}, {} mismatches", t.entropy_mismatches),
        ),
        Check::new(
            "correctability",
            t.correctability_mismatches == 0,
            format!("{base}, {} mismatches", t.correctability_mismatches),
        ),
    ])
}

pub const SUBMODULAR_PAIRS: u64 = 10_000;
pub const APPENDIX_RANDOM_CODES: usize = 20;
pub const CONCAVITY_TOL: f64 = 1e-9;

fn worked_example_view() -> RankView {
    let h = StabilizerMatrix::parse_rows(&["IXZYZ", "ZZXIZ", "IYYYZ"]).expect("valid rows");
    RankView::symplectic(h.to_symplectic())
}

/// The worked-example code followed by `APPENDIX_RANDOM_CODES` random codes
/// on 3 to 10 qubits.
pub fn appendix_views(seed: u64) -> Vec<RankView> {
    let mut views = vec![worked_example_view()];
    for i in 0..APPENDIX_RANDOM_CODES as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1000 + i));
        let n = rng.random_range(3..=10);
        let r = rng.random_range(1..n);
        views.push(RankView::symplectic(
            random_stabilizer(n, r, 0.2, &mut rng).to_symplectic(),
        ));
    }
    views
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AppendixTally {
    pub submodular_pairs: u64,
    pub submodular_violations: u64,
    pub codes: usize,
    pub concavity_failures: usize,
    pub negative_delta: usize,
    pub delta_bound_failures: usize,
    pub max_concavity_excess: f64,
}

pub fn appendix_tally(seed: u64) -> Result<AppendixTally> {
    let mut t = AppendixTally::default();
    // Random binary matrices of assorted shapes, 1000 pairs each.
    let per = SUBMODULAR_PAIRS / 10;
    for i in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 500 + i));
        let cols = rng.random_range(4..=40);
        let rows = rng.random_range(1..=cols);
        let density = rng.random_range(0.1..0.6);
        let m = BitMatrix::new(
            cols,
            (0..rows)
                .map(|_| bernoulli_mask(cols, density, &mut rng))
                .collect(),
        )?;
        let rep = check_submodular(&RankView::binary(m), per, derive_seed(seed, 600 + i));
        t.submodular_pairs += rep.trials;
        t.submodular_violations += rep.violations;
    }

    let grid = uniform_grid(0.0, 1.0, 0.01)?;
    let half: Vec<f64> = grid.iter().copied().filter(|&p| p <= 0.5).collect();
    for view in appendix_views(seed) {
        let table = RankWeightTable::build(&view)?;
        t.codes += 1;
        let rep = check_monotone_concave_with(&table, &grid, CONCAVITY_TOL)?;
        t.max_concavity_excess = t
            .max_concavity_excess
            .max(rep.max_concavity_violation)
            .max(rep.max_monotone_violation);
        if !rep.passed() {
            t.concavity_failures += 1;
        }
        let n = view.n();
        let mut negative = false;
        let mut bound_fails = false;
        for &p in &half {
            let phi = table.phi(p);
            let delta = table.phi(1.0 - p) - phi;
            if delta < -CONCAVITY_TOL {
                negative = true;
            }
            if p < 0.5 {
                let lower = delta_lower_bound(view.full_rank(), n, p, phi)?;
                if delta < lower - CONCAVITY_TOL {
                    bound_fails = true;
                }
            }
        }
        t.negative_delta += negative as usize;
        t.delta_bound_failures += bound_fails as usize;
    }
    Ok(t)
}

fn appendix_checks(seed: u64) -> Result<Vec<Check>> {
    let t = appendix_tally(seed)?;
    Ok(vec![
        Check::new(
            "submodularity",
            t.submodular_violations == 0,
            format!(
                "{} pairs, {} violations",
                t.submodular_pairs, t.submodular_violations
            ),
        ),
        Check::new(
            "monotone_concave",
            t.concavity_failures == 0,
            format!(
                "{} codes, {} failures, max excess {:e}",
                t.codes, t.concavity_failures, t.max_concavity_excess
            ),
        ),
        Check::new(
            "delta_nonnegative",
            t.negative_delta == 0,
            format!(
                "{} codes, {} with negative delta",
                t.codes, t.negative_delta
            ),
        ),
        Check::new(
            "delta_lower_bound",
            t.delta_bound_failures == 0,
            format!("{} codes, {} failures", t.codes, t.delta_bound_failures),
        ),
    ])
}

pub const SERIES_ORACLE_MAX_K: usize = 5;
pub const FUNCTIONAL_EQUATION_ORDER: usize = 20;

fn series_checks() -> Result<Vec<Check>> {
    let mut mismatches = Vec::new();
    for m in 3..=5 {
        let a = rooted_coeffs(m, SERIES_ORACLE_MAX_K)?;
        let b = planted_coeffs(m, SERIES_ORACLE_MAX_K)?;
        let rooted = enumerate_subtrees(m, SERIES_ORACLE_MAX_K, false);
        let planted = enumerate_subtrees(m, SERIES_ORACLE_MAX_K, true);
        for k in 0..=SERIES_ORACLE_MAX_K {
            let big = |x: u64| num_rational::BigRational::from_integer(x.into());
            if a.coeff(k) != big(rooted[k]) || b.coeff(k) != big(planted[k]) {
                mismatches.push(format!("m={m} k={k}"));
            }
        }
    }
    let mut fe_fail = Vec::new();
    for m in 3..=10 {
        if !verify_functional_equation(m, FUNCTIONAL_EQUATION_ORDER)? {
            fe_fail.push(m.to_string());
        }
    }
    Ok(vec![
        Check::new(
            "subtree_oracle",
            mismatches.is_empty(),
            format!(
                "m in 3..=5, k <= {SERIES_ORACLE_MAX_K}, {} mismatches {}",
                mismatches.len(),
                mismatches.join(" ")
            )
            .trim_end()
            .to_string(),
        ),
        Check::new(
            "functional_equation",
            fe_fail.is_empty(),
            format!(
                "m in 3..=10 through z^{FUNCTIONAL_EQUATION_ORDER}, {} failures",
                fe_fail.len()
            ),
        ),
    ])
}

/// Facts about the 40-qubit example code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExampleFacts {
    pub n: usize,
    pub k: usize,
    pub distance: Option<usize>,
    pub valid: bool,
    pub type_2_5: [bool; 2],
    pub components: [usize; 2],
    pub simple: [bool; 2],
    pub girth: [Option<usize>; 2],
}

pub fn example_facts() -> Result<ExampleFacts> {
    let c = example_code_2_5();
    let gx = graph_from_2m(c.hx())?;
    let gz = graph_from_2m(c.hz())?;
    Ok(ExampleFacts {
        n: c.n(),
        k: css_dimension(&c)?,
        distance: min_distance_bounded(&c, 5)?,
        valid: validate_css(&c),
        type_2_5: [is_type_2m(c.hx(), 5), is_type_2m(c.hz(), 5)],
        components: [connected_components(&gx), connected_components(&gz)],
        simple: [gx.is_simple(), gz.is_simple()],
        girth: [girth(&gx), girth(&gz)],
    })
}

fn example_checks() -> Result<Vec<Check>> {
    let f = example_facts()?;
    let both = |x: [bool; 2]| x[0] && x[1];
    Ok(vec![
        Check::new("orthogonal", f.valid, format!("validate_css = {}", f.valid)),
        Check::new(
            "parameters",
            f.n == 40 && f.k == 10 && f.distance == Some(4),
            format!("n = {}, k = {}, d = {:?}", f.n, f.k, f.distance),
        ),
        Check::new(
            "dimension_formula",
            f.k == f.n / 5 + 2,
            "k = (1 - 4/m) n + 2 with m = 5",
        ),
        Check::new(
            "type_2_5",
            both(f.type_2_5),
            format!("H_X {}, H_Z {}", f.type_2_5[0], f.type_2_5[1]),
        ),
        Check::new(
            "connected_simple",
            f.components == [1, 1] && both(f.simple),
            format!(
                "components {:?}, simple {:?}, girths {:?}",
                f.components, f.simple, f.girth
            ),
        ),
        // Cycle-space vectors have weight at least the girth, so a weight-4
        // logical needs a graph of girth at most 4.
        Check::new(
            "distance_vs_girth",
            f.girth.iter().flatten().min().copied() <= f.distance,
            format!(
                "min girth {:?} <= d {:?}",
                f.girth.iter().flatten().min(),
                f.distance
            ),
        ),
    ])
}
