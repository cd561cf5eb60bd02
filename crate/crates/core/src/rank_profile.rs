//! Mean rank of random column restrictions.
//!
//! For a matrix with `n` columns (qubits), `φ(p) = E_p[rank H_E] / n` where
//! each column is kept independently with probability `p`, and
//! `Δ(p) = φ(1 − p) − φ(p)`. Exact mode sums over all `2^n` masks; because
//! the mask weight only enters through `p^|E| (1 − p)^{n − |E|}`, the
//! enumeration is done once into per-weight rank sums and every `p` is then
//! evaluated as a polynomial, either in floating point or exactly over the
//! rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_len, check_probability, Error, Result};
use crate::f2la::{BitMatrix, BitVector};
use crate::output::csv_num;
use crate::sampling::{bernoulli_mask, derive_seed, mean_stderr, trial_rng};

/// Largest column count for exact `2^n` mask enumeration.
pub const EXACT_ENUMERATION_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpectationMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// A value with an optional Monte Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: None,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.stderr.unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViewKind {
    /// Plain binary matrix; a mask selects columns.
    Binary,
    /// `r × 2n` symplectic matrix; a mask on `n` qubits selects both halves.
    Symplectic,
}

/// A matrix together with the rule for restricting it to a qubit mask.
#[derive(Clone, Debug)]
pub struct RankView {
    kind: ViewKind,
    matrix: BitMatrix,
    n: usize,
    full_rank: usize,
}

impl RankView {
    pub fn binary(matrix: BitMatrix) -> Self {
        let n = matrix.num_cols();
        let full_rank = matrix.rank();
        RankView {
            kind: ViewKind::Binary,
            matrix,
            n,
            full_rank,
        }
    }

    /// `matrix` must have an even number of columns `(x | z)`.
    pub fn symplectic(matrix: BitMatrix) -> Self {
        assert!(
            matrix.num_cols().is_multiple_of(2),
            "symplectic matrix needs 2n columns"
        );
        let n = matrix.num_cols() / 2;
        let full_rank = matrix.rank();
        RankView {
            kind: ViewKind::Symplectic,
            matrix,
            n,
            full_rank,
        }
    }

    pub fn kind(&self) -> ViewKind {
        self.kind
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    /// Number of columns (binary) or qubits (symplectic).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full_rank(&self) -> usize {
        self.full_rank
    }

    pub fn rank_on(&self, mask: &BitVector) -> Result<usize> {
        check_len(self.n, mask.len())?;
        match self.kind {
            ViewKind::Binary => self.matrix.rank_on_columns(mask),
            ViewKind::Symplectic => self.matrix.rank_on_columns(&mask.concat(mask)),
        }
    }
}

/// `Σ_{|E| = w} rank H_E` for every weight `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankWeightTable {
    n: usize,
    sums: Vec<u64>,
}

impl RankWeightTable {
    pub fn build(view: &RankView) -> Result<Self> {
        let n = view.n();
        if n > EXACT_ENUMERATION_CAP {
            return Err(Error::CapExceeded {
                what: "column count for exact enumeration",
                limit: EXACT_ENUMERATION_CAP,
                found: n,
            });
        }
        let total = 1u64 << n;
        let chunk = 1u64 << n.min(10);
        let sums = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut local = vec![0u64; n + 1];
                for bits in c * chunk..((c + 1) * chunk).min(total) {
                    let mask = BitVector::from_u64(n, bits);
                    let r = view.rank_on(&mask).expect("mask length matches") as u64;
                    local[bits.count_ones() as usize] += r;
                }
                local
            })
            .reduce(
                || vec![0u64; n + 1],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        Ok(RankWeightTable { n, sums })
    }

    pub fn sums(&self) -> &[u64] {
        &self.sums
    }

    /// `φ(p)` in floating point.
    pub fn phi(&self, p: f64) -> f64 {
        let n = self.n as i32;
        let q = 1.0 - p;
        let total: f64 = self
            .sums
            .iter()
            .enumerate()
            .map(|(w, &s)| s as f64 * p.powi(w as i32) * q.powi(n - w as i32))
            .sum();
        if self.n == 0 {
            0.0
        } else {
            total / self.n as f64
        }
    }

    /// `φ(p)` exactly.
    pub fn phi_rational(&self, p: &BigRational) -> BigRational {
        if self.n == 0 {
            return BigRational::zero();
        }
        let q = BigRational::one() - p;
        let mut total = BigRational::zero();
        for (w, &s) in self.sums.iter().enumerate() {
            let term = pow(p, w) * pow(&q, self.n - w) * BigRational::from_integer(BigInt::from(s));
            total += term;
        }
        total / BigRational::from_integer(BigInt::from(self.n))
    }
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

fn phi_monte_carlo(view: &RankView, p: f64, trials: u64, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let n = view.n();
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mask = bernoulli_mask(n, p, &mut rng);
            let r = view.rank_on(&mask).expect("mask length matches") as u64;
            (r, r * r)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (mean, se) = mean_stderr(sum, sum_sq, trials);
    Ok(Estimate {
        value: mean / n as f64,
        stderr: Some(se / n as f64),
    })
}

/// `φ(p) = E_p[rank H_E] / n`.
pub fn phi(view: &RankView, p: f64, mode: &ExpectationMode) -> Result<Estimate> {
    check_probability(p)?;
    match mode {
        ExpectationMode::Exact => Ok(Estimate::exact(RankWeightTable::build(view)?.phi(p))),
        ExpectationMode::MonteCarlo { trials, seed } => phi_monte_carlo(view, p, *trials, *seed),
    }
}

/// `Δ(p) = φ(1 − p) − φ(p)`; Monte Carlo errors add in quadrature.
pub fn delta(view: &RankView, p: f64, mode: &ExpectationMode) -> Result<Estimate> {
    check_probability(p)?;
    match mode {
        ExpectationMode::Exact => {
            let table = RankWeightTable::build(view)?;
            Ok(Estimate::exact(table.phi(1.0 - p) - table.phi(p)))
        }
        ExpectationMode::MonteCarlo { trials, seed } => {
            let lo = phi_monte_carlo(view, p, *trials, *seed)?;
            let hi = phi_monte_carlo(view, 1.0 - p, *trials, derive_seed(*seed, 1))?;
            Ok(Estimate {
                value: hi.value - lo.value,
                stderr: Some(lo.sigma().hypot(hi.sigma())),
            })
        }
    }
}

/// `1 − 2p − Δ(p)`, the per-code capacity-style rate bound.
pub fn empirical_rate_bound(view: &RankView, p: f64, mode: &ExpectationMode) -> Result<Estimate> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1/2]")));
    }
    let d = delta(view, p, mode)?;
    Ok(Estimate {
        value: 1.0 - 2.0 * p - d.value,
        stderr: d.stderr,
    })
}

/// `((1 − 2p)/(1 − p)) (rank H / n − M)`, the concavity lower bound on `Δ(p)`
/// from an upper bound `M ≥ φ(p)`.
pub fn delta_lower_bound(rank_h: usize, n: usize, p: f64, upper: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1)")));
    }
    if upper < 0.0 || n == 0 {
        return Err(Error::InvalidParameter("need M >= 0 and n > 0".into()));
    }
    Ok((1.0 - 2.0 * p) / (1.0 - p) * (rank_h as f64 / n as f64 - upper))
}

/// Sampled `(p, φ, Δ)` table.
#[derive(Clone, Debug, PartialEq)]
pub struct RankProfile {
    pub p_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_stderr: Option<Vec<f64>>,
    pub delta: Vec<f64>,
    pub delta_stderr: Option<Vec<f64>>,
}

pub const PROFILE_CSV_HEADER: &str = "p,phi,phi_stderr,delta,delta_stderr,rate_bound";

impl RankProfile {
    pub fn compute(view: &RankView, grid: &[f64], mode: &ExpectationMode) -> Result<Self> {
        for &p in grid {
            check_probability(p)?;
        }
        match mode {
            ExpectationMode::Exact => {
                let table = RankWeightTable::build(view)?;
                let phi = grid.iter().map(|&p| table.phi(p)).collect();
                let delta = grid
                    .iter()
                    .map(|&p| table.phi(1.0 - p) - table.phi(p))
                    .collect();
                Ok(RankProfile {
                    p_grid: grid.to_vec(),
                    phi,
                    phi_stderr: None,
                    delta,
                    delta_stderr: None,
                })
            }
            ExpectationMode::MonteCarlo { .. } => {
                let mut out = RankProfile {
                    p_grid: grid.to_vec(),
                    phi: Vec::new(),
                    phi_stderr: Some(Vec::new()),
                    delta: Vec::new(),
                    delta_stderr: Some(Vec::new()),
                };
                for (i, &p) in grid.iter().enumerate() {
                    // A fresh stream per grid point keeps points independent.
                    let point_mode = match mode {
                        ExpectationMode::MonteCarlo { trials, seed } => {
                            ExpectationMode::MonteCarlo {
                                trials: *trials,
                                seed: derive_seed(*seed, 100 + i as u64),
                            }
                        }
                        ExpectationMode::Exact => unreachable!(),
                    };
                    let ph = phi(view, p, &point_mode)?;
                    let d = delta(view, p, &point_mode)?;
                    out.phi.push(ph.value);
                    out.phi_stderr.as_mut().unwrap().push(ph.sigma());
                    out.delta.push(d.value);
                    out.delta_stderr.as_mut().unwrap().push(d.sigma());
                }
                Ok(out)
            }
        }
    }

    /// `1 − 2p − Δ(p)` where `p ≤ 1/2`, `None` otherwise.
    pub fn rate_bound(&self, i: usize) -> Option<f64> {
        let p = self.p_grid[i];
        (p <= 0.5).then(|| 1.0 - 2.0 * p - self.delta[i])
    }

    /// CSV rows (header included, no trailing comment lines).
    pub fn to_csv(&self) -> String {
        let mut s = String::from(PROFILE_CSV_HEADER);
        s.push('\n');
        let opt =
            |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| csv_num(v[i])).unwrap_or_default();
        for i in 0..self.p_grid.len() {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_num(self.p_grid[i]),
                csv_num(self.phi[i]),
                opt(&self.phi_stderr, i),
                csv_num(self.delta[i]),
                opt(&self.delta_stderr, i),
                self.rate_bound(i).map(csv_num).unwrap_or_default(),
            ));
        }
        s
    }
}

/// Outcome of the monotonicity and midpoint-concavity check.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcavityReport {
    pub points: usize,
    pub monotone_violations: usize,
    pub concavity_violations: usize,
    pub max_monotone_violation: f64,
    pub max_concavity_violation: f64,
}

impl ConcavityReport {
    pub fn passed(&self) -> bool {
        self.monotone_violations == 0 && self.concavity_violations == 0
    }
}

/// Checks `φ(p_i) ≤ φ(p_{i+1}) + tol` and
/// `φ((p_i + p_{i+2})/2) ≥ (φ(p_i) + φ(p_{i+2}))/2 − tol`.
///
/// The grid points are converted exactly to rationals and `φ` is evaluated
/// with rational mask weights, so the only rounding is in the final
/// comparison against `tol`.
pub fn check_monotone_concave(view: &RankView, grid: &[f64], tol: f64) -> Result<ConcavityReport> {
    let table = RankWeightTable::build(view)?;
    check_monotone_concave_with(&table, grid, tol)
}

pub fn check_monotone_concave_with(
    table: &RankWeightTable,
    grid: &[f64],
    tol: f64,
) -> Result<ConcavityReport> {
    let ps = grid
        .iter()
        .map(|&p| {
            check_probability(p)?;
            BigRational::from_float(p).ok_or_else(|| Error::InvalidParameter(format!("{p}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<BigRational> = ps.iter().map(|p| table.phi_rational(p)).collect();
    let two = BigRational::from_integer(BigInt::from(2));
    let mut report = ConcavityReport {
        points: grid.len(),
        monotone_violations: 0,
        concavity_violations: 0,
        max_monotone_violation: 0.0,
        max_concavity_violation: 0.0,
    };
    for w in values.windows(2) {
        let excess = (&w[0] - &w[1]).to_f64().unwrap_or(f64::INFINITY);
        report.max_monotone_violation = report.max_monotone_violation.max(excess);
        if excess > tol {
            report.monotone_violations += 1;
        }
    }
    for i in 0..values.len().saturating_sub(2) {
        let mid = (&ps[i] + &ps[i + 2]) / &two;
        let chord = (&values[i] + &values[i + 2]) / &two;
        let excess = (chord - table.phi_rational(&mid))
            .to_f64()
            .unwrap_or(f64::INFINITY);
        report.max_concavity_violation = report.max_concavity_violation.max(excess);
        if excess > tol {
            report.concavity_violations += 1;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmodularReport {
    pub trials: u64,
    pub violations: u64,
}

/// Samples column-set pairs `(A, B)` and counts violations of
/// `rank(A ∩ B) + rank(A ∪ B) ≤ rank(A) + rank(B)`.
pub fn check_submodular(view: &RankView, trials: u64, seed: u64) -> SubmodularReport {
    let n = view.n();
    let violations = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, t);
            let da: f64 = rng.random();
            let db: f64 = rng.random();
            let a = bernoulli_mask(n, da, &mut rng);
            let b = bernoulli_mask(n, db, &mut rng);
            let r = |s: &BitVector| view.rank_on(s).expect("mask length matches");
            r(&a.and(&b)) + r(&a.or(&b)) > r(&a) + r(&b)
        })
        .count() as u64;
    SubmodularReport { trials, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::StabilizerMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn worked_view() -> RankView {
        let h = StabilizerMatrix::parse_rows(&["IXZYZ", "ZZXIZ", "IYYYZ"]).unwrap();
        RankView::symplectic(h.to_symplectic())
    }

    /// Direct sum over all masks, with no per-weight grouping.
    fn phi_oracle(view: &RankView, p: f64) -> f64 {
        let n = view.n();
        let mut total = 0.0;
        for bits in 0u64..(1 << n) {
            let mask = BitVector::from_u64(n, bits);
            let w = mask.weight() as i32;
            let keep: Vec<usize> = mask.to_indices();
            let cols = match view.kind() {
                ViewKind::Binary => keep.clone(),
                ViewKind::Symplectic => keep
                    .iter()
                    .copied()
                    .chain(keep.iter().map(|&q| q + n))
                    .collect(),
            };
            let colmask = BitVector::from_indices(view.matrix().num_cols(), &cols).unwrap();
            let r = view.matrix().restrict_columns(&colmask).unwrap().rank() as f64;
            total += r * p.powi(w) * (1.0 - p).powi(n as i32 - w);
        }
        total / n as f64
    }

    #[test]
    fn phi_endpoints() {
        let v = worked_view();
        assert_eq!(phi(&v, 0.0, &ExpectationMode::Exact).unwrap().value, 0.0);
        let one = phi(&v, 1.0, &ExpectationMode::Exact).unwrap().value;
        assert!((one - 3.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn phi_half_matches_enumeration() {
        let v = worked_view();
        let got = phi(&v, 0.5, &ExpectationMode::Exact).unwrap().value;
        assert!((got - phi_oracle(&v, 0.5)).abs() < 1e-14);
        for p in [0.1, 0.3, 0.77] {
            let got = phi(&v, p, &ExpectationMode::Exact).unwrap().value;
            assert!((got - phi_oracle(&v, p)).abs() < 1e-14);
        }
    }

    #[test]
    fn delta_cases() {
        let v = worked_view();
        let d = delta(&v, 0.5, &ExpectationMode::Exact).unwrap().value;
        assert!(d.abs() < 1e-15);
        let d0 = delta(&v, 0.0, &ExpectationMode::Exact).unwrap().value;
        assert!((d0 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rate_bound_cases() {
        let v = worked_view();
        let at0 = empirical_rate_bound(&v, 0.0, &ExpectationMode::Exact)
            .unwrap()
            .value;
        assert!((at0 - 2.0 / 5.0).abs() < 1e-15);
        let at_half = empirical_rate_bound(&v, 0.5, &ExpectationMode::Exact)
            .unwrap()
            .value;
        assert!(at_half.abs() < 1e-15);
        let d = phi_oracle(&v, 0.7) - phi_oracle(&v, 0.3);
        let at = empirical_rate_bound(&v, 0.3, &ExpectationMode::Exact)
            .unwrap()
            .value;
        assert!((at - (0.4 - d)).abs() < 1e-14);
        assert!(empirical_rate_bound(&v, 0.6, &ExpectationMode::Exact).is_err());
    }

    #[test]
    fn exact_cap_enforced() {
        let v = RankView::binary(BitMatrix::identity(21));
        assert!(matches!(
            phi(&v, 0.5, &ExpectationMode::Exact),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn rational_matches_float() {
        let v = worked_view();
        let t = RankWeightTable::build(&v).unwrap();
        let p = BigRational::from_float(0.35).unwrap();
        assert!((t.phi_rational(&p).to_f64().unwrap() - t.phi(0.35)).abs() < 1e-15);
    }

    #[test]
    fn concavity_examples() {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let r = check_monotone_concave(&worked_view(), &grid, 1e-12).unwrap();
        assert!(r.passed(), "{r:?}");

        // Single column: φ(p) = p·rank is linear.
        let single = RankView::binary(BitMatrix::new(1, vec![BitVector::ones(1)]).unwrap());
        let t = RankWeightTable::build(&single).unwrap();
        assert!((t.phi(0.3) - 0.3).abs() < 1e-15);
        assert!(check_monotone_concave(&single, &grid, 1e-12)
            .unwrap()
            .passed());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows = (0..6).map(|_| bernoulli_mask(10, 0.5, &mut rng)).collect();
        let m = RankView::binary(BitMatrix::new(10, rows).unwrap());
        assert!(check_monotone_concave(&m, &grid, 1e-12).unwrap().passed());
    }

    #[test]
    fn delta_lower_bound_cases() {
        assert_eq!(delta_lower_bound(3, 5, 0.2, 0.6).unwrap(), 0.0);
        assert_eq!(delta_lower_bound(3, 5, 0.5, 0.1).unwrap(), 0.0);
        assert!(delta_lower_bound(3, 5, 1.0, 0.1).is_err());
        let v = worked_view();
        let m = phi_oracle(&v, 0.3);
        let exact_delta = phi_oracle(&v, 0.7) - m;
        assert!(delta_lower_bound(3, 5, 0.3, m).unwrap() <= exact_delta + 1e-12);
    }

    #[test]
    fn submodular_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows = (0..12).map(|_| bernoulli_mask(20, 0.4, &mut rng)).collect();
        let v = RankView::binary(BitMatrix::new(20, rows).unwrap());
        let report = check_submodular(&v, 10_000, 9);
        assert_eq!(report.violations, 0);

        // A = B and A ⊆ B give equality.
        let a = BitVector::from_indices(20, &[1, 4, 7]).unwrap();
        let b = BitVector::from_indices(20, &[1, 4, 7, 9, 13]).unwrap();
        let r = |s: &BitVector| v.rank_on(s).unwrap();
        assert_eq!(r(&a.and(&a)) + r(&a.or(&a)), 2 * r(&a));
        assert_eq!(r(&a.and(&b)) + r(&a.or(&b)), r(&a) + r(&b));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let v = worked_view();
        let mode = ExpectationMode::MonteCarlo {
            trials: 20_000,
            seed: 42,
        };
        let a = phi(&v, 0.4, &mode).unwrap();
        let b = phi(&v, 0.4, &mode).unwrap();
        assert_eq!(a, b);
        let exact = phi_oracle(&v, 0.4);
        assert!((a.value - exact).abs() < 4.0 * a.sigma());
        let d = delta(&v, 0.2, &mode).unwrap();
        let exact_d = phi_oracle(&v, 0.8) - phi_oracle(&v, 0.2);
        assert!((d.value - exact_d).abs() < 4.0 * d.sigma());
    }

    #[test]
    fn profile_csv_shape() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
        let prof = RankProfile::compute(&worked_view(), &grid, &ExpectationMode::Exact).unwrap();
        let csv = prof.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], PROFILE_CSV_HEADER);
        assert_eq!(lines.len(), 12);
        assert!(lines[1].starts_with("0,0,,0.6,,"));
        assert!(prof.delta.iter().all(|&d| d >= 0.0));
    }
}
