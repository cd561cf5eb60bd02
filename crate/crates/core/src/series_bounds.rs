//! Tree-counting power series and the closed-form rate bounds built on them.
//!
//! `b_k` counts `k`-edge subtrees of the infinite `m`-regular tree that hang
//! from one fixed edge at the root (planted), `a_k` counts `k`-edge subtrees
//! containing the root. Their generating functions satisfy
//! `T¹ = z(1 + T¹)^{m−1}` and `T = (1 + T¹)^m`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::output::csv_num;

/// Power series truncated to `coefficients().len()` terms, exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSeries {
    coefficients: Vec<BigRational>,
}

impl RationalSeries {
    pub fn new(coefficients: Vec<BigRational>) -> Self {
        RationalSeries { coefficients }
    }

    pub fn from_integers(coefficients: Vec<BigInt>) -> Self {
        Self::new(
            coefficients
                .into_iter()
                .map(BigRational::from_integer)
                .collect(),
        )
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [BigRational] {
        &mut self.coefficients
    }

    /// Coefficient of `z^k`, zero past the truncation.
    pub fn coeff(&self, k: usize) -> BigRational {
        self.coefficients
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Coefficients as `f64`, for fast evaluation.
    pub fn to_f64(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY))
            .collect()
    }

    /// Horner evaluation in floating point.
    pub fn eval(&self, z: f64) -> f64 {
        horner(&self.to_f64(), z)
    }
}

fn horner(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

fn check_m(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must be at least 3"
        )));
    }
    Ok(())
}

/// `C(n, k)` as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        // Exact at every step: acc = C(n, i) · (n − i) / (i + 1) = C(n, i + 1).
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Planted counts `b_k = C(k(m−1), k−1)/k` for `k = 0..=k_max` (`b_0 = 0`).
pub fn planted_coeffs(m: usize, k_max: usize) -> Result<RationalSeries> {
    check_m(m)?;
    let m1 = (m - 1) as u64;
    let coeffs = (0..=k_max as u64)
        .map(|k| {
            if k == 0 {
                BigRational::zero()
            } else {
                BigRational::new(binomial(k * m1, k - 1), BigInt::from(k))
            }
        })
        .collect();
    Ok(RationalSeries::new(coeffs))
}

fn mul_truncated(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn pow_truncated(base: &[BigInt], mut e: usize, len: usize) -> Vec<BigInt> {
    let mut result = vec![BigInt::zero(); len];
    if len > 0 {
        result[0] = BigInt::one();
    }
    let mut sq = base[..base.len().min(len)].to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = mul_truncated(&result, &sq, len);
        }
        e >>= 1;
        if e > 0 {
            sq = mul_truncated(&sq, &sq, len);
        }
    }
    result
}

fn integer_coeffs(s: &RationalSeries) -> Option<Vec<BigInt>> {
    s.coefficients
        .iter()
        .map(|c| c.is_integer().then(|| c.to_integer()))
        .collect()
}

/// Rooted counts `a_k`: coefficients of `(1 + T¹)^m` through `z^{k_max}`.
pub fn rooted_coeffs(m: usize, k_max: usize) -> Result<RationalSeries> {
    let b = planted_coeffs(m, k_max)?;
    let mut one_plus = integer_coeffs(&b).expect("planted counts are integers");
    one_plus[0] += 1;
    Ok(RationalSeries::from_integers(pow_truncated(
        &one_plus,
        m,
        k_max + 1,
    )))
}

/// True iff `series` satisfies `T¹ = z(1 + T¹)^{m−1}` through `z^{k_max}`.
pub fn satisfies_functional_equation(series: &RationalSeries, m: usize, k_max: usize) -> bool {
    if m < 2 {
        return false;
    }
    let len = k_max + 1;
    let mut one_plus: Vec<BigRational> = (0..len).map(|k| series.coeff(k)).collect();
    one_plus[0] += BigRational::one();
    // (1 + T¹)^{m−1} by repeated multiplication; m is small.
    let mut power = vec![BigRational::zero(); len];
    power[0] = BigRational::one();
    for _ in 0..m - 1 {
        let mut next = vec![BigRational::zero(); len];
        for (i, x) in power.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in one_plus.iter().enumerate().take(len - i) {
                next[i + j] += x * y;
            }
        }
        power = next;
    }
    (0..len).all(|k| {
        let rhs = if k == 0 {
            BigRational::zero()
        } else {
            power[k - 1].clone()
        };
        series.coeff(k) == rhs
    })
}

/// Checks the planted series against its functional equation.
pub fn verify_functional_equation(m: usize, k_max: usize) -> Result<bool> {
    let b = planted_coeffs(m, k_max)?;
    Ok(satisfies_functional_equation(&b, m, k_max))
}

/// `S_δ(z) = Σ_{k=0}^{δ} a_k/(k+1) z^k`.
pub fn s_poly(m: usize, delta: usize) -> Result<RationalSeries> {
    let a = rooted_coeffs(m, delta)?;
    let coeffs = a
        .coefficients
        .into_iter()
        .enumerate()
        .map(|(k, c)| c / BigRational::from_integer(BigInt::from(k + 1)))
        .collect();
    Ok(RationalSeries::new(coeffs))
}

fn check_open_half(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must lie in (0, 1/2]"
        )));
    }
    Ok(())
}

/// Rate bound for stabilizer codes with generators of weight `m`.
pub fn stab_bound(m: usize, p: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must be at least 2"
        )));
    }
    check_open_half(p)?;
    Ok(stab_value(m, p))
}

fn stab_value(m: usize, p: f64) -> f64 {
    if p == 0.0 {
        return stab_limit_at_zero(m);
    }
    let q = (1.0 - p).powi(m as i32 - 1);
    let num = (1.0 - 2.0 * p) * (1.0 - q);
    let den = 1.0 - (1.0 - 2.0 * p) * q;
    num / den
}

/// `lim_{p→0} stab_bound(m, p) = (m−1)/(m+1)`.
pub fn stab_limit_at_zero(m: usize) -> f64 {
    (m as f64 - 1.0) / (m as f64 + 1.0)
}

/// `(2/m)(1 − (1−p)^m S_δ(p(1−p)^{m−2}))`, an upper bound on the mean
/// normalised rank of a random column subset of a `(2, m)` matrix whose
/// graph has girth at least `δ + 2`.
pub fn mean_rank_upper(m: usize, delta: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must lie in [0, 1]"
        )));
    }
    let s = s_poly(m, delta)?.to_f64();
    Ok(mean_rank_value(m, &s, p))
}

fn mean_rank_value(m: usize, s: &[f64], p: f64) -> f64 {
    let z = p * (1.0 - p).powi(m as i32 - 2);
    2.0 / m as f64 * (1.0 - (1.0 - p).powi(m as i32) * horner(s, z))
}

/// Rate bound for `(2, m)` CSS codes (proper, girth `m`). Equals 1 at
/// `p = 0` by continuity.
pub fn css2m_bound(m: usize, p: f64) -> Result<f64> {
    if p != 0.0 {
        check_open_half(p)?;
    }
    Ok(Css2m::new(m)?.value(p))
}

/// `css2m_bound` with `S_{m−2}` precomputed in floating point.
#[derive(Clone, Debug)]
struct Css2m {
    m: usize,
    s: Vec<f64>,
}

impl Css2m {
    fn new(m: usize) -> Result<Self> {
        Ok(Css2m {
            m,
            s: s_poly(m, m - 2)?.to_f64(),
        })
    }

    fn value(&self, p: f64) -> f64 {
        if p == 0.0 {
            return 1.0;
        }
        let mf = self.m as f64;
        let z = p * (1.0 - p).powi(self.m as i32 - 2);
        let bracket = 1.0 - (1.0 - p).powi(self.m as i32) * horner(&self.s, z);
        (1.0 - 2.0 * p) * (4.0 / (mf * p) * bracket - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Generators of weight `m`, any stabilizer code.
    Stabilizer,
    /// `(2, m)` CSS codes.
    Css2m,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Stabilizer => "stab",
            BoundKind::Css2m => "css2m",
        })
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stab" => Ok(BoundKind::Stabilizer),
            "css2m" => Ok(BoundKind::Css2m),
            _ => Err(Error::InvalidParameter(format!(
                "unknown bound kind {s:?} (expected stab or css2m)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSpec {
    pub kind: BoundKind,
    pub m: usize,
    pub rate: f64,
}

impl BoundSpec {
    pub fn new(kind: BoundKind, m: usize, rate: f64) -> Result<Self> {
        check_m(m)?;
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidParameter(format!(
                "rate = {rate} must lie in [0, 1]"
            )));
        }
        Ok(BoundSpec { kind, m, rate })
    }

    /// Rate `1 − 4/m` of a `(2, m)` code family.
    pub fn with_default_rate(kind: BoundKind, m: usize) -> Result<Self> {
        Self::new(kind, m, default_rate(m))
    }
}

/// `1 − 4/m`, clamped at 0.
pub fn default_rate(m: usize) -> f64 {
    (1.0 - 4.0 / m as f64).max(0.0)
}

/// A bound function ready for repeated evaluation on `[0, 1/2]`.
#[derive(Clone, Debug)]
pub struct BoundFn {
    kind: BoundKind,
    m: usize,
    css: Option<Css2m>,
}

impl BoundFn {
    pub fn new(kind: BoundKind, m: usize) -> Result<Self> {
        check_m(m)?;
        let css = match kind {
            BoundKind::Css2m => Some(Css2m::new(m)?),
            BoundKind::Stabilizer => None,
        };
        Ok(BoundFn { kind, m, css })
    }

    /// Value at `p ∈ [0, 1/2]`, using continuity limits at `p = 0`.
    pub fn value(&self, p: f64) -> f64 {
        match &self.css {
            Some(c) => c.value(p),
            None => stab_value(self.m, p),
        }
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }
}

pub const THRESHOLD_GRID_POINTS: usize = 10_000;
pub const THRESHOLD_TOLERANCE: f64 = 1e-9;

/// Smallest `p ∈ (0, 1/2]` where the bound meets `spec.rate`.
pub fn threshold_solve(spec: &BoundSpec) -> Result<f64> {
    threshold_solve_with(spec, THRESHOLD_GRID_POINTS)
}

/// [`threshold_solve`] with a custom scan density.
pub fn threshold_solve_with(spec: &BoundSpec, grid_points: usize) -> Result<f64> {
    let f = BoundFn::new(spec.kind, spec.m)?;
    let g = |p: f64| f.value(p) - spec.rate;
    let grid_points = grid_points.max(1);
    let step = 0.5 / grid_points as f64;
    let mut lo = 0.0;
    let mut g_lo = g(lo);
    for i in 1..=grid_points {
        let hi = if i == grid_points {
            0.5
        } else {
            i as f64 * step
        };
        let g_hi = g(hi);
        if g_hi == 0.0 {
            return Ok(hi);
        }
        if (g_lo > 0.0) != (g_hi > 0.0) {
            return Ok(bisect(&g, lo, hi, g_lo > 0.0));
        }
        lo = hi;
        g_lo = g_hi;
    }
    Err(Error::NoCrossing { rate: spec.rate })
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, lo_positive: bool) -> f64 {
    while hi - lo > THRESHOLD_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `m,kind,rate,threshold` with nine decimals on the threshold.
pub fn threshold_line(spec: &BoundSpec, threshold: f64) -> String {
    format!(
        "{},{},{},{:.9}",
        spec.m,
        spec.kind,
        csv_num(spec.rate),
        threshold
    )
}

pub const THRESHOLD_CSV_HEADER: &str = "m,kind,rate,threshold";

/// Upper bound on the bond-percolation threshold of the `m`-regular
/// self-dual tiling: the `(2, m)` CSS bound at rate `1 − 4/m`.
pub fn percolation_upper(m: usize) -> Result<f64> {
    if m < 5 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must be at least 5"
        )));
    }
    threshold_solve(&BoundSpec::with_default_rate(BoundKind::Css2m, m)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EasyBounds {
    /// `1/(m−1)`, below which clusters are a.s. finite.
    pub lower: f64,
    /// `1 − 1/(m−1)`, from the dual graph.
    pub upper_path: f64,
    /// `2/m = (1 − R)/2` with `R = 1 − 4/m`.
    pub upper_capacity: f64,
}

pub fn easy_bounds(m: usize) -> Result<EasyBounds> {
    check_m(m)?;
    let mf = m as f64;
    Ok(EasyBounds {
        lower: 1.0 / (mf - 1.0),
        upper_path: 1.0 - 1.0 / (mf - 1.0),
        upper_capacity: 2.0 / mf,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PercRow {
    pub m: usize,
    pub easy_lower: f64,
    pub css_upper: f64,
    pub capacity: f64,
}

pub const PERC_TABLE_CSV_HEADER: &str = "m,easy_lower,css_upper,capacity_2m";

pub fn perc_table(ms: &[usize]) -> Result<Vec<PercRow>> {
    ms.iter()
        .map(|&m| {
            let easy = easy_bounds(m)?;
            Ok(PercRow {
                m,
                easy_lower: easy.lower,
                css_upper: percolation_upper(m)?,
                capacity: easy.upper_capacity,
            })
        })
        .collect()
}

impl PercRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{}",
            self.m,
            csv_num(self.easy_lower),
            csv_num(self.css_upper),
            csv_num(self.capacity)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    pub p: f64,
    pub capacity: f64,
    pub stab: f64,
    pub css2m: f64,
    pub rate: f64,
}

pub const BOUND_CURVE_CSV_HEADER: &str = "p,capacity,stab_bound,css2m_bound,rate";

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    pub spec: BoundSpec,
    pub rows: Vec<BoundRow>,
}

/// Both bounds and the capacity `1 − 2p` on a grid inside `[0, 1/2]`.
pub fn bound_curve(spec: &BoundSpec, p_grid: &[f64]) -> Result<BoundCurve> {
    let stab = BoundFn::new(BoundKind::Stabilizer, spec.m)?;
    let css = BoundFn::new(BoundKind::Css2m, spec.m)?;
    let rows = p_grid
        .iter()
        .map(|&p| {
            if !(0.0..=0.5).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "p = {p} must lie in [0, 1/2]"
                )));
            }
            Ok(BoundRow {
                p,
                capacity: 1.0 - 2.0 * p,
                stab: stab.value(p),
                css2m: css.value(p),
                rate: spec.rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve { spec: *spec, rows })
}

impl BoundCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(BOUND_CURVE_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_num(r.p),
                csv_num(r.capacity),
                csv_num(r.stab),
                csv_num(r.css2m),
                csv_num(r.rate)
            ));
        }
        s
    }
}

/// Counts `k`-edge subtrees of the `m`-regular tree by explicit growth of
/// edge sets, for `k = 0..=k_max`.
///
/// With `planted`, the root has a single edge which every counted subtree
/// contains (so index 0 is 0); otherwise the root has `m` edges and every
/// counted subtree contains the root vertex. Cost grows like `a_{k_max}`,
/// so keep `k_max` small.
pub fn enumerate_subtrees(m: usize, k_max: usize, planted: bool) -> Vec<u64> {
    use std::collections::BTreeSet;
    // A vertex is its path of child choices from the root; an edge is named
    // by its lower endpoint.
    type Edge = Vec<u8>;
    let children = |v: &[u8]| -> Vec<Edge> {
        let deg = if v.is_empty() {
            if planted {
                1
            } else {
                m
            }
        } else {
            m - 1
        };
        (0..deg as u8)
            .map(|c| {
                let mut e = v.to_vec();
                e.push(c);
                e
            })
            .collect()
    };
    let mut counts = vec![0u64; k_max + 1];
    let mut level: BTreeSet<BTreeSet<Edge>> = BTreeSet::new();
    if planted {
        if k_max >= 1 {
            level.insert(BTreeSet::from([vec![0u8]]));
        }
    } else {
        level.insert(BTreeSet::new());
    }
    let start = if planted { 1 } else { 0 };
    for (k, count) in counts.iter_mut().enumerate().skip(start) {
        *count = level.len() as u64;
        if k == k_max {
            break;
        }
        let mut next = BTreeSet::new();
        for set in &level {
            let mut frontier: Vec<Edge> = children(&[]);
            for e in set {
                frontier.extend(children(e));
            }
            for e in frontier {
                if !set.contains(&e) {
                    let mut grown = set.clone();
                    grown.insert(e);
                    next.insert(grown);
                }
            }
        }
        level = next;
    }
    counts
}
