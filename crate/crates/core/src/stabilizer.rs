//! Pauli operators in symplectic form, stabilizer matrices and erasure
//! correctability.
//!
//! Phases are never represented: a Pauli operator on `n` qubits is the pair
//! of bit vectors `(x | z)`, with `Y = XZ` setting both bits. Two operators
//! commute iff their symplectic product `x·z' + z·x'` vanishes.
//!
//! For an erasure mask `E`, `H_E` is the symplectic matrix restricted to the
//! `2|E|` columns of erased qubits (both halves). The analysis uses only
//! ranks, so redundant generator rows are accepted everywhere.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::f2la::{BitMatrix, BitVector, RowSpace};
use crate::rank_profile::{self, ExpectationMode, RankView};

/// Largest erasure weight accepted by [`enumerate_covered`] (`4^11` operators).
pub const COVERED_ENUMERATION_CAP: usize = 11;

/// Pauli operator modulo phases.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: BitVector,
    z: BitVector,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn from_masks(x: BitVector, z: BitVector) -> Result<Self> {
        check_len(x.len(), z.len())?;
        Ok(PauliOperator { x, z })
    }

    /// Single-qubit `X`, `Y` or `Z` on qubit `q`.
    pub fn single(n: usize, q: usize, letter: char) -> Result<Self> {
        let mut p = Self::identity(n);
        if q >= n {
            return Err(Error::IndexOutOfRange { index: q, len: n });
        }
        match letter {
            'X' => p.x.set(q, true),
            'Z' => p.z.set(q, true),
            'Y' => {
                p.x.set(q, true);
                p.z.set(q, true);
            }
            'I' => {}
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown Pauli letter {other:?}"
                )))
            }
        }
        Ok(p)
    }

    /// The symplectic image `(x | z)` of length `2n`.
    pub fn from_symplectic(v: &BitVector) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "symplectic vector must have even length".into(),
            ));
        }
        let n = v.len() / 2;
        let mut p = Self::identity(n);
        for i in v.iter_ones() {
            if i < n {
                p.x.set(i, true);
            } else {
                p.z.set(i - n, true);
            }
        }
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_mask(&self) -> &BitVector {
        &self.x
    }

    pub fn z_mask(&self) -> &BitVector {
        &self.z
    }

    pub fn support(&self) -> BitVector {
        self.x.or(&self.z)
    }

    pub fn weight(&self) -> usize {
        self.support().weight()
    }

    pub fn to_symplectic(&self) -> BitVector {
        self.x.concat(&self.z)
    }

    /// Product up to phase.
    pub fn product(&self, other: &PauliOperator) -> Result<PauliOperator> {
        check_len(self.num_qubits(), other.num_qubits())?;
        Ok(PauliOperator {
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
        })
    }

    /// True iff the operator acts trivially outside `mask`.
    pub fn is_covered_by(&self, mask: &BitVector) -> bool {
        self.support().is_subset_of(mask)
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> Result<bool> {
        check_len(self.num_qubits(), other.num_qubits())?;
        Ok(self.x.dot(&other.z) == self.z.dot(&other.x))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut p = Self::identity(n);
        for q in 0..n {
            p.x.set(q, rng.random());
            p.z.set(q, rng.random());
        }
        p
    }

    fn letter(&self, q: usize) -> char {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<char> = s.chars().collect();
        let mut p = Self::identity(letters.len());
        for (q, c) in letters.into_iter().enumerate() {
            match c {
                'I' => {}
                'X' => p.x.set(q, true),
                'Z' => p.z.set(q, true),
                'Y' => {
                    p.x.set(q, true);
                    p.z.set(q, true);
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown Pauli letter {other:?} at position {q}"
                    )))
                }
            }
        }
        Ok(p)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (0..self.num_qubits()).try_for_each(|q| write!(f, "{}", self.letter(q)))
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

/// `true` iff `p` and `q` commute.
pub fn commutes(p: &PauliOperator, q: &PauliOperator) -> Result<bool> {
    p.commutes_with(q)
}

/// A list of generators on `n` qubits, one per row.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StabilizerMatrix {
    n: usize,
    rows: Vec<PauliOperator>,
}

impl StabilizerMatrix {
    pub fn new(n: usize, rows: Vec<PauliOperator>) -> Result<Self> {
        for r in &rows {
            check_len(n, r.num_qubits())?;
        }
        Ok(StabilizerMatrix { n, rows })
    }

    pub fn empty(n: usize) -> Self {
        StabilizerMatrix {
            n,
            rows: Vec::new(),
        }
    }

    /// Rows written as strings over `{I, X, Y, Z}`.
    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.as_ref().parse::<PauliOperator>())
            .collect::<Result<Vec<_>>>()?;
        let n = parsed.first().map_or(0, PauliOperator::num_qubits);
        Self::new(n, parsed)
    }

    /// Stabilizer form `(H_X | 0)` over `(0 | H_Z)` of a CSS pair.
    pub fn from_css(hx: &BitMatrix, hz: &BitMatrix) -> Result<Self> {
        check_len(hx.num_cols(), hz.num_cols())?;
        let n = hx.num_cols();
        let zero = BitVector::zeros(n);
        let rows = hx
            .rows()
            .iter()
            .map(|r| PauliOperator::from_masks(r.clone(), zero.clone()))
            .chain(
                hz.rows()
                    .iter()
                    .map(|r| PauliOperator::from_masks(zero.clone(), r.clone())),
            )
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, rows)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[PauliOperator] {
        &self.rows
    }

    /// `r × 2n` binary matrix whose row `i` is `(x_i | z_i)`.
    pub fn to_symplectic(&self) -> BitMatrix {
        let rows = self.rows.iter().map(PauliOperator::to_symplectic).collect();
        BitMatrix::new(2 * self.n, rows).expect("rows have length 2n")
    }

    pub fn rank(&self) -> usize {
        self.to_symplectic().rank()
    }

    /// First anti-commuting pair of rows, if any.
    pub fn first_anticommuting_pair(&self) -> Option<(usize, usize)> {
        for i in 0..self.rows.len() {
            for j in i + 1..self.rows.len() {
                if !self.rows[i].commutes_with(&self.rows[j]).unwrap_or(false) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Parses the `stab n r` text format.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_count = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: hline,
                message: format!("bad count {s:?}: {e}"),
            })
        };
        if fields.len() != 3 || fields[0] != "stab" {
            return Err(Error::Parse {
                line: hline,
                message: "expected header `stab n r`".into(),
            });
        }
        let n = parse_count(fields[1])?;
        let r = parse_count(fields[2])?;
        let mut rows = Vec::with_capacity(r);
        for _ in 0..r {
            let (ln, line) = lines.next().ok_or(Error::Parse {
                line: hline,
                message: format!("expected {r} generator rows"),
            })?;
            let p: PauliOperator = line.parse().map_err(|e: Error| Error::Parse {
                line: ln,
                message: e.to_string(),
            })?;
            if p.num_qubits() != n {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("row has {} letters, expected {n}", p.num_qubits()),
                });
            }
            rows.push(p);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln,
                message: "trailing content after generator rows".into(),
            });
        }
        Self::new(n, rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("stab {} {}\n", self.n, self.rows.len());
        for r in &self.rows {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }
}

/// Bit `i` is set iff `e` anti-commutes with row `i` of `h`.
pub fn syndrome(h: &StabilizerMatrix, e: &PauliOperator) -> Result<BitVector> {
    check_len(h.num_qubits(), e.num_qubits())?;
    let mut s = BitVector::zeros(h.num_rows());
    for (i, row) in h.rows().iter().enumerate() {
        if !row.commutes_with(e)? {
            s.set(i, true);
        }
    }
    Ok(s)
}

pub fn to_symplectic(h: &StabilizerMatrix) -> BitMatrix {
    h.to_symplectic()
}

/// True iff all rows commute pairwise.
pub fn validate(h: &StabilizerMatrix) -> bool {
    h.first_anticommuting_pair().is_none()
}

/// Number of logical qubits `n − rank H`.
pub fn num_logical(h: &StabilizerMatrix) -> Result<usize> {
    Ok(StabilizerCode::new(h.clone())?.num_logical())
}

/// Dimensions attached to one erasure pattern.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErasureAnalysis {
    /// `rank H_E`.
    pub rank_erased: usize,
    /// `rank H_Ē`.
    pub rank_kept: usize,
    /// `dim N(S)_E = 2|E| − rank H_E`.
    pub dim_nse: usize,
    /// `dim S_E = rank H − rank H_Ē`.
    pub dim_se: usize,
    pub correctable: bool,
    /// Entropy of the coset given erasure and syndrome, in bits.
    pub cond_entropy_bits: f64,
}

/// A validated stabilizer matrix with its symplectic form cached.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    matrix: StabilizerMatrix,
    symplectic: BitMatrix,
    rank: usize,
}

impl StabilizerCode {
    pub fn new(matrix: StabilizerMatrix) -> Result<Self> {
        if let Some((first, second)) = matrix.first_anticommuting_pair() {
            return Err(Error::InvalidStabilizer { first, second });
        }
        let symplectic = matrix.to_symplectic();
        let rank = symplectic.rank();
        Ok(StabilizerCode {
            matrix,
            symplectic,
            rank,
        })
    }

    pub fn matrix(&self) -> &StabilizerMatrix {
        &self.matrix
    }

    pub fn symplectic(&self) -> &BitMatrix {
        &self.symplectic
    }

    pub fn num_qubits(&self) -> usize {
        self.matrix.num_qubits()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_logical(&self) -> usize {
        self.num_qubits() - self.rank
    }

    pub fn rank_view(&self) -> RankView {
        RankView::symplectic(self.symplectic.clone())
    }

    /// Rank of `H` restricted to both symplectic halves of `mask`.
    pub fn rank_on(&self, mask: &BitVector) -> Result<usize> {
        check_len(self.num_qubits(), mask.len())?;
        self.symplectic.rank_on_columns(&mask.concat(mask))
    }

    pub fn analyze_erasure(&self, erasure: &BitVector) -> Result<ErasureAnalysis> {
        let rank_erased = self.rank_on(erasure)?;
        let rank_kept = self.rank_on(&erasure.complement())?;
        let w = erasure.weight();
        let dim_nse = 2 * w - rank_erased;
        let dim_se = self.rank - rank_kept;
        debug_assert!(dim_se <= dim_nse);
        Ok(ErasureAnalysis {
            rank_erased,
            rank_kept,
            dim_nse,
            dim_se,
            correctable: dim_nse == dim_se,
            cond_entropy_bits: (dim_nse - dim_se) as f64,
        })
    }

    pub fn is_correctable(&self, erasure: &BitVector) -> Result<bool> {
        Ok(self.analyze_erasure(erasure)?.correctable)
    }

    /// Exhaustive enumeration of the `4^|E|` operators supported on `erasure`.
    pub fn enumerate_covered(&self, erasure: &BitVector, cap: usize) -> Result<CoveredCounts> {
        let n = self.num_qubits();
        check_len(n, erasure.len())?;
        let positions = erasure.to_indices();
        if positions.len() > cap {
            return Err(Error::CapExceeded {
                what: "erasure weight",
                limit: cap,
                found: positions.len(),
            });
        }
        let r = self.matrix.num_rows();
        let stab_space = RowSpace::new(&self.symplectic);
        // Toggle `2j` is X on positions[j], toggle `2j + 1` is Z on positions[j].
        let toggles: Vec<(usize, BitVector)> = positions
            .iter()
            .flat_map(|&q| {
                [
                    (q, self.symplectic.column(n + q)),
                    (n + q, self.symplectic.column(q)),
                ]
            })
            .collect();

        let mut pauli = BitVector::zeros(2 * n);
        let mut synd = BitVector::zeros(r);
        let mut cosets: HashMap<(BitVector, BitVector), u64> = HashMap::new();
        let mut zero_syndrome = 0u64;
        let mut stabilizers = 0u64;
        let total = 1u64 << (2 * positions.len());
        for t in 0..total {
            if t > 0 {
                // Gray code: step t flips toggle trailing_zeros(t).
                let (col, contrib) = &toggles[t.trailing_zeros() as usize];
                pauli.flip(*col);
                synd.xor_assign(contrib);
            }
            let rep = stab_space.reduce(&pauli);
            if synd.is_zero() {
                zero_syndrome += 1;
                if rep.is_zero() {
                    stabilizers += 1;
                }
            }
            *cosets.entry((synd.clone(), rep)).or_insert(0) += 1;
        }

        let mut per_syndrome: BTreeMap<BitVector, Vec<u64>> = BTreeMap::new();
        let mut ordered: Vec<_> = cosets.into_iter().collect();
        ordered.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        for ((s, _), c) in ordered {
            per_syndrome.entry(s).or_default().push(c);
        }
        let mut syndrome_histogram = BTreeMap::new();
        let mut coset_entropy_bits = Vec::with_capacity(per_syndrome.len());
        for (s, counts) in per_syndrome {
            let total: u64 = counts.iter().sum();
            let h: f64 = counts
                .iter()
                .map(|&c| {
                    let q = c as f64 / total as f64;
                    -q * q.log2()
                })
                .sum();
            syndrome_histogram.insert(s, total);
            coset_entropy_bits.push(h);
        }
        Ok(CoveredCounts {
            covered: total,
            zero_syndrome,
            stabilizers,
            syndrome_histogram,
            coset_entropy_bits,
        })
    }

    /// Lower bound on the decoding error probability of any estimator.
    ///
    /// `(2np − rank H + E_p[rank H_Ē − rank H_E] − 1) / 2n`; the expectation
    /// is `n·Δ(p)`, computed per `mode`. Negative values are vacuous.
    pub fn fano_lower_bound(&self, p: f64, mode: &ExpectationMode) -> Result<f64> {
        let n = self.num_qubits() as f64;
        let delta = rank_profile::delta(&self.rank_view(), p, mode)?;
        Ok((2.0 * n * p - self.rank as f64 + n * delta.value - 1.0) / (2.0 * n))
    }
}

/// Result of exhaustively enumerating the operators covered by an erasure.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveredCounts {
    /// `4^|E|`.
    pub covered: u64,
    /// Covered operators with zero syndrome.
    pub zero_syndrome: u64,
    /// Covered operators in the stabilizer group.
    pub stabilizers: u64,
    /// Number of covered operators per attained syndrome.
    pub syndrome_histogram: BTreeMap<BitVector, u64>,
    /// Entropy (bits) of the coset distribution given each attained syndrome,
    /// in the key order of `syndrome_histogram`.
    pub coset_entropy_bits: Vec<f64>,
}

impl CoveredCounts {
    /// Zero-syndrome covered operators outside the stabilizer group.
    pub fn problematic(&self) -> u64 {
        self.zero_syndrome - self.stabilizers
    }

    pub fn attained_syndromes(&self) -> usize {
        self.syndrome_histogram.len()
    }
}

pub fn analyze_erasure(h: &StabilizerMatrix, erasure: &BitVector) -> Result<ErasureAnalysis> {
    StabilizerCode::new(h.clone())?.analyze_erasure(erasure)
}

/// Enumeration oracle with the default cap.
pub fn enumerate_covered(h: &StabilizerMatrix, erasure: &BitVector) -> Result<CoveredCounts> {
    StabilizerCode::new(h.clone())?.enumerate_covered(erasure, COVERED_ENUMERATION_CAP)
}

pub fn fano_lower_bound(h: &StabilizerMatrix, p: f64, mode: &ExpectationMode) -> Result<f64> {
    StabilizerCode::new(h.clone())?.fano_lower_bound(p, mode)
}

/// Random commuting generator set on `n` qubits with `r` rows.
///
/// Each new row is rejection-sampled until it commutes with the previous
/// ones; with probability `redundant` a row is instead the product of a
/// random subset of earlier rows, so rank-deficient matrices occur too.
pub fn random_stabilizer<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    redundant: f64,
    rng: &mut R,
) -> StabilizerMatrix {
    let mut rows: Vec<PauliOperator> = Vec::with_capacity(r);
    while rows.len() < r {
        if !rows.is_empty() && rng.random_bool(redundant) {
            let mut p = PauliOperator::identity(n);
            for row in &rows {
                if rng.random() {
                    p = p.product(row).expect("same length");
                }
            }
            rows.push(p);
            continue;
        }
        let candidate = PauliOperator::random(n, rng);
        if rows
            .iter()
            .all(|row| row.commutes_with(&candidate).expect("same length"))
        {
            rows.push(candidate);
        }
    }
    StabilizerMatrix { n, rows }
}
