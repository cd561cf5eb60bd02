//! Dense bit-packed linear algebra over F2.
//!
//! Vectors pack 64 bits per word, least significant bit first. Matrices are
//! stored row-major as a list of [`BitVector`]s and are never mutated after
//! construction; every elimination works on a private copy, so a matrix can be
//! shared freely between threads.

use std::fmt;

use crate::error::{check_len, Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over F2.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_tail();
        v
    }

    /// Vector with ones exactly at `indices`.
    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len);
        for &i in indices {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            v.set(i, true);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Low `len` bits of `bits`, bit `i` of the integer becoming entry `i`.
    pub fn from_u64(len: usize, bits: u64) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = bits;
            v.clear_tail();
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len);
        BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn or(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len);
        BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn complement(&self) -> BitVector {
        let mut out = BitVector {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    /// Standard inner product over F2.
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn is_subset_of(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    fn first_one_from(&self, start: usize) -> Option<usize> {
        if start >= self.len {
            return None;
        }
        let mut wi = start / WORD;
        let mut w = self.words[wi] & (u64::MAX << (start % WORD));
        loop {
            if w != 0 {
                return Some(wi * WORD + w.trailing_zeros() as usize);
            }
            wi += 1;
            if wi == self.words.len() {
                return None;
            }
            w = self.words[wi];
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense binary matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    /// Builds a matrix from rows that must all have length `cols`.
    pub fn new(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        for r in &rows {
            check_len(cols, r.len())?;
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut v = BitVector::zeros(n);
                v.set(i, true);
                v
            })
            .collect();
        BitMatrix { cols: n, rows }
    }

    /// Builds a matrix whose rows are given by their supports.
    pub fn from_supports<S: AsRef<[usize]>>(cols: usize, supports: &[S]) -> Result<Self> {
        let rows = supports
            .iter()
            .map(|s| BitVector::from_indices(cols, s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitMatrix { cols, rows })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    pub fn column(&self, j: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if r.get(j) {
                v.set(i, true);
            }
        }
        v
    }

    pub fn column_weight(&self, j: usize) -> usize {
        self.rows.iter().filter(|r| r.get(j)).count()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(BitVector::weight).collect()
    }

    pub fn transpose(&self) -> BitMatrix {
        let rows = (0..self.cols).map(|j| self.column(j)).collect();
        BitMatrix {
            cols: self.rows.len(),
            rows,
        }
    }

    /// Rank over F2.
    pub fn rank(&self) -> usize {
        rank_of_rows(self.rows.clone(), self.cols)
    }

    /// Basis of the right kernel `{v : M v = 0}`.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        let space = RowSpace::new(self);
        let pivots = space.pivots();
        let mut is_pivot = vec![false; self.cols];
        for &p in pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = BitVector::zeros(self.cols);
                v.set(free, true);
                for (row, &p) in space.basis().iter().zip(pivots) {
                    if row.get(free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }

    /// True iff `v` is an F2 combination of the rows.
    pub fn row_space_contains(&self, v: &BitVector) -> Result<bool> {
        check_len(self.cols, v.len())?;
        Ok(RowSpace::new(self).contains(v))
    }

    /// Keeps the columns selected by `mask`, in their original order.
    pub fn restrict_columns(&self, mask: &BitVector) -> Result<BitMatrix> {
        check_len(self.cols, mask.len())?;
        let keep: Vec<usize> = mask.iter_ones().collect();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = BitVector::zeros(keep.len());
                for (k, &c) in keep.iter().enumerate() {
                    if r.get(c) {
                        out.set(k, true);
                    }
                }
                out
            })
            .collect();
        Ok(BitMatrix {
            cols: keep.len(),
            rows,
        })
    }

    /// `rank(restrict_columns(mask))` without materialising the submatrix.
    pub fn rank_on_columns(&self, mask: &BitVector) -> Result<usize> {
        check_len(self.cols, mask.len())?;
        let rows = self.rows.iter().map(|r| r.and(mask)).collect();
        Ok(rank_of_rows(rows, self.cols))
    }

    /// Matrix-vector product `M v`.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        check_len(self.cols, v.len())?;
        let mut out = BitVector::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// True iff every row of `self` is orthogonal to every row of `other`.
    pub fn rows_orthogonal_to(&self, other: &BitMatrix) -> Result<bool> {
        check_len(self.cols, other.cols)?;
        Ok(self
            .rows
            .iter()
            .all(|a| other.rows.iter().all(|b| !a.dot(b))))
    }

    /// First pair `(i, j)` with `self.row(i) · other.row(j) = 1`.
    pub fn first_odd_overlap(&self, other: &BitMatrix) -> Option<(usize, usize)> {
        for (i, a) in self.rows.iter().enumerate() {
            for (j, b) in other.rows.iter().enumerate() {
                if a.dot(b) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        check_len(self.cols, other.cols)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BitMatrix {
            cols: self.cols,
            rows,
        })
    }

    pub fn with_row(&self, row: BitVector) -> Result<BitMatrix> {
        check_len(self.cols, row.len())?;
        let mut rows = self.rows.clone();
        rows.push(row);
        Ok(BitMatrix {
            cols: self.cols,
            rows,
        })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

fn rank_of_rows(mut rows: Vec<BitVector>, cols: usize) -> usize {
    let mut rank = 0;
    let mut col = 0;
    while rank < rows.len() && col < cols {
        // Next pivot: the smallest leading column among the remaining rows.
        let mut best: Option<(usize, usize)> = None;
        for (i, r) in rows.iter().enumerate().skip(rank) {
            if let Some(c) = r.first_one_from(col) {
                if best.is_none_or(|(_, bc)| c < bc) {
                    best = Some((i, c));
                    if c == col {
                        break;
                    }
                }
            }
        }
        let Some((pi, pc)) = best else { break };
        rows.swap(rank, pi);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for r in tail.iter_mut() {
            if r.get(pc) {
                r.xor_assign(pivot);
            }
        }
        rank += 1;
        col = pc + 1;
    }
    rank
}

/// Reduced row-echelon basis of a row space.
///
/// `reduce` maps every vector to a canonical representative of its coset
/// modulo the row space, so two vectors lie in the same coset iff their
/// reductions are equal.
#[derive(Clone, Debug)]
pub struct RowSpace {
    cols: usize,
    basis: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: &BitMatrix) -> Self {
        Self::from_rows(m.cols, m.rows.iter().cloned())
    }

    pub fn from_rows(cols: usize, rows: impl IntoIterator<Item = BitVector>) -> Self {
        let mut space = RowSpace {
            cols,
            basis: Vec::new(),
            pivots: Vec::new(),
        };
        for r in rows {
            space.insert(r);
        }
        space
    }

    /// Adds `v` to the span; returns false if it was already there.
    pub fn insert(&mut self, v: BitVector) -> bool {
        assert_eq!(v.len(), self.cols);
        let v = self.reduce(&v);
        let Some(p) = v.first_one_from(0) else {
            return false;
        };
        for b in &mut self.basis {
            if b.get(p) {
                b.xor_assign(&v);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.basis.insert(at, v);
        true
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn basis(&self) -> &[BitVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut out = v.clone();
        self.reduce_in_place(&mut out);
        out
    }

    pub fn reduce_in_place(&self, v: &mut BitVector) {
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(b);
            }
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::css_graph::example_code_2_5;
    use crate::stabilizer::StabilizerMatrix;
    use proptest::prelude::*;

    fn bv(bits: &str) -> BitVector {
        BitVector::from_bools(&bits.chars().map(|c| c == '1').collect::<Vec<_>>())
    }

    #[test]
    fn vector_basics() {
        let v = BitVector::from_indices(70, &[0, 3, 64, 69]).unwrap();
        assert_eq!(v.weight(), 4);
        assert_eq!(v.to_indices(), vec![0, 3, 64, 69]);
        assert_eq!(v.complement().weight(), 66);
        assert_eq!(BitVector::ones(70).weight(), 70);
        assert!(BitVector::zeros(5).is_zero());
        assert_eq!(BitVector::zeros(0).weight(), 0);
        assert!(BitVector::from_indices(3, &[3]).is_err());
        assert_eq!(bv("0110").concat(&bv("0011")).to_string(), "01100011");
    }

    #[test]
    fn rank_trivial_cases() {
        assert_eq!(BitMatrix::zeros(3, 5).rank(), 0);
        assert_eq!(BitMatrix::identity(4).rank(), 4);
        let m = BitMatrix::new(3, vec![bv("110"), bv("011"), bv("101")]).unwrap();
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn rank_of_example_hx() {
        let code = example_code_2_5();
        assert_eq!(code.hx().num_rows(), 16);
        assert_eq!(code.hx().num_cols(), 40);
        assert_eq!(code.hx().rank(), 15);
    }

    #[test]
    fn kernel_trivial_cases() {
        assert!(BitMatrix::identity(3).kernel_basis().is_empty());
        assert_eq!(BitMatrix::zeros(2, 4).kernel_basis().len(), 4);
    }

    #[test]
    fn kernel_of_example_hx() {
        let hx = example_code_2_5().hx().clone();
        let basis = hx.kernel_basis();
        assert_eq!(basis.len(), 25);
        for v in &basis {
            assert!(hx.mul_vec(v).unwrap().is_zero());
        }
        assert_eq!(RowSpace::from_rows(40, basis).rank(), 25);
    }

    #[test]
    fn row_space_membership() {
        let id = BitMatrix::identity(3);
        assert!(id.row_space_contains(&BitVector::zeros(3)).unwrap());
        assert!(id.row_space_contains(&bv("110")).unwrap());
        let hz = example_code_2_5().hz().clone();
        assert!(hz.row_space_contains(hz.row(0)).unwrap());
        let single = BitMatrix::new(3, vec![bv("110")]).unwrap();
        assert!(!single.row_space_contains(&bv("100")).unwrap());
        assert!(matches!(
            id.row_space_contains(&BitVector::zeros(4)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn restrict_columns_cases() {
        let hx = example_code_2_5().hx().clone();
        assert_eq!(hx.restrict_columns(&BitVector::ones(40)).unwrap(), hx);
        let empty = hx.restrict_columns(&BitVector::zeros(40)).unwrap();
        assert_eq!(empty.num_cols(), 0);
        assert_eq!(empty.num_rows(), 16);
        assert_eq!(empty.rank(), 0);
        assert!(hx.restrict_columns(&BitVector::zeros(39)).is_err());

        let m = BitMatrix::new(4, vec![bv("1010"), bv("0110")]).unwrap();
        let r = m.restrict_columns(&bv("0011")).unwrap();
        assert_eq!(r.row(0).to_string(), "10");
        assert_eq!(r.row(1).to_string(), "10");
    }

    #[test]
    fn restrict_worked_example_erased_pair() {
        // Qubits 1 and 2 (0-indexed) of the 3x5 worked example, both halves.
        let h = StabilizerMatrix::parse_rows(&["IXZYZ", "ZZXIZ", "IYYYZ"]).unwrap();
        let sym = h.to_symplectic();
        let mask = bv("01100").concat(&bv("01100"));
        assert_eq!(sym.restrict_columns(&mask).unwrap().rank(), 2);
    }

    fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
        (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r).prop_map(
                move |rows| {
                    BitMatrix::new(c, rows.iter().map(|b| BitVector::from_bools(b)).collect())
                        .unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in arb_matrix(8, 80)) {
            let basis = m.kernel_basis();
            prop_assert_eq!(m.rank() + basis.len(), m.num_cols());
            prop_assert!(m.rank() <= m.num_rows().min(m.num_cols()));
            for v in &basis {
                prop_assert!(m.mul_vec(v).unwrap().is_zero());
            }
            prop_assert_eq!(m.transpose().rank(), m.rank());
        }

        #[test]
        fn column_rank_submodular_and_monotone(
            m in arb_matrix(6, 12),
            a in any::<u16>(),
            b in any::<u16>(),
        ) {
            let n = m.num_cols();
            let a = BitVector::from_u64(n, a as u64);
            let b = BitVector::from_u64(n, b as u64);
            let r = |s: &BitVector| m.rank_on_columns(s).unwrap();
            prop_assert!(r(&a.and(&b)) + r(&a.or(&b)) <= r(&a) + r(&b));
            prop_assert!(r(&a.and(&b)) <= r(&a));
            prop_assert_eq!(r(&a), m.restrict_columns(&a).unwrap().rank());
        }

        #[test]
        fn reduce_is_canonical(m in arb_matrix(6, 20), seed in any::<u64>()) {
            let space = RowSpace::new(&m);
            let v = BitVector::from_u64(m.num_cols(), seed);
            let mut w = v.clone();
            for (i, row) in m.rows().iter().enumerate() {
                if (seed >> (i + 20)) & 1 == 1 {
                    w.xor_assign(row);
                }
            }
            prop_assert_eq!(space.reduce(&v), space.reduce(&w));
            prop_assert_eq!(space.rank(), m.rank());
        }
    }
}
