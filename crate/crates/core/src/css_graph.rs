//! CSS codes and the graphs of their `(2, m)` parity-check matrices.
//!
//! A binary matrix with column weight 2 is the incidence matrix of a graph:
//! rows are vertices, column `j` is edge `j` joining the two rows that have a
//! one in column `j`. For a CSS pair `(H_X, H_Z)` the rows of `H_Z` are then
//! cycles (faces) of the graph of `H_X`, and `Ker H_X` is its cycle code.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::f2la::{BitMatrix, BitVector, RowSpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    n: usize,
    hx: BitMatrix,
    hz: BitMatrix,
}

impl CssCode {
    /// Pairs two matrices with the same column count. Orthogonality is
    /// checked separately by [`validate_css`].
    pub fn new(hx: BitMatrix, hz: BitMatrix) -> Result<Self> {
        check_len(hx.num_cols(), hz.num_cols())?;
        Ok(CssCode {
            n: hx.num_cols(),
            hx,
            hz,
        })
    }

    /// Like [`CssCode::new`] but rejects non-orthogonal pairs.
    pub fn checked(hx: BitMatrix, hz: BitMatrix) -> Result<Self> {
        let code = Self::new(hx, hz)?;
        code.ensure_valid()?;
        Ok(code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hx(&self) -> &BitMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &BitMatrix {
        &self.hz
    }

    fn ensure_valid(&self) -> Result<()> {
        match self.hx.first_odd_overlap(&self.hz) {
            None => Ok(()),
            Some((x_row, z_row)) => Err(Error::InvalidCss { x_row, z_row }),
        }
    }

    /// Parses the `css n rX rZ` format: one line of 0-based column indices
    /// per row, `H_X` rows first.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.starts_with('#'));
        let (hline, header) = lines
            .by_ref()
            .find(|(_, l)| !l.is_empty())
            .ok_or(Error::Parse {
                line: 1,
                message: "missing header".into(),
            })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "css" {
            return Err(Error::Parse {
                line: hline,
                message: "expected header `css n rX rZ`".into(),
            });
        }
        let count = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: hline,
                message: format!("bad count {s:?}: {e}"),
            })
        };
        let (n, rx, rz) = (count(fields[1])?, count(fields[2])?, count(fields[3])?);
        // Rows may be empty (an all-zero row), so blank lines count here.
        let mut supports: Vec<Vec<usize>> = Vec::with_capacity(rx + rz);
        for _ in 0..rx + rz {
            let (ln, line) = lines.next().ok_or(Error::Parse {
                line: hline,
                message: format!("expected {} rows", rx + rz),
            })?;
            let row = line
                .split_whitespace()
                .map(|tok| {
                    let i = tok.parse::<usize>().map_err(|e| Error::Parse {
                        line: ln,
                        message: format!("bad index {tok:?}: {e}"),
                    })?;
                    if i >= n {
                        return Err(Error::Parse {
                            line: ln,
                            message: format!("index {i} out of range for n = {n}"),
                        });
                    }
                    Ok(i)
                })
                .collect::<Result<Vec<_>>>()?;
            supports.push(row);
        }
        if let Some((ln, _)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(Error::Parse {
                line: ln,
                message: "trailing content after matrix rows".into(),
            });
        }
        let hx = BitMatrix::from_supports(n, &supports[..rx])?;
        let hz = BitMatrix::from_supports(n, &supports[rx..])?;
        Self::new(hx, hz)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "css {} {} {}\n",
            self.n,
            self.hx.num_rows(),
            self.hz.num_rows()
        );
        for row in self.hx.rows().iter().chain(self.hz.rows()) {
            let idx: Vec<String> = row.iter_ones().map(|i| i.to_string()).collect();
            s.push_str(&idx.join(" "));
            s.push('\n');
        }
        s
    }
}

/// True iff every row of `H_X` has even overlap with every row of `H_Z`.
pub fn validate_css(code: &CssCode) -> bool {
    code.ensure_valid().is_ok()
}

/// Every row has weight `m` and every column weight 2.
pub fn is_type_2m(m: &BitMatrix, row_weight: usize) -> bool {
    m.row_weights().iter().all(|&w| w == row_weight)
        && (0..m.num_cols()).all(|j| m.column_weight(j) == 2)
}

/// Graph whose vertices are rows and whose edge `j` is column `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl IncidenceGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &edges {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        len: vertex_count,
                    });
                }
            }
        }
        Ok(IncidenceGraph {
            vertex_count,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertex_count];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    /// `adjacency()[v]` lists `(neighbour, edge index)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, e));
            if a != b {
                adj[b].push((a, e));
            }
        }
        adj
    }

    /// No self-loops and no parallel edges.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges
            .iter()
            .all(|&(a, b)| a != b && seen.insert((a.min(b), a.max(b))))
    }

    /// Incidence matrix (vertices × edges).
    pub fn incidence_matrix(&self) -> BitMatrix {
        let mut rows = vec![BitVector::zeros(self.edges.len()); self.vertex_count];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            rows[a].flip(e);
            rows[b].flip(e);
        }
        BitMatrix::new(self.edges.len(), rows).expect("rows sized to edge count")
    }

    /// True iff every vertex meets an even number of edges of `edge_set`.
    pub fn is_cycle(&self, edge_set: &[usize]) -> bool {
        let mut parity = vec![false; self.vertex_count];
        for &e in edge_set {
            let (a, b) = self.edges[e];
            parity[a] ^= true;
            parity[b] ^= true;
        }
        parity.iter().all(|p| !p)
    }
}

/// Reads off the graph of a column-weight-2 matrix.
pub fn graph_from_2m(m: &BitMatrix) -> Result<IncidenceGraph> {
    let t = m.transpose();
    let edges = t
        .rows()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let ends = col.to_indices();
            match ends[..] {
                [a, b] => Ok((a, b)),
                _ => Err(Error::NotIncidence {
                    column: j,
                    weight: ends.len(),
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    IncidenceGraph::new(m.num_rows(), edges)
}

/// Number of connected components, isolated vertices included.
pub fn connected_components(g: &IncidenceGraph) -> usize {
    let adj = g.adjacency();
    let mut seen = vec![false; g.vertex_count()];
    let mut count = 0;
    for s in 0..g.vertex_count() {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    count
}

/// Length of a shortest cycle, `None` for a forest. Parallel edges form
/// 2-cycles and self-loops 1-cycles.
pub fn girth(g: &IncidenceGraph) -> Option<usize> {
    if g.edges().iter().any(|&(a, b)| a == b) {
        return Some(1);
    }
    let adj = g.adjacency();
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut parent_edge = vec![usize::MAX; g.vertex_count()];
    for root in 0..g.vertex_count() {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        'bfs: while let Some(v) = queue.pop_front() {
            if let Some(b) = best {
                if 2 * dist[v] + 1 >= b {
                    break 'bfs;
                }
            }
            for &(u, e) in &adj[v] {
                if e == parent_edge[v] {
                    continue;
                }
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    parent_edge[u] = e;
                    queue.push_back(u);
                } else {
                    let len = dist[u] + dist[v] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
        parent_edge.iter_mut().for_each(|p| *p = usize::MAX);
    }
    best
}

/// Faces of a 2-complex: the supports of the rows of the dual matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceSet {
    faces: Vec<Vec<usize>>,
}

impl FaceSet {
    pub fn from_matrix(m: &BitMatrix) -> Self {
        FaceSet {
            faces: m.rows().iter().map(BitVector::to_indices).collect(),
        }
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// True iff every face is a cycle of `g`.
    pub fn are_cycles_of(&self, g: &IncidenceGraph) -> bool {
        self.faces
            .iter()
            .all(|f| f.iter().all(|&e| e < g.edge_count()) && g.is_cycle(f))
    }
}

/// `k = n − rank H_X − rank H_Z`.
pub fn css_dimension(code: &CssCode) -> Result<usize> {
    code.ensure_valid()?;
    Ok(code.n - code.hx.rank() - code.hz.rank())
}

/// Proper `(2, m)` code: both graphs connected, simple, with girth `m`.
pub fn is_proper(code: &CssCode, m: usize) -> bool {
    if !is_type_2m(code.hx(), m) || !is_type_2m(code.hz(), m) {
        return false;
    }
    [code.hx(), code.hz()].into_iter().all(|h| {
        graph_from_2m(h)
            .is_ok_and(|g| g.is_simple() && connected_components(&g) == 1 && girth(&g) == Some(m))
    })
}

/// One side of the logical-operator search: vectors in `Ker check` that are
/// not in `rowspace(other)`.
struct LogicalSide {
    columns: Vec<BitVector>,
    stabilizers: RowSpace,
}

impl LogicalSide {
    fn new(check: &BitMatrix, other: &BitMatrix) -> Self {
        LogicalSide {
            columns: (0..check.num_cols()).map(|j| check.column(j)).collect(),
            stabilizers: RowSpace::new(other),
        }
    }
}

/// Smallest weight `≤ w_max` of a vector in `Ker H_X \ rowspace(H_Z)` or
/// `Ker H_Z \ rowspace(H_X)`; `None` if there is none up to `w_max`.
///
/// Enumerates supports by increasing weight, so the cost grows like
/// `C(n, w_max)`.
pub fn min_distance_bounded(code: &CssCode, w_max: usize) -> Result<Option<usize>> {
    code.ensure_valid()?;
    Ok(min_logical_weight(code, w_max).map(|v| v.weight()))
}

/// A minimum-weight logical vector of weight `≤ w_max`, if one exists.
pub fn min_logical_weight(code: &CssCode, w_max: usize) -> Option<BitVector> {
    let sides = [
        LogicalSide::new(code.hx(), code.hz()),
        LogicalSide::new(code.hz(), code.hx()),
    ];
    let n = code.n();
    for w in 1..=w_max.min(n) {
        for side in &sides {
            let mut chosen = Vec::with_capacity(w);
            let synd = BitVector::zeros(side.columns.first().map_or(0, BitVector::len));
            if let Some(v) = search_weight(side, n, w, 0, &mut chosen, synd) {
                return Some(v);
            }
        }
    }
    None
}

fn search_weight(
    side: &LogicalSide,
    n: usize,
    w: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    synd: BitVector,
) -> Option<BitVector> {
    if chosen.len() == w {
        if !synd.is_zero() {
            return None;
        }
        let v = BitVector::from_indices(n, chosen).expect("indices < n");
        return (!side.stabilizers.contains(&v)).then_some(v);
    }
    let remaining = w - chosen.len();
    for j in start..=n - remaining {
        let mut next = synd.clone();
        next.xor_assign(&side.columns[j]);
        chosen.push(j);
        let found = search_weight(side, n, w, j + 1, chosen, next);
        chosen.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// CSS erasure correctability via ranks.
///
/// The X side fails iff `|E| − rank H_X|E` (covered cycles) exceeds
/// `rank H_Z − rank H_Z|Ē` (covered stabilizers); likewise for Z.
pub fn is_correctable_css(code: &CssCode, erasure: &BitVector) -> Result<bool> {
    check_len(code.n(), erasure.len())?;
    let kept = erasure.complement();
    let w = erasure.weight();
    let x_side =
        w - code.hx.rank_on_columns(erasure)? == code.hz.rank() - code.hz.rank_on_columns(&kept)?;
    if !x_side {
        return Ok(false);
    }
    Ok(w - code.hz.rank_on_columns(erasure)? == code.hx.rank() - code.hx.rank_on_columns(&kept)?)
}

/// Rank-cached variant of [`is_correctable_css`] for repeated queries.
#[derive(Clone, Debug)]
pub struct CssErasureChecker {
    code: CssCode,
    rank_x: usize,
    rank_z: usize,
}

impl CssErasureChecker {
    pub fn new(code: CssCode) -> Result<Self> {
        code.ensure_valid()?;
        let rank_x = code.hx.rank();
        let rank_z = code.hz.rank();
        Ok(CssErasureChecker {
            code,
            rank_x,
            rank_z,
        })
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn is_correctable(&self, erasure: &BitVector) -> Result<bool> {
        check_len(self.code.n(), erasure.len())?;
        let kept = erasure.complement();
        let w = erasure.weight();
        let c = &self.code;
        Ok(
            w - c.hx.rank_on_columns(erasure)? == self.rank_z - c.hz.rank_on_columns(&kept)?
                && w - c.hz.rank_on_columns(erasure)?
                    == self.rank_x - c.hx.rank_on_columns(&kept)?,
        )
    }
}

const EXAMPLE_HX: [[usize; 5]; 16] = [
    [0, 1, 2, 3, 8],
    [1, 4, 5, 11, 20],
    [2, 6, 7, 14, 25],
    [0, 9, 10, 18, 28],
    [5, 12, 13, 22, 32],
    [4, 7, 15, 21, 31],
    [3, 16, 17, 27, 36],
    [6, 10, 13, 19, 23],
    [8, 12, 24, 33, 38],
    [9, 15, 17, 22, 26],
    [16, 19, 21, 24, 29],
    [11, 28, 29, 30, 35],
    [20, 23, 27, 34, 39],
    [14, 32, 35, 36, 37],
    [25, 26, 30, 33, 34],
    [18, 31, 37, 38, 39],
];

const EXAMPLE_HZ: [[usize; 5]; 16] = [
    [0, 2, 7, 9, 15],
    [1, 2, 5, 6, 13],
    [0, 3, 10, 16, 19],
    [1, 4, 8, 21, 24],
    [3, 8, 12, 17, 22],
    [4, 7, 11, 25, 30],
    [5, 12, 20, 33, 34],
    [6, 10, 14, 28, 35],
    [9, 17, 18, 36, 37],
    [11, 19, 20, 23, 29],
    [13, 23, 27, 32, 36],
    [14, 22, 25, 26, 32],
    [15, 26, 31, 33, 38],
    [16, 24, 27, 38, 39],
    [18, 21, 28, 29, 31],
    [30, 34, 35, 37, 39],
];

/// The `[[40, 10, 4]]` surface code of a self-dual 5-regular tiling of a
/// genus-4 surface (16 vertices, 40 edges, 16 faces).
pub fn example_code_2_5() -> CssCode {
    let hx = BitMatrix::from_supports(40, &EXAMPLE_HX).expect("indices < 40");
    let hz = BitMatrix::from_supports(40, &EXAMPLE_HZ).expect("indices < 40");
    CssCode::new(hx, hz).expect("same column count")
}

/// Swaps `H_X` and `H_Z`.
pub fn dual_code(code: &CssCode) -> CssCode {
    CssCode {
        n: code.n,
        hx: code.hz.clone(),
        hz: code.hx.clone(),
    }
}

pub const AUGMENT_RETRY_CAP: usize = 100;

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentOptions {
    pub retry_cap: usize,
    /// Reject parameters with `h(ρ) ≥ α`. The entropy condition is what makes
    /// the random construction succeed for large `n`; small codes often reach
    /// the target distance without it.
    pub require_entropy_condition: bool,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions {
            retry_cap: AUGMENT_RETRY_CAP,
            require_entropy_condition: false,
        }
    }
}

/// Adds `⌈αn⌉` random independent rows to each side so that no logical
/// operator of weight below `⌈ρn⌉` survives.
///
/// New `H_X` rows are drawn uniformly from `Ker H_Z` outside the current row
/// space of `H_X`; new `H_Z` rows from the kernel of the augmented `H_X`. A
/// draw is accepted once [`min_distance_bounded`] with `w_max = ⌈ρn⌉ − 1`
/// finds nothing.
pub fn augment_css(code: &CssCode, alpha: f64, rho: f64, seed: u64) -> Result<CssCode> {
    augment_css_with(code, alpha, rho, seed, &AugmentOptions::default())
}

pub fn augment_css_with(
    code: &CssCode,
    alpha: f64,
    rho: f64,
    seed: u64,
    options: &AugmentOptions,
) -> Result<CssCode> {
    code.ensure_valid()?;
    let n = code.n();
    if alpha == 0.0 {
        return Ok(code.clone());
    }
    let k = css_dimension(code)?;
    let rate = k as f64 / n as f64;
    if !(alpha > 0.0 && alpha < rate / 2.0) {
        return Err(Error::InfeasibleAugmentation(format!(
            "alpha = {alpha} must lie in (0, R/2) with R = {rate}"
        )));
    }
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::InfeasibleAugmentation(format!(
            "rho = {rho} must lie in (0, 1/2)"
        )));
    }
    if options.require_entropy_condition && binary_entropy(rho) >= alpha {
        return Err(Error::InfeasibleAugmentation(format!(
            "h(rho) = {} is not below alpha = {alpha}",
            binary_entropy(rho)
        )));
    }
    let added = (alpha * n as f64).ceil() as usize;
    let rank_x = code.hx().rank();
    let rank_z = code.hz().rank();
    // Each side gains `added` independent rows: H_X' needs room inside
    // Ker H_Z, and H_Z' inside Ker H_X'.
    if rank_x + added > n - rank_z || rank_z + added > n - rank_x - added {
        return Err(Error::InfeasibleAugmentation(format!(
            "{added} extra rows per side exceed the available kernel dimension"
        )));
    }
    let w_max = ((rho * n as f64).ceil() as usize).saturating_sub(1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernel_z = code.hz().kernel_basis();
    for _ in 0..options.retry_cap {
        let hx = extend_from_kernel(code.hx(), &kernel_z, added, &mut rng)?;
        let kernel_x = hx.kernel_basis();
        let hz = extend_from_kernel(code.hz(), &kernel_x, added, &mut rng)?;
        let candidate = CssCode::new(hx, hz)?;
        if min_logical_weight(&candidate, w_max).is_none() {
            debug_assert!(validate_css(&candidate));
            return Ok(candidate);
        }
    }
    Err(Error::AugmentationFailed {
        attempts: options.retry_cap,
    })
}

fn extend_from_kernel<R: Rng>(
    base: &BitMatrix,
    kernel: &[BitVector],
    added: usize,
    rng: &mut R,
) -> Result<BitMatrix> {
    let mut space = RowSpace::new(base);
    let mut out = base.clone();
    let mut fresh = 0;
    let mut order: Vec<usize> = (0..kernel.len()).collect();
    while fresh < added {
        order.shuffle(rng);
        let mut v = BitVector::zeros(base.num_cols());
        for &i in &order {
            if rng.random() {
                v.xor_assign(&kernel[i]);
            }
        }
        if space.insert(v.clone()) {
            out = out.with_row(v)?;
            fresh += 1;
        }
    }
    Ok(out)
}
