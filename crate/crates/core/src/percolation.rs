//! Bond percolation on the graph of a `(2, m)` code and its link to erasure
//! decoding.
//!
//! Edges are qubits. An erasure is a set of open edges; it is
//! non-correctable exactly when some open cluster, on the primal or the dual
//! graph, carries a cycle that is not a sum of faces.

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;

use crate::css_graph::{
    dual_code, girth, graph_from_2m, CssCode, CssErasureChecker, FaceSet, IncidenceGraph,
};
use crate::error::{check_len, check_probability, Error, Result};
use crate::f2la::BitVector;
use crate::output::csv_num;
use crate::rank_profile::Estimate;
use crate::sampling::{bernoulli_mask, mean_stderr, proportion, trial_rng};
use crate::stabilizer::{StabilizerCode, StabilizerMatrix};

/// A graph (from `H_X`) together with its faces (rows of `H_Z`).
#[derive(Clone, Debug)]
pub struct PercolationInstance {
    graph: IncidenceGraph,
    faces: FaceSet,
    code: CssCode,
    face_rank: usize,
}

impl PercolationInstance {
    /// `H_X` must be a column-weight-2 matrix and every `H_Z` row a cycle.
    pub fn from_code(code: &CssCode) -> Result<Self> {
        let graph = graph_from_2m(code.hx())?;
        let faces = FaceSet::from_matrix(code.hz());
        if let Some((x_row, z_row)) = code.hx().first_odd_overlap(code.hz()) {
            return Err(Error::InvalidCss { x_row, z_row });
        }
        Ok(PercolationInstance {
            graph,
            faces,
            face_rank: code.hz().rank(),
            code: code.clone(),
        })
    }

    /// The instance on the dual graph (roles of `H_X` and `H_Z` swapped).
    pub fn dual(&self) -> Result<Self> {
        Self::from_code(&dual_code(&self.code))
    }

    pub fn graph(&self) -> &IncidenceGraph {
        &self.graph
    }

    pub fn faces(&self) -> &FaceSet {
        &self.faces
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// `⌊g_Z/2⌋ − 1` where `g_Z` is the girth of the dual graph; 0 when the
    /// dual graph is a forest or not an incidence matrix.
    pub fn planarity_radius(&self) -> usize {
        graph_from_2m(self.code.hz())
            .ok()
            .and_then(|g| girth(&g))
            .map_or(0, |g| (g / 2).saturating_sub(1))
    }
}

/// Open edges for trial `trial` of a run seeded with `seed`.
pub fn sample_open(inst: &PercolationInstance, p: f64, seed: u64, trial: u64) -> Result<BitVector> {
    check_probability(p)?;
    Ok(bernoulli_mask(
        inst.edge_count(),
        p,
        &mut trial_rng(seed, trial),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterReport {
    pub open_mask: BitVector,
    /// Edge sets of the open clusters, each sorted, ordered by first edge.
    pub clusters: Vec<Vec<usize>>,
    /// Union of the clusters that cover a non-face cycle, once computed.
    pub ep_mask: Option<BitVector>,
    pub max_cluster_size: usize,
}

impl ClusterReport {
    /// Index of the cluster containing edge `e`, if `e` is open.
    pub fn cluster_of(&self, e: usize) -> Option<usize> {
        self.clusters
            .iter()
            .position(|c| c.binary_search(&e).is_ok())
    }
}

/// Connected components of the open subgraph, as edge sets.
pub fn clusters(inst: &PercolationInstance, mask: &BitVector) -> Result<ClusterReport> {
    check_len(inst.edge_count(), mask.len())?;
    let g = inst.graph();
    let mut uf = UnionFind::<usize>::new(g.vertex_count());
    for e in mask.iter_ones() {
        let (a, b) = g.edge(e);
        uf.union(a, b);
    }
    let mut by_root: Vec<Option<usize>> = vec![None; g.vertex_count()];
    let mut out: Vec<Vec<usize>> = Vec::new();
    // Edges are visited in increasing order, so clusters come out ordered by
    // their first edge and each edge list is sorted.
    for e in mask.iter_ones() {
        let root = uf.find(g.edge(e).0);
        let idx = *by_root[root].get_or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[idx].push(e);
    }
    let max_cluster_size = out.iter().map(Vec::len).max().unwrap_or(0);
    Ok(ClusterReport {
        open_mask: mask.clone(),
        clusters: out,
        ep_mask: None,
        max_cluster_size,
    })
}

/// True iff the edges of `cluster` support a cycle that is not a sum of
/// faces: the cycles inside it outnumber the face combinations inside it.
pub fn covers_nonface_cycle(inst: &PercolationInstance, cluster: &BitVector) -> Result<bool> {
    check_len(inst.edge_count(), cluster.len())?;
    let code = inst.code();
    let cycles = cluster.weight() - code.hx().rank_on_columns(cluster)?;
    let faces = inst.face_rank - code.hz().rank_on_columns(&cluster.complement())?;
    Ok(cycles > faces)
}

/// Clusters plus the union of those covering a non-face cycle.
pub fn problematic_part(inst: &PercolationInstance, mask: &BitVector) -> Result<ClusterReport> {
    let mut report = clusters(inst, mask)?;
    let mut ep = BitVector::zeros(inst.edge_count());
    for c in &report.clusters {
        let v = BitVector::from_indices(inst.edge_count(), c)?;
        if covers_nonface_cycle(inst, &v)? {
            ep.xor_assign(&v);
        }
    }
    report.ep_mask = Some(ep);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterEstimates {
    /// `P(|cluster(e)| > r)`.
    pub f_r: Estimate,
    /// `P(cluster(e) covers a non-face cycle)`.
    pub g_r: Estimate,
    /// `E|E_P| / n`.
    pub ep_fraction: Estimate,
}

/// Monte Carlo estimates of `f_r`, `g_r` and the mean problematic fraction
/// for the cluster of `edge`. Trial `t` uses the mask of
/// [`sample_open`]`(inst, p, seed, t)`.
pub fn estimate_fr_gr(
    inst: &PercolationInstance,
    p: f64,
    r: usize,
    trials: u64,
    seed: u64,
    edge: usize,
) -> Result<ClusterEstimates> {
    check_probability(p)?;
    let n = inst.edge_count();
    if edge >= n {
        return Err(Error::IndexOutOfRange {
            index: edge,
            len: n,
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let (f, g, ep, ep_sq) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64, u64, u64)> {
            let mask = sample_open(inst, p, seed, t)?;
            let report = problematic_part(inst, &mask)?;
            let ep = report.ep_mask.as_ref().map_or(0, BitVector::weight) as u64;
            let (big, covers) = match report.cluster_of(edge) {
                None => (false, false),
                Some(i) => {
                    let c = &report.clusters[i];
                    let covers = report.ep_mask.as_ref().is_some_and(|m| m.get(c[0]));
                    (c.len() > r, covers)
                }
            };
            Ok((big as u64, covers as u64, ep, ep * ep))
        })
        .try_reduce(
            || (0, 0, 0, 0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3)),
        )?;
    let (fm, fs) = proportion(f, trials);
    let (gm, gs) = proportion(g, trials);
    let (em, es) = mean_stderr(ep, ep_sq, trials);
    Ok(ClusterEstimates {
        f_r: Estimate {
            value: fm,
            stderr: Some(fs),
        },
        g_r: Estimate {
            value: gm,
            stderr: Some(gs),
        },
        ep_fraction: Estimate {
            value: em / n as f64,
            stderr: Some(es / n as f64),
        },
    })
}

fn failure_rate_by(
    n: usize,
    p: f64,
    trials: u64,
    seed: u64,
    correctable: impl Fn(&BitVector) -> Result<bool> + Sync,
) -> Result<Estimate> {
    check_probability(p)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mask = bernoulli_mask(n, p, &mut trial_rng(seed, t));
            Ok(!correctable(&mask)? as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let (mean, se) = proportion(failures, trials);
    Ok(Estimate {
        value: mean,
        stderr: Some(se),
    })
}

/// Fraction of i.i.d. Bernoulli(`p`) erasures that are not correctable,
/// decided by the CSS rank criterion. Masks match [`sample_open`].
pub fn erasure_failure_rate(code: &CssCode, p: f64, trials: u64, seed: u64) -> Result<Estimate> {
    let checker = CssErasureChecker::new(code.clone())?;
    failure_rate_by(code.n(), p, trials, seed, |m| checker.is_correctable(m))
}

/// Same estimate, decided by the general stabilizer erasure analysis of
/// `(H_X | 0)` over `(0 | H_Z)`.
pub fn erasure_failure_rate_stabilizer(
    code: &CssCode,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let stab = StabilizerCode::new(StabilizerMatrix::from_css(code.hx(), code.hz())?)?;
    failure_rate_by(code.n(), p, trials, seed, |m| stab.is_correctable(m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkReport {
    pub trials: u64,
    pub non_correctable: u64,
    pub mismatches: u64,
}

/// Compares, mask by mask, CSS correctability with "no primal and no dual
/// cluster covers a non-face cycle".
pub fn check_cluster_link(code: &CssCode, p: f64, trials: u64, seed: u64) -> Result<LinkReport> {
    let primal = PercolationInstance::from_code(code)?;
    let dual = primal.dual()?;
    let checker = CssErasureChecker::new(code.clone())?;
    let (bad, mismatches) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64)> {
            let mask = sample_open(&primal, p, seed, t)?;
            let ok = checker.is_correctable(&mask)?;
            let clean = [&primal, &dual].into_iter().try_fold(true, |acc, inst| {
                Ok::<_, Error>(
                    acc && problematic_part(inst, &mask)?
                        .ep_mask
                        .is_some_and(|m| m.is_zero()),
                )
            })?;
            Ok(((!ok) as u64, (ok != clean) as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(LinkReport {
        trials,
        non_correctable: bad,
        mismatches,
    })
}

pub const PERCOLATION_CSV_HEADER: &str =
    "p,r,f_r,f_r_stderr,g_r,g_r_stderr,ep_fraction,ep_stderr,failure_rate,failure_stderr";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PercolationRow {
    pub p: f64,
    pub r: usize,
    pub clusters: ClusterEstimates,
    pub failure: Estimate,
}

impl PercolationRow {
    pub fn compute(
        inst: &PercolationInstance,
        p: f64,
        r: usize,
        trials: u64,
        seed: u64,
        edge: usize,
    ) -> Result<Self> {
        Ok(PercolationRow {
            p,
            r,
            clusters: estimate_fr_gr(inst, p, r, trials, seed, edge)?,
            failure: erasure_failure_rate(inst.code(), p, trials, seed)?,
        })
    }

    pub fn to_csv(&self) -> String {
        let c = &self.clusters;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            csv_num(self.p),
            self.r,
            csv_num(c.f_r.value),
            csv_num(c.f_r.sigma()),
            csv_num(c.g_r.value),
            csv_num(c.g_r.sigma()),
            csv_num(c.ep_fraction.value),
            csv_num(c.ep_fraction.sigma()),
            csv_num(self.failure.value),
            csv_num(self.failure.sigma())
        )
    }
}
