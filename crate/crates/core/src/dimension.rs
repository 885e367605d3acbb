//! Dimension of the space `V_B` of solutions of `∂ₜu = iLu` that vanish on a
//! vertex set `B` for all `t ∈ [0,1]`.
//!
//! Three routes are provided and reported side by side:
//!
//! - [`dimension_bounds`]: two-sided bounds from the cluster/branch census of
//!   `[B]` (distinct-eigenvalue counts of `L` restricted to clusters and branches);
//! - [`exact_dimension`]: kernel of the stacked per-cluster constraint matrices
//!   [`cluster_constraint_matrix`], expressed in the coordinates of `F ∖ [B]`;
//! - [`oracle_dimension`]: kernel of `{e_βᵀ P_m : β ∈ B}` over the spectral
//!   projectors `P_m` of the full matrix. It uses `B` itself, never `[B]`.
//!
//! The oracle is the reference; a mismatch with the exact route is reported,
//! never reconciled.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{self, ClusterDecomposition};
use crate::graph::{FiniteGraph, VertexSet, WebGraph, WebVertex};
use crate::spectral::{self, SpectralData};
use crate::Tolerances;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterCensus {
    pub root: usize,
    pub vertices: VertexSet,
    /// Distinct eigenvalues of `L` restricted to the cluster.
    pub distinct: usize,
    /// Numerical rank of the cluster's constraint matrix.
    pub constraint_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCensus {
    pub vertices: VertexSet,
    pub order: usize,
    /// Distinct eigenvalues of `L` restricted to the branch.
    pub distinct: usize,
    pub detached: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub closure: VertexSet,
    pub complement: usize,
    pub clusters: Vec<ClusterCensus>,
    pub branches: Vec<BranchCensus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: i64,
    pub upper: i64,
}

impl Bounds {
    pub fn contains(&self, d: usize) -> bool {
        self.lower <= d as i64 && d as i64 <= self.upper
    }
}

/// Row `m` is `(P_m ℓ)ᵀ` where `ℓ_j = L(β, j)` over the cluster and `P_m`
/// projects onto the `m`-th eigenspace of `L` restricted to the cluster, so
/// `A_β u(0)` lists the coefficients of `e^{itμ_m}` in `Σ_j L(β,j) u(t,j)`.
///
/// `spec` must be the spectral data of `g.restrict(cluster)`.
pub fn cluster_constraint_matrix(
    g: &FiniteGraph,
    root: usize,
    cluster: &VertexSet,
    spec: &SpectralData,
) -> Result<DMatrix<f64>> {
    if cluster.is_empty() {
        return Err(Error::EmptyCluster { root });
    }
    g.check_vertices(cluster.iter().chain(std::iter::once(&root)))?;
    if spec.n() != cluster.len() {
        return Err(Error::DimensionMismatch {
            expected: cluster.len(),
            got: spec.n(),
        });
    }
    let coupling = nalgebra::DVector::from_iterator(cluster.len(), cluster.iter().map(|&j| g.weight(root, j)));
    let p = spec.eigenvectors();
    let mut a = DMatrix::zeros(spec.distinct_count(), cluster.len());
    for (m, group) in spec.groups().iter().enumerate() {
        for &s in group {
            let ps = p.column(s);
            let weight = ps.dot(&coupling);
            for j in 0..cluster.len() {
                a[(m, j)] += weight * ps[j];
            }
        }
    }
    Ok(a)
}

fn closure_and_decomposition(g: &FiniteGraph, seed: &VertexSet) -> Result<ClusterDecomposition> {
    let closure = extension::closure(g, seed)?;
    extension::decompose(g, &closure)
}

fn census_of(g: &FiniteGraph, d: &ClusterDecomposition, tol: &Tolerances) -> Result<Census> {
    let mut clusters = Vec::with_capacity(d.clusters.len());
    for (&root, vertices) in &d.clusters {
        let spec = spectral::symmetric_eig(&g.restrict(vertices), tol.group)?;
        let a = cluster_constraint_matrix(g, root, vertices, &spec)?;
        clusters.push(ClusterCensus {
            root,
            vertices: vertices.clone(),
            distinct: spec.distinct_count(),
            constraint_rank: spectral::numerical_rank(&a, tol.kernel)?,
        });
    }
    let mut branches = Vec::with_capacity(d.branches.len());
    for b in &d.branches {
        branches.push(BranchCensus {
            vertices: b.vertices.clone(),
            order: b.order,
            distinct: spectral::distinct_eigenvalue_count(&g.restrict(&b.vertices), tol.group)?,
            detached: b.is_detached(),
        });
    }
    Ok(Census {
        closure: d.closure.clone(),
        complement: d.complement_size(),
        clusters,
        branches,
    })
}

/// Cluster/branch census of `[B]`.
pub fn census(g: &FiniteGraph, seed: &VertexSet, tol: &Tolerances) -> Result<Census> {
    let d = closure_and_decomposition(g, seed)?;
    census_of(g, &d, tol)
}

fn bounds_of(c: &Census) -> Bounds {
    let complement = c.complement as i64;
    let clusters: i64 = c.clusters.iter().map(|k| k.distinct as i64).sum();
    let shared: i64 = c.branches.iter().map(|b| (b.order * b.distinct) as i64).sum();
    Bounds {
        lower: complement - clusters,
        upper: complement + shared - clusters,
    }
}

/// `#(F∖[B]) − Σ𝔎_i ≤ dim V_B ≤ #(F∖[B]) + Σ ord(γ_i)·𝔑_i − Σ𝔎_i`.
pub fn dimension_bounds(g: &FiniteGraph, seed: &VertexSet, tol: &Tolerances) -> Result<(Bounds, Census)> {
    let c = census(g, seed, tol)?;
    Ok((bounds_of(&c), c))
}

/// Result of a kernel computation expressed in full vertex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSpace {
    pub dimension: usize,
    /// Initial data spanning the space, as columns of an `n × dimension` matrix.
    pub basis: DMatrix<f64>,
}

/// Exact dimension from the cluster constraint matrices, with roots whose
/// constraint matrix is rank deficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDimension {
    pub space: SolutionSpace,
    pub rank_deficient: Vec<usize>,
}

fn exact_from_decomposition(g: &FiniteGraph, d: &ClusterDecomposition, tol: &Tolerances) -> Result<ExactDimension> {
    let outside: Vec<usize> = (0..g.n()).filter(|v| !d.closure.contains(v)).collect();
    let column: BTreeMap<usize, usize> = outside.iter().enumerate().map(|(c, &v)| (v, c)).collect();
    let mut blocks = Vec::new();
    let mut rank_deficient = Vec::new();
    for (&root, vertices) in &d.clusters {
        let spec = spectral::symmetric_eig(&g.restrict(vertices), tol.group)?;
        let a = cluster_constraint_matrix(g, root, vertices, &spec)?;
        if spectral::numerical_rank(&a, tol.kernel)? < spec.distinct_count() {
            rank_deficient.push(root);
        }
        let mut embedded = DMatrix::zeros(a.nrows(), outside.len());
        for (j, v) in vertices.iter().enumerate() {
            embedded.set_column(column[v], &a.column(j));
        }
        blocks.push(embedded);
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = DMatrix::zeros(rows, outside.len());
    let mut r = 0;
    for b in blocks {
        stacked.view_mut((r, 0), (b.nrows(), b.ncols())).copy_from(&b);
        r += b.nrows();
    }
    let local = if rows == 0 {
        DMatrix::identity(outside.len(), outside.len())
    } else {
        spectral::kernel(&stacked, tol.kernel)?.basis
    };
    let mut basis = DMatrix::zeros(g.n(), local.ncols());
    for (c, &v) in outside.iter().enumerate() {
        basis.set_row(v, &local.row(c));
    }
    Ok(ExactDimension {
        space: SolutionSpace {
            dimension: local.ncols(),
            basis,
        },
        rank_deficient,
    })
}

/// `dim ⋂_j Ker(A_{β_j})` over the clusters of `[B]`, in coordinates of `F ∖ [B]`.
pub fn exact_dimension(g: &FiniteGraph, seed: &VertexSet, tol: &Tolerances) -> Result<ExactDimension> {
    let d = closure_and_decomposition(g, seed)?;
    exact_from_decomposition(g, &d, tol)
}

/// Independent route from the spectral expansion of the whole graph.
///
/// `u(t,β) = Σ_m e^{itμ_m} (P_m u(0))(β)` vanishes on `[0,1]` iff every
/// coefficient does, so `V_B ≅ ker {e_βᵀ P_m}`.
pub fn oracle_dimension(g: &FiniteGraph, seed: &VertexSet, tol: &Tolerances) -> Result<SolutionSpace> {
    let spec = spectral::symmetric_eig(g.matrix(), tol.group)?;
    oracle_with_spectrum(g, seed, &spec, tol)
}

/// As [`oracle_dimension`] with caller-provided spectral data of `g`.
pub fn oracle_with_spectrum(
    g: &FiniteGraph,
    seed: &VertexSet,
    spec: &SpectralData,
    tol: &Tolerances,
) -> Result<SolutionSpace> {
    g.check_vertices(seed)?;
    let n = g.n();
    if seed.is_empty() {
        return Ok(SolutionSpace {
            dimension: n,
            basis: DMatrix::identity(n, n),
        });
    }
    let groups = spec.distinct_count();
    let mut rows = DMatrix::zeros(seed.len() * groups, n);
    for m in 0..groups {
        let p = spec.spectral_projector(m)?;
        for (i, &beta) in seed.iter().enumerate() {
            rows.set_row(m * seed.len() + i, &p.row(beta));
        }
    }
    let k = spectral::kernel(&rows, tol.kernel)?;
    Ok(SolutionSpace {
        dimension: k.dimension,
        basis: k.basis,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub seed: VertexSet,
    pub closure: VertexSet,
    pub lower: i64,
    pub upper: i64,
    pub exact: usize,
    pub oracle: usize,
    /// `exact == oracle`.
    pub matches: bool,
    /// `lower ≤ oracle ≤ upper`.
    pub bounds_hold: bool,
    pub census: Census,
    /// Roots whose constraint matrix has rank below their distinct-eigenvalue count.
    pub rank_deficient: Vec<usize>,
    pub tolerances: Tolerances,
}

/// All three routes for one instance.
pub fn dimension_report(g: &FiniteGraph, seed: &VertexSet, tol: &Tolerances) -> Result<DimensionReport> {
    let d = closure_and_decomposition(g, seed)?;
    let census = census_of(g, &d, tol)?;
    let bounds = bounds_of(&census);
    let exact = exact_from_decomposition(g, &d, tol)?;
    let oracle = oracle_dimension(g, seed, tol)?;
    Ok(DimensionReport {
        seed: seed.clone(),
        closure: d.closure.clone(),
        lower: bounds.lower,
        upper: bounds.upper,
        exact: exact.space.dimension,
        oracle: oracle.dimension,
        matches: exact.space.dimension == oracle.dimension,
        bounds_hold: bounds.contains(oracle.dimension),
        census,
        rank_deficient: exact.rank_deficient,
        tolerances: *tol,
    })
}

/// How much of a channel is forced to vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelZero {
    None,
    /// Only `ν(1)`.
    First,
    /// Every `ν(k)`, `k ≥ 1`.
    Entire,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedZeroSet {
    pub core: VertexSet,
    pub channels: Vec<ChannelZero>,
}

impl ForcedZeroSet {
    /// Every core vertex and every channel vanish.
    pub fn is_everything(&self, core_size: usize) -> bool {
        self.core.len() == core_size && self.channels.iter().all(|c| *c == ChannelZero::Entire)
    }

    pub fn contains(&self, v: WebVertex) -> bool {
        match v {
            WebVertex::Core(i) => self.core.contains(&i),
            WebVertex::Channel { channel, k } => match self.channels.get(channel) {
                Some(ChannelZero::Entire) => k >= 1,
                Some(ChannelZero::First) => k == 1,
                _ => false,
            },
        }
    }
}

/// Zero propagation on a finite graph: `u` vanishing on `B` vanishes on `[B]`.
pub fn forced_zero_set_finite(g: &FiniteGraph, seed: &VertexSet) -> Result<VertexSet> {
    extension::closure(g, seed)
}

/// The finite part `A1 ∪ {ν(1)}` of a web as a graph: core vertices keep
/// their indices, `ν(1)` of channel `c` becomes vertex `core + c`.
pub fn finite_part(web: &WebGraph) -> FiniteGraph {
    let m = web.core().n();
    let n = m + web.channel_count();
    let mut l = DMatrix::zeros(n, n);
    l.view_mut((0, 0), (m, m)).copy_from(web.core().matrix());
    for (c, ch) in web.channels().iter().enumerate() {
        l[(m + c, m + c)] = ch.a_at(1);
        l[(ch.attach, m + c)] = -ch.b_at(0);
        l[(m + c, ch.attach)] = -ch.b_at(0);
    }
    FiniteGraph::new(l).expect("symmetric by construction")
}

/// Vertices of a web forced to vanish on `[0,1]` when `u` vanishes on `seed`
/// and on every channel listed in `channel_zeros`.
///
/// Seeds live in `A1 ∪ {ν(1)}`. Extension runs on that finite part, where a
/// `ν(1)` is never used as the source of a step: its neighbour `ν(2)` lies
/// outside the finite part. In particular a seeded `ν(1)` whose `ν(0)` is not
/// known to vanish does not propagate. A channel whose `ν(0)` and `ν(1)` both
/// vanish vanishes entirely.
pub fn forced_zero_set(web: &WebGraph, seed: &[WebVertex], channel_zeros: &[usize]) -> Result<ForcedZeroSet> {
    let m = web.core().n();
    let f = finite_part(web);
    let mut start = VertexSet::new();
    for &v in seed {
        let idx = match v {
            WebVertex::Core(i) if i < m => i,
            WebVertex::Channel { channel, k: 1 } if channel < web.channel_count() => m + channel,
            other => {
                return Err(Error::InvalidSeed {
                    vertex: other.to_string(),
                })
            }
        };
        start.insert(idx);
    }
    for &c in channel_zeros {
        let ch = web.channels().get(c).ok_or_else(|| Error::InvalidSeed {
            vertex: format!("channel {c}"),
        })?;
        start.insert(ch.attach);
        start.insert(m + c);
    }
    let zero = extension::closure_with_sources(&f, &start, |v| v < m)?;
    let channels = web
        .channels()
        .iter()
        .enumerate()
        .map(|(c, ch)| {
            let first = zero.contains(&(m + c));
            if channel_zeros.contains(&c) || (first && zero.contains(&ch.attach)) {
                ChannelZero::Entire
            } else if first {
                ChannelZero::First
            } else {
                ChannelZero::None
            }
        })
        .collect();
    Ok(ForcedZeroSet {
        core: zero.into_iter().filter(|&v| v < m).collect(),
        channels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn single_vertex_cluster_matrix() {
        let g = FiniteGraph::from_rows(&[vec![1.0, 0.4], vec![0.4, 3.0]]).unwrap();
        let c = set(&[1]);
        let spec = spectral::symmetric_eig(&g.restrict(&c), 1e-8).unwrap();
        let a = cluster_constraint_matrix(&g, 0, &c, &spec).unwrap();
        assert_eq!(a.shape(), (1, 1));
        assert!((a[(0, 0)] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn four_cycle_equal_diagonals_constraint_matrix() {
        let g = fixtures::four_cycle([0.0, 0.0], [2.0, 2.0], [[1.5, -0.5], [0.25, 3.0]]);
        let c = set(&[2, 3]);
        let spec = spectral::symmetric_eig(&g.restrict(&c), 1e-8).unwrap();
        let a = cluster_constraint_matrix(&g, 0, &c, &spec).unwrap();
        assert_eq!(a.shape(), (1, 2));
        assert!((a[(0, 0)] - 1.5).abs() < 1e-14 && (a[(0, 1)] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn four_cycle_distinct_diagonals_constraint_matrix() {
        let g = fixtures::four_cycle([0.0, 0.0], [1.0, 2.0], [[1.5, -0.5], [0.25, 3.0]]);
        let c = set(&[2, 3]);
        let spec = spectral::symmetric_eig(&g.restrict(&c), 1e-8).unwrap();
        let a = cluster_constraint_matrix(&g, 0, &c, &spec).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, -0.5]);
        assert!((a - expected).amax() < 1e-14);
    }

    #[test]
    fn empty_cluster_rejected() {
        let g = fixtures::path(&[0.0; 2]);
        let spec = spectral::symmetric_eig(&DMatrix::zeros(0, 0), 1e-8).unwrap();
        assert_eq!(
            cluster_constraint_matrix(&g, 0, &VertexSet::new(), &spec),
            Err(Error::EmptyCluster { root: 0 })
        );
    }

    #[test]
    fn bounds_for_hand_instances() {
        let g = fixtures::two_hubs();
        let (b, _) = dimension_bounds(&g, &fixtures::two_hubs_seed(), &tol()).unwrap();
        assert_eq!((b.lower, b.upper), (-1, 0));

        let g = fixtures::four_cycle([0.0, 0.0], [1.0, 2.0], [[1.0, 2.0], [3.0, 4.0]]);
        let (b, _) = dimension_bounds(&g, &fixtures::four_cycle_seed(), &tol()).unwrap();
        assert_eq!((b.lower, b.upper), (-2, 0));

        let g = fixtures::four_cycle([0.0, 0.0], [2.0, 2.0], [[1.0, 2.0], [3.0, 4.0]]);
        let (b, _) = dimension_bounds(&g, &fixtures::four_cycle_seed(), &tol()).unwrap();
        assert_eq!((b.lower, b.upper), (0, 2));
    }

    #[test]
    fn exact_dimension_examples() {
        let g = fixtures::four_cycle([0.5, -1.0], [1.0, 2.0], [[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(exact_dimension(&g, &VertexSet::new(), &tol()).unwrap().space.dimension, 4);
        assert_eq!(exact_dimension(&g, &fixtures::four_cycle_seed(), &tol()).unwrap().space.dimension, 0);

        let g = fixtures::four_cycle([0.5, -1.0], [2.0, 2.0], [[1.0, 1.0], [1.0, 1.0]]);
        let r = dimension_report(&g, &fixtures::four_cycle_seed(), &tol()).unwrap();
        assert_eq!((r.exact, r.oracle), (1, 1));
        assert!(r.matches && r.bounds_hold);

        let g = fixtures::four_cycle([0.5, -1.0], [2.0, 2.0], [[1.0, 2.0], [3.0, 4.0]]);
        let r = dimension_report(&g, &fixtures::four_cycle_seed(), &tol()).unwrap();
        assert_eq!((r.exact, r.oracle), (0, 0));
    }

    #[test]
    fn oracle_examples() {
        let g = fixtures::path(&[0.3, 1.0, -2.0]);
        assert_eq!(oracle_dimension(&g, &VertexSet::new(), &tol()).unwrap().dimension, 3);
        assert_eq!(oracle_dimension(&g, &set(&[0, 1, 2]), &tol()).unwrap().dimension, 0);
        let g = fixtures::four_cycle([0.5, -1.0], [1.0, 2.0], [[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(oracle_dimension(&g, &fixtures::four_cycle_seed(), &tol()).unwrap().dimension, 0);
    }

    #[test]
    fn hubs_report() {
        let r = dimension_report(&fixtures::two_hubs(), &fixtures::two_hubs_seed(), &tol()).unwrap();
        assert_eq!(r.exact, 0);
        assert_eq!(r.oracle, 0);
        assert!(r.rank_deficient.is_empty());
    }

    /// A cluster whose coupling vector is orthogonal to one of its
    /// eigenvectors: the constraint matrix loses rank and the solution space
    /// exceeds the census upper bound.
    #[test]
    fn orthogonal_coupling_breaks_upper_bound() {
        let g = FiniteGraph::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 2.0, -1.0],
            vec![1.0, -1.0, 2.0],
        ])
        .unwrap();
        let r = dimension_report(&g, &set(&[0]), &tol()).unwrap();
        assert_eq!((r.lower, r.upper), (0, 0));
        assert_eq!(r.exact, 1);
        assert_eq!(r.oracle, 1);
        assert!(r.matches);
        assert!(!r.bounds_hold);
        assert_eq!(r.rank_deficient, vec![0]);
    }

    #[test]
    fn forced_zero_finite_is_closure() {
        let g = fixtures::path(&[0.0; 4]);
        assert_eq!(forced_zero_set_finite(&g, &set(&[0])).unwrap(), set(&[0, 1, 2, 3]));
        assert!(forced_zero_set_finite(&g, &VertexSet::new()).unwrap().is_empty());
    }

    fn star_web() -> WebGraph {
        fixtures::path_web()
    }

    #[test]
    fn forced_zero_from_attachment_pair() {
        let web = star_web();
        let z = forced_zero_set(
            &web,
            &[WebVertex::Core(0), WebVertex::Channel { channel: 0, k: 1 }],
            &[],
        )
        .unwrap();
        assert!(z.is_everything(3), "{z:?}");
    }

    #[test]
    fn forced_zero_from_zero_channels() {
        let web = star_web();
        let z = forced_zero_set(&web, &[], &[0]).unwrap();
        assert!(z.is_everything(3), "{z:?}");
    }

    #[test]
    fn dangling_channel_seed_does_not_propagate() {
        let web = star_web();
        let z = forced_zero_set(&web, &[WebVertex::Channel { channel: 0, k: 1 }], &[]).unwrap();
        assert!(z.core.is_empty());
        assert_eq!(z.channels, vec![ChannelZero::First, ChannelZero::None]);
    }

    #[test]
    fn empty_seed_forces_nothing() {
        let z = forced_zero_set(&star_web(), &[], &[]).unwrap();
        assert!(z.core.is_empty());
        assert!(z.channels.iter().all(|c| *c == ChannelZero::None));
    }

    #[test]
    fn invalid_seed() {
        assert!(matches!(
            forced_zero_set(&star_web(), &[WebVertex::Channel { channel: 0, k: 2 }], &[]),
            Err(Error::InvalidSeed { .. })
        ));
        assert!(matches!(
            forced_zero_set(&star_web(), &[WebVertex::Core(9)], &[]),
            Err(Error::InvalidSeed { .. })
        ));
    }
}
