//! Finite graphs, channel specifications, web graphs and their truncations.
//!
//! A graph is carried entirely by its symmetric real interaction matrix `L`;
//! two distinct vertices are adjacent when `L(α,β) ≠ 0`. Vertices are dense
//! indices `0..n`. Labels, when present, are only used for presentation.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of vertex indices.
pub type VertexSet = BTreeSet<usize>;

/// Symmetric real interaction matrix over a finite vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGraph {
    matrix: DMatrix<f64>,
    adjacency: Vec<Vec<usize>>,
    labels: Option<Vec<String>>,
}

/// Structural facts reported by [`validate_finite_graph`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub edges: usize,
    pub connected: bool,
    pub components: usize,
}

/// Validates a square matrix as a [`FiniteGraph`] and summarizes its structure.
///
/// Symmetry is required exactly as stored; see [`symmetrize`] for explicit repair.
pub fn validate_finite_graph(matrix: DMatrix<f64>) -> Result<(FiniteGraph, GraphSummary)> {
    let g = FiniteGraph::new(matrix)?;
    let summary = g.summary();
    Ok((g, summary))
}

/// Replaces `L` by `(L + Lᵀ)/2`. Only used when the caller asks for it.
pub fn symmetrize(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    (matrix + matrix.transpose()) * 0.5
}

/// Largest asymmetry `|L(α,β) − L(β,α)|` together with its location.
pub fn symmetry_defect(matrix: &DMatrix<f64>) -> (f64, usize, usize) {
    let n = matrix.nrows();
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (matrix[(i, j)] - matrix[(j, i)]).abs();
            if d > worst.0 {
                worst = (d, i, j);
            }
        }
    }
    worst
}

impl FiniteGraph {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NonSquare { rows, cols });
        }
        for i in 0..rows {
            for j in 0..cols {
                if !matrix[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let (defect, row, col) = symmetry_defect(&matrix);
        if defect > 0.0 {
            return Err(Error::NonSymmetric { row, col, defect });
        }
        let adjacency = (0..rows)
            .map(|i| (0..rows).filter(|&j| j != i && matrix[(i, j)] != 0.0).collect())
            .collect();
        Ok(Self {
            matrix,
            adjacency,
            labels: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NonSquare {
                    rows: n,
                    cols: if i == 0 { r.len() } else { r.len().max(n) },
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.matrix[(a, b)]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nb) in self.adjacency.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn check_vertices<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> Result<()> {
        let n = self.n();
        for &v in set {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
        }
        Ok(())
    }

    /// Connected components of the vertices in `within`, using edges inside `within` only.
    /// Components are ordered by their smallest vertex.
    pub fn components_within(&self, within: &VertexSet) -> Vec<VertexSet> {
        let mut seen = VertexSet::new();
        let mut out = Vec::new();
        for &start in within {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = VertexSet::new();
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(v) = stack.pop() {
                comp.insert(v);
                for &w in self.neighbors(v) {
                    if within.contains(&w) && seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<VertexSet> {
        self.components_within(&(0..self.n()).collect())
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn summary(&self) -> GraphSummary {
        let components = self.components().len();
        GraphSummary {
            n: self.n(),
            edges: self.edges().len(),
            connected: components <= 1,
            components,
        }
    }

    /// Principal submatrix on `vertices`, rows/columns in ascending vertex order.
    pub fn restrict(&self, vertices: &VertexSet) -> DMatrix<f64> {
        let idx: Vec<usize> = vertices.iter().copied().collect();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }

    /// Positivity diagnostic. Never enforced.
    pub fn is_positive_definite(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let eig = nalgebra::SymmetricEigen::new(self.matrix.clone());
        eig.eigenvalues.iter().all(|&l| l > 0.0)
    }
}

/// One semi-infinite channel `ν(0), ν(1), …` attached to the core at `ν(0)`.
///
/// Couplings follow `L(ν(k−1),ν(k)) = −b(k−1)` and `L(ν(k),ν(k)) = a(k)` for
/// `k ≥ 1`, with `b(k) = 1` for `k ≥ K0` and `a(k) = 2` for `k > K0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    /// Core vertex playing the role of `ν(0)`.
    pub attach: usize,
    /// Stabilization index.
    pub k0: usize,
    /// `b(0), …, b(K0−1)`; all nonzero.
    pub b: Vec<f64>,
    /// `a(1), …, a(K0)`.
    pub a: Vec<f64>,
}

impl ChannelSpec {
    /// Channel with `a ≡ 2`, `b ≡ 1`.
    pub fn free(attach: usize) -> Self {
        Self {
            attach,
            k0: 0,
            b: Vec::new(),
            a: Vec::new(),
        }
    }

    pub fn new(attach: usize, b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        let ch = Self {
            attach,
            k0: b.len(),
            b,
            a,
        };
        ch.validate(0)?;
        Ok(ch)
    }

    pub fn validate(&self, channel: usize) -> Result<()> {
        if self.b.len() != self.k0 || self.a.len() != self.k0 {
            return Err(Error::InvalidChannel {
                channel,
                reason: format!(
                    "expected {} values of a and b, got {} and {}",
                    self.k0,
                    self.a.len(),
                    self.b.len()
                ),
            });
        }
        for (k, &b) in self.b.iter().enumerate() {
            if b == 0.0 {
                return Err(Error::ZeroCoefficient { channel, index: k });
            }
            if !b.is_finite() {
                return Err(Error::InvalidChannel {
                    channel,
                    reason: format!("b({k}) is not finite"),
                });
            }
        }
        if let Some(k) = self.a.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidChannel {
                channel,
                reason: format!("a({}) is not finite", k + 1),
            });
        }
        Ok(())
    }

    /// `b(k)` for any `k ≥ 0`.
    pub fn b_at(&self, k: usize) -> f64 {
        self.b.get(k).copied().unwrap_or(1.0)
    }

    /// `a(k)` for any `k ≥ 1`.
    pub fn a_at(&self, k: usize) -> f64 {
        assert!(k >= 1, "a(k) is defined for k >= 1");
        self.a.get(k - 1).copied().unwrap_or(2.0)
    }
}

/// Finite core plus channels attached to core vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct WebGraph {
    core: FiniteGraph,
    channels: Vec<ChannelSpec>,
}

/// A vertex of a web graph. `ν(0)` is the core vertex the channel attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WebVertex {
    Core(usize),
    Channel { channel: usize, k: usize },
}

impl fmt::Display for WebVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WebVertex::Core(v) => write!(f, "core {v}"),
            WebVertex::Channel { channel, k } => write!(f, "ν{channel}({k})"),
        }
    }
}

impl WebGraph {
    pub fn new(core: FiniteGraph, channels: Vec<ChannelSpec>) -> Result<Self> {
        for (c, ch) in channels.iter().enumerate() {
            ch.validate(c)?;
            if ch.attach >= core.n() {
                return Err(Error::InvalidChannel {
                    channel: c,
                    reason: format!("attachment vertex {} is not a core vertex", ch.attach),
                });
            }
        }
        Ok(Self { core, channels })
    }

    pub fn core(&self) -> &FiniteGraph {
        &self.core
    }

    pub fn channels(&self) -> &[ChannelSpec] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// The global stabilization index: the maximum over channels.
    pub fn k0(&self) -> usize {
        self.channels.iter().map(|c| c.k0).max().unwrap_or(0)
    }

    /// Finite realization keeping channel sites `1..=depth` of every channel.
    pub fn truncate(&self, depth: usize) -> Result<(FiniteGraph, TruncationMap)> {
        for (c, ch) in self.channels.iter().enumerate() {
            if depth < ch.k0 + 1 {
                return Err(Error::TruncationTooShort {
                    channel: c,
                    requested: depth,
                    required: ch.k0 + 1,
                });
            }
        }
        let map = TruncationMap {
            core: self.core.n(),
            channels: self.channels.len(),
            depth,
        };
        let n = map.len();
        let mut l = DMatrix::zeros(n, n);
        l.view_mut((0, 0), (map.core, map.core))
            .copy_from(self.core.matrix());
        for (c, ch) in self.channels.iter().enumerate() {
            let mut prev = ch.attach;
            for k in 1..=depth {
                let i = map.channel_index(c, k);
                l[(i, i)] = ch.a_at(k);
                l[(prev, i)] = -ch.b_at(k - 1);
                l[(i, prev)] = -ch.b_at(k - 1);
                prev = i;
            }
        }
        let g = FiniteGraph::new(l)?;
        let labels = (0..n).map(|i| map.vertex(i).to_string()).collect();
        Ok((g.with_labels(labels)?, map))
    }
}

/// Relates web vertices to rows of a truncated matrix.
///
/// Core vertices come first; channel `c` site `k` (1-based) lives at
/// `core + c·depth + (k − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationMap {
    pub core: usize,
    pub channels: usize,
    pub depth: usize,
}

impl TruncationMap {
    pub fn len(&self) -> usize {
        self.core + self.channels * self.depth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel_index(&self, channel: usize, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.depth && channel < self.channels);
        self.core + channel * self.depth + (k - 1)
    }

    pub fn index(&self, v: WebVertex) -> Option<usize> {
        match v {
            WebVertex::Core(i) if i < self.core => Some(i),
            WebVertex::Channel { channel, k }
                if channel < self.channels && k >= 1 && k <= self.depth =>
            {
                Some(self.channel_index(channel, k))
            }
            _ => None,
        }
    }

    pub fn vertex(&self, index: usize) -> WebVertex {
        if index < self.core {
            WebVertex::Core(index)
        } else {
            let r = index - self.core;
            WebVertex::Channel {
                channel: r / self.depth,
                k: r % self.depth + 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::four_cycle;

    #[test]
    fn single_vertex_is_connected_without_edges() {
        let (_, s) = validate_finite_graph(DMatrix::from_element(1, 1, 3.5)).unwrap();
        assert_eq!(s, GraphSummary { n: 1, edges: 0, connected: true, components: 1 });
    }

    #[test]
    fn four_cycle_summary() {
        let g = four_cycle([1.0, 1.5], [2.0, 3.0], [[1.0, 0.7], [-0.5, 2.0]]);
        let s = g.summary();
        assert!(s.connected);
        assert_eq!(s.edges, 4);
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.weight(2, 3), 0.0);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(
            validate_finite_graph(m),
            Err(Error::NonSymmetric { defect, .. }) if defect == 1.0
        ));
        let fixed = symmetrize(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]));
        assert_eq!(fixed[(0, 1)], 1.5);
    }

    #[test]
    fn non_square_rows_rejected() {
        let err = FiniteGraph::from_rows(&[vec![1.0, 0.0], vec![0.0]]).unwrap_err();
        assert!(matches!(err, Error::NonSquare { .. }));
    }

    #[test]
    fn disconnected_graph_is_reported_not_rejected() {
        let g = FiniteGraph::new(DMatrix::identity(3, 3)).unwrap();
        let s = g.summary();
        assert!(!s.connected);
        assert_eq!(s.components, 3);
    }

    #[test]
    fn free_truncation_is_discrete_laplacian() {
        let core = FiniteGraph::new(DMatrix::from_element(1, 1, 2.0)).unwrap();
        let web = WebGraph::new(core, vec![ChannelSpec::free(0)]).unwrap();
        let (g, map) = web.truncate(2).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        assert_eq!(g.matrix(), &expected);
        assert_eq!(map.index(WebVertex::Channel { channel: 0, k: 2 }), Some(2));
        assert_eq!(map.vertex(1), WebVertex::Channel { channel: 0, k: 1 });
    }

    #[test]
    fn four_cycle_with_channel_matches_hand_assembly() {
        let core = four_cycle([1.0, 1.5], [2.0, 3.0], [[1.0, 0.7], [-0.5, 2.0]]);
        let web = WebGraph::new(core.clone(), vec![ChannelSpec::free(0)]).unwrap();
        let (g, _) = web.truncate(1).unwrap();
        let mut hand = DMatrix::zeros(5, 5);
        hand.view_mut((0, 0), (4, 4)).copy_from(core.matrix());
        hand[(4, 4)] = 2.0;
        hand[(0, 4)] = -1.0;
        hand[(4, 0)] = -1.0;
        assert_eq!(g.matrix(), &hand);
    }

    #[test]
    fn truncation_shorter_than_k0_fails() {
        let core = FiniteGraph::new(DMatrix::from_element(1, 1, 2.0)).unwrap();
        let ch = ChannelSpec::new(0, vec![1.0, 2.0], vec![3.0, 1.0]).unwrap();
        let web = WebGraph::new(core, vec![ch]).unwrap();
        assert!(matches!(web.truncate(2), Err(Error::TruncationTooShort { .. })));
        assert!(web.truncate(3).is_ok());
    }

    #[test]
    fn zero_b_rejected() {
        assert!(matches!(
            ChannelSpec::new(0, vec![0.0], vec![1.0]),
            Err(Error::ZeroCoefficient { .. })
        ));
    }

    #[test]
    fn truncation_tail_is_stabilized() {
        let core = FiniteGraph::new(DMatrix::from_element(2, 2, 1.0)).unwrap();
        let ch = ChannelSpec::new(1, vec![3.0, -2.0], vec![0.5, 7.0]).unwrap();
        let web = WebGraph::new(core, vec![ch, ChannelSpec::free(0)]).unwrap();
        let (g, map) = web.truncate(6).unwrap();
        let l = g.matrix();
        for k in 3..=6 {
            let i = map.channel_index(0, k);
            assert_eq!(l[(i, i)], 2.0);
            assert_eq!(l[(i - 1, i)], -1.0);
        }
        assert_eq!(l[(1, map.channel_index(0, 1))], -3.0);
        assert_eq!(l[(0, map.channel_index(1, 1))], -1.0);
    }
}
