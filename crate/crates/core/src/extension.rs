//! Subgraph extension `B → [B]` and the cluster/branch decomposition of the
//! complement of a maximal set.
//!
//! One extension step picks a member `β` of the current set that has exactly
//! one neighbour `α` outside the set and adds `α`. Eligibility is recomputed
//! after every single addition. The maximal set reached does not depend on
//! the order in which eligible pairs are taken; [`maximal_extension`] accepts
//! a seed that randomizes the order so this can be checked.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, VertexSet};

/// One step of an extension chain: `added` was the unique outside neighbour of `from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionStep {
    pub from: usize,
    pub added: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionResult {
    pub seed: VertexSet,
    pub closure: VertexSet,
    pub chain: Vec<ExtensionStep>,
}

impl ExtensionResult {
    pub fn added(&self) -> impl Iterator<Item = usize> + '_ {
        self.chain.iter().map(|s| s.added)
    }

    /// Re-applies the chain to the seed, checking each step is a valid extension.
    pub fn replay(&self, g: &FiniteGraph) -> Option<VertexSet> {
        let mut set = self.seed.clone();
        for step in &self.chain {
            if !set.contains(&step.from) || unique_outside_neighbor(g, &set, step.from) != Some(step.added) {
                return None;
            }
            set.insert(step.added);
        }
        Some(set)
    }
}

fn unique_outside_neighbor(g: &FiniteGraph, set: &VertexSet, beta: usize) -> Option<usize> {
    let mut outside = g.neighbors(beta).iter().filter(|a| !set.contains(a));
    match (outside.next(), outside.next()) {
        (Some(&a), None) => Some(a),
        _ => None,
    }
}

fn eligible_pairs(g: &FiniteGraph, set: &VertexSet) -> Vec<ExtensionStep> {
    set.iter()
        .filter_map(|&b| unique_outside_neighbor(g, set, b).map(|a| ExtensionStep { from: b, added: a }))
        .collect()
}

/// Smallest eligible `β` (by index) together with its unique outside neighbour.
pub fn extend_once(g: &FiniteGraph, set: &VertexSet) -> Result<Option<ExtensionStep>> {
    g.check_vertices(set)?;
    Ok(set
        .iter()
        .find_map(|&b| unique_outside_neighbor(g, set, b).map(|a| ExtensionStep { from: b, added: a })))
}

/// Extends `seed` until no step applies.
///
/// Without `order_seed` the deterministic rule of [`extend_once`] is used;
/// with it, each step picks uniformly among all eligible pairs.
pub fn maximal_extension(g: &FiniteGraph, seed: &VertexSet, order_seed: Option<u64>) -> Result<ExtensionResult> {
    g.check_vertices(seed)?;
    let mut set = seed.clone();
    let mut chain = Vec::new();
    let mut rng = order_seed.map(ChaCha8Rng::seed_from_u64);
    loop {
        let step = match rng.as_mut() {
            None => extend_once(g, &set)?,
            Some(rng) => {
                let pairs = eligible_pairs(g, &set);
                if pairs.is_empty() {
                    None
                } else {
                    Some(pairs[rng.random_range(0..pairs.len())])
                }
            }
        };
        let Some(step) = step else { break };
        set.insert(step.added);
        chain.push(step);
    }
    Ok(ExtensionResult {
        seed: seed.clone(),
        closure: set,
        chain,
    })
}

/// Closure where only vertices accepted by `allow_source` may serve as the
/// `β` of an extension step. Every vertex of `seed` still counts as inside.
pub fn closure_with_sources(
    g: &FiniteGraph,
    seed: &VertexSet,
    allow_source: impl Fn(usize) -> bool,
) -> Result<VertexSet> {
    g.check_vertices(seed)?;
    let mut set = seed.clone();
    while let Some(a) = set
        .iter()
        .filter(|&&b| allow_source(b))
        .find_map(|&b| unique_outside_neighbor(g, &set, b))
    {
        set.insert(a);
    }
    Ok(set)
}

/// Shorthand for `maximal_extension(g, seed, None)?.closure`.
pub fn closure(g: &FiniteGraph, seed: &VertexSet) -> Result<VertexSet> {
    Ok(maximal_extension(g, seed, None)?.closure)
}

/// A connected component of the complement of a maximal set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub vertices: VertexSet,
    /// Roots of the clusters containing this branch.
    pub clusters: Vec<usize>,
    /// Number of clusters containing the branch minus one (0 if it lies in none).
    pub order: usize,
}

impl Branch {
    /// True when no vertex of the closure is adjacent to the branch. Only
    /// possible on disconnected graphs.
    pub fn is_detached(&self) -> bool {
        self.clusters.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterDecomposition {
    pub closure: VertexSet,
    /// Nonempty clusters keyed by their root `β ∈ [B]`.
    pub clusters: BTreeMap<usize, VertexSet>,
    pub branches: Vec<Branch>,
}

impl ClusterDecomposition {
    pub fn complement_size(&self) -> usize {
        self.branches.iter().map(|b| b.vertices.len()).sum()
    }

    pub fn branch_of(&self, v: usize) -> Option<usize> {
        self.branches.iter().position(|b| b.vertices.contains(&v))
    }
}

/// Branches, clusters and branch orders with respect to a maximal set.
pub fn decompose(g: &FiniteGraph, closure: &VertexSet) -> Result<ClusterDecomposition> {
    g.check_vertices(closure)?;
    if let Some(step) = extend_once(g, closure)? {
        return Err(Error::NotMaximal {
            beta: step.from,
            alpha: step.added,
        });
    }
    let outside: VertexSet = (0..g.n()).filter(|v| !closure.contains(v)).collect();
    let components = g.components_within(&outside);
    let component_of: BTreeMap<usize, usize> = components
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&v| (v, i)))
        .collect();

    let mut clusters = BTreeMap::new();
    let mut membership: Vec<Vec<usize>> = vec![Vec::new(); components.len()];
    for &beta in closure {
        let mut attached: Vec<usize> = g
            .neighbors(beta)
            .iter()
            .filter_map(|a| component_of.get(a).copied())
            .collect();
        attached.sort_unstable();
        attached.dedup();
        if attached.is_empty() {
            continue;
        }
        let mut cluster = VertexSet::new();
        for &c in &attached {
            cluster.extend(components[c].iter().copied());
            membership[c].push(beta);
        }
        clusters.insert(beta, cluster);
    }

    let branches = components
        .into_iter()
        .zip(membership)
        .map(|(vertices, clusters)| Branch {
            vertices,
            order: clusters.len().saturating_sub(1),
            clusters,
        })
        .collect();
    Ok(ClusterDecomposition {
        closure: closure.clone(),
        clusters,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn path_endpoint_extends_to_neighbor() {
        let g = fixtures::path(&[1.0, 2.0, 3.0]);
        assert_eq!(
            extend_once(&g, &set(&[0])).unwrap(),
            Some(ExtensionStep { from: 0, added: 1 })
        );
    }

    #[test]
    fn four_cycle_seed_is_already_maximal() {
        let g = fixtures::four_cycle([1.0, 1.0], [2.0, 3.0], [[1.0, 1.0], [1.0, 1.0]]);
        assert_eq!(extend_once(&g, &fixtures::four_cycle_seed()).unwrap(), None);
    }

    #[test]
    fn full_set_has_no_extension() {
        let g = fixtures::path(&[0.0; 4]);
        assert_eq!(extend_once(&g, &set(&[0, 1, 2, 3])).unwrap(), None);
    }

    #[test]
    fn path_closes_from_endpoint() {
        let g = fixtures::path(&[0.0; 4]);
        let r = maximal_extension(&g, &set(&[0]), None).unwrap();
        assert_eq!(r.closure, set(&[0, 1, 2, 3]));
        assert_eq!(r.added().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(r.replay(&g), Some(r.closure.clone()));
    }

    #[test]
    fn two_chains_close_completely() {
        // chain 0–1–2 seeded at {0, 2}, chain 3–4–5 seeded entirely
        let mut rows = vec![vec![0.0; 6]; 6];
        for (i, j) in [(0, 1), (1, 2), (3, 4), (4, 5)] {
            rows[i][j] = 1.0;
            rows[j][i] = 1.0;
        }
        let g = FiniteGraph::from_rows(&rows).unwrap();
        let r = maximal_extension(&g, &set(&[0, 2, 3, 4, 5]), None).unwrap();
        assert_eq!(r.closure.len(), 6);
        assert!(decompose(&g, &r.closure).unwrap().branches.is_empty());
    }

    #[test]
    fn hubs_seed_is_maximal() {
        let g = fixtures::two_hubs();
        let r = maximal_extension(&g, &fixtures::two_hubs_seed(), None).unwrap();
        assert_eq!(r.closure, fixtures::two_hubs_seed());
        assert!(r.chain.is_empty());
    }

    #[test]
    fn hubs_decomposition() {
        let g = fixtures::two_hubs();
        let d = decompose(&g, &fixtures::two_hubs_seed()).unwrap();
        assert_eq!(d.complement_size(), 7);
        assert_eq!(d.clusters.len(), 2);
        assert_eq!(d.branches.len(), 7);
        assert_eq!(d.clusters[&0].len(), 5);
        assert_eq!(d.clusters[&1].len(), 3);
        for b in &d.branches {
            let expected = if b.vertices.contains(&2) { 1 } else { 0 };
            assert_eq!(b.order, expected, "branch {:?}", b.vertices);
        }
    }

    #[test]
    fn four_cycle_decomposition() {
        let g = fixtures::four_cycle([1.0, 1.0], [2.0, 3.0], [[1.0, 2.0], [3.0, 4.0]]);
        let d = decompose(&g, &fixtures::four_cycle_seed()).unwrap();
        assert_eq!(d.branches.len(), 2);
        assert_eq!(d.clusters[&0], set(&[2, 3]));
        assert_eq!(d.clusters[&1], set(&[2, 3]));
        assert!(d.branches.iter().all(|b| b.order == 1));
    }

    #[test]
    fn decompose_full_set_is_empty() {
        let g = fixtures::path(&[0.0; 3]);
        let d = decompose(&g, &set(&[0, 1, 2])).unwrap();
        assert!(d.branches.is_empty() && d.clusters.is_empty());
    }

    #[test]
    fn decompose_rejects_non_maximal() {
        let g = fixtures::path(&[0.0; 3]);
        assert_eq!(
            decompose(&g, &set(&[0])),
            Err(Error::NotMaximal { beta: 0, alpha: 1 })
        );
    }

    #[test]
    fn out_of_range_seed() {
        let g = fixtures::path(&[0.0; 3]);
        assert!(matches!(
            maximal_extension(&g, &set(&[5]), None),
            Err(Error::VertexOutOfRange { vertex: 5, n: 3 })
        ));
    }

    #[test]
    fn detached_component_forms_orderless_branch() {
        let mut rows = vec![vec![0.0; 4]; 4];
        rows[0][1] = 1.0;
        rows[1][0] = 1.0;
        rows[2][3] = 1.0;
        rows[3][2] = 1.0;
        let g = FiniteGraph::from_rows(&rows).unwrap();
        let c = closure(&g, &set(&[0])).unwrap();
        assert_eq!(c, set(&[0, 1]));
        let d = decompose(&g, &c).unwrap();
        assert_eq!(d.branches.len(), 1);
        assert!(d.branches[0].is_detached());
        assert_eq!(d.branches[0].order, 0);
    }
}
