//! Small hand-built instances used throughout the tests, the acceptance
//! checks and the CLI examples.

use nalgebra::DMatrix;

use crate::graph::{ChannelSpec, FiniteGraph, VertexSet, WebGraph, WebVertex};

/// Four-cycle `β1 – α1 – β2 – α2 – β1` with vertex order `[β1, β2, α1, α2]`.
///
/// `couplings[j][k] = L(β_j, α_k)`; `α1` and `α2` are not adjacent, nor are `β1` and `β2`.
pub fn four_cycle(beta_diag: [f64; 2], alpha_diag: [f64; 2], couplings: [[f64; 2]; 2]) -> FiniteGraph {
    let mut l = DMatrix::zeros(4, 4);
    l[(0, 0)] = beta_diag[0];
    l[(1, 1)] = beta_diag[1];
    l[(2, 2)] = alpha_diag[0];
    l[(3, 3)] = alpha_diag[1];
    for j in 0..2 {
        for k in 0..2 {
            l[(j, 2 + k)] = couplings[j][k];
            l[(2 + k, j)] = couplings[j][k];
        }
    }
    FiniteGraph::new(l)
        .expect("symmetric by construction")
        .with_labels(["β1", "β2", "α1", "α2"].map(String::from).to_vec())
        .expect("four labels")
}

/// The two `β` vertices of [`four_cycle`].
pub fn four_cycle_seed() -> VertexSet {
    [0, 1].into()
}

/// Two hubs joined through a shared vertex `α`: the left hub carries four
/// further leaves, the right hub two. Vertex order:
/// `[h1, h2, α, l1, l2, l3, l4, r1, r2]`.
///
/// Diagonal entries are pairwise distinct so every restriction to a set of
/// isolated leaves has all-distinct eigenvalues.
pub fn two_hubs() -> FiniteGraph {
    let diag = [0.5, 0.75, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    let edges = [
        (0, 2, 1.0),
        (0, 3, 0.8),
        (0, 4, -1.1),
        (0, 5, 0.6),
        (0, 6, 1.3),
        (1, 2, -0.9),
        (1, 7, 1.2),
        (1, 8, 0.7),
    ];
    let mut l = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&diag));
    for (i, j, w) in edges {
        l[(i, j)] = w;
        l[(j, i)] = w;
    }
    FiniteGraph::new(l)
        .expect("symmetric by construction")
        .with_labels(
            ["h1", "h2", "α", "l1", "l2", "l3", "l4", "r1", "r2"]
                .map(String::from)
                .to_vec(),
        )
        .expect("nine labels")
}

pub fn two_hubs_seed() -> VertexSet {
    [0, 1].into()
}

/// Path graph with unit couplings and the given diagonal.
pub fn path(diag: &[f64]) -> FiniteGraph {
    let n = diag.len();
    let l = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    });
    FiniteGraph::new(l).expect("symmetric by construction")
}

/// Two-vertex core `[c0, c1]` with a free channel on each core vertex and a
/// perturbed channel on vertex 1.
pub fn small_web() -> WebGraph {
    let core = FiniteGraph::new(DMatrix::from_row_slice(2, 2, &[3.0, -0.7, -0.7, 2.5])).unwrap();
    let channels = vec![
        ChannelSpec::free(0),
        ChannelSpec::free(1),
        ChannelSpec::new(1, vec![0.8, 1.5], vec![2.4, 1.1]).unwrap(),
    ];
    WebGraph::new(core, channels).unwrap()
}

/// Scalar core `c` with one free channel.
pub fn scalar_free_web(c: f64) -> WebGraph {
    let core = FiniteGraph::new(DMatrix::from_element(1, 1, c)).unwrap();
    WebGraph::new(core, vec![ChannelSpec::free(0)]).unwrap()
}

/// Path core `0–1–2` with a free channel on 0 and a perturbed channel on 2.
pub fn path_web() -> WebGraph {
    let core = path(&[3.0, 2.5, 1.0]);
    WebGraph::new(
        core,
        vec![ChannelSpec::free(0), ChannelSpec::new(2, vec![0.5], vec![3.0]).unwrap()],
    )
    .unwrap()
}

/// `ν(0)` and `ν(1)` of the free channel of [`path_web`]; their extension
/// covers the whole web.
pub fn path_web_seed() -> Vec<WebVertex> {
    vec![WebVertex::Core(0), WebVertex::Channel { channel: 0, k: 1 }]
}
