//! Benchmark workloads.

use graph_schro::campaign::{instance_rng, random_connected_graph, random_seed_set};
use graph_schro::{Complex64, DVector, FiniteGraph, VertexSet, WebGraph};

/// Random connected graph with a random seed set, fixed by `id`.
pub fn dimension_workload(n: usize, id: u64) -> (FiniteGraph, VertexSet) {
    let mut rng = instance_rng(0xbe7c, id);
    let g = random_connected_graph(&mut rng, n, 0.3);
    let seed = random_seed_set(&mut rng, n);
    (g, seed)
}

/// Unit vector on the first channel site of a truncated web.
pub fn channel_delta(web: &WebGraph, depth: usize) -> DVector<Complex64> {
    let (_, map) = web.truncate(depth).expect("depth above K0");
    let mut u = DVector::zeros(map.len());
    u[map.channel_index(0, 1)] = Complex64::from(1.0);
    u
}
