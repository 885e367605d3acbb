//! Discrete Schrödinger evolution on web-like graphs.
//!
//! A web-like graph is a finite core with finitely many semi-infinite
//! channels (one-sided Jacobi chains) attached to it. This crate provides
//!
//! - finite-graph and web-graph models with finite truncations ([`graph`]),
//! - subgraph extension `B -> [B]` and the cluster/branch census ([`extension`]),
//! - symmetric spectral data, resolvents, projectors and numerical kernels ([`spectral`]),
//! - the dimension of the space of solutions vanishing on a vertex set,
//!   with two-sided bounds and an independent oracle ([`dimension`]),
//! - Jost solutions as exact Laurent polynomials, `T(θ)`, `S(θ)` and
//!   generalized eigenfunctions ([`scattering`], [`laurent`]),
//! - unitary evolution `u(t) = exp(itL) u(0)`, decay-bound checks and
//!   exponential-type estimates ([`evolution`]),
//! - randomized verification campaigns and the acceptance checks ([`campaign`], [`verify`]).

pub mod campaign;
pub mod dimension;
pub mod error;
pub mod evolution;
pub mod extension;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod laurent;
pub mod scattering;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use laurent::LaurentPoly;
pub use graph::{ChannelSpec, FiniteGraph, TruncationMap, VertexSet, WebGraph, WebVertex};

pub use spectral::SpectralData;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

/// Tolerances shared by every API that discretizes an exact-arithmetic concept.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Relative threshold for merging eigenvalues into one distinct-eigenvalue group.
    pub group: f64,
    /// Relative singular-value threshold for numerical kernels and ranks.
    pub kernel: f64,
    /// Minimum distance from the singular set for scattering evaluations.
    pub singular_guard: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            group: 1e-8,
            kernel: 1e-9,
            singular_guard: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("group", self.group), ("kernel", self.kernel)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::ToleranceOutOfRange { name, value: v });
            }
        }
        if !(self.singular_guard > 0.0 && self.singular_guard < 1.0) {
            return Err(Error::ToleranceOutOfRange {
                name: "singular_guard",
                value: self.singular_guard,
            });
        }
        Ok(())
    }
}
