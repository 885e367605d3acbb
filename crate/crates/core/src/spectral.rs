//! Symmetric eigendecomposition with explicit distinct-eigenvalue grouping,
//! resolvent entries, spectral projectors and SVD-based numerical kernels.
//!
//! Counts of distinct eigenvalues feed integer-valued bounds, so the grouping
//! tolerance is always an explicit argument.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::symmetry_defect;

/// Poles closer than this are refused by [`SpectralData::resolvent_entry`].
pub const POLE_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    groups: Vec<Vec<usize>>,
    tol: f64,
}

fn check_tol(name: &'static str, tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= 1e-2 {
        Ok(())
    } else {
        Err(Error::ToleranceOutOfRange { name, value: tol })
    }
}

/// Eigendecomposition of a symmetric matrix with eigenvalues grouped by
/// single linkage at threshold `tol·(1 + max|λ|)`.
pub fn symmetric_eig(l: &DMatrix<f64>, tol: f64) -> Result<SpectralData> {
    let (rows, cols) = l.shape();
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    check_tol("group", tol)?;
    let (defect, row, col) = symmetry_defect(l);
    if defect > 0.0 {
        return Err(Error::NonSymmetric { row, col, defect });
    }
    let n = rows;
    if n == 0 {
        return Ok(SpectralData {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
            groups: Vec::new(),
            tol,
        });
    }
    let eig = SymmetricEigen::new(l.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let groups = group_sorted(&eigenvalues, tol);
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        groups,
        tol,
    })
}

fn group_sorted(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = tol * scale;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if v - values[*g.last().unwrap()] <= threshold => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Number of distinct eigenvalues of a symmetric matrix at grouping tolerance `tol`.
pub fn distinct_eigenvalue_count(l: &DMatrix<f64>, tol: f64) -> Result<usize> {
    Ok(symmetric_eig(l, tol)?.distinct_count())
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn distinct_count(&self) -> usize {
        self.groups.len()
    }

    /// Representative of each group (the mean of its members), strictly increasing.
    pub fn group_values(&self) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&i| self.eigenvalues[i]).sum::<f64>() / g.len() as f64)
            .collect()
    }

    /// Smallest gap between consecutive eigenvalues that are not merged.
    pub fn min_group_gap(&self) -> Option<f64> {
        self.groups
            .windows(2)
            .map(|w| self.eigenvalues[w[1][0]] - self.eigenvalues[*w[0].last().unwrap()])
            .min_by(f64::total_cmp)
    }

    /// `r(α,β;λ) = Σ_l p_l(α) p_l(β) / (λ_l − λ)`.
    pub fn resolvent_entry(&self, alpha: usize, beta: usize, lambda: Complex64) -> Result<Complex64> {
        self.check_pole(lambda)?;
        Ok(self.resolvent_entry_unchecked(alpha, beta, lambda))
    }

    fn check_pole(&self, lambda: Complex64) -> Result<()> {
        for &ev in &self.eigenvalues {
            let d = (lambda - ev).norm();
            if d <= POLE_DISTANCE {
                return Err(Error::AtPole {
                    lambda,
                    eigenvalue: ev,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    fn resolvent_entry_unchecked(&self, alpha: usize, beta: usize, lambda: Complex64) -> Complex64 {
        let p = &self.eigenvectors;
        (0..self.n())
            .map(|l| Complex64::from(p[(alpha, l)] * p[(beta, l)]) / (self.eigenvalues[l] - lambda))
            .sum()
    }

    /// Resolvent entries for the given rows and columns.
    pub fn resolvent_block(&self, rows: &[usize], cols: &[usize], lambda: Complex64) -> Result<DMatrix<Complex64>> {
        self.check_pole(lambda)?;
        Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.resolvent_entry_unchecked(rows[i], cols[j], lambda)
        }))
    }

    /// `P_m = Σ_{l ∈ group m} p_l p_lᵀ`.
    pub fn spectral_projector(&self, group: usize) -> Result<DMatrix<f64>> {
        let members = self.groups.get(group).ok_or(Error::GroupOutOfRange {
            index: group,
            groups: self.groups.len(),
        })?;
        let n = self.n();
        let mut p = DMatrix::zeros(n, n);
        for &l in members {
            let v = self.eigenvectors.column(l);
            p += v * v.transpose();
        }
        Ok(p)
    }

    /// Same eigenvalues and groups, but each multi-member group's eigenvectors
    /// are replaced by a random orthonormal basis of the same eigenspace.
    pub fn with_rotated_groups(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors = self.eigenvectors.clone();
        for g in &self.groups {
            if g.len() < 2 {
                continue;
            }
            let k = g.len();
            let gauss = DMatrix::from_fn(k, k, |_, _| StandardNormal.sample(&mut rng));
            let q = gauss.qr().q();
            let block = DMatrix::from_fn(self.n(), k, |r, c| self.eigenvectors[(r, g[c])]);
            let rotated = block * q;
            for (c, &l) in g.iter().enumerate() {
                vectors.set_column(l, &rotated.column(c));
            }
        }
        Self {
            eigenvectors: vectors,
            ..self.clone()
        }
    }
}

/// Numerical kernel of a real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub dimension: usize,
    /// Orthonormal basis as columns (`q × dimension`).
    pub basis: DMatrix<f64>,
    pub rank: usize,
    /// Singular values, descending, padded with zeros to length `q`.
    pub singular_values: Vec<f64>,
    pub tol: f64,
}

/// Kernel by SVD: singular values `≤ tol·σ_max` count as zero (all of them when `σ_max = 0`).
pub fn kernel(m: &DMatrix<f64>, tol: f64) -> Result<Kernel> {
    check_tol("kernel", tol)?;
    let (p, q) = m.shape();
    if q == 0 {
        return Ok(Kernel {
            dimension: 0,
            basis: DMatrix::zeros(0, 0),
            rank: 0,
            singular_values: Vec::new(),
            tol,
        });
    }
    // pad to at least q rows so that V is complete
    let rows = p.max(q);
    let mut padded = DMatrix::zeros(rows, q);
    padded.view_mut((0, 0), (p, q)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = tol * smax;
    let null: Vec<usize> = (0..q).filter(|&i| smax == 0.0 || sigma[i] <= cutoff).collect();
    let basis = DMatrix::from_fn(q, null.len(), |r, c| v_t[(null[c], r)]);
    let mut sorted = sigma;
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(Kernel {
        dimension: null.len(),
        basis,
        rank: q - null.len(),
        singular_values: sorted,
        tol,
    })
}

/// `q − dim ker`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    Ok(kernel(m, tol)?.rank)
}

/// 2-norm condition number of a complex square matrix (∞ when singular).
pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let min = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralResiduals {
    pub max_eigen_residual: f64,
    pub orthonormality_defect: f64,
}

/// `max_l ‖L p_l − λ_l p_l‖₂` and `‖PᵀP − I‖_max`.
pub fn residuals(l: &DMatrix<f64>, spec: &SpectralData) -> SpectralResiduals {
    let p = spec.eigenvectors();
    let mut max_res = 0.0f64;
    for (i, &ev) in spec.eigenvalues().iter().enumerate() {
        let v = p.column(i);
        max_res = max_res.max((l * v - v * ev).norm());
    }
    let gram = p.transpose() * p - DMatrix::identity(spec.n(), spec.n());
    SpectralResiduals {
        max_eigen_residual: max_res,
        orthonormality_defect: gram.amax(),
    }
}
