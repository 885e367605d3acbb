//! Scattering on the channels of a web graph.
//!
//! With `λ(θ) = 2 − θ − θ⁻¹`, each channel has the Jost solution `e(k,θ)`
//! of `−b(k−1)x(k−1) + a(k)x(k) − b(k)x(k+1) = λx(k)` equal to `θᵏ` past the
//! stabilization index; below it `e(k,·)` is a Laurent polynomial, obtained
//! here by exact backward recursion.
//!
//! The boundary condition at the attachment vertices reads
//! `T(θ)m = −T(θ⁻¹)n` with `T(θ) = E(0,θ) − R(θ)B(0)E(1,θ)`, where
//! `R(θ)` collects resolvent entries of the core between attachment vertices.
//! For `θ` off the singular set the scattering matrix is
//! `S(θ) = −T(θ)⁻¹T(θ⁻¹)`, and every generalized eigenfunction is
//! `U(k,θ)n = E(k,θ⁻¹)n + E(k,θ)S(θ)n` on the channels, extended to the
//! core through `R₁(θ)B(0)U(1,θ)n`.
//!
//! Scattering objects are evaluated numerically at given `θ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ChannelSpec, WebGraph};
use crate::laurent::{exact_rational, Coefficient, LaurentPoly};
use crate::spectral::{self, SpectralData};
use crate::Tolerances;

/// Condition numbers above this make `T(θ)` count as singular.
pub const MAX_T_CONDITION: f64 = 1e13;

/// `λ(θ) = 2 − θ − θ⁻¹`.
pub fn lambda_of_theta(theta: Complex64) -> Result<Complex64> {
    if theta == Complex64::from(0.0) {
        return Err(Error::ZeroTheta);
    }
    Ok(Complex64::from(2.0) - theta - theta.inv())
}

/// `λ(θ)` as a Laurent polynomial.
pub fn lambda_poly<T: Coefficient>() -> LaurentPoly<T> {
    let two = T::one() + T::one();
    LaurentPoly::from_terms([(0, two), (1, -T::one()), (-1, -T::one())])
}

/// Jost polynomials `e(0,·), …, e(K0+1,·)` from `a(1..=K0)` and `b(0..K0)`,
/// with `a(k) = 2` for `k > K0` and `b(k) = 1` for `k ≥ K0`.
pub fn jost_recurrence<T: Coefficient>(a: &[T], b: &[T]) -> Result<Vec<LaurentPoly<T>>> {
    let k0 = b.len();
    if a.len() != k0 {
        return Err(Error::InvalidChannel {
            channel: 0,
            reason: format!("expected {k0} values of a, got {}", a.len()),
        });
    }
    if let Some(i) = b.iter().position(|x| x.is_zero()) {
        return Err(Error::ZeroCoefficient { channel: 0, index: i });
    }
    let two = T::one() + T::one();
    let b_at = |k: usize| b.get(k).cloned().unwrap_or_else(T::one);
    let theta_sum = LaurentPoly::from_terms([(1, T::one()), (-1, T::one())]);

    let mut polys = vec![LaurentPoly::zero(); k0 + 2];
    polys[k0 + 1] = LaurentPoly::power(k0 as i32 + 1);
    polys[k0] = LaurentPoly::power(k0 as i32);
    for k in (1..=k0).rev() {
        // (a(k) − λ(θ)) = (a(k) − 2) + θ + θ⁻¹
        let shift = &LaurentPoly::constant(a[k - 1].clone() - two.clone()) + &theta_sum;
        let numer = &(&shift * &polys[k]) - &polys[k + 1].scale(&b_at(k));
        polys[k - 1] = numer.div_scalar(&b_at(k - 1));
    }
    Ok(polys)
}

/// Jost solution of one channel with exact rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct JostSolution {
    pub channel: usize,
    pub k0: usize,
    /// `e(k,·)` for `k = 0..=K0+1`.
    pub polys: Vec<LaurentPoly<BigRational>>,
    a: Vec<BigRational>,
    b: Vec<BigRational>,
    numeric: Vec<LaurentPoly<Complex64>>,
}

impl JostSolution {
    pub fn poly(&self, k: usize) -> LaurentPoly<BigRational> {
        match self.polys.get(k) {
            Some(p) => p.clone(),
            None => LaurentPoly::power(k as i32),
        }
    }

    /// `e(k,θ)`; `θᵏ` for `k > K0`.
    pub fn eval(&self, k: usize, theta: Complex64) -> Complex64 {
        match self.numeric.get(k) {
            Some(p) => p.eval(theta),
            None => theta.powi(k as i32),
        }
    }

    /// `−b(k−1)e(k−1) + (a(k) − λ)e(k) − b(k)e(k+1)` as an exact Laurent
    /// polynomial; identically zero for every `k ≥ 1`.
    pub fn recurrence_residual(&self, k: usize) -> LaurentPoly<BigRational> {
        assert!(k >= 1);
        let one = || BigRational::from_integer(1.into());
        let b = |i: usize| self.b.get(i).cloned().unwrap_or_else(one);
        let a = self
            .a
            .get(k - 1)
            .cloned()
            .unwrap_or_else(|| BigRational::from_integer(2.into()));
        let diag = &LaurentPoly::constant(a) - &lambda_poly();
        let lhs = &(&diag * &self.poly(k)) - &self.poly(k - 1).scale(&b(k - 1));
        &lhs - &self.poly(k + 1).scale(&b(k))
    }
}

/// Exact Jost solution of a channel; `f64` channel data are converted to
/// their exact binary rational values.
pub fn jost_solution(channel: usize, ch: &ChannelSpec) -> Result<JostSolution> {
    ch.validate(channel)?;
    let a: Vec<BigRational> = ch.a.iter().map(|&x| exact_rational(x)).collect();
    let b: Vec<BigRational> = ch.b.iter().map(|&x| exact_rational(x)).collect();
    let polys = jost_recurrence(&a, &b).map_err(|e| match e {
        Error::ZeroCoefficient { index, .. } => Error::ZeroCoefficient { channel, index },
        other => other,
    })?;
    Ok(jost_from_exact(channel, a, b, polys))
}

/// Exact Jost solution for rational channel data given directly.
pub fn jost_solution_rational(a: Vec<BigRational>, b: Vec<BigRational>) -> Result<JostSolution> {
    let polys = jost_recurrence(&a, &b)?;
    Ok(jost_from_exact(0, a, b, polys))
}

fn jost_from_exact(
    channel: usize,
    a: Vec<BigRational>,
    b: Vec<BigRational>,
    polys: Vec<LaurentPoly<BigRational>>,
) -> JostSolution {
    let numeric = polys.iter().map(LaurentPoly::to_complex_poly).collect();
    JostSolution {
        channel,
        k0: b.len(),
        polys,
        a,
        b,
        numeric,
    }
}

/// Singular parameters in the closed unit disk: `{−1, 0, 1}` and every
/// root of `θ² + (λ_l − 2)θ + 1` with `|θ| ≤ 1 + tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    pub thetas: Vec<Complex64>,
}

impl SingularSet {
    pub fn from_eigenvalues(eigenvalues: &[f64], tol: f64) -> Self {
        let mut thetas = vec![Complex64::from(-1.0), Complex64::from(0.0), Complex64::from(1.0)];
        for &lam in eigenvalues {
            let p = Complex64::from(lam - 2.0);
            let disc = (p * p - 4.0).sqrt();
            for root in [(-p + disc) * 0.5, (-p - disc) * 0.5] {
                if root.norm() <= 1.0 + tol && thetas.iter().all(|t| (t - root).norm() > tol) {
                    thetas.push(root);
                }
            }
        }
        Self { thetas }
    }

    /// Closest singular point to `θ`, also considering reciprocals of the
    /// nonzero points (since `λ(θ) = λ(θ⁻¹)`).
    pub fn nearest(&self, theta: Complex64) -> (Complex64, f64) {
        let zero = Complex64::from(0.0);
        self.thetas
            .iter()
            .flat_map(|&p| {
                let inv = if p == zero { None } else { Some(p.inv()) };
                std::iter::once(p).chain(inv)
            })
            .map(|p| (p, (theta - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("set is never empty")
    }
}

pub fn singular_set(web: &WebGraph, tol: f64) -> Result<SingularSet> {
    let spec = spectral::symmetric_eig(web.core().matrix(), 1e-8)?;
    Ok(SingularSet::from_eigenvalues(spec.eigenvalues(), tol))
}

/// Scattering quantities evaluated at one `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringAtTheta {
    pub theta: Complex64,
    pub lambda: Complex64,
    /// Diagonals of `E(0,θ)`, `E(1,θ)` and `B(0)`.
    pub e0: DVector<Complex64>,
    pub e1: DVector<Complex64>,
    pub b0: DVector<f64>,
    pub r: DMatrix<Complex64>,
    pub t: DMatrix<Complex64>,
    pub t_inv: DMatrix<Complex64>,
    /// `T(θ⁻¹)`.
    pub t_reflected: DMatrix<Complex64>,
    pub s: DMatrix<Complex64>,
    pub t_condition: f64,
    /// `max |S S* − I|`; reported, never asserted.
    pub unitarity_defect: f64,
}

/// Precomputed data for repeated scattering evaluations on one web.
#[derive(Debug, Clone)]
pub struct Scatterer {
    web: WebGraph,
    core: SpectralData,
    jost: Vec<JostSolution>,
    singular: SingularSet,
    guard: f64,
}

impl Scatterer {
    pub fn new(web: &WebGraph, tol: &Tolerances) -> Result<Self> {
        let core = spectral::symmetric_eig(web.core().matrix(), tol.group)?;
        let jost = web
            .channels()
            .iter()
            .enumerate()
            .map(|(c, ch)| jost_solution(c, ch))
            .collect::<Result<_>>()?;
        let singular = SingularSet::from_eigenvalues(core.eigenvalues(), tol.singular_guard);
        Ok(Self {
            web: web.clone(),
            core,
            jost,
            singular,
            guard: tol.singular_guard,
        })
    }

    pub fn web(&self) -> &WebGraph {
        &self.web
    }

    pub fn singular_set(&self) -> &SingularSet {
        &self.singular
    }

    pub fn jost(&self) -> &[JostSolution] {
        &self.jost
    }

    pub fn core_spectrum(&self) -> &SpectralData {
        &self.core
    }

    fn check_theta(&self, theta: Complex64) -> Result<()> {
        if theta == Complex64::from(0.0) {
            return Err(Error::ZeroTheta);
        }
        let (point, distance) = self.singular.nearest(theta);
        if distance < self.guard {
            return Err(Error::OnSingularSet { theta, point, distance });
        }
        Ok(())
    }

    fn attachments(&self) -> Vec<usize> {
        self.web.channels().iter().map(|c| c.attach).collect()
    }

    fn e_diag(&self, k: usize, theta: Complex64) -> DVector<Complex64> {
        DVector::from_iterator(self.jost.len(), self.jost.iter().map(|j| j.eval(k, theta)))
    }

    fn b0(&self) -> DVector<f64> {
        DVector::from_iterator(self.jost.len(), self.web.channels().iter().map(|c| c.b_at(0)))
    }

    /// `R(θ)` between attachment vertices.
    pub fn r_matrix(&self, theta: Complex64) -> Result<DMatrix<Complex64>> {
        self.check_theta(theta)?;
        let att = self.attachments();
        self.core.resolvent_block(&att, &att, lambda_of_theta(theta)?)
    }

    /// `R₁(θ)`: resolvent entries from every core vertex to each attachment vertex.
    pub fn r1_matrix(&self, theta: Complex64) -> Result<DMatrix<Complex64>> {
        self.check_theta(theta)?;
        let rows: Vec<usize> = (0..self.core.n()).collect();
        self.core.resolvent_block(&rows, &self.attachments(), lambda_of_theta(theta)?)
    }

    fn t_matrix_with(&self, theta: Complex64, r: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let e0 = self.e_diag(0, theta);
        let e1 = self.e_diag(1, theta);
        let b0 = self.b0();
        let n = self.jost.len();
        DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { e0[i] } else { Complex64::from(0.0) };
            diag - r[(i, j)] * b0[j] * e1[j]
        })
    }

    /// `T(θ) = E(0,θ) − R(θ)B(0)E(1,θ)`.
    pub fn t_matrix(&self, theta: Complex64) -> Result<DMatrix<Complex64>> {
        let r = self.r_matrix(theta)?;
        Ok(self.t_matrix_with(theta, &r))
    }

    pub fn scattering_at(&self, theta: Complex64) -> Result<ScatteringAtTheta> {
        let r = self.r_matrix(theta)?;
        let t = self.t_matrix_with(theta, &r);
        // λ(θ⁻¹) = λ(θ), so R is shared
        let t_reflected = self.t_matrix_with(theta.inv(), &r);
        let t_condition = spectral::condition_number(&t);
        if !(t_condition < MAX_T_CONDITION) {
            return Err(Error::TNotInvertible { theta });
        }
        let t_inv = t.clone().try_inverse().ok_or(Error::TNotInvertible { theta })?;
        let s = -(&t_inv * &t_reflected);
        let n = s.nrows();
        let unitarity_defect = (&s * s.adjoint() - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        Ok(ScatteringAtTheta {
            theta,
            lambda: lambda_of_theta(theta)?,
            e0: self.e_diag(0, theta),
            e1: self.e_diag(1, theta),
            b0: self.b0(),
            r,
            t,
            t_inv,
            t_reflected,
            s,
            t_condition,
            unitarity_defect,
        })
    }

    /// Generalized eigenfunction for amplitudes `n` with channel values up to `depth`.
    pub fn eigenfunction(&self, theta: Complex64, n: &DVector<Complex64>, depth: usize) -> Result<Eigenfunction> {
        let channels = self.jost.len();
        if n.len() != channels {
            return Err(Error::DimensionMismatch {
                expected: channels,
                got: n.len(),
            });
        }
        let required = self.web.k0() + 1;
        if depth < required {
            return Err(Error::DepthTooShallow { depth, required });
        }
        let sc = self.scattering_at(theta)?;
        let m = &sc.s * n;
        let inv = theta.inv();
        let channel_values: Vec<Vec<Complex64>> = (0..channels)
            .map(|c| {
                (0..=depth)
                    .map(|k| self.jost[c].eval(k, inv) * n[c] + self.jost[c].eval(k, theta) * m[c])
                    .collect()
            })
            .collect();
        let u1 = DVector::from_iterator(
            channels,
            (0..channels).map(|c| channel_values[c][1] * self.web.channels()[c].b_at(0)),
        );
        let core = self.r1_matrix(theta)? * u1;
        Ok(Eigenfunction {
            theta,
            lambda: sc.lambda,
            core,
            channels: channel_values,
        })
    }
}

/// Values of a generalized eigenfunction on the core and on channel sites `0..=depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenfunction {
    pub theta: Complex64,
    pub lambda: Complex64,
    pub core: DVector<Complex64>,
    /// `channels[c][k]` is the value at `ν_c(k)`; index 0 duplicates the attachment vertex.
    pub channels: Vec<Vec<Complex64>>,
}

impl Eigenfunction {
    pub fn depth(&self) -> usize {
        self.channels.first().map_or(0, |c| c.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionResidual {
    /// Max over core vertices and channel sites `1 ≤ k < depth` of
    /// `|λx(α) − Σ_β L(α,β)x(β)|`, relative to `(‖L‖∞ + |λ|)·max|x|`.
    pub spectral: f64,
    /// Max mismatch between the channel value at `k = 0` and the core value at
    /// the attachment vertex, relative to `max|x|`.
    pub boundary: f64,
}

impl EigenfunctionResidual {
    pub fn max(&self) -> f64 {
        self.spectral.max(self.boundary)
    }
}

/// Residual of the spectral equation, computed by direct substitution into
/// the truncated matrix of the web.
pub fn eigenfunction_residual(web: &WebGraph, phi: &Eigenfunction) -> Result<EigenfunctionResidual> {
    let depth = phi.depth();
    let (g, map) = web.truncate(depth)?;
    let mut x = DVector::zeros(map.len());
    for (i, v) in phi.core.iter().enumerate() {
        x[i] = *v;
    }
    for (c, values) in phi.channels.iter().enumerate() {
        for k in 1..=depth {
            x[map.channel_index(c, k)] = values[k];
        }
    }
    let l = g.matrix().map(Complex64::from);
    let lx = &l * &x;
    let scale_x = x.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    let norm_inf = (0..g.n())
        .map(|i| g.matrix().row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let denom = (norm_inf + phi.lambda.norm()) * scale_x;
    let mut spectral = 0.0f64;
    for i in 0..map.len() {
        if let crate::graph::WebVertex::Channel { k, .. } = map.vertex(i) {
            if k == depth {
                continue;
            }
        }
        spectral = spectral.max((lx[i] - phi.lambda * x[i]).norm() / denom);
    }
    let boundary = web
        .channels()
        .iter()
        .enumerate()
        .map(|(c, ch)| (phi.channels[c][0] - phi.core[ch.attach]).norm() / scale_x)
        .fold(0.0, f64::max);
    Ok(EigenfunctionResidual { spectral, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::laurent::rational;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lambda_values() {
        assert!((lambda_of_theta(c(1.0, 0.0)).unwrap()).norm() < 1e-15);
        assert!((lambda_of_theta(c(-1.0, 0.0)).unwrap() - 4.0).norm() < 1e-15);
        assert!((lambda_of_theta(c(0.0, 1.0)).unwrap() - 2.0).norm() < 1e-15);
        assert_eq!(lambda_of_theta(c(0.0, 0.0)), Err(Error::ZeroTheta));
    }

    #[test]
    fn free_channel_is_pure_power() {
        let j = jost_solution(0, &ChannelSpec::free(0)).unwrap();
        assert_eq!(j.polys, vec![LaurentPoly::power(0), LaurentPoly::power(1)]);
        for k in 0..6 {
            assert_eq!(j.poly(k), LaurentPoly::power(k as i32));
        }
    }

    #[test]
    fn one_step_recursion_by_hand() {
        // a(1)=3, b(0)=b(1)=1: e(1)=θ, e(0)=1+θ
        let j = jost_solution(0, &ChannelSpec::new(0, vec![1.0], vec![3.0]).unwrap()).unwrap();
        assert_eq!(j.poly(1), LaurentPoly::power(1));
        assert_eq!(j.poly(0), LaurentPoly::from_terms([(0, rational(1, 1)), (1, rational(1, 1))]));

        // a(1)=2, b(0)=2: e(0) = ((θ+θ⁻¹)θ − θ²)/2 = 1/2
        let j = jost_solution(0, &ChannelSpec::new(0, vec![2.0], vec![2.0]).unwrap()).unwrap();
        assert_eq!(j.poly(0), LaurentPoly::constant(rational(1, 2)));
    }

    #[test]
    fn recurrence_is_exact_identity() {
        let ch = ChannelSpec::new(0, vec![0.3, -1.7, 2.5], vec![1.1, 0.0, 3.75]).unwrap();
        let j = jost_solution(0, &ch).unwrap();
        for k in 1..=j.k0 + 3 {
            assert!(j.recurrence_residual(k).is_zero(), "k = {k}");
        }
        for (k, p) in j.polys.iter().enumerate() {
            assert!(p.min_exponent().unwrap() >= k as i32);
            let top = (k as i32).max(2 * j.k0 as i32 - 1 - k as i32);
            assert!(p.max_exponent().unwrap() <= top);
        }
    }

    #[test]
    fn degree_grows_beyond_two_steps() {
        let j = jost_solution(0, &ChannelSpec::new(0, vec![1.0; 3], vec![2.0; 3]).unwrap()).unwrap();
        assert_eq!(j.poly(0), LaurentPoly::power(0));
        let ch = ChannelSpec::new(0, vec![1.0, 1.0, 1.0], vec![3.0, 3.0, 3.0]).unwrap();
        let j = jost_solution(0, &ch).unwrap();
        assert_eq!(j.poly(0).max_exponent(), Some(5));
        assert_eq!(j.poly(0).min_exponent(), Some(0));
    }

    #[test]
    fn singular_set_roots() {
        let s = SingularSet::from_eigenvalues(&[2.0], 1e-9);
        assert_eq!(s.thetas.len(), 5);
        assert!(s.thetas.iter().any(|t| (t - c(0.0, 1.0)).norm() < 1e-12));
        assert!(s.thetas.iter().any(|t| (t - c(0.0, -1.0)).norm() < 1e-12));

        assert_eq!(SingularSet::from_eigenvalues(&[0.0], 1e-9).thetas.len(), 3);

        let s = SingularSet::from_eigenvalues(&[5.0], 1e-9);
        assert_eq!(s.thetas.len(), 4);
        let inside = (-3.0 + 5f64.sqrt()) / 2.0;
        assert!((s.thetas[3] - inside).norm() < 1e-12);
    }

    #[test]
    fn scalar_core_free_channel_at_i() {
        let cval = 3.5;
        let sc = Scatterer::new(&fixtures::scalar_free_web(cval), &Tolerances::default()).unwrap();
        let at = sc.scattering_at(c(0.0, 1.0)).unwrap();
        let r = 1.0 / (cval - 2.0);
        assert!((at.r[(0, 0)] - r).norm() < 1e-14);
        let t = c(1.0, -r);
        assert!((at.t[(0, 0)] - t).norm() < 1e-14);
        let s = -c(1.0, r) / t;
        assert!((at.s[(0, 0)] - s).norm() < 1e-14);
    }

    #[test]
    fn singular_theta_rejected() {
        let sc = Scatterer::new(&fixtures::scalar_free_web(2.0), &Tolerances::default()).unwrap();
        assert!(matches!(sc.scattering_at(c(0.0, 1.0)), Err(Error::OnSingularSet { .. })));
        assert!(matches!(sc.scattering_at(c(1.0, 0.0)), Err(Error::OnSingularSet { .. })));
        assert!(matches!(sc.scattering_at(c(0.0, 0.0)), Err(Error::ZeroTheta)));
    }

    #[test]
    fn s_inverse_pair() {
        let sc = Scatterer::new(&fixtures::small_web(), &Tolerances::default()).unwrap();
        let th = Complex64::from_polar(0.9, 0.7);
        let a = sc.scattering_at(th).unwrap();
        let b = sc.scattering_at(th.inv()).unwrap();
        let prod = &a.s * &b.s - DMatrix::<Complex64>::identity(3, 3);
        assert!(prod.iter().all(|z| z.norm() < 1e-8));
    }

    #[test]
    fn free_eigenfunction_channel_values() {
        let sc = Scatterer::new(&fixtures::scalar_free_web(3.0), &Tolerances::default()).unwrap();
        let th = Complex64::from_polar(1.0, 1.1);
        let n = DVector::from_element(1, Complex64::from(1.0));
        let phi = sc.eigenfunction(th, &n, 8).unwrap();
        let s = sc.scattering_at(th).unwrap().s[(0, 0)];
        for k in 0..=8 {
            let expected = th.powi(-(k as i32)) + s * th.powi(k as i32);
            assert!((phi.channels[0][k] - expected).norm() < 1e-12);
        }
        let res = eigenfunction_residual(sc.web(), &phi).unwrap();
        assert!(res.max() < 1e-12, "{res:?}");
    }

    #[test]
    fn zero_amplitudes_give_zero() {
        let sc = Scatterer::new(&fixtures::small_web(), &Tolerances::default()).unwrap();
        let phi = sc
            .eigenfunction(Complex64::from_polar(1.0, 2.0), &DVector::zeros(3), 6)
            .unwrap();
        assert!(phi.core.iter().chain(phi.channels.iter().flatten()).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn eigenfunction_requires_depth() {
        let sc = Scatterer::new(&fixtures::small_web(), &Tolerances::default()).unwrap();
        assert!(matches!(
            sc.eigenfunction(Complex64::from_polar(1.0, 2.0), &DVector::zeros(3), 2),
            Err(Error::DepthTooShallow { .. })
        ));
    }

    #[test]
    fn conjugate_symmetry_on_circle() {
        let ch = ChannelSpec::new(0, vec![0.7, 1.9], vec![-0.4, 2.6]).unwrap();
        let j = jost_solution(0, &ch).unwrap();
        for arg in [0.3, 1.2, 2.9] {
            let th = Complex64::from_polar(1.0, arg);
            for k in 0..5 {
                assert!((j.eval(k, th.inv()) - j.eval(k, th).conj()).norm() < 1e-12);
            }
        }
    }
}
