//! Unitary evolution `u(t) = exp(itL) u(0)` and the decay diagnostics built on it.
//!
//! Evolution uses the full eigendecomposition of `L`, so the propagator is
//! unitary up to roundoff. Web graphs are evolved on a finite truncation; the
//! initial data must stay `guard` sites away from the cut, and the amplitude
//! that reaches the last `guard/2` sites is reported as leakage.

use std::f64::consts::E;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, TruncationMap, WebGraph};
use crate::spectral;

pub const DEFAULT_DEPTH: usize = 128;
pub const DEFAULT_GUARD: usize = 64;
/// Slack on `ln C` when comparing margins.
pub const MARGIN_SLACK: f64 = 1e-9;
/// Values below this fraction of `max|u|` count as zero in evolved profiles.
pub const RELATIVE_FLOOR: f64 = 1e-12;
/// Amplitude below which data count as trivial.
pub const TRIVIAL_AMPLITUDE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionState {
    pub t: f64,
    pub u: DVector<Complex64>,
    /// Identifier of the initial data.
    pub source: String,
    /// Truncation depth, for states on a truncated web.
    pub depth: Option<usize>,
}

impl EvolutionState {
    pub fn norm(&self) -> f64 {
        self.u.norm()
    }
}

/// Precomputed eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(l: &DMatrix<f64>) -> Result<Self> {
        let spec = spectral::symmetric_eig(l, 1e-8)?;
        Ok(Self {
            eigenvalues: spec.eigenvalues().to_vec(),
            vectors: spec.eigenvectors().map(Complex64::from),
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ_l exp(itλ_l) ⟨p_l, u0⟩ p_l`.
    pub fn apply(&self, u0: &DVector<Complex64>, t: f64) -> Result<DVector<Complex64>> {
        if u0.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: u0.len(),
            });
        }
        if t == 0.0 {
            return Ok(u0.clone());
        }
        let mut c = self.vectors.adjoint() * u0;
        for (ci, &lam) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= Complex64::from_polar(1.0, t * lam);
        }
        Ok(&self.vectors * c)
    }
}

pub fn evolve(g: &FiniteGraph, u0: &DVector<Complex64>, t: f64) -> Result<EvolutionState> {
    let u = Propagator::new(g.matrix())?.apply(u0, t)?;
    Ok(EvolutionState {
        t,
        u,
        source: "u0".into(),
        depth: None,
    })
}

/// Evolution on a truncated web graph.
#[derive(Debug, Clone)]
pub struct WebPropagator {
    map: TruncationMap,
    guard: usize,
    propagator: Propagator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebEvolution {
    pub state: EvolutionState,
    /// `max |u(t, ν(k))|` over channels and `k > N − guard/2`.
    pub leakage: f64,
}

impl WebPropagator {
    pub fn new(web: &WebGraph, depth: usize, guard: usize) -> Result<Self> {
        let (g, map) = web.truncate(depth)?;
        if guard >= depth {
            return Err(Error::DepthTooShallow {
                depth,
                required: guard + 1,
            });
        }
        Ok(Self {
            map,
            guard,
            propagator: Propagator::new(g.matrix())?,
        })
    }

    pub fn map(&self) -> &TruncationMap {
        &self.map
    }

    pub fn depth(&self) -> usize {
        self.map.depth
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    /// Deepest channel index allowed in initial data.
    pub fn support_limit(&self) -> usize {
        self.map.depth - self.guard
    }

    pub fn check_support(&self, u0: &DVector<Complex64>) -> Result<()> {
        if u0.len() != self.map.len() {
            return Err(Error::DimensionMismatch {
                expected: self.map.len(),
                got: u0.len(),
            });
        }
        let limit = self.support_limit();
        for channel in 0..self.map.channels {
            for k in limit + 1..=self.map.depth {
                if u0[self.map.channel_index(channel, k)] != Complex64::from(0.0) {
                    return Err(Error::SupportTooDeep { channel, index: k, limit });
                }
            }
        }
        Ok(())
    }

    pub fn evolve(&self, u0: &DVector<Complex64>, t: f64) -> Result<WebEvolution> {
        self.check_support(u0)?;
        let u = self.propagator.apply(u0, t)?;
        let from = self.map.depth - self.guard / 2 + 1;
        let leakage = (0..self.map.channels)
            .flat_map(|c| (from..=self.map.depth).map(move |k| (c, k)))
            .map(|(c, k)| u[self.map.channel_index(c, k)].norm())
            .fold(0.0, f64::max);
        Ok(WebEvolution {
            state: EvolutionState {
                t,
                u,
                source: "u0".into(),
                depth: Some(self.map.depth),
            },
            leakage,
        })
    }

    /// Values `u(ν_c(k))` for `k = 1..=upto`.
    pub fn channel_profile(&self, u: &DVector<Complex64>, channel: usize, upto: usize) -> Vec<Complex64> {
        (1..=upto.min(self.map.depth))
            .map(|k| u[self.map.channel_index(channel, k)])
            .collect()
    }
}

pub fn evolve_web(web: &WebGraph, u0: &DVector<Complex64>, t: f64, depth: usize, guard: usize) -> Result<WebEvolution> {
    WebPropagator::new(web, depth, guard)?.evolve(u0, t)
}

/// `k·log(e/((2+ε)k))`, the log of the decay envelope at `k ≥ 1`.
pub fn log_envelope(k: usize, eps: f64) -> f64 {
    let k = k as f64;
    k * (E / ((2.0 + eps) * k)).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub holds: bool,
    pub eps: f64,
    pub c: f64,
    /// `margins[k−1] = log|u(k)| − k·log(e/((2+ε)k))`; `−∞` for zero values.
    pub margins: Vec<f64>,
    /// Largest margin and the first `k` attaining it.
    pub max_margin: f64,
    pub argmax: Option<usize>,
}

impl DecayCheck {
    /// First `k` where the bound fails.
    pub fn first_failure(&self) -> Option<usize> {
        let limit = self.c.ln() + MARGIN_SLACK;
        self.margins.iter().position(|&m| m > limit).map(|i| i + 1)
    }
}

/// Checks `|u(k)| ≤ C·(e/((2+ε)k))^k` for the sequence `u(1), u(2), …`.
pub fn decay_bound_check(u: &[Complex64], eps: f64, c: f64) -> Result<DecayCheck> {
    decay_bound_check_with_floor(u, eps, c, 0.0)
}

/// As [`decay_bound_check`], treating values with `|u(k)| ≤ floor` as zero.
pub fn decay_bound_check_with_floor(u: &[Complex64], eps: f64, c: f64, floor: f64) -> Result<DecayCheck> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::ToleranceOutOfRange { name: "epsilon", value: eps });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::ToleranceOutOfRange { name: "C", value: c });
    }
    let margins: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let a = z.norm();
            if a <= floor || a == 0.0 {
                f64::NEG_INFINITY
            } else {
                a.ln() - log_envelope(i + 1, eps)
            }
        })
        .collect();
    let (argmax, max_margin) = margins
        .iter()
        .enumerate()
        .fold((None, f64::NEG_INFINITY), |(bk, bm), (i, &m)| {
            if m > bm { (Some(i + 1), m) } else { (bk, bm) }
        });
    Ok(DecayCheck {
        holds: max_margin <= c.ln() + MARGIN_SLACK,
        eps,
        c,
        margins,
        max_margin,
        argmax,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeEstimate {
    pub sigma: f64,
    /// Inclusive range of `k` searched.
    pub window: (usize, usize),
    pub all_zero: bool,
}

/// Minimum `K` (index of the last coefficient).
pub const MIN_TYPE_ORDER: usize = 16;

/// Type estimate `max_{K/2 ≤ k ≤ K} k·|c_k|^{1/k}/e` from `log|c_k|`, `k = 0..=K`.
///
/// Working with logarithms lets coefficients such as `1/200!` be passed
/// without underflow; `−∞` marks a zero coefficient.
pub fn exponential_type_estimate(log_abs: &[f64]) -> Result<TypeEstimate> {
    let got = log_abs.len();
    if got < MIN_TYPE_ORDER + 1 {
        return Err(Error::TooFewCoefficients {
            required: MIN_TYPE_ORDER + 1,
            got,
        });
    }
    let big_k = got - 1;
    let window = ((big_k / 2).max(1), big_k);
    let all_zero = log_abs.iter().all(|&l| l == f64::NEG_INFINITY);
    let sigma = (window.0..=window.1)
        .map(|k| {
            let l = log_abs[k];
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                k as f64 * (l / k as f64).exp() / E
            }
        })
        .fold(0.0, f64::max);
    Ok(TypeEstimate { sigma, window, all_zero })
}

/// `log|z|` for each entry, `−∞` for entries at or below `floor`.
pub fn log_magnitudes(values: &[Complex64], floor: f64) -> Vec<f64> {
    values
        .iter()
        .map(|z| {
            let a = z.norm();
            if a <= floor || a == 0.0 { f64::NEG_INFINITY } else { a.ln() }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// The decay bound fails at `t = 1`, or the channel data are trivial.
    Consistent,
    /// Nontrivial channel data satisfying the bound at both times.
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub eps: f64,
    pub c: f64,
    pub depth: usize,
    pub guard: usize,
    /// Times at which the maximal margin is recorded; diagnostics only.
    pub t_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            eps: 1.0,
            c: 1.0,
            depth: DEFAULT_DEPTH,
            guard: DEFAULT_GUARD,
            t_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub channel: usize,
    pub config: ExperimentConfig,
    /// Check at `t = 0` on `k = 1..=N−guard`.
    pub initial: DecayCheck,
    /// Check at `t = 1` on `k = 1..=N−guard`, with the relative floor applied.
    pub terminal: DecayCheck,
    pub type_initial: TypeEstimate,
    pub type_terminal: TypeEstimate,
    /// `(t, max margin)` over the grid.
    pub grid: Vec<(f64, f64)>,
    pub leakage: f64,
    pub nontrivial: bool,
    pub verdict: Verdict,
}

/// Evolves decaying initial data on channel `channel` to `t = 1` and checks
/// whether the decay bound survives.
pub fn uncertainty_experiment(
    web: &WebGraph,
    channel: usize,
    u0: &DVector<Complex64>,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if channel >= web.channel_count() {
        return Err(Error::InvalidChannel {
            channel,
            reason: format!("web has {} channels", web.channel_count()),
        });
    }
    let prop = WebPropagator::new(web, config.depth, config.guard)?;
    prop.check_support(u0)?;
    let window = prop.support_limit();

    let profile0 = prop.channel_profile(u0, channel, window);
    let initial = decay_bound_check(&profile0, config.eps, config.c)?;
    if let Some(k) = initial.first_failure() {
        return Err(Error::PreconditionViolated { channel, k });
    }

    let attach = web.channels()[channel].attach;
    let with_root = |u: &DVector<Complex64>, profile: &[Complex64]| {
        let mut v = vec![u[attach]];
        v.extend_from_slice(profile);
        v
    };

    let mut grid = Vec::with_capacity(config.t_grid.len());
    for &t in &config.t_grid {
        let u = prop.evolve(u0, t)?.state.u;
        let floor = RELATIVE_FLOOR * u.camax();
        let check = decay_bound_check_with_floor(&prop.channel_profile(&u, channel, window), config.eps, config.c, floor)?;
        grid.push((t, check.max_margin));
    }

    let end = prop.evolve(u0, 1.0)?;
    let u1 = &end.state.u;
    let floor = RELATIVE_FLOOR * u1.camax();
    let profile1 = prop.channel_profile(u1, channel, window);
    let terminal = decay_bound_check_with_floor(&profile1, config.eps, config.c, floor)?;

    let type_initial = exponential_type_estimate(&log_magnitudes(&with_root(u0, &profile0), 0.0))?;
    let type_terminal = exponential_type_estimate(&log_magnitudes(&with_root(u1, &profile1), floor))?;

    let amplitude = profile0
        .iter()
        .chain(&profile1)
        .fold(0.0f64, |m, z| m.max(z.norm()));
    let nontrivial = amplitude > TRIVIAL_AMPLITUDE;
    let verdict = if nontrivial && terminal.holds {
        Verdict::Violation
    } else {
        Verdict::Consistent
    };
    Ok(ExperimentReport {
        channel,
        config: config.clone(),
        initial,
        terminal,
        type_initial,
        type_terminal,
        grid,
        leakage: end.leakage,
        nontrivial,
        verdict,
    })
}

/// Initial data `(e/((2+ε)k))^k` on `ν_channel(k)` for `1 ≤ k ≤ N − guard`,
/// zero elsewhere.
pub fn envelope_data(web: &WebGraph, channel: usize, eps: f64, depth: usize, guard: usize) -> Result<DVector<Complex64>> {
    let (_, map) = web.truncate(depth)?;
    let mut u0 = DVector::zeros(map.len());
    for k in 1..=depth.saturating_sub(guard) {
        u0[map.channel_index(channel, k)] = Complex64::from(log_envelope(k, eps).exp());
    }
    Ok(u0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::from(re)
    }

    #[test]
    fn scalar_phase() {
        let g = FiniteGraph::from_rows(&[vec![1.7]]).unwrap();
        let u0 = DVector::from_element(1, Complex64::new(0.3, -0.4));
        let s = evolve(&g, &u0, 2.3).unwrap();
        let expected = Complex64::from_polar(1.0, 1.7 * 2.3) * u0[0];
        assert!((s.u[0] - expected).norm() < 1e-14);
    }

    #[test]
    fn zero_time_is_identity() {
        let g = fixtures::path(&[1.0, 2.0, 3.0]);
        let u0 = DVector::from_vec(vec![c(1.0), Complex64::new(0.0, 2.0), c(-0.5)]);
        assert_eq!(evolve(&g, &u0, 0.0).unwrap().u, u0);
    }

    #[test]
    fn single_mode_phase() {
        let g = FiniteGraph::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let u0 = DVector::from_vec(vec![c(r), c(r)]);
        let s = evolve(&g, &u0, std::f64::consts::PI).unwrap();
        for i in 0..2 {
            assert!((s.u[i] + u0[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let g = fixtures::path(&[1.0, 2.0]);
        assert!(matches!(
            evolve(&g, &DVector::zeros(3), 1.0),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn free_channel_delta_stays_inside() {
        let web = fixtures::scalar_free_web(2.0);
        let short = WebPropagator::new(&web, 64, 32).unwrap();
        let long = WebPropagator::new(&web, 128, 32).unwrap();
        let delta = |p: &WebPropagator| {
            let mut u = DVector::zeros(p.map().len());
            u[p.map().channel_index(0, 1)] = c(1.0);
            u
        };
        let a = short.evolve(&delta(&short), 1.0).unwrap();
        let b = long.evolve(&delta(&long), 1.0).unwrap();
        assert!(a.leakage <= 1e-8, "{}", a.leakage);
        let pa = short.channel_profile(&a.state.u, 0, 32);
        let pb = long.channel_profile(&b.state.u, 0, 32);
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).norm() < 1e-10);
        }
        assert!((a.state.u[0] - b.state.u[0]).norm() < 1e-10);
    }

    #[test]
    fn deep_support_rejected() {
        let web = fixtures::scalar_free_web(2.0);
        let p = WebPropagator::new(&web, 64, 32).unwrap();
        let mut u = DVector::zeros(p.map().len());
        u[p.map().channel_index(0, 64)] = c(1.0);
        assert!(matches!(
            p.evolve(&u, 1.0),
            Err(Error::SupportTooDeep { channel: 0, index: 64, limit: 32 })
        ));
        u[p.map().channel_index(0, 64)] = c(0.0);
        u[p.map().channel_index(0, 32)] = c(1.0);
        assert_eq!(p.evolve(&u, 0.0).unwrap().state.u, u);
    }

    #[test]
    fn decay_examples() {
        let zero = vec![c(0.0); 20];
        let d = decay_bound_check(&zero, 0.5, 1e-3).unwrap();
        assert!(d.holds);
        assert_eq!(d.argmax, None);

        let edge: Vec<_> = (1..=40).map(|k| c(log_envelope(k, 1.0).exp())).collect();
        let d = decay_bound_check(&edge, 1.0, 1.0).unwrap();
        assert!(d.holds);
        assert!(d.max_margin.abs() < 1e-12);

        let geometric: Vec<_> = (1..=20).map(|k| c(0.5f64.powi(k))).collect();
        let d = decay_bound_check(&geometric, 1.0, 1.0).unwrap();
        assert!(!d.holds);
        // log 2⁻¹⁰ = −6.93 against 10·log(e/30) = −24.0
        assert!(d.margins[9] > 17.0);
        assert!(decay_bound_check(&geometric, 0.0, 1.0).is_err());
    }

    #[test]
    fn type_estimates() {
        let log_fact: Vec<f64> = (0..=200)
            .scan(0.0, |acc, k: usize| {
                if k > 0 {
                    *acc += (k as f64).ln();
                }
                Some(-*acc)
            })
            .collect();
        let t = exponential_type_estimate(&log_fact).unwrap();
        assert!((t.sigma - 1.0).abs() < 0.05, "{}", t.sigma);
        assert_eq!(t.window, (100, 200));

        let env: Vec<f64> = (0..=200).map(|k| if k == 0 { 0.0 } else { log_envelope(k, 1.0) }).collect();
        let t = exponential_type_estimate(&env).unwrap();
        assert!((t.sigma - 1.0 / 3.0).abs() < 1e-12);

        let t = exponential_type_estimate(&[f64::NEG_INFINITY; 30]).unwrap();
        assert!(t.all_zero && t.sigma == 0.0);

        assert!(matches!(
            exponential_type_estimate(&[0.0; 10]),
            Err(Error::TooFewCoefficients { required: 17, got: 10 })
        ));
    }

    #[test]
    fn canonical_experiment_breaks_bound() {
        let web = fixtures::scalar_free_web(2.0);
        let cfg = ExperimentConfig::default();
        let u0 = envelope_data(&web, 0, 1.0, cfg.depth, cfg.guard).unwrap();
        let r = uncertainty_experiment(&web, 0, &u0, &cfg).unwrap();
        assert!(r.initial.holds);
        assert!(!r.terminal.holds);
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.terminal.margins[..40].iter().any(|&m| m > 0.0));
        assert!(r.leakage < 1e-8);
    }

    #[test]
    fn zero_data_is_trivial() {
        let web = fixtures::small_web();
        let cfg = ExperimentConfig::default();
        let (_, map) = web.truncate(cfg.depth).unwrap();
        let r = uncertainty_experiment(&web, 1, &DVector::zeros(map.len()), &cfg).unwrap();
        assert!(!r.nontrivial);
        assert!(r.initial.holds && r.terminal.holds);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn delta_data_rejected() {
        let web = fixtures::scalar_free_web(2.0);
        let cfg = ExperimentConfig::default();
        let (_, map) = web.truncate(cfg.depth).unwrap();
        let mut u0 = DVector::zeros(map.len());
        u0[map.channel_index(0, 1)] = c(1.0);
        assert!(matches!(
            uncertainty_experiment(&web, 0, &u0, &cfg),
            Err(Error::PreconditionViolated { channel: 0, k: 1 })
        ));
    }

    fn arb_state(n: usize) -> impl Strategy<Value = DVector<Complex64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
            .prop_map(|v| DVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| Complex64::new(a, b))))
    }

    fn arb_graph_and_state() -> impl Strategy<Value = (FiniteGraph, DVector<Complex64>)> {
        (2usize..8).prop_flat_map(|n| {
            (
                proptest::collection::vec(-3.0f64..3.0, n * n).prop_map(move |w| {
                    let m = DMatrix::from_vec(n, n, w);
                    FiniteGraph::new(&m + m.transpose()).unwrap()
                }),
                arb_state(n),
            )
        })
    }

    proptest! {
        #[test]
        fn unitary_group_reversible((g, u0) in arb_graph_and_state(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let p = Propagator::new(g.matrix()).unwrap();
            let us = p.apply(&u0, s).unwrap();
            prop_assert!((us.norm() - u0.norm()).abs() <= 1e-10 * (1.0 + u0.norm()));
            let composed = p.apply(&us, t).unwrap();
            let direct = p.apply(&u0, s + t).unwrap();
            prop_assert!((composed - direct).camax() <= 1e-10);
            let back = p.apply(&us, -s).unwrap();
            prop_assert!((back - &u0).camax() <= 1e-10);
        }
    }
}
