//! Acceptance checks.
//!
//! Each check returns a [`CheckOutcome`]; [`run_all`] runs them in order.
//! Outcomes depend only on the seed and tolerances, except for the recorded
//! wall time and the runtime limits some checks carry.

use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::campaign::{self, GraphFamily, SweepSummary};
use crate::dimension::{self, forced_zero_set};
use crate::error::{Error, Result};
use crate::evolution::{self, ExperimentConfig, Propagator, Verdict};
use crate::extension;
use crate::fixtures;
use crate::graph::VertexSet;
use crate::laurent::LaurentPoly;
use crate::scattering::{self, Scatterer};
use crate::Tolerances;

/// Default campaign seed.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Wall time in seconds.
    pub seconds: f64,
    pub limit_seconds: Option<f64>,
}

impl CheckOutcome {
    /// One line without timing, stable under a fixed seed.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {:>2} {}: {}", self.id, self.name, self.detail)
    }

    pub fn timing(&self) -> String {
        match self.limit_seconds {
            Some(l) => format!("{:.3} s (limit {l} s)", self.seconds),
            None => format!("{:.3} s", self.seconds),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.line(), self.timing())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            tol: Tolerances::default(),
        }
    }
}

fn timed(
    id: u8,
    name: &str,
    limit: Option<f64>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CheckOutcome {
    let start = Instant::now();
    let result = body();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(l) = limit {
        passed &= seconds < l;
    }
    CheckOutcome {
        id,
        name: name.to_string(),
        passed,
        detail,
        seconds,
        limit_seconds: limit,
    }
}


/// Four-cycle with two seeded vertices: the solution space vanishes unless
/// both diagonals agree and the couplings have rank one.
pub fn four_cycle_reproduction(cfg: &VerifyConfig) -> CheckOutcome {
    timed(1, "four-cycle reproduction", Some(1.0), || {
        let seed = fixtures::four_cycle_seed();
        let cases = [
            ("distinct diagonals", [1.0, 2.0], [[1.0, 2.0], [3.0, 4.0]], 0, Some((-2, 0))),
            ("equal diagonals, rank 2", [2.0, 2.0], [[1.0, 2.0], [3.0, 4.0]], 0, Some((0, 2))),
            ("equal diagonals, rank 1", [2.0, 2.0], [[1.0, 2.0], [2.0, 4.0]], 1, Some((0, 2))),
        ];
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, alpha, couplings, want, bounds) in cases {
            let g = fixtures::four_cycle([0.0, 0.0], alpha, couplings);
            let r = dimension::dimension_report(&g, &seed, &cfg.tol)?;
            let bounds_ok = bounds.is_none_or(|b| (r.lower, r.upper) == b);
            ok &= r.exact == want && r.oracle == want && bounds_ok;
            parts.push(format!("{label}: dim {} bounds ({},{})", r.exact, r.lower, r.upper));
        }
        Ok((ok, parts.join("; ")))
    })
}

/// Two hubs sharing a neighbour, each with private leaves.
pub fn two_hubs_reproduction(cfg: &VerifyConfig) -> CheckOutcome {
    timed(2, "two-hub reproduction", Some(1.0), || {
        let g = fixtures::two_hubs();
        let distinct = crate::spectral::distinct_eigenvalue_count(g.matrix(), cfg.tol.group)? == g.n();
        let r = dimension::dimension_report(&g, &fixtures::two_hubs_seed(), &cfg.tol)?;
        let ok = distinct && (r.lower, r.upper) == (-1, 0) && r.exact == 0 && r.oracle == 0;
        Ok((
            ok,
            format!(
                "bounds ({},{}), exact {}, oracle {}, simple spectrum {distinct}",
                r.lower, r.upper, r.exact, r.oracle
            ),
        ))
    })
}

/// Number of instances in the dimension campaign.
pub const SWEEP_INSTANCES: usize = 500;
/// Extra degenerate-spectrum instances for the closure check.
pub const INTEGER_INSTANCES: usize = 200;

pub fn sandwich_campaign(cfg: &VerifyConfig) -> CheckOutcome {
    timed(3, "sandwich and agreement campaign", Some(60.0), || {
        let rows = campaign::sweep(cfg.seed, SWEEP_INSTANCES, GraphFamily::Continuous, &cfg.tol)?;
        let s = SweepSummary::of(&rows);
        let regenerated: usize = rows.iter().map(|r| r.regenerations).sum();
        let ok = s.instances >= SWEEP_INSTANCES && s.bounds_hold == s.instances && s.matched == s.instances;
        Ok((
            ok,
            format!(
                "{}/{} within bounds, {}/{} exact = oracle, {regenerated} regenerated",
                s.bounds_hold, s.instances, s.matched, s.instances
            ),
        ))
    })
}

pub const CONFLUENCE_GRAPHS: usize = 100;
pub const CONFLUENCE_ORDERS: u64 = 20;

pub fn extension_confluence(cfg: &VerifyConfig) -> CheckOutcome {
    timed(4, "extension confluence", Some(10.0), || {
        let results = campaign::par_map(CONFLUENCE_GRAPHS, |id| -> Result<(bool, usize)> {
            let (g, seed) = campaign::confluence_instance(cfg.seed, id);
            let reference = extension::closure(&g, &seed)?;
            let mut same = true;
            let mut longest = 0;
            for order in 0..CONFLUENCE_ORDERS {
                let r = extension::maximal_extension(&g, &seed, Some(campaign::instance_seed(id, order)))?;
                same &= r.closure == reference && r.replay(&g).as_ref() == Some(&reference);
                longest = longest.max(r.chain.len());
            }
            Ok((same, longest))
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let agree = results.iter().filter(|r| r.0).count();
        let longest = results.iter().map(|r| r.1).max().unwrap_or(0);
        Ok((
            agree == CONFLUENCE_GRAPHS,
            format!(
                "{agree}/{CONFLUENCE_GRAPHS} graphs with identical closures over {CONFLUENCE_ORDERS} orders, longest chain {longest}"
            ),
        ))
    })
}

pub fn closure_insensitivity(cfg: &VerifyConfig) -> CheckOutcome {
    timed(5, "closure insensitivity", None, || {
        let mut rows = campaign::sweep(cfg.seed, SWEEP_INSTANCES, GraphFamily::Continuous, &cfg.tol)?;
        rows.extend(campaign::sweep(cfg.seed ^ 0x5eed, INTEGER_INSTANCES, GraphFamily::Integer, &cfg.tol)?);
        let s = SweepSummary::of(&rows);
        Ok((
            s.closure_invariant == s.instances,
            format!("{}/{} instances with oracle(B) = oracle([B])", s.closure_invariant, s.instances),
        ))
    })
}

pub const JOST_CHANNELS: u64 = 50;

pub fn jost_exactness(cfg: &VerifyConfig) -> CheckOutcome {
    timed(6, "Jost exactness", None, || {
        let mut exact = 0;
        let mut max_k0 = 0;
        for id in 0..JOST_CHANNELS {
            let mut rng = campaign::instance_rng(cfg.seed ^ 0x70_57, id);
            let (a, b) = campaign::random_rational_channel(&mut rng, 6);
            let j = scattering::jost_solution_rational(a, b)?;
            max_k0 = max_k0.max(j.k0);
            let identity = (1..=j.k0 + 2).all(|k| j.recurrence_residual(k).is_zero());
            let range = j
                .polys
                .iter()
                .enumerate()
                .all(|(k, p)| p.min_exponent().is_some_and(|m| m >= k as i32));
            let tail = j.poly(j.k0 + 1) == LaurentPoly::power(j.k0 as i32 + 1);
            if identity && range && tail {
                exact += 1;
            }
        }
        let free = scattering::jost_solution(0, &crate::graph::ChannelSpec::free(0))?;
        let free_ok = (0..12).all(|k| free.poly(k) == LaurentPoly::power(k as i32));
        Ok((
            exact == JOST_CHANNELS && free_ok,
            format!("{exact}/{JOST_CHANNELS} channels exact (K0 up to {max_k0}), free channel θ^k: {free_ok}"),
        ))
    })
}

pub const SCATTERING_WEBS: u64 = 20;
pub const SCATTERING_SAMPLES: usize = 64;

/// Extra channel sites beyond `K0 + 1` in eigenfunction residual checks.
const EIGENFUNCTION_MARGIN: usize = 6;

#[derive(Debug, Clone, Copy, Default)]
struct ScatteringStats {
    samples: usize,
    inverse_defect: f64,
    residual: f64,
    singular_t: usize,
    max_condition: f64,
    max_unitarity_defect: f64,
}

fn scattering_web(seed: u64, id: u64) -> Result<ScatteringStats> {
    let mut rng = campaign::instance_rng(seed ^ 0x5ca7, id);
    let web = campaign::random_web(&mut rng);
    let tol = Tolerances::default();
    let sc = Scatterer::new(&web, &tol)?;
    let depth = web.k0() + 1 + EIGENFUNCTION_MARGIN;
    let channels = web.channel_count();
    let mut stats = ScatteringStats::default();
    let mut attempts = 0;
    while stats.samples < SCATTERING_SAMPLES && attempts < 20 * SCATTERING_SAMPLES {
        attempts += 1;
        let radius = if stats.samples % 2 == 0 { 0.9 } else { 1.0 };
        let arg = rng.random_range(0.02..std::f64::consts::PI - 0.02) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let theta = Complex64::from_polar(radius, arg);
        let at = match sc.scattering_at(theta) {
            Ok(at) => at,
            Err(Error::OnSingularSet { .. }) => continue,
            Err(Error::TNotInvertible { .. }) => {
                stats.singular_t += 1;
                stats.samples += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let back = sc.scattering_at(theta.inv())?;
        let prod = &at.s * &back.s - DMatrix::<Complex64>::identity(channels, channels);
        stats.inverse_defect = stats.inverse_defect.max(prod.iter().fold(0.0, |m, z| m.max(z.norm())));
        stats.max_condition = stats.max_condition.max(at.t_condition);
        if radius == 1.0 {
            stats.max_unitarity_defect = stats.max_unitarity_defect.max(at.unitarity_defect);
        }
        let n = DVector::from_iterator(
            channels,
            (0..channels).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        let phi = sc.eigenfunction(theta, &n, depth)?;
        let res = scattering::eigenfunction_residual(&web, &phi)?;
        stats.residual = stats.residual.max(res.max());
        stats.samples += 1;
    }
    Ok(stats)
}

pub fn scattering_identities(cfg: &VerifyConfig) -> CheckOutcome {
    timed(7, "scattering identities", Some(30.0), || {
        let all = campaign::par_map(SCATTERING_WEBS as usize, |id| scattering_web(cfg.seed, id))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let samples: usize = all.iter().map(|s| s.samples).sum();
        let singular: usize = all.iter().map(|s| s.singular_t).sum();
        let inverse = all.iter().map(|s| s.inverse_defect).fold(0.0, f64::max);
        let residual = all.iter().map(|s| s.residual).fold(0.0, f64::max);
        let cond = all.iter().map(|s| s.max_condition).fold(0.0, f64::max);
        let unitarity = all.iter().map(|s| s.max_unitarity_defect).fold(0.0, f64::max);
        let ok = samples == SCATTERING_WEBS as usize * SCATTERING_SAMPLES
            && singular == 0
            && inverse <= 1e-8
            && residual <= 1e-8;
        Ok((
            ok,
            format!(
                "{samples} samples, max |S(θ)S(1/θ) − I| {inverse:.1e}, max residual {residual:.1e}, \
                 {singular} singular T (max cond {cond:.1e}); unitarity defect on |θ|=1 {unitarity:.1e} (diagnostic)"
            ),
        ))
    })
}

pub const EVOLUTION_GRAPHS: u64 = 60;
pub const EVOLUTION_WEBS: u64 = 8;

fn evolution_defects(p: &Propagator, u0: &DVector<Complex64>, s: f64, t: f64) -> Result<[f64; 3]> {
    let us = p.apply(u0, s)?;
    let norm = (us.norm() - u0.norm()).abs() / u0.norm();
    let composed = p.apply(&us, t)?;
    let direct = p.apply(u0, s + t)?;
    let group = (composed - direct).camax() / u0.camax();
    let back = p.apply(&us, -s)?;
    let reverse = (back - u0).camax() / u0.camax();
    Ok([norm, group, reverse])
}

pub fn unitarity_and_group_law(cfg: &VerifyConfig) -> CheckOutcome {
    timed(8, "unitarity and group law", None, || {
        let mut worst = [0.0f64; 3];
        let mut cases = 0;
        let random_state = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| {
            DVector::from_iterator(
                n,
                (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
            )
        };
        for id in 0..EVOLUTION_GRAPHS {
            let mut rng = campaign::instance_rng(cfg.seed ^ 0xe70, id);
            let n = rng.random_range(1..=8);
            let g = campaign::random_connected_graph(&mut rng, n, 0.4);
            let p = Propagator::new(g.matrix())?;
            let u0 = random_state(&mut rng, n);
            for _ in 0..4 {
                let (s, t) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let d = evolution_defects(&p, &u0, s, t)?;
                for i in 0..3 {
                    worst[i] = worst[i].max(d[i]);
                }
                cases += 1;
            }
        }
        for id in 0..EVOLUTION_WEBS {
            let mut rng = campaign::instance_rng(cfg.seed ^ 0xe71, id);
            let web = campaign::random_web(&mut rng);
            let (g, _) = web.truncate(64)?;
            let p = Propagator::new(g.matrix())?;
            let u0 = random_state(&mut rng, g.n());
            let (s, t) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let d = evolution_defects(&p, &u0, s, t)?;
            for i in 0..3 {
                worst[i] = worst[i].max(d[i]);
            }
            cases += 1;
        }
        let ok = worst.iter().all(|&d| d <= 1e-10);
        Ok((
            ok,
            format!(
                "{cases} cases, max norm drift {:.1e}, composition {:.1e}, reversal {:.1e}",
                worst[0], worst[1], worst[2]
            ),
        ))
    })
}

pub fn type_estimator(_cfg: &VerifyConfig) -> CheckOutcome {
    timed(9, "exponential type estimator", None, || {
        let k_max = 200;
        let envelope: Vec<f64> = (0..=k_max)
            .map(|k| if k == 0 { 0.0 } else { evolution::log_envelope(k, 1.0) })
            .collect();
        let log_fact: Vec<f64> = (0..=k_max)
            .scan(0.0, |acc, k: usize| {
                if k > 0 {
                    *acc += (k as f64).ln();
                }
                Some(-*acc)
            })
            .collect();
        let a = evolution::exponential_type_estimate(&envelope)?.sigma;
        let b = evolution::exponential_type_estimate(&log_fact)?.sigma;
        let ok = (0.95 / 3.0..=1.05 / 3.0).contains(&a) && (0.95..=1.05).contains(&b);
        Ok((ok, format!("(e/(3k))^k: {a:.4}, 1/k!: {b:.4} (K = {k_max})")))
    })
}

pub const EXPERIMENTS: u64 = 100;

pub fn uncertainty_consistency(cfg: &VerifyConfig) -> CheckOutcome {
    timed(10, "uncertainty consistency", None, || {
        let config = ExperimentConfig::default();
        let runs = campaign::par_map(EXPERIMENTS as usize, |id| -> Result<(Verdict, bool)> {
            let mut rng = campaign::instance_rng(cfg.seed ^ 0xdec, id);
            let web = campaign::random_web(&mut rng);
            let channel = rng.random_range(0..web.channel_count());
            let u0 = campaign::random_admissible_data(&mut rng, &web, channel, config.eps, config.depth, config.guard)?;
            let r = evolution::uncertainty_experiment(&web, channel, &u0, &config)?;
            Ok((r.verdict, r.leakage <= 1e-8))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let violations = runs.iter().filter(|r| r.0 == Verdict::Violation).count();
        let contained = runs.iter().filter(|r| r.1).count();

        let web = fixtures::scalar_free_web(2.0);
        let u0 = evolution::envelope_data(&web, 0, config.eps, config.depth, config.guard)?;
        let canon = evolution::uncertainty_experiment(&web, 0, &u0, &config)?;
        let first_positive = canon.terminal.margins.iter().position(|&m| m > 0.0).map(|i| i + 1);
        let ok = violations == 0 && first_positive.is_some_and(|k| k <= 40);
        Ok((
            ok,
            format!(
                "{violations} violations in {} runs ({contained} with leakage ≤ 1e-8); canonical run: \
                 first positive margin at k = {}, max margin {:.2} at k = {}",
                runs.len(),
                first_positive.map_or("none".into(), |k| k.to_string()),
                canon.terminal.max_margin,
                canon.terminal.argmax.map_or("none".into(), |k| k.to_string()),
            ),
        ))
    })
}

/// Largest `|u(t, v)|` over `v ∈ set` and `t` on a grid in `[0, 1]`, for each basis column.
fn max_on_set(p: &Propagator, basis: &DMatrix<f64>, set: &VertexSet, steps: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for col in basis.column_iter() {
        let u0 = col.map(Complex64::from);
        for i in 0..=steps {
            let u = p.apply(&u0, i as f64 / steps as f64)?;
            for &v in set {
                worst = worst.max(u[v].norm());
            }
        }
    }
    Ok(worst)
}

pub fn forced_zero_corollaries(cfg: &VerifyConfig) -> CheckOutcome {
    timed(11, "forced-zero corollaries", None, || {
        let web = fixtures::path_web();
        let seed = fixtures::path_web_seed();
        let z = forced_zero_set(&web, &seed, &[])?;
        let everything = z.is_everything(web.core().n());

        let depth = 40;
        let (g, map) = web.truncate(depth)?;
        let seed_idx: VertexSet = seed.iter().filter_map(|&v| map.index(v)).collect();
        let space = dimension::oracle_dimension(&g, &seed_idx, &cfg.tol)?;
        let all: VertexSet = (0..g.n()).collect();
        let p = Propagator::new(g.matrix())?;
        let web_max = max_on_set(&p, &space.basis, &all, 20)?;

        // nonzero solution space on a finite graph: evolved basis vanishes on [B]
        let g4 = fixtures::four_cycle([0.0, 0.0], [2.0, 2.0], [[1.0, 2.0], [2.0, 4.0]]);
        let seed4 = fixtures::four_cycle_seed();
        let closure4 = extension::closure(&g4, &seed4)?;
        let space4 = dimension::exact_dimension(&g4, &seed4, &cfg.tol)?.space;
        let finite_max = max_on_set(&Propagator::new(g4.matrix())?, &space4.basis, &closure4, 20)?;

        let ok = everything && web_max <= 1e-8 && space4.dimension == 1 && finite_max <= 1e-8;
        Ok((
            ok,
            format!(
                "forced-zero set is everything: {everything}; truncated kernel dim {} (max evolved {web_max:.1e}); \
                 four-cycle kernel dim {} vanishes on [B] to {finite_max:.1e}",
                space.dimension, space4.dimension
            ),
        ))
    })
}

pub type Check = fn(&VerifyConfig) -> CheckOutcome;

pub const CHECKS: [Check; 11] = [
    four_cycle_reproduction,
    two_hubs_reproduction,
    sandwich_campaign,
    extension_confluence,
    closure_insensitivity,
    jost_exactness,
    scattering_identities,
    unitarity_and_group_law,
    type_estimator,
    uncertainty_consistency,
    forced_zero_corollaries,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    /// Report text without timings.
    pub fn render(&self) -> String {
        let t = &self.config.tol;
        let mut out = format!(
            "seed {} tol.group {:e} tol.kernel {:e} tol.singular_guard {:e}\n",
            self.config.seed, t.group, t.kernel, t.singular_guard
        );
        for o in &self.outcomes {
            out.push_str(&o.line());
            out.push('\n');
        }
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        out.push_str(&format!("{passed}/{} passed\n", self.outcomes.len()));
        out
    }
}

pub fn run_all(cfg: &VerifyConfig) -> VerifyReport {
    VerifyReport {
        config: *cfg,
        outcomes: CHECKS.iter().map(|c| c(cfg)).collect(),
    }
}

/// Runs only the checks whose ids are listed.
pub fn run_selected(cfg: &VerifyConfig, ids: &[u8]) -> VerifyReport {
    VerifyReport {
        config: *cfg,
        outcomes: CHECKS
            .iter()
            .enumerate()
            .filter(|(i, _)| ids.contains(&(*i as u8 + 1)))
            .map(|(_, c)| c(cfg))
            .collect(),
    }
}
