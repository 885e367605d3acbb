use std::collections::BTreeMap;
use std::error::Error as StdError;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use graph_schro::campaign::{self, GraphFamily, SweepRow, SweepSummary};
use graph_schro::dimension;
use graph_schro::evolution::{self, ExperimentConfig, ExperimentReport, Propagator, Verdict, WebPropagator};
use graph_schro::extension;
use graph_schro::io::{parse_graph, ParseOptions, ParsedGraph};
use graph_schro::scattering::{self, Scatterer};
use graph_schro::verify::{self, VerifyConfig};
use graph_schro::{Complex64, DVector, Error, VertexSet};
use rand::Rng as _;
use serde::Serialize;

use crate::output::{self, complex, complex_matrix, complex_vector, finite_or_none, Envelope};
use crate::{Cli, Command, Family, Format};

pub enum Status {
    Success,
    Failed,
}

impl Status {
    fn from_ok(ok: bool) -> Self {
        if ok { Status::Success } else { Status::Failed }
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Read(PathBuf, std::io::Error),
    Write(std::io::Error),
    Csv(csv::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Read(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            CliError::Write(e) => write!(f, "cannot write report: {e}"),
            CliError::Csv(e) => write!(f, "csv: {e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl StdError for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

struct Input {
    text: String,
    parsed: ParsedGraph,
}

fn read_input(path: &Path, symmetrize: bool) -> Result<Input> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Read(path.to_path_buf(), e))?;
    let parsed = parse_graph(&text, ParseOptions { symmetrize })?;
    Ok(Input { text, parsed })
}

fn seed_set(input: &Input, set: &Option<Vec<usize>>) -> Result<VertexSet> {
    let seed = match set {
        Some(v) => v.iter().copied().collect(),
        None => input.parsed.seed().ok_or_else(|| {
            CliError::Core(Error::Parse {
                location: "B".into(),
                message: "no vertex set given: add \"B\" to the input or pass --set".into(),
            })
        })?,
    };
    input.parsed.core().check_vertices(&seed)?;
    Ok(seed)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    output::write_text(cli.global.out.as_deref(), text).map_err(CliError::Write)
}

fn no_csv(command: &str) -> CliError {
    CliError::Usage(format!("{command} has no CSV output; use --format json"))
}

pub fn run(cli: &Cli) -> Result<Status> {
    let tol = cli.global.tolerances();
    tol.validate()?;
    match &cli.command {
        Command::Extend { input, set, order_seed } => extend(cli, input, set, *order_seed),
        Command::Dimension { input, set } => dimension_cmd(cli, input, set),
        Command::Sweep { count, family } => sweep(cli, *count, *family),
        Command::Scatter { input, theta, depth } => scatter(cli, input, theta, *depth),
        Command::Evolve {
            input,
            t,
            depth,
            support_guard,
        } => evolve(cli, input, *t, *depth, *support_guard),
        Command::Experiment {
            input,
            count,
            channel,
            eps,
            c,
            depth,
            support_guard,
        } => {
            let config = ExperimentConfig {
                eps: *eps,
                c: *c,
                depth: *depth,
                guard: *support_guard,
                ..ExperimentConfig::default()
            };
            experiment(cli, input.as_deref(), *count, *channel, &config)
        }
        Command::Verify { only } => verify_cmd(cli, only.as_deref()),
    }
}

#[derive(Serialize)]
struct ExtendReport {
    seed: VertexSet,
    closure: VertexSet,
    chain: Vec<extension::ExtensionStep>,
    clusters: BTreeMap<usize, VertexSet>,
    branches: Vec<extension::Branch>,
}

fn extend(cli: &Cli, path: &Path, set: &Option<Vec<usize>>, order_seed: Option<u64>) -> Result<Status> {
    if cli.global.format == Format::Csv {
        return Err(no_csv("extend"));
    }
    let input = read_input(path, cli.global.symmetrize)?;
    let seed = seed_set(&input, set)?;
    let g = input.parsed.core();
    let ext = extension::maximal_extension(g, &seed, order_seed)?;
    let d = extension::decompose(g, &ext.closure)?;
    let report = ExtendReport {
        seed,
        closure: ext.closure,
        chain: ext.chain,
        clusters: d.clusters,
        branches: d.branches,
    };
    let env = Envelope::new("extend", cli.global.tolerances(), report).input(Some(&input.text));
    emit(cli, &output::json(&env))?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct SweepCsvRow {
    instance_id: u64,
    n: usize,
    #[serde(rename = "|B|")]
    seed_size: usize,
    lower: i64,
    upper: i64,
    exact: usize,
    oracle: usize,
    #[serde(rename = "match")]
    matched: bool,
    tol: f64,
}

impl From<&SweepRow> for SweepCsvRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            instance_id: r.instance_id,
            n: r.n,
            seed_size: r.seed_size,
            lower: r.lower,
            upper: r.upper,
            exact: r.exact,
            oracle: r.oracle,
            matched: r.matched,
            tol: r.tol,
        }
    }
}

fn dimension_cmd(cli: &Cli, path: &Path, set: &Option<Vec<usize>>) -> Result<Status> {
    let input = read_input(path, cli.global.symmetrize)?;
    let seed = seed_set(&input, set)?;
    let tol = cli.global.tolerances();
    let report = dimension::dimension_report(input.parsed.core(), &seed, &tol)?;
    let status = Status::from_ok(report.matches);
    match cli.global.format {
        Format::Json => {
            let env = Envelope::new("dimension", tol, report).input(Some(&input.text));
            emit(cli, &output::json(&env))?;
        }
        Format::Csv => {
            let row = SweepCsvRow {
                instance_id: 0,
                n: input.parsed.core().n(),
                seed_size: report.seed.len(),
                lower: report.lower,
                upper: report.upper,
                exact: report.exact,
                oracle: report.oracle,
                matched: report.matches,
                tol: tol.group,
            };
            emit(cli, &output::csv_rows(&[row])?)?;
        }
    }
    Ok(status)
}

#[derive(Serialize)]
struct SweepReport {
    family: GraphFamily,
    summary: SweepSummary,
    rows: Vec<SweepRow>,
}

fn sweep(cli: &Cli, count: usize, family: Family) -> Result<Status> {
    let tol = cli.global.tolerances();
    let family = match family {
        Family::Continuous => GraphFamily::Continuous,
        Family::Integer => GraphFamily::Integer,
    };
    let rows = campaign::sweep(cli.global.seed, count, family, &tol)?;
    let summary = SweepSummary::of(&rows);
    let ok = summary.bounds_hold == summary.instances && summary.matched == summary.instances;
    match cli.global.format {
        Format::Csv => {
            let csv_rows: Vec<SweepCsvRow> = rows.iter().map(SweepCsvRow::from).collect();
            emit(cli, &output::csv_rows(&csv_rows)?)?;
        }
        Format::Json => {
            let env = Envelope::new("sweep", tol, SweepReport { family, summary, rows }).seed(cli.global.seed);
            emit(cli, &output::json(&env))?;
        }
    }
    eprintln!(
        "{}/{} within bounds, {}/{} exact = oracle",
        summary.bounds_hold, summary.instances, summary.matched, summary.instances
    );
    Ok(Status::from_ok(ok))
}

#[derive(Serialize)]
struct ChannelResidual {
    channel: usize,
    spectral: f64,
    boundary: f64,
}

#[derive(Serialize)]
struct JostReport {
    channel: usize,
    k0: usize,
    polys: Vec<String>,
}

#[derive(Serialize)]
struct ScatterReport {
    theta: [f64; 2],
    lambda: [f64; 2],
    nearest_singular: [f64; 2],
    singular_distance: f64,
    e0: Vec<[f64; 2]>,
    e1: Vec<[f64; 2]>,
    b0: Vec<f64>,
    r: Vec<Vec<[f64; 2]>>,
    t: Vec<Vec<[f64; 2]>>,
    t_inverse: Vec<Vec<[f64; 2]>>,
    t_reflected: Vec<Vec<[f64; 2]>>,
    s: Vec<Vec<[f64; 2]>>,
    t_condition: f64,
    unitarity_defect: f64,
    eigenfunction_depth: usize,
    residuals: Vec<ChannelResidual>,
    jost: Vec<JostReport>,
}

fn parse_theta(text: &str) -> Result<Complex64> {
    text.trim()
        .parse::<Complex64>()
        .map_err(|_| CliError::Usage(format!("cannot parse θ = {text:?}; expected a+bi")))
}

fn scatter(cli: &Cli, path: &Path, theta: &str, depth: Option<usize>) -> Result<Status> {
    if cli.global.format == Format::Csv {
        return Err(no_csv("scatter"));
    }
    let theta = parse_theta(theta)?;
    let input = read_input(path, cli.global.symmetrize)?;
    let tol = cli.global.tolerances();
    let web = &input.parsed.web;
    if web.channel_count() == 0 {
        return Err(CliError::Usage("scatter needs at least one channel".into()));
    }
    let sc = Scatterer::new(web, &tol)?;
    let at = sc.scattering_at(theta)?;
    let depth = depth.unwrap_or(web.k0() + 7);
    let mut residuals = Vec::new();
    for c in 0..web.channel_count() {
        let mut n = DVector::zeros(web.channel_count());
        n[c] = Complex64::from(1.0);
        let phi = sc.eigenfunction(theta, &n, depth)?;
        let r = scattering::eigenfunction_residual(web, &phi)?;
        residuals.push(ChannelResidual {
            channel: c,
            spectral: r.spectral,
            boundary: r.boundary,
        });
    }
    let (point, distance) = sc.singular_set().nearest(theta);
    let report = ScatterReport {
        theta: complex(theta),
        lambda: complex(at.lambda),
        nearest_singular: complex(point),
        singular_distance: distance,
        e0: complex_vector(&at.e0),
        e1: complex_vector(&at.e1),
        b0: at.b0.iter().copied().collect(),
        r: complex_matrix(&at.r),
        t: complex_matrix(&at.t),
        t_inverse: complex_matrix(&at.t_inv),
        t_reflected: complex_matrix(&at.t_reflected),
        s: complex_matrix(&at.s),
        t_condition: at.t_condition,
        unitarity_defect: at.unitarity_defect,
        eigenfunction_depth: depth,
        residuals,
        jost: sc
            .jost()
            .iter()
            .map(|j| JostReport {
                channel: j.channel,
                k0: j.k0,
                polys: j.polys.iter().map(|p| p.to_string()).collect(),
            })
            .collect(),
    };
    let env = Envelope::new("scatter", tol, report).input(Some(&input.text));
    emit(cli, &output::json(&env))?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct EvolveReport {
    t: f64,
    depth: Option<usize>,
    support_guard: Option<usize>,
    vertices: Vec<String>,
    u: Vec<[f64; 2]>,
    initial_norm: f64,
    norm: f64,
    leakage: Option<f64>,
}

#[derive(Serialize)]
struct EvolveCsvRow {
    vertex: String,
    re: f64,
    im: f64,
}

fn evolve(cli: &Cli, path: &Path, t: f64, depth: usize, support_guard: usize) -> Result<Status> {
    let input = read_input(path, cli.global.symmetrize)?;
    let web = &input.parsed.web;
    let mut u0 = input.parsed.u0().ok_or_else(|| {
        CliError::Core(Error::Parse {
            location: "u0".into(),
            message: "evolve needs initial data \"u0\"".into(),
        })
    })?;
    let report = if web.channel_count() == 0 {
        let g = web.core();
        let state = Propagator::new(g.matrix())?.apply(&u0, t)?;
        EvolveReport {
            t,
            depth: None,
            support_guard: None,
            vertices: (0..g.n()).map(|i| g.label(i)).collect(),
            u: complex_vector(&state),
            initial_norm: u0.norm(),
            norm: state.norm(),
            leakage: None,
        }
    } else {
        let p = WebPropagator::new(web, depth, support_guard)?;
        let len = p.map().len();
        if u0.len() < len {
            // values past the given ones are zero: core first, then each channel's sites in order
            u0 = u0.resize_vertically(len, Complex64::from(0.0));
        }
        let evolved = p.evolve(&u0, t)?;
        EvolveReport {
            t,
            depth: Some(depth),
            support_guard: Some(support_guard),
            vertices: (0..len).map(|i| p.map().vertex(i).to_string()).collect(),
            u: complex_vector(&evolved.state.u),
            initial_norm: u0.norm(),
            norm: evolved.state.norm(),
            leakage: Some(evolved.leakage),
        }
    };
    match cli.global.format {
        Format::Json => {
            let env = Envelope::new("evolve", cli.global.tolerances(), report).input(Some(&input.text));
            emit(cli, &output::json(&env))?;
        }
        Format::Csv => {
            let rows: Vec<EvolveCsvRow> = report
                .vertices
                .iter()
                .zip(&report.u)
                .map(|(v, z)| EvolveCsvRow {
                    vertex: v.clone(),
                    re: z[0],
                    im: z[1],
                })
                .collect();
            emit(cli, &output::csv_rows(&rows)?)?;
        }
    }
    Ok(Status::Success)
}

#[derive(Serialize)]
struct ExperimentSummary {
    run: String,
    channel: usize,
    verdict: Verdict,
    nontrivial: bool,
    initial_max_margin: Option<f64>,
    terminal_max_margin: Option<f64>,
    terminal_first_failure: Option<usize>,
    type_initial: f64,
    type_terminal: f64,
    leakage: f64,
    grid: Vec<(f64, Option<f64>)>,
}

impl ExperimentSummary {
    fn of(run: String, r: &ExperimentReport) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            run,
            channel: r.channel,
            verdict: r.verdict,
            nontrivial: r.nontrivial,
            initial_max_margin: finite(r.initial.max_margin),
            terminal_max_margin: finite(r.terminal.max_margin),
            terminal_first_failure: r.terminal.first_failure(),
            type_initial: r.type_initial.sigma,
            type_terminal: r.type_terminal.sigma,
            leakage: r.leakage,
            grid: r.grid.iter().map(|&(t, m)| (t, finite(m))).collect(),
        }
    }
}

#[derive(Serialize)]
struct MarginRow {
    run: String,
    k: usize,
    margin_t0: Option<f64>,
    margin_t1: Option<f64>,
}

#[derive(Serialize)]
struct ExperimentCampaign {
    config: ExperimentConfig,
    violations: usize,
    runs: Vec<ExperimentSummary>,
}

fn experiment(
    cli: &Cli,
    path: Option<&Path>,
    count: usize,
    channel: usize,
    config: &ExperimentConfig,
) -> Result<Status> {
    let mut reports: Vec<(String, ExperimentReport)> = Vec::new();
    let mut text = None;
    if let Some(path) = path {
        let input = read_input(path, cli.global.symmetrize)?;
        let web = &input.parsed.web;
        let u0 = match input.parsed.u0() {
            Some(u) => {
                let (_, map) = web.truncate(config.depth)?;
                u.resize_vertically(map.len(), Complex64::from(0.0))
            }
            None => evolution::envelope_data(web, channel, config.eps, config.depth, config.guard)?,
        };
        reports.push(("input".into(), evolution::uncertainty_experiment(web, channel, &u0, config)?));
        text = Some(input.text);
    } else {
        let seed = cli.global.seed;
        let runs = campaign::par_map(count, |id| -> graph_schro::Result<ExperimentReport> {
            let mut rng = campaign::instance_rng(seed ^ 0xdec, id);
            let web = campaign::random_web(&mut rng);
            let ch = rng.random_range(0..web.channel_count());
            let u0 = campaign::random_admissible_data(&mut rng, &web, ch, config.eps, config.depth, config.guard)?;
            evolution::uncertainty_experiment(&web, ch, &u0, config)
        });
        for (id, r) in runs.into_iter().enumerate() {
            reports.push((id.to_string(), r?));
        }
        let web = graph_schro::fixtures::scalar_free_web(2.0);
        let u0 = evolution::envelope_data(&web, 0, config.eps, config.depth, config.guard)?;
        reports.push(("canonical".into(), evolution::uncertainty_experiment(&web, 0, &u0, config)?));
    }
    let violations = reports.iter().filter(|(_, r)| r.verdict == Verdict::Violation).count();
    match cli.global.format {
        Format::Csv => {
            let rows: Vec<MarginRow> = reports
                .iter()
                .flat_map(|(run, r)| {
                    let m0 = finite_or_none(&r.initial.margins);
                    let m1 = finite_or_none(&r.terminal.margins);
                    (0..m0.len()).map(move |i| MarginRow {
                        run: run.clone(),
                        k: i + 1,
                        margin_t0: m0[i],
                        margin_t1: m1[i],
                    })
                })
                .collect();
            emit(cli, &output::csv_rows(&rows)?)?;
        }
        Format::Json => {
            let report = ExperimentCampaign {
                config: config.clone(),
                violations,
                runs: reports.iter().map(|(run, r)| ExperimentSummary::of(run.clone(), r)).collect(),
            };
            let env = Envelope::new("experiment", cli.global.tolerances(), report)
                .input(text.as_deref())
                .seed(cli.global.seed);
            emit(cli, &output::json(&env))?;
        }
    }
    eprintln!("{violations} violations in {} runs", reports.len());
    Ok(Status::from_ok(violations == 0))
}

#[derive(Serialize)]
struct OutcomeRow {
    id: u8,
    name: String,
    passed: bool,
    detail: String,
}

fn verify_cmd(cli: &Cli, only: Option<&[u8]>) -> Result<Status> {
    let cfg = VerifyConfig {
        seed: cli.global.seed,
        tol: cli.global.tolerances(),
    };
    let report = match only {
        Some(ids) => verify::run_selected(&cfg, ids),
        None => verify::run_all(&cfg),
    };
    for o in &report.outcomes {
        eprintln!("check {:>2}: {}", o.id, o.timing());
    }
    let rows: Vec<OutcomeRow> = report
        .outcomes
        .iter()
        .map(|o| OutcomeRow {
            id: o.id,
            name: o.name.clone(),
            passed: o.passed,
            detail: o.detail.clone(),
        })
        .collect();
    match cli.global.format {
        Format::Csv => emit(cli, &output::csv_rows(&rows)?)?,
        Format::Json => {
            let env = Envelope::new("verify", cfg.tol, rows).seed(cfg.seed);
            emit(cli, &output::json(&env))?;
        }
    }
    eprint!("{}", report.render());
    Ok(Status::from_ok(report.passed()))
}
