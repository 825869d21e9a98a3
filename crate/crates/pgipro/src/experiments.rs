//! Simulated-user benchmarks: synthetic fronts, graph scenarios, metric
//! aggregation and result files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use pgipro_core::gppe::{run_elicitation_timed, GpHyper, GppeError, ProposalMark, QueryRecord};
use pgipro_core::graph::{MultiObjectiveGraph, NodeIndex, Path};
use pgipro_core::ipro::{enumerate_front, IproError, OracleError, OracleOutcome, ParetoOracle, Solution};
use pgipro_core::oracle::{FrontLookupOracle, GuidanceMode, ModfsOracle, SearchStats};
use pgipro_core::pareto::{ObjectiveVector, Region};
use pgipro_core::session::{EventKind, Heuristic, Session, SessionError};
use pgipro_core::simulate::run_steering_trial;
use pgipro_core::user::{trial_rng, UserError, UserModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::WallClock;
use crate::io::{load_graph, ParseError};

/// Noise sub-stream for the steering method; stream 0 samples the user.
pub const PGIPRO_STREAM: u64 = 1;
pub const GPPE_STREAM: u64 = 2;
/// Points on each synthetic front.
pub const SYNTHETIC_FRONT_SIZE: usize = 30;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot load scenario: {0}")]
    ScenarioLoad(#[from] ParseError),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ipro(#[from] IproError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Gppe(#[from] GppeError),
    #[error(transparent)]
    User(#[from] UserError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontShape {
    Convex,
    Concave,
}

fn convex_point(s: f64) -> [f64; 2] {
    [s * s, (1.0 - s) * (1.0 - s)]
}

/// Arc length of `(s^2, (1-s)^2)` from 0 to `s`.
fn convex_arc(s: f64) -> f64 {
    // speed = 2 sqrt(2) sqrt(u^2 + 1/4) with u = s - 1/2
    let f = |u: f64| 0.5 * (u * (u * u + 0.25).sqrt() + 0.25 * (2.0 * u).asinh());
    2.0 * std::f64::consts::SQRT_2 * (f(s - 0.5) - f(-0.5))
}

/// `n` points equally spaced in arc length from `(0, 1)` to `(1, 0)`.
///
/// Convex follows `y = (1 - sqrt(x))^2`, concave the unit quarter circle.
pub fn make_synthetic_front(shape: FrontShape, n: usize) -> Result<Vec<ObjectiveVector>, ExperimentError> {
    if n < 2 {
        return Err(ExperimentError::Invalid(format!("a synthetic front needs at least 2 points, got {n}")));
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let frac = k as f64 / (n - 1) as f64;
        let p = if k == 0 {
            [0.0, 1.0]
        } else if k == n - 1 {
            [1.0, 0.0]
        } else {
            match shape {
                FrontShape::Concave => {
                    let t = frac * std::f64::consts::FRAC_PI_2;
                    [t.sin(), t.cos()]
                }
                FrontShape::Convex => {
                    let goal = frac * convex_arc(1.0);
                    let (mut lo, mut hi) = (0.0f64, 1.0f64);
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if convex_arc(mid) < goal {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    convex_point(0.5 * (lo + hi))
                }
            }
        };
        out.push(ObjectiveVector::from(p));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Synthetic(FrontShape),
    Graph { path: PathBuf, source: String, target: String },
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "convex" => Ok(Scenario::Synthetic(FrontShape::Convex)),
            "concave" => Ok(Scenario::Synthetic(FrontShape::Concave)),
            _ => {
                let rest = s
                    .strip_prefix("graph:")
                    .ok_or_else(|| format!("unknown scenario {s:?}; expected convex, concave or graph:<file>:<src>:<dst>"))?;
                let mut parts = rest.rsplitn(3, ':');
                let (Some(target), Some(source), Some(path)) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(format!("graph scenario {s:?} must look like graph:<file>:<src>:<dst>"));
                };
                if path.is_empty() || source.is_empty() || target.is_empty() {
                    return Err(format!("graph scenario {s:?} has an empty field"));
                }
                Ok(Scenario::Graph { path: path.into(), source: source.into(), target: target.into() })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "pgipro")]
    PgIpro,
    #[serde(rename = "gppe")]
    Gppe,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PgIpro => "pgipro",
            Method::Gppe => "gppe",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pgipro" => Ok(Method::PgIpro),
            "gppe" => Ok(Method::Gppe),
            _ => Err(format!("unknown method {s:?}; expected pgipro or gppe")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub queries: usize,
    pub noise_sigma: f64,
    pub base_seed: u64,
    pub heuristic: Heuristic,
    pub guidance: GuidanceMode,
    /// Worker threads; `None` uses the global pool, `Some(1)` runs inline.
    pub threads: Option<usize>,
}

impl BenchmarkConfig {
    pub fn new(scenario: Scenario) -> Self {
        BenchmarkConfig {
            scenario,
            methods: vec![Method::PgIpro, Method::Gppe],
            trials: 300,
            queries: 15,
            noise_sigma: 0.01,
            base_seed: 0,
            heuristic: Heuristic::default(),
            guidance: GuidanceMode::default(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub method: Method,
    pub query: usize,
    pub mean_utility: f64,
    pub mean_max_utility: f64,
    /// Standard error of the mean maximum utility.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub method: Method,
    pub precompute_seconds: f64,
    pub mean_per_proposal_seconds: f64,
}

/// One oracle call made by the steering method on a graph scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCallRow {
    pub trial: usize,
    pub call: usize,
    pub outcome: &'static str,
    pub expanded: u64,
    pub generated: u64,
    pub pruned_incumbent: u64,
    pub pruned_region: u64,
    pub pruned_dominated: u64,
    pub micros: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub method: Method,
    pub records: Vec<QueryRecord>,
    /// Wall time of each proposal, in seconds.
    pub proposal_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub curves: Vec<CurveRow>,
    pub timing: Vec<TimingRow>,
    pub trials: Vec<TrialOutcome>,
    pub oracle_calls: Vec<OracleCallRow>,
    pub front: Vec<ObjectiveVector>,
}

impl BenchmarkResult {
    pub fn curve(&self, method: Method) -> Vec<&CurveRow> {
        self.curves.iter().filter(|r| r.method == method).collect()
    }

    pub fn timing(&self, method: Method) -> Option<&TimingRow> {
        self.timing.iter().find(|r| r.method == method)
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}

/// Records per-call search counters of a [`ModfsOracle`].
struct InstrumentedOracle {
    inner: ModfsOracle,
    calls: Vec<(SearchStats, &'static str, u64)>,
}

impl ParetoOracle for InstrumentedOracle {
    type Payload = Path;

    fn objective_count(&self) -> usize {
        self.inner.objective_count()
    }

    fn extreme(&mut self, i: usize) -> Result<Option<Solution<Path>>, OracleError> {
        self.inner.extreme(i)
    }

    fn solve(&mut self, region: &Region) -> Result<OracleOutcome<Path>, OracleError> {
        let t0 = Instant::now();
        let out = self.inner.solve(region)?;
        let label = match out {
            OracleOutcome::Success(_) => "success",
            OracleOutcome::Infeasible => "infeasible",
        };
        self.calls.push((self.inner.last_stats(), label, t0.elapsed().as_micros() as u64));
        Ok(out)
    }
}

struct GraphScenario {
    graph: Arc<MultiObjectiveGraph>,
    source: NodeIndex,
    target: NodeIndex,
}

struct Prepared {
    front: Vec<ObjectiveVector>,
    graph: Option<GraphScenario>,
    precompute_seconds: f64,
    ideal: Vec<f64>,
    nadir: Vec<f64>,
}

fn bounds_of(front: &[ObjectiveVector]) -> (Vec<f64>, Vec<f64>) {
    let m = front[0].dim();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for v in front {
        for i in 0..m {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    (lo, hi)
}

fn prepare(config: &BenchmarkConfig) -> Result<Prepared, ExperimentError> {
    match &config.scenario {
        Scenario::Synthetic(shape) => {
            let front = make_synthetic_front(*shape, SYNTHETIC_FRONT_SIZE)?;
            let (ideal, nadir) = bounds_of(&front);
            Ok(Prepared { front, graph: None, precompute_seconds: 0.0, ideal, nadir })
        }
        Scenario::Graph { path, source, target } => {
            let graph = Arc::new(load_graph(path)?);
            let s = graph.lookup(source).ok_or_else(|| ExperimentError::UnknownNode(source.clone()))?;
            let t = graph.lookup(target).ok_or_else(|| ExperimentError::UnknownNode(target.clone()))?;
            let t0 = Instant::now();
            let mut oracle = ModfsOracle::new(graph.clone(), s, t, config.guidance)?;
            let sols = enumerate_front(&mut oracle, 0.0)?;
            let precompute_seconds = t0.elapsed().as_secs_f64();
            let front: Vec<ObjectiveVector> = sols.into_iter().map(|s| s.value).collect();
            let (ideal, nadir) = bounds_of(&front);
            Ok(Prepared {
                front,
                graph: Some(GraphScenario { graph, source: s, target: t }),
                precompute_seconds,
                ideal,
                nadir,
            })
        }
    }
}

struct TrialRun {
    outcomes: Vec<TrialOutcome>,
    calls: Vec<OracleCallRow>,
}

fn run_trial(config: &BenchmarkConfig, prep: &Prepared, trial: usize) -> Result<TrialRun, ExperimentError> {
    let seed = config.base_seed.wrapping_add(trial as u64);
    let m = prep.front[0].dim();
    let user = UserModel::sample(m, seed)?
        .with_noise(config.noise_sigma)
        .with_normalization(&prep.ideal, &prep.nadir)?;
    let mut outcomes = Vec::new();
    let mut calls = Vec::new();
    for &method in &config.methods {
        match method {
            Method::PgIpro => {
                let mut rng = trial_rng(seed, PGIPRO_STREAM);
                let (records, proposal_seconds) = match &prep.graph {
                    None => {
                        let oracle = FrontLookupOracle::new(prep.front.clone(), config.guidance);
                        let mut session = Session::start_with_clock(oracle, config.heuristic, Box::new(WallClock::new()))?;
                        let trial = run_steering_trial(&mut session, &user, config.queries, &mut rng)?;
                        (trial.records, proposal_times(&session))
                    }
                    Some(g) => {
                        let inner = ModfsOracle::new(g.graph.clone(), g.source, g.target, config.guidance)?;
                        let oracle = InstrumentedOracle { inner, calls: Vec::new() };
                        let mut session = Session::start_with_clock(oracle, config.heuristic, Box::new(WallClock::new()))?;
                        let result = run_steering_trial(&mut session, &user, config.queries, &mut rng)?;
                        for (k, (st, label, micros)) in session.oracle().calls.iter().enumerate() {
                            calls.push(OracleCallRow {
                                trial,
                                call: k,
                                outcome: label,
                                expanded: st.expanded,
                                generated: st.generated,
                                pruned_incumbent: st.pruned_incumbent,
                                pruned_region: st.pruned_region,
                                pruned_dominated: st.pruned_dominated,
                                micros: *micros,
                            });
                        }
                        (result.records, proposal_times(&session))
                    }
                };
                outcomes.push(TrialOutcome { trial, method, records, proposal_seconds });
            }
            Method::Gppe => {
                let mut rng = trial_rng(seed, GPPE_STREAM);
                let mut started = None;
                let mut proposal_seconds = Vec::new();
                let records = run_elicitation_timed(
                    &prep.front,
                    &user,
                    config.queries,
                    GpHyper::default(),
                    &mut rng,
                    &mut |mark| match mark {
                        ProposalMark::Start(_) => started = Some(Instant::now()),
                        ProposalMark::End(_) => {
                            if let Some(t0) = started.take() {
                                proposal_seconds.push(t0.elapsed().as_secs_f64());
                            }
                        }
                    },
                )?;
                outcomes.push(TrialOutcome { trial, method, records, proposal_seconds });
            }
        }
    }
    Ok(TrialRun { outcomes, calls })
}

fn proposal_times<O: ParetoOracle>(session: &Session<O>) -> Vec<f64> {
    session
        .transcript()
        .iter()
        .filter(|e| matches!(e.kind, EventKind::InitialProposal | EventKind::Steer) && e.proposed.is_some())
        .filter_map(|e| e.oracle_micros)
        .map(|us| us as f64 * 1e-6)
        .collect()
}

/// Runs every configured method on every trial and aggregates the curves.
///
/// Trials may run in parallel; results are merged in trial order, so the
/// curves depend only on the configuration.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkResult, ExperimentError> {
    if config.trials == 0 || config.queries == 0 {
        return Err(ExperimentError::Invalid("trials and queries must be at least 1".into()));
    }
    if config.methods.is_empty() {
        return Err(ExperimentError::Invalid("no methods selected".into()));
    }
    if !(config.noise_sigma >= 0.0 && config.noise_sigma.is_finite()) {
        return Err(ExperimentError::Invalid(format!("noise must be a finite non-negative number, got {}", config.noise_sigma)));
    }
    let prep = prepare(config)?;
    let run_all = || -> Result<Vec<TrialRun>, ExperimentError> {
        (0..config.trials).into_par_iter().map(|t| run_trial(config, &prep, t)).collect()
    };
    let runs = match config.threads {
        Some(1) => (0..config.trials).map(|t| run_trial(config, &prep, t)).collect::<Result<Vec<_>, _>>()?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ExperimentError::Invalid(e.to_string()))?
            .install(run_all)?,
        None => run_all()?,
    };

    let mut trials = Vec::new();
    let mut oracle_calls = Vec::new();
    for run in runs {
        trials.extend(run.outcomes);
        oracle_calls.extend(run.calls);
    }

    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    let mut curves = Vec::new();
    let mut timing = Vec::new();
    for &method in &methods {
        let mine: Vec<&TrialOutcome> = trials.iter().filter(|t| t.method == method).collect();
        let n = mine.len() as f64;
        for q in 0..config.queries {
            let utils: Vec<f64> = mine.iter().map(|t| t.records[q].utility).collect();
            let maxes: Vec<f64> = mine.iter().map(|t| t.records[q].max_utility).collect();
            let mean_max = maxes.iter().sum::<f64>() / n;
            let stderr = if mine.len() > 1 {
                let var = maxes.iter().map(|x| (x - mean_max).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            curves.push(CurveRow {
                method,
                query: q + 1,
                mean_utility: utils.iter().sum::<f64>() / n,
                mean_max_utility: mean_max,
                stderr,
            });
        }
        let all: Vec<f64> = mine.iter().flat_map(|t| t.proposal_seconds.iter().copied()).collect();
        let mean = if all.is_empty() { 0.0 } else { all.iter().sum::<f64>() / all.len() as f64 };
        timing.push(TimingRow {
            method,
            precompute_seconds: if method == Method::Gppe { prep.precompute_seconds } else { 0.0 },
            mean_per_proposal_seconds: mean,
        });
    }
    Ok(BenchmarkResult { curves, timing, trials, oracle_calls, front: prep.front })
}

/// Writes `curves.csv`, `timing.csv`, `plot.svg` and, for graph scenarios,
/// `oracle_calls.csv` into `dir`. Returns the written paths.
pub fn emit_results(result: &BenchmarkResult, dir: &FsPath) -> Result<Vec<PathBuf>, ExperimentError> {
    if result.is_empty() {
        return Err(ExperimentError::Invalid("nothing to write: the result has no curves".into()));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("curves.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["method", "query", "mean_utility", "mean_max_utility", "stderr"])?;
    for r in &result.curves {
        w.write_record([
            r.method.name().to_string(),
            r.query.to_string(),
            r.mean_utility.to_string(),
            r.mean_max_utility.to_string(),
            r.stderr.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("timing.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["method", "precompute_seconds", "mean_per_proposal_seconds"])?;
    for r in &result.timing {
        w.write_record([
            r.method.name().to_string(),
            r.precompute_seconds.to_string(),
            r.mean_per_proposal_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    if !result.oracle_calls.is_empty() {
        let path = dir.join("oracle_calls.csv");
        let mut w = csv::Writer::from_path(&path)?;
        for r in &result.oracle_calls {
            w.serialize(r)?;
        }
        w.flush()?;
        written.push(path);
    }

    let path = dir.join("plot.svg");
    fs::write(&path, render_svg(result))?;
    written.push(path);
    Ok(written)
}

/// A line plot of mean maximum utility per query, one line per method.
pub fn render_svg(result: &BenchmarkResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let queries = result.curves.iter().map(|r| r.query).max().unwrap_or(1).max(2);
    let lo = result.curves.iter().map(|r| r.mean_max_utility).fold(f64::INFINITY, f64::min).min(1.0);
    let hi = result.curves.iter().map(|r| r.mean_max_utility).fold(f64::NEG_INFINITY, f64::max).max(lo + 1e-3);
    let x = |q: usize| PAD + (q - 1) as f64 / (queries - 1) as f64 * (W - 2.0 * PAD);
    let y = |u: f64| H - PAD - (u - lo) / (hi - lo) * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">query</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(svg, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">mean max utility</text>"#, H / 2.0, H / 2.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{lo:.3}</text>"#, PAD - 4.0, H - PAD);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{hi:.3}</text>"#, PAD - 4.0, PAD + 4.0);

    let colors = ["#1f77b4", "#d62728"];
    let mut methods: Vec<Method> = result.curves.iter().map(|r| r.method).collect();
    methods.dedup();
    for (k, method) in methods.iter().enumerate() {
        let color = colors[k % colors.len()];
        let points: Vec<String> = result
            .curve(*method)
            .iter()
            .map(|r| format!("{:.2},{:.2}", x(r.query), y(r.mean_max_utility)))
            .collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, points.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - PAD - 60.0,
            PAD + 16.0 * k as f64,
            method.name()
        );
    }
    svg.push_str("</svg>\n");
    svg
}
