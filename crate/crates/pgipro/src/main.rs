use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use pgipro::experiments::{emit_results, run_benchmark, BenchmarkConfig, Method, Scenario};
use pgipro::fixture::{osdorp, verify_osdorp, OSDORP_FRONT};
use pgipro::io::{load_graph, transcript_json, write_front_csv};
use pgipro::service::{serve, ServiceConfig};
use pgipro_core::graph::{MultiObjectiveGraph, NodeIndex};
use pgipro_core::ipro::enumerate_front;
use pgipro_core::oracle::{GuidanceMode, ModfsOracle};
use pgipro_core::session::{Direction, Heuristic, Preference, Session, SteerRequest, StepOutcome};

#[derive(Parser)]
#[command(name = "pgipro", version, about = "Preference-guided multi-objective route planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum HeuristicArg {
    Closest,
    Middle,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::Closest => Heuristic::ClosestDistance,
            HeuristicArg::Middle => Heuristic::MiddleDistance,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum GuidanceArg {
    Manhattan,
    Chebyshev,
}

impl From<GuidanceArg> for GuidanceMode {
    fn from(g: GuidanceArg) -> Self {
        match g {
            GuidanceArg::Manhattan => GuidanceMode::Manhattan,
            GuidanceArg::Chebyshev => GuidanceMode::ChebyshevAsf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the Pareto front between two nodes and print it as CSV.
    Front {
        /// Graph document (JSON).
        #[arg(long)]
        graph: PathBuf,
        /// Source node id.
        #[arg(long)]
        source: String,
        /// Target node id.
        #[arg(long)]
        target: String,
        /// Stop once every unexplored region is narrower than this.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// Neighbor ordering used by the search.
        #[arg(long, value_enum, default_value = "chebyshev")]
        guidance: GuidanceArg,
    },
    /// Steer towards a preferred route interactively on the terminal.
    Session {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        /// Referent selection heuristic.
        #[arg(long, value_enum, default_value = "middle")]
        heuristic: HeuristicArg,
        #[arg(long, value_enum, default_value = "chebyshev")]
        guidance: GuidanceArg,
        /// Write the interaction transcript here as JSON on exit.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Run simulated-user benchmarks and write curves.csv, timing.csv and plot.svg.
    Bench {
        /// convex, concave or graph:<file>:<src>:<dst>.
        #[arg(long)]
        scenario: Scenario,
        /// Comma-separated subset of pgipro,gppe.
        #[arg(long, value_delimiter = ',', default_value = "pgipro,gppe")]
        methods: Vec<Method>,
        /// Number of simulated users.
        #[arg(long, default_value_t = 300)]
        trials: usize,
        /// Queries per user.
        #[arg(long, default_value_t = 15)]
        queries: usize,
        /// Standard deviation of the utility noise.
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        /// Base seed; trial t uses seed + t.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "middle")]
        heuristic: HeuristicArg,
        #[arg(long, value_enum, default_value = "chebyshev")]
        guidance: GuidanceArg,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force the bundled fixture (or --graph) and check its seven-route front.
    FixtureVerify {
        /// Verify this document instead of the bundled fixture.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        /// Listen address.
        #[arg(long, env = "PGIPRO_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Idle session lifetime in seconds.
        #[arg(long, env = "PGIPRO_SESSION_TTL", default_value_t = 3600)]
        session_ttl: u64,
        /// Maximum number of open sessions.
        #[arg(long, env = "PGIPRO_MAX_SESSIONS", default_value_t = 1024)]
        max_sessions: usize,
        /// Time budget for the route search of one request, in seconds.
        #[arg(long, env = "PGIPRO_ORACLE_BUDGET", default_value_t = 30.0)]
        oracle_budget: f64,
        /// Append closed sessions' transcripts to this JSON-lines file.
        #[arg(long, env = "PGIPRO_TRANSCRIPT_LOG")]
        transcript_log: Option<PathBuf>,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn endpoints(graph: &MultiObjectiveGraph, source: &str, target: &str) -> Result<(NodeIndex, NodeIndex), Failure> {
    let s = graph.lookup(source).ok_or_else(|| Failure(format!("unknown node {source:?}")))?;
    let t = graph.lookup(target).ok_or_else(|| Failure(format!("unknown node {target:?}")))?;
    Ok((s, t))
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Front { graph, source, target, tau, guidance } => {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(Failure(format!("--tau must be a finite non-negative number, got {tau}")));
            }
            let g = Arc::new(load_graph(&graph)?);
            let (s, t) = endpoints(&g, &source, &target)?;
            let mut oracle = ModfsOracle::new(g.clone(), s, t, guidance.into())?;
            let front = enumerate_front(&mut oracle, tau)?;
            write_front_csv(io::stdout().lock(), &g, &front)?;
        }
        Command::Session { graph, source, target, heuristic, guidance, transcript } => {
            let g = Arc::new(load_graph(&graph)?);
            let (s, t) = endpoints(&g, &source, &target)?;
            let oracle = ModfsOracle::new(g.clone(), s, t, guidance.into())?;
            let mut session = Session::start_with_clock(oracle, heuristic.into(), Box::new(pgipro::clock::WallClock::new()))?;
            interactive(&g, &mut session)?;
            if let Some(path) = transcript {
                std::fs::write(path, transcript_json(session.transcript()))?;
            }
        }
        Command::Bench {
            scenario,
            methods,
            trials,
            queries,
            noise,
            seed,
            heuristic,
            guidance,
            threads,
            out,
        } => {
            let config = BenchmarkConfig {
                scenario,
                methods,
                trials,
                queries,
                noise_sigma: noise,
                base_seed: seed,
                heuristic: heuristic.into(),
                guidance: guidance.into(),
                threads,
            };
            let result = run_benchmark(&config)?;
            for path in emit_results(&result, &out)? {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::FixtureVerify { graph } => {
            let g = match graph {
                Some(p) => load_graph(p)?,
                None => osdorp(),
            };
            match verify_osdorp(&g) {
                Ok(front) => {
                    for v in &front {
                        println!("{v}");
                    }
                    eprintln!("fixture ok: {} routes match the expected front", front.len());
                }
                Err(found) => {
                    return Err(Failure(format!(
                        "fixture front mismatch: expected {:?}, brute force found {:?}",
                        OSDORP_FRONT,
                        found.iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>()
                    )))
                }
            }
        }
        Command::Serve { listen, session_ttl, max_sessions, oracle_budget, transcript_log } => {
            if !(oracle_budget > 0.0 && oracle_budget.is_finite()) {
                return Err(Failure(format!("--oracle-budget must be positive, got {oracle_budget}")));
            }
            let config = ServiceConfig {
                listen,
                session_ttl: Duration::from_secs(session_ttl),
                max_sessions,
                oracle_budget: Duration::from_secs_f64(oracle_budget),
                transcript_log,
            };
            tokio::runtime::Runtime::new()?.block_on(serve(config))?;
        }
    }
    Ok(())
}

fn describe(g: &MultiObjectiveGraph, v: &[f64]) -> String {
    g.objectives()
        .iter()
        .zip(v)
        .map(|(o, x)| format!("{}={x} {}", o.name, o.unit).trim_end().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// The terminal loop: pick an objective, then pick between two routes.
fn interactive(g: &MultiObjectiveGraph, session: &mut Session<ModfsOracle>) -> Result<(), Failure> {
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut out = io::stderr();
    let m = g.objective_count();
    let names: Vec<String> = g.objectives().iter().enumerate().map(|(i, o)| format!("{i}={}", o.name)).collect();
    writeln!(out, "initial route: {}", describe(g, &session.current().value))?;
    loop {
        write!(out, "improve which objective? [{}; prefix r to relax; q to finish] ", names.join(", "))?;
        out.flush()?;
        let Some(line) = lines.next() else { break };
        let line = line?;
        let line = line.trim();
        if line == "q" || line.is_empty() && m == 0 {
            break;
        }
        let (direction, index) = match line.strip_prefix('r') {
            Some(rest) => (Direction::Relax, rest.trim()),
            None => (Direction::Improve, line),
        };
        let Ok(objective) = index.parse::<usize>() else {
            writeln!(out, "expected an objective index")?;
            continue;
        };
        match session.steer(SteerRequest { objective, direction }) {
            Ok(StepOutcome::Candidate { candidate, incumbent }) => {
                writeln!(out, "A (new):  {}", describe(g, &candidate.value))?;
                writeln!(out, "B (best): {}", describe(g, &incumbent.value))?;
                let preferred = loop {
                    write!(out, "prefer A or B? ")?;
                    out.flush()?;
                    match lines.next().transpose()?.as_deref().map(str::trim) {
                        Some("A" | "a") => break Preference::Candidate,
                        Some("B" | "b") => break Preference::Incumbent,
                        Some(_) => continue,
                        None => break Preference::Incumbent,
                    }
                };
                session.record_comparison(preferred)?;
            }
            Ok(StepOutcome::Exhausted { .. }) => {
                writeln!(out, "no route improves that objective any further")?;
                break;
            }
            Err(e) => writeln!(out, "{e}")?,
        }
    }
    let best = session.close();
    println!("{}", describe(g, &best.value));
    println!("{}", best.payload.node_ids(g).join("|"));
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors and 0 for --help.
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
