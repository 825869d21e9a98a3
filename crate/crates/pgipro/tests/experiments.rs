use std::path::{Path, PathBuf};
use std::sync::Arc;

use pgipro::experiments::{
    emit_results, make_synthetic_front, run_benchmark, BenchmarkConfig, BenchmarkResult, FrontShape, Method,
    Scenario,
};
use pgipro::fixture::{osdorp, osdorp_front, OSDORP_SOURCE, OSDORP_TARGET};
use pgipro_core::session::{Preference, StepOutcome};
use pgipro_core::user::UserModel;
use pgipro_core::{FrontLookupOracle, GuidanceMode, Heuristic, ModfsOracle, ParetoOracle, Session, SteerRequest};
use rand::{Rng, SeedableRng};

fn fixture_scenario() -> Scenario {
    Scenario::Graph {
        path: Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/osdorp.json"),
        source: OSDORP_SOURCE.into(),
        target: OSDORP_TARGET.into(),
    }
}

fn small(scenario: Scenario, trials: usize, queries: usize) -> BenchmarkConfig {
    BenchmarkConfig { trials, queries, base_seed: 3, ..BenchmarkConfig::new(scenario) }
}

fn check_shape(result: &BenchmarkResult, config: &BenchmarkConfig) {
    for &method in &config.methods {
        let curve = result.curve(method);
        assert_eq!(curve.len(), config.queries);
        for (q, row) in curve.iter().enumerate() {
            assert_eq!(row.query, q + 1);
            assert!((0.0..=1.0).contains(&row.mean_utility));
            assert!((0.0..=1.0).contains(&row.mean_max_utility));
            assert!(row.stderr >= 0.0);
        }
        assert!(curve.windows(2).all(|w| w[0].mean_max_utility <= w[1].mean_max_utility));
    }
    assert_eq!(result.trials.len(), config.trials * config.methods.len());
    for t in &result.trials {
        assert_eq!(t.records.len(), config.queries);
        let mut running = f64::NEG_INFINITY;
        for r in &t.records {
            assert!((0.0..=1.0).contains(&r.utility));
            assert!(r.max_utility >= r.utility && r.max_utility >= running);
            running = r.max_utility;
        }
        // every shown vector is on the instance front
        assert!(t.records.iter().all(|r| result.front.contains(&r.shown)));
    }
}

#[test]
fn synthetic_fronts_have_thirty_points() {
    for shape in [FrontShape::Convex, FrontShape::Concave] {
        let front = make_synthetic_front(shape, 30).unwrap();
        assert_eq!(front.len(), 30);
        assert_eq!(front[0].as_slice(), &[0.0, 1.0]);
        assert_eq!(front[29].as_slice(), &[1.0, 0.0]);
        for w in front.windows(2) {
            assert!(w[0][0] < w[1][0] && w[0][1] > w[1][1]);
        }
    }
}

#[test]
fn synthetic_benchmark_shape_and_timing() {
    let config = small(Scenario::Synthetic(FrontShape::Convex), 12, 5);
    let result = run_benchmark(&config).unwrap();
    check_shape(&result, &config);
    assert_eq!(result.front.len(), 30);
    assert_eq!(result.timing(Method::PgIpro).unwrap().precompute_seconds, 0.0);
    assert!(result.oracle_calls.is_empty());
}

#[test]
fn graph_benchmark_shape_and_timing() {
    let config = small(fixture_scenario(), 6, 4);
    let result = run_benchmark(&config).unwrap();
    check_shape(&result, &config);
    assert_eq!(result.front, osdorp_front());
    let pg = result.timing(Method::PgIpro).unwrap();
    let gp = result.timing(Method::Gppe).unwrap();
    assert_eq!(pg.precompute_seconds, 0.0);
    assert!(gp.precompute_seconds > 0.0);
    assert!(pg.mean_per_proposal_seconds > 0.0);
    assert!(!result.oracle_calls.is_empty());
    assert!(result.oracle_calls.iter().all(|c| c.outcome == "success" || c.outcome == "infeasible"));
}

#[test]
fn results_are_independent_of_thread_count() {
    let mut config = small(Scenario::Synthetic(FrontShape::Concave), 16, 6);
    config.threads = Some(1);
    let a = run_benchmark(&config).unwrap();
    config.threads = Some(4);
    let b = run_benchmark(&config).unwrap();
    config.threads = None;
    let c = run_benchmark(&config).unwrap();
    assert_eq!(a.curves, b.curves);
    assert_eq!(a.curves, c.curves);
    let records = |r: &BenchmarkResult| r.trials.iter().map(|t| (t.trial, t.method, t.records.clone())).collect::<Vec<_>>();
    assert_eq!(records(&a), records(&b));
}

#[test]
fn different_seeds_give_different_users() {
    let a = run_benchmark(&small(Scenario::Synthetic(FrontShape::Convex), 8, 3)).unwrap();
    let mut config = small(Scenario::Synthetic(FrontShape::Convex), 8, 3);
    config.base_seed = 99;
    let b = run_benchmark(&config).unwrap();
    assert_ne!(a.curves, b.curves);
}

#[test]
fn single_method_runs_only_that_method() {
    let mut config = small(Scenario::Synthetic(FrontShape::Convex), 4, 3);
    config.methods = vec![Method::Gppe];
    let result = run_benchmark(&config).unwrap();
    assert!(result.curve(Method::PgIpro).is_empty());
    assert_eq!(result.curve(Method::Gppe).len(), 3);
    assert!(result.timing(Method::PgIpro).is_none());
}

#[test]
fn invalid_configs_are_refused() {
    let base = small(Scenario::Synthetic(FrontShape::Convex), 4, 3);
    assert!(run_benchmark(&BenchmarkConfig { trials: 0, ..base.clone() }).is_err());
    assert!(run_benchmark(&BenchmarkConfig { queries: 0, ..base.clone() }).is_err());
    assert!(run_benchmark(&BenchmarkConfig { methods: vec![], ..base.clone() }).is_err());
    assert!(run_benchmark(&BenchmarkConfig { noise_sigma: -1.0, ..base.clone() }).is_err());
    let missing = Scenario::Graph { path: PathBuf::from("/no/such/graph.json"), source: "a".into(), target: "b".into() };
    assert!(run_benchmark(&small(missing, 1, 1)).is_err());
}

#[test]
fn empty_results_are_not_written() {
    let dir = tempfile::tempdir().unwrap();
    let empty = BenchmarkResult {
        curves: vec![],
        timing: vec![],
        trials: vec![],
        oracle_calls: vec![],
        front: vec![],
    };
    assert!(emit_results(&empty, dir.path()).is_err());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn emitted_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(fixture_scenario(), 3, 3);
    let result = run_benchmark(&config).unwrap();
    let written = emit_results(&result, dir.path()).unwrap();
    let names: Vec<String> = written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["curves.csv", "timing.csv", "oracle_calls.csv", "plot.svg"]);
    let mut rdr = csv::Reader::from_path(dir.path().join("curves.csv")).unwrap();
    let rows: Vec<(String, usize, f64, f64, f64)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), result.curves.len());
    for (row, curve) in rows.iter().zip(&result.curves) {
        assert_eq!(row.0, curve.method.name());
        assert_eq!(row.1, curve.query);
        assert_eq!(row.3, curve.mean_max_utility);
    }
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn both_methods_face_the_same_user() {
    let config = BenchmarkConfig { noise_sigma: 0.0, ..small(Scenario::Synthetic(FrontShape::Convex), 5, 2) };
    let result = run_benchmark(&config).unwrap();
    let front = make_synthetic_front(FrontShape::Convex, 30).unwrap();
    for t in &result.trials {
        let user = UserModel::sample(2, config.base_seed + t.trial as u64)
            .unwrap()
            .with_noise(0.0)
            .with_normalization(&[0.0, 0.0], &[1.0, 1.0])
            .unwrap();
        for r in &t.records {
            assert!(front.contains(&r.shown));
            assert_eq!(r.utility, user.utility(r.shown.as_slice()));
        }
    }
}

fn steer_values<O: ParetoOracle>(oracle: O, heuristic: Heuristic, requests: &[(usize, bool)]) -> Vec<Vec<f64>> {
    let mut session = Session::start(oracle, heuristic).unwrap();
    let mut out = vec![session.current().value.as_slice().to_vec()];
    for &(objective, take) in requests {
        match session.steer(SteerRequest::improve(objective)).unwrap() {
            StepOutcome::Candidate { candidate, .. } => {
                out.push(candidate.value.as_slice().to_vec());
                let pref = if take { Preference::Candidate } else { Preference::Incumbent };
                session.record_comparison(pref).unwrap();
            }
            StepOutcome::Exhausted { .. } => {
                out.push(vec![]);
                break;
            }
        }
    }
    out
}

#[test]
fn front_lookup_and_graph_search_steer_identically_on_the_fixture() {
    let g = Arc::new(osdorp());
    let s = g.lookup(OSDORP_SOURCE).unwrap();
    let t = g.lookup(OSDORP_TARGET).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for stream in 0..200 {
        let len = rng.random_range(1..12);
        let requests: Vec<(usize, bool)> = (0..len).map(|_| (rng.random_range(0..2), rng.random_bool(0.5))).collect();
        for mode in [GuidanceMode::ChebyshevAsf, GuidanceMode::Manhattan] {
            for heuristic in [Heuristic::MiddleDistance, Heuristic::ClosestDistance] {
                let search = steer_values(ModfsOracle::new(g.clone(), s, t, mode).unwrap(), heuristic, &requests);
                let lookup = steer_values(FrontLookupOracle::new(osdorp_front(), mode), heuristic, &requests);
                assert_eq!(search, lookup, "stream {stream} {mode:?} {heuristic:?} {requests:?}");
            }
        }
    }
}
