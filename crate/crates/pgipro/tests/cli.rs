use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pgipro"))
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/osdorp.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_documents_every_flag() {
    let cases: &[(&str, &[&str])] = &[
        ("front", &["--graph", "--source", "--target", "--tau", "--guidance"]),
        ("session", &["--graph", "--source", "--target", "--heuristic", "--guidance", "--transcript"]),
        (
            "bench",
            &["--scenario", "--methods", "--trials", "--queries", "--noise", "--seed", "--heuristic", "--guidance", "--threads", "--out"],
        ),
        ("fixture-verify", &["--graph"]),
        ("serve", &["--listen", "--session-ttl", "--max-sessions", "--oracle-budget", "--transcript-log"]),
    ];
    let top = run(&["--help"]);
    assert_eq!(top.status.code(), Some(0));
    for (sub, flags) in cases {
        assert!(stdout(&top).contains(sub), "{sub} missing from top-level help");
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
        let text = stdout(&out);
        for flag in *flags {
            assert!(text.contains(flag), "{sub} --help does not mention {flag}");
        }
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["fixture-verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["bench", "--scenario", "spiral", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn front_prints_the_seven_routes() {
    let f = fixture();
    let out = run(&["front", "--graph", f.to_str().unwrap(), "--source", "O", "--target", "D"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["obj_0", "obj_1", "path"]);
    let rows: Vec<(f64, f64, String)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    let values: Vec<[f64; 2]> = rows.iter().map(|r| [r.0, r.1]).collect();
    assert_eq!(values, pgipro::fixture::OSDORP_FRONT.to_vec());
    for (_, _, path) in &rows {
        assert!(path.starts_with("O|") && path.ends_with("|D"), "{path}");
    }
    // same output under the other guidance mode
    let again = run(&["front", "--graph", f.to_str().unwrap(), "--source", "O", "--target", "D", "--guidance", "manhattan"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn runtime_failures_exit_with_one() {
    let f = fixture();
    let out = run(&["front", "--graph", f.to_str().unwrap(), "--source", "O", "--target", "nowhere"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
    let out = run(&["front", "--graph", "/definitely/not/here.json", "--source", "O", "--target", "D"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["front", "--graph", f.to_str().unwrap(), "--source", "O", "--target", "D", "--tau=-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fixture_verify_accepts_the_bundle_and_rejects_a_tampered_copy() {
    let out = run(&["fixture-verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 7);

    let mut doc: Value = serde_json::from_str(pgipro::fixture::OSDORP_JSON).unwrap();
    let edges = doc["edges"].as_array_mut().unwrap();
    let first = edges.iter_mut().find(|e| e["from"] == "O").unwrap();
    first["costs"][0] = Value::from(first["costs"][0].as_f64().unwrap() + 1.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tampered.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = run(&["fixture-verify", "--graph", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

fn bench_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["bench", "--trials", "6", "--queries", "4", "--seed", "11", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn bench_writes_identical_files_for_identical_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = bench_into(a.path(), &["--scenario", "convex"]);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    let ob = bench_into(b.path(), &["--scenario", "convex", "--threads", "1"]);
    assert_eq!(ob.status.code(), Some(0));
    for name in ["curves.csv", "plot.svg"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let curves = std::fs::read_to_string(a.path().join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 2 * 4);
    let timing = std::fs::read_to_string(a.path().join("timing.csv")).unwrap();
    assert_eq!(timing.lines().count(), 3);
    assert!(!a.path().join("oracle_calls.csv").exists());
}

#[test]
fn bench_on_a_graph_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = format!("graph:{}:O:D", fixture().display());
    let out = bench_into(dir.path(), &["--scenario", &scenario, "--methods", "pgipro"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let curves = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 4);
    assert!(curves.lines().skip(1).all(|l| l.starts_with("pgipro,")));
    assert!(dir.path().join("oracle_calls.csv").exists());

    let bad = bench_into(dir.path(), &["--scenario", &format!("graph:{}:O:nowhere", fixture().display())]);
    assert_eq!(bad.status.code(), Some(1));
    let zero = run(&["bench", "--scenario", "convex", "--trials", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(zero.status.code(), Some(1));
}

fn session(script: &str, transcript: &Path) -> Output {
    let f = fixture();
    let mut child = bin()
        .args(["session", "--graph", f.to_str().unwrap(), "--source", "O", "--target", "D"])
        .args(["--transcript", transcript.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(script.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

/// Transcript with the wall-clock fields removed.
fn untimed(path: &Path) -> Value {
    let mut events: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    for e in events.as_array_mut().unwrap() {
        let obj = e.as_object_mut().unwrap();
        obj.remove("timestamp_micros");
        obj.remove("oracle_micros");
    }
    events
}

#[test]
fn terminal_session_is_scripted_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let script = "0\nA\n0\nb\n1\nA\nq\n";
    let first = session(script, &dir.path().join("one.json"));
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let lines: Vec<String> = stdout(&first).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("O|") && lines[1].ends_with("|D"));

    let second = session(script, &dir.path().join("two.json"));
    assert_eq!(first.stdout, second.stdout);
    let events = untimed(&dir.path().join("one.json"));
    assert_eq!(events, untimed(&dir.path().join("two.json")));
    let kinds: Vec<&str> = events.as_array().unwrap().iter().map(|e| e["kind"].as_str().unwrap()).collect();
    assert_eq!(
        kinds,
        ["initial_proposal", "steer", "comparison", "steer", "comparison", "steer", "comparison", "exit"]
    );
}

#[test]
fn terminal_session_stops_when_exhausted() {
    let dir = tempfile::tempdir().unwrap();
    let script = "0\nA\n".repeat(10);
    let out = session(&script, &dir.path().join("t.json"));
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no route improves"));
    assert!(stdout(&out).starts_with("length=568 m, crossings=8"), "{}", stdout(&out));
}
