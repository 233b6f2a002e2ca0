use std::path::Path;
use std::process::{Command, Output};

use qpos_cli::report::Report;

fn qpos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpos")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const TWO_POINT: &str = r#"{
  "schema_version": 1,
  "space": {"kind": "monotone", "k": 1},
  "sets": {"a": {"type": "points", "points": [[0, 0], [1, 1]]}},
  "queries": [{"op": "is_q_positive", "set": "a", "expect": "HOLDS"}]
}"#;

const CROSSED: &str = r#"{
  "schema_version": 1,
  "space": {"kind": "monotone", "k": 1},
  "sets": {"a": {"type": "points", "points": [[0, 1], [1, 0]]}},
  "queries": [{"op": "is_q_positive", "set": "a", "expect": "HOLDS"}]
}"#;

fn run(dir: &Path, scenario: &str) -> (i32, Option<Report>) {
    let sc = write(dir, "scenario.json", scenario);
    let out = dir.join("report.json");
    let _ = std::fs::remove_file(&out);
    let o = qpos(&["run", &sc, "-o", out.to_str().unwrap()]);
    let rep = std::fs::read_to_string(&out).ok().map(|t| serde_json::from_str(&t).unwrap());
    (o.status.code().unwrap(), rep)
}

#[test]
fn matching_expectation_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = run(dir.path(), TWO_POINT);
    assert_eq!(code, 0);
    assert_eq!(rep.unwrap().summary.holds, 1);
}

#[test]
fn mismatch_exits_one_with_witness_pair() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = run(dir.path(), CROSSED);
    assert_eq!(code, 1);
    let rep = rep.unwrap();
    let (p, q) = rep.queries[0].witness.as_ref().unwrap().as_pair().unwrap();
    assert!((p[0] - q[0]) * (p[1] - q[1]) < 0.0);
}

#[test]
fn schema_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "{ not json").0, 2);
    assert_eq!(run(dir.path(), &TWO_POINT.replace("is_q_positive", "no_such_op")).0, 2);
    assert_eq!(run(dir.path(), &TWO_POINT.replace("\"set\": \"a\"", "\"set\": \"b\"")).0, 2);
    assert_eq!(run(dir.path(), &TWO_POINT.replace("\"schema_version\": 1", "\"schema_version\": 9")).0, 2);
    assert_eq!(run(dir.path(), &TWO_POINT.replace("[1, 1]", "[1, 1, 1]")).0, 2);
    let o = qpos(&["run", "/nonexistent/scenario.json", "-o", "/tmp/x.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn evaluation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let sc = TWO_POINT.replace(
        r#"{"op": "is_q_positive", "set": "a", "expect": "HOLDS"}"#,
        r#"{"op": "pi_member", "set": "a", "point": [1, 2, 3]}"#,
    );
    let (code, rep) = run(dir.path(), &sc);
    assert_eq!(code, 2);
    assert!(rep.unwrap().queries[0].error.is_some());
}

const MIXED: &str = r#"{
  "schema_version": 1,
  "space": {"kind": "monotone", "k": 1},
  "seed": 7,
  "grid": {"half": 1.5, "pitch": 0.1, "multistarts": 2},
  "sets": {
    "diag": {"type": "csv_placeholder"},
    "line": {"type": "affine", "anchor": [0, 0], "basis": [[1, 0]]},
    "o": {"type": "points", "points": [[0, 0]]},
    "pm": {"type": "descriptor", "descriptor": {"kind": "finite", "points": [[-1], [1]]}}
  },
  "queries": [
    {"op": "premax_certify", "set": "line", "expect": "HOLDS"},
    {"op": "premax_certify", "set": "o", "expect": "FAILS"},
    {"op": "conj_eval", "set": "diag", "point": [0.25, 0.25]},
    {"op": "conj_eval", "set": "diag", "point": [3, 0]},
    {"op": "repr_hull_member", "set": "diag", "point": [0.5, 0.5], "expect": "HOLDS"},
    {"op": "phi_closed_eval", "set": "pm", "point": [0]},
    {"op": "midpoint_ball_check", "set": "pm", "point": [-1], "other": [1], "expect": "FAILS"},
    {"op": "extension_continuum", "set": "o", "point": [1, 0], "other": [0, 1], "count": 11}
  ]
}"#;

fn mixed(dir: &Path) -> String {
    write(dir, "diag.csv", "0,0\n0.5,0.5\n1,1\n");
    MIXED.replace(r#"{"type": "csv_placeholder"}"#, r#"{"type": "points", "csv": "diag.csv"}"#)
}

#[test]
fn mixed_scenario_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = run(dir.path(), &mixed(dir.path()));
    let rep = rep.unwrap();
    assert_eq!(code, 0, "{rep:#?}");
    let q = &rep.queries;
    assert_eq!(q[0].classification.as_deref(), Some("PREMAXIMAL_VIA_AFFINE_PI"));
    assert_eq!(q[1].classification.as_deref(), Some("NOT_PREMAXIMAL"));
    assert!(q[1].witness.as_ref().unwrap().as_pair().is_some());
    assert!(q[2].value.unwrap().is_finite());
    assert_eq!(q[3].value, Some(f64::INFINITY));
    assert!((q[5].value.unwrap() + 0.5).abs() < 1e-12);
    assert_eq!(rep.summary.values, 3);
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sc = mixed(dir.path());
    let a = run(dir.path(), &sc).1.unwrap();
    let b = run(dir.path(), &sc).1.unwrap();
    assert_eq!(
        serde_json::to_string(&a.without_timing()).unwrap(),
        serde_json::to_string(&b.without_timing()).unwrap()
    );
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&back).unwrap() + "\n", text);
}

#[test]
fn thread_cap_keeps_report_order() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", &mixed(dir.path()));
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("r{threads}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_qpos"))
            .env("QPOS_THREADS", threads)
            .args(["run", &sc, "-o", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        let r: Report = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
        reports.push(r.without_timing());
    }
    assert_eq!(reports[0], reports[1]);
    let o =
        Command::new(env!("CARGO_BIN_EXE_qpos")).env("QPOS_THREADS", "zero").args(["suite", "core"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn global_flags_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", TWO_POINT);
    let out = dir.path().join("r.json");
    let o = qpos(&["--tolerance", "1e-6", "--grid-pitch", "0.5", "run", &sc, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: Report = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r.environment.tolerance, 1e-6);
    assert_eq!(r.environment.grid_pitch, 0.5);
    assert_eq!(qpos(&["--tolerance", "-1", "suite", "core"]).status.code(), Some(2));
}

#[test]
fn eval_subcommand() {
    let o = qpos(&["eval", "q_value", r#"{"space": {"kind": "monotone", "k": 1}, "point": [2, 3]}"#]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], 6.0);
    let o = qpos(&[
        "eval",
        "lipschitz_check",
        r#"{"space": {"kind": "lipschitz", "lipschitz": 1, "n1": 1, "n2": 1},
            "set": {"type": "graph", "domain": [[0], [1]], "values": [[0], [2]]},
            "expect": "FAILS"}"#,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(qpos(&["eval", "q_value", "{}"]).status.code(), Some(2));
    assert_eq!(qpos(&["eval", "bogus", r#"{"space": {"kind": "hilbert", "k": 1}}"#]).status.code(), Some(2));
}

#[test]
fn suite_exit_codes() {
    assert_eq!(qpos(&["suite", "nope"]).status.code(), Some(2));
    let o = qpos(&["suite", "lipschitz", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(qpos(&["suite", "core", "--mutate-q-sign"]).status.code(), Some(1));
}

#[test]
fn suite_pass_counts_stable_across_seeds() {
    let mut counts = Vec::new();
    for seed in 0..5 {
        let o = qpos(&["suite", "hilbert", "--seed", &seed.to_string()]);
        assert_eq!(o.status.code(), Some(0));
        let text = String::from_utf8(o.stdout).unwrap();
        counts.push(text.lines().last().unwrap().to_owned());
    }
    assert!(counts.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
}
